"""Regenerate every figure preset as CSV.

    python3 scripts/reproduce_figures.py --out results [--max-n 20] [--only 2a 3c]
"""
import argparse
import time

from squeeze_transfer.figures import FIGURE_IDS, run_figure


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results")
    ap.add_argument("--max-n", type=int, default=None)
    ap.add_argument("--only", nargs="*", choices=FIGURE_IDS, default=list(FIGURE_IDS))
    args = ap.parse_args()
    for fig in args.only:
        t0 = time.perf_counter()
        res = run_figure(fig, args.out, args.max_n)
        print(f"{fig}: {len(res.rows)} rows, {res.failed} failed, {time.perf_counter() - t0:.1f} s")
        for sub in res.substitutions:
            print(f"    {sub}")


if __name__ == "__main__":
    main()
