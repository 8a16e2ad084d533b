"""Wineland gain of the transferred state vs N for the slow-coupling pulses."""
import argparse

from squeeze_transfer import dynamics as D, metrology as Mt, states as S


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--r", type=float, default=1.5)
    ap.add_argument("--n", type=int, nargs="*", default=list(range(4, 53, 8)))
    args = ap.parse_args()
    amps = S.boson_amplitudes(S.SqueezeSpec(args.r))
    print("N,xi_sq,gain_db,chi_ss_sq")
    for n in args.n:
        final = D.evolve_schrodinger(S.initial_product_state(n, amps), D.FIG4_PULSES)
        rep = Mt.report(final)
        print(f"{n},{rep.xi_sq:.6g},{rep.gain_db:.4f},{rep.chi_ss_sq:.6g}")


if __name__ == "__main__":
    main()
