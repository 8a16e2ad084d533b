"""Self-convergence of the pure-state integrators at one (N, r) point."""
import argparse

import numpy as np

from squeeze_transfer import dynamics as D, states as S


def distance(a, b):
    return max(float(np.max(np.abs(a.amplitudes[M] - b.amplitudes[M]))) for M in a.sectors)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=4)
    ap.add_argument("--r", type=float, default=1.0)
    args = ap.parse_args()
    amps = S.boson_amplitudes(S.SqueezeSpec(args.r))
    init = S.initial_product_state(args.n, amps)
    ref = D.evolve_schrodinger(init, D.FIG2_PULSES, D.IntegratorSettings(rtol=1e-12, atol=1e-14))
    print(f"target TVD at reference: {D.target_fidelity(ref, args.n, amps).tv_distance:.3e}")
    for rtol in (1e-6, 1e-8, 1e-10):
        out = D.evolve_schrodinger(init, D.FIG2_PULSES, D.IntegratorSettings(rtol=rtol, atol=rtol / 100,
                                                                              conservation_tol=1.0))
        print(f"dop853 rtol {rtol:g}: max amplitude error {distance(out, ref):.2e}, nfev {out.meta['nfev']}, norm drift {out.meta['max_norm_drift']:.1e}")
    for steps in (250, 500, 1000, 2000):
        out = D.evolve_schrodinger(init, D.FIG2_PULSES, D.IntegratorSettings(method="magnus4", fixed_steps=steps))
        print(f"magnus4 {steps} steps: max amplitude error {distance(out, ref):.2e}")


if __name__ == "__main__":
    main()
