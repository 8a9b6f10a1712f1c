"""Fitted tail exponents against the diversity order N - M + 1.

Also reports per-layer exponents and the tail of the inverse sub-lattice
volume 1/det(R_k^H R_k), which should track the layer count.
"""
import argparse

import numpy as np

from latticetail.montecarlo import (TrialConfig, float_thresholds, empirical_ccdf, fit_tail,
                                    run_trials)

SHAPES = ((2, 2), (3, 2), (3, 3), (4, 3), (4, 4), (5, 4))


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--trials", type=int, default=50_000)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--method", default="qrd", choices=["qrd", "lll", "vblast"])
    p.add_argument("--workers", type=int)
    args = p.parse_args()

    print(f"{'N x M':>6} {'N-M+1':>6} {'xi(S)':>7}  per-layer xi(S_k) / xi(1/det)")
    for n, m in SHAPES:
        samples = run_trials(TrialConfig(n, m, 15.0, args.trials, args.seed, method=args.method),
                             workers=args.workers)
        layers = []
        for k in range(1, m + 1):
            v = samples.inv_volume[:, k - 1]
            fv = fit_tail(empirical_ccdf(v, float_thresholds(v)))
            layers.append(f"{samples.fit(k).exponent:.2f}/{fv.exponent:.2f}")
        xi = samples.fit().exponent
        print(f"{n}x{m:<4} {n - m + 1:>6} {xi:>7.3f}  " + "  ".join(layers)
              + ("" if np.isfinite(xi) else "  (fit unreliable)"))


if __name__ == "__main__":
    main()
