"""How fast the positive-parity approximation becomes exact, and the
subdivision potential that measures non-additivity of the finite chain.

    python demos/finite_size_effects.py
"""

from __future__ import annotations

import numpy as np

from xyqfi import BathParams, ChainParams, microscopic_subdivision, ratio_ppa, subdivision_regression

BATH = BathParams(0.2, 1.0)


def main() -> None:
    print("max |F_PPA / F - 1| over h in [0, 2] at beta = 5")
    for n in (4, 6, 8, 12, 16):
        devs = {regime: max(abs(ratio_ppa(ChainParams(n, 1.0, 0.25, float(h)), 5.0, "h", BATH, regime) - 1)
                            for h in np.linspace(0.0, 2.0, 41))
                for regime in ("weak", "strong")}
        print(f"  N={n:2d}  weak {devs['weak']:.4f}  strong {devs['strong']:.4f}")

    print("\nsubdivision potential of the N = 8 chain at h = 1")
    chain = ChainParams(8, 1.0, 0.25, 1.0)
    for beta in (0.5, 1.0, 2.0, 5.0):
        bare = subdivision_regression(chain, beta)
        dressed = subdivision_regression(chain, beta, source="effective", bath=BATH)
        micro = microscopic_subdivision(chain, BATH, beta)
        print(f"  beta={beta:4.1f}  bare {bare.e_sub:+.5f} (a={bare.a_ratio:+.5f})  "
              f"dressed {dressed.e_sub:+.5f}  microscopic {micro:+.5f}")


if __name__ == "__main__":
    main()
