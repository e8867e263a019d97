"""Where the field QFI of an 8-site chain peaks, with and without the bath.

At weak coupling the peak drifts toward the critical field h = J as the chain
cools. At strong coupling the dressed field C h and the dressed exchange move
the peak to a larger bare field.

    python demos/field_peak_vs_temperature.py
"""

from __future__ import annotations

import numpy as np
from scipy import optimize

from xyqfi import BathParams, ChainParams, phase_boundary_h, qfi_total

CHAIN = ChainParams(8, 1.0, 0.25, 1.0)
BATH = BathParams(0.2, 1.0)


def peak_field(beta: float, regime: str) -> float:
    def neg_qfi(h: float) -> float:
        return -qfi_total(CHAIN.with_(h=h), beta, "h", BATH, regime).total

    grid = np.linspace(0.0, 2.0, 81)
    i = int(np.argmin([neg_qfi(h) for h in grid]))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
    return float(optimize.minimize_scalar(neg_qfi, bounds=(lo, hi), method="bounded").x)


def main() -> None:
    print(f"{'beta':>6} {'weak peak':>10} {'strong peak':>12} {'dressed h*':>11}")
    for beta in (1.0, 2.0, 3.0, 4.0, 5.0):
        print(f"{beta:6.2f} {peak_field(beta, 'weak'):10.4f} {peak_field(beta, 'strong'):12.4f} "
              f"{phase_boundary_h(CHAIN, BATH, beta):11.4f}")


if __name__ == "__main__":
    main()
