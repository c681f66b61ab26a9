"""Geometry of the two chains: supercells, ratio scans and periodic distances."""

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

__all__ = ["SupercellTooSmall", "SupercellParams", "supercell_params",
           "scan_ratios", "min_image_displacement", "reduce_to_cell",
           "is_commensurate", "lattice_constants"]


class SupercellTooSmall(ValueError):
    """Raised when a chain has fewer than three sites per supercell."""


@dataclass(frozen=True)
class SupercellParams:
    """Periodic approximant with ``p`` sites of chain 1 and ``q`` of chain 2.

    The lattice constants are normalized so that ``ell1 * ell2 == 1`` and the
    period is ``L = sqrt(p q) = p ell1 = q ell2``.
    """

    p: int
    q: int
    ell1: float
    ell2: float
    alpha: float
    L: float

    @property
    def N(self):
        return self.p + self.q


def supercell_params(p, q):
    p, q = int(p), int(q)
    if p < 3 or q < 3:
        # a 2-site ring folds the +ell and -ell neighbours onto one site
        raise SupercellTooSmall(f"supercell too small: p={p}, q={q} (need >= 3)")
    return SupercellParams(p=p, q=q, ell1=math.sqrt(q / p), ell2=math.sqrt(p / q),
                           alpha=p / q, L=math.sqrt(p * q))


def lattice_constants(alpha):
    """Return ``(ell1, ell2)`` with ``ell2 / ell1 == alpha`` and unit product."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    return 1.0 / math.sqrt(alpha), math.sqrt(alpha)


def scan_ratios(N, alpha_min, alpha_max):
    """All ``(p, N - p)`` with ``alpha_min <= p / (N - p) <= alpha_max``.

    Pairs are not reduced to lowest terms, so equal ratios coming from
    different supercell sizes all appear.
    """
    if N < 6:
        raise ValueError("N must be at least 6")
    if not 0 < alpha_min < alpha_max:
        raise ValueError("need 0 < alpha_min < alpha_max")
    # exact rational comparison so that p = N/7 lands inside [1/6, 6]
    lo = Fraction(alpha_min).limit_denominator(10**9)
    hi = Fraction(alpha_max).limit_denominator(10**9)
    return [(p, N - p) for p in range(1, N) if lo <= Fraction(p, N - p) <= hi]


def min_image_displacement(x, y, L):
    """Representative of ``(y - x) mod L`` in ``[-L/2, L/2)``.

    Works elementwise on arrays.
    """
    d = np.subtract(y, x)
    out = d - L * np.floor(d / L + 0.5)
    # floating round-off can land exactly on +L/2
    out = np.where(out >= L / 2, out - L, out)
    return out if np.ndim(out) else float(out)


def reduce_to_cell(gamma, ell):
    """Map a torus coordinate to the fundamental domain ``[-ell/2, ell/2)``."""
    return min_image_displacement(0.0, gamma, ell)


def is_commensurate(p, q):
    """Always true: any rational ratio ``p/q`` has a common superlattice.

    The scan approximates incommensurate ratios by such rationals.
    """
    if p <= 0 or q <= 0:
        raise ValueError("p and q must be positive")
    return True
