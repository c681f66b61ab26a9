"""Random compactly supported algebra elements for property checks."""

import numpy as np

from .algebra import AlgebraElement, Kernel

__all__ = ["random_element", "sample_points", "block_values"]


def _cplx(rng, *shape):
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


def _intra(rng, ell_other, radius):
    c = _cplx(rng, 3)
    w = _cplx(rng, 2)

    def func(g, m):
        g, m = np.asarray(g), np.asarray(m)
        phase = 2 * np.pi * g / ell_other
        return ((c[0] + c[1] * m + c[2] * m * m)
                * (1 + w[0] * np.cos(phase) + w[1] * np.sin(2 * phase)))
    return Kernel(func, radius)


def _inter(rng, radius):
    c = _cplx(rng, 3)

    def func(x):
        x = np.asarray(x)
        bump = np.clip(1 - (x / radius) ** 2, 0, None) ** 2
        return bump * (c[0] + c[1] * x + c[2] * x * x)
    return Kernel(func, radius)


def random_element(rng, ell1, ell2, reach=1.6):
    """Element with all four blocks non-zero and supports of order ``reach``.

    Intra-chain radii sit halfway between lattice points, so no lattice hop
    lies on a support boundary.
    """
    r11 = (np.floor(reach / ell1 * rng.uniform(0.6, 1.0)) + 0.5) * ell1
    r22 = (np.floor(reach / ell2 * rng.uniform(0.6, 1.0)) + 0.5) * ell2
    r12 = reach * rng.uniform(0.5, 1.0)
    r21 = reach * rng.uniform(0.5, 1.0)
    return AlgebraElement(ell1, ell2, f11=_intra(rng, ell2, r11), f12=_inter(rng, r12),
                          f21=_inter(rng, r21), f22=_intra(rng, ell1, r22))


def sample_points(rng, ell1, ell2, n, span=3.0):
    """Random arguments ``(gamma2, m, q, p, gamma1, n)`` for pointwise comparisons."""
    k1 = rng.integers(-int(span / ell1) - 1, int(span / ell1) + 2, n)
    k2 = rng.integers(-int(span / ell2) - 1, int(span / ell2) + 2, n)
    return {
        "gamma2": rng.uniform(-ell2 / 2, ell2 / 2, n),
        "m": k1 * ell1,
        "q": rng.uniform(-span, span, n),
        "p": rng.uniform(-span, span, n),
        "gamma1": rng.uniform(-ell1 / 2, ell1 / 2, n),
        "n": k2 * ell2,
    }


def block_values(f, pts):
    """Concatenated values of the four blocks at ``pts``."""
    return np.concatenate([f.b11(pts["gamma2"], pts["m"]), f.b12(pts["q"]),
                           f.b21(pts["p"]), f.b22(pts["gamma1"], pts["n"])])
