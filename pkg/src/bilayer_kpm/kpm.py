"""Chebyshev expansion of spectral densities (kernel polynomial method)."""

from dataclasses import dataclass

import numpy as np
from scipy.fft import dct

__all__ = ["SpectralMoments", "EdgeSingularity", "rescale_bounds",
           "chebyshev_values", "chebyshev_matrix", "jackson_coefficients",
           "dos_moments", "node_abscissas", "dos_nodes", "dos_reconstruct",
           "integrated_dos", "integrated_dos_at", "cosine_matrix"]

_A_FLOOR = 1e-12


class EdgeSingularity(ValueError):
    """Energy at or beyond the edge of the rescaled band."""


@dataclass(frozen=True, eq=False)
class SpectralMoments:
    """Chebyshev moments of one Hamiltonian.

    Attributes
    ----------
    a, b : float
        Energies are mapped to ``(E - b) / a``.
    M : int
        Polynomial degree; ``mu`` holds ``M + 1`` moments.
    mu : ndarray
        Density-of-states moments, normalized per site (``mu[0] == 1``).
    ccc : ndarray or None
        ``(M + 1, M + 1)`` moments of the current-current correlation measure.
    """

    a: float
    b: float
    M: int
    mu: np.ndarray
    ccc: np.ndarray = None

    def rescale(self, E):
        return (np.asarray(E) - self.b) / self.a


def rescale_bounds(eigs, epsilon=0.01):
    """Center ``b`` and half-width ``a`` mapping the spectrum into ``(-1+eps, 1-eps)``."""
    eigs = np.asarray(eigs, float)
    if eigs.size == 0:
        raise ValueError("empty spectrum")
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    lo, hi = eigs.min(), eigs.max()
    b = (hi + lo) / 2
    a = max((hi - lo) / (2 * (1 - epsilon)), _A_FLOOR)
    return float(a), float(b)


def chebyshev_values(x, M):
    """``[T_0(x), ..., T_M(x)]`` from the three-term recursion."""
    x = float(x)
    if abs(x) > 1:
        raise ValueError(f"|x| must be <= 1, got {x}")
    return chebyshev_matrix(np.array([x]), M)[:, 0]


def chebyshev_matrix(x, M):
    """``T[m, i] = T_m(x[i])`` for ``m = 0..M``."""
    if M < 0:
        raise ValueError("M must be >= 0")
    x = np.asarray(x, float)
    T = np.empty((M + 1, x.size))
    T[0] = 1.0
    if M >= 1:
        T[1] = x
    for m in range(1, M):
        T[m + 1] = 2 * x * T[m] - T[m - 1]
    return T


def jackson_coefficients(M):
    if M < 0:
        raise ValueError("M must be >= 0")
    m = np.arange(M + 1)
    th = np.pi / (M + 1)
    return ((M - m + 1) * np.cos(m * th) + np.sin(m * th) / np.tan(th)) / (M + 1)


def dos_moments(eigs, a, b, M):
    """Per-site moments ``mu_m = mean_j T_m((lambda_j - b) / a)``."""
    x = (np.asarray(eigs, float) - b) / a
    if np.any(np.abs(x) >= 1):
        raise ValueError("eigenvalue outside (-1, 1) after rescaling: bad a, b")
    mu = chebyshev_matrix(x, M).mean(axis=1)
    return SpectralMoments(a=float(a), b=float(b), M=int(M), mu=mu)


def node_abscissas(M):
    """Chebyshev-Gauss points ``cos(pi (k + 1/2) / M)``, descending in ``k``."""
    return np.cos(np.pi * (np.arange(M) + 0.5) / M)


def _weights(M):
    # (2 - delta_m0) g_m: the factor that makes mu_0 + 2 sum mu_m g_m T_m
    w = 2.0 * jackson_coefficients(M)
    w[0] /= 2
    return w


def cosine_matrix(M):
    """``C[k, m] = cos(pi m (k + 1/2) / M)``, ``k < M``, ``m <= M``."""
    return np.cos(np.pi * np.outer(np.arange(M) + 0.5, np.arange(M + 1)) / M)


def dos_nodes(sm, method="dct"):
    """Node energies (rescaled) and weights ``gamma_k`` at the Chebyshev-Gauss points.

    ``gamma_k = pi sqrt(a^2 - (E_k - b)^2) nu(E_k)``. ``method="direct"`` sums
    the cosine series term by term; ``"dct"`` uses a type-III DCT. The
    ``m = M`` term vanishes at every node and is dropped by the transform.
    """
    M = sm.M
    if M < 1:
        raise ValueError("need M >= 1 for node evaluation")
    if method == "direct":
        gamma = cosine_matrix(M) @ (np.asarray(sm.mu, float) * _weights(M))
    elif method == "dct":
        c = np.asarray(sm.mu, float) * jackson_coefficients(M)
        gamma = dct(c[:M], type=3)
    else:
        raise ValueError(f"unknown method {method!r}")
    return node_abscissas(M), gamma


def dos_reconstruct(sm, E):
    """Jackson-damped density of states per site at energy ``E``."""
    x = sm.rescale(E)
    if np.any(np.abs(x) >= 1):
        raise EdgeSingularity(f"E={E} is at or beyond the band edge b +/- a")
    T = chebyshev_matrix(np.ravel(x), sm.M)
    series = (np.asarray(sm.mu) * _weights(sm.M)) @ T
    nu = series / (np.pi * np.sqrt(sm.a ** 2 - (np.ravel(E) - sm.b) ** 2))
    return nu.reshape(np.shape(x)) if np.ndim(x) else float(nu[0])


def integrated_dos(x, gamma):
    """Fraction of states at or below each node.

    ``x`` are the descending Chebyshev-Gauss abscissas and ``gamma`` the node
    weights from :func:`dos_nodes`; the result is aligned with ``x``.
    """
    x, gamma = np.asarray(x), np.asarray(gamma, float)
    order = np.argsort(x, kind="stable")
    n = np.empty_like(gamma)
    n[order] = np.cumsum(gamma[order]) / len(gamma)
    return n


def integrated_dos_at(sm, E):
    """Integrated density of states at arbitrary energies.

    Uses the closed-form integral of the damped series,
    ``mu_0 (pi - t) / pi - (2 / pi) sum_m mu_m g_m sin(m t) / m`` with
    ``t = arccos((E - b) / a)``; energies outside the band give 0 or 1.
    """
    x = np.clip(np.atleast_1d(sm.rescale(E)).astype(float), -1.0, 1.0)
    t = np.arccos(x)
    m = np.arange(1, sm.M + 1)
    c = np.asarray(sm.mu[1:]) * jackson_coefficients(sm.M)[1:] / m
    n = sm.mu[0] * (np.pi - t) / np.pi - (2 / np.pi) * (np.sin(np.outer(t, m)) @ c)
    # sin(m pi) is only zero up to round-off
    n = np.where(x <= -1, 0.0, np.where(x >= 1, sm.mu[0], n))
    return n.reshape(np.shape(E)) if np.ndim(E) else float(n[0])
