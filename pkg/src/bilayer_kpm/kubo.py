"""Kubo conductivity in the relaxation time approximation.

Units are natural (``e = hbar = 1``): the charge prefactor of the
conductivity is set to one and ``tau_rel``, ``omega_hat`` are expressed in
inverse energy and energy respectively.
"""

from dataclasses import dataclass

import numpy as np
from scipy.fft import dct
from scipy.special import expit

from .kpm import chebyshev_matrix, jackson_coefficients, node_abscissas

__all__ = ["TransportConfig", "EigensolverError", "eigendecompose",
           "current_in_eigenbasis", "ccc_moments", "fermi_dirac",
           "kubo_integrand", "ccc_node_weights", "conductivity_from_weights",
           "conductivity_kpm", "conductivity_exact", "DEGENERATE_REL"]

# |E - E'| below DEGENERATE_REL * a uses the analytic limit of the difference quotient
DEGENERATE_REL = 1e-8


@dataclass(frozen=True)
class TransportConfig:
    beta: float = 250.0
    mu: float = 0.0
    tau_rel: float = 250.0
    omega_hat: float = 0.0

    def __post_init__(self):
        if not self.beta > 0:
            raise ValueError("beta must be > 0")
        if not self.tau_rel > 0:
            raise ValueError("tau_rel must be > 0")


class EigensolverError(RuntimeError):
    """Dense eigensolver failure for supercell ``(p, q)``."""

    def __init__(self, p, q, cause):
        super().__init__(f"eigendecomposition failed for (p={p}, q={q}): {cause}")
        self.p, self.q = p, q


def eigendecompose(op):
    """Ascending eigenvalues and unitary eigenvectors of ``op.H``."""
    try:
        lam, V = np.linalg.eigh(op.H)
    except np.linalg.LinAlgError as exc:
        p = getattr(op.params, "p", None)
        q = getattr(op.params, "q", None)
        raise EigensolverError(p, q, exc) from exc
    return lam, V


def current_in_eigenbasis(V, dH):
    return V.conj().T @ dH @ V


def ccc_moments(lambda_hat, J, M):
    """``(1/N) sum_ij T_m(l_i) |J_ij|^2 T_n(l_j)`` as ``A K A^T / N``."""
    lambda_hat = np.asarray(lambda_hat, float)
    if np.any(np.abs(lambda_hat) >= 1):
        raise ValueError("rescaled eigenvalues must lie in (-1, 1)")
    K = np.abs(J) ** 2
    # |J_ij|^2 is symmetric for Hermitian J; symmetrize the round-off too
    K = 0.5 * (K + K.T)
    A = chebyshev_matrix(lambda_hat, M)
    ccc = A @ K @ A.T / len(lambda_hat)
    return 0.5 * (ccc + ccc.T)


def fermi_dirac(E, tc):
    """Occupation ``1 / (1 + exp(beta (E - mu)))`` without overflow."""
    return expit(-tc.beta * (np.asarray(E, float) - tc.mu))


def kubo_integrand(E, Ep, tc, a=1.0):
    """``[(f(E') - f(E)) / (E - E')] / (1/tau - i (E - E') - i omega)``.

    Broadcasts over ``E`` and ``Ep``. For ``|E - E'| < DEGENERATE_REL * a``
    the difference quotient is replaced by ``beta f (1 - f)``.
    """
    E, Ep = np.broadcast_arrays(np.asarray(E, float), np.asarray(Ep, float))
    hi, lo = np.maximum(E, Ep), np.minimum(E, Ep)
    delta = hi - lo
    beta = tc.beta
    # f(lo) - f(hi) = f(lo) (1 - f(hi)) (1 - exp(-beta delta)), all factors in [0, 1]
    f_lo = expit(-beta * (lo - tc.mu))
    g_hi = expit(beta * (hi - tc.mu))
    deg = delta < DEGENERATE_REL * a
    safe = np.where(deg, 1.0, delta)
    quotient = f_lo * g_hi * (-np.expm1(-beta * safe)) / safe
    fE = expit(-beta * (E - tc.mu))
    quotient = np.where(deg, beta * fE * (1 - fE), quotient)
    out = quotient / (1 / tc.tau_rel - 1j * (E - Ep) - 1j * tc.omega_hat)
    return out if out.ndim else complex(out)


def ccc_node_weights(sm):
    """``Gamma_kl``: the 2D cosine transform of the damped moments.

    Depends only on the Hamiltonian, so it can be cached and reused for any
    ``TransportConfig``.
    """
    if sm.ccc is None:
        raise ValueError("SpectralMoments carries no current-current moments")
    M = sm.M
    g = jackson_coefficients(M)
    c = np.asarray(sm.ccc) * np.outer(g, g)
    # type-III DCT supplies the factor (2 - delta_m0) on each axis
    G = dct(dct(c[:M, :M], type=3, axis=0), type=3, axis=1)
    return 0.5 * (G + G.T)


def conductivity_from_weights(Gamma, a, b, tc):
    """Chebyshev-Gauss quadrature ``(1/M^2) sum_kl Gamma_kl Phi(E_k, E_l)``."""
    M = Gamma.shape[0]
    E = a * node_abscissas(M) + b
    Phi = kubo_integrand(E[:, None], E[None, :], tc, a=a)
    return complex(np.sum(Gamma * Phi) / M ** 2)


def conductivity_kpm(sm, tc, Gamma=None):
    if Gamma is None:
        Gamma = ccc_node_weights(sm)
    return conductivity_from_weights(Gamma, sm.a, sm.b, tc)


def conductivity_exact(lam, J, tc, a=1.0):
    """Spectral sum ``(1/N) sum_ij Phi(l_i, l_j) |J_ij|^2`` without truncation."""
    lam = np.asarray(lam, float)
    Phi = kubo_integrand(lam[:, None], lam[None, :], tc, a=a)
    return complex(np.sum(Phi * np.abs(J) ** 2) / len(lam))
