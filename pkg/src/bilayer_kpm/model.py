"""Two coupled first-neighbour chains with a Gaussian inter-chain hopping."""

from dataclasses import dataclass

import numpy as np

from .algebra import AlgebraElement, Kernel, SupercellOperator, _assemble
from .lattice import min_image_displacement

__all__ = ["ModelParams", "SupercellOperator", "toy_hamiltonian",
           "assemble_supercell", "assemble_current"]


@dataclass(frozen=True)
class ModelParams:
    """Inter-chain amplitude ``W``, length scale ``sigma`` and hard cutoff in units of ``sigma``."""

    W: float = 0.5
    sigma: float = 0.25
    cutoff_sigmas: float = 6.0

    def __post_init__(self):
        if self.W < 0:
            raise ValueError("W must be >= 0")
        if self.sigma <= 0:
            raise ValueError("sigma must be > 0")
        if self.cutoff_sigmas <= 0:
            raise ValueError("cutoff_sigmas must be > 0")

    @property
    def cutoff(self):
        return self.cutoff_sigmas * self.sigma


def toy_hamiltonian(mp, sp):
    """Algebra element of the model for the lattice constants of ``sp``."""
    l1, l2 = sp.ell1, sp.ell2

    def neighbours(ell):
        return lambda g, m: (np.abs(np.abs(m) - ell) < 1e-9 * ell).astype(float) + 0 * g

    def gauss(x):
        return mp.W * np.exp(-0.5 * (np.asarray(x) / mp.sigma) ** 2)

    inter = Kernel(gauss, mp.cutoff)
    return AlgebraElement(l1, l2, f11=Kernel(neighbours(l1), l1), f12=inter,
                          f21=inter, f22=Kernel(neighbours(l2), l2))


def assemble_supercell(mp, sp, gamma1=0.0, gamma2=0.0):
    """Periodic Hamiltonian of one supercell, chain ``j`` sites at ``gamma_j + k ell_j``."""
    h = toy_hamiltonian(mp, sp)
    op = _assemble(h, float(gamma1), float(gamma2), np.arange(sp.p), np.arange(sp.q), sp)
    # the model is real; drop the zero imaginary part
    return SupercellOperator(H=op.H.real.copy(), layers=op.layers, x=op.x, L=op.L,
                             params=sp)


def assemble_current(op):
    """Current ``i d(x, y) H[x, y]`` with ``d`` the minimal-image hop length.

    The sawtooth position is exact for every hop shorter than half the
    period. Both directions of a hop at exactly ``L/2`` would get the same
    sign, so such hops must carry zero amplitude.
    """
    d = min_image_displacement(op.x[:, None], op.x[None, :], op.L)
    half = np.isclose(np.abs(d), op.L / 2, rtol=0, atol=1e-12 * op.L)
    if np.any(half & (op.H != 0)):
        raise ValueError("hop of length L/2: current is ambiguous on this supercell")
    return 1j * d * op.H
