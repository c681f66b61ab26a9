"""
How many moments does the conductivity need?
============================================

The Kubo integrand has two sharp energy scales: the thermal window 1/beta
around the Fermi level and the Lorentzian width 1/tau_rel in E - E'. The
Chebyshev expansion resolves energies to roughly pi a / M, so it converges
once that resolution is below both scales. The exact spectral sum over
eigenpairs is the reference.
"""

# %%
import numpy as np

from bilayer_kpm.kpm import SpectralMoments, dos_moments, rescale_bounds
from bilayer_kpm.kubo import (TransportConfig, ccc_moments, ccc_node_weights,
                              conductivity_exact, conductivity_from_weights,
                              current_in_eigenbasis, eigendecompose)
from bilayer_kpm.lattice import supercell_params
from bilayer_kpm.model import ModelParams, assemble_current, assemble_supercell

op = assemble_supercell(ModelParams(), supercell_params(34, 21))
lam, V = eigendecompose(op)
a, b = rescale_bounds(lam)
J = current_in_eigenbasis(V, assemble_current(op))
print(f"p/q = 34/21, N = {op.N}, spectrum in [{lam[0]:.3f}, {lam[-1]:.3f}], a = {a:.3f}")

# %%
# The node weights depend only on the Hamiltonian, so one set of weights
# per M serves every transport setting below.
weights = {}
for M in (125, 250, 500, 1000, 2000):
    sm = SpectralMoments(a=a, b=b, M=M, mu=dos_moments(lam, a, b, M).mu,
                         ccc=ccc_moments((lam - b) / a, J, M))
    weights[M] = ccc_node_weights(sm)

settings = [(10.0, 10.0), (50.0, 10.0), (50.0, 250.0)]
print("\nresolution pi a / M:", ", ".join(f"M={M}: {np.pi * a / M:.4f}" for M in weights))
print(f"\n{'beta':>6} {'tau':>6} " + "".join(f"{'M=' + str(M):>10}" for M in weights))
for beta, tau in settings:
    errs = []
    for M, G in weights.items():
        worst = 0.0
        for mu in (-1.0, 0.0, 1.0):
            tc = TransportConfig(beta=beta, mu=mu, tau_rel=tau)
            ex = conductivity_exact(lam, J, tc, a=a)
            worst = max(worst, abs(conductivity_from_weights(G, a, b, tc) - ex) / abs(ex))
        errs.append(worst)
    print(f"{beta:6.0f} {tau:6.0f} " + "".join(f"{e:10.2e}" for e in errs))

# %%
# With beta = tau = 10 the error falls roughly as 1/M^2. With tau = 250 the
# Lorentzian is narrower than the resolution even at M = 2000 and the
# expansion is still far from the exact sum.
