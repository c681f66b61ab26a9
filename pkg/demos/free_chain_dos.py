"""
Density of states of two decoupled chains
=========================================

With the inter-chain hopping switched off, each chain is a first-neighbour
ring whose density of states is the arcsine law 1/(pi sqrt(4 - E^2)). This
script checks the Chebyshev expansion against it and shows what happens
when the expansion order exceeds the ring size.
"""

# %%
import numpy as np

from bilayer_kpm.kpm import dos_moments, dos_nodes, rescale_bounds
from bilayer_kpm.kubo import eigendecompose
from bilayer_kpm.lattice import supercell_params
from bilayer_kpm.model import ModelParams, assemble_supercell


def max_error(p, M):
    lam, _ = eigendecompose(assemble_supercell(ModelParams(W=0.0), supercell_params(p, p)))
    a, b = rescale_bounds(lam)
    x, gamma = dos_nodes(dos_moments(lam, a, b, M))
    E = a * x + b
    nu = gamma / (np.pi * np.sqrt(a * a - (E - b) ** 2))
    sel = np.abs(E) <= 1.8
    return np.max(np.abs(nu[sel] - 1 / (np.pi * np.sqrt(4 - E[sel] ** 2))))


# %%
# Below the ring size the moments of the finite ring equal those of the
# infinite chain, and the error is set by the Jackson resolution alone.
for M in (50, 100, 200, 400):
    print(f"p = 500, M = {M:4d}: max error {max_error(500, M):.2e}")

# %%
# A ring of p sites has eigenvalues 2 cos(2 pi j / p). Its Chebyshev moments
# agree with the infinite chain only up to order p; beyond that the
# expansion resolves the individual levels and the error jumps.
for M in (499, 500, 501, 600, 1000):
    print(f"p = 500, M = {M:4d}: max error {max_error(500, M):.2e}")
