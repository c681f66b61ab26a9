"""
A tour of the bilayer algebra
=============================

Elements are four kernels: hops inside chain 1, inside chain 2, and the two
inter-chain blocks. The product is a convolution, and every element acts on
any configuration of the two chains as a matrix.
"""

# %%
import math

import numpy as np

from bilayer_kpm.algebra import (Configuration, adjoint, derive_parallel,
                                 represent, star_product, trace_per_unit_volume)
from bilayer_kpm.lattice import lattice_constants
from bilayer_kpm.model import ModelParams, toy_hamiltonian

golden = (1 + math.sqrt(5)) / 2
l1, l2 = lattice_constants(golden)
print(f"lattice constants {l1:.6f}, {l2:.6f}; product {l1 * l2:.15f}")

# %%
# The toy Hamiltonian only needs the lattice constants of its argument.
mp = ModelParams()
h = toy_hamiltonian(mp, type("Lattice", (), {"ell1": l1, "ell2": l2})())
print("h12(0) =", float(h.b12(0.0).real), " h12(sigma) =", round(float(h.b12(mp.sigma).real), 7))

# %%
# Self-adjointness and the trace per unit volume of h^2, whose closed form
# comes from integrating the Gaussian lattice sum over the torus.
hh = star_product(h, h)
q = np.linspace(-2, 2, 9)
print("adjoint(h) == h:", np.allclose(adjoint(h).b12(q), h.b12(q)))
closed = 2 + 2 * mp.W ** 2 * mp.sigma * math.sqrt(math.pi) / (l1 + l2)
print(f"trace(h*h) = {trace_per_unit_volume(hh).real:.12f}, closed form {closed:.12f}")

# %%
# Away from the truncation edge, the matrix of a product is the product of
# the matrices.
cfg = Configuration(1, 0.2)
H = represent(h, cfg, 8.0)
HH = represent(hh, cfg, 8.0).H
inner = np.abs(H.x) < 8.0 - 2 * mp.cutoff
print("interior rows agree:", np.allclose((H.H @ H.H)[inner], HH[inner], atol=1e-13))

# %%
# The horizontal derivation multiplies each hop by i times its length. On a
# matrix it is i times the commutator [H, X] with the position operator.
D = represent(derive_parallel(h), cfg, 8.0).H
X = np.diag(H.x)
print("derivation is i[H, X]:", np.allclose(D, 1j * (H.H @ X - X @ H.H), atol=1e-13))
