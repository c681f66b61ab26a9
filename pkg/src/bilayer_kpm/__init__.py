"""Density of states and Kubo conductivity of an incommensurate bilayer chain.

Commensurate supercells with ``p`` sites on one chain and ``q`` on the other
approximate the incommensurate system. For each supercell the Hamiltonian is
diagonalized once, Chebyshev moments of the spectral and current-current
measures are formed, and every observable is read off at Chebyshev-Gauss
nodes.
"""

from .lattice import (SupercellParams, SupercellTooSmall, lattice_constants,
                      scan_ratios, supercell_params)
from .algebra import (AlgebraElement, Configuration, Kernel, adjoint,
                      derive_parallel, derive_perpendicular, represent,
                      star_product, trace_per_unit_volume)
from .model import ModelParams, assemble_current, assemble_supercell, toy_hamiltonian
from .kpm import SpectralMoments, dos_moments, dos_nodes, dos_reconstruct, rescale_bounds
from .kubo import (TransportConfig, ccc_moments, ccc_node_weights,
                   conductivity_exact, conductivity_kpm)
from .scan import GridResult, RatioRecord, ScanConfig, ScanError, run_scan

__version__ = "0.1.0"
