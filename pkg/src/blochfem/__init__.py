"""Bloch-enriched finite elements for Helmholtz scattering in periodic wave-guides.

The trial space couples piecewise linear hat functions on a uniform
right-triangle mesh with outgoing Bloch waves in two radiation boxes, which
truncates the unbounded wave-guide without absorbing layers.  The package
covers the full pipeline: band structures of the periodic media, selection
of outgoing modes at the working frequency, assembly and direct solution of
the enriched system, and quantitative extraction of reflection/transmission
coefficients against Snell/Fresnel references.
"""

from .analysis import RTReport, delta_sweep, extract_rt, homogenized_a, snell_fresnel
from .assembly import EnrichedSystem, IncomingWave, assemble, beta_form, incoming_source, theta_cutoff
from .band_select import IndexSet, incoming_admissible, q_prime, select_indices
from .cell_eigen import BlochMode, CellGrid, CellOperator, group_velocity, poynting, solve_cell
from .enrichment import RadiationBasis, expand, extend_to_box, orthonormalize, plancherel_check
from .errors import BlochFEMError, ConfigError, DegenerateBandError, EigenSolveError, NumericalError
from .grid import Grid, GridSpec, build_grid, element_matrices, sample_coefficient
from .media import ConstantMedium, DiscArrayMedium, SlabMedium, TwoSided
from .runconfig import RunConfig
from .solve import SolutionField, reconstruct, solve_system

__version__ = "0.1.0"
