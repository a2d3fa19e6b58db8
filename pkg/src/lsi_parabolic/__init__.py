"""Localized subspace iteration bases and partially explicit time stepping
for high-contrast parabolic problems on the unit square."""

from .assembly import FineOperators, assemble, assemble_load
from .coarse_space import (
    BasisConfig,
    MultiscaleSpace,
    SplitSpace,
    build_multiscale_space,
    cauchy_schwarz_gamma,
    explicit_rayleigh_quotient,
    split_space,
    stability_limit,
)
from .errors import ConfigError, NumericalError
from .fields import PermeabilityField, SourceSpec, generate_field, load_raster
from .grid import CoarseFineGrid, build_grid, oversample
from .metrics import energy_error, error_series, l2_error
from .timestep import (
    SchemeConfig,
    solve_fine_reference,
    solve_implicit_coarse,
    solve_splitting,
    splitting_stability_limit,
)

__version__ = "0.1.0"

__all__ = [
    "BasisConfig",
    "CoarseFineGrid",
    "ConfigError",
    "FineOperators",
    "MultiscaleSpace",
    "NumericalError",
    "PermeabilityField",
    "SchemeConfig",
    "SourceSpec",
    "SplitSpace",
    "assemble",
    "assemble_load",
    "build_grid",
    "build_multiscale_space",
    "cauchy_schwarz_gamma",
    "energy_error",
    "error_series",
    "explicit_rayleigh_quotient",
    "generate_field",
    "l2_error",
    "load_raster",
    "oversample",
    "solve_fine_reference",
    "solve_implicit_coarse",
    "solve_splitting",
    "split_space",
    "splitting_stability_limit",
    "stability_limit",
]
