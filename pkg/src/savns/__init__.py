"""SAV-stabilised IMEX BDF-k schemes for periodic incompressible Navier-Stokes."""

from .fourier import GridSpec, PhysicalField, SpectralField, make_grid, to_physical, to_spectral
from .integrator import (
    SavState,
    SolverError,
    StepReport,
    init_state,
    pressure_from_velocity,
    scheme_table,
    step,
    step_unstabilized,
)

__version__ = "0.1.0"

__all__ = [
    "GridSpec",
    "PhysicalField",
    "SpectralField",
    "make_grid",
    "to_physical",
    "to_spectral",
    "SavState",
    "SolverError",
    "StepReport",
    "init_state",
    "pressure_from_velocity",
    "scheme_table",
    "step",
    "step_unstabilized",
    "__version__",
]
