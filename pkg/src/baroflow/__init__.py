"""baroflow: P1 finite-element solver for 2D barotropic compressible flow.

Implements a fully implicit backward-Euler scheme solved by Newton's method
and two decoupling schemes that split the density and velocity updates, with
discrete conservation diagnostics for mass, momentum and mechanical energy.
"""

__version__ = "0.1.0"

from .eos import BarotropicEOS, PositivityError
from .mesh import StructuredTriMesh, build_mesh, element_geometry
from .newton import NewtonConfig, NewtonHistory, newton_solve
from .schemes import (
    RunResult,
    SchemeConfig,
    State,
    gaussian_bump,
    initial_state,
    run,
    step_decoupled,
    step_fully_implicit,
    step_linearized,
)

__all__ = [
    "BarotropicEOS",
    "NewtonConfig",
    "NewtonHistory",
    "PositivityError",
    "RunResult",
    "SchemeConfig",
    "State",
    "StructuredTriMesh",
    "build_mesh",
    "element_geometry",
    "gaussian_bump",
    "initial_state",
    "newton_solve",
    "run",
    "step_decoupled",
    "step_fully_implicit",
    "step_linearized",
]
