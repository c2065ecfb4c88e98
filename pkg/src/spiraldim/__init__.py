"""Box-counting dimensions of planar spirals and damped-oscillator orbits.

The package simulates x' = y, y' = -x - h(t) y (and the generalized Bessel
system), converts decaying solutions to the spiral normal form r = f(phi),
measures epsilon-neighborhood areas and box counts exactly on grids, fits
box-counting dimensions, and cross-checks the estimates against analytic
predictions such as dim = 2/(1+alpha) and the rectifiability dichotomy.
"""

from . import boxdim, cli, damping, ode_sim, polar_curve, spiral_gen, theorems
from .boxdim import (
    DimensionReport,
    SausageProfile,
    box_count,
    build_profile,
    fit_dimension,
    sausage_area,
)
from .damping import AsymptoticFit, DampingSpec, check_hw_condition, fit_alpha
from .errors import (
    DomainError,
    FitDegenerateError,
    NotSpiralError,
    OriginError,
    PositivityError,
    RangeError,
    ResolutionError,
    SpecError,
    SpiraldimError,
    StiffnessError,
    TruncationError,
)
from .ode_sim import SystemSpec, Trajectory, energy_constant, integrate
from .polar_curve import PolarCurve, arc_length, diameter, to_polar, turn_decrement
from .spiral_gen import SpiralSpec, generate, known_dimension
from .theorems import (
    CriterionReport,
    check_derivative_criterion,
    check_spiral_criterion,
    classify_rectifiability,
    predict_dimension,
    validate_polar_odes,
)

__version__ = "0.1.0"
