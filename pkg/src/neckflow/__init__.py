"""neckflow: mean curvature flow laboratory for rotationally symmetric surfaces.

Evolves Cassini-oval dumbbell surfaces to their first singularity,
classifies the outcome (round-point collapse vs central neckpinch),
locates the critical shape parameter separating the two regimes, and
compares rescaled near-critical flows against the translating bowl
soliton and the known neckpinch asymptotics.
"""

__version__ = "0.1.0"

from .geometry import (  # noqa: F401
    CassiniShape,
    CurvatureField,
    ProfileCurve,
    cassini_profile,
    curvatures,
    extinction_bounds,
    integral_quantities,
    is_convex,
)
from .evolution import (  # noqa: F401
    FlowTrace,
    StepControl,
    TerminationReport,
    evolve,
    pole_mean_curvature,
    step,
)
from .soliton import SolitonCurve, solve_soliton, soliton_mean_curvature  # noqa: F401
from .analysis import (  # noqa: F401
    AsymptoteParams,
    FitResult,
    RescaledCurve,
    compare_to_soliton,
    cylinder_rescale,
    degenerate_profile,
    fit_power,
    generic_pinch_profile,
    hermite,
    pole_blowup,
)
from .critical import (  # noqa: F401
    ClassifiedRun,
    CriticalEstimate,
    bisect_critical,
    classify,
    critical_exponent,
    sweep,
)
