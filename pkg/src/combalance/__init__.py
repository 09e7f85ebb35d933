"""Static multi-contact balance toolkit for legged robots."""

from .centroidal import (
    CentroidalResult,
    CentroidalSetup,
    DecisionVector,
    assemble,
    solve_centroidal,
)
from .constraints import FrictionBounds, SlidingSpec
from .controller import Gains, TraceRecord, run_scenario
from .csa import ContactMode, ContactPatch, NormalAxis, SupportPolygon, build_csa, com_projection
from .errors import (
    BalanceError,
    BalanceInfeasible,
    ConfigInvalid,
    DegenerateHull,
    DegenerateScale,
    DimensionMismatch,
    LayoutMismatch,
    NonCoplanarFeet,
    NumericalBreakdown,
    VerticalBalanceViolation,
)
from .scenario import PlantParams, ScenarioConfig, config_from_dict, load_config
from .spatial import ContactPose, Wrench

__version__ = "0.1.0"

__all__ = [
    "BalanceError",
    "BalanceInfeasible",
    "CentroidalResult",
    "CentroidalSetup",
    "ConfigInvalid",
    "ContactMode",
    "ContactPatch",
    "ContactPose",
    "DecisionVector",
    "DegenerateHull",
    "DegenerateScale",
    "DimensionMismatch",
    "FrictionBounds",
    "Gains",
    "LayoutMismatch",
    "NonCoplanarFeet",
    "NormalAxis",
    "NumericalBreakdown",
    "PlantParams",
    "ScenarioConfig",
    "SlidingSpec",
    "SupportPolygon",
    "TraceRecord",
    "VerticalBalanceViolation",
    "Wrench",
    "assemble",
    "build_csa",
    "com_projection",
    "config_from_dict",
    "load_config",
    "run_scenario",
    "solve_centroidal",
    "__version__",
]
