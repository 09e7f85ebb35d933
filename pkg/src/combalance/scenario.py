"""Scenario configuration: a strict YAML schema and its loader.

A scenario file fully determines a simulation run (``schema_version: 1``).
Validation is deliberately fussy: every error names the offending field by
path (``feet[1].mu``), unknown keys are rejected so typos cannot silently
fall back to defaults, and profile timestamps must increase strictly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .controller import Gains
from .csa import ContactMode, ContactPatch, NormalAxis
from .errors import ConfigInvalid
from .spatial import ContactPose, frame_from_x_axis, yaw_rotation

SCHEMA_VERSION = 1

_AXES = {"x": NormalAxis.X, "y": NormalAxis.Y, "z": NormalAxis.Z}
_MODES = {"fixed": ContactMode.FIXED, "sliding": ContactMode.SLIDING}


@dataclass(frozen=True)
class PlantParams:
    """Surrogate-plant constants used by the simulator.

    The wall pushes back proportionally to penetration and loses a little
    normal force while the hand slides; the feet stiffness converts the
    virtual vertical offset into a load difference; the wrench lag models
    the force sensor time constant.
    """

    wall_stiffness: float = 1e4
    wall_drag: float = 120.0
    foot_stiffness: float = 1e5
    wrench_lag: float = 0.05

    def __post_init__(self):
        for name in ("wall_stiffness", "foot_stiffness"):
            if not getattr(self, name) > 0.0:
                raise ConfigInvalid(f"plant.{name} must be positive")
        if self.wall_drag < 0.0:
            raise ConfigInvalid("plant.wall_drag must be nonnegative")
        if not self.wrench_lag > 0.0:
            raise ConfigInvalid("plant.wrench_lag must be positive")


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything a simulation run depends on, already validated."""

    mass: float
    right_foot: ContactPatch
    left_foot: ContactPatch
    hand: ContactPatch
    force_profile: tuple[np.ndarray, np.ndarray]
    dt: float
    t_end: float
    gravity: float = 9.81
    foot_fz_limits: tuple | None = None
    com_fix: np.ndarray | None = None
    csa_middle: str = "centroid"
    wipe_trajectory: tuple[np.ndarray, np.ndarray] | None = None
    gains: Gains = field(default_factory=Gains)
    plant: PlantParams = field(default_factory=PlantParams)
    schema_version: int = SCHEMA_VERSION

    def __post_init__(self):
        if not self.dt > 0.0:
            raise ConfigInvalid("dt must be positive")
        if not self.t_end > self.dt:
            raise ConfigInvalid("t_end must exceed dt")
        if not self.mass > 0.0:
            raise ConfigInvalid("mass must be positive")
        if not self.gravity > 0.0:
            raise ConfigInvalid("gravity must be positive")


def _fail(path: str, message: str):
    raise ConfigInvalid(f"{path}: {message}")


def _section(data, path: str, allowed: set[str], required: set[str]) -> dict:
    if not isinstance(data, dict):
        _fail(path, f"expected a mapping, got {type(data).__name__}")
    unknown = set(data) - allowed
    if unknown:
        _fail(path, f"unknown keys {sorted(unknown)}; allowed keys are {sorted(allowed)}")
    missing = required - set(data)
    if missing:
        _fail(path, f"missing required keys {sorted(missing)}")
    return data


def _num(value, path: str, *, lo: float | None = None, strict: bool = False) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        _fail(path, f"expected a number, got {value!r}")
    value = float(value)
    if not np.isfinite(value):
        _fail(path, "must be finite")
    if lo is not None:
        if strict and not value > lo:
            _fail(path, f"must be greater than {lo}, got {value}")
        if not strict and value < lo:
            _fail(path, f"must be at least {lo}, got {value}")
    return value


def _vec(value, n: int, path: str) -> np.ndarray:
    if not isinstance(value, (list, tuple)) or len(value) != n:
        _fail(path, f"expected a list of {n} numbers")
    return np.array([_num(v, f"{path}[{i}]") for i, v in enumerate(value)])


def _frame_with_axis(axis: NormalAxis, normal: np.ndarray) -> np.ndarray:
    """Right-handed frame whose chosen column equals the given direction."""
    base = frame_from_x_axis(normal)
    order = {NormalAxis.X: (0, 1, 2), NormalAxis.Y: (2, 0, 1), NormalAxis.Z: (1, 2, 0)}
    return base[:, order[axis]]


def _parse_foot(data, path: str) -> tuple[ContactPatch, tuple[float, float]]:
    data = _section(
        data,
        path,
        allowed={"center", "yaw", "half_x", "half_y", "mu", "fz_min", "fz_max"},
        required={"center", "half_x", "half_y", "mu"},
    )
    center = _vec(data["center"], 3, f"{path}.center")
    yaw = _num(data.get("yaw", 0.0), f"{path}.yaw")
    half_x = _num(data["half_x"], f"{path}.half_x", lo=0.0, strict=True)
    half_y = _num(data["half_y"], f"{path}.half_y", lo=0.0, strict=True)
    mu = _num(data["mu"], f"{path}.mu", lo=0.0, strict=True)
    fz_min = _num(data.get("fz_min", 0.0), f"{path}.fz_min", lo=0.0)
    fz_max = _num(data.get("fz_max", 1e4), f"{path}.fz_max", lo=0.0, strict=True)
    if fz_max <= fz_min:
        _fail(f"{path}.fz_max", f"must exceed fz_min={fz_min}")
    patch = ContactPatch(
        pose=ContactPose(position=center, rotation=yaw_rotation(yaw)),
        half_x=half_x,
        half_y=half_y,
        mu=mu,
    )
    return patch, (fz_min, fz_max)


def _parse_hand(data, path: str) -> ContactPatch:
    data = _section(
        data,
        path,
        allowed={"position", "normal", "normal_axis", "mu", "mode", "half_x", "half_y"},
        required={"position", "normal", "mu"},
    )
    position = _vec(data["position"], 3, f"{path}.position")
    normal = _vec(data["normal"], 3, f"{path}.normal")
    if np.linalg.norm(normal) < 1e-9:
        _fail(f"{path}.normal", "must be a nonzero direction")
    axis_key = data.get("normal_axis", "x")
    if axis_key not in _AXES:
        _fail(f"{path}.normal_axis", f"must be one of {sorted(_AXES)}, got {axis_key!r}")
    mode_key = data.get("mode", "fixed")
    if mode_key not in _MODES:
        _fail(f"{path}.mode", f"must be one of {sorted(_MODES)}, got {mode_key!r}")
    axis = _AXES[axis_key]
    return ContactPatch(
        pose=ContactPose(
            position=position,
            rotation=_frame_with_axis(axis, normal / np.linalg.norm(normal)),
        ),
        half_x=_num(data.get("half_x", 0.05), f"{path}.half_x", lo=0.0, strict=True),
        half_y=_num(data.get("half_y", 0.05), f"{path}.half_y", lo=0.0, strict=True),
        mu=_num(data["mu"], f"{path}.mu", lo=0.0, strict=True),
        mode=_MODES[mode_key],
        normal_axis=axis,
    )


def _parse_profile(data, path: str) -> tuple[np.ndarray, np.ndarray]:
    if not isinstance(data, list) or not data:
        _fail(path, "expected a non-empty list of [t, value] pairs")
    ts, fs = [], []
    for i, entry in enumerate(data):
        if not isinstance(entry, (list, tuple)) or len(entry) != 2:
            _fail(f"{path}[{i}]", "expected a [t, value] pair")
        ts.append(_num(entry[0], f"{path}[{i}].t", lo=0.0))
        fs.append(_num(entry[1], f"{path}[{i}].value", lo=0.0))
    ts = np.array(ts)
    if np.any(np.diff(ts) <= 0.0):
        _fail(path, "timestamps must increase strictly")
    return ts, np.array(fs)


def _parse_wipe(data, path: str) -> tuple[np.ndarray, np.ndarray]:
    if not isinstance(data, list) or len(data) < 2:
        _fail(path, "expected at least two [t, [x, y, z]] waypoints")
    ts, pts = [], []
    for i, entry in enumerate(data):
        if not isinstance(entry, (list, tuple)) or len(entry) != 2:
            _fail(f"{path}[{i}]", "expected a [t, [x, y, z]] pair")
        ts.append(_num(entry[0], f"{path}[{i}].t", lo=0.0))
        pts.append(_vec(entry[1], 3, f"{path}[{i}].point"))
    ts = np.array(ts)
    if np.any(np.diff(ts) <= 0.0):
        _fail(path, "timestamps must increase strictly")
    return ts, np.vstack(pts)


def _parse_gains(data, path: str) -> Gains:
    data = _section(
        data,
        path,
        allowed={"k_com", "b_com", "admittance", "a_z", "k_posture"},
        required=set(),
    )
    kwargs = {}
    if "k_com" in data:
        kwargs["k_com"] = _num(data["k_com"], f"{path}.k_com", lo=0.0, strict=True)
    if "b_com" in data and data["b_com"] is not None:
        kwargs["b_com"] = _num(data["b_com"], f"{path}.b_com", lo=0.0, strict=True)
    if "admittance" in data:
        kwargs["admittance"] = _vec(data["admittance"], 6, f"{path}.admittance")
    if "a_z" in data:
        kwargs["a_z"] = _num(data["a_z"], f"{path}.a_z", lo=0.0)
    if "k_posture" in data:
        kwargs["k_posture"] = _num(data["k_posture"], f"{path}.k_posture", lo=0.0)
    try:
        return Gains(**kwargs)
    except Exception as exc:
        _fail(path, str(exc))


def _parse_plant(data, path: str) -> PlantParams:
    data = _section(
        data,
        path,
        allowed={"wall_stiffness", "wall_drag", "foot_stiffness", "wrench_lag"},
        required=set(),
    )
    kwargs = {key: _num(val, f"{path}.{key}") for key, val in data.items()}
    try:
        return PlantParams(**kwargs)
    except ConfigInvalid as exc:
        _fail(path, str(exc))


def config_from_dict(data, source: str = "<config>") -> ScenarioConfig:
    """Validate a parsed mapping and build the scenario it describes."""
    top_allowed = {
        "schema_version",
        "mass",
        "gravity",
        "dt",
        "t_end",
        "com_policy",
        "csa_middle",
        "feet",
        "hand",
        "force_profile",
        "wipe_trajectory",
        "gains",
        "plant",
    }
    data = _section(
        data,
        source,
        allowed=top_allowed,
        required={"schema_version", "mass", "dt", "t_end", "feet", "hand", "force_profile"},
    )
    if data["schema_version"] != SCHEMA_VERSION:
        _fail("schema_version", f"expected {SCHEMA_VERSION}, got {data['schema_version']!r}")

    feet = data["feet"]
    if not isinstance(feet, list) or len(feet) != 2:
        _fail("feet", "expected exactly two feet (right first, then left)")
    right_foot, right_limits = _parse_foot(feet[0], "feet[0]")
    left_foot, left_limits = _parse_foot(feet[1], "feet[1]")

    com_fix = None
    policy = data.get("com_policy", "free")
    if policy != "free":
        if not isinstance(policy, dict) or set(policy) != {"fixed"}:
            _fail("com_policy", "expected 'free' or a mapping {fixed: [x, y]}")
        com_fix = _vec(policy["fixed"], 2, "com_policy.fixed")

    csa_middle = data.get("csa_middle", "centroid")
    if csa_middle not in ("centroid", "chebyshev"):
        _fail("csa_middle", f"must be 'centroid' or 'chebyshev', got {csa_middle!r}")

    wipe = None
    if data.get("wipe_trajectory") is not None:
        wipe = _parse_wipe(data["wipe_trajectory"], "wipe_trajectory")

    try:
        return ScenarioConfig(
            mass=_num(data["mass"], "mass", lo=0.0, strict=True),
            gravity=_num(data.get("gravity", 9.81), "gravity", lo=0.0, strict=True),
            dt=_num(data["dt"], "dt", lo=0.0, strict=True),
            t_end=_num(data["t_end"], "t_end", lo=0.0, strict=True),
            right_foot=right_foot,
            left_foot=left_foot,
            hand=_parse_hand(data["hand"], "hand"),
            foot_fz_limits=(right_limits, left_limits),
            com_fix=com_fix,
            csa_middle=csa_middle,
            force_profile=_parse_profile(data["force_profile"], "force_profile"),
            wipe_trajectory=wipe,
            gains=_parse_gains(data.get("gains", {}), "gains"),
            plant=_parse_plant(data.get("plant", {}), "plant"),
        )
    except ConfigInvalid:
        raise
    except Exception as exc:
        _fail(source, str(exc))


def load_config(path) -> ScenarioConfig:
    """Read and validate a scenario YAML file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigInvalid(f"cannot read config file {path}: {exc}") from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigInvalid(f"{path} is not valid YAML: {exc}") from exc
    return config_from_dict(data, source=str(path))
