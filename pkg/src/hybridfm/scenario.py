"""Scenario files: flat ``dotted.key = value`` text, one assignment per line.

Values are Python/JSON-style literals (numbers, ``[x, y, z]`` lists, quoted
strings); ``true``/``false`` and bare words are accepted for booleans and
strings. ``#`` starts a comment. Unknown keys are errors.
"""

from __future__ import annotations

import ast
import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .contact import ContactParams
from .controller import ControllerConfig
from .estimator import EstimatorConfig
from .kinematics import DEFAULT_APPROACH_AXIS, DEFAULT_AXES, DEFAULT_OFFSETS, DEFAULT_TOOL_OFFSET, Joint, RobotModel
from .surfaces import Dome, PathSpec, Plane, SineExtrusion

SCENARIO_DIR = Path(__file__).parent / "scenarios"

_KEY = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*(\.[A-Za-z0-9_]+)*$")


class ScenarioError(ValueError):
    """Parse or validation failure; ``diagnostics`` lists every problem found."""

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("\n".join(str(d) for d in self.diagnostics))


@dataclass(frozen=True)
class Diagnostic:
    key: str
    message: str
    line: int | None = None

    def __str__(self):
        where = f"line {self.line}: " if self.line else ""
        return f"{where}{self.key}: {self.message}"


def parse_value(text: str):
    text = text.strip()
    lowered = text.lower()
    if lowered in ("true", "false"):
        return lowered == "true"
    try:
        return ast.literal_eval(text)
    except (ValueError, SyntaxError):
        if re.fullmatch(r"[A-Za-z_][A-Za-z0-9_\-]*", text):
            return text
        raise


def parse_text(text: str) -> tuple[dict, dict]:
    """Returns ``(values, lines)`` keyed by dotted key; raises ScenarioError."""
    values, lines, problems = {}, {}, []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip() if not raw.lstrip().startswith("#") else ""
        if not line:
            continue
        if "=" not in line:
            problems.append(Diagnostic("<syntax>", f"expected 'key = value', got {raw.strip()!r}", lineno))
            continue
        key, _, value = line.partition("=")
        key = key.strip()
        if not _KEY.match(key):
            problems.append(Diagnostic(key or "<syntax>", "malformed key", lineno))
            continue
        if key in values:
            problems.append(Diagnostic(key, f"duplicate key (first set on line {lines[key]})", lineno))
            continue
        try:
            values[key] = parse_value(value)
        except (ValueError, SyntaxError):
            problems.append(Diagnostic(key, f"cannot parse value {value.strip()!r}", lineno))
            continue
        lines[key] = lineno
    if problems:
        raise ScenarioError(problems)
    return values, lines


def parse_override(item: str) -> tuple[str, object]:
    key, sep, value = item.partition("=")
    key = key.strip()
    if not sep or not _KEY.match(key):
        raise ScenarioError([Diagnostic(key or item, "override must look like key=value")])
    try:
        return key, parse_value(value)
    except (ValueError, SyntaxError):
        # anything unparseable is taken as a plain string
        return key, value.strip()


# --- schema -----------------------------------------------------------------


def _is_num(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)


def _vec(n):
    def check(v):
        if not isinstance(v, (list, tuple)) or len(v) != n or not all(_is_num(x) for x in v):
            return f"expected a list of {n} finite numbers"
    return check


def _num(lo=None, hi=None, lo_open=False, why=""):
    def check(v):
        if not _is_num(v):
            return "expected a finite number"
        if lo is not None and (v <= lo if lo_open else v < lo):
            return f"must be {'>' if lo_open else '>='} {lo}" + (f" ({why})" if why else "")
        if hi is not None and v > hi:
            return f"must be <= {hi}" + (f" ({why})" if why else "")
    return check


def _int(lo=None):
    def check(v):
        if not isinstance(v, int) or isinstance(v, bool):
            return "expected an integer"
        if lo is not None and v < lo:
            return f"must be >= {lo}"
    return check


def _choice(*options):
    def check(v):
        if v not in options:
            return f"must be one of {', '.join(options)}"
    return check


def _bool(v):
    if not isinstance(v, bool):
        return "expected true or false"


def _str(v):
    if not isinstance(v, str):
        return "expected a string"


def _unit3(v):
    msg = _vec(3)(v)
    if msg:
        return msg
    if abs(np.linalg.norm(v) - 1.0) > 1e-9:
        return "must be a unit vector"


def _nonzero3(v):
    msg = _vec(3)(v)
    if msg:
        return msg
    if np.linalg.norm(v) == 0:
        return "must be non-zero"


def _gains(v):
    msg = _vec(3)(v)
    if msg:
        return msg
    if any(x < 0 for x in v):
        return "diagonal gains must be >= 0"


def _weights(v):
    if not isinstance(v, (list, tuple)) or not v or not all(_is_num(x) for x in v):
        return "expected a non-empty list of numbers"
    if any(x < 0 for x in v):
        return "weights must be >= 0"


SCHEMA = {
    "name": _str,
    "duration": _num(0, why="duration >= 0"),
    "rate": _num(100, why="rate >= 100 Hz"),
    "seed": _int(0),
    "robot.tool.offset": _vec(3),
    "robot.tool.approach_axis": _nonzero3,
    "robot.q_seed": _vec(7),
    "robot.q0": _vec(7),
    "initial.clearance": _num(0),
    "initial.tilt_deg": _num(-90, 90),
    "initial.tilt_axis": _choice("T1", "T2"),
    "surface.kind": _choice("plane", "sine_extrusion", "dome"),
    "surface.point": _vec(3),
    "surface.normal": _unit3,
    "surface.amplitude": _num(0, why="A >= 0"),
    "surface.wavelength": _num(0, lo_open=True),
    "surface.wavenumber": _num(0, lo_open=True),
    "surface.base_height": _num(),
    "surface.extrusion_axis": _choice("x", "y"),
    "surface.center": _vec(3),
    "surface.radius": _num(0, lo_open=True, why="R > 0"),
    "path.start": _vec(3),
    "path.end": _vec(3),
    "path.duration": _num(0, lo_open=True),
    "contact.stiffness": _num(0, lo_open=True, why="k_c > 0"),
    "contact.mu": _num(0, why="mu_true >= 0"),
    "contact.v_reg": _num(0, lo_open=True, why="v_reg > 0"),
    "contact.noise_std": _num(0, why="noise_std >= 0"),
    "contact.probe_radius": _num(0, why="probe_radius >= 0"),
    "contact.seed": _int(0),
    "estimator.enabled": _bool,
    "estimator.window": _int(1),
    "estimator.weights": _weights,
    "estimator.v_epsilon": _num(0, lo_open=True, why="v_epsilon > 0"),
    "estimator.mu_initial": _num(0),
    "estimator.f_min": _num(0, lo_open=True, why="f_min > 0"),
    "controller.K_m": _gains,
    "controller.K_f": _gains,
    "controller.K_adm": _gains,
    "controller.K_ee": _gains,
    "controller.f_des": _vec(3),
    "controller.d_h": _vec(3),
    "controller.d": _num(),
    "controller.alpha": _num(0, lo_open=True, why="alpha > 0"),
    "controller.rho_limit": _num(0),
    "controller.damping": _num(0),
    "controller.offset_frame": _choice("normal", "world"),
    "controller.approach_depth": _num(0),
    "controller.normal_tau": _num(0, why="normal_tau >= 0"),
}
for _i in range(1, 8):
    SCHEMA[f"robot.joint{_i}.axis"] = _unit3
    SCHEMA[f"robot.joint{_i}.offset"] = _vec(3)

REQUIRED = ("surface.kind", "path.start", "path.end", "path.duration")
SURFACE_KEYS = {
    "plane": {"surface.point", "surface.normal"},
    "sine_extrusion": {"surface.amplitude", "surface.wavelength", "surface.wavenumber",
                       "surface.base_height", "surface.extrusion_axis"},
    "dome": {"surface.center", "surface.radius"},
}


def validate(values: dict, lines: dict | None = None) -> list[Diagnostic]:
    lines = lines or {}
    out = []

    def add(key, msg):
        out.append(Diagnostic(key, msg, lines.get(key)))

    for key, value in values.items():
        check = SCHEMA.get(key)
        if check is None:
            add(key, "unknown key")
            continue
        msg = check(value)
        if msg:
            add(key, msg)
    for key in REQUIRED:
        if key not in values:
            add(key, "required key missing")

    kind = values.get("surface.kind")
    if kind in SURFACE_KEYS:
        for key in values:
            if key.startswith("surface.") and key != "surface.kind" and key not in SURFACE_KEYS[kind]:
                add(key, f"not a parameter of surface kind {kind!r}")
        if "surface.wavelength" in values and "surface.wavenumber" in values:
            add("surface.wavenumber", "give either surface.wavelength or surface.wavenumber, not both")

    window = values.get("estimator.window", EstimatorConfig.window)
    weights = values.get("estimator.weights")
    if isinstance(weights, (list, tuple)) and isinstance(window, int) and not _weights(weights):
        if len(weights) != window:
            add("estimator.weights", f"length {len(weights)} does not match estimator.window = {window}")
        elif abs(sum(weights) / window - 1.0) > 1e-9:
            add("estimator.weights", "weights must satisfy (1/m) * sum(w) == 1")

    if not out:
        # cross-field geometry checks need a buildable scenario
        try:
            sc = build(values)
            if isinstance(sc.surface, SineExtrusion) and sc.surface.min_curvature_radius() <= sc.probe_radius:
                add("surface.amplitude", f"crest radius {sc.surface.min_curvature_radius():.4g} m must exceed "
                    f"the probe radius {sc.probe_radius:.4g} m (amplitude * wavenumber^2 too large)")
        except ValueError as exc:
            add("<scenario>", str(exc))
    return out


# --- scenario object --------------------------------------------------------


@dataclass(frozen=True)
class Scenario:
    name: str
    surface: object
    path: PathSpec
    robot: RobotModel = field(default_factory=lambda: build_robot({}))
    q_seed: tuple = (0.0, 3.27, 0.0, -1.38, -1.6, -1.65, 1.25)
    q0: tuple | None = None
    clearance: float = 0.02
    tilt_deg: float = 0.0
    tilt_axis: str = "T1"  # tangent axis the initial tilt rotates about
    contact: ContactParams = ContactParams()
    contact_seed: int | None = None
    estimator: EstimatorConfig = EstimatorConfig()
    estimator_enabled: bool = True
    controller: ControllerConfig = ControllerConfig()
    duration: float = 21.0
    rate: float = 1000.0
    seed: int = 0

    @property
    def probe_radius(self) -> float:
        r = self.contact.probe_radius
        return float(np.linalg.norm(self.controller.d_h)) if r is None else r

    @property
    def noise_seed(self) -> int:
        return self.seed if self.contact_seed is None else self.contact_seed


def build_robot(values: dict) -> RobotModel:
    joints = []
    for i in range(1, 8):
        axis = values.get(f"robot.joint{i}.axis", DEFAULT_AXES[i - 1])
        offset = values.get(f"robot.joint{i}.offset", DEFAULT_OFFSETS[i - 1])
        joints.append(Joint(np.array(axis, float), np.array(offset, float)))
    return RobotModel(
        joints=tuple(joints),
        tool_offset=np.array(values.get("robot.tool.offset", DEFAULT_TOOL_OFFSET), float),
        approach_axis=np.array(values.get("robot.tool.approach_axis", DEFAULT_APPROACH_AXIS), float),
    )


def _build_surface(values: dict):
    kind = values["surface.kind"]
    if kind == "plane":
        return Plane(values.get("surface.point", (0.0, 0.0, 0.0)), values.get("surface.normal", (0.0, 0.0, 1.0)))
    if kind == "sine_extrusion":
        if "surface.wavenumber" in values:
            k = float(values["surface.wavenumber"])
        else:
            k = 2 * np.pi / float(values.get("surface.wavelength", 0.1))
        return SineExtrusion(
            amplitude=float(values.get("surface.amplitude", 0.02)),
            wavenumber=k,
            base_height=float(values.get("surface.base_height", 0.0)),
            extrusion_axis=values.get("surface.extrusion_axis", "y"),
        )
    return Dome(values.get("surface.center", (0.0, 0.0, 0.0)), float(values.get("surface.radius", 0.1)))


def _pick(values: dict, prefix: str, names, convert=lambda v: v) -> dict:
    return {n: convert(values[f"{prefix}.{n}"]) for n in names if f"{prefix}.{n}" in values}


def build(values: dict, name: str = "scenario") -> Scenario:
    rate = float(values.get("rate", 1000.0))
    estimator = EstimatorConfig(**_pick(values, "estimator", ("window", "v_epsilon", "mu_initial", "f_min")),
                                weights=tuple(values["estimator.weights"]) if "estimator.weights" in values else None)
    controller = ControllerConfig(
        **_pick(values, "controller", ("K_m", "K_f", "K_adm", "K_ee", "f_des", "d_h"), tuple),
        **_pick(values, "controller", ("d", "alpha", "rho_limit", "damping", "approach_depth", "normal_tau"), float),
        **_pick(values, "controller", ("offset_frame",)),
        rate=rate,
    )
    kwargs = {}
    if "robot.q_seed" in values:
        kwargs["q_seed"] = tuple(values["robot.q_seed"])
    return Scenario(
        name=values.get("name", name),
        surface=_build_surface(values),
        path=PathSpec(np.array(values["path.start"], float), np.array(values["path.end"], float),
                      float(values["path.duration"]), rate),
        robot=build_robot(values),
        q0=tuple(values["robot.q0"]) if "robot.q0" in values else None,
        clearance=float(values.get("initial.clearance", 0.02)),
        tilt_deg=float(values.get("initial.tilt_deg", 0.0)),
        tilt_axis=values.get("initial.tilt_axis", "T1"),
        contact=ContactParams(**_pick(values, "contact", ("stiffness", "mu", "v_reg", "noise_std", "probe_radius"), float)),
        contact_seed=values.get("contact.seed"),
        estimator=estimator,
        estimator_enabled=bool(values.get("estimator.enabled", True)),
        controller=controller,
        duration=float(values.get("duration", 21.0)),
        rate=rate,
        seed=int(values.get("seed", 0)),
        **kwargs,
    )


def resolve_path(path_or_name) -> Path:
    """A file path, or the name of a shipped scenario."""
    p = Path(path_or_name)
    if p.exists():
        return p
    shipped = SCENARIO_DIR / f"{p.stem}.cfg"
    if p.parent == Path(".") and shipped.exists():
        return shipped
    raise FileNotFoundError(f"scenario file not found: {path_or_name}")


def shipped_scenarios() -> list[Path]:
    return sorted(SCENARIO_DIR.glob("*.cfg"))


def load_values(path_or_name, overrides=()) -> tuple[dict, dict, str]:
    path = resolve_path(path_or_name)
    values, lines = parse_text(path.read_text())
    for item in overrides:
        key, value = parse_override(item) if isinstance(item, str) else item
        values[key] = value
        lines.pop(key, None)
    return values, lines, values.get("name", path.stem)


def load(path_or_name, overrides=()) -> Scenario:
    values, lines, name = load_values(path_or_name, overrides)
    problems = validate(values, lines)
    if problems:
        raise ScenarioError(problems)
    return build(values, name)
