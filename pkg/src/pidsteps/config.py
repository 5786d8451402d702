"""Scenario files: plant, controller, history, setpoint schedule, output options.

The on-disk format is TOML.  All times in a scenario are in delay units
(the solver's normalized time); a physical transport delay L only enters
through ``plant.delay``, which rescales the plant polynomials (by 1/L^h
per power) and the integral/derivative gains (k_i * L, k_d / L) before
the closed loop is assembled.

Schema::

    [plant]
    numerator = [1.0]          # ascending powers of s
    denominator = [1.0, 1.0]
    delay = 1.0                # physical delay L; optional, default 1

    [pid]
    k = 0.0
    k_i = 0.5
    k_d = 0.0

    [initial]
    steady = 1.0               # constant history...
    # ...or an explicit per-gap exponential-polynomial history:
    # knots = [0.0, 0.5, 1.0]
    # [[initial.segments]]     # one per knot gap, local time of [-1, 0]
    # roots = [0.0, -1.0]
    # coeffs = [[1.0], [0.25, 1.0]]

    [setpoint]
    initial = 1.0
    steps = [[0.0, 0.0]]       # (time, value) pairs, times >= 0

    [simulation]
    horizon = 10               # delay intervals to solve
    dt = 0.01                  # CSV sample spacing (presentation only)
    band = 0.05                # settling band fraction
"""

from __future__ import annotations

from dataclasses import dataclass, field

import tomli

from .closedloop import DdeSystem, PidParams, PlantModel, build_closed_loop
from .exppoly import ExpPoly
from .stepper import ForcingTerm, InitialCondition


class ConfigError(ValueError):
    """A scenario file violates the schema or a solver precondition."""


@dataclass(frozen=True)
class PlantSection:
    numerator: tuple[float, ...]
    denominator: tuple[float, ...]
    delay: float = 1.0


@dataclass(frozen=True)
class PidSection:
    k: float = 0.0
    k_i: float = 0.0
    k_d: float = 0.0


@dataclass(frozen=True)
class SegmentSpec:
    roots: tuple[float, ...]
    coeffs: tuple[tuple[float, ...], ...]


@dataclass(frozen=True)
class InitialSection:
    steady: float | None = None
    knots: tuple[float, ...] | None = None
    segments: tuple[SegmentSpec, ...] | None = None


@dataclass(frozen=True)
class SetpointSection:
    initial: float = 0.0
    steps: tuple[tuple[float, float], ...] = ()


@dataclass(frozen=True)
class SimulationSection:
    horizon: int = 10
    dt: float = 0.01
    band: float = 0.05


@dataclass(frozen=True)
class ScenarioConfig:
    plant: PlantSection
    pid: PidSection = field(default_factory=PidSection)
    initial: InitialSection = field(default_factory=InitialSection)
    setpoint: SetpointSection = field(default_factory=SetpointSection)
    simulation: SimulationSection = field(default_factory=SimulationSection)


def parse(text: str) -> ScenarioConfig:
    """Parse TOML scenario text; raises ConfigError naming the bad field."""
    try:
        raw = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"not valid TOML: {exc}") from exc
    try:
        plant_raw = raw["plant"]
        plant = PlantSection(
            numerator=_floats(plant_raw["numerator"], "plant.numerator"),
            denominator=_floats(plant_raw["denominator"], "plant.denominator"),
            delay=float(plant_raw.get("delay", 1.0)),
        )
    except KeyError as exc:
        raise ConfigError(f"missing required plant field {exc}") from exc
    pid_raw = raw.get("pid", {})
    pid = PidSection(
        k=float(pid_raw.get("k", 0.0)),
        k_i=float(pid_raw.get("k_i", 0.0)),
        k_d=float(pid_raw.get("k_d", 0.0)),
    )
    init_raw = raw.get("initial", {})
    segs = None
    if "segments" in init_raw:
        segs = tuple(
            SegmentSpec(
                roots=_floats(s["roots"], "initial.segments.roots"),
                coeffs=tuple(
                    _floats(c, "initial.segments.coeffs") for c in s["coeffs"]
                ),
            )
            for s in init_raw["segments"]
        )
    initial = InitialSection(
        steady=(float(init_raw["steady"]) if "steady" in init_raw else None),
        knots=(_floats(init_raw["knots"], "initial.knots") if "knots" in init_raw else None),
        segments=segs,
    )
    sp_raw = raw.get("setpoint", {})
    steps = []
    for entry in sp_raw.get("steps", []):
        if len(entry) != 2:
            raise ConfigError(f"setpoint.steps entries must be [time, value], got {entry}")
        t, v = float(entry[0]), float(entry[1])
        if t < 0.0:
            raise ConfigError(f"setpoint step time {t} must be non-negative")
        steps.append((t, v))
    setpoint = SetpointSection(
        initial=float(sp_raw.get("initial", 0.0)), steps=tuple(steps)
    )
    sim_raw = raw.get("simulation", {})
    sim = SimulationSection(
        horizon=int(sim_raw.get("horizon", 10)),
        dt=float(sim_raw.get("dt", 0.01)),
        band=float(sim_raw.get("band", 0.05)),
    )
    cfg = ScenarioConfig(plant=plant, pid=pid, initial=initial, setpoint=setpoint, simulation=sim)
    _validate(cfg)
    return cfg


def load(path: str) -> ScenarioConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse(fh.read())


def serialize(cfg: ScenarioConfig) -> str:
    """Deterministic TOML emission; parse(serialize(cfg)) == cfg."""
    lines = ["[plant]"]
    lines.append(f"numerator = {_fmt_list(cfg.plant.numerator)}")
    lines.append(f"denominator = {_fmt_list(cfg.plant.denominator)}")
    lines.append(f"delay = {_fmt(cfg.plant.delay)}")
    lines.append("")
    lines.append("[pid]")
    lines.append(f"k = {_fmt(cfg.pid.k)}")
    lines.append(f"k_i = {_fmt(cfg.pid.k_i)}")
    lines.append(f"k_d = {_fmt(cfg.pid.k_d)}")
    lines.append("")
    lines.append("[initial]")
    if cfg.initial.steady is not None:
        lines.append(f"steady = {_fmt(cfg.initial.steady)}")
    if cfg.initial.knots is not None:
        lines.append(f"knots = {_fmt_list(cfg.initial.knots)}")
    lines.append("")
    lines.append("[setpoint]")
    lines.append(f"initial = {_fmt(cfg.setpoint.initial)}")
    steps = ", ".join(f"[{_fmt(t)}, {_fmt(v)}]" for t, v in cfg.setpoint.steps)
    lines.append(f"steps = [{steps}]")
    lines.append("")
    lines.append("[simulation]")
    lines.append(f"horizon = {cfg.simulation.horizon}")
    lines.append(f"dt = {_fmt(cfg.simulation.dt)}")
    lines.append(f"band = {_fmt(cfg.simulation.band)}")
    lines.append("")
    if cfg.initial.segments is not None:
        for seg in cfg.initial.segments:
            lines.append("[[initial.segments]]")
            lines.append(f"roots = {_fmt_list(seg.roots)}")
            coeffs = ", ".join(_fmt_list(c) for c in seg.coeffs)
            lines.append(f"coeffs = [{coeffs}]")
            lines.append("")
    return "\n".join(lines)


# -- builders ----------------------------------------------------------


def build_system(cfg: ScenarioConfig) -> DdeSystem:
    """Closed-loop system in delay-normalized time."""
    L = cfg.plant.delay
    num = tuple(e / L**h for h, e in enumerate(cfg.plant.numerator))
    den = tuple(a / L**h for h, a in enumerate(cfg.plant.denominator))
    try:
        pid = PidParams(k=cfg.pid.k, k_i=cfg.pid.k_i * L, k_d=cfg.pid.k_d / L)
        plant = PlantModel(numerator=num, denominator=den)
        return build_closed_loop(pid, plant)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def build_initial(cfg: ScenarioConfig) -> InitialCondition:
    init = cfg.initial
    if init.steady is not None:
        return InitialCondition.steady(init.steady)
    if init.knots is None or init.segments is None:
        raise ConfigError(
            "initial condition needs either 'steady' or 'knots' plus 'segments'"
        )
    segments = [
        ExpPoly(zip(spec.roots, spec.coeffs)) for spec in init.segments
    ]
    try:
        return InitialCondition(init.knots, segments)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def build_forcing(cfg: ScenarioConfig) -> ForcingTerm:
    return ForcingTerm.setpoint_steps(cfg.setpoint.initial, cfg.setpoint.steps)


# -- internals ---------------------------------------------------------


def _floats(values, what: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in values)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{what} must be a list of numbers, got {values!r}") from exc


def _validate(cfg: ScenarioConfig) -> None:
    if cfg.plant.delay <= 0.0:
        raise ConfigError(f"plant.delay must be positive, got {cfg.plant.delay}")
    if cfg.simulation.horizon < 1:
        raise ConfigError(f"simulation.horizon must be >= 1, got {cfg.simulation.horizon}")
    if cfg.simulation.dt <= 0.0:
        raise ConfigError(f"simulation.dt must be positive, got {cfg.simulation.dt}")
    if not 0.0 < cfg.simulation.band < 0.5:
        raise ConfigError(f"simulation.band must lie in (0, 0.5), got {cfg.simulation.band}")
    init = cfg.initial
    if init.steady is None and (init.knots is None or init.segments is None):
        raise ConfigError("initial condition needs either 'steady' or 'knots' plus 'segments'")
    if init.segments is not None:
        for spec in init.segments:
            if len(spec.roots) != len(spec.coeffs):
                raise ConfigError(
                    f"initial segment has {len(spec.roots)} roots but "
                    f"{len(spec.coeffs)} coefficient lists"
                )


def _fmt(v: float) -> str:
    # repr keeps shortest round-trip form; TOML needs a decimal point or
    # exponent to read a float back as float
    s = repr(float(v))
    return s


def _fmt_list(values) -> str:
    return "[" + ", ".join(_fmt(v) for v in values) + "]"
