"""Experiment configuration, set-up and runs.

A run builds the billiard, slits, absorber and packet from an
:class:`ExperimentConfig`, propagates until the leaked probability reaches
its target or the step cap is hit, and records the screen intensity, the
slit phase series and the norm history.
"""
from __future__ import annotations

import dataclasses
import hashlib
import json
import logging
import time
import types
import typing
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from . import artifacts as sio
from .analysis import IntensityProfile, incoherent_sum_compare
from .geometry import (
    RightTriangle,
    SinaiRing,
    SlitSpec,
    Square,
    TriangleArc,
    billiard_mask,
    build_absorber,
    build_billiard,
    carve_slits,
    potential_symmetry_defect,
)
from .grid import ConfigurationError, make_grid
from .observables import NormRecorder, ScreenRecord, SlitPhaseSeries, leaked_probability
from .packet import (
    PacketSpec,
    barrier_overlap,
    gaussian_packet,
    normalize,
    packet_symmetry_defect,
)
from .propagator import (
    EvolutionState,
    NumericalInstability,
    Propagator,
    StepperConfig,
    evolve,
    stability_report,
)

log = logging.getLogger(__name__)

SC_TOLERANCE = 1e-12
PHASE_FLOOR = 1e-8


@dataclass
class GridConfig:
    height: float = 1.6
    width: float = 1.2
    spacing: float = 0.002
    # distance from the bottom of the rectangle to the bottom of the billiard
    margin_below: float = 0.1


@dataclass
class BilliardConfig:
    shape: str = "square"
    side: float = 1.0
    center: tuple[float, float] = (0.0, -0.6)
    radius: float = 0.1
    orientation: str = "left"
    sagitta: float = 0.1


@dataclass
class BarrierConfig:
    height: float = 1e6
    width: float = 0.008


@dataclass
class SlitConfig:
    width: float = 0.012
    distance: float = 0.1
    open: tuple[bool, bool] = (True, True)


@dataclass
class AbsorberConfig:
    width: float = 0.1
    strength: float = 2e4
    profile: str = "quadratic"


@dataclass
class PacketConfig:
    center: tuple[float, float] = (0.0, -0.25)
    k: tuple[float, float] = (0.0, 180.0)
    sigma: float = 0.09
    # "interior" zeroes the packet on barrier nodes and outside the billiard,
    # then renormalises; "none" keeps the bare Gaussian
    clip: str = "interior"


@dataclass
class StepperSettings:
    tau: float = 1e-6
    order: int = 4
    drift_tolerance: float = 1e-4
    check_every: int = 100


@dataclass
class ScreenConfig:
    distance: float = 0.3


@dataclass
class StoppingConfig:
    max_steps: int = 2_000_000
    leaked_target: float = 0.85
    check_every: int = 100
    intensity_window_steps: int | None = None


@dataclass
class ObserverConfig:
    screen_stride: int = 1
    phase_stride: int = 10
    norm_stride: int = 100
    snapshot_stride: int = 0
    history_stride: int = 0
    phase_mode: str = "node"


@dataclass
class ExperimentConfig:
    name: str = "experiment"
    grid: GridConfig = field(default_factory=GridConfig)
    billiard: BilliardConfig = field(default_factory=BilliardConfig)
    barrier: BarrierConfig = field(default_factory=BarrierConfig)
    slits: SlitConfig = field(default_factory=SlitConfig)
    absorber: AbsorberConfig = field(default_factory=AbsorberConfig)
    packet: PacketConfig = field(default_factory=PacketConfig)
    stepper: StepperSettings = field(default_factory=StepperSettings)
    screen: ScreenConfig = field(default_factory=ScreenConfig)
    stopping: StoppingConfig = field(default_factory=StoppingConfig)
    observers: ObserverConfig = field(default_factory=ObserverConfig)
    notes: str = ""

    def to_dict(self):
        return json.loads(json.dumps(dataclasses.asdict(self)))

    def hash(self) -> str:
        payload = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(payload.encode()).hexdigest()

    def replace(self, **sections):
        """Copy with some fields of the named sections changed.

        ``cfg.replace(grid={"spacing": 0.004}, name="x")``
        """
        data = self.to_dict()
        for key, value in sections.items():
            if isinstance(value, dict):
                data[key].update(value)
            else:
                data[key] = value
        return config_from_dict(data)


def _convert(tp, value, where):
    origin = typing.get_origin(tp)
    if dataclasses.is_dataclass(tp):
        if not isinstance(value, dict):
            raise ConfigurationError(f"{where}: expected an object")
        return _build(tp, value, where)
    if origin in (typing.Union, types.UnionType):
        args = [a for a in typing.get_args(tp) if a is not type(None)]
        return None if value is None else _convert(args[0], value, where)
    if origin is tuple:
        args = typing.get_args(tp)
        if not isinstance(value, (list, tuple)) or len(value) != len(args):
            raise ConfigurationError(f"{where}: expected a list of {len(args)} values")
        return tuple(_convert(a, v, f"{where}[{i}]") for i, (a, v) in enumerate(zip(args, value)))
    if tp is bool:
        if not isinstance(value, bool):
            raise ConfigurationError(f"{where}: expected true/false")
        return value
    if tp in (int, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigurationError(f"{where}: expected a number")
        if tp is int and float(value) != int(value):
            raise ConfigurationError(f"{where}: expected an integer")
        return tp(value)
    if tp is str:
        if not isinstance(value, str):
            raise ConfigurationError(f"{where}: expected a string")
        return value
    return value


def _build(cls, data, where):
    hints = typing.get_type_hints(cls)
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = set(data) - names
    if unknown:
        raise ConfigurationError(f"{where}: unknown keys {sorted(unknown)}")
    kwargs = {k: _convert(hints[k], v, f"{where}.{k}") for k, v in data.items()}
    return cls(**kwargs)


def _schema(tp, default=dataclasses.MISSING):
    origin = typing.get_origin(tp)
    if dataclasses.is_dataclass(tp):
        hints = typing.get_type_hints(tp)
        props = {}
        for f in dataclasses.fields(tp):
            d = f.default if f.default is not dataclasses.MISSING else dataclasses.MISSING
            props[f.name] = _schema(hints[f.name], d)
        return {"type": "object", "properties": props, "additionalProperties": False}
    if origin in (typing.Union, types.UnionType):
        args = [a for a in typing.get_args(tp) if a is not type(None)]
        out = {"anyOf": [_schema(args[0]), {"type": "null"}]}
    elif origin is tuple:
        args = typing.get_args(tp)
        out = {"type": "array", "items": _schema(args[0]), "minItems": len(args),
               "maxItems": len(args)}
    else:
        out = {"type": {bool: "boolean", int: "integer", float: "number", str: "string"}[tp]}
    if default is not dataclasses.MISSING:
        out["default"] = list(default) if isinstance(default, tuple) else default
    return out


def config_schema() -> dict:
    """JSON schema of the configuration file, with defaults."""
    schema = _schema(ExperimentConfig)
    schema["$schema"] = "https://json-schema.org/draft/2020-12/schema"
    schema["title"] = "slitbilliard experiment configuration"
    return schema


def config_from_dict(data) -> ExperimentConfig:
    """Build a config from plain data; unknown keys are rejected."""
    return _build(ExperimentConfig, data, "config")


def load_config(path) -> ExperimentConfig:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"{path}: invalid JSON ({exc})") from None
    return config_from_dict(data)


def save_config(cfg: ExperimentConfig, path):
    Path(path).write_text(json.dumps(cfg.to_dict(), indent=2) + "\n")


RECIPES = ("case_a", "case_b", "case_c", "case_d", "case_e", "case_f", "case_g",
           "case_h", "case_i", "case_l", "case_m", "triangle_arc")


def recipe(name: str) -> ExperimentConfig:
    """Load one of the bundled configurations (``case_a`` ... ``case_m``, ``triangle_arc``)."""
    if len(name) == 1:
        name = f"case_{name}"
    try:
        text = resources.files("slitbilliard.recipes").joinpath(f"{name}.json").read_text()
    except FileNotFoundError:
        raise ConfigurationError(f"no recipe named {name!r}; have {', '.join(RECIPES)}") from None
    return config_from_dict(json.loads(text))


def reduced(cfg: ExperimentConfig, spacing=0.004, tau=2e-6, max_steps=None) -> ExperimentConfig:
    """Coarser copy of ``cfg`` for quick runs; geometry and packet are unchanged.

    An intensity window keeps its duration in time units.
    """
    stopping = {} if max_steps is None else {"max_steps": int(max_steps)}
    window = cfg.stopping.intensity_window_steps
    if window:
        stopping["intensity_window_steps"] = int(round(window * cfg.stepper.tau / tau))
    return cfg.replace(grid={"spacing": spacing}, stepper={"tau": tau}, stopping=stopping,
                       name=f"{cfg.name}_reduced")


def make_shape(b: BilliardConfig):
    if b.shape == "square":
        return Square(b.side)
    if b.shape == "sinai":
        return SinaiRing(side=b.side, center=tuple(b.center), radius=b.radius)
    if b.shape == "triangle":
        return RightTriangle(b.orientation, b.side)
    if b.shape == "triangle_arc":
        return TriangleArc(b.sagitta, b.orientation, b.side)
    raise ConfigurationError(f"unknown billiard shape {b.shape!r}")


@dataclass
class Setup:
    config: ExperimentConfig
    grid: object
    shape: object
    slits: SlitSpec
    potential: object
    closed_potential: object
    mask: np.ndarray
    psi0: np.ndarray
    stepper: StepperConfig
    warnings: list


def build_setup(cfg: ExperimentConfig) -> Setup:
    g = cfg.grid
    depth = cfg.billiard.side if cfg.billiard.shape != "triangle" or \
        cfg.billiard.orientation != "apex" else cfg.billiard.side / 2
    grid = make_grid(g.height, g.width, g.spacing, y_min=-(cfg.billiard.side + g.margin_below))
    if depth + g.margin_below > g.height:
        raise ConfigurationError("billiard does not fit in the integration region")
    if cfg.billiard.side > g.width:
        raise ConfigurationError("billiard is wider than the integration region")
    shape = make_shape(cfg.billiard)
    closed = build_billiard(shape, cfg.barrier.height, cfg.barrier.width, grid)
    slits = SlitSpec(cfg.slits.width, cfg.slits.distance, *cfg.slits.open)
    V = carve_slits(closed, slits, grid)
    mask = billiard_mask(shape, grid)
    absorber = build_absorber(cfg.absorber.width, cfg.absorber.strength, cfg.absorber.profile,
                              grid, exclude=mask)
    V = V.with_absorber(absorber)
    closed = closed.with_absorber(absorber)
    top = (grid.ny - grid.y_offset) * grid.spacing
    if not cfg.screen.distance < top - cfg.absorber.width:
        raise ConfigurationError(
            f"screen at y={cfg.screen.distance} lies inside the absorbing layer")
    try:
        stepper = StepperConfig(cfg.stepper.tau, cfg.stepper.order,
                                cfg.stepper.drift_tolerance, cfg.stepper.check_every)
    except ValueError as exc:
        raise ConfigurationError(str(exc)) from None
    spec = PacketSpec(tuple(cfg.packet.center), tuple(cfg.packet.k), cfg.packet.sigma)
    psi0 = gaussian_packet(spec, grid)
    warnings = []
    inside = mask[grid.row_of(spec.center[1]), grid.col_of(spec.center[0])]
    if not inside:
        raise ConfigurationError(f"packet centre {spec.center} lies outside the billiard")
    overlap = barrier_overlap(psi0, V.barrier, grid)
    outside = 1 - norm_squared_masked(psi0, mask, grid)
    if cfg.packet.clip == "interior":
        if overlap + outside > 1e-6:
            warnings.append(f"initial packet clipped to the billiard interior (removed "
                            f"probability {overlap + outside:.3g} before renormalising)")
        psi0 = normalize(np.where(mask & (V.barrier == 0), psi0, 0), grid)
    elif cfg.packet.clip == "none":
        if overlap > 0 and np.abs(psi0[V.barrier > 0]).max() > PHASE_FLOOR * np.abs(psi0).max():
            warnings.append(f"initial packet overlaps the barrier (probability {overlap:.3g})")
        if outside > 1e-6:
            warnings.append(f"initial packet has probability {outside:.3g} outside the billiard")
    else:
        raise ConfigurationError(f"unknown packet clip mode {cfg.packet.clip!r}")
    for w in warnings:
        log.info(w)
    return Setup(cfg, grid, shape, slits, V, closed, mask, psi0, stepper, warnings)


def norm_squared_masked(psi, mask, grid):
    return 1 - leaked_probability(psi, mask, grid)


@dataclass
class ValidationReport:
    errors: list
    warnings: list
    stability: object = None
    potential_defect: float = float("nan")
    packet_defect: float = float("nan")

    @property
    def ok(self) -> bool:
        return not self.errors and (self.stability is None or self.stability.stable)

    @property
    def sc_satisfied(self) -> bool:
        return self.potential_defect < SC_TOLERANCE and self.packet_defect < SC_TOLERANCE

    def lines(self):
        out = [f"error: {e}" for e in self.errors]
        out += [f"warning: {w}" for w in self.warnings]
        if self.stability is not None:
            out.append(f"stability: {self.stability.summary()}")
        if not self.errors:
            out.append(f"potential symmetry defect: {self.potential_defect:.3e}")
            out.append(f"packet symmetry defect: {self.packet_defect:.3e}")
            verdict = "satisfied" if self.sc_satisfied else "violated"
            out.append(f"symmetry condition: {verdict}")
        return out


def validate_config(cfg: ExperimentConfig) -> ValidationReport:
    """Check a configuration without running it and predict fringe occurrence."""
    try:
        setup = build_setup(cfg)
    except ConfigurationError as exc:
        return ValidationReport([str(exc)], [])
    report = ValidationReport([], list(setup.warnings))
    report.stability = stability_report(setup.grid, setup.potential, setup.stepper)
    if not report.stability.stable:
        report.errors.append("time step outside the stability interval: "
                             + report.stability.summary())
    report.potential_defect = potential_symmetry_defect(setup.potential)
    report.packet_defect = packet_symmetry_defect(setup.psi0, setup.grid)
    return report


@dataclass
class RunResult:
    config: ExperimentConfig
    setup: Setup
    state: EvolutionState
    screen: ScreenRecord
    window_screen: ScreenRecord | None
    phases: SlitPhaseSeries
    norms: NormRecorder
    stop_reason: str
    leaked: float
    wall_time: float
    error: str = ""
    snapshots: object = None

    def profile(self, windowed=False) -> IntensityProfile:
        rec = self.window_screen if windowed else self.screen
        if rec is None:
            raise ValueError("run has no intensity window")
        return IntensityProfile(rec.x, rec.intensity, {"config_sha256": self.config.hash()})


class _LeakStop:
    def __init__(self, mask, target, every):
        self.mask, self.target, self.every = mask, target, max(1, every)
        self.leaked = 0.0

    def __call__(self, state):
        if state.n % self.every:
            return False
        self.leaked = leaked_probability(state.psi, self.mask, state.grid, state.norm0)
        return self.leaked >= self.target


class _Snapshots:
    def __init__(self, directory, stride, config_hash):
        self.dir, self.stride, self.hash = Path(directory), stride, config_hash
        self.index = []

    def __call__(self, state):
        self.dir.mkdir(parents=True, exist_ok=True)
        name = f"frame_{state.n:09d}.pgm"
        peak = sio.write_pgm(self.dir / name, np.abs(state.psi) ** 2, self.hash)
        self.index.append((name, state.n, state.t, peak))


def simulate(cfg: ExperimentConfig, setup: Setup | None = None, max_steps=None,
             extra_observers=(), snapshot_dir=None) -> RunResult:
    """Run an experiment in memory."""
    setup = setup or build_setup(cfg)
    obs = cfg.observers
    grid, stepper = setup.grid, setup.stepper
    screen = ScreenRecord.at(cfg.screen.distance, grid, stepper.tau, obs.screen_stride,
                             history_stride=obs.history_stride)
    window = cfg.stopping.intensity_window_steps
    window_screen = (ScreenRecord.at(cfg.screen.distance, grid, stepper.tau, obs.screen_stride,
                                     window=window) if window else None)
    floor = PHASE_FLOOR * float(np.abs(setup.psi0).max())
    phases = SlitPhaseSeries(setup.slits, floor, obs.phase_stride, obs.phase_mode)
    norms = NormRecorder(setup.mask, obs.norm_stride)
    observers = [screen, phases, norms]
    if window_screen is not None:
        observers.append(window_screen)
    snaps = None
    if obs.snapshot_stride and snapshot_dir is not None:
        snaps = _Snapshots(snapshot_dir, obs.snapshot_stride, cfg.hash())
        snaps.stride = obs.snapshot_stride
        observers.append(snaps)
    observers.extend(extra_observers)
    stop = _LeakStop(setup.mask, cfg.stopping.leaked_target, cfg.stopping.check_every)
    n_max = cfg.stopping.max_steps if max_steps is None else int(max_steps)

    state = EvolutionState(setup.psi0.copy(), grid, tau=stepper.tau)
    norms(state)
    phases(state)
    prop = Propagator(grid, setup.potential, stepper)
    start = time.perf_counter()
    reason, error = "max_steps", ""
    try:
        state = evolve(state, setup.potential, stepper, observers, n_max, stop, prop)
        if stop.leaked >= cfg.stopping.leaked_target:
            reason = "leaked_target"
    except NumericalInstability as exc:
        reason, error = "abort", str(exc)
    leaked = leaked_probability(state.psi, setup.mask, grid, state.norm0)
    return RunResult(cfg, setup, state, screen, window_screen, phases, norms, reason,
                     leaked, time.perf_counter() - start, error, snaps)


def run_experiment(cfg: ExperimentConfig, out=None, max_steps=None, snapshot_stride=None,
                   ) -> RunResult:
    """Run and write the artifact set into ``out`` (default ``runs/<name>``).

    The configuration is validated before anything is written. A numerical
    abort still writes the manifest and then re-raises.
    """
    if snapshot_stride is not None:
        cfg = cfg.replace(observers={"snapshot_stride": int(snapshot_stride)})
    report = validate_config(cfg)
    if not report.ok:
        raise ConfigurationError("; ".join(report.errors) or "invalid configuration")
    out = Path(out or Path("runs") / cfg.name)
    out.mkdir(parents=True, exist_ok=True)
    result = simulate(cfg, max_steps=max_steps, snapshot_dir=out / "snapshots")
    h = cfg.hash()
    artifacts = {"intensity": "intensity.csv", "phase": "phase.csv", "norm": "norm.csv"}
    result.profile().to_csv(out / "intensity.csv")
    if result.window_screen is not None:
        result.profile(windowed=True).to_csv(out / "intensity_window.csv")
        artifacts["intensity_window"] = "intensity_window.csv"
    sio.write_phase_csv(out / "phase.csv", result.phases.rows, h)
    sio.write_norm_csv(out / "norm.csv", result.norms.rows, h)
    if result.snapshots is not None and result.snapshots.index:
        sio.write_snapshot_index(out / "snapshots" / "index.csv", result.snapshots.index, h)
        artifacts["snapshots"] = "snapshots/index.csv"
    manifest = {
        "name": cfg.name,
        "config_sha256": h,
        "config": cfg.to_dict(),
        "stop_reason": result.stop_reason,
        "steps": result.state.n,
        "time": result.state.t,
        "leaked": result.leaked,
        "wall_time_s": result.wall_time,
        "symmetry_condition": "satisfied" if report.sc_satisfied else "violated",
        "potential_symmetry_defect": report.potential_defect,
        "packet_symmetry_defect": report.packet_defect,
        "stability": report.stability.summary(),
        "warnings": report.warnings,
        "error": result.error,
        "artifacts": artifacts,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    if result.stop_reason == "abort":
        raise NumericalInstability(result.error)
    return result


def one_slit_configs(cfg: ExperimentConfig):
    """Configs with only slit ``a`` open and with only slit ``b`` open."""
    only_a = cfg.replace(slits={"open": [True, False]}, name=f"{cfg.name}_slit_a")
    only_b = cfg.replace(slits={"open": [False, True]}, name=f"{cfg.name}_slit_b")
    return only_a, only_b


@dataclass
class PairResult:
    a: RunResult
    b: RunResult
    combined: IntensityProfile
    two_slit: IntensityProfile | None
    score: float | None


def run_one_slit_pair(cfg: ExperimentConfig, out=None, two_slit=None, max_steps=None,
                      write=True) -> PairResult:
    """Close each slit in turn and compare the summed profiles with the two-slit one.

    ``two_slit`` may be an :class:`IntensityProfile`, a path to a profile
    CSV, ``True`` to run the two-slit experiment as well, or ``None`` to use
    ``out/two_slit/intensity.csv`` when it exists.
    """
    only_a, only_b = one_slit_configs(cfg)
    out = Path(out or Path("runs") / f"{cfg.name}_one_slit_pair")
    if write:
        for c in (only_a, only_b):
            report = validate_config(c)
            if not report.ok:
                raise ConfigurationError("; ".join(report.errors))
        ra = run_experiment(only_a, out / "slit_a", max_steps=max_steps)
        rb = run_experiment(only_b, out / "slit_b", max_steps=max_steps)
    else:
        ra, rb = simulate(only_a, max_steps=max_steps), simulate(only_b, max_steps=max_steps)
    combined = ra.profile() + rb.profile()
    combined.meta = {"config_sha256": cfg.hash(), "profile": "slit_a + slit_b"}
    if two_slit is True:
        if write:
            two = run_experiment(cfg, out / "two_slit", max_steps=max_steps).profile()
        else:
            two = simulate(cfg, max_steps=max_steps).profile()
    elif two_slit is None:
        path = out / "two_slit" / "intensity.csv"
        two = IntensityProfile.from_csv(path) if path.exists() else None
    elif isinstance(two_slit, IntensityProfile):
        two = two_slit
    else:
        two = IntensityProfile.from_csv(two_slit)
    score = incoherent_sum_compare(two, ra.profile(), rb.profile()) if two is not None else None
    if write:
        combined.to_csv(out / "intensity_sum.csv")
        summary = {"config_sha256": cfg.hash(), "incoherent_sum_score": score,
                   "slit_a": str(out / "slit_a"), "slit_b": str(out / "slit_b")}
        (out / "comparison.json").write_text(json.dumps(summary, indent=2) + "\n")
    return PairResult(ra, rb, combined, two, score)
