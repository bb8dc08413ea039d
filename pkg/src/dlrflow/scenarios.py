"""Scenario definitions, diagnostics, configuration parsing, snapshot and
time-series output, and the simulation driver."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields as dc_fields, replace
from pathlib import Path

import numpy as np

from . import maccormack as mc
from .grids import SpatialGrid, VelocityGrid, gradient_x, is_power_of_two
from .lowrank import init_equilibrium, moments, total_mass, total_momentum
from .splitting import SplittingConfig, step

SCENARIOS = ("sound_wave", "shear_flow", "custom")
SOLVERS = ("lowrank", "maccormack", "both")
ORDERS = ("lie", "strang")

DIAG_HEADER = "time,mass,mom1,mom2,mass_drift,max_u,smin,err_rho,err_u"
SNAPSHOT_FIELDS = ("rho", "u1", "u2", "vorticity")


class ConfigError(ValueError):
    pass


@dataclass
class ScenarioConfig:
    """Everything one simulation needs; parsed from flat key = value files
    with optional command-line overrides. Exactly one of epsilon/reynolds
    must be given (reynolds converts via epsilon = v0 / reynolds)."""

    scenario: str = "sound_wave"
    solver: str = "lowrank"
    n_x: int = 128
    n_v: int = 32
    rank: int = 10
    v_max: float = 6.0
    epsilon: float | None = None
    reynolds: float | None = None
    tau: float = 0.2
    order: str = "strang"
    backend: str = "fd_rk4"
    t_end: float = 1.0
    delta: float | None = None
    v0: float = 0.1
    shear_width: float = 1.0 / 30.0
    cfl: float = 0.9
    snapshot_times: tuple[float, ...] = ()
    out_dir: str = "out"
    seed: int = 0

    def validate(self) -> "ScenarioConfig":
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"unknown scenario {self.scenario!r}; "
                              f"expected one of {SCENARIOS}")
        if self.solver not in SOLVERS:
            raise ConfigError(f"unknown solver {self.solver!r}; "
                              f"expected one of {SOLVERS}")
        if self.order not in ORDERS:
            raise ConfigError(f"unknown order {self.order!r}")
        if (self.epsilon is None) == (self.reynolds is None):
            raise ConfigError("exactly one of epsilon and reynolds must be set")
        for name in ("n_x", "n_v", "rank"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        for name in ("v_max", "tau", "t_end", "cfl", "v0", "shear_width"):
            if not getattr(self, name) > 0.0:
                raise ConfigError(f"{name} must be positive")
        if self.epsilon is not None and not self.epsilon > 0.0:
            raise ConfigError("epsilon must be positive")
        if self.reynolds is not None and not self.reynolds > 0.0:
            raise ConfigError("reynolds must be positive")
        if self.backend == "spectral" and not is_power_of_two(self.n_x):
            raise ConfigError("spectral backend requires n_x to be a power "
                              f"of two, got {self.n_x}")
        if self.rank < 6:
            raise ConfigError("rank must be at least 6")
        if self.solver in ("lowrank", "both"):
            for t in self.snapshot_times:
                k = t / self.tau
                if abs(k - round(k)) > 1e-9:
                    raise ConfigError(
                        f"snapshot time {t} is not a multiple of tau={self.tau}")
        out = self
        if out.delta is None:
            out = replace(out, delta=5e-3 if out.scenario == "shear_flow" else 1e-3)
        return out

    @property
    def epsilon_value(self) -> float:
        if self.epsilon is not None:
            return self.epsilon
        return self.v0 / self.reynolds


_FIELD_TYPES = {f.name: f for f in dc_fields(ScenarioConfig)}


def _parse_value(key: str, raw: str):
    raw = raw.strip()
    if key in ("n_x", "n_v", "rank", "seed"):
        return int(raw)
    if key in ("scenario", "solver", "order", "backend", "out_dir"):
        return raw
    if key == "snapshot_times":
        if not raw:
            return ()
        return tuple(float(tok) for tok in raw.split(","))
    return float(raw)


def parse_config_text(text: str) -> dict:
    """Flat key = value format; '#' starts a comment; unknown keys are
    errors."""
    values: dict = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, raw = stripped.split("=", 1)
        key = key.strip()
        if key not in _FIELD_TYPES:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        try:
            values[key] = _parse_value(key, raw)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {exc}") from exc
    return values


def load_config(path: str | Path, overrides: dict | None = None) -> ScenarioConfig:
    values = parse_config_text(Path(path).read_text()) if path else {}
    if overrides:
        values.update({k: v for k, v in overrides.items() if v is not None})
    return ScenarioConfig(**values).validate()


# ----------------------------------------------------------------------------
# Initial data
# ----------------------------------------------------------------------------

def init_sound_wave(cfg: ScenarioConfig, grid: SpatialGrid):
    """Plane wave along y: rho = 1 + delta sin(2 pi y), u = (0, delta sin(2 pi y))."""
    d = cfg.delta
    y = grid.x2
    rho0 = 1.0 + d * np.sin(2.0 * np.pi * y)
    u0 = (np.zeros_like(y), d * np.sin(2.0 * np.pi * y))
    return rho0, u0


def init_shear_flow(cfg: ScenarioConfig, grid: SpatialGrid):
    """Double shear layer: u1 flips from v0 to -v0 across y = 1/4 and 3/4
    over width shear_width; u2 carries a small sinusoidal perturbation."""
    v0, width, d = cfg.v0, cfg.shear_width, cfg.delta
    x, y = grid.x1, grid.x2
    u1 = np.where(y <= 0.5,
                  v0 * np.tanh((y - 0.25) / width),
                  v0 * np.tanh((0.75 - y) / width))
    u2 = d * np.sin(2.0 * np.pi * x)
    return np.ones_like(y), (u1, u2)


def initial_fields(cfg: ScenarioConfig, grid: SpatialGrid):
    if cfg.scenario == "sound_wave":
        return init_sound_wave(cfg, grid)
    if cfg.scenario == "shear_flow":
        return init_shear_flow(cfg, grid)
    return np.ones(grid.shape), (np.zeros(grid.shape), np.zeros(grid.shape))


def vorticity(u1: np.ndarray, u2: np.ndarray, grid: SpatialGrid,
              method: str = "centered2") -> np.ndarray:
    """omega = d(u2)/dx1 - d(u1)/dx2."""
    du2 = gradient_x(u2, grid, method)[0]
    du1 = gradient_x(u1, grid, method)[1]
    return du2 - du1


# ----------------------------------------------------------------------------
# Snapshot and diagnostics files
# ----------------------------------------------------------------------------

def snapshot_name(fieldname: str, t: float) -> str:
    return f"snap_{fieldname}_{t:.6f}"


def write_snapshot(outdir: Path, fieldname: str, t: float,
                   values: np.ndarray) -> Path:
    outdir.mkdir(parents=True, exist_ok=True)
    stem = snapshot_name(fieldname, t)
    payload = np.ascontiguousarray(values, dtype="<f8")
    (outdir / f"{stem}.bin").write_bytes(payload.tobytes())
    meta = "\n".join([
        f"field = {fieldname}",
        f"n_x = {values.shape[0]}",
        f"time = {t:.6f}",
        "dtype = float64",
        "byte_order = little",
        "order = row-major",
    ]) + "\n"
    (outdir / f"{stem}.meta").write_text(meta)
    return outdir / f"{stem}.meta"


def read_snapshot(meta_path: str | Path):
    meta_path = Path(meta_path)
    meta: dict[str, str] = {}
    for line in meta_path.read_text().splitlines():
        if not line.strip():
            continue
        key, _, raw = line.partition("=")
        meta[key.strip()] = raw.strip()
    n = int(meta["n_x"])
    data = np.frombuffer(meta_path.with_suffix(".bin").read_bytes(), dtype="<f8")
    if data.size != n * n:
        raise ValueError(f"snapshot payload has {data.size} values, "
                         f"expected {n * n}")
    return data.reshape(n, n).copy(), meta


class DiagnosticsWriter:
    def __init__(self, path: Path):
        self.path = path
        self.rows: list[str] = []

    def add(self, time, mass, mom1, mom2, mass_drift, max_u, smin,
            err_rho=math.nan, err_u=math.nan) -> None:
        vals = (time, mass, mom1, mom2, mass_drift, max_u, smin, err_rho, err_u)
        self.rows.append(",".join(f"{v:.12e}" for v in vals))

    def flush(self) -> None:
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self.path.write_text(DIAG_HEADER + "\n" + "\n".join(self.rows) + "\n")


# ----------------------------------------------------------------------------
# Driver
# ----------------------------------------------------------------------------

@dataclass
class RunResult:
    out_dir: Path
    lowrank_steps: int = 0
    reference_steps: int = 0
    snapshots: list[Path] = field(default_factory=list)


def _relative_l2(a: np.ndarray, b: np.ndarray) -> float:
    denom = float(np.linalg.norm(b))
    if denom == 0.0:
        return math.nan
    return float(np.linalg.norm(a - b)) / denom


def _lowrank_fields(state):
    mom = moments(state)
    return mom.rho, mom.u[0], mom.u[1]


def _fluid_fields(fstate):
    u1, u2 = fstate.u
    return fstate.rho, u1, u2


def _advance_fluid(fstate, visc, cfl, t_target):
    nsteps = 0
    while fstate.time < t_target - 1e-12:
        dt = min(mc.cfl_dt(fstate, cfl), mc.viscous_dt(fstate, visc),
                 t_target - fstate.time)
        fstate = mc.maccormack_step(fstate, visc, dt)
        nsteps += 1
    return fstate, nsteps


def run(cfg: ScenarioConfig) -> RunResult:
    """Run the configured solver(s) to t_end, writing diagnostics.csv and the
    requested field snapshots; returns paths and step counts."""
    cfg = cfg.validate()
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    xgrid = SpatialGrid(cfg.n_x)
    rho0, u0 = initial_fields(cfg, xgrid)
    result = RunResult(out_dir=out)
    diag = DiagnosticsWriter(out / "diagnostics.csv")
    snap_times = sorted(cfg.snapshot_times)
    eps = cfg.epsilon_value
    grad_method = "centered2" if cfg.backend == "fd_rk4" else "spectral"

    def want_snapshot(t: float) -> bool:
        return any(abs(t - s) <= 1e-9 for s in snap_times)

    def dump(outdir: Path, t: float, rho, u1, u2):
        w = vorticity(u1, u2, xgrid, grad_method)
        for name, arr in zip(SNAPSHOT_FIELDS, (rho, u1, u2, w)):
            result.snapshots.append(write_snapshot(outdir, name, t, arr))

    try:
        if cfg.solver == "maccormack":
            _run_maccormack_only(cfg, xgrid, rho0, u0, diag, dump,
                                 want_snapshot, result)
        else:
            _run_lowrank(cfg, xgrid, rho0, u0, eps, diag, dump,
                         want_snapshot, result, out)
    finally:
        diag.flush()
    return result


def _run_maccormack_only(cfg, xgrid, rho0, u0, diag, dump, want_snapshot,
                         result):
    visc = mc.viscosity_from_epsilon(cfg.epsilon_value)
    fstate = mc.FluidState(rho0.copy(), rho0 * u0[0], rho0 * u0[1], xgrid)
    mass0 = mc.total_mass(fstate)

    def record(fs):
        rho, u1, u2 = _fluid_fields(fs)
        diag.add(fs.time, mc.total_mass(fs), *mc.total_momentum(fs),
                 mc.total_mass(fs) - mass0,
                 float(np.max(np.hypot(u1, u2))), math.nan)
        if want_snapshot(fs.time):
            dump(result.out_dir, fs.time, rho, u1, u2)

    record(fstate)
    while fstate.time < cfg.t_end - 1e-12:
        dt = min(mc.cfl_dt(fstate, cfg.cfl), mc.viscous_dt(fstate, visc))
        pending = [t for t in sorted(set(cfg.snapshot_times) | {cfg.t_end})
                   if t > fstate.time + 1e-12]
        dt = min(dt, pending[0] - fstate.time)
        fstate = mc.maccormack_step(fstate, visc, dt)
        result.reference_steps += 1
        record(fstate)


def _run_lowrank(cfg, xgrid, rho0, u0, eps, diag, dump, want_snapshot,
                 result, out):
    both = cfg.solver == "both"
    vgrid = VelocityGrid(cfg.n_v, cfg.v_max)
    rng = np.random.default_rng(cfg.seed)
    state = init_equilibrium(rho0, u0, cfg.rank, xgrid, vgrid, rng)
    scfg = SplittingConfig(epsilon=eps, tau=cfg.tau, order=cfg.order,
                           backend=cfg.backend)
    fstate = None
    visc = None
    if both:
        visc = mc.viscosity_from_epsilon(eps)
        fstate = mc.FluidState(rho0.copy(), rho0 * u0[0], rho0 * u0[1], xgrid)

    mass0 = total_mass(state)
    n_steps = max(1, round(cfg.t_end / cfg.tau))
    if abs(n_steps * cfg.tau - cfg.t_end) > 1e-9 * max(1.0, cfg.t_end):
        raise ConfigError(f"t_end={cfg.t_end} is not a multiple of tau={cfg.tau}")

    def record(t, report=None):
        nonlocal fstate
        rho, u1, u2 = _lowrank_fields(state)
        err_rho = err_u = math.nan
        if both:
            fstate, nref = _advance_fluid(fstate, visc, cfg.cfl, t)
            result.reference_steps += nref
            rho_m, u1_m, u2_m = _fluid_fields(fstate)
            err_rho = _relative_l2(rho, rho_m)
            err_u = _relative_l2(np.stack([u1, u2]), np.stack([u1_m, u2_m]))
        smin = (float(np.linalg.svd(state.S, compute_uv=False)[-1])
                if report is None else report.smin)
        diag.add(t, total_mass(state), *total_momentum(state),
                 total_mass(state) - mass0,
                 float(np.max(np.hypot(u1, u2))), smin, err_rho, err_u)
        if want_snapshot(t):
            dump(result.out_dir, t, rho, u1, u2)
            if both:
                rho_m, u1_m, u2_m = _fluid_fields(fstate)
                dump(out / "reference", t, rho_m, u1_m, u2_m)

    record(0.0)
    for k in range(n_steps):
        state, report = step(state, scfg, rng)
        result.lowrank_steps += 1
        record((k + 1) * cfg.tau, report)
