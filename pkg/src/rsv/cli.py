"""Run orchestration: JSON configuration, the simulation driver with
diagnostics export, parameter sweeps, checkpointing, and the command line."""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import struct
import sys
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import criteria, dynamics, elliptic, profile_fit, riemann
from .criteria import BlowupVerdict, DetectionConfig
from .errors import (
    CorruptCheckpoint,
    NoBlowupDetected,
    NonPositiveDepth,
    RsvError,
    VersionOrShapeMismatch,
)
from .statespace import Grid, Params, State

__all__ = [
    "RunConfig",
    "RunResult",
    "load_config",
    "build_initial_state",
    "run",
    "sweep",
    "write_checkpoint",
    "read_checkpoint",
    "fit_run_dir",
    "load_run_record",
    "main",
]

SCHEMA_VERSION = 1
CHECKPOINT_MAGIC = b"RSVCKPT1"
CHECKPOINT_VERSION = 1

LEDGER_COLUMNS = [
    "t",
    "E_tilde",
    "E_star",
    "conservation_residual",
    "min_h",
    "max_h",
    "min_P_plus",
    "max_P_plus",
    "max_abs_P_minus",
    "Q_inf_norm",
    "M_t",
]

SNAPSHOT_COLUMNS = ["x", "eta", "u", "h", "P_plus", "P_minus", "Q"]


def _fmt(v: float) -> str:
    return "%.17g" % float(v)


@dataclass(frozen=True)
class RunConfig:
    params: Params
    grid: Grid
    initial: dict
    horizon: float
    snapshot_stride: int = 10
    snapshot_files: int | str = "all"
    cfl_number: float = 0.4
    mode: str = "empirical"
    seed: int = 0
    output_dir: str = "run_out"
    detection: DetectionConfig = field(default_factory=DetectionConfig)
    max_steps: int = 2_000_000

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA_VERSION,
            "params": {
                "g": self.params.g,
                "epsilon": self.params.epsilon,
                "alpha": self.params.alpha,
                "h_star": self.params.h_star,
                "classical_branch": self.params.classical_branch,
            },
            "grid": {"n_points": self.grid.n_points, "length": self.grid.length},
            "initial": self.initial,
            "horizon": self.horizon,
            "snapshot_stride": self.snapshot_stride,
            "snapshot_files": self.snapshot_files,
            "cfl_number": self.cfl_number,
            "mode": self.mode,
            "seed": self.seed,
            "output_dir": self.output_dir,
            "detection": dataclasses.asdict(self.detection),
            "max_steps": self.max_steps,
        }


def config_from_dict(data: dict) -> RunConfig:
    if data.get("schema") != SCHEMA_VERSION:
        raise ValueError(
            f"unsupported config schema {data.get('schema')!r}; expected {SCHEMA_VERSION}"
        )
    p = data["params"]
    params = Params(
        g=float(p["g"]),
        epsilon=float(p["epsilon"]),
        alpha=float(p["alpha"]),
        h_star=float(p["h_star"]),
        classical_branch=bool(p.get("classical_branch", False)),
    )
    g = data["grid"]
    grid = Grid(n_points=int(g["n_points"]), length=float(g["length"]))
    horizon = float(data["horizon"])
    if not horizon > 0:
        raise ValueError("horizon must be positive")
    stride = int(data.get("snapshot_stride", 10))
    if stride < 1:
        raise ValueError("snapshot_stride must be >= 1")
    cfl = float(data.get("cfl_number", 0.4))
    if not (0.0 < cfl <= 0.9):
        raise ValueError("cfl_number must lie in (0, 0.9]")
    mode = data.get("mode", "empirical")
    if mode not in ("rigorous", "empirical"):
        raise ValueError(f"unknown mode {mode!r}")
    detection = DetectionConfig(**data.get("detection", {}))
    initial = dict(data["initial"])
    if initial.get("kind") not in ("constant", "simple_wave", "two_bump", "file"):
        raise ValueError(f"unknown initial kind {initial.get('kind')!r}")
    return RunConfig(
        params=params,
        grid=grid,
        initial=initial,
        horizon=horizon,
        snapshot_stride=stride,
        snapshot_files=data.get("snapshot_files", "all"),
        cfl_number=cfl,
        mode=mode,
        seed=int(data.get("seed", 0)),
        output_dir=str(data.get("output_dir", "run_out")),
        detection=detection,
        max_steps=int(data.get("max_steps", 2_000_000)),
    )


def load_config(path: str | Path) -> RunConfig:
    with open(path, "r", encoding="utf-8") as f:
        return config_from_dict(json.load(f))


def build_initial_state(config: RunConfig) -> State:
    params, grid = config.params, config.grid
    spec = config.initial
    kind = spec["kind"]
    if kind == "constant":
        n = grid.n_points
        state = State(np.zeros(n), np.zeros(n), 0.0)
    elif kind == "simple_wave":
        state = criteria.generate_blowup_data(float(spec["delta"]), params, grid)
    elif kind == "two_bump":
        state = criteria.generate_two_bump(
            tuple(float(d) for d in spec["deltas"]),
            tuple(float(c) for c in spec["centers"]),
            params,
            grid,
        )
    elif kind == "file":
        data = np.loadtxt(spec["path"], delimiter=",", skiprows=1)
        if data.shape[0] != grid.n_points:
            raise VersionOrShapeMismatch("initial-state file length != grid n_points")
        state = State(data[:, 1].copy(), data[:, 2].copy(), 0.0)
    else:  # pragma: no cover - guarded in config_from_dict
        raise ValueError(kind)
    if spec.get("comoving", False):
        # Galilean boost into the frame moving with the background wave speed;
        # all gradient diagnostics (P+, P-, Q, stretch) are boost-invariant,
        # and the no-wrap window shrinks by the travel distance.
        c0 = math.sqrt(params.g * params.h_star)
        state = State(state.eta, state.u - c0 / params.alpha, state.time)
    return state


def _support_width(h: np.ndarray, h_star: float, grid: Grid) -> float:
    """Width of the smallest periodic interval holding the depth perturbation."""
    active = np.abs(h - h_star) > 1e-13 * max(1.0, abs(h_star))
    idx = np.nonzero(active)[0]
    if len(idx) == 0:
        return 0.0
    gaps = np.diff(np.concatenate([idx, [idx[0] + grid.n_points]]))
    return grid.length - (int(np.max(gaps)) - 1) * grid.dx


def validate_no_wrap(state: State, config: RunConfig) -> None:
    """Assert the perturbation cannot wrap around the period within the horizon.

    Generic data spread at the fastest characteristic speed in both
    directions.  Simple-wave data carry information only along the plus
    family (the minus invariant is constant), so the support grows only by
    the plus-speed spread; pure translation wraps harmlessly.
    """
    params, grid = config.params, config.grid
    inv = riemann.invariants(state, params, grid)
    support = _support_width(state.depth(params), params.h_star, grid)
    if config.initial.get("kind") == "simple_wave":
        spread = float(np.max(inv.lambda_plus) - np.min(inv.lambda_plus))
    else:
        spread = float(
            max(np.max(np.abs(inv.lambda_plus)), np.max(np.abs(inv.lambda_minus)))
        )
    if support + spread * config.horizon >= grid.length / 2.0:
        raise ValueError(
            "no-wrap validator failed: support %.4g + spread %.4g * horizon %.4g "
            "exceeds half the period %.4g"
            % (support, spread, config.horizon, grid.length / 2.0)
        )


@dataclass
class RunResult:
    config: RunConfig
    record: riemann.RunRecord
    ledger: list[dict]
    verdict: BlowupVerdict
    run_dir: Path
    checks: dict


def _snapshot_path(run_dir: Path, index: int) -> Path:
    return run_dir / "snapshots" / f"snapshot_{index:06d}.csv"


def _write_snapshot(path: Path, state: State, params: Params, grid: Grid) -> None:
    inv = riemann.invariants(state, params, grid)
    if params.epsilon > 0:
        Q = elliptic.riccati_Q(state, params, grid)
    else:
        Q = np.zeros(grid.n_points)
    h = state.depth(params)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(",".join(SNAPSHOT_COLUMNS) + "\n")
        for i in range(grid.n_points):
            f.write(
                ",".join(
                    _fmt(v)
                    for v in (
                        grid.x[i],
                        state.eta[i],
                        state.u[i],
                        h[i],
                        inv.P_plus[i],
                        inv.P_minus[i],
                        Q[i],
                    )
                )
                + "\n"
            )


class _LoopState:
    """Mutable bookkeeping carried across steps (and through checkpoints)."""

    def __init__(self, state: State, step: int, snap_count: int,
                 sup_pp: float, sup_pm: float, E_tilde0: float):
        self.state = state
        self.step = step
        self.snap_count = snap_count
        self.sup_pp = sup_pp
        self.sup_pm = sup_pm
        self.E_tilde0 = E_tilde0


def _ledger_row(loop: _LoopState, config: RunConfig) -> tuple[dict, dict]:
    params, grid = config.params, config.grid
    state = loop.state
    report = dynamics.energy_report(state, state, params, grid)
    inv = riemann.invariants(state, params, grid)
    h = state.depth(params)
    if params.epsilon > 0:
        Q = elliptic.riccati_Q(state, params, grid)
        q_inf = float(np.max(np.abs(Q)))
    else:
        q_inf = 0.0
    loop.sup_pp = max(loop.sup_pp, float(np.max(inv.P_plus)))
    loop.sup_pm = max(loop.sup_pm, float(np.max(np.abs(inv.P_minus))))
    E0 = loop.E_tilde0
    drift = abs(report.E_tilde - E0) / E0 if E0 > 0 else abs(report.E_tilde - E0)
    row = {
        "t": state.time,
        "E_tilde": report.E_tilde,
        "E_star": report.E_star,
        "conservation_residual": drift,
        "min_h": float(np.min(h)),
        "max_h": float(np.max(h)),
        "min_P_plus": float(np.min(inv.P_plus)),
        "max_P_plus": float(np.max(inv.P_plus)),
        "max_abs_P_minus": float(np.max(np.abs(inv.P_minus))),
        "Q_inf_norm": q_inf,
        "M_t": loop.sup_pp + loop.sup_pm,
    }
    # export-time re-checks: pointwise energy/depth inequality and the
    # explicit bound on the nonlocal source
    h_min, h_max = row["min_h"], row["max_h"]
    checks = {"prop21_pointwise_ok": True, "q_bound_ok": True}
    if params.epsilon > 0:
        cubic = (params.g * math.sqrt(params.epsilon) / 3.0) * (
            (h - params.h_star) ** 2 * (2.0 * h + params.h_star)
        )
        checks["prop21_pointwise_ok"] = bool(
            report.E_star >= float(np.max(cubic)) * 0.98
        )
        if h_min > 0:
            q_bound = (
                16.0
                / params.epsilon**1.5
                * (h_max**2 / h_min**6)
                * report.E_star
            )
            checks["q_bound_ok"] = bool(q_inf <= q_bound * (1.0 + 1e-9))
    return row, checks


def _want_snapshot_file(config: RunConfig, row_index: int, n_rows_hint: int) -> bool:
    if config.snapshot_files == "all":
        return True
    budget = int(config.snapshot_files)
    if budget <= 0:
        return False
    every = max(1, n_rows_hint // budget)
    return row_index % every == 0


def run(
    config: RunConfig,
    resume_loop: _LoopState | None = None,
    checkpoint_at: float | None = None,
) -> RunResult:
    """Execute a configured run and export its artifacts.

    Byte-identical outputs for identical configs: the step size depends only
    on the current state and the horizon, there is no randomness, and all
    floats are written with 17 significant digits.
    """
    params, grid = config.params, config.grid
    run_dir = Path(config.output_dir)
    run_dir.mkdir(parents=True, exist_ok=True)

    fresh = resume_loop is None
    if fresh:
        state0 = build_initial_state(config)
        validate_no_wrap(state0, config)
        E_tilde0 = dynamics.energy_report(state0, state0, params, grid).E_tilde
        loop = _LoopState(state0, 0, 0, -math.inf, -math.inf, E_tilde0)
        with open(run_dir / "config.json", "w", encoding="utf-8") as f:
            json.dump(config.to_dict(), f, indent=2, sort_keys=True)
            f.write("\n")
        ledger_f = open(run_dir / "ledger.csv", "w", encoding="utf-8", newline="\n")
        ledger_f.write(",".join(LEDGER_COLUMNS) + "\n")
    else:
        loop = resume_loop
        ledger_f = open(run_dir / "ledger.csv", "a", encoding="utf-8", newline="\n")

    threshold = config.detection.threshold_factor * math.sqrt(params.g / params.h_star)
    # spread the snapshot-file budget over the expected number of ledger rows,
    # estimated from the initial CFL step (refinement by the gradient cap only
    # shortens late steps, which biases extra files toward the interesting end)
    dt0 = dynamics.cfl_dt(loop.state, params, grid, config.cfl_number)
    est_steps = max(1, min(config.max_steps, int(config.horizon / dt0) + 1))
    n_rows_hint = max(1, est_steps // config.snapshot_stride)

    ledger_rows: list[dict] = []
    times, etas, us = [], [], []
    checks_all = {"prop21_pointwise_ok": True, "q_bound_ok": True}
    depth_failed_at = None
    checkpoint_written = False

    last_emit_step = -1

    def emit_row(force_snapshot=False):
        nonlocal checks_all, last_emit_step
        last_emit_step = loop.step
        row, checks = _ledger_row(loop, config)
        ledger_rows.append(row)
        ledger_f.write(",".join(_fmt(row[c]) for c in LEDGER_COLUMNS) + "\n")
        for k in checks_all:
            checks_all[k] = checks_all[k] and checks[k]
        if force_snapshot or _want_snapshot_file(config, loop.snap_count, n_rows_hint):
            _write_snapshot(
                _snapshot_path(run_dir, loop.snap_count), loop.state, params, grid
            )
        times.append(loop.state.time)
        etas.append(loop.state.eta.copy())
        us.append(loop.state.u.copy())
        loop.snap_count += 1

    try:
        if fresh:
            emit_row()
        inv = riemann.invariants(loop.state, params, grid)
        while loop.state.time < config.horizon * (1.0 - 1e-12):
            if loop.step >= config.max_steps:
                break
            p_max = max(
                float(np.max(np.abs(inv.P_plus))),
                float(np.max(np.abs(inv.P_minus))),
                1.0,
            )
            dt = min(
                dynamics.cfl_dt(loop.state, params, grid, config.cfl_number),
                0.5 / p_max,
                config.horizon - loop.state.time,
            )
            prev_state = loop.state
            try:
                loop.state = dynamics.step(loop.state, dt, params, grid)
            except NonPositiveDepth:
                depth_failed_at = loop.state.time
                break
            except FloatingPointError:
                break
            if not (
                np.all(np.isfinite(loop.state.eta)) and np.all(np.isfinite(loop.state.u))
            ):
                loop.state = prev_state
                break
            loop.step += 1
            inv = riemann.invariants(loop.state, params, grid)
            loop.sup_pp = max(loop.sup_pp, float(np.max(inv.P_plus)))
            loop.sup_pm = max(loop.sup_pm, float(np.max(np.abs(inv.P_minus))))
            at_stride = loop.step % config.snapshot_stride == 0
            min_pp = float(np.min(inv.P_plus))
            done = (
                loop.state.time >= config.horizon * (1.0 - 1e-12)
                or min_pp < -1.2 * threshold
            )
            if at_stride or done:
                emit_row(force_snapshot=done)
                if (
                    checkpoint_at is not None
                    and not checkpoint_written
                    and loop.state.time >= checkpoint_at
                ):
                    write_checkpoint(run_dir / "checkpoint.bin", config, loop)
                    checkpoint_written = True
                    ledger_f.close()
                    record = riemann.RunRecord(
                        grid, params, np.array(times), np.array(etas), np.array(us)
                    )
                    verdict = BlowupVerdict(
                        detected=False,
                        t_detect=float("nan"),
                        t_blowup_extrapolated=float("nan"),
                        mode="horizon_reached",
                        slope_fit=float("nan"),
                    )
                    return RunResult(config, record, ledger_rows, verdict, run_dir, checks_all)
            if done:
                break
        # a break on depth failure, non-finite state, or the step cap leaves
        # the last good state unrecorded unless it landed on a stride row
        if loop.step != last_emit_step and (fresh or loop.step > resume_loop.step):
            emit_row(force_snapshot=True)
    finally:
        if not ledger_f.closed:
            ledger_f.close()

    # classify the recorded series (resumed runs re-read the full ledger so
    # detection sees the whole history)
    full = _read_ledger(run_dir / "ledger.csv")
    E_star0 = full["E_star"][0]
    verdict = criteria.detect_blowup(
        full["t"],
        full["min_P_plus"],
        full["min_h"],
        E_star0,
        params,
        config.detection,
    )
    if depth_failed_at is not None and verdict.mode != "P_plus_blowup":
        verdict = BlowupVerdict(
            detected=True,
            t_detect=depth_failed_at,
            t_blowup_extrapolated=depth_failed_at,
            mode="depth_vanishing",
            slope_fit=float("nan"),
        )

    payload = {"schema": SCHEMA_VERSION, "checks": checks_all}
    payload.update(dataclasses.asdict(verdict))
    with open(run_dir / "verdict.json", "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")

    record = riemann.RunRecord(
        grid, params, np.array(times), np.array(etas), np.array(us)
    )
    return RunResult(config, record, ledger_rows, verdict, run_dir, checks_all)


def _read_ledger(path: Path) -> dict[str, np.ndarray]:
    with open(path, "r", encoding="utf-8") as f:
        header = f.readline().strip().split(",")
        data = np.loadtxt(f, delimiter=",", ndmin=2)
    if data.size == 0:
        data = np.zeros((0, len(header)))
    return {name: data[:, j] for j, name in enumerate(header)}


# ---------------------------------------------------------------------------
# checkpointing


def write_checkpoint(path: Path, config: RunConfig, loop: _LoopState) -> None:
    cfg_bytes = json.dumps(config.to_dict(), sort_keys=True).encode("utf-8")
    params, grid = config.params, config.grid
    head = CHECKPOINT_MAGIC
    head += struct.pack("<I", CHECKPOINT_VERSION)
    head += struct.pack(
        "<QdddddB",
        grid.n_points,
        grid.length,
        params.g,
        params.epsilon,
        params.alpha,
        params.h_star,
        1 if params.classical_branch else 0,
    )
    head += struct.pack(
        "<QQdddd",
        loop.step,
        loop.snap_count,
        loop.state.time,
        loop.sup_pp,
        loop.sup_pm,
        loop.E_tilde0,
    )
    head += struct.pack("<I", len(cfg_bytes)) + cfg_bytes
    body = (
        np.ascontiguousarray(loop.state.eta, dtype="<f8").tobytes()
        + np.ascontiguousarray(loop.state.u, dtype="<f8").tobytes()
    )
    blob = head + body
    blob += struct.pack("<I", zlib.crc32(blob) & 0xFFFFFFFF)
    with open(path, "wb") as f:
        f.write(blob)


def read_checkpoint(path: Path) -> tuple[RunConfig, _LoopState]:
    blob = Path(path).read_bytes()
    if len(blob) < 16 or blob[:8] != CHECKPOINT_MAGIC:
        raise CorruptCheckpoint(f"{path}: bad magic")
    (stored_crc,) = struct.unpack("<I", blob[-4:])
    if zlib.crc32(blob[:-4]) & 0xFFFFFFFF != stored_crc:
        raise CorruptCheckpoint(f"{path}: checksum mismatch")
    off = 8
    (version,) = struct.unpack_from("<I", blob, off)
    off += 4
    if version != CHECKPOINT_VERSION:
        raise VersionOrShapeMismatch(f"checkpoint version {version} unsupported")
    n, length, g, eps, alpha, h_star, classical = struct.unpack_from("<QdddddB", blob, off)
    off += struct.calcsize("<QdddddB")
    step, snap_count, time, sup_pp, sup_pm, E_tilde0 = struct.unpack_from(
        "<QQdddd", blob, off
    )
    off += struct.calcsize("<QQdddd")
    (cfg_len,) = struct.unpack_from("<I", blob, off)
    off += 4
    config = config_from_dict(json.loads(blob[off : off + cfg_len].decode("utf-8")))
    off += cfg_len
    if config.grid.n_points != n:
        raise VersionOrShapeMismatch("checkpoint grid size disagrees with its config")
    arr = np.frombuffer(blob, dtype="<f8", count=2 * n, offset=off)
    if len(blob) != off + 16 * n + 4:
        raise CorruptCheckpoint(f"{path}: truncated or padded payload")
    eta = arr[:n].astype(float)
    u = arr[n:].astype(float)
    loop = _LoopState(State(eta, u, time), int(step), int(snap_count),
                      sup_pp, sup_pm, E_tilde0)
    return config, loop


def resume(path: Path, expected: RunConfig | None = None) -> RunResult:
    config, loop = read_checkpoint(path)
    if expected is not None and expected.grid.n_points != config.grid.n_points:
        raise VersionOrShapeMismatch(
            "resume requested with n_points %d but checkpoint has %d"
            % (expected.grid.n_points, config.grid.n_points)
        )
    return run(config, resume_loop=loop)


# ---------------------------------------------------------------------------
# post-processing


def load_run_record(run_dir: str | Path) -> riemann.RunRecord:
    """Rebuild an in-memory record from the snapshot files of a run dir."""
    run_dir = Path(run_dir)
    config = load_config(run_dir / "config.json")
    ledger = _read_ledger(run_dir / "ledger.csv")
    times, etas, us = [], [], []
    for i in range(len(ledger["t"])):
        path = _snapshot_path(run_dir, i)
        if not path.exists():
            continue
        data = np.loadtxt(path, delimiter=",", skiprows=1)
        times.append(ledger["t"][i])
        etas.append(data[:, 1])
        us.append(data[:, 2])
    if not times:
        raise RsvError(f"no snapshot files under {run_dir}")
    return riemann.RunRecord(
        config.grid, config.params, np.array(times), np.array(etas), np.array(us)
    )


def fit_run_dir(run_dir: str | Path, t_fit: float | None = None) -> profile_fit.ProfileFit:
    run_dir = Path(run_dir)
    with open(run_dir / "verdict.json", "r", encoding="utf-8") as f:
        verdict = json.load(f)
    if t_fit is None:
        t_blow = float(verdict.get("t_blowup_extrapolated", float("nan")))
        if not (verdict.get("mode") == "P_plus_blowup" and math.isfinite(t_blow)):
            raise NoBlowupDetected(f"{run_dir}: no extrapolated blow-up time to fit at")
        t_fit = 0.97 * t_blow
    record = load_run_record(run_dir)
    fit = profile_fit.fit_exponent(record, t_fit)
    payload = {"schema": SCHEMA_VERSION}
    payload.update(dataclasses.asdict(fit))
    payload["window"] = list(payload["window"])
    with open(run_dir / "profile.json", "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")
    return fit


# ---------------------------------------------------------------------------
# sweeps

SWEEP_AXES = ("delta", "epsilon", "n_points", "cfl_number")


def _apply_axis(base: dict, axis: str, value: float) -> dict:
    cfg = json.loads(json.dumps(base))
    if axis == "delta":
        if cfg["initial"].get("kind") != "simple_wave":
            raise ValueError("delta axis requires simple_wave initial data")
        cfg["initial"]["delta"] = value
    elif axis == "epsilon":
        cfg["params"]["epsilon"] = value
        if value == 0:
            cfg["params"]["classical_branch"] = True
    elif axis == "n_points":
        cfg["grid"]["n_points"] = int(value)
    elif axis == "cfl_number":
        cfg["cfl_number"] = value
    else:
        raise ValueError(f"unknown sweep axis {axis!r}")
    tag = ("%g" % value).replace(".", "p").replace("-", "m")
    cfg["output_dir"] = str(Path(cfg["output_dir"]) / f"{axis}_{tag}")
    return cfg


def _sweep_worker(cfg_dict: dict) -> dict:
    axis_value = cfg_dict.pop("_axis_value")
    row = {
        "value": axis_value,
        "status": "ok",
        "t_blowup_extrapolated": float("nan"),
        "slope_fit": float("nan"),
        "exponent": float("nan"),
        "max_energy_drift": float("nan"),
    }
    try:
        result = run(config_from_dict(cfg_dict))
        row["t_blowup_extrapolated"] = result.verdict.t_blowup_extrapolated
        row["slope_fit"] = result.verdict.slope_fit
        row["max_energy_drift"] = max(
            r["conservation_residual"] for r in result.ledger
        )
        if result.verdict.mode == "P_plus_blowup":
            try:
                row["exponent"] = fit_run_dir(result.run_dir).exponent
            except RsvError as exc:
                row["status"] = f"fit_failed: {exc}"
    except (RsvError, ValueError) as exc:
        row["status"] = f"error: {exc}"
    return row


def sweep(base: RunConfig, axis: str, values: list[float]) -> list[dict]:
    if axis not in SWEEP_AXES:
        raise ValueError(f"axis must be one of {SWEEP_AXES}")
    base_dict = base.to_dict()
    jobs = []
    for v in values:
        cfg = _apply_axis(base_dict, axis, v)
        cfg["_axis_value"] = v
        jobs.append(cfg)
    env_cap = os.environ.get("RSV_THREADS")
    workers = min(
        len(jobs),
        int(env_cap) if env_cap else (os.cpu_count() or 1),
    )
    if workers <= 1:
        rows = [_sweep_worker(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_worker, jobs))
    out_dir = Path(base.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    cols = ["value", "status", "t_blowup_extrapolated", "slope_fit", "exponent",
            "max_energy_drift"]
    with open(out_dir / "summary.csv", "w", encoding="utf-8", newline="\n") as f:
        f.write(",".join(["axis"] + cols) + "\n")
        for row in rows:
            cells = [axis, _fmt(row["value"]), row["status"],
                     _fmt(row["t_blowup_extrapolated"]), _fmt(row["slope_fit"]),
                     _fmt(row["exponent"]), _fmt(row["max_energy_drift"])]
            f.write(",".join(cells) + "\n")
    return rows


# ---------------------------------------------------------------------------
# command line


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="rsv",
        description="Numerical laboratory for the regularized Saint-Venant system",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a configured simulation")
    p_run.add_argument("-c", "--config", help="JSON config file")
    p_run.add_argument("--resume", help="resume from a checkpoint file")
    p_run.add_argument(
        "--checkpoint-at",
        type=float,
        default=None,
        help="write a checkpoint and stop at the first snapshot past this time",
    )

    p_sweep = sub.add_parser("sweep", help="run a parameter sweep")
    p_sweep.add_argument("-c", "--config", required=True)
    p_sweep.add_argument("--axis", required=True, choices=SWEEP_AXES)
    p_sweep.add_argument("--values", required=True, help="comma-separated values")

    p_fit = sub.add_parser("fit", help="fit the blow-up profile of a finished run")
    p_fit.add_argument("--run-dir", required=True)
    p_fit.add_argument("--t-fit", type=float, default=None)

    p_const = sub.add_parser("constants", help="print the explicit constants")
    p_const.add_argument("-g", type=float, default=1.0)
    p_const.add_argument("-e", "--epsilon", type=float, default=1.0)
    p_const.add_argument("--h-star", type=float, default=1.0)
    p_const.add_argument("--alpha", type=float, default=1.0)

    p_cert = sub.add_parser("certify", help="check the certified blow-up hypotheses")
    p_cert.add_argument("-c", "--config", required=True)

    args = parser.parse_args(argv)

    try:
        if args.command == "run":
            if args.resume:
                result = resume(Path(args.resume))
            elif args.config:
                result = run(load_config(args.config), checkpoint_at=args.checkpoint_at)
            else:
                parser.error("run requires --config or --resume")
            v = result.verdict
            print(
                f"run {result.run_dir}: mode={v.mode} detected={v.detected} "
                f"t_detect={v.t_detect:.6g} slope_fit={v.slope_fit:.6g}"
            )
        elif args.command == "sweep":
            base = load_config(args.config)
            values = [float(s) for s in args.values.split(",") if s]
            rows = sweep(base, args.axis, values)
            for row in rows:
                print(
                    f"{args.axis}={row['value']:g}: {row['status']} "
                    f"t_blowup={row['t_blowup_extrapolated']:.6g} "
                    f"slope={row['slope_fit']:.6g} exponent={row['exponent']:.6g} "
                    f"drift={row['max_energy_drift']:.3g}"
                )
        elif args.command == "fit":
            fit = fit_run_dir(args.run_dir, args.t_fit)
            print(
                f"profile fit: exponent={fit.exponent:.6g} r2={fit.r_squared:.6g} "
                f"x0={fit.x0:.6g} points={fit.n_points}"
            )
        elif args.command == "constants":
            params = Params(
                g=args.g, epsilon=args.epsilon, alpha=args.alpha, h_star=args.h_star
            )
            ledger = criteria.constants_ledger(params)
            print(json.dumps(dataclasses.asdict(ledger), indent=2, sort_keys=True))
        elif args.command == "certify":
            config = load_config(args.config)
            state0 = build_initial_state(config)
            report = criteria.certify_hypotheses(state0, config.params, config.grid)
            print(json.dumps(dataclasses.asdict(report), indent=2, sort_keys=True))
    except (RsvError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
