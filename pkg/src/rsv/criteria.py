"""Explicit constants, energy thresholds, certified-blow-up hypotheses,
initial-data generation, and runtime blow-up detection."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import dynamics, riemann
from .errors import AboveThreshold, SupportTooWide
from .statespace import Grid, Params, State

__all__ = [
    "ConstantsLedger",
    "DepthWindow",
    "BlowupVerdict",
    "DetectionConfig",
    "CertificationReport",
    "prop21_threshold",
    "step0_threshold",
    "depth_floor",
    "constants_ledger",
    "generate_blowup_data",
    "generate_two_bump",
    "max_certifiable_delta",
    "certify_hypotheses",
    "detect_blowup",
]

_MARGIN = 1e-9  # relative margin used to satisfy strict inequalities


def prop21_threshold(params: Params) -> float:
    """Energy bound below which the depth stays uniformly positive."""
    return params.g * math.sqrt(params.epsilon) * params.h_star**3 / 3.0


def step0_threshold(params: Params) -> float:
    """Smaller energy bound pinning the depth to [h_star/2, 3 h_star/2]."""
    return params.g * math.sqrt(params.epsilon) * params.h_star**3 / 6.0


@dataclass(frozen=True)
class DepthWindow:
    floor: float     # h_E
    ceiling: float   # 2 h_star - h_E


def depth_floor(E_star: float, params: Params) -> DepthWindow:
    """Unique root h_E of E = (g sqrt(eps)/3)(h - h*)^2 (2h + h*) on (0, h*].

    Solved by bisection to 1e-12; also returns the matching depth ceiling.
    """
    if E_star < 0:
        raise ValueError("E_star must be nonnegative")
    threshold = prop21_threshold(params)
    if E_star >= threshold:
        raise AboveThreshold(f"E_star = {E_star:.6g} >= threshold {threshold:.6g}")
    hs = params.h_star
    if E_star == 0.0:
        return DepthWindow(hs, hs)
    coef = params.g * math.sqrt(params.epsilon) / 3.0

    def cubic(h):
        return coef * (h - hs) ** 2 * (2.0 * h + hs) - E_star

    lo, hi = 0.0, hs  # cubic(0) = threshold - E > 0, cubic(h*) = -E < 0; decreasing
    while hi - lo > 1e-12 * hs:
        mid = 0.5 * (lo + hi)
        if cubic(mid) > 0:
            lo = mid
        else:
            hi = mid
    h_E = 0.5 * (lo + hi)
    return DepthWindow(h_E, 2.0 * hs - h_E)


@dataclass(frozen=True)
class ConstantsLedger:
    C1: float
    C2: float
    C3: float
    C4: float
    kappa0: float
    T_star: float
    T_star_star: float
    E_threshold_prop21: float
    E_threshold_step0: float


def constants_ledger(params: Params) -> ConstantsLedger:
    """All explicit constants of the certified blow-up argument.

    The printed inequalities are satisfied strictly with a 1e-9 relative
    margin; ties are broken by taking the minimum of the applicable bounds.
    These constants certify sufficiency only and are far from sharp (at unit
    parameters kappa0 is of order -4e7).
    """
    g, eps, hs = params.g, params.epsilon, params.h_star
    C1 = 6.0 * g / math.sqrt(eps)
    C2 = 72.0 * C1 / (math.sqrt(eps) * hs)
    C3 = 16.0 * C1 / math.sqrt(2.0 * g * hs)
    quad = 3.0 * C3**2 + C2
    C4 = math.sqrt(2.0 * quad)
    bound_a = 0.5 / (3.0 * C3)
    bound_b = 0.5 / (5.0 * (C3**3 + C2**2))
    bound_c = C3 * math.sqrt(2.0 * g * hs) / (16.0 * (6.0 * C3 * C1 + math.sqrt(g * hs)))
    T_ss = min(bound_a, bound_b, bound_c) * (1.0 - _MARGIN)
    T_s = min(T_ss, (C3 / (16.0 * quad)) * (1.0 - _MARGIN))
    kappa0 = -max(math.sqrt(8.0 * quad), 8.0 / T_s) * (1.0 + _MARGIN)
    return ConstantsLedger(
        C1=C1,
        C2=C2,
        C3=C3,
        C4=C4,
        kappa0=kappa0,
        T_star=T_s,
        T_star_star=T_ss,
        E_threshold_prop21=prop21_threshold(params),
        E_threshold_step0=step0_threshold(params),
    )


def _bump(s: np.ndarray) -> np.ndarray:
    """C-infinity bump exp(-1/(1-s^2)) on |s| < 1, zero outside."""
    out = np.zeros_like(s)
    inside = np.abs(s) < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - s[inside] ** 2))
    return out


def generate_blowup_data(delta: float, params: Params, grid: Grid) -> State:
    """Compactly supported simple-wave data with P- identically zero.

    Depth bump of amplitude delta^2 and width delta^3 centered at L/2, with
    the velocity slaved so the minus Riemann invariant is constant.  As delta
    decreases the relative energy shrinks (roughly linearly) while the most
    negative P+ grows like 1/delta.
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    a, w = delta**2, delta**3
    if 2.0 * w > grid.length / 4.0:
        raise SupportTooWide(
            f"support width {2 * w:.4g} exceeds a quarter period {grid.length / 4:.4g}"
        )
    h = params.h_star + a * _bump((grid.x - grid.length / 2.0) / w)
    u = (2.0 / params.alpha) * (np.sqrt(params.g * h) - math.sqrt(params.g * params.h_star))
    eta = (h - params.h_star) / params.alpha
    return State(eta, u, 0.0)


def generate_two_bump(
    deltas: tuple[float, float],
    centers: tuple[float, float],
    params: Params,
    grid: Grid,
) -> State:
    """Generic two-bump depth perturbation with zero initial velocity.

    Unlike the simple-wave generator this launches waves in both families;
    provided as an exploratory fixture, without verified diagnostics.
    """
    h = np.full(grid.n_points, params.h_star)
    for d, c in zip(deltas, centers):
        if not d > 0:
            raise ValueError("delta must be positive")
        a, w = d**2, d**3
        if 2.0 * w > grid.length / 4.0:
            raise SupportTooWide(
                f"support width {2 * w:.4g} exceeds a quarter period"
            )
        s = (grid.x - c + grid.length / 2.0) % grid.length - grid.length / 2.0
        h = h + a * _bump(s / w)
    eta = (h - params.h_star) / params.alpha
    return State(eta, np.zeros(grid.n_points), 0.0)


def max_certifiable_delta(params: Params, grid: Grid, delta_hi: float = 2.0) -> float:
    """Largest delta whose generated data stay below the step-zero energy bound."""
    target = step0_threshold(params)

    def admissible(d):
        # data that do not fit on the grid count as exceeding the bound
        try:
            state = generate_blowup_data(d, params, grid)
        except SupportTooWide:
            return False
        return dynamics.energy_report(state, state, params, grid).E_star <= target

    lo, hi = 1e-6, delta_hi
    if admissible(hi):
        return hi
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if admissible(mid):
            lo = mid
        else:
            hi = mid
    return lo


@dataclass(frozen=True)
class CertificationReport:
    energy_ok: bool
    energy_margin: float       # threshold - E_star
    M0_ok: bool
    M0_margin: float           # C3/4 - M(0)
    kappa_ok: bool
    kappa_margin: float        # kappa0 - inf P+(0)  (> 0 means satisfied)
    certified: bool


def certify_hypotheses(
    state0: State,
    params: Params,
    grid: Grid,
    ledger: ConstantsLedger | None = None,
) -> CertificationReport:
    """Evaluate the three explicit hypotheses of the certified blow-up criterion.

    A test may pass a relaxed ledger to exercise the full certification path;
    by default the verbatim (astronomically conservative) constants are used.
    """
    if ledger is None:
        ledger = constants_ledger(params)
    E_star = dynamics.energy_report(state0, state0, params, grid).E_star
    inv = riemann.invariants(state0, params, grid)
    M0 = float(np.max(inv.P_plus) + np.max(np.abs(inv.P_minus)))
    inf_pp = float(np.min(inv.P_plus))
    energy_ok = E_star <= ledger.E_threshold_step0
    M0_ok = M0 <= ledger.C3 / 4.0
    kappa_ok = inf_pp < ledger.kappa0
    return CertificationReport(
        energy_ok=energy_ok,
        energy_margin=ledger.E_threshold_step0 - E_star,
        M0_ok=M0_ok,
        M0_margin=ledger.C3 / 4.0 - M0,
        kappa_ok=kappa_ok,
        kappa_margin=ledger.kappa0 - inf_pp,
        certified=energy_ok and M0_ok and kappa_ok,
    )


@dataclass(frozen=True)
class DetectionConfig:
    # trigger when min P+ < -factor * sqrt(g/h_star); sqrt(g/h_star) is the
    # natural inverse-time scale of the system (equal to 1 at unit parameters)
    threshold_factor: float = 1e3
    fit_fraction: float = 0.25      # fit -1/min P+ over the trailing fraction
    r2_min: float = 0.99
    depth_slack: float = 0.05


@dataclass(frozen=True)
class BlowupVerdict:
    detected: bool
    t_detect: float
    t_blowup_extrapolated: float
    mode: str                       # P_plus_blowup | depth_vanishing | horizon_reached
    slope_fit: float
    r_squared: float = float("nan")
    threshold: float = float("nan")


def _linear_fit(t: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    slope, intercept = np.polyfit(t, y, 1)
    pred = slope * t + intercept
    ss_res = float(np.sum((y - pred) ** 2))
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 0.0
    return float(slope), float(intercept), r2


def detect_blowup(
    times: np.ndarray,
    min_P_plus: np.ndarray,
    min_h: np.ndarray,
    E_star: float,
    params: Params,
    config: DetectionConfig | None = None,
) -> BlowupVerdict:
    """Classify a recorded run from its min P+ and min h time series.

    Depth below the analytical floor at small energy signals a numerical
    failure, not physics, and is reported as mode ``depth_vanishing``.
    """
    if config is None:
        config = DetectionConfig()
    times = np.asarray(times, dtype=float)
    min_P_plus = np.asarray(min_P_plus, dtype=float)
    min_h = np.asarray(min_h, dtype=float)

    if params.epsilon > 0 and E_star < prop21_threshold(params):
        floor = depth_floor(E_star, params).floor * (1.0 - config.depth_slack)
        bad = np.nonzero(min_h < floor)[0]
        if len(bad) > 0:
            k = int(bad[0])
            return BlowupVerdict(
                detected=True,
                t_detect=float(times[k]),
                t_blowup_extrapolated=float(times[k]),
                mode="depth_vanishing",
                slope_fit=float("nan"),
            )

    threshold = config.threshold_factor * math.sqrt(params.g / params.h_star)
    crossed = np.nonzero(min_P_plus < -threshold)[0]
    if len(crossed) == 0:
        return BlowupVerdict(
            detected=False,
            t_detect=float("nan"),
            t_blowup_extrapolated=float("nan"),
            mode="horizon_reached",
            slope_fit=float("nan"),
            threshold=threshold,
        )
    k = int(crossed[0])
    lo = max(0, k - max(2, int(math.ceil(config.fit_fraction * (k + 1)))))
    window = slice(lo, k + 1)
    # 1/min P+ rises linearly to zero under the reduced Riccati law; its slope
    # is 3/8 for the regularized branch and 3/4 on the classical branch
    y = 1.0 / min_P_plus[window]
    slope, intercept, r2 = _linear_fit(times[window], y)
    detected = r2 >= config.r2_min and slope > 0
    t_root = -intercept / slope if slope > 0 else float("nan")
    return BlowupVerdict(
        detected=detected,
        t_detect=float(times[k]),
        t_blowup_extrapolated=float(t_root),
        mode="P_plus_blowup" if detected else "horizon_reached",
        slope_fit=slope,
        r_squared=r2,
        threshold=threshold,
    )
