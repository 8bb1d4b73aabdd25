"""Blow-up profile analysis: local power-law exponent of the steepening
invariant, heuristic blow-up time, and the simple-wave stretch check."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import riemann
from .errors import NoBlowupDetected, NonNegativeInput, WindowTooNarrow
from .statespace import Grid, Params

__all__ = [
    "ProfileFit",
    "fit_exponent",
    "heuristic_blowup_time",
    "stretch_profile_check",
]


@dataclass(frozen=True)
class ProfileFit:
    exponent: float      # R+ ~ a_fit - b_fit |x - x0|^exponent near the focus
    slope: float         # raw log-log slope of |P+|, equals exponent - 1
    a_fit: float         # profile offset R+(x0)
    b_fit: float         # profile amplitude
    r_squared: float
    x0: float
    t_fit: float
    n_points: int
    window: tuple[float, float]   # |x - x0| extent actually used


def heuristic_blowup_time(p0_min: float) -> float:
    """Leading-order blow-up time 8 / (3 |min P+(0)|) for simple-wave data."""
    if p0_min >= 0:
        raise NonNegativeInput(f"min P+ must be negative, got {p0_min:.6g}")
    return 8.0 / (3.0 * abs(p0_min))


def fit_exponent(
    record: riemann.RunRecord,
    t_fit: float,
    inner_cells: int = 3,
    cutoff_fraction: float = 0.10,
) -> ProfileFit:
    """Fit the one-sided power law of |P+| around its most negative point.

    At the snapshot nearest ``t_fit`` the focus ``x0`` is the grid minimizer
    of P+.  Points between ``inner_cells`` grid spacings from the focus and
    the radius where |P+| has fallen to ``cutoff_fraction`` of its peak are
    fit in log-log coordinates; the profile exponent is the slope plus one.
    """
    times = record.times
    k = int(np.argmin(np.abs(times - t_fit)))
    inv = record.invariants_at(k)
    P = inv.P_plus
    grid, dx = record.grid, record.grid.dx
    i0 = int(np.argmin(P))
    if P[i0] >= 0:
        raise NoBlowupDetected("P+ has no negative minimum at the fit time")
    x0 = grid.x[i0]
    peak = abs(P[i0])
    cutoff = cutoff_fraction * peak

    # signed periodic distance from the focus
    r = (grid.x - x0 + grid.length / 2.0) % grid.length - grid.length / 2.0
    mask = np.abs(r) >= inner_cells * dx
    absP = np.abs(P)
    # walk outward on each side until |P+| first drops below the cutoff
    keep = np.zeros_like(mask)
    for side in (1, -1):
        order = np.argsort(side * r)
        sel = order[(side * r[order]) >= inner_cells * dx]
        for i in sel:
            if absP[i] < cutoff or P[i] >= 0:
                break
            keep[i] = True
    mask &= keep
    n_pts = int(np.count_nonzero(mask))
    if n_pts < 8:
        raise WindowTooNarrow(
            f"only {n_pts} usable points between {inner_cells} cells and the "
            f"{cutoff_fraction:.0%} cutoff"
        )
    lx = np.log(np.abs(r[mask]))
    ly = np.log(absP[mask])
    slope, intercept = np.polyfit(lx, ly, 1)
    pred = slope * lx + intercept
    ss_res = float(np.sum((ly - pred) ** 2))
    ss_tot = float(np.sum((ly - np.mean(ly)) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 0.0
    exponent = float(slope) + 1.0
    b_fit = math.exp(float(intercept)) / abs(exponent) if exponent != 0 else float("nan")
    return ProfileFit(
        exponent=exponent,
        slope=float(slope),
        a_fit=float(inv.R_plus[i0]),
        b_fit=b_fit,
        r_squared=r2,
        x0=float(x0),
        t_fit=float(times[k]),
        n_points=n_pts,
        window=(float(np.min(np.abs(r[mask]))), float(np.max(np.abs(r[mask])))),
    )


def stretch_profile_check(
    record: riemann.RunRecord,
    traces: list[riemann.CharTrace],
) -> float:
    """Max relative error of the simple-wave stretch law along plus traces.

    For data launched with P- = 0 the stretch of a plus characteristic is
    (1 + (3/8) t P+(xi, 0))^2 to leading order; returns the worst relative
    deviation over all supplied traces and times, skipping the collapsed
    regime where the predicted stretch is below 1e-3.
    """
    worst = 0.0
    params, grid = record.params, record.grid
    inv0 = record.invariants_at(0)
    for tr in traces:
        if tr.family != "plus":
            raise ValueError("stretch check applies to plus-family traces")
        from .statespace import sample

        p0 = float(sample(inv0.P_plus, np.array([tr.xi0]), grid)[0])
        predicted = (1.0 + 0.375 * tr.times * p0) ** 2
        valid = predicted > 1e-3
        if not np.any(valid):
            continue
        rel = np.abs(tr.stretch[valid] - predicted[valid]) / predicted[valid]
        worst = max(worst, float(np.max(rel)))
    return worst
