"""Riemann invariants, characteristic flow maps, and Riccati diagnostics.

All invariant quantities are formed from the physical (unscaled) velocity
alpha*u, so the characteristic and Riccati relations hold verbatim at every
amplitude scale; at alpha = 1 they coincide with the scaled fields.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import elliptic
from .errors import NonPositiveDepth, TraceLeftDomain
from .statespace import Grid, Params, State, derivative, sample

__all__ = [
    "InvariantFields",
    "RunRecord",
    "CharTrace",
    "invariants",
    "trace_characteristic",
    "riccati_residual",
    "concentration_invariant",
    "sup_tracker",
]


@dataclass(frozen=True)
class InvariantFields:
    R_plus: np.ndarray
    R_minus: np.ndarray
    lambda_plus: np.ndarray
    lambda_minus: np.ndarray
    P_plus: np.ndarray
    P_minus: np.ndarray


def invariants(state: State, params: Params, grid: Grid) -> InvariantFields:
    """R+- = v +- 2*sqrt(gh), lambda+- = v +- sqrt(gh), P+- = v_x +- sqrt(g/h) h_x."""
    h = state.depth(params)
    if np.min(h) <= 0:
        raise NonPositiveDepth("invariants undefined at vanishing depth", state=state)
    c = np.sqrt(params.g * h)
    v = params.alpha * state.u
    v_x = params.alpha * derivative(state.u, grid)
    h_x = params.alpha * derivative(state.eta, grid)
    root = np.sqrt(params.g / h) * h_x
    return InvariantFields(
        R_plus=v + 2.0 * c,
        R_minus=v - 2.0 * c,
        lambda_plus=v + c,
        lambda_minus=v - c,
        P_plus=v_x + root,
        P_minus=v_x - root,
    )


@dataclass(frozen=True)
class RunRecord:
    """Snapshots of a run, dense enough in time to trace characteristics."""

    grid: Grid
    params: Params
    times: np.ndarray        # (m,)
    etas: np.ndarray         # (m, n)
    us: np.ndarray           # (m, n)

    def __len__(self) -> int:
        return len(self.times)

    def state_at(self, k: int) -> State:
        return State(self.etas[k], self.us[k], float(self.times[k]))

    def invariants_at(self, k: int) -> InvariantFields:
        return invariants(self.state_at(k), self.params, self.grid)


@dataclass(frozen=True)
class CharTrace:
    family: str              # "plus" or "minus"
    xi0: float
    times: np.ndarray
    positions: np.ndarray    # unwrapped X(t)
    P_along: np.ndarray      # own-family derivative invariant along the curve
    P_other: np.ndarray      # the other family's, interpolated at the same points
    stretch: np.ndarray      # dX/dxi, integrated in log form
    Q_along: np.ndarray


def _snapshot_fields(record: RunRecord, k: int, family: str, with_Q: bool):
    inv = record.invariants_at(k)
    if family == "plus":
        lam, P_own, P_oth = inv.lambda_plus, inv.P_plus, inv.P_minus
        lam_x = 0.25 * (3.0 * inv.P_plus + inv.P_minus)
    else:
        lam, P_own, P_oth = inv.lambda_minus, inv.P_minus, inv.P_plus
        lam_x = 0.25 * (inv.P_plus + 3.0 * inv.P_minus)
    if with_Q and record.params.epsilon > 0:
        Q = elliptic.riccati_Q(record.state_at(k), record.params, record.grid)
    else:
        Q = np.zeros(record.grid.n_points)
    return lam, lam_x, P_own, P_oth, Q


def trace_characteristic(
    record: RunRecord,
    family: str,
    xi0: float,
    substeps: int = 4,
    with_Q: bool = True,
) -> CharTrace:
    """Integrate dX/dt = lambda(X, t) from the launch point through the run.

    Uses the same RK4 as the field solver; lambda is sampled cubically in x
    and linearly in t between snapshots.  The stretch dX/dxi is integrated in
    log form, d(log s)/dt = lambda_x(X, t), which keeps it positive exactly.
    """
    if family not in ("plus", "minus"):
        raise ValueError(f"unknown characteristic family {family!r}")
    m = len(record)
    grid, L = record.grid, record.grid.length
    X = float(xi0)
    logs = 0.0
    positions = np.empty(m)
    P_own_t = np.empty(m)
    P_oth_t = np.empty(m)
    stretch = np.empty(m)
    Q_t = np.empty(m)

    fields_k = _snapshot_fields(record, 0, family, with_Q)
    for k in range(m):
        lam0, lamx0, P0, Po0, Q0 = fields_k
        positions[k] = X
        stretch[k] = np.exp(logs)
        P_own_t[k] = sample(P0, X, grid)
        P_oth_t[k] = sample(Po0, X, grid)
        Q_t[k] = sample(Q0, X, grid)
        if abs(X - xi0) > 0.5 * L:
            raise TraceLeftDomain(
                f"trace from xi0 = {xi0:.6g} wrapped beyond L/2 at t = {record.times[k]:.6g}"
            )
        if k == m - 1:
            break
        fields_k1 = _snapshot_fields(record, k + 1, family, with_Q)
        lam1, lamx1 = fields_k1[0], fields_k1[1]
        t0, t1 = record.times[k], record.times[k + 1]
        dt = (t1 - t0) / substeps
        for j in range(substeps):
            ta = t0 + j * dt

            def lam_at(x, t):
                w = (t - t0) / (t1 - t0)
                return (1.0 - w) * sample(lam0, x, grid) + w * sample(lam1, x, grid)

            def lamx_at(x, t):
                w = (t - t0) / (t1 - t0)
                return (1.0 - w) * sample(lamx0, x, grid) + w * sample(lamx1, x, grid)

            k1x = lam_at(X, ta)
            k1s = lamx_at(X, ta)
            k2x = lam_at(X + 0.5 * dt * k1x, ta + 0.5 * dt)
            k2s = lamx_at(X + 0.5 * dt * k1x, ta + 0.5 * dt)
            k3x = lam_at(X + 0.5 * dt * k2x, ta + 0.5 * dt)
            k3s = lamx_at(X + 0.5 * dt * k2x, ta + 0.5 * dt)
            k4x = lam_at(X + dt * k3x, ta + dt)
            k4s = lamx_at(X + dt * k3x, ta + dt)
            X += (dt / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
            logs += (dt / 6.0) * (k1s + 2.0 * k2s + 2.0 * k3s + k4s)
        fields_k = fields_k1

    return CharTrace(family, float(xi0), record.times.copy(), positions, P_own_t, P_oth_t, stretch, Q_t)


def riccati_residual(trace: CharTrace, record: RunRecord | None = None) -> np.ndarray:
    """|d P_along/dt - quadratic RHS| per interior sample of the trace."""
    t, P, Po, Q = trace.times, trace.P_along, trace.P_other, trace.Q_along
    dPdt = np.gradient(P, t)
    if trace.family == "plus":
        rhs_vals = -0.375 * P**2 + P * Po + 0.375 * Po**2 - Q
    else:
        rhs_vals = 0.375 * Po**2 + Po * P - 0.375 * P**2 - Q
    return np.abs(dPdt - rhs_vals)


def concentration_invariant(trace: CharTrace) -> np.ndarray:
    """Time series of stretch * P_+^2 along a plus-family trace."""
    if trace.family != "plus":
        raise ValueError("concentration identity applies to plus-family traces")
    return trace.stretch * trace.P_along**2


def concentration_drift_rhs(trace: CharTrace) -> np.ndarray:
    """Integrand stretch * P_+ (3 P_- lambda_x - 2Q) whose time integral is the drift."""
    lam_x = 0.25 * (3.0 * trace.P_along + trace.P_other)
    return trace.stretch * trace.P_along * (3.0 * trace.P_other * lam_x - 2.0 * trace.Q_along)


def sup_tracker(record: RunRecord) -> np.ndarray:
    """Running supremum M(t) = sup_{s<=t} max P+ + sup_{s<=t} max|P-|."""
    m = len(record)
    max_pp = np.empty(m)
    max_pm = np.empty(m)
    for k in range(m):
        inv = record.invariants_at(k)
        max_pp[k] = np.max(inv.P_plus)
        max_pm[k] = np.max(np.abs(inv.P_minus))
    return np.maximum.accumulate(max_pp) + np.maximum.accumulate(max_pm)
