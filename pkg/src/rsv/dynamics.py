"""Right-hand side, explicit RK4 stepping with CFL control, and energy diagnostics."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import elliptic
from .errors import NonPositiveDepth
from .statespace import Grid, Params, State, derivative, integrate

__all__ = ["RhsEval", "EnergyReport", "rhs", "step", "cfl_dt", "energy_report"]

DEFAULT_CFL = 0.4

# Optional forcing hook: callable (x, t) -> (f_eta, f_u), used by the
# manufactured-solution convergence tests.
Forcing = Callable[[np.ndarray, float], tuple[np.ndarray, np.ndarray]]


@dataclass(frozen=True)
class RhsEval:
    d_eta: np.ndarray
    d_u: np.ndarray


@dataclass(frozen=True)
class EnergyReport:
    E_tilde: float
    E_star: float
    density: np.ndarray
    flux: np.ndarray
    conservation_residual: float


def _depth_or_raise(state: State, params: Params) -> np.ndarray:
    h = state.depth(params)
    if np.min(h) <= 0:
        raise NonPositiveDepth(
            f"min h = {np.min(h):.3e} <= 0 at t = {state.time:.6g}", state=state
        )
    return h


def rhs(state: State, params: Params, grid: Grid, forcing: Forcing | None = None) -> RhsEval:
    """Time derivatives of (eta, u) for the scaled system.

    d_eta = -(h u)_x; d_u = -g eta_x - alpha u u_x - f(W), where f(W) is the
    order-zero nonlocal term.  On the classical branch (epsilon = 0) the
    nonlocal term is dropped exactly.
    """
    h = _depth_or_raise(state, params)
    d_eta = -derivative(h * state.u, grid)
    d_u = -params.g * derivative(state.eta, grid) - params.alpha * state.u * derivative(state.u, grid)
    if params.epsilon > 0:
        d_u -= elliptic.nonlocal_f(state, params, grid)
    if forcing is not None:
        f_eta, f_u = forcing(grid.x, state.time)
        d_eta = d_eta + f_eta
        d_u = d_u + f_u
    return RhsEval(d_eta, d_u)


def cfl_dt(state: State, params: Params, grid: Grid, cfl_number: float = DEFAULT_CFL) -> float:
    """cfl * dx / max(|alpha u| + sqrt(g h))."""
    h = _depth_or_raise(state, params)
    speed = np.max(np.abs(params.alpha * state.u) + np.sqrt(params.g * h))
    return float(cfl_number * grid.dx / speed)


def step(state: State, dt: float, params: Params, grid: Grid, forcing: Forcing | None = None) -> State:
    """Classical 4-stage Runge-Kutta step; depth is checked at every stage."""
    def at(eta, u, t):
        return State(eta, u, t)

    t0 = state.time
    k1 = rhs(state, params, grid, forcing)
    s2 = at(state.eta + 0.5 * dt * k1.d_eta, state.u + 0.5 * dt * k1.d_u, t0 + 0.5 * dt)
    k2 = rhs(s2, params, grid, forcing)
    s3 = at(state.eta + 0.5 * dt * k2.d_eta, state.u + 0.5 * dt * k2.d_u, t0 + 0.5 * dt)
    k3 = rhs(s3, params, grid, forcing)
    s4 = at(state.eta + dt * k3.d_eta, state.u + dt * k3.d_u, t0 + dt)
    k4 = rhs(s4, params, grid, forcing)
    eta = state.eta + (dt / 6.0) * (k1.d_eta + 2.0 * k2.d_eta + 2.0 * k3.d_eta + k4.d_eta)
    u = state.u + (dt / 6.0) * (k1.d_u + 2.0 * k2.d_u + 2.0 * k3.d_u + k4.d_u)
    out = State(eta, u, t0 + dt)
    _depth_or_raise(out, params)
    if not (np.all(np.isfinite(eta)) and np.all(np.isfinite(u))):
        raise FloatingPointError(f"non-finite state after step to t = {t0 + dt:.6g}")
    return out


def _energy_density(state: State, params: Params, grid: Grid) -> np.ndarray:
    h = state.depth(params)
    u_x = derivative(state.u, grid)
    eta_x = derivative(state.eta, grid)
    return (
        0.5 * h * state.u**2
        + 0.5 * params.g * state.eta**2
        + params.epsilon * (0.5 * h**3 * u_x**2 + 0.5 * params.g * h**2 * eta_x**2)
    )


def _energy_flux(state: State, params: Params, grid: Grid) -> np.ndarray:
    g, eps, alpha = params.g, params.epsilon, params.alpha
    h = _depth_or_raise(state, params)
    u = state.u
    u_x = derivative(u, grid)
    eta_x = derivative(state.eta, grid)
    flux = 0.5 * alpha * h * u**3 + g * state.eta * h * u
    if eps > 0:
        psi = 2.0 * h**3 * u_x**2 - 0.5 * g * h**2 * eta_x**2
        op = elliptic.assemble(h, eps, grid)
        s_tilde = psi + eps * h**3 * derivative(elliptic.solve(op, derivative(psi, grid)), grid)
        flux = flux + eps * (
            (0.5 * h**3 * u_x**2 + 0.5 * g * h**2 * eta_x**2 + s_tilde) * alpha * u
            + g * h**3 * eta_x * u_x
        )
    return flux


def energy_report(state: State, state_prev: State, params: Params, grid: Grid) -> EnergyReport:
    """Scaled relative energy, its pointwise density/flux, and the strong
    conservation-law residual between two accepted steps.

    Pass ``state_prev is state`` (or equal times) to skip the residual.
    """
    _depth_or_raise(state, params)
    density = _energy_density(state, params, grid)
    flux = _energy_flux(state, params, grid)
    E_tilde = integrate(density, grid)
    residual = 0.0
    if state_prev is not state and state.time != state_prev.time:
        dt = state.time - state_prev.time
        density_prev = _energy_density(state_prev, params, grid)
        flux_prev = _energy_flux(state_prev, params, grid)
        mid_flux_x = derivative(0.5 * (flux + flux_prev), grid)
        residual = float(np.max(np.abs((density - density_prev) / dt + mid_flux_x)))
    return EnergyReport(
        E_tilde=float(E_tilde),
        E_star=float(params.alpha**2 * E_tilde),
        density=density,
        flux=flux,
        conservation_residual=residual,
    )
