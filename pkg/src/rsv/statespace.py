"""Grids, fields, differentiation, interpolation and quadrature.

Everything lives on a uniform periodic mesh on [0, L).  A "field" is a plain
1-D float64 array sampled at the nodes x_i = i*dx; all operations here are
second-order accurate and periodic.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

__all__ = [
    "Grid",
    "Params",
    "State",
    "derivative",
    "second_derivative",
    "integrate",
    "cumulative_primitive",
    "sample",
]


@dataclass(frozen=True)
class Grid:
    """Uniform periodic 1-D mesh on [0, length)."""

    n_points: int
    length: float

    def __post_init__(self):
        if self.n_points < 16:
            raise ValueError(f"n_points must be >= 16, got {self.n_points}")
        if not self.length > 0:
            raise ValueError(f"length must be positive, got {self.length}")

    @property
    def dx(self) -> float:
        return self.length / self.n_points

    @property
    def x(self) -> np.ndarray:
        return np.arange(self.n_points) * self.dx


@dataclass(frozen=True)
class Params:
    """Physical and scaling constants.

    ``epsilon == 0`` is only allowed together with ``classical_branch=True``,
    in which case the momentum equation drops the nonlocal term entirely.
    """

    g: float = 1.0
    epsilon: float = 1.0
    alpha: float = 1.0
    h_star: float = 1.0
    classical_branch: bool = field(default=False)

    def __post_init__(self):
        if not self.g > 0:
            raise ValueError("g must be positive")
        if not self.h_star > 0:
            raise ValueError("h_star must be positive")
        if not 0 < self.alpha <= 1:
            raise ValueError("alpha must lie in (0, 1]")
        if self.epsilon == 0.0:
            if not self.classical_branch:
                raise ValueError("epsilon = 0 requires classical_branch=True")
        elif not 0 < self.epsilon <= 1:
            raise ValueError("epsilon must lie in (0, 1] (or 0 on the classical branch)")


@dataclass(frozen=True)
class State:
    """Surface displacement and velocity pair (eta, u) at one time."""

    eta: np.ndarray
    u: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        if self.eta.shape != self.u.shape or self.eta.ndim != 1:
            raise ValueError("eta and u must be 1-D arrays of equal length")

    def depth(self, params: Params) -> np.ndarray:
        """h = h_star + alpha*eta."""
        return params.h_star + params.alpha * self.eta

    def with_time(self, t: float) -> "State":
        return replace(self, time=t)


def _check_length(f: np.ndarray, grid: Grid):
    if f.shape != (grid.n_points,):
        raise ValueError(f"field length {f.shape} does not match grid n={grid.n_points}")


def derivative(f: np.ndarray, grid: Grid) -> np.ndarray:
    """Second-order central difference with periodic wraparound."""
    _check_length(f, grid)
    return (np.roll(f, -1) - np.roll(f, 1)) / (2.0 * grid.dx)


def second_derivative(f: np.ndarray, grid: Grid) -> np.ndarray:
    """Standard 3-point periodic Laplacian stencil."""
    _check_length(f, grid)
    return (np.roll(f, -1) - 2.0 * f + np.roll(f, 1)) / grid.dx**2


def integrate(f: np.ndarray, grid: Grid) -> float:
    """Periodic trapezoid rule (= dx * sum; spectrally accurate when smooth)."""
    _check_length(f, grid)
    return float(grid.dx * np.sum(f))


def cumulative_primitive(f: np.ndarray, grid: Grid, anchor: int = 0) -> np.ndarray:
    """Running trapezoid primitive F with F[anchor] = 0.

    F_{i+1} - F_i = dx*(f_i + f_{i+1})/2 holds for i = anchor..anchor+n-2
    (cyclically); for nonzero-mean f the relation is broken across the single
    edge that closes the period at the anchor.  The anchor therefore stands in
    for the -infinity lower limit and should sit far from the data's support.
    """
    _check_length(f, grid)
    n = grid.n_points
    rolled = np.roll(f, -anchor)
    inc = grid.dx * 0.5 * (rolled + np.roll(rolled, -1))
    F = np.empty(n)
    F[0] = 0.0
    np.cumsum(inc[:-1], out=F[1:])
    return np.roll(F, anchor)


def sample(f: np.ndarray, x, grid: Grid):
    """Cubic (4-point) periodic Lagrange interpolation at x (scalar or array)."""
    _check_length(f, grid)
    x = np.asarray(x, dtype=float)
    n = grid.n_points
    s = x / grid.dx
    j = np.floor(s).astype(int)
    t = s - j  # in [0, 1)
    # nodes j-1, j, j+1, j+2 with local coordinates -1, 0, 1, 2
    w_m1 = -t * (t - 1.0) * (t - 2.0) / 6.0
    w_0 = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0
    w_p1 = -(t + 1.0) * t * (t - 2.0) / 2.0
    w_p2 = (t + 1.0) * t * (t - 1.0) / 6.0
    out = (
        w_m1 * f[(j - 1) % n]
        + w_0 * f[j % n]
        + w_p1 * f[(j + 1) % n]
        + w_p2 * f[(j + 2) % n]
    )
    return float(out) if out.ndim == 0 else out
