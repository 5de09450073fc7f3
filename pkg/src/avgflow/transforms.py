"""Time reparameterizations and trajectory averaging.

The quadratic time scale turns a first-order flow into an accelerated
one; averaging against the induced probability measure then produces the
trajectory of an inertial system.  Both directions are implemented on
recorded trajectories: pointwise rescaling, the averaging ODE, and the
explicit variation-of-constants quadrature.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .dynamics import Trajectory

Array = np.ndarray

_trapezoid = getattr(np, "trapezoid", np.trapz)


@dataclass
class TimeScale:
    """Strictly increasing reparameterization t = tau(s) with its inverse."""

    tau: Callable[[float], float]
    tau_dot: Callable[[float], float]
    inverse: Callable[[float], float]


def quadratic_scale(alpha: float, offset_sign: int) -> TimeScale:
    """Quadratic time scale t = s^2 / (2 (alpha + offset_sign)).

    ``offset_sign`` -1 belongs to the averaging route (denominator
    2(alpha-1)); +1 belongs to the Hessian-damped route (2(alpha+1)).
    """
    if offset_sign not in (-1, 1):
        raise ValueError(f"offset_sign must be -1 or +1, got {offset_sign}")
    if alpha <= 1.0:
        raise ValueError(f"alpha must exceed 1, got {alpha}")
    d = alpha + offset_sign
    return TimeScale(
        tau=lambda s: s * s / (2.0 * d),
        tau_dot=lambda s: s / d,
        inverse=lambda t: float(np.sqrt(2.0 * d * t)),
    )


def rescale_trajectory(traj: Trajectory, scale: TimeScale, s_grid: Array) -> Trajectory:
    """Evaluate y(s) = z(tau(s)) on s_grid by linear interpolation.

    Every tau(s) must land inside the stored time range; derived channels
    are resampled the same way.
    """
    s_grid = np.asarray(s_grid, dtype=float)
    if s_grid.ndim != 1 or s_grid.size == 0:
        raise ValueError("s_grid must be a nonempty 1-d array")
    if np.any(np.diff(s_grid) <= 0):
        raise ValueError("s_grid must be strictly increasing")
    t = traj.times
    mapped = np.array([scale.tau(s) for s in s_grid])
    tol = 1e-9 * max(1.0, abs(float(t[-1])))
    if mapped[0] < t[0] - tol or mapped[-1] > t[-1] + tol:
        raise ValueError(
            f"rescaled times [{mapped[0]:.6g}, {mapped[-1]:.6g}] escape the "
            f"stored range [{t[0]:.6g}, {t[-1]:.6g}]")
    states = np.column_stack(
        [np.interp(mapped, t, traj.states[:, j]) for j in range(traj.states.shape[1])])
    derived = {name: np.interp(mapped, t, vals) for name, vals in traj.derived.items()}
    return Trajectory(
        times=s_grid,
        states=states,
        derived=derived,
        state_names=list(traj.state_names),
        kind=f"{traj.kind}+rescaled" if traj.kind else "rescaled",
        params={**traj.params, "scale": "quadratic"},
    )


@dataclass
class AveragingMeasure:
    """Probability measure behind the averaging step, anchored at s0.

    At time s it is the sum of an atom at s0 with weight (s0/s)^(alpha-1)
    and the density (alpha-1) u^(alpha-2) / s^(alpha-1) on [s0, s].
    """

    alpha: float
    s0: float

    def __post_init__(self):
        if self.alpha <= 1.0:
            raise ValueError(f"alpha must exceed 1, got {self.alpha}")
        if self.s0 <= 0.0:
            raise ValueError(f"s0 must be positive, got {self.s0}")

    def atom_weight(self, s: float) -> float:
        if s < self.s0:
            raise ValueError(f"s={s} precedes the anchor s0={self.s0}")
        return (self.s0 / s) ** (self.alpha - 1.0)

    def density(self, u, s: float):
        u = np.asarray(u, dtype=float)
        if s < self.s0:
            raise ValueError(f"s={s} precedes the anchor s0={self.s0}")
        vals = (self.alpha - 1.0) * u ** (self.alpha - 2.0) / s ** (self.alpha - 1.0)
        return np.where((u >= self.s0) & (u <= s), vals, 0.0)

    def total_mass(self, s: float) -> float:
        """Atom weight plus the exact density integral; equals 1 analytically."""
        return self.atom_weight(s) + (1.0 - (self.s0 / s) ** (self.alpha - 1.0))

    def grid_weights(self, u_grid: Array) -> Array:
        """Discrete weights on u_grid: trapezoid rule for the density part,
        with the atom folded into the first node (u_grid[0] must be s0)."""
        u_grid = np.asarray(u_grid, dtype=float)
        if abs(u_grid[0] - self.s0) > 1e-9 * max(1.0, self.s0):
            raise ValueError("u_grid must start at the anchor s0")
        if np.any(np.diff(u_grid) <= 0):
            raise ValueError("u_grid must be strictly increasing")
        s = float(u_grid[-1])
        dens = self.density(u_grid, s)
        w = np.zeros_like(u_grid)
        du = np.diff(u_grid)
        w[:-1] += 0.5 * du * dens[:-1]
        w[1:] += 0.5 * du * dens[1:]
        w[0] += self.atom_weight(s)
        return w


def perturbation_term(alpha: float, s0: float, x1: Array, s: float) -> Array:
    """Initial-velocity correction xi(s) = -(s0^alpha / ((alpha-1) s^(alpha-1))) x1."""
    if alpha <= 1.0:
        raise ValueError(f"alpha must exceed 1, got {alpha}")
    return -(s0 ** alpha / ((alpha - 1.0) * s ** (alpha - 1.0))) * np.asarray(x1, dtype=float)


def averaging_ode(y_traj: Trajectory, alpha: float, x0: Array) -> Trajectory:
    """Integrate x' = -((alpha-1)/s)(x - y(s)) along the stored y grid.

    One RK4 step per grid interval, with y linearly interpolated at the
    midpoints.  Returns the x trajectory on the same grid.
    """
    if alpha <= 1.0:
        raise ValueError(f"alpha must exceed 1, got {alpha}")
    t = y_traj.times
    if t[0] <= 0.0:
        raise ValueError("averaging requires positive start time")
    x = np.asarray(x0, dtype=float).copy()
    if x.shape != (y_traj.states.shape[1],):
        raise ValueError(f"x0 has shape {x.shape}, expected ({y_traj.states.shape[1]},)")
    out = [x.copy()]
    for i in range(len(t) - 1):
        s_a, s_b = float(t[i]), float(t[i + 1])
        h = s_b - s_a
        ya, yb = y_traj.states[i], y_traj.states[i + 1]
        ym = 0.5 * (ya + yb)
        k1 = -((alpha - 1.0) / s_a) * (x - ya)
        k2 = -((alpha - 1.0) / (s_a + 0.5 * h)) * ((x + 0.5 * h * k1) - ym)
        k3 = -((alpha - 1.0) / (s_a + 0.5 * h)) * ((x + 0.5 * h * k2) - ym)
        k4 = -((alpha - 1.0) / s_b) * ((x + h * k3) - yb)
        x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        out.append(x.copy())
    return Trajectory(
        times=t.copy(),
        states=np.asarray(out),
        derived={},
        state_names=[f"x{i}" for i in range(x.size)],
        kind="averaged",
        params={"alpha": alpha, "source": y_traj.kind},
    )


def averaging_quadrature(y_traj: Trajectory, alpha: float, x0: Optional[Array],
                         s: float, x1: Optional[Array] = None) -> Array:
    """Averaged point by the variation-of-constants formula.

    x(s) = (s0/s)^(alpha-1) x0
         + ((alpha-1)/s^(alpha-1)) * integral_{s0}^{s} u^(alpha-2) y(u) du,
    with the integral taken by the trapezoid rule on the stored grid (the
    weight u^(alpha-2) is evaluated exactly at the nodes).  This solves
    the averaging ODE from x(s0) = x0 for any stored y.  When ``x0`` is
    None it is reconstructed from the initial velocity ``x1`` through
    y(s0) = x0 + (s0/(alpha-1)) x1, which turns the formula into the
    atom + density + perturbation decomposition of the averaging measure.
    """
    if alpha <= 1.0:
        raise ValueError(f"alpha must exceed 1, got {alpha}")
    t = y_traj.times
    s0 = float(t[0])
    if s0 <= 0.0:
        raise ValueError("averaging requires positive start time")
    if s < s0 - 1e-12 or s > t[-1] + 1e-9 * max(1.0, abs(float(t[-1]))):
        raise ValueError(f"s={s} outside stored range [{s0}, {t[-1]}]")
    if x0 is None:
        if x1 is None:
            raise ValueError("provide x0, or x1 to reconstruct it")
        x0 = y_traj.states[0] - (s0 / (alpha - 1.0)) * np.asarray(x1, dtype=float)
    x0 = np.asarray(x0, dtype=float)

    mask = t <= s
    u = t[mask]
    y = y_traj.states[mask]
    if u[-1] < s - 1e-12 * max(1.0, s):
        y_end = np.array([np.interp(s, t, y_traj.states[:, j])
                          for j in range(y_traj.states.shape[1])])
        u = np.append(u, s)
        y = np.vstack([y, y_end])
    integrand = u[:, None] ** (alpha - 2.0) * y
    integral = _trapezoid(integrand, u, axis=0)
    return (s0 / s) ** (alpha - 1.0) * x0 + (alpha - 1.0) / s ** (alpha - 1.0) * integral


def discrete_weighted_average(points: Array, weights: Array) -> Array:
    """Convex combination sum(w_i p_i) / sum(w_i) of stacked row points."""
    points = np.asarray(points, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if points.ndim != 2:
        raise ValueError("points must be stacked as rows")
    if weights.shape != (points.shape[0],):
        raise ValueError(f"weights shape {weights.shape} does not match "
                         f"{points.shape[0]} points")
    if np.any(weights < 0):
        raise ValueError("weights must be nonnegative")
    total = float(weights.sum())
    if total <= 0.0:
        raise ValueError("weights must not all be zero")
    return (weights[:, None] * points).sum(axis=0) / total
