"""Continuous-time evolution systems and a fixed-step RK4 integrator.

Each builder returns a :class:`VectorField` whose derived channels
(value gap, gradient norms, velocity norms, ...) are evaluated at record
time during the single integration pass.  Second-order equations are
integrated as first-order systems in the stacked state.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .problems import CocoerciveOperator, ProxFriendly, SmoothProblem

Array = np.ndarray


class DivergenceError(RuntimeError):
    """State escaped (non-finite or beyond the norm guard) during integration."""

    def __init__(self, message: str, last_time: float):
        super().__init__(message)
        self.last_time = last_time


class StiffnessError(RuntimeError):
    """Inner linear solve failed to converge within its iteration budget."""


NORM_GUARD = 1e12
MAX_HALVINGS = 20


def conjugate_gradient(matvec: Callable[[Array], Array], rhs: Array,
                       rtol: float = 1e-12, max_iters: Optional[int] = None) -> Array:
    """Solve a symmetric positive definite system by conjugate gradient.

    Stops when the residual drops below ``rtol * ||rhs||``; raises
    :class:`StiffnessError` after ``10 * dim`` iterations (default cap).
    """
    n = rhs.size
    if max_iters is None:
        max_iters = 10 * n
    x = np.zeros_like(rhs)
    r = rhs.copy()
    rr = float(r @ r)
    target = rtol * np.sqrt(rr)
    if np.sqrt(rr) <= target or rr == 0.0:
        return x
    p = r.copy()
    for _ in range(max_iters):
        Ap = matvec(p)
        alpha = rr / float(p @ Ap)
        x = x + alpha * p
        r = r - alpha * Ap
        rr_new = float(r @ r)
        if np.sqrt(rr_new) <= target:
            return x
        p = r + (rr_new / rr) * p
        rr = rr_new
    raise StiffnessError(
        f"conjugate gradient stalled after {max_iters} iterations "
        f"(residual {np.sqrt(rr):.3e}, target {target:.3e})")


@dataclass
class VectorField:
    """Right-hand side u' = eval(s, u) with optional stiffness information.

    ``channels`` maps a name to a scalar observable of (s, state) recorded
    alongside the trajectory.  ``stiffness_hint(s)`` estimates the local
    Lipschitz scale of the field; the integrator halves its step while
    hint * step > 1.
    """

    dim: int
    eval: Callable[[float, Array], Array]
    stiffness_hint: Optional[Callable[[float], float]] = None
    channels: dict = field(default_factory=dict)
    state_names: Optional[list] = None
    kind: str = ""
    params: dict = field(default_factory=dict)


@dataclass
class Trajectory:
    """Recorded integration output: times, states, and derived channels."""

    times: Array
    states: Array
    derived: dict
    state_names: list
    kind: str = ""
    params: dict = field(default_factory=dict)
    step_sizes: Optional[Array] = None

    @property
    def dim(self) -> int:
        return int(self.states.shape[1])

    def state_at(self, s: float) -> Array:
        """Piecewise-linear interpolation of the state at time s."""
        t = self.times
        if s < t[0] - 1e-12 * max(1.0, abs(t[0])) or s > t[-1] + 1e-12 * max(1.0, abs(t[-1])):
            raise ValueError(f"time {s} outside stored range [{t[0]}, {t[-1]}]")
        out = np.empty(self.states.shape[1])
        for j in range(self.states.shape[1]):
            out[j] = np.interp(s, t, self.states[:, j])
        return out

    def channel(self, name: str) -> Array:
        if name not in self.derived:
            raise KeyError(f"trajectory has no channel {name!r}; "
                           f"available: {sorted(self.derived)}")
        return self.derived[name]

    def to_csv(self) -> str:
        """CSV text: header ``s,<state components...>,<channel names...>``.

        Floats are written with 17 significant digits so a round trip is
        bit-exact.
        """
        names = list(self.state_names)
        chans = sorted(self.derived)
        header = ",".join(["s"] + names + chans)
        lines = [header]
        for i in range(len(self.times)):
            row = [f"{self.times[i]:.17g}"]
            row += [f"{v:.17g}" for v in self.states[i]]
            row += [f"{self.derived[c][i]:.17g}" for c in chans]
            lines.append(",".join(row))
        return "\n".join(lines) + "\n"

    def write_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_csv())


@dataclass
class DynamicsSpec:
    """Integration request: which system, its parameters, and initial data."""

    kind: str
    alpha: float = 2.0
    lam: float = 1.0
    mu: float = 0.5
    beta0: float = 2.0
    s0: float = 1.0
    horizon: float = 20.0
    initial_position: Optional[Array] = None
    initial_velocity: Optional[Array] = None

    def __post_init__(self):
        if self.alpha <= 1.0:
            raise ValueError(f"alpha must exceed 1, got {self.alpha}")
        if self.s0 <= 0.0:
            raise ValueError(f"s0 must be positive, got {self.s0}")

    @property
    def value_rate_certified(self) -> bool:
        """Whether the x-trajectory value-rate guarantees apply (alpha > 3)."""
        return self.alpha > 3.0


def _positive_time(s: float) -> None:
    if s <= 0.0:
        raise ValueError(f"field is defined for positive times only, got s={s}")


def _gap_channel(problem: SmoothProblem, pick=None):
    """Value-gap observable; falls back to the raw value when inf f is unknown."""
    fstar = problem.min_value
    if pick is None:
        pick = lambda u: u
    if fstar is None:
        return "value", lambda s, u: problem.value(pick(u))
    return "value_gap", lambda s, u: problem.value(pick(u)) - fstar


def sd_field(problem: SmoothProblem) -> VectorField:
    """Steepest descent z' = -grad f(z)."""
    L = problem.grad_lipschitz or 1.0
    name, gap = _gap_channel(problem)
    return VectorField(
        dim=problem.dim,
        eval=lambda t, z: -problem.gradient(z),
        stiffness_hint=lambda t: L,
        channels={
            name: gap,
            "grad_norm": lambda t, z: float(np.linalg.norm(problem.gradient(z))),
            "speed": lambda t, z: float(np.linalg.norm(problem.gradient(z))),
        },
        kind="sd",
        params={},
    )


def perturbed_sd_field(problem: SmoothProblem, alpha: float, c: Array) -> VectorField:
    """Steepest descent with integrable forcing z' = -grad f(z) + c / t^((alpha+1)/2)."""
    if alpha <= 1.0:
        raise ValueError(f"alpha must exceed 1, got {alpha}")
    c = np.asarray(c, dtype=float)
    L = problem.grad_lipschitz or 1.0
    p = (alpha + 1.0) / 2.0
    name, gap = _gap_channel(problem)

    def rhs(t: float, z: Array) -> Array:
        _positive_time(t)
        return -problem.gradient(z) + c / t ** p

    return VectorField(
        dim=problem.dim,
        eval=rhs,
        stiffness_hint=lambda t: L,
        channels={
            name: gap,
            "grad_norm": lambda t, z: float(np.linalg.norm(problem.gradient(z))),
            "speed": lambda t, z: float(np.linalg.norm(rhs(t, z))),
        },
        kind="perturbed_sd",
        params={"alpha": alpha, "c": c.tolist()},
    )


def rescaled_sd_field(problem: SmoothProblem, alpha: float) -> VectorField:
    """Quadratically time-scaled steepest descent y' = -(s/(alpha-1)) grad f(y)."""
    if alpha <= 1.0:
        raise ValueError(f"alpha must exceed 1, got {alpha}")
    L = problem.grad_lipschitz or 1.0
    name, gap = _gap_channel(problem)

    def rhs(s: float, y: Array) -> Array:
        _positive_time(s)
        return -(s / (alpha - 1.0)) * problem.gradient(y)

    return VectorField(
        dim=problem.dim,
        eval=rhs,
        stiffness_hint=lambda s: s * L / (alpha - 1.0),
        channels={
            name: gap,
            "grad_norm": lambda s, y: float(np.linalg.norm(problem.gradient(y))),
        },
        kind="rescaled_sd",
        params={"alpha": alpha},
    )


def isihd_system(problem: SmoothProblem, alpha: float) -> VectorField:
    """Inertial system with implicit Hessian damping, as (position, velocity).

    x'' + (alpha/s) x' + grad f(x + (s/(alpha-1)) x') = 0.
    """
    if alpha <= 1.0:
        raise ValueError(f"alpha must exceed 1, got {alpha}")
    n = problem.dim
    L = problem.grad_lipschitz or 1.0
    name, gap = _gap_channel(problem, pick=lambda u: u[:n])

    def rhs(s: float, u: Array) -> Array:
        _positive_time(s)
        x, v = u[:n], u[n:]
        acc = -(alpha / s) * v - problem.gradient(x + (s / (alpha - 1.0)) * v)
        return np.concatenate([v, acc])

    def extrapolated(s, u):
        return u[:n] + (s / (alpha - 1.0)) * u[n:]

    return VectorField(
        dim=2 * n,
        eval=rhs,
        stiffness_hint=lambda s: alpha / s + s * L / (alpha - 1.0),
        channels={
            name: gap,
            "grad_ext_norm": lambda s, u: float(
                np.linalg.norm(problem.gradient(extrapolated(s, u)))),
            "velocity_norm": lambda s, u: float(np.linalg.norm(u[n:])),
        },
        state_names=[f"x{i}" for i in range(n)] + [f"v{i}" for i in range(n)],
        kind="isihd",
        params={"alpha": alpha},
    )


def explicit_hessian_system(problem: SmoothProblem, alpha: float) -> VectorField:
    """Inertial system with explicit Hessian damping, as (position, velocity).

    y'' + (alpha/s) y' + (s/(alpha+1)) d/ds grad f(y) + grad f(y) = 0,
    where d/ds grad f(y) = hess f(y) y'.
    """
    if alpha <= 1.0:
        raise ValueError(f"alpha must exceed 1, got {alpha}")
    if problem.hess_vec is None:
        raise ValueError("explicit Hessian damping needs hess_vec")
    n = problem.dim
    L = problem.grad_lipschitz or 1.0
    name, gap = _gap_channel(problem, pick=lambda u: u[:n])

    def rhs(s: float, u: Array) -> Array:
        _positive_time(s)
        y, v = u[:n], u[n:]
        acc = (-(alpha / s) * v
               - (s / (alpha + 1.0)) * problem.hess_vec(y, v)
               - problem.gradient(y))
        return np.concatenate([v, acc])

    return VectorField(
        dim=2 * n,
        eval=rhs,
        stiffness_hint=lambda s: alpha / s + s * L / (alpha + 1.0) + np.sqrt(L),
        channels={
            name: gap,
            "grad_norm": lambda s, u: float(np.linalg.norm(problem.gradient(u[:n]))),
            "velocity_norm": lambda s, u: float(np.linalg.norm(u[n:])),
        },
        state_names=[f"y{i}" for i in range(n)] + [f"v{i}" for i in range(n)],
        kind="explicit_hessian",
        params={"alpha": alpha},
    )


def _newton_solver(problem: SmoothProblem, lam: float) -> Callable[[Array, Array], Array]:
    """Solver for (lam I + hess f(y)) d = g, as d = solve(y, g).

    A constant dense Hessian published under ``meta["hessian"]`` lets the
    shifted matrix be inverted once; otherwise each call runs matrix-free
    conjugate gradient against ``hess_vec`` at the current point.
    """
    H = problem.meta.get("hessian")
    if H is not None:
        M = np.linalg.inv(lam * np.eye(problem.dim) + np.asarray(H, dtype=float))
        return lambda y, g: M @ g
    return lambda y, g: conjugate_gradient(
        lambda p: lam * p + problem.hess_vec(y, p), g)


def regularized_newton_system(problem: SmoothProblem, lam: float) -> VectorField:
    """Levenberg-Marquardt regularized Newton flow.

    (lam I + hess f(z)) z' = -grad f(z), solved per evaluation by conjugate
    gradient (relative tolerance 1e-12, at most 10*dim iterations).
    Problems that expose a constant dense Hessian (``meta["hessian"]``)
    are solved through a matrix inverted once up front instead.
    """
    if lam <= 0.0:
        raise ValueError(f"lam must be positive, got {lam}")
    if problem.hess_vec is None:
        raise ValueError("regularized Newton flow needs hess_vec")
    L = problem.grad_lipschitz or 1.0
    name, gap = _gap_channel(problem)
    solve = _newton_solver(problem, lam)

    def rhs(t: float, z: Array) -> Array:
        return solve(z, -problem.gradient(z))

    def vdot_norm(t: float, z: Array) -> float:
        zdot = rhs(t, z)
        return float(np.linalg.norm(-lam * zdot - problem.gradient(z)))

    return VectorField(
        dim=problem.dim,
        eval=rhs,
        stiffness_hint=lambda t: L / lam,
        channels={
            name: gap,
            "grad_norm": lambda t, z: float(np.linalg.norm(problem.gradient(z))),
            "vdot_norm": vdot_norm,
            "speed": lambda t, z: float(np.linalg.norm(rhs(t, z))),
        },
        kind="regularized_newton",
        params={"lam": lam},
    )


def combined_system(problem: SmoothProblem, alpha: float, lam: float) -> VectorField:
    """Time-scaled regularized Newton flow coupled with on-the-fly averaging.

    (lam I + hess f(y)) y' = -(lam s/(alpha-1)) grad f(y),
    x' = -((alpha-1)/s)(x - y); state is (y, x).  The linear solve uses
    the same constant-Hessian fast path as the plain Newton flow.
    """
    if alpha <= 1.0:
        raise ValueError(f"alpha must exceed 1, got {alpha}")
    if lam <= 0.0:
        raise ValueError(f"lam must be positive, got {lam}")
    if problem.hess_vec is None:
        raise ValueError("combined Newton flow needs hess_vec")
    n = problem.dim
    L = problem.grad_lipschitz or 1.0
    fstar = problem.min_value
    solve = _newton_solver(problem, lam)

    def rhs(s: float, u: Array) -> Array:
        _positive_time(s)
        y, x = u[:n], u[n:]
        ydot = solve(y, -(lam * s / (alpha - 1.0)) * problem.gradient(y))
        xdot = -((alpha - 1.0) / s) * (x - y)
        return np.concatenate([ydot, xdot])

    channels = {
        "w_norm": lambda s, u: float(np.linalg.norm(problem.gradient(u[:n]))),
        "speed_x": lambda s, u: float(
            np.linalg.norm(((alpha - 1.0) / s) * (u[n:] - u[:n]))),
    }
    if fstar is not None:
        channels["value_gap_x"] = lambda s, u: problem.value(u[n:]) - fstar
        channels["value_gap_y"] = lambda s, u: problem.value(u[:n]) - fstar

    return VectorField(
        dim=2 * n,
        eval=rhs,
        stiffness_hint=lambda s: s * L / (alpha - 1.0) + (alpha - 1.0) / s,
        channels=channels,
        state_names=[f"y{i}" for i in range(n)] + [f"x{i}" for i in range(n)],
        kind="combined",
        params={"alpha": alpha, "lam": lam},
    )


def bilevel_system(problem: SmoothProblem, alpha: float) -> VectorField:
    """Coupled steepest descent in the product space (state (Y, X), time t).

    Y' = -2 grad f(Y) - ((alpha-1)/(4t))(Y - X),
    X' = -((alpha-1)/(4t))(X - Y).
    Viewed as a bilevel route: it minimizes 0.5||Y-X||^2 over the set where
    f(Y) is minimal.
    """
    if alpha <= 1.0:
        raise ValueError(f"alpha must exceed 1, got {alpha}")
    n = problem.dim
    L = problem.grad_lipschitz or 1.0
    fstar = problem.min_value

    def rhs(t: float, u: Array) -> Array:
        _positive_time(t)
        Y, X = u[:n], u[n:]
        eps = (alpha - 1.0) / (4.0 * t)
        return np.concatenate([-2.0 * problem.gradient(Y) - eps * (Y - X),
                               -eps * (X - Y)])

    channels = {
        "phi": lambda t, u: float(0.5 * np.linalg.norm(u[:n] - u[n:]) ** 2),
    }
    if fstar is not None:
        channels["psi_gap"] = lambda t, u: problem.value(u[:n]) - fstar
        channels["value_gap_x"] = lambda t, u: problem.value(u[n:]) - fstar

    return VectorField(
        dim=2 * n,
        eval=rhs,
        stiffness_hint=lambda t: 2.0 * L + (alpha - 1.0) / (2.0 * t),
        channels=channels,
        state_names=[f"Y{i}" for i in range(n)] + [f"X{i}" for i in range(n)],
        kind="bilevel",
        params={"alpha": alpha},
    )


def cocoercive_initial_constant(operator: CocoerciveOperator, alpha: float,
                                s0: float, y0: Array, y1: Array) -> Array:
    """Cauchy constant of the first integral: c0 = s0^a y1 + (s0^(a+1)/(a+1)) M(y0)."""
    return s0 ** alpha * np.asarray(y1, dtype=float) + \
        (s0 ** (alpha + 1.0) / (alpha + 1.0)) * operator.apply(np.asarray(y0, dtype=float))


def cocoercive_system(operator: CocoerciveOperator, alpha: float, c0: Array) -> VectorField:
    """Reduced first-order flow of the inertial cocoercive dynamic.

    y' = -(s/(alpha+1)) M(y) + c0 / s^alpha.  ``c0`` encodes second-order
    Cauchy data via :func:`cocoercive_initial_constant`.
    """
    if alpha <= 1.0:
        raise ValueError(f"alpha must exceed 1, got {alpha}")
    c0 = np.asarray(c0, dtype=float)
    lip = 1.0 / operator.rho if operator.rho > 0 else 1.0

    def rhs(s: float, y: Array) -> Array:
        _positive_time(s)
        return -(s / (alpha + 1.0)) * operator.apply(y) + c0 / s ** alpha

    return VectorField(
        dim=operator.dim,
        eval=rhs,
        stiffness_hint=lambda s: s * lip / (alpha + 1.0),
        channels={
            "op_norm": lambda s, y: float(np.linalg.norm(operator.apply(y))),
        },
        kind="cocoercive",
        params={"alpha": alpha, "c0": c0.tolist()},
    )


def integrate(vf: VectorField, u0: Array, s0: float, horizon: float,
              h: float, record_every: int = 1) -> Trajectory:
    """Classical RK4 with stiffness-driven step halving.

    The nominal step is halved (at most 20 times) while
    ``stiffness_hint(s) * step > 1``, and clamped to land exactly on the
    horizon.  The initial point, every ``record_every``-th accepted step,
    and the final point are recorded; channels are evaluated only at
    record time.  A non-finite state or one with norm above 1e12 aborts
    with :class:`DivergenceError` naming the last finite time.
    """
    if h <= 0:
        raise ValueError(f"step must be positive, got {h}")
    if record_every < 1:
        raise ValueError(f"record_every must be >= 1, got {record_every}")
    if horizon < s0:
        raise ValueError(f"horizon {horizon} precedes start {s0}")
    u = np.asarray(u0, dtype=float).copy()
    if u.shape != (vf.dim,):
        raise ValueError(f"initial state has shape {u.shape}, expected ({vf.dim},)")

    names = vf.state_names or [f"u{i}" for i in range(vf.dim)]
    chan_names = sorted(vf.channels)
    times = [s0]
    states = [u.copy()]
    chans = {c: [float(vf.channels[c](s0, u))] for c in chan_names}
    steps = []

    s = s0
    accepted = 0
    end_tol = 1e-12 * max(1.0, abs(horizon))
    while s < horizon - end_tol:
        step = min(h, horizon - s)
        if vf.stiffness_hint is not None:
            hint = float(vf.stiffness_hint(s))
            halved = 0
            while hint * step > 1.0 and halved < MAX_HALVINGS:
                step *= 0.5
                halved += 1
        k1 = vf.eval(s, u)
        k2 = vf.eval(s + 0.5 * step, u + 0.5 * step * k1)
        k3 = vf.eval(s + 0.5 * step, u + 0.5 * step * k2)
        k4 = vf.eval(s + step, u + step * k3)
        u_next = u + (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(u_next)) or np.linalg.norm(u_next) > NORM_GUARD:
            raise DivergenceError(
                f"{vf.kind or 'field'} diverged; last finite state at s={s:.12g}", s)
        u = u_next
        s += step
        accepted += 1
        steps.append(step)
        if accepted % record_every == 0 or s >= horizon - end_tol:
            times.append(s)
            states.append(u.copy())
            for c in chan_names:
                chans[c].append(float(vf.channels[c](s, u)))

    return Trajectory(
        times=np.asarray(times),
        states=np.asarray(states),
        derived={c: np.asarray(v) for c, v in chans.items()},
        state_names=names,
        kind=vf.kind,
        params=dict(vf.params),
        step_sizes=np.asarray(steps),
    )


def nonsmooth_inclusion_flow(g: ProxFriendly, alpha: float, x0: Array,
                             s0: float, horizon: float, h: float,
                             record_every: int = 1) -> Trajectory:
    """Averaged proximal flow for a nonsmooth convex potential.

    The differential inclusion y' + (s/(alpha-1)) df(y) (ni) 0 is stepped
    implicitly: y_{j+1} = prox(y_j, h * s_j / (alpha-1)), which keeps
    iterates in dom f; the averaging x' = -((alpha-1)/s)(x - y) is stepped
    explicitly against y_{j+1}.  Both start at x0, matching zero initial
    velocity.  State is (x, y); channels record both objective values and
    the implicit-step subgradient norm.
    """
    if alpha <= 1.0:
        raise ValueError(f"alpha must exceed 1, got {alpha}")
    if s0 <= 0.0:
        raise ValueError(f"s0 must be positive, got {s0}")
    if horizon < s0:
        raise ValueError(f"horizon {horizon} precedes start {s0}")
    if h <= 0:
        raise ValueError(f"step must be positive, got {h}")
    x = np.asarray(x0, dtype=float).copy()
    y = x.copy()
    if not np.isfinite(g.value(x)):
        raise ValueError("x0 must lie in dom f")
    n = x.size

    times = [s0]
    states = [np.concatenate([x, y])]
    value_x = [float(g.value(x))]
    value_y = [float(g.value(y))]
    subgrad = [0.0]
    s = s0
    j = 0
    end_tol = 1e-12 * max(1.0, abs(horizon))
    while s < horizon - end_tol:
        step = min(h, horizon - s)
        theta = step * s / (alpha - 1.0)
        y_next = g.prox(y, theta)
        eta = (y - y_next) / theta
        x = x - step * ((alpha - 1.0) / s) * (x - y_next)
        y = y_next
        s += step
        j += 1
        if j % record_every == 0 or s >= horizon - end_tol:
            times.append(s)
            states.append(np.concatenate([x, y]))
            value_x.append(float(g.value(x)))
            value_y.append(float(g.value(y)))
            subgrad.append(float(np.linalg.norm(eta)))

    return Trajectory(
        times=np.asarray(times),
        states=np.asarray(states),
        derived={"value_x": np.asarray(value_x),
                 "value_y": np.asarray(value_y),
                 "subgrad_norm": np.asarray(subgrad)},
        state_names=[f"x{i}" for i in range(n)] + [f"y{i}" for i in range(n)],
        kind="nonsmooth_inclusion",
        params={"alpha": alpha},
    )
