"""Turns trajectories and iterate logs into verdicts: fitted rate
exponents, weighted-decay ratios, integral boundedness estimates,
first-integral residuals, convexity-transfer checks, and per-dynamic
monitor suites.

Asymptotic claims (value gaps vanishing faster than 1/s^2 and the like)
have no finite-sample proof, so each one is certified by a falsifiable
surrogate: the weighted quantity's sup over a late window must drop
below half its sup over an early window, integrals must accumulate
less than 5% of their mass in the last window, and log-log slopes are
fitted on the tail.  Checks that only hold for large enough alpha are
reported as informational below their threshold instead of pass/fail.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

from .algorithms import IterateLog
from .dynamics import Trajectory
from .transforms import AveragingMeasure, _trapezoid

Array = np.ndarray

SUITE_NAMES = ("thm1", "thm2", "thm3", "thm4", "thm5", "thm6",
               "thm_prox", "thm_cocoercive")

# fixed analysis windows, as fractions of the final time
EARLY_WINDOW = (0.2, 0.4)
LATE_WINDOW = (0.8, 1.0)
DECAY_RATIO_BOUND = 0.5
INTEGRAL_TAIL_SHARE = 0.05
EXPONENT_TOLERANCE = 0.2
CONSERVATION_TOLERANCE = 1e-6
CONVERGENCE_TOLERANCE = 1e-3


@dataclass
class RateReport:
    """Aggregated verdicts for one monitor suite.

    ``verdicts`` holds only hard pass/fail checks; quantities whose
    guarantee needs a larger alpha than the run used are still measured
    (in ``ratios``/``exponents``/``integrals``) but annotated in
    ``notes`` instead of judged.
    """

    suite: str
    verdicts: dict = field(default_factory=dict)
    exponents: dict = field(default_factory=dict)
    ratios: dict = field(default_factory=dict)
    integrals: dict = field(default_factory=dict)
    notes: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.verdicts.values())

    def to_dict(self) -> dict:
        return {
            "suite": self.suite,
            "passed": self.passed,
            "verdicts": dict(self.verdicts),
            "exponents": dict(self.exponents),
            "ratios": dict(self.ratios),
            "integrals": dict(self.integrals),
            "notes": dict(self.notes),
        }

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True)


def rate_fit(times: Array, values: Array, tail_fraction: float = 0.5,
             floor: float = 0.0) -> Optional[float]:
    """Least-squares slope of log(value) vs log(time) on the tail.

    Uses the last ``tail_fraction`` of samples; only finite values
    strictly above ``floor`` (default 0) at positive times enter the
    fit, so a series that underflows to rounding noise mid-window is
    fitted on its live part when a floor is given.  Returns None (never
    NaN) when fewer than 20 tail samples qualify.
    """
    if not (0.0 < tail_fraction < 1.0):
        raise ValueError(f"tail_fraction must lie in (0, 1), got {tail_fraction}")
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if times.shape != values.shape:
        raise ValueError("times and values must have matching shapes")
    n_tail = max(int(math.ceil(len(times) * tail_fraction)), 1)
    t = times[-n_tail:]
    v = values[-n_tail:]
    mask = (v > max(floor, 0.0)) & (t > 0.0) & np.isfinite(v)
    if int(mask.sum()) < 20:
        return None
    slope = np.polyfit(np.log(t[mask]), np.log(v[mask]), 1)[0]
    return float(slope)


def _window_sup(times: Array, w: Array, lo_frac: float, hi_frac: float) -> float:
    T = times[-1]
    mask = (times >= lo_frac * T) & (times <= hi_frac * T)
    if not mask.any():
        raise ValueError(
            f"window [{lo_frac}T, {hi_frac}T] contains no samples (T={T})")
    return float(np.max(w[mask]))


def weighted_decay_check(times: Array, values: Array, weight_power: float = 0.0,
                         early: tuple = EARLY_WINDOW, late: tuple = LATE_WINDOW) -> float:
    """Ratio sup_late(t^p v) / sup_early(t^p v); below 1 means decay.

    The default windows are [0.2T, 0.4T] against [0.8T, T].  A ratio of
    0 is returned when both window sups vanish (flat zero channel), and
    inf when only the early sup vanishes.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    w = times ** weight_power * values
    sup_early = _window_sup(times, w, *early)
    sup_late = _window_sup(times, w, *late)
    if sup_early == 0.0:
        return 0.0 if sup_late == 0.0 else math.inf
    return sup_late / sup_early


@dataclass
class IntegralEstimate:
    """Trapezoid quadrature of t^p v with a tail-mass boundedness verdict."""

    total: float
    tail_share: float

    @property
    def bounded(self) -> bool:
        return self.tail_share < INTEGRAL_TAIL_SHARE

    def __float__(self) -> float:
        return self.total


def integral_estimate(times: Array, values: Array, weight_power: float = 0.0,
                      tail_start: float = LATE_WINDOW[0]) -> IntegralEstimate:
    """Quadrature of t^p value over the grid plus its last-window share.

    ``tail_share`` is the fraction of the (absolute) integral mass
    accumulated after ``tail_start``*T; a share under 5% is the finite
    surrogate for integrability over an infinite horizon.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    w = times ** weight_power * values
    total = float(_trapezoid(w, times))
    pieces = 0.5 * (np.abs(w[1:]) + np.abs(w[:-1])) * np.diff(times)
    mass = float(np.sum(pieces))
    if mass == 0.0:
        return IntegralEstimate(total=total, tail_share=0.0)
    cut = tail_start * times[-1]
    # an interval straddling the cut counts toward the tail
    tail_mass = float(np.sum(pieces[times[1:] > cut]))
    return IntegralEstimate(total=total, tail_share=tail_mass / mass)


def conservation_residual(traj: Trajectory, operator: Callable[[Array], Array],
                          c0: Optional[Array] = None) -> float:
    """Max over the grid of ||y' + (s/(alpha+1)) G(y) - c0 / s^alpha||.

    The bracketed quantity times s^alpha is conserved along the
    explicit-Hessian and cocoercive flows, so the residual is pure
    integration error.  For explicit-Hessian runs the velocity is part
    of the state; for the cocoercive flow it is reconstructed by a
    fourth-order central difference on the (uniform) stored grid,
    skipping two samples at each boundary.  ``c0`` defaults to the
    constant wired into the run (cocoercive) or the one determined by
    the first stored sample; passing another value measures miswiring.
    """
    kind = traj.kind.split("+")[0]
    alpha = traj.params.get("alpha")
    if alpha is None:
        raise ValueError("trajectory params carry no alpha")
    s = traj.times
    if kind == "explicit_hessian":
        n = traj.states.shape[1] // 2
        y = traj.states[:, :n]
        v = traj.states[:, n:]
    elif kind == "cocoercive":
        if c0 is None and "c0" in traj.params:
            c0 = np.asarray(traj.params["c0"], dtype=float)
        # a short final step (horizon clamping) is dropped, the rest must
        # be uniform for the difference stencil to keep its order
        states = traj.states
        ds = np.diff(s)
        if len(ds) >= 2 and abs(ds[-1] - ds[0]) > 1e-9 * ds[0]:
            s, states, ds = s[:-1], states[:-1], ds[:-1]
        if len(s) < 5:
            raise ValueError("need at least 5 samples for the difference stencil")
        if np.max(np.abs(ds - ds[0])) > 1e-9 * ds[0]:
            raise ValueError("cocoercive residual needs a uniform sample grid")
        h = float(ds[0])
        y = states
        v = (y[:-4] - 8.0 * y[1:-3] + 8.0 * y[3:-1] - y[4:]) / (12.0 * h)
        y = y[2:-2]
        s = s[2:-2]
    else:
        raise ValueError(
            f"conservation residual is defined for explicit_hessian and "
            f"cocoercive runs, got kind {traj.kind!r}")
    G = np.array([operator(row) for row in y])
    inv = v + (s[:, None] / (alpha + 1.0)) * G
    if c0 is None:
        c0 = s[0] ** alpha * inv[0]
    c0 = np.asarray(c0, dtype=float)
    res = inv - c0[None, :] / s[:, None] ** alpha
    return float(np.max(np.linalg.norm(res, axis=1)))


def jensen_check(problem, y_traj: Trajectory, alpha: float, samples) -> float:
    """Max of f(average of y) minus average of f(y) over the given times.

    Both sides use the same normalized discrete measure (boundary atom
    plus trapezoid density weights) on the stored grid up to each sample
    time, so for a convex objective the difference is nonpositive up to
    rounding; values above ~1e-6 indicate a convexity or wiring error.
    """
    if alpha <= 1.0:
        raise ValueError(f"alpha must exceed 1, got {alpha}")
    t = y_traj.times
    measure = AveragingMeasure(alpha=alpha, s0=float(t[0]))
    worst = -math.inf
    for s in samples:
        if s <= t[0] or s > t[-1] * (1.0 + 1e-12):
            raise ValueError(f"sample time {s} outside ({t[0]}, {t[-1]}]")
        j = int(np.searchsorted(t, s, side="right") - 1)
        if j < 1:
            raise ValueError(f"sample time {s} leaves no quadrature interval")
        grid = t[:j + 1]
        ys = y_traj.states[:j + 1]
        if grid[-1] < s * (1.0 - 1e-12):
            extra = y_traj.state_at(s)
            grid = np.append(grid, s)
            ys = np.vstack([ys, extra])
        w = measure.grid_weights(grid)
        w = w / np.sum(w)
        mean_point = w @ ys
        lhs = problem.value(mean_point)
        rhs = float(np.dot(w, [problem.value(row) for row in ys]))
        worst = max(worst, lhs - rhs)
    return worst


class _SuiteBuilder:
    """Accumulates measured quantities and alpha-gated verdicts."""

    def __init__(self, suite: str, alpha: Optional[float]):
        self.report = RateReport(suite=suite)
        self.alpha = alpha

    def _gate(self, name: str, ok: bool, min_alpha: Optional[float],
              strict: bool) -> None:
        if min_alpha is not None and self.alpha is not None:
            below = self.alpha <= min_alpha if strict else self.alpha < min_alpha
            if below:
                cmp = ">" if strict else ">="
                self.report.notes[name] = (
                    f"informational: guarantee needs alpha {cmp} {min_alpha}, "
                    f"run used alpha={self.alpha}")
                return
        self.report.verdicts[name] = bool(ok)

    def ratio(self, name: str, times, values, power: float,
              min_alpha: Optional[float] = None, strict: bool = False,
              bound: float = DECAY_RATIO_BOUND) -> None:
        r = weighted_decay_check(times, values, power)
        self.report.ratios[name] = r
        self._gate(name, r < bound, min_alpha, strict)

    def exponent(self, name: str, times, values, bound: float,
                 min_alpha: Optional[float] = None, strict: bool = False) -> None:
        v = np.asarray(values, dtype=float)
        floor = 1e-12 * (1.0 + abs(float(v[0])))
        e = rate_fit(times, values, floor=floor)
        self.report.exponents[name] = e
        if e is None:
            # a tail resting at the numerical floor satisfies any decay
            # bound vacuously (exact convergence, or a flat-zero channel);
            # an unfittable tail with live signal is a failure
            n_tail = max(int(math.ceil(len(v) * 0.5)), 1)
            ok = bool(np.all(v[-n_tail:] <= floor))
            if ok:
                self.report.notes[name] = (
                    "informational: tail at the numerical floor, "
                    "bound vacuously satisfied")
        else:
            ok = e <= bound
        self._gate(name, ok, min_alpha, strict)

    def integral(self, name: str, times, values, power: float,
                 min_alpha: Optional[float] = None, strict: bool = False) -> None:
        est = integral_estimate(times, values, power)
        self.report.integrals[name] = est.total
        self.report.ratios[name + "_tail_share"] = est.tail_share
        self._gate(name, est.bounded, min_alpha, strict)

    def check(self, name: str, ok: bool, min_alpha: Optional[float] = None,
              strict: bool = False) -> None:
        self._gate(name, ok, min_alpha, strict)


def _require_channels(run: Trajectory, names) -> dict:
    missing = [c for c in names if c not in run.derived]
    if missing:
        raise ValueError(
            f"missing channels: {', '.join(sorted(missing))} "
            f"(available: {', '.join(sorted(run.derived)) or 'none'})")
    return {c: run.derived[c] for c in names}


def _convergence_surrogate(run: Trajectory) -> bool:
    """Norm stabilization: the state moved < 1e-3 (relative) since mid-run."""
    mid = run.states[len(run.times) // 2]
    end = run.states[-1]
    return bool(np.linalg.norm(end - mid)
                < CONVERGENCE_TOLERANCE * (1.0 + np.linalg.norm(end)))


def _monotone(series: Array, scale: Optional[float] = None) -> bool:
    series = np.asarray(series, dtype=float)
    if scale is None:
        scale = abs(float(series[0]))
    return bool(np.all(np.diff(series) <= 1e-9 * (1.0 + scale)))


def _expected_kind(run: Trajectory, kind: str) -> None:
    if run.kind.split("+")[0] != kind:
        raise ValueError(f"suite expects a {kind!r} run, got {run.kind!r}")


def theorem_suite(name: str, run: Union[Trajectory, IterateLog],
                  problem=None) -> RateReport:
    """Monitor battery for one dynamic or algorithm family.

    ``run`` is the trajectory (or iterate log, for thm_prox) produced by
    the matching builder; ``problem`` supplies evaluations some checks
    need (first-integral residuals, start-value bounds).  Checks whose
    guarantee requires a larger alpha than the run used are recorded as
    informational notes rather than verdicts.
    """
    if name not in SUITE_NAMES:
        raise ValueError(f"unknown suite {name!r}; choose from {SUITE_NAMES}")
    return _SUITES[name](run, problem)


def _suite_thm1(run: Trajectory, problem) -> RateReport:
    _expected_kind(run, "sd")
    ch = _require_channels(run, ["value_gap", "speed"])
    t = run.times
    b = _SuiteBuilder("thm1", None)
    b.ratio("t_value_gap", t, ch["value_gap"], 1.0)
    b.ratio("sqrt_t_speed", t, ch["speed"], 0.5)
    b.integral("int_value_gap", t, ch["value_gap"], 0.0)
    b.integral("int_t_speed_sq", t, ch["speed"] ** 2, 1.0)
    b.exponent("value_gap_exponent", t, ch["value_gap"], -1.0 + EXPONENT_TOLERANCE)
    b.check("monotone_value_gap", _monotone(ch["value_gap"]))
    b.check("trajectory_convergence", _convergence_surrogate(run))
    return b.report


def _start_gap_bound(run: Trajectory, problem, gap: Array, alpha: float) -> Optional[bool]:
    """sup_s gap(x(s)) <= max(gap(x(s0)), gap(y(s0))) for averaged states."""
    if problem is None or problem.min_value is None:
        return None
    n = run.states.shape[1] // 2
    x0, v0 = run.states[0, :n], run.states[0, n:]
    s0 = run.times[0]
    ext0 = x0 + (s0 / (alpha - 1.0)) * v0
    gap_y0 = problem.value(ext0) - problem.min_value
    cap = max(gap[0], gap_y0)
    return bool(np.max(gap) <= cap * (1.0 + 1e-6) + 1e-9)


def _suite_thm2(run: Trajectory, problem) -> RateReport:
    _expected_kind(run, "isihd")
    ch = _require_channels(run, ["value_gap", "grad_ext_norm", "velocity_norm"])
    s = run.times
    alpha = run.params["alpha"]
    b = _SuiteBuilder("thm2", alpha)
    b.ratio("s_velocity", s, ch["velocity_norm"], 1.0, min_alpha=2.0)
    b.ratio("s2_value_gap", s, ch["value_gap"], 2.0, min_alpha=3.0, strict=True)
    b.integral("int_s3_grad_ext_sq", s, ch["grad_ext_norm"] ** 2, 3.0,
               min_alpha=3.0, strict=True)
    b.integral("int_s_velocity_sq", s, ch["velocity_norm"] ** 2, 1.0,
               min_alpha=3.0, strict=True)
    b.exponent("value_gap_exponent", s, ch["value_gap"],
               -2.0 + EXPONENT_TOLERANCE, min_alpha=3.0, strict=True)
    bound = _start_gap_bound(run, problem, ch["value_gap"], alpha)
    if bound is None:
        b.report.notes["gap_bounded_by_start"] = "skipped: needs problem with known inf f"
    else:
        b.check("gap_bounded_by_start", bound)
    # value decay of order o(1/s^2) holds only past alpha = 3; below that
    # the fixed terminal threshold is not reachable at a finite horizon
    b.check("terminal_gap",
            ch["value_gap"][-1] < CONVERGENCE_TOLERANCE * (1.0 + ch["value_gap"][0]),
            min_alpha=3.0, strict=True)
    b.check("trajectory_convergence", _convergence_surrogate(run), min_alpha=3.0,
            strict=True)
    return b.report


def _suite_thm3(run: Trajectory, problem) -> RateReport:
    _expected_kind(run, "explicit_hessian")
    ch = _require_channels(run, ["value_gap", "grad_norm", "velocity_norm"])
    s = run.times
    alpha = run.params["alpha"]
    b = _SuiteBuilder("thm3", alpha)
    if problem is None:
        b.report.notes["conservation"] = "skipped: needs problem for gradient evaluations"
    else:
        res = conservation_residual(run, problem.gradient)
        b.report.ratios["conservation_residual"] = res
        b.check("conservation", res <= CONSERVATION_TOLERANCE)
    b.ratio("s_velocity", s, ch["velocity_norm"], 1.0, min_alpha=2.0)
    b.ratio("s2_value_gap", s, ch["value_gap"], 2.0, min_alpha=3.0, strict=True)
    b.integral("int_s3_grad_sq", s, ch["grad_norm"] ** 2, 3.0,
               min_alpha=3.0, strict=True)
    b.exponent("value_gap_exponent", s, ch["value_gap"],
               -2.0 + EXPONENT_TOLERANCE, min_alpha=3.0, strict=True)
    b.check("terminal_gap",
            ch["value_gap"][-1] < CONVERGENCE_TOLERANCE * (1.0 + ch["value_gap"][0]),
            min_alpha=3.0, strict=True)
    b.check("trajectory_convergence", _convergence_surrogate(run), min_alpha=3.0,
            strict=True)
    return b.report


def _suite_thm4(run: Trajectory, problem) -> RateReport:
    _expected_kind(run, "regularized_newton")
    ch = _require_channels(run, ["value_gap", "grad_norm", "vdot_norm", "speed"])
    t = run.times
    b = _SuiteBuilder("thm4", None)
    b.ratio("t_value_gap", t, ch["value_gap"], 1.0)
    b.ratio("t_grad", t, ch["grad_norm"], 1.0)
    b.ratio("t_speed", t, ch["speed"], 1.0)
    b.ratio("t_vdot", t, ch["vdot_norm"], 1.0)
    b.integral("int_value_gap", t, ch["value_gap"], 0.0)
    b.integral("int_t_speed_sq", t, ch["speed"] ** 2, 1.0)
    b.integral("int_t_vdot_sq", t, ch["vdot_norm"] ** 2, 1.0)
    b.integral("int_t_grad_sq", t, ch["grad_norm"] ** 2, 1.0)
    b.exponent("value_gap_exponent", t, ch["value_gap"], -1.0 + EXPONENT_TOLERANCE)
    b.check("monotone_grad_norm", _monotone(ch["grad_norm"]))
    b.check("trajectory_convergence", _convergence_surrogate(run))
    return b.report


def _suite_thm5(run: Trajectory, problem) -> RateReport:
    _expected_kind(run, "combined")
    ch = _require_channels(run, ["w_norm", "speed_x", "value_gap_x", "value_gap_y"])
    s = run.times
    alpha = run.params["alpha"]
    b = _SuiteBuilder("thm5", alpha)
    b.check("monotone_value_y", _monotone(ch["value_gap_y"]))
    b.ratio("s_w", s, ch["w_norm"], 1.0, min_alpha=2.0)
    b.ratio("s_speed_x", s, ch["speed_x"], 1.0, min_alpha=2.0)
    b.ratio("s2_value_gap_x", s, ch["value_gap_x"], 2.0, min_alpha=3.0, strict=True)
    b.integral("int_s_speed_x_sq", s, ch["speed_x"] ** 2, 1.0,
               min_alpha=3.0, strict=True)
    b.exponent("value_gap_x_exponent", s, ch["value_gap_x"],
               -2.0 + EXPONENT_TOLERANCE, min_alpha=3.0, strict=True)
    b.check("terminal_gap",
            ch["value_gap_x"][-1] < CONVERGENCE_TOLERANCE * (1.0 + ch["value_gap_x"][0]),
            min_alpha=3.0, strict=True)
    b.check("trajectory_convergence", _convergence_surrogate(run), min_alpha=3.0,
            strict=True)
    return b.report


def _suite_thm6(run: Trajectory, problem) -> RateReport:
    _expected_kind(run, "bilevel")
    ch = _require_channels(run, ["phi", "psi_gap"])
    t = run.times
    alpha = run.params["alpha"]
    b = _SuiteBuilder("thm6", alpha)
    # near the coupled equilibrium ||Y - X|| contracts at speed eps(t), so
    # phi decays like t^(-(alpha-1)/2) and the window ratio tends to
    # 4^(-(alpha-1)/2): at alpha = 2 it sits exactly on the 0.5 bound
    b.ratio("phi", t, ch["phi"], 0.0, min_alpha=2.0, strict=True)
    b.ratio("t_psi_gap", t, ch["psi_gap"], 1.0, min_alpha=2.0)
    b.check("terminal_psi_gap",
            ch["psi_gap"][-1] < CONVERGENCE_TOLERANCE * (1.0 + ch["psi_gap"][0]),
            min_alpha=2.0)
    # the coupled state closes its gap like t^(-1/2), far too slowly for the
    # fixed drift threshold at any feasible horizon
    b.report.notes["trajectory_convergence"] = (
        "informational: coupled-state drift decays like t^(-1/2); "
        f"stabilized={_convergence_surrogate(run)}")
    return b.report


def _suite_thm_prox(run: IterateLog, problem) -> RateReport:
    if not isinstance(run, IterateLog) or run.kind != "prox_averaging":
        raise ValueError(f"suite expects a prox_averaging iterate log, got "
                         f"{getattr(run, 'kind', type(run).__name__)!r}")
    if run.fstar is None:
        raise ValueError("missing channels: fstar (optimal value needed for gaps)")
    alpha = run.params["alpha"]
    K = run.iterations
    k = np.arange(K + 1, dtype=float)
    gap_y = run.f_y - run.fstar
    gap_x = run.f_x - run.fstar
    b = _SuiteBuilder("thm_prox", alpha)
    b.check("monotone_value_y", _monotone(run.f_y, scale=abs(run.f_y[0] - run.fstar)))
    b.check("monotone_residual", _monotone(run.res_norm[1:]))
    b.exponent("gap_y_exponent", k[1:], gap_y[1:], -1.8, min_alpha=2.0)
    b.exponent("gap_x_exponent", k[1:], gap_x[1:], -1.8, min_alpha=2.0)
    b.ratio("k3_eta_sq", k[1:], run.res_norm[1:] ** 2, 3.0, min_alpha=2.0,
            bound=1.0)
    # x_k must stay the step-weighted mean of y_1..y_k
    s = run.steps
    mean_ok = True
    for j in (1, K // 2, K):
        w = s[1:j + 1] / np.sum(s[1:j + 1])
        mean = w @ run.y[1:j + 1]
        scale = 1.0 + float(np.abs(run.x[j]).max())
        mean_ok = mean_ok and bool(np.allclose(mean, run.x[j], atol=1e-8 * scale))
    b.check("x_is_weighted_mean", mean_ok)
    return b.report


def _suite_thm_cocoercive(run: Trajectory, problem) -> RateReport:
    _expected_kind(run, "cocoercive")
    ch = _require_channels(run, ["op_norm"])
    s = run.times
    alpha = run.params["alpha"]
    b = _SuiteBuilder("thm_cocoercive", alpha)
    if problem is None:
        b.report.notes["conservation"] = "skipped: needs the operator for evaluations"
    else:
        res = conservation_residual(run, problem.apply)
        b.report.ratios["conservation_residual"] = res
        if getattr(problem, "meta", {}).get("smooth", True):
            b.check("conservation", res <= CONSERVATION_TOLERANCE)
        else:
            # prox kinks cap the integrator's effective order, so the
            # tolerance is not certifiable for nonsmooth operators
            b.report.notes["conservation"] = (
                f"informational: nonsmooth operator, residual={res:.3e}")
    b.ratio("s_op", s, ch["op_norm"], 1.0, min_alpha=2.0)
    b.exponent("op_exponent", s, ch["op_norm"], -1.0 + EXPONENT_TOLERANCE,
               min_alpha=2.0)
    b.check("trajectory_convergence", _convergence_surrogate(run), min_alpha=2.0)
    return b.report


_SUITES = {
    "thm1": _suite_thm1,
    "thm2": _suite_thm2,
    "thm3": _suite_thm3,
    "thm4": _suite_thm4,
    "thm5": _suite_thm5,
    "thm6": _suite_thm6,
    "thm_prox": _suite_thm_prox,
    "thm_cocoercive": _suite_thm_cocoercive,
}
