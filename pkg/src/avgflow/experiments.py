"""Experiment configuration, sweep running, and the verification battery.

``ExperimentConfig`` is the single JSON document both the CLI and the
service accept.  :func:`run_experiment` integrates one dynamic (or runs
one discrete scheme) per sweep point and returns the CSV/report/SVG
artifacts in memory, so clients control where bytes land on disk.
:func:`verify_battery` runs every monitor suite over a fixed matrix of
problems and alpha values and reports a pass/fail table.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from .algorithms import IterateLog, prox_averaging, prox_step_rule
from .analysis import SUITE_NAMES, RateReport, theorem_suite
from .dynamics import (
    DivergenceError,
    StiffnessError,
    Trajectory,
    bilevel_system,
    cocoercive_initial_constant,
    cocoercive_system,
    combined_system,
    explicit_hessian_system,
    integrate,
    isihd_system,
    regularized_newton_system,
    sd_field,
)
from .problems import (
    CompositeProblem,
    SmoothProblem,
    composite_prox_friendly,
    composite_problem,
    forward_backward_operator,
    l1_regularizer,
    lasso_instance,
    least_squares_problem,
    problem_from_json,
    quadratic_problem,
)
from .svg import line_plot

# kinds that run produces reports for, with their monitor suite
RUNNABLE_KINDS = {
    "sd": "thm1",
    "isihd": "thm2",
    "explicit_hessian": "thm3",
    "regularized_newton": "thm4",
    "combined": "thm5",
    "bilevel": "thm6",
    "prox_averaging": "thm_prox",
    "cocoercive": "thm_cocoercive",
}
ALPHA_FREE_KINDS = {"sd", "regularized_newton"}
COMPOSITE_KINDS = {"cocoercive", "prox_averaging"}
PROBLEM_TYPES = {"quadratic", "least_squares", "lasso"}

CATALOG = {
    "dynamics": [
        ("sd", "z' = -grad f(z)"),
        ("rescaled_sd", "y' = -(s/(alpha-1)) grad f(y)"),
        ("isihd",
         "x'' + (alpha/s) x' + grad f(x + (s/(alpha-1)) x') = 0"),
        ("explicit_hessian",
         "y'' + (alpha/s) y' + (s/(alpha+1)) hess f(y) y' + grad f(y) = 0"),
        ("regularized_newton", "(lam I + hess f(z)) z' = -grad f(z)"),
        ("combined",
         "(lam I + hess f(y)) y' = -(lam s/(alpha-1)) grad f(y); "
         "x' = -((alpha-1)/s)(x - y)"),
        ("bilevel",
         "Y' = -2 grad f(Y) - eps(t)(Y - X); X' = -eps(t)(X - Y), "
         "eps(t) = (alpha-1)/(4t)"),
        ("cocoercive", "y' = -(s/(alpha+1)) M(y) + c0/s^alpha"),
        ("nonsmooth_inclusion",
         "y' + (s/(alpha-1)) df(y) ni 0; x' = -((alpha-1)/s)(x - y)"),
    ],
    "algorithms": [
        ("prox_averaging",
         "y_{k+1} = prox_{theta_{k+1} g}(y_k), theta_{k+1} = s_{k+1}/(alpha-1); "
         "x_{k+1} = (1 - (alpha-1)/s_{k+1}) x_k + ((alpha-1)/s_{k+1}) y_{k+1}"),
        ("nesterov",
         "y_k = x_k + ((t_{k-1}-1)/t_k)(x_k - x_{k-1}); "
         "x_{k+1} = y_k - lam grad f(y_k)"),
        ("forward_backward", "y_{k+1} = y_k - mu M(y_k)"),
    ],
    "problems": [
        ("quadratic", "f(x) = 0.5 x'Qx + c'x"),
        ("least_squares", "f(x) = 0.5 ||Ax - b||^2"),
        ("lasso", "F(x) = 0.5 ||Ax - b||^2 + w ||x||_1"),
        ("l1", "g(x) = w ||x||_1"),
    ],
    "suites": [
        ("thm1", "steepest descent: t*(f - min) -> 0, sqrt(t)*speed -> 0, "
                 "integrals bounded, values nonincreasing"),
        ("thm2", "implicit Hessian damping: s*||x'|| -> 0; s^2 value rate "
                 "for alpha > 3; gap bounded by start"),
        ("thm3", "explicit Hessian damping: first integral conserved; "
                 "s*||y'|| -> 0; s^2 value rate for alpha > 3"),
        ("thm4", "regularized Newton: t*(gap, ||grad||, speed, ||v'||) -> 0; "
                 "||grad|| nonincreasing"),
        ("thm5", "Newton flow with averaging: s*||grad f(y)|| -> 0; "
                 "s^2 value rate on x for alpha > 3"),
        ("thm6", "coupled bilevel flow: 0.5||Y - X||^2 -> 0; "
                 "t*(f(Y) - min) -> 0"),
        ("thm_prox", "prox averaging: f(y_k), ||eta_k|| nonincreasing; "
                     "k^2 value rates; x_k is the step-weighted mean"),
        ("thm_cocoercive", "cocoercive flow: first integral conserved; "
                           "s*||M(y)|| -> 0"),
    ],
}


def catalog() -> dict:
    """Available dynamics, algorithms, problems, and suites with tags."""
    return {section: [{"name": n, "tag": t} for n, t in rows]
            for section, rows in CATALOG.items()}


def default_problem_spec() -> dict:
    """The built-in sparse-recovery instance used when none is given."""
    return {"type": "lasso", "seed": 42, "m": 50, "n": 100,
            "l1_weight": 0.1, "noise": 0.01, "sparsity": 10}


class ExperimentConfig(BaseModel):
    """One experiment: a problem, a kind, and a sweep over alpha.

    The document round-trips unchanged through JSON.  ``alphas`` applies
    to alpha-parameterized kinds and must stay above 1; ``lam`` feeds
    Newton-type damping, ``mu`` the forward-backward metric step
    (defaulting to the problem's 1/||A||^2).  Continuous kinds integrate
    from ``s0`` to ``horizon`` with nominal step ``step``; discrete kinds
    run ``iterations`` steps.  All runs start from the zero state with
    zero velocity, so equilibrium configs produce flat curves.
    """

    model_config = ConfigDict(extra="forbid")

    name: str = Field(default="experiment", pattern=r"^[A-Za-z0-9_.-]{1,64}$")
    kind: str = "cocoercive"
    problem: dict = Field(default_factory=default_problem_spec)
    alphas: List[float] = Field(default=[1.001, 2.0, 3.0, 5.0],
                                min_length=1, max_length=16)
    lam: float = Field(default=1.0, gt=0.0)
    mu: Optional[float] = Field(default=None, gt=0.0)
    s0: float = Field(default=1.0, gt=0.0)
    horizon: float = Field(default=30.0, gt=0.0)
    step: float = Field(default=1e-3, gt=0.0)
    record_every: int = Field(default=10, ge=1)
    iterations: int = Field(default=2000, ge=1, le=200_000)
    output_dir: Optional[str] = None
    emit_svg: bool = True

    @field_validator("kind")
    @classmethod
    def _known_kind(cls, v: str) -> str:
        if v not in RUNNABLE_KINDS:
            raise ValueError(
                f"unknown kind {v!r}; runnable kinds: "
                f"{', '.join(sorted(RUNNABLE_KINDS))}")
        return v

    @field_validator("alphas")
    @classmethod
    def _alphas_above_one(cls, v: List[float]) -> List[float]:
        for a in v:
            if not math.isfinite(a) or a <= 1.0:
                raise ValueError(f"alpha must be finite and exceed 1, got {a}")
        return v

    @field_validator("problem")
    @classmethod
    def _known_problem(cls, v: dict) -> dict:
        kind = v.get("type")
        if kind not in PROBLEM_TYPES:
            raise ValueError(
                f"unknown problem type {kind!r}; choose from "
                f"{', '.join(sorted(PROBLEM_TYPES))}")
        return v

    @field_validator("horizon")
    @classmethod
    def _finite_horizon(cls, v: float) -> float:
        if not math.isfinite(v):
            raise ValueError("horizon must be finite")
        return v


@dataclass
class SweepPoint:
    """One executed sweep point with its artifacts."""

    label: str
    alpha: Optional[float]
    suite: str
    report: RateReport
    run: Union[Trajectory, IterateLog]
    value_curve: Tuple[np.ndarray, np.ndarray]
    residual_curve: Tuple[np.ndarray, np.ndarray]

    @property
    def passed(self) -> bool:
        return self.report.passed


@dataclass
class RunResult:
    """All sweep points of one config plus named artifact texts."""

    config: ExperimentConfig
    points: List[SweepPoint]
    artifacts: List[Tuple[str, str]] = field(default_factory=list)


def _build_problem(config: ExperimentConfig):
    problem = problem_from_json(config.problem)
    if config.kind in COMPOSITE_KINDS:
        if not isinstance(problem, CompositeProblem):
            raise ValueError(
                f"kind {config.kind!r} needs a composite (lasso) problem, "
                f"got {config.problem.get('type')!r}")
    elif not isinstance(problem, SmoothProblem):
        raise ValueError(
            f"kind {config.kind!r} needs a smooth problem "
            f"(quadratic or least_squares), got {config.problem.get('type')!r}")
    return problem


# value and residual channels drawn in the two figures, per kind
_PLOT_CHANNELS = {
    "sd": ("value_gap", "grad_norm"),
    "isihd": ("value_gap", "grad_ext_norm"),
    "explicit_hessian": ("value_gap", "grad_norm"),
    "regularized_newton": ("value_gap", "grad_norm"),
    "combined": ("value_gap_x", "w_norm"),
    "bilevel": ("psi_gap", "phi"),
}


def _run_point(config: ExperimentConfig, problem, alpha: Optional[float]) -> SweepPoint:
    kind = config.kind
    suite = RUNNABLE_KINDS[kind]
    label = f"{config.name}_{kind}" if alpha is None else \
        f"{config.name}_{kind}_alpha_{alpha:g}"

    if kind == "prox_averaging":
        g = composite_prox_friendly(problem)
        log = prox_averaging(g, alpha, config.iterations,
                             np.zeros(problem.dim), fstar=problem.min_value())
        report = theorem_suite(suite, log)
        k = np.arange(log.iterations + 1, dtype=float)
        return SweepPoint(label=label, alpha=alpha, suite=suite, report=report,
                          run=log, value_curve=(k, log.f_y - log.fstar),
                          residual_curve=(k[1:], log.res_norm[1:]))

    if kind == "cocoercive":
        mu = config.mu if config.mu is not None else problem.lam
        M = forward_backward_operator(problem, mu)
        y0 = np.zeros(M.dim)
        c0 = cocoercive_initial_constant(M, alpha, config.s0, y0, np.zeros(M.dim))
        vf = cocoercive_system(M, alpha, c0)
        traj = integrate(vf, y0, s0=config.s0, horizon=config.horizon,
                         h=config.step, record_every=config.record_every)
        report = theorem_suite(suite, traj, M)
        fstar = problem.min_value()
        gaps = np.array([problem.value(row) - fstar for row in traj.states])
        return SweepPoint(label=label, alpha=alpha, suite=suite, report=report,
                          run=traj, value_curve=(traj.times, gaps),
                          residual_curve=(traj.times, traj.derived["op_norm"]))

    n = problem.dim
    if kind == "sd":
        vf = sd_field(problem)
        u0 = np.zeros(n)
    elif kind == "isihd":
        vf = isihd_system(problem, alpha)
        u0 = np.zeros(2 * n)
    elif kind == "explicit_hessian":
        vf = explicit_hessian_system(problem, alpha)
        u0 = np.zeros(2 * n)
    elif kind == "regularized_newton":
        vf = regularized_newton_system(problem, config.lam)
        u0 = np.zeros(n)
    elif kind == "combined":
        vf = combined_system(problem, alpha, config.lam)
        u0 = np.zeros(2 * n)
    else:  # bilevel
        vf = bilevel_system(problem, alpha)
        u0 = np.zeros(2 * n)

    traj = integrate(vf, u0, s0=config.s0, horizon=config.horizon,
                     h=config.step, record_every=config.record_every)
    report = theorem_suite(suite, traj, problem)
    value_name, res_name = _PLOT_CHANNELS[kind]
    return SweepPoint(label=label, alpha=alpha, suite=suite, report=report,
                      run=traj,
                      value_curve=(traj.times, traj.derived[value_name]),
                      residual_curve=(traj.times, traj.derived[res_name]))


def run_experiment(config: ExperimentConfig, jobs: int = 1) -> RunResult:
    """Execute every sweep point and collect artifacts in sweep order.

    Parameters
    ----------
    config : ExperimentConfig
        Validated experiment document.
    jobs : int
        Concurrent sweep points (each point is independent; outputs are
        per-point, so ordering and bytes do not depend on jobs).

    Returns a RunResult whose artifacts list holds (file name, text)
    pairs: one CSV and one report JSON per point, plus two SVG figures
    (value gaps, residual norms) when ``emit_svg`` is set.
    """
    if jobs < 1:
        raise ValueError(f"jobs must be >= 1, got {jobs}")
    problem = _build_problem(config)
    sweep: List[Optional[float]] = (
        [None] if config.kind in ALPHA_FREE_KINDS else list(config.alphas))

    if jobs == 1 or len(sweep) == 1:
        points = [_run_point(config, problem, a) for a in sweep]
    else:
        with ThreadPoolExecutor(max_workers=min(jobs, len(sweep))) as pool:
            futures = [pool.submit(_run_point, config, problem, a)
                       for a in sweep]
            points = [f.result() for f in futures]

    artifacts: List[Tuple[str, str]] = []
    for pt in points:
        artifacts.append((f"{pt.label}.csv", pt.run.to_csv()))
        artifacts.append((f"{pt.label}_report.json", pt.report.to_json() + "\n"))
    if config.emit_svg:
        discrete = config.kind == "prox_averaging"
        xlabel = "k" if discrete else ("t" if config.kind in
                                       ("regularized_newton", "bilevel") else "s")
        curve_label = (lambda pt: f"alpha={pt.alpha:g}" if pt.alpha is not None
                       else config.kind)
        values = [(curve_label(pt),) + pt.value_curve for pt in points]
        residuals = [(curve_label(pt),) + pt.residual_curve for pt in points]
        artifacts.append((
            f"{config.name}_{config.kind}_values.svg",
            line_plot(values, title=f"{config.name}: value gap",
                      xlabel=xlabel, ylabel="f - min", log_x=discrete)))
        artifacts.append((
            f"{config.name}_{config.kind}_residuals.svg",
            line_plot(residuals, title=f"{config.name}: residual norm",
                      xlabel=xlabel, ylabel="residual", log_x=discrete)))
    return RunResult(config=config, points=points, artifacts=artifacts)


# ---------------------------------------------------------------------------
# verification battery


@dataclass
class BatteryPoint:
    """A named suite run: builder returns (run, suite argument)."""

    suite: str
    label: str
    build: Callable[[], RateReport]


@dataclass
class BatteryRow:
    suite: str
    label: str
    passed: bool
    failed: List[str]
    notes: int


@dataclass
class BatteryResult:
    rows: List[BatteryRow]

    @property
    def all_passed(self) -> bool:
        return all(r.passed for r in self.rows)

    def table(self) -> str:
        width = max([len(r.label) for r in self.rows] + [5])
        lines = [f"{'suite':<16} {'run':<{width}} verdict",
                 "-" * (16 + 1 + width + 1 + 24)]
        for r in self.rows:
            state = "pass" if r.passed else "FAIL"
            detail = "" if r.passed else " [" + ", ".join(r.failed) + "]"
            lines.append(f"{r.suite:<16} {r.label:<{width}} {state}{detail}")
        good = sum(r.passed for r in self.rows)
        lines.append(f"{good}/{len(self.rows)} runs passed")
        return "\n".join(lines)


_BATTERY_ALPHAS = (1.001, 2.0, 3.0, 5.0)


def _quad_problem() -> SmoothProblem:
    return quadratic_problem(np.diag([1.0, 2.0, 5.0]),
                             np.array([1.0, 0.0, -2.0]))


def _ls_problem() -> SmoothProblem:
    rng = np.random.default_rng(8)
    return least_squares_problem(rng.normal(size=(20, 40)) / math.sqrt(20.0),
                                 rng.normal(size=20))


def _smooth_composite() -> CompositeProblem:
    rng = np.random.default_rng(3)
    A = rng.normal(size=(12, 8)) / math.sqrt(12.0)
    return composite_problem(A, rng.normal(size=12), l1_weight=0.0)


def _small_lasso() -> CompositeProblem:
    return lasso_instance(seed=5, m=12, n=8, sparsity=3)


def _staggered_l1_start(alpha: float, K: int, n_coords: int = 20) -> np.ndarray:
    # each coordinate's magnitude equals the cumulative prox threshold at a
    # marker step in [0.52K, 0.62K], so it dies exactly there and the fit
    # window keeps enough strictly positive samples at any alpha
    cum = prox_step_rule(alpha, K).values ** 2 / (alpha - 1.0) ** 2
    marks = (K * np.linspace(0.52, 0.62, n_coords)).astype(int)
    rng = np.random.default_rng(7)
    return rng.choice([-1.0, 1.0], size=n_coords) * cum[marks]


def _inertial_horizon(alpha: float) -> float:
    # below alpha=2 the damping divisor (alpha-1) makes the field stiff and
    # the hard checks reduce to start-bound ones, so short horizons suffice;
    # above alpha=3 the convergence surrogate needs the long tail
    if alpha < 2.0:
        return 3.0
    return 80.0 if alpha > 3.0 else 40.0


def _sd_point(make, label: str, horizon: float, h: float) -> BatteryPoint:
    def build() -> RateReport:
        p = make()
        traj = integrate(sd_field(p), np.ones(p.dim) * 2.0, s0=0.1,
                         horizon=horizon, h=h, record_every=10)
        return theorem_suite("thm1", traj)
    return BatteryPoint("thm1", label, build)


def _isihd_point(make, label: str, alpha: float) -> BatteryPoint:
    def build() -> RateReport:
        p = make()
        u0 = np.concatenate([np.ones(p.dim) * 0.5, np.zeros(p.dim)])
        traj = integrate(isihd_system(p, alpha), u0, s0=1.0,
                         horizon=_inertial_horizon(alpha), h=2e-3,
                         record_every=20)
        return theorem_suite("thm2", traj, p)
    return BatteryPoint("thm2", f"{label}_alpha_{alpha:g}", build)


def _hessian_point(make, label: str, alpha: float) -> BatteryPoint:
    def build() -> RateReport:
        p = make()
        u0 = np.concatenate([np.ones(p.dim) * 2.0, np.zeros(p.dim)])
        horizon = 80.0 if alpha > 3.0 else 30.0
        traj = integrate(explicit_hessian_system(p, alpha), u0, s0=1.0,
                         horizon=horizon, h=1e-3, record_every=10)
        return theorem_suite("thm3", traj, p)
    return BatteryPoint("thm3", f"{label}_alpha_{alpha:g}", build)


def _newton_point(make, label: str) -> BatteryPoint:
    def build() -> RateReport:
        # the flow contracts at rate sigma/(lam+sigma) per eigenmode, so the
        # smallest singular values set the settling horizon
        p = make()
        traj = integrate(regularized_newton_system(p, lam=1.0),
                         np.ones(p.dim) * 2.0, s0=0.5, horizon=90.0, h=1e-2,
                         record_every=4)
        return theorem_suite("thm4", traj)
    return BatteryPoint("thm4", label, build)


def _combined_point(make, label: str, alpha: float) -> BatteryPoint:
    def build() -> RateReport:
        p = make()
        y0 = np.ones(p.dim) * 2.0
        traj = integrate(combined_system(p, alpha, lam=1.0),
                         np.concatenate([y0, y0]), s0=1.0,
                         horizon=_inertial_horizon(alpha), h=2e-3,
                         record_every=10)
        return theorem_suite("thm5", traj, p)
    return BatteryPoint("thm5", f"{label}_alpha_{alpha:g}", build)


def _bilevel_point(make, label: str, alpha: float) -> BatteryPoint:
    def build() -> RateReport:
        p = make()
        u0 = np.concatenate([np.ones(p.dim) * 2.0, np.ones(p.dim) * -1.0])
        traj = integrate(bilevel_system(p, alpha), u0, s0=0.25, horizon=60.0,
                         h=2e-3, record_every=10)
        return theorem_suite("thm6", traj, p)
    return BatteryPoint("thm6", f"{label}_alpha_{alpha:g}", build)


def _prox_point(alpha: float) -> BatteryPoint:
    def build() -> RateReport:
        K = 600
        g = l1_regularizer(1.0, dim=20)
        log = prox_averaging(g, alpha, K, _staggered_l1_start(alpha, K),
                             fstar=0.0)
        return theorem_suite("thm_prox", log)
    return BatteryPoint("thm_prox", f"l1_staggered_alpha_{alpha:g}", build)


def _cocoercive_point(make, label: str, alpha: float, horizon: float) -> BatteryPoint:
    def build() -> RateReport:
        prob = make()
        M = forward_backward_operator(prob, prob.lam)
        rng = np.random.default_rng(0)
        y0 = rng.normal(size=M.dim)
        y1 = rng.normal(size=M.dim) * 0.1
        c0 = cocoercive_initial_constant(M, alpha, 1.0, y0, y1)
        traj = integrate(cocoercive_system(M, alpha, c0), y0, s0=1.0,
                         horizon=horizon, h=2e-3)
        return theorem_suite("thm_cocoercive", traj, M)
    return BatteryPoint("thm_cocoercive", f"{label}_alpha_{alpha:g}", build)


def battery_points(suites: Optional[Sequence[str]] = None) -> List[BatteryPoint]:
    """The default verification matrix, optionally filtered by suite name.

    Problems x alpha in {1.001, 2, 3, 5} per suite, with horizons long
    enough for each suite's hard checks; unknown suite names raise.
    """
    if suites:
        unknown = sorted(set(suites) - set(SUITE_NAMES))
        if unknown:
            raise ValueError(
                f"unknown suites: {', '.join(unknown)}; "
                f"choose from {', '.join(sorted(SUITE_NAMES))}")
    points: List[BatteryPoint] = []
    points += [_sd_point(_quad_problem, "quad", horizon=30.0, h=1e-3),
               _sd_point(_ls_problem, "least_squares", horizon=80.0, h=2e-3)]
    for make, label in ((_quad_problem, "quad"), (_ls_problem, "least_squares")):
        points += [_isihd_point(make, label, a) for a in _BATTERY_ALPHAS]
    for make, label in ((_quad_problem, "quad"), (_ls_problem, "least_squares")):
        points += [_hessian_point(make, label, a) for a in _BATTERY_ALPHAS]
    points += [_newton_point(_quad_problem, "quad"),
               _newton_point(_ls_problem, "least_squares")]
    for make, label in ((_quad_problem, "quad"), (_ls_problem, "least_squares")):
        points += [_combined_point(make, label, a) for a in _BATTERY_ALPHAS]
    points += [_bilevel_point(_quad_problem, "quad", a) for a in _BATTERY_ALPHAS]
    points += [_bilevel_point(_ls_problem, "least_squares", 3.0)]
    points += [_prox_point(a) for a in _BATTERY_ALPHAS]
    # the forcing term fades like 1/s^alpha but the contraction speed
    # drops with 1/(alpha+1), so larger alpha needs a longer settling run
    points += [_cocoercive_point(_smooth_composite, "smooth_composite", a,
                                 60.0 if a > 3.0 else 40.0)
               for a in _BATTERY_ALPHAS]
    points += [_cocoercive_point(_small_lasso, "lasso", 3.0, 40.0)]
    if suites:
        wanted = set(suites)
        points = [p for p in points if p.suite in wanted]
    return points


def verify_battery(suites: Optional[Sequence[str]] = None,
                   jobs: int = 1) -> BatteryResult:
    """Run the battery and summarize hard verdicts per point."""
    if jobs < 1:
        raise ValueError(f"jobs must be >= 1, got {jobs}")
    points = battery_points(suites)

    def row(point: BatteryPoint) -> BatteryRow:
        # a run that blows up is a failed verification, not a harness crash
        try:
            report = point.build()
        except (DivergenceError, StiffnessError) as err:
            return BatteryRow(suite=point.suite, label=point.label,
                              passed=False, failed=[type(err).__name__],
                              notes=0)
        failed = sorted(n for n, ok in report.verdicts.items() if not ok)
        return BatteryRow(suite=point.suite, label=point.label,
                          passed=report.passed, failed=failed,
                          notes=len(report.notes))

    if jobs == 1 or len(points) <= 1:
        rows = [row(p) for p in points]
    else:
        with ThreadPoolExecutor(max_workers=min(jobs, len(points))) as pool:
            futures = [pool.submit(row, p) for p in points]
            rows = [f.result() for f in futures]
    return BatteryResult(rows=rows)
