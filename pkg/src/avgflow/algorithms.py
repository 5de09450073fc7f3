"""Discrete schemes: accelerated gradient, proximal averaging, and
forward-backward iterations, with step-size bookkeeping and the energy
certificate of the accelerated scheme.

Iterate logs keep every series aligned on k = 0..K; entries that are
undefined for small k (the energy needs k >= 2, the extrapolated point
needs k >= 1) are NaN in memory and empty cells in CSV exports.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .problems import CompositeProblem, ProxFriendly, SmoothProblem, forward_backward_operator

Array = np.ndarray


@dataclass
class StepSequence:
    """Proximal step sizes s_0..s_K grown by the quadratic rule."""

    alpha: float
    values: Array

    def __len__(self) -> int:
        return len(self.values)


def prox_step_rule(alpha: float, K: int) -> StepSequence:
    """s_0 = 0, s_{k+1} = ((alpha-1) + sqrt((alpha-1)^2 + 4 s_k^2)) / 2.

    The rule is the positive root of s_{k+1}^2 - (alpha-1) s_{k+1} = s_k^2,
    which telescopes to s_k^2 = (alpha-1) * sum_{i<=k} s_i and grows
    linearly: s_k >= (k+1)(alpha-1)/2 for k >= 1 (equality at k = 1).
    """
    if alpha <= 1.0:
        raise ValueError(f"alpha must exceed 1, got {alpha}")
    if K < 0:
        raise ValueError(f"K must be nonnegative, got {K}")
    a = alpha - 1.0
    s = np.empty(K + 1)
    s[0] = 0.0
    for k in range(K):
        s[k + 1] = 0.5 * (a + math.sqrt(a * a + 4.0 * s[k] * s[k]))
    return StepSequence(alpha=alpha, values=s)


def nesterov_step_rule(count: int) -> Array:
    """t_1 = 1, t_{k+1} = (1 + sqrt(1 + 4 t_k^2)) / 2; returns t_1..t_count."""
    if count < 1:
        raise ValueError(f"count must be positive, got {count}")
    t = np.empty(count)
    t[0] = 1.0
    for i in range(count - 1):
        t[i + 1] = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t[i] * t[i]))
    return t


@dataclass
class IterateLog:
    """Aligned per-iteration series of a discrete scheme.

    ``x``/``y`` hold iterates as rows for k = 0..K; scalar series are NaN
    where a quantity is undefined.  ``steps`` holds t_k (gradient schemes)
    or s_k (proximal schemes).  ``fstar`` is the optimal value used for
    gap columns, when known.
    """

    kind: str
    x: Array
    y: Array
    f_x: Array
    f_y: Array
    res_norm: Array
    steps: Array
    energy: Array
    fstar: Optional[float] = None
    params: dict = field(default_factory=dict)

    @property
    def iterations(self) -> int:
        return len(self.f_x) - 1

    def to_csv(self) -> str:
        """CSV text with header ``k,s_k,f_y_gap,f_x_gap,res_norm,E_k``.

        NaN entries become empty cells; floats carry 17 significant digits.
        """
        off = self.fstar if self.fstar is not None else 0.0

        def cell(v: float) -> str:
            return "" if not np.isfinite(v) else f"{v:.17g}"

        lines = ["k,s_k,f_y_gap,f_x_gap,res_norm,E_k"]
        for k in range(len(self.f_x)):
            lines.append(",".join([
                str(k),
                cell(self.steps[k]),
                cell(self.f_y[k] - off if np.isfinite(self.f_y[k]) else np.nan),
                cell(self.f_x[k] - off if np.isfinite(self.f_x[k]) else np.nan),
                cell(self.res_norm[k]),
                cell(self.energy[k]),
            ]))
        return "\n".join(lines) + "\n"

    def write_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_csv())


def nesterov(problem: SmoothProblem, lam: float, K: int, x0: Array) -> IterateLog:
    """Accelerated gradient scheme with the classical step-size rule.

    y_k = x_k + ((t_k - 1)/t_{k+1}) (x_k - x_{k-1}), x_{k+1} = y_k - lam
    grad f(y_k), from x_0 = x_1 = x0.  Requires 0 < lam <= 1/L; larger
    steps void the theory and are rejected.
    """
    L = problem.grad_lipschitz
    if L is None:
        raise ValueError("problem must report a gradient Lipschitz constant")
    if not (0.0 < lam <= 1.0 / L + 1e-15):
        raise ValueError(f"step lam={lam} outside (0, 1/L] with 1/L={1.0 / L:.6g}")
    if K < 1:
        raise ValueError(f"K must be positive, got {K}")
    x0 = np.asarray(x0, dtype=float)
    n = x0.size
    t = nesterov_step_rule(K + 1)  # t_1..t_{K+1}

    x = np.full((K + 1, n), np.nan)
    y = np.full((K + 1, n), np.nan)
    f_x = np.full(K + 1, np.nan)
    f_y = np.full(K + 1, np.nan)
    res = np.full(K + 1, np.nan)
    steps = np.full(K + 1, np.nan)
    x[0] = x0
    x[1] = x0
    f_x[0] = problem.value(x0)
    f_x[1] = f_x[0]
    steps[1:] = t[:K]

    for k in range(1, K + 1):
        a_k = (t[k - 1] - 1.0) / t[k]
        y[k] = x[k] + a_k * (x[k] - x[k - 1])
        g = problem.gradient(y[k])
        f_y[k] = problem.value(y[k])
        res[k] = float(np.linalg.norm(g))
        if k < K:
            x[k + 1] = y[k] - lam * g
            f_x[k + 1] = problem.value(x[k + 1])

    log = IterateLog(
        kind="nesterov",
        x=x, y=y, f_x=f_x, f_y=f_y, res_norm=res, steps=steps,
        energy=np.full(K + 1, np.nan),
        fstar=problem.min_value,
        params={"lam": lam, "L": L},
    )
    if problem.minimizer is not None and problem.min_value is not None:
        log.energy = ravine_energy(log, problem, lam)
    return log


def ravine_energy(log: IterateLog, problem: SmoothProblem, lam: float,
                  z_star: Optional[Array] = None) -> Array:
    """Lyapunov energy of the accelerated scheme, defined for k >= 2.

    E_k = t_k^2 (f(y_{k-1}) - f* - lam (1 - L lam / 2) ||grad f(y_{k-1})||^2)
        + (1/(2 lam)) || (t_k - 1)(x_k - x_{k-1}) + x_k - z* ||^2.

    Nonnegative, and nonincreasing when the step-size rule holds with
    equality and lam <= 1/L.
    """
    if z_star is None:
        z_star = problem.minimizer
    if z_star is None:
        raise ValueError("ravine energy needs a known minimizer")
    fstar = problem.min_value
    if fstar is None:
        raise ValueError("ravine energy needs the optimal value")
    L = problem.grad_lipschitz
    if L is None:
        raise ValueError("ravine energy needs the Lipschitz constant")
    K = log.iterations
    t = log.steps
    E = np.full(K + 1, np.nan)
    for k in range(2, K + 1):
        gap = log.f_y[k - 1] - fstar - lam * (1.0 - L * lam / 2.0) * log.res_norm[k - 1] ** 2
        drift = (t[k] - 1.0) * (log.x[k] - log.x[k - 1]) + log.x[k] - z_star
        E[k] = t[k] ** 2 * gap + np.dot(drift, drift) / (2.0 * lam)
    return E


def ravine_weights(alphas) -> Array:
    """Convex weights expressing x_m as a combination of y_1..y_m.

    ``alphas`` lists the extrapolation coefficients alpha_1..alpha_m.
    Derived by unrolling x_j = (y_j + alpha_j x_{j-1}) / (1 + alpha_j);
    the base case folds the x_0 mass into y_1 (x_0 = x_1 = y_1), so the
    weights sum to 1 for any nonnegative coefficients, and for the
    standard rule (alpha_1 = 0) they match the closed product formula.
    """
    alphas = np.asarray(alphas, dtype=float)
    if alphas.ndim != 1 or alphas.size == 0:
        raise ValueError("alphas must be a nonempty 1-d sequence")
    if np.any(alphas < 0):
        raise ValueError("extrapolation coefficients must be nonnegative")
    theta = np.array([1.0])
    for a in alphas[1:]:
        theta = np.append(theta * (a / (1.0 + a)), 1.0 / (1.0 + a))
    return theta


def prox_averaging(g: ProxFriendly, alpha: float, K: int, y0: Array,
                   x0: Optional[Array] = None, fstar: Optional[float] = None,
                   require_equal_start: bool = False) -> IterateLog:
    """Proximal iteration with growing steps plus running weighted average.

    y_{k+1} = prox(y_k, s_{k+1}/(alpha-1)),
    x_{k+1} = (1 - (alpha-1)/s_{k+1}) x_k + ((alpha-1)/s_{k+1}) y_{k+1},
    with s_k from :func:`prox_step_rule`.  Since s_1 = alpha - 1, the first
    averaging step gives x_1 = y_1 regardless of x0.  ``res_norm`` holds
    the implicit subgradient norms ||eta_{k+1}|| =
    ((alpha-1)/s_{k+1}) ||y_k - y_{k+1}||.
    """
    if K < 1:
        raise ValueError(f"K must be positive, got {K}")
    y0 = np.asarray(y0, dtype=float)
    if x0 is None:
        x0 = y0.copy()
    x0 = np.asarray(x0, dtype=float)
    if require_equal_start and not np.array_equal(x0, y0):
        raise ValueError("equal-start mode requires x0 == y0")
    seq = prox_step_rule(alpha, K)
    s = seq.values
    n = y0.size

    x = np.empty((K + 1, n))
    y = np.empty((K + 1, n))
    f_x = np.empty(K + 1)
    f_y = np.empty(K + 1)
    res = np.full(K + 1, np.nan)
    x[0], y[0] = x0, y0
    f_x[0], f_y[0] = g.value(x0), g.value(y0)

    for k in range(K):
        theta = s[k + 1] / (alpha - 1.0)
        y[k + 1] = g.prox(y[k], theta)
        w = (alpha - 1.0) / s[k + 1]
        x[k + 1] = (1.0 - w) * x[k] + w * y[k + 1]
        res[k + 1] = w * float(np.linalg.norm(y[k] - y[k + 1]))
        f_x[k + 1] = g.value(x[k + 1])
        f_y[k + 1] = g.value(y[k + 1])

    return IterateLog(
        kind="prox_averaging",
        x=x, y=y, f_x=f_x, f_y=f_y, res_norm=res, steps=s,
        energy=np.full(K + 1, np.nan),
        fstar=fstar,
        params={"alpha": alpha},
    )


def forward_backward(problem: CompositeProblem, mu: float, K: int, y0: Array) -> IterateLog:
    """Forward-backward iteration y_{k+1} = y_k - mu M(y_k).

    ``res_norm`` records the operator norms ||M(y_k)||; the x series
    coincides with y (no averaging).  The optimal value comes from the
    problem's long-run oracle.
    """
    if K < 1:
        raise ValueError(f"K must be positive, got {K}")
    M = forward_backward_operator(problem, mu)
    y0 = np.asarray(y0, dtype=float)
    n = y0.size
    y = np.empty((K + 1, n))
    f_y = np.empty(K + 1)
    res = np.empty(K + 1)
    y[0] = y0
    for k in range(K + 1):
        f_y[k] = problem.value(y[k])
        m = M.apply(y[k])
        res[k] = float(np.linalg.norm(m))
        if k < K:
            y[k + 1] = y[k] - mu * m
    return IterateLog(
        kind="forward_backward",
        x=y.copy(), y=y, f_x=f_y.copy(), f_y=f_y, res_norm=res,
        steps=np.full(K + 1, mu),
        energy=np.full(K + 1, np.nan),
        fstar=problem.min_value(),
        params={"mu": mu, "rho": M.rho},
    )
