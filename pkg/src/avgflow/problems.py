"""Convex problems, prox-friendly regularizers, and cocoercive operators.

Problem objects bundle callables with metadata (dimension, gradient
Lipschitz constant, optimal value when known) so continuous flows,
discrete schemes, and the diagnostic suites can share instances.  All
arrays are dense float64 and desk scale (dimension at most a few
hundred).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

Array = np.ndarray


@dataclass
class SmoothProblem:
    """Differentiable convex objective on R^dim.

    ``min_value`` and ``minimizer`` are populated when the constructor can
    compute them exactly; monitors treat ``None`` as "unknown".
    """

    dim: int
    value: Callable[[Array], float]
    gradient: Callable[[Array], Array]
    hess_vec: Optional[Callable[[Array, Array], Array]] = None
    min_value: Optional[float] = None
    minimizer: Optional[Array] = None
    grad_lipschitz: Optional[float] = None
    meta: dict = field(default_factory=dict)


@dataclass
class ProxFriendly:
    """Convex function accessed through its value and proximal map.

    ``value`` may return ``inf`` outside the domain.  ``prox(point, theta)``
    returns ``argmin_u theta*value(u) + 0.5*||u - point||^2`` and must be
    exact up to solver tolerance for theta > 0.
    """

    dim: int
    value: Callable[[Array], float]
    prox: Callable[[Array, float], Array]
    meta: dict = field(default_factory=dict)


@dataclass
class CompositeProblem:
    """Least squares plus a prox-friendly regularizer.

    Objective: ``0.5*||A y - b||^2 + g(y)``.  ``lam`` is ``1/||A||^2``, the
    cocoercivity scale of the smooth gradient.
    """

    A: Array
    b: Array
    regularizer: ProxFriendly
    smooth: SmoothProblem
    lam: float
    meta: dict = field(default_factory=dict)
    _min_value_cache: Optional[float] = field(default=None, repr=False)

    @property
    def dim(self) -> int:
        return int(self.A.shape[1])

    def value(self, y: Array) -> float:
        return self.smooth.value(y) + self.regularizer.value(y)

    def min_value(self) -> float:
        """Optimal value, computed once by a long forward-backward run."""
        if self._min_value_cache is None:
            self._min_value_cache = composite_min_value(self)
        return self._min_value_cache


@dataclass
class CocoerciveOperator:
    """Operator M with <M(x)-M(y), x-y> >= rho * ||M(x)-M(y)||^2."""

    dim: int
    apply: Callable[[Array], Array]
    rho: float
    meta: dict = field(default_factory=dict)


def soft_threshold(v: Array, t: float) -> Array:
    """Componentwise shrinkage: sign(v) * max(|v| - t, 0)."""
    return np.sign(v) * np.maximum(np.abs(v) - t, 0.0)


def finite_difference_gradient(value: Callable[[Array], float], x: Array,
                               eps: float = 1e-6) -> Array:
    """Central-difference gradient, used as the derivative oracle in tests."""
    x = np.asarray(x, dtype=float)
    g = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = eps
        g[i] = (value(x + e) - value(x - e)) / (2.0 * eps)
    return g


def operator_norm_squared(A: Array, iters: int = 50, tol: float = 1e-10) -> float:
    """Largest eigenvalue of A^T A (i.e. ||A||^2) by power iteration.

    Runs at most ``iters`` Rayleigh-quotient updates and stops early once
    the estimate changes by less than ``tol`` relatively.
    """
    A = np.asarray(A, dtype=float)
    n = A.shape[1]
    rng = np.random.default_rng(0)
    v = rng.standard_normal(n)
    v /= np.linalg.norm(v)
    est = 0.0
    for _ in range(iters):
        w = A.T @ (A @ v)
        norm = float(np.linalg.norm(w))
        if norm == 0.0:
            return 0.0
        v = w / norm
        new_est = float(v @ (A.T @ (A @ v)))
        if abs(new_est - est) <= tol * max(1.0, abs(new_est)):
            return new_est
        est = new_est
    return est


def quadratic_problem(Q: Array, c: Array) -> SmoothProblem:
    """Quadratic objective f(x) = 0.5 x^T Q x - c^T x with Q symmetric PSD.

    The minimizer and optimal value are filled in when Q is invertible.
    """
    Q = np.asarray(Q, dtype=float)
    c = np.asarray(c, dtype=float)
    if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
        raise ValueError(f"Q must be square, got shape {Q.shape}")
    if c.shape != (Q.shape[0],):
        raise ValueError(f"c has shape {c.shape}, expected ({Q.shape[0]},)")
    scale = max(1.0, float(np.abs(Q).max()))
    if float(np.abs(Q - Q.T).max()) > 1e-12 * scale:
        raise ValueError("Q must be symmetric")
    eigs = np.linalg.eigvalsh(Q)
    if eigs[0] < -1e-10 * max(1.0, eigs[-1]):
        raise ValueError("Q must be positive semidefinite")
    n = Q.shape[0]

    def value(x: Array) -> float:
        return float(0.5 * x @ (Q @ x) - c @ x)

    minimizer = None
    min_value = None
    if eigs[0] > 1e-12 * max(1.0, eigs[-1]):
        minimizer = np.linalg.solve(Q, c)
        min_value = float(0.5 * minimizer @ (Q @ minimizer) - c @ minimizer)

    return SmoothProblem(
        dim=n,
        value=value,
        gradient=lambda x: Q @ x - c,
        hess_vec=lambda x, v: Q @ v,
        min_value=min_value,
        minimizer=minimizer,
        grad_lipschitz=float(eigs[-1]),
        meta={"source": {"type": "quadratic", "A": Q.tolist(), "b": c.tolist()},
              "hessian": Q},
    )


def least_squares_problem(A: Array, b: Array) -> SmoothProblem:
    """Least squares f(y) = 0.5 ||A y - b||^2.

    The reported gradient Lipschitz constant is ||A||^2 from power
    iteration; the minimizer is the minimum-norm least squares solution.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    if A.ndim != 2:
        raise ValueError(f"A must be a matrix, got ndim={A.ndim}")
    if b.shape != (A.shape[0],):
        raise ValueError(f"b has shape {b.shape}, expected ({A.shape[0]},)")
    n = A.shape[1]
    x_star = np.linalg.lstsq(A, b, rcond=None)[0]
    r_star = A @ x_star - b

    return SmoothProblem(
        dim=n,
        value=lambda y: float(0.5 * np.dot(A @ y - b, A @ y - b)),
        gradient=lambda y: A.T @ (A @ y - b),
        hess_vec=lambda y, v: A.T @ (A @ v),
        min_value=float(0.5 * np.dot(r_star, r_star)),
        minimizer=x_star,
        grad_lipschitz=operator_norm_squared(A),
        meta={"source": {"type": "least_squares", "A": A.tolist(), "b": b.tolist()},
              "hessian": A.T @ A},
    )


def l1_regularizer(weight: float, dim: int = 0) -> ProxFriendly:
    """Weighted l1 norm g(x) = weight * ||x||_1 with soft-threshold prox."""
    if weight < 0:
        raise ValueError(f"l1 weight must be nonnegative, got {weight}")

    return ProxFriendly(
        dim=dim,
        value=lambda x: float(weight * np.abs(x).sum()),
        prox=lambda point, theta: soft_threshold(np.asarray(point, dtype=float),
                                                 theta * weight),
        meta={"kind": "l1", "weight": float(weight)},
    )


def composite_problem(A: Array, b: Array, l1_weight: float,
                      meta: Optional[dict] = None) -> CompositeProblem:
    """Assemble the l1-regularized least squares problem for (A, b)."""
    smooth = least_squares_problem(A, b)
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    L = smooth.grad_lipschitz
    if L is None or L <= 0:
        raise ValueError("design matrix must be nonzero")
    return CompositeProblem(
        A=A,
        b=b,
        regularizer=l1_regularizer(l1_weight, dim=A.shape[1]),
        smooth=smooth,
        lam=1.0 / L,
        meta=meta or {"source": {"type": "lasso", "A": A.tolist(),
                                 "b": b.tolist(), "l1_weight": float(l1_weight)}},
    )


def lasso_instance(seed: int = 42, m: int = 50, n: int = 100,
                   l1_weight: float = 0.1, noise: float = 0.01,
                   sparsity: int = 10) -> CompositeProblem:
    """Random sparse-recovery instance, reproducible from a 64-bit seed.

    Generation, in order, from ``numpy.random.default_rng(seed)`` (PCG64):
    A has i.i.d. N(0,1)/sqrt(m) entries; a support of ``sparsity``
    coordinates is drawn without replacement; the signal has i.i.d. N(0,1)
    values there; b = A @ signal + noise * N(0,I).
    """
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((m, n)) / math.sqrt(m)
    support = rng.choice(n, size=sparsity, replace=False)
    signal = np.zeros(n)
    signal[support] = rng.standard_normal(sparsity)
    b = A @ signal + noise * rng.standard_normal(m)
    source = {"type": "lasso", "seed": int(seed), "m": int(m), "n": int(n),
              "l1_weight": float(l1_weight), "noise": float(noise),
              "sparsity": int(sparsity)}
    return composite_problem(A, b, l1_weight, meta={"source": source})


def forward_backward_operator(problem: CompositeProblem, mu: float) -> CocoerciveOperator:
    """Forward-backward residual operator of a composite problem.

    M(y) = (y - prox_{mu g}(y - mu * A^T(A y - b))) / mu.  Its zeros are
    exactly the composite minimizers, and it is rho-cocoercive with
    rho = mu * (1 - mu / (4 lam)) for mu in (0, 2 lam), lam = 1/||A||^2.
    """
    lam = problem.lam
    if not (0.0 < mu < 2.0 * lam):
        raise ValueError(f"mu must lie in (0, {2.0 * lam}), got {mu}")
    grad = problem.smooth.gradient
    prox = problem.regularizer.prox

    def apply(y: Array) -> Array:
        return (y - prox(y - mu * grad(y), mu)) / mu

    smooth = problem.regularizer.meta.get("weight") == 0.0
    return CocoerciveOperator(
        dim=problem.dim,
        apply=apply,
        rho=mu * (1.0 - mu / (4.0 * lam)),
        meta={"kind": "forward_backward", "mu": float(mu), "lam": float(lam),
              "smooth": smooth},
    )


def moreau_point(problem: CompositeProblem, mu: float, y: Array) -> Array:
    """Forward-backward image y_W = prox_{mu g}(y - mu * A^T(A y - b))."""
    if mu <= 0:
        raise ValueError(f"mu must be positive, got {mu}")
    return problem.regularizer.prox(y - mu * problem.smooth.gradient(y), mu)


def moreau_value(problem: CompositeProblem, mu: float, y: Array) -> float:
    """Composite objective evaluated at the forward-backward image of y.

    Viewing the forward-backward map through the Moreau envelope in the
    metric (1/mu) I - A^T A, this surrogate has the same infimum and the
    same minimizers as the composite objective itself.
    """
    return problem.value(moreau_point(problem, mu, y))


def composite_min_value(problem: CompositeProblem, max_iters: int = 10 ** 6) -> float:
    """Optimal value oracle: forward-backward iteration at step mu = lam.

    Runs until the fixed-point residual is at rounding scale (or the
    iteration cap, whichever comes first) and returns the objective at the
    final point.
    """
    mu = problem.lam
    y = np.zeros(problem.dim)
    for _ in range(max_iters):
        y_next = moreau_point(problem, mu, y)
        if np.linalg.norm(y_next - y) <= 1e-15 * (1.0 + np.linalg.norm(y)):
            y = y_next
            break
        y = y_next
    return problem.value(y)


def composite_minimizer(problem: CompositeProblem, max_iters: int = 10 ** 6) -> Array:
    """A minimizer of the composite objective, by the same long FB run."""
    mu = problem.lam
    y = np.zeros(problem.dim)
    for _ in range(max_iters):
        y_next = moreau_point(problem, mu, y)
        if np.linalg.norm(y_next - y) <= 1e-15 * (1.0 + np.linalg.norm(y)):
            return y_next
        y = y_next
    return y


def composite_prox(problem: CompositeProblem, point: Array, theta: float,
                   tol: float = 1e-13, max_sweeps: int = 20000) -> Array:
    """Proximal map of the full composite objective.

    Solves ``argmin_u theta*(0.5||Au-b||^2 + w||u||_1) + 0.5||u-point||^2``
    by cyclic coordinate descent on the strongly convex subproblem,
    warm-started at ``point``.  Termination is by the KKT residual, so the
    output is exact to solver tolerance (required by the samplewise
    monotonicity of the proximal-averaging scheme).
    """
    if theta <= 0:
        raise ValueError(f"theta must be positive, got {theta}")
    A, b = problem.A, problem.b
    w = problem.regularizer.meta.get("weight")
    if w is None:
        raise ValueError("composite_prox needs an l1 regularizer")
    n = problem.dim
    M = theta * (A.T @ A) + np.eye(n)
    q = np.asarray(point, dtype=float) + theta * (A.T @ b)
    tau = theta * w
    diag = np.diag(M).copy()
    u = np.asarray(point, dtype=float).copy()
    r = M @ u
    kkt_scale = max(1.0, float(np.abs(q).max()), tau)
    for _ in range(max_sweeps):
        for i in range(n):
            ui_old = u[i]
            z = q[i] - r[i] + diag[i] * ui_old
            ui_new = soft_threshold(np.array([z]), tau)[0] / diag[i]
            if ui_new != ui_old:
                r += M[:, i] * (ui_new - ui_old)
                u[i] = ui_new
        grad = r - q
        viol = np.where(u != 0.0,
                        np.abs(grad + tau * np.sign(u)),
                        np.maximum(np.abs(grad) - tau, 0.0))
        if float(viol.max()) <= tol * kkt_scale:
            return u
    raise RuntimeError("composite prox did not reach KKT tolerance")


def composite_prox_friendly(problem: CompositeProblem) -> ProxFriendly:
    """Expose a composite problem through the prox-friendly interface."""
    return ProxFriendly(
        dim=problem.dim,
        value=problem.value,
        prox=lambda point, theta: composite_prox(problem, point, theta),
        meta={"kind": "composite", "source": problem.meta.get("source")},
    )


def problem_to_json(problem) -> dict:
    """Serializable description; inverse of :func:`problem_from_json`."""
    source = problem.meta.get("source")
    if source is None:
        raise ValueError("problem carries no serializable source")
    return dict(source)


def problem_from_json(doc: dict):
    """Rebuild a problem from its JSON description.

    Accepted forms: ``{"type": "quadratic", "A": [[...]], "b": [...]}``
    (A is the symmetric matrix, b the linear term), ``{"type":
    "least_squares", "A": ..., "b": ...}``, and ``{"type": "lasso", ...}``
    with either inline A/b/l1_weight or generator parameters
    (seed/m/n/l1_weight/noise/sparsity).  Seeded generation is
    bit-reproducible, so round trips reproduce arrays exactly.
    """
    if "type" not in doc:
        raise ValueError("problem description needs a 'type'")
    kind = doc["type"]
    if kind == "quadratic":
        return quadratic_problem(np.asarray(doc["A"], dtype=float),
                                 np.asarray(doc["b"], dtype=float))
    if kind == "least_squares":
        return least_squares_problem(np.asarray(doc["A"], dtype=float),
                                     np.asarray(doc["b"], dtype=float))
    if kind == "lasso":
        if "A" in doc:
            return composite_problem(np.asarray(doc["A"], dtype=float),
                                     np.asarray(doc["b"], dtype=float),
                                     float(doc.get("l1_weight", 0.1)))
        return lasso_instance(seed=int(doc.get("seed", 42)),
                              m=int(doc.get("m", 50)),
                              n=int(doc.get("n", 100)),
                              l1_weight=float(doc.get("l1_weight", 0.1)),
                              noise=float(doc.get("noise", 0.01)),
                              sparsity=int(doc.get("sparsity", 10)))
    raise ValueError(f"unknown problem type {kind!r}")
