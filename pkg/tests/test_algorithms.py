"""Tests for discrete schemes: step rules, accelerated gradient with its
energy certificate, averaging weights, proximal averaging, forward-backward.

Expected values are hand-computed closed forms or independently derived
identities; stochastic checks use seeded generators.
"""

import csv
import io
import math

import numpy as np
import pytest

from avgflow.algorithms import (
    IterateLog,
    forward_backward,
    nesterov,
    nesterov_step_rule,
    prox_averaging,
    prox_step_rule,
    ravine_energy,
    ravine_weights,
)
from avgflow.problems import (
    SmoothProblem,
    composite_problem,
    l1_regularizer,
    lasso_instance,
    quadratic_problem,
)
from avgflow.transforms import discrete_weighted_average

GOLDEN = math.sqrt(5.0)


def test_nesterov_step_rule_hand_values():
    t = nesterov_step_rule(3)
    assert t[0] == 1.0
    assert t[1] == pytest.approx((1.0 + GOLDEN) / 2.0, rel=1e-15)
    t2 = (1.0 + GOLDEN) / 2.0
    assert t[2] == pytest.approx((1.0 + math.sqrt(1.0 + 4.0 * t2 * t2)) / 2.0, rel=1e-15)


def test_nesterov_step_rule_growth():
    t = nesterov_step_rule(500)
    k = np.arange(1, 501)
    assert np.all(t >= (k + 1) / 2.0 - 1e-12)
    assert np.all(np.diff(t) > 0)


def test_nesterov_step_rule_root_identity():
    t = nesterov_step_rule(10_000)
    res = t[1:] ** 2 - t[1:] - t[:-1] ** 2
    assert np.max(np.abs(res) / t[1:] ** 2) < 1e-12


def test_nesterov_step_rule_rejects():
    with pytest.raises(ValueError):
        nesterov_step_rule(0)


def test_nesterov_identity_hessian_one_step():
    # f = ||x||^2/2, lam = 1/L = 1: x_2 = y_1 - grad f(y_1) = 0 from any start
    p = quadratic_problem(np.eye(3), np.zeros(3))
    log = nesterov(p, 1.0, K=3, x0=np.array([2.0, -1.0, 5.0]))
    assert np.allclose(log.x[2], 0.0, atol=1e-15)


def test_prox_step_rule_hand_values():
    s = prox_step_rule(3.0, 3).values
    assert s[0] == 0.0
    assert s[1] == pytest.approx(2.0, rel=1e-15)
    assert s[2] == pytest.approx(1.0 + GOLDEN, rel=1e-15)
    s2 = 1.0 + GOLDEN
    assert s[3] == pytest.approx(1.0 + math.sqrt(1.0 + s2 * s2), rel=1e-14)


@pytest.mark.parametrize("alpha", [1.001, 2.0, 3.0, 5.0])
def test_prox_step_rule_identities(alpha):
    K = 10_000
    s = prox_step_rule(alpha, K).values
    a = alpha - 1.0
    # recurrence residual, relative to s_{k+1}^2
    res = s[1:] ** 2 - a * s[1:] - s[:-1] ** 2
    assert np.max(np.abs(res) / s[1:] ** 2) < 1e-10
    # telescoped square-sum identity
    sums = np.cumsum(s)
    rel = np.abs(s[1:] ** 2 - a * sums[1:]) / s[1:] ** 2
    assert np.max(rel) < 1e-8
    # linear growth lower bound, k >= 1 (equality at k = 1)
    k = np.arange(1, K + 1)
    assert np.all(s[1:] >= (k + 1) * a / 2.0 - 1e-12 * (k + 1) * a)
    assert s[1] == pytest.approx(a, rel=1e-15)


def test_prox_step_rule_rejects():
    with pytest.raises(ValueError):
        prox_step_rule(1.0, 10)
    with pytest.raises(ValueError):
        prox_step_rule(2.0, -1)


def quadratic_prox_problem(dim):
    """g(x) = ||x||^2 / 2 with prox(v, theta) = v / (1 + theta)."""
    from avgflow.problems import ProxFriendly
    return ProxFriendly(
        dim=dim,
        value=lambda z: 0.5 * float(np.dot(z, z)),
        prox=lambda v, theta: v / (1.0 + theta),
    )


def test_prox_averaging_quadratic_closed_form():
    # for g = ||.||^2/2 the prox chain is y_{k+1} = y_k / (1 + s_{k+1}/(alpha-1))
    alpha = 3.0
    g = quadratic_prox_problem(1)
    y0 = np.array([1.0])
    log = prox_averaging(g, alpha, 2, y0, fstar=0.0)
    s2 = 1.0 + GOLDEN
    assert log.y[1][0] == pytest.approx(0.5, abs=1e-15)
    assert log.y[2][0] == pytest.approx(0.5 / (1.0 + s2 / 2.0), rel=1e-14)
    # s_1 = alpha - 1 forces x_1 = y_1 even from a different x0
    log2 = prox_averaging(g, alpha, 1, y0, x0=np.array([7.0]))
    assert log2.x[1][0] == log2.y[1][0]
    x2 = (1.0 - 2.0 / s2) * log.x[1] + (2.0 / s2) * log.y[2]
    assert log.x[2][0] == pytest.approx(x2[0], rel=1e-14)


def test_prox_averaging_x_is_step_weighted_mean_of_y():
    rng = np.random.default_rng(3)
    g = quadratic_prox_problem(4)
    y0 = rng.normal(size=4)
    alpha = 2.5
    log = prox_averaging(g, alpha, 60, y0)
    s = log.steps
    for k in (1, 7, 30, 60):
        want = discrete_weighted_average(log.y[1:k + 1], s[1:k + 1])
        assert np.allclose(log.x[k], want, atol=1e-12)


def test_prox_averaging_monotonicity_and_bound():
    rng = np.random.default_rng(11)
    g = l1_regularizer(0.3, dim=20)
    y0 = rng.normal(size=20) * 5.0
    alpha = 3.0
    K = 400
    log = prox_averaging(g, alpha, K, y0, fstar=0.0)
    slack = 1e-12 * (1.0 + abs(log.f_y[0]))
    assert np.all(np.diff(log.f_y) <= slack)
    assert np.all(np.diff(log.res_norm[1:]) <= 1e-12 * (1.0 + log.res_norm[1]))
    # telescoped value bound: sum_k s_k (f(y_k) - f*) <= (alpha-1)/2 ||y0 - z*||^2
    s = log.steps
    lhs = float(np.sum(s[1:] * log.f_y[1:]))
    rhs = 0.5 * (alpha - 1.0) * float(np.dot(y0, y0))
    assert lhs <= rhs * (1.0 + 1e-12)
    # averaged-value bound via Jensen on the step-weighted mean:
    # f(x_k) - f* <= (alpha-1)^2 ||y0 - z*||^2 / (2 s_k^2)
    gaps = log.f_x[1:]
    assert np.all(gaps <= 0.5 * (alpha - 1.0) ** 2 * np.dot(y0, y0) / s[1:] ** 2 + 1e-12)


def test_prox_averaging_equal_start_flag():
    g = quadratic_prox_problem(2)
    with pytest.raises(ValueError):
        prox_averaging(g, 2.0, 5, np.ones(2), x0=np.zeros(2), require_equal_start=True)
    log = prox_averaging(g, 2.0, 5, np.ones(2), require_equal_start=True)
    assert log.iterations == 5


def test_nesterov_rejects_bad_steps():
    p = quadratic_problem(np.diag([1.0, 4.0]), np.zeros(2))
    with pytest.raises(ValueError):
        nesterov(p, lam=0.3, K=10, x0=np.ones(2))  # 1/L = 0.25
    with pytest.raises(ValueError):
        nesterov(p, lam=-0.1, K=10, x0=np.ones(2))
    with pytest.raises(ValueError):
        nesterov(p, lam=0.1, K=0, x0=np.ones(2))
    bare = SmoothProblem(dim=2, value=p.value, gradient=p.gradient)
    with pytest.raises(ValueError):
        nesterov(bare, lam=0.1, K=10, x0=np.ones(2))


def random_quadratic(rng, dim):
    B = rng.normal(size=(dim, dim))
    Q = B @ B.T + 0.5 * np.eye(dim)
    c = rng.normal(size=dim)
    return quadratic_problem(Q, c)


@pytest.mark.parametrize("seed", [0, 1])
def test_nesterov_energy_certificate(seed):
    rng = np.random.default_rng(seed)
    p = random_quadratic(rng, 5)
    L = p.grad_lipschitz
    lam = 0.9 / L
    K = 200
    log = nesterov(p, lam, K, rng.normal(size=5))
    E = log.energy
    assert np.all(E[2:] >= -1e-10 * max(1.0, E[2]))
    # descent with the certified per-step decrement
    t = log.steps
    dec = 0.5 * lam * (1.0 - L * lam) * t[3:] ** 2 * log.res_norm[2:K] ** 2
    assert np.all(E[3:] <= E[2:K] - dec + 1e-9 * max(1.0, E[2]))
    # energy controls the value gap along x
    gaps = log.f_x[2:] - p.min_value
    assert np.all(gaps <= E[2] / t[2:] ** 2 + 1e-12)
    assert log.f_x[-1] - p.min_value < 1e-8 * (1.0 + abs(p.min_value))


def test_ravine_energy_rejects_unknown_minimizer():
    p = quadratic_problem(np.eye(2), np.zeros(2))
    log = nesterov(p, 0.5, 10, np.ones(2))
    bare = SmoothProblem(dim=2, value=p.value, gradient=p.gradient, grad_lipschitz=1.0)
    with pytest.raises(ValueError):
        ravine_energy(log, bare, 0.5)


def test_ravine_weights_base_and_sum():
    assert np.array_equal(ravine_weights([0.0]), [1.0])
    assert np.array_equal(ravine_weights([0.7]), [1.0])
    rng = np.random.default_rng(5)
    for m in (2, 7, 40):
        alphas = rng.uniform(0.0, 1.0, size=m)
        theta = ravine_weights(alphas)
        assert theta.shape == (m,)
        assert np.all(theta >= 0)
        assert np.sum(theta) == pytest.approx(1.0, abs=1e-12)


def test_ravine_weights_product_formula():
    # against the unrolled closed form with alpha_1 = 0
    t = nesterov_step_rule(9)
    alphas = np.array([(t[k - 1] - 1.0) / t[k] for k in range(1, 9)])
    theta = ravine_weights(alphas)
    m = len(alphas)
    direct = np.empty(m)
    for i in range(m):
        w = 1.0 / (1.0 + alphas[i])
        for j in range(i + 1, m):
            w *= alphas[j] / (1.0 + alphas[j])
        direct[i] = w
    # base fold: the alpha_1 = 0 factor makes the i = 0 closed form exact too
    assert np.allclose(theta, direct, atol=1e-15)


def test_ravine_weights_recover_nesterov_iterates():
    rng = np.random.default_rng(7)
    p = random_quadratic(rng, 6)
    K = 32
    log = nesterov(p, 0.9 / p.grad_lipschitz, K, rng.normal(size=6))
    t = nesterov_step_rule(K + 1)
    alphas = [(t[k - 1] - 1.0) / t[k] for k in range(1, K + 1)]
    for m in (2, 9, 25, K):
        theta = ravine_weights(alphas[:m])
        combo = theta @ log.y[1:m + 1]
        assert np.allclose(combo, log.x[m], atol=1e-10 * (1 + np.abs(log.x[m]).max()))


def test_ravine_weights_rejects():
    with pytest.raises(ValueError):
        ravine_weights([])
    with pytest.raises(ValueError):
        ravine_weights([0.2, -0.1])


def test_forward_backward_converges_and_descends():
    prob = lasso_instance(seed=2, m=16, n=10, sparsity=4)
    mu = prob.lam
    K = 4000
    log = forward_backward(prob, mu, K, np.zeros(10))
    fstar = prob.min_value()
    assert log.fstar == pytest.approx(fstar)
    assert log.f_y[-1] - fstar < 1e-10 * (1.0 + abs(fstar))
    slack = 1e-12 * (1.0 + abs(log.f_y[0]))
    assert np.all(np.diff(log.f_y) <= slack)
    assert np.all(np.diff(log.res_norm) <= 1e-12 * (1.0 + log.res_norm[0]))


def test_forward_backward_scalar_hand_value():
    # f = y^2/2 + |y|, mu = 0.5, y0 = 3: forward point 1.5, then soft(1.5, 0.5) = 1
    prob = composite_problem(np.eye(1), np.zeros(1), l1_weight=1.0)
    log = forward_backward(prob, 0.5, 2, np.array([3.0]))
    assert log.y[1][0] == pytest.approx(1.0, abs=1e-15)


def test_forward_backward_rejects_bad_k():
    prob = composite_problem(np.eye(3), np.ones(3), l1_weight=0.1)
    with pytest.raises(ValueError):
        forward_backward(prob, prob.lam, 0, np.zeros(3))


def test_iterate_log_csv_layout():
    p = quadratic_problem(np.diag([1.0, 2.0]), np.zeros(2))
    log = nesterov(p, 0.5, 4, np.array([1.0, -1.0]))
    text = log.to_csv()
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0] == ["k", "s_k", "f_y_gap", "f_x_gap", "res_norm", "E_k"]
    assert len(rows) == 6
    # k = 0: no step, no extrapolated point, no energy
    assert rows[1][1] == "" and rows[1][2] == "" and rows[1][5] == ""
    assert float(rows[1][3]) == pytest.approx(p.value(np.array([1.0, -1.0])) - p.min_value)
    # k = 2 carries the first energy value
    assert float(rows[3][5]) == pytest.approx(log.energy[2], rel=1e-15)
    # gap columns subtract the optimal value
    assert float(rows[2][2]) == pytest.approx(log.f_y[1] - p.min_value, rel=1e-12, abs=1e-15)


def test_iterate_log_csv_without_fstar_keeps_raw_values():
    g = quadratic_prox_problem(2)
    log = prox_averaging(g, 2.0, 3, np.ones(2))
    rows = list(csv.reader(io.StringIO(log.to_csv())))
    assert float(rows[1][2]) == pytest.approx(log.f_y[0], rel=1e-15)


def test_iterate_log_csv_round_trip(tmp_path):
    g = quadratic_prox_problem(3)
    log = prox_averaging(g, 3.0, 20, np.arange(1.0, 4.0), fstar=0.0)
    path = tmp_path / "iters.csv"
    log.write_csv(path)
    data = np.genfromtxt(path, delimiter=",", names=True)
    assert np.array_equal(data["f_y_gap"], log.f_y)
    assert np.array_equal(data["s_k"], log.steps)
