"""Config validation, sweep execution, artifact layout, and the battery."""

import json

import numpy as np
import pytest
from pydantic import ValidationError

from avgflow.dynamics import DivergenceError
from avgflow.experiments import (
    RUNNABLE_KINDS,
    ExperimentConfig,
    battery_points,
    catalog,
    default_problem_spec,
    run_experiment,
    verify_battery,
)


def small_lasso_spec():
    return {"type": "lasso", "seed": 7, "m": 8, "n": 6,
            "l1_weight": 0.1, "noise": 0.01, "sparsity": 2}


def small_quad_spec():
    return {"type": "quadratic", "A": [[1.0, 0.0], [0.0, 2.0]],
            "b": [1.0, -1.0]}


def test_config_defaults_match_contract():
    config = ExperimentConfig()
    assert config.kind == "cocoercive"
    assert config.alphas == [1.001, 2.0, 3.0, 5.0]
    assert config.problem == default_problem_spec()
    assert config.problem == {"type": "lasso", "seed": 42, "m": 50, "n": 100,
                              "l1_weight": 0.1, "noise": 0.01, "sparsity": 10}
    assert config.emit_svg is True


def test_config_round_trips_unchanged():
    doc = {
        "name": "trip",
        "kind": "isihd",
        "problem": small_quad_spec(),
        "alphas": [2.0, 5.0],
        "lam": 0.5,
        "mu": None,
        "s0": 1.0,
        "horizon": 4.0,
        "step": 0.01,
        "record_every": 5,
        "iterations": 100,
        "output_dir": "out",
        "emit_svg": False,
    }
    config = ExperimentConfig.model_validate(doc)
    assert config.model_dump() == doc
    again = ExperimentConfig.model_validate_json(config.model_dump_json())
    assert again == config


@pytest.mark.parametrize("patch", [
    {"alphas": [0.5]},
    {"alphas": [1.0]},
    {"alphas": [float("inf")]},
    {"alphas": []},
    {"alphas": [2.0] * 17},
    {"kind": "unknown_flow"},
    {"problem": {"type": "cubic"}},
    {"problem": {}},
    {"horizon": float("inf")},
    {"horizon": -1.0},
    {"step": 0.0},
    {"lam": 0.0},
    {"mu": -0.5},
    {"record_every": 0},
    {"iterations": 0},
    {"iterations": 10 ** 6},
    {"name": "bad name with spaces"},
    {"surprise_field": 1},
])
def test_config_rejects_invalid_documents(patch):
    doc = {"name": "x", "kind": "sd", "problem": small_quad_spec()}
    doc.update(patch)
    with pytest.raises(ValidationError):
        ExperimentConfig.model_validate(doc)


@pytest.mark.parametrize("kind,problem", [
    ("cocoercive", {"type": "quadratic", "A": [[1.0]], "b": [0.0]}),
    ("prox_averaging", {"type": "least_squares", "A": [[1.0]], "b": [0.0]}),
    ("isihd", {"type": "lasso", "seed": 1, "m": 4, "n": 3, "sparsity": 1}),
])
def test_kind_problem_mismatch_raises_value_error(kind, problem):
    config = ExperimentConfig(kind=kind, problem=problem, alphas=[2.0],
                              horizon=2.0, step=0.01, emit_svg=False)
    with pytest.raises(ValueError):
        run_experiment(config)


def lasso_sweep_config(**overrides):
    base = dict(name="sweep", kind="cocoercive", problem=small_lasso_spec(),
                alphas=[1.001, 2.0, 3.0, 5.0], horizon=5.0, step=0.01,
                record_every=5, emit_svg=True)
    base.update(overrides)
    return ExperimentConfig(**base)


def test_lasso_alpha_sweep_produces_expected_artifacts():
    result = run_experiment(lasso_sweep_config())
    names = [n for n, _ in result.artifacts]
    csvs = [n for n in names if n.endswith(".csv")]
    reports = [n for n in names if n.endswith("_report.json")]
    svgs = [n for n in names if n.endswith(".svg")]
    assert len(result.points) == 4
    assert len(csvs) == 4 and len(reports) == 4 and len(svgs) == 2
    assert "sweep_cocoercive_alpha_1.001.csv" in csvs
    assert "sweep_cocoercive_alpha_5_report.json" in reports
    assert names.index(csvs[0]) < names.index(reports[0])

    texts = dict(result.artifacts)
    header = texts[csvs[0]].splitlines()[0]
    assert header.startswith("s,")
    parsed = json.loads(texts[reports[0]])
    assert parsed["suite"] == "thm_cocoercive"
    for svg in svgs:
        assert texts[svg].startswith("<svg")
        assert 'width="800"' in texts[svg] and 'height="600"' in texts[svg]
        assert "<polyline" in texts[svg]


def test_alpha_free_kind_ignores_alpha_sweep():
    config = ExperimentConfig(name="one", kind="sd", problem=small_quad_spec(),
                              alphas=[2.0, 3.0, 5.0], horizon=3.0, step=0.01,
                              emit_svg=False)
    result = run_experiment(config)
    assert len(result.points) == 1
    assert result.points[0].label == "one_sd"
    assert result.points[0].alpha is None


def equilibrium_problem_for(kind):
    if kind in ("cocoercive", "prox_averaging"):
        return {"type": "lasso",
                "A": [[1.0, 0.0], [0.0, 1.0], [0.5, 0.5]],
                "b": [0.0, 0.0, 0.0], "l1_weight": 0.1}
    return {"type": "quadratic", "A": [[1.0, 0.0], [0.0, 3.0]],
            "b": [0.0, 0.0]}


@pytest.mark.parametrize("kind", sorted(RUNNABLE_KINDS))
def test_equilibrium_config_gives_flat_curves_and_all_suites_pass(kind):
    config = ExperimentConfig(
        name="rest", kind=kind, problem=equilibrium_problem_for(kind),
        alphas=[2.0, 3.0], horizon=4.0, step=0.01, record_every=2,
        iterations=60, emit_svg=False)
    result = run_experiment(config)
    assert result.points
    for pt in result.points:
        assert pt.passed, pt.report.to_dict()
        assert float(np.max(np.abs(pt.value_curve[1]))) == 0.0
        assert float(np.max(np.abs(pt.residual_curve[1]))) == 0.0


def test_disabling_svg_changes_no_csv_or_report_byte():
    with_svg = run_experiment(lasso_sweep_config())
    without = run_experiment(lasso_sweep_config(emit_svg=False))
    svg_free = [(n, t) for n, t in with_svg.artifacts if not n.endswith(".svg")]
    assert svg_free == without.artifacts
    assert all(not n.endswith(".svg") for n, _ in without.artifacts)


def test_same_config_reproduces_identical_bytes():
    first = run_experiment(lasso_sweep_config())
    second = run_experiment(lasso_sweep_config())
    assert first.artifacts == second.artifacts


def test_jobs_do_not_change_artifact_bytes_or_order():
    serial = run_experiment(lasso_sweep_config())
    threaded = run_experiment(lasso_sweep_config(), jobs=4)
    assert serial.artifacts == threaded.artifacts
    assert [p.label for p in serial.points] == [p.label for p in threaded.points]


def test_run_experiment_rejects_bad_jobs():
    with pytest.raises(ValueError):
        run_experiment(lasso_sweep_config(), jobs=0)


def test_divergent_run_raises_divergence_error():
    config = ExperimentConfig(
        name="blowup", kind="bilevel",
        problem={"type": "quadratic", "A": [[1e12]], "b": [1.0]},
        alphas=[3.0], horizon=5.0, step=0.01, emit_svg=False)
    with pytest.raises(DivergenceError):
        run_experiment(config)


def test_battery_points_filter_and_unknown_suite():
    prox_only = battery_points(["thm_prox"])
    assert prox_only and all(p.suite == "thm_prox" for p in prox_only)
    with pytest.raises(ValueError, match="unknown suites"):
        battery_points(["thm_prox", "thm99"])


def test_verify_battery_prox_selector_passes():
    result = verify_battery(["thm_prox"], jobs=2)
    assert result.all_passed
    table = result.table()
    assert "thm_prox" in table
    assert f"{len(result.rows)}/{len(result.rows)} runs passed" in table


def test_verify_battery_rejects_bad_jobs():
    with pytest.raises(ValueError):
        verify_battery(["thm_prox"], jobs=0)


def test_catalog_lists_required_entries_with_tags():
    doc = catalog()
    assert set(doc) == {"dynamics", "algorithms", "problems", "suites"}
    dynamics = {e["name"]: e["tag"] for e in doc["dynamics"]}
    assert "x'' + (alpha/s) x' + grad f(x + (s/(alpha-1)) x') = 0" == \
        dynamics["isihd"]
    algorithms = {e["name"] for e in doc["algorithms"]}
    assert "prox_averaging" in algorithms
    suites = {e["name"] for e in doc["suites"]}
    assert {"thm1", "thm_cocoercive"} <= suites
    json.dumps(doc)
