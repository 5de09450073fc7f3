"""Command-line client: exit codes, file output, and the mutation check."""

import json
import os

import avgflow.experiments as experiments
from avgflow.cli import (
    EXIT_DIVERGENCE,
    EXIT_IO,
    EXIT_OK,
    EXIT_PARSE,
    EXIT_VERIFY_FAILED,
    OUTPUT_ENV,
    main,
)
from avgflow.dynamics import VectorField


def write_config(tmp_path, **overrides):
    # an equilibrium instance (b = 0, zero start), so every suite passes
    doc = dict(
        name="cli", kind="cocoercive",
        problem={"type": "lasso", "A": [[1.0, 0.0], [0.0, 1.0], [0.5, 0.5]],
                 "b": [0.0, 0.0, 0.0], "l1_weight": 0.1},
        alphas=[2.0, 3.0], horizon=4.0, step=0.01, record_every=5,
        emit_svg=True)
    doc.update(overrides)
    path = tmp_path / "config.json"
    path.write_text(json.dumps(doc))
    return path


def test_run_writes_artifacts_and_prints_summary(tmp_path, capsys):
    config = write_config(tmp_path)
    out_dir = tmp_path / "out"
    assert main(["run", str(config), "--out", str(out_dir)]) == EXIT_OK
    captured = capsys.readouterr().out
    assert "cli_cocoercive_alpha_2: suite thm_cocoercive pass" in captured
    assert f"wrote 6 files to {out_dir}" in captured
    written = sorted(os.listdir(out_dir))
    assert written == [
        "cli_cocoercive_alpha_2.csv",
        "cli_cocoercive_alpha_2_report.json",
        "cli_cocoercive_alpha_3.csv",
        "cli_cocoercive_alpha_3_report.json",
        "cli_cocoercive_residuals.svg",
        "cli_cocoercive_values.svg",
    ]


def test_run_uses_env_output_dir_when_no_flag(tmp_path, monkeypatch):
    config = write_config(tmp_path)
    env_dir = tmp_path / "envout"
    monkeypatch.setenv(OUTPUT_ENV, str(env_dir))
    assert main(["run", str(config)]) == EXIT_OK
    assert (env_dir / "cli_cocoercive_alpha_2.csv").exists()


def test_run_out_flag_beats_config_output_dir(tmp_path):
    config = write_config(tmp_path, output_dir=str(tmp_path / "from_config"))
    chosen = tmp_path / "from_flag"
    assert main(["run", str(config), "--out", str(chosen)]) == EXIT_OK
    assert chosen.is_dir()
    assert not (tmp_path / "from_config").exists()


def test_run_missing_config_is_io_error(tmp_path):
    assert main(["run", str(tmp_path / "nope.json")]) == EXIT_IO


def test_run_malformed_json_is_parse_error(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    assert main(["run", str(path)]) == EXIT_PARSE


def test_run_non_object_document_is_parse_error(tmp_path):
    path = tmp_path / "list.json"
    path.write_text("[1, 2, 3]")
    assert main(["run", str(path)]) == EXIT_PARSE


def test_run_alpha_below_one_rejected_before_transport(tmp_path, capsys):
    config = write_config(tmp_path, alphas=[0.5])
    assert main(["run", str(config)]) == EXIT_PARSE
    assert "config rejected" in capsys.readouterr().err


def test_run_kind_problem_mismatch_is_parse_error(tmp_path):
    config = write_config(
        tmp_path, problem={"type": "quadratic", "A": [[1.0]], "b": [0.0]})
    assert main(["run", str(config), "--out", str(tmp_path / "o")]) == EXIT_PARSE


def test_run_divergence_exit_code(tmp_path):
    config = write_config(
        tmp_path, kind="bilevel",
        problem={"type": "quadratic", "A": [[1e12]], "b": [1.0]},
        alphas=[3.0], emit_svg=False)
    assert main(["run", str(config)]) == EXIT_DIVERGENCE


def test_run_rejects_nonpositive_jobs(tmp_path):
    config = write_config(tmp_path)
    assert main(["run", str(config), "--jobs", "0"]) == EXIT_PARSE


def test_verify_selector_passes_and_prints_table(capsys):
    assert main(["verify", "thm_prox", "--jobs", "2"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "thm_prox" in out
    assert "runs passed" in out


def test_verify_unknown_suite_is_parse_error():
    assert main(["verify", "thm99"]) == EXIT_PARSE


def sign_flipped(factory):
    """Wrap a vector-field builder so its right-hand side changes sign."""

    def build(*args, **kwargs):
        vf = factory(*args, **kwargs)
        return VectorField(
            dim=vf.dim,
            eval=lambda s, u: -vf.eval(s, u),
            stiffness_hint=vf.stiffness_hint,
            channels=vf.channels,
            state_names=vf.state_names,
            kind=vf.kind,
            params=vf.params,
        )

    return build


def test_verify_reports_failure_after_injected_sign_error(monkeypatch, capsys):
    monkeypatch.setattr(experiments, "isihd_system",
                        sign_flipped(experiments.isihd_system))
    assert main(["verify", "thm2", "--jobs", "4"]) == EXIT_VERIFY_FAILED
    out = capsys.readouterr().out
    assert "FAIL" in out


def test_list_shows_dynamics_with_equations(capsys):
    assert main(["list"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "isihd" in out
    assert "x'' + (alpha/s) x' + grad f(x + (s/(alpha-1)) x') = 0" in out
    assert "prox_averaging" in out


def test_list_json_is_machine_readable(capsys):
    assert main(["list", "--json"]) == EXIT_OK
    body = json.loads(capsys.readouterr().out)
    assert {e["name"] for e in body["dynamics"]} >= {"sd", "isihd", "bilevel"}
    assert {e["name"] for e in body["suites"]} >= {"thm1", "thm_prox"}
