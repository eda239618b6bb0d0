"""CLI surface: exit codes, report schema, determinism, serialization."""

import json
import subprocess
import sys

from todamirror import cli


def run_cli(args):
    return cli.main(args)


def test_commute_passes(capsys):
    assert run_cli(["commute", "--n", "2"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["pass"] is True
    assert doc["task"] == "commute"
    assert all(r["residual_terms"] == 0 for r in doc["results"])


def test_mirror_passes(capsys):
    assert run_cli(["mirror", "--n", "2"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["pass"] is True


def test_critical_reports_six_points(capsys):
    code = run_cli(["critical", "--n", "2", "--lambda", "1/4,1/8,-3/8",
                    "--q", "1,1"])
    assert code == 0
    doc = json.loads(capsys.readouterr().out)
    count_row = [r for r in doc["results"] if "count" in r][0]
    assert count_row["count"] == 6 and count_row["all_nondegenerate"]


def test_eigen_n1(capsys):
    code = run_cli(["eigen", "--n", "1", "--lambda", "1/2,-1/2", "--q", "1",
                    "--hbar", "-1"])
    assert code == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["residuals"]["max"] < 1e-6


def test_exit_code_on_invalid_lambda(capsys):
    assert run_cli(["critical", "--n", "2", "--lambda", "1/4,1/8,-1/4"]) == 2
    assert run_cli(["critical", "--n", "1", "--lambda", "1/2,1/2"]) == 2  # sum != 0
    assert run_cli(["critical", "--n", "1", "--lambda", "0,0"]) == 2      # repeated
    assert run_cli(["eigen", "--n", "1", "--q", "-1"]) == 2


def test_exit_code_on_unknown_task():
    assert run_cli(["no-such-task"]) == 2


def test_failure_exit_code(monkeypatch, capsys):
    def always_fail(cfg):
        return [{"forced": True}], [1.0], False, []
    monkeypatch.setitem(cli.RUNNERS, "commute", always_fail)
    assert run_cli(["commute", "--n", "1"]) == 1


def test_report_schema_fields(capsys):
    run_cli(["commute", "--n", "1"])
    doc = json.loads(capsys.readouterr().out)
    assert set(doc) == {"task", "params", "results", "residuals", "pass",
                        "runtime_ms", "version", "warnings"}
    assert doc["version"] == cli.__version__
    assert doc["params"]["command"].startswith("todamirror commute")
    assert "tolerances" in doc["params"]


def test_determinism_same_seed(capsys):
    run_cli(["critical", "--n", "1", "--seed", "7"])
    a = json.loads(capsys.readouterr().out)
    run_cli(["critical", "--n", "1", "--seed", "7"])
    b = json.loads(capsys.readouterr().out)
    a["runtime_ms"] = b["runtime_ms"] = 0
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)


def test_text_format_contains_all_fields(capsys):
    run_cli(["commute", "--n", "1", "--format", "text"])
    out = capsys.readouterr().out
    for key in ("task", "params.n", "pass", "runtime_ms", "version",
                "residuals.max"):
        assert key in out


def test_json_output_to_file(tmp_path):
    target = tmp_path / "report.json"
    assert run_cli(["commute", "--n", "1", "--output", str(target)]) == 0
    doc = json.loads(target.read_text())
    assert doc["pass"] is True


def test_empty_results_vacuous_pass_flagged(monkeypatch, capsys):
    def empty(cfg):
        return [], [], True, []
    monkeypatch.setitem(cli.RUNNERS, "commute", empty)
    assert run_cli(["commute", "--n", "1"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["pass"] is True
    assert any("vacuous" in w for w in doc["warnings"])


def test_thread_env_override(monkeypatch, capsys):
    monkeypatch.setenv("TODAMIRROR_THREADS", "3")
    run_cli(["commute", "--n", "1"])
    doc = json.loads(capsys.readouterr().out)
    assert doc["params"]["threads"] == 3
    monkeypatch.setenv("TODAMIRROR_THREADS", "zebra")
    assert run_cli(["commute", "--n", "1"]) == 2


def test_rationals_serialized_as_num_den(capsys):
    run_cli(["critical", "--n", "1", "--lambda", "1/2,-1/2", "--q", "1"])
    doc = json.loads(capsys.readouterr().out)
    assert doc["params"]["lambda"] == ["1/2", "-1/2"]
    assert doc["params"]["q"] == ["1/1"]


def test_installed_entry_point():
    proc = subprocess.run([sys.executable, "-m", "todamirror.cli", "commute",
                           "--n", "1"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["pass"] is True


def test_config_file_for_suite_runs(tmp_path, capsys):
    cfgfile = tmp_path / "suite.cfg"
    cfgfile.write_text("# defaults for the full suite\nn = 1\nseed = 5\n")
    assert run_cli(["all", "--config", str(cfgfile)]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["params"]["n"] == 1 and doc["params"]["seed"] == 5


def test_config_file_flags_override(tmp_path, capsys):
    cfgfile = tmp_path / "suite.cfg"
    cfgfile.write_text("n = 1\nseed = 5\n")
    assert run_cli(["all", "--config", str(cfgfile), "--seed", "9"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["params"]["n"] == 1 and doc["params"]["seed"] == 9


def test_config_file_missing_is_invalid_input():
    assert run_cli(["all", "--config", "/nonexistent/suite.cfg"]) == 2


def test_all_suite_caps_eigen_dimension(capsys):
    assert run_cli(["all", "--n", "3", "--seed", "2"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["pass"] is True
    assert any("capped" in w for w in doc["warnings"])
