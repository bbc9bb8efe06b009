import json
from unittest.mock import MagicMock, patch

import pytest
from click.testing import CliRunner

from submax.main import cli
from submax.models.instance import CutInstance
from submax.services.instances import read_instance, write_instance

P3 = CutInstance(m=3, edges=[(0, 1, 1.0), (1, 2, 1.0)], name="p3")


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def p3_file(tmp_path):
    path = tmp_path / "p3.json"
    write_instance(P3, path)
    return path


def test_solve_prints_result(runner, p3_file, tmp_path):
    trace_path = tmp_path / "trace.json"
    result = runner.invoke(
        cli, ["solve", "--instance", str(p3_file), "--depth", "2", "--epsilon", "0.05", "--trace", str(trace_path)]
    )
    assert result.exit_code == 0, result.output
    payload = json.loads(result.output)
    assert payload["value"] == 2.0
    assert payload["subset"] == [0, 2]
    assert payload["queries"] == 37
    assert json.loads(trace_path.read_text())["node_id"] == "r"


def test_solve_baselines(runner, p3_file):
    for algo in ("ls", "dg-det", "brute"):
        result = runner.invoke(cli, ["solve", "--instance", str(p3_file), "--algo", algo])
        assert result.exit_code == 0, result.output
        assert json.loads(result.output)["value"] == 2.0
    result = runner.invoke(cli, ["solve", "--instance", str(p3_file), "--algo", "dg-rand", "--trials", "50"])
    assert json.loads(result.output)["trials"] == 50


def test_solve_prints_member_labels(runner, tmp_path):
    path = tmp_path / "named.json"
    write_instance(P3.model_copy(update={"labels": ["left", "mid", "right"]}), path)
    result = runner.invoke(cli, ["solve", "--instance", str(path), "--depth", "2", "--epsilon", "0.05"])
    assert result.exit_code == 0, result.output
    payload = json.loads(result.output)
    assert payload["subset"] == [0, 2]
    assert payload["labels"] == ["left", "right"]


def test_solve_omits_labels_for_unlabelled_instances(runner, p3_file):
    result = runner.invoke(cli, ["solve", "--instance", str(p3_file)])
    assert "labels" not in json.loads(result.output)


def test_solvers_lists_the_registry(runner):
    result = runner.invoke(cli, ["solvers"])
    assert result.exit_code == 0, result.output
    rows = {line.split()[0]: line.split()[1] for line in result.output.splitlines()}
    assert {"alg@0", "alg@1", "alg@2", "ls", "dg-det", "dg-rand", "brute"} <= rows.keys()
    assert rows["alg@2"] == "2"
    assert rows["ls"] == "-"


def test_solve_trace_needs_alg(runner, p3_file, tmp_path):
    result = runner.invoke(
        cli, ["solve", "--instance", str(p3_file), "--algo", "ls", "--trace", str(tmp_path / "t.json")]
    )
    assert result.exit_code == 2


def test_malformed_instance_exits_with_config_error(runner, tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"kind": "cut",\n "m": }', encoding="utf-8")
    result = runner.invoke(cli, ["solve", "--instance", str(path)])
    assert result.exit_code == 2
    assert "line 2" in result.output


def test_verify_passes_on_p3(runner, p3_file):
    result = runner.invoke(cli, ["verify", "--instance", str(p3_file)])
    assert result.exit_code == 0, result.output
    assert "submodular:   yes" in result.output
    assert "0 failed" in result.output


def test_verify_flags_non_submodular_input(runner, tmp_path):
    path = tmp_path / "p3.json"
    write_instance(P3, path)
    with patch("submax.main.check_submodular") as check:
        check.return_value = MagicMock(passed=False, checked=1, witness=None, negative_set=None)
        result = runner.invoke(cli, ["verify", "--instance", str(path)])
    assert result.exit_code == 1
    assert "submodular:   no" in result.output


def test_gen_writes_a_reproducible_instance(runner, tmp_path):
    out = tmp_path / "g.json"
    result = runner.invoke(cli, ["gen", "--kind", "random-cut", "--m", "6", "--seed", "7", "--param", "p=0.4", "--out", str(out)])
    assert result.exit_code == 0, result.output
    inst = read_instance(out)
    assert inst.m == 6 and inst.seed == 7

    again = runner.invoke(cli, ["gen", "--kind", "random-cut", "--m", "6", "--seed", "7", "--param", "p=0.4"])
    assert again.output.strip() == out.read_text().strip()


def test_gen_rejects_bad_params(runner):
    assert runner.invoke(cli, ["gen", "--kind", "random-cut", "--m", "4", "--param", "p=2"]).exit_code == 2
    assert runner.invoke(cli, ["gen", "--kind", "random-cut", "--m", "4", "--param", "p"]).exit_code == 2


def test_run_exit_codes(runner, p3_file, tmp_path):
    config = tmp_path / "bench.json"
    config.write_text(
        json.dumps({"files": [p3_file.name], "algorithms": ["alg@2", "dg-det"], "verify": True}), encoding="utf-8"
    )
    result = runner.invoke(cli, ["run", "--config", str(config)])
    assert result.exit_code == 0, result.output
    lines = result.output.splitlines()
    assert lines[0] == "instance,m,algorithm,epsilon,depth,value,opt,ratio,queries,moves,verified"
    assert len(lines) == 3

    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"files": [], "algorithms": ["ls"]}), encoding="utf-8")
    assert runner.invoke(cli, ["run", "--config", str(bad)]).exit_code == 2


def test_run_markdown_with_timing(runner, p3_file, tmp_path):
    config = tmp_path / "bench.json"
    config.write_text(json.dumps({"files": [str(p3_file)], "algorithms": ["ls"]}), encoding="utf-8")
    out = tmp_path / "report.md"
    result = runner.invoke(cli, ["run", "--config", str(config), "--format", "markdown", "--timing", "-o", str(out)])
    assert result.exit_code == 0
    assert out.read_text().splitlines()[0].endswith("| wall_time_s |")


def test_scale(runner):
    result = runner.invoke(cli, ["scale", "--family", "zero", "--sizes", "4,8,16", "--epsilon", "0.1"])
    assert result.exit_code == 0, result.output
    fit = json.loads(result.output)
    assert fit["sizes"] == [4, 8, 16]
    assert runner.invoke(cli, ["scale", "--family", "zero", "--sizes", "8"]).exit_code == 2
