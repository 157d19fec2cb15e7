import json

import pytest

from rds_sync import cli
from rds_sync.boolnet import p53
from rds_sync.sync import RefinementViolation


def _model_file(tmp_path, states, maps, probs, name="model.json"):
    path = tmp_path / name
    path.write_text(json.dumps({"states": states, "maps": maps, "probs": probs}))
    return str(path)


@pytest.fixture
def identity_model(tmp_path):
    return _model_file(tmp_path, ["a", "b", "c"], {"id": ["a", "b", "c"]}, {"id": "1"})


@pytest.fixture
def drain_model(tmp_path):
    # d -> c -> b -> a -> a: merges one pair per step, lower bound 1
    return _model_file(tmp_path, ["a", "b", "c", "d"], {"f": ["a", "a", "b", "c"]}, {"f": "1"})


def _run(capsys, argv):
    code = cli.run(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def _json(capsys, argv):
    code, out, _ = _run(capsys, argv)
    assert code == 0
    return json.loads(out)


def test_m1_dist_identity(capsys, identity_model):
    rep = _json(capsys, ["m1-dist", "--model", identity_model, "--seed", "3", "--trials", "25"])
    assert rep["tool"] == "rds-sync" and rep["command"] == "m1-dist"
    assert rep["result"]["m1_histogram"] == {"3": 25}
    assert rep["result"]["partition_example"] == [["a"], ["b"], ["c"]]
    assert set(rep["fixtures"]) == {"model.json"}


def test_reports_are_byte_identical(capsys, tmp_path):
    path = p53.fixture_path("four_state.json")
    argv = ["m1-dist", "--model", str(path), "--seed", "8", "--trials", "20"]
    _, first, _ = _run(capsys, argv)
    _, second, _ = _run(capsys, argv)
    assert first == second
    out = tmp_path / "r.json"
    code, summary, _ = _run(capsys, argv + ["--out", str(out)])
    assert code == 0 and out.read_text() == first
    assert "modal_m1: 2" in summary


def test_partition(capsys, drain_model):
    rep = _json(capsys, ["partition", "--model", drain_model, "--seed", "0"])
    assert rep["result"]["m1"] == 1 and rep["result"]["certification"] == "CertifiedExact"
    assert rep["result"]["synchronizing"] is True


def test_partition_inconclusive_exit(capsys, drain_model):
    code, out, _ = _run(capsys, ["partition", "--model", drain_model, "--seed", "0",
                                 "--n-max", "1", "--stability-window", "1"])
    assert code == cli.EXIT_INCONCLUSIVE
    assert json.loads(out)["result"]["certification"] == "Inconclusive"


def test_lyapunov(capsys, drain_model):
    rep = _json(capsys, ["lyapunov", "--model", drain_model, "--seed", "0", "--n-max", "10"])
    text = json.dumps(rep["result"])
    assert "MinusInfinity" in text
    rep = _json(capsys, ["lyapunov", "--model", drain_model, "--seed", "0", "--n-max", "10",
                         "--vector", "1,0,0,0"])
    assert "Zero" in json.dumps(rep["result"])


def test_markov_and_two_point(capsys):
    path = str(p53.fixture_path("four_state.json"))
    rep = _json(capsys, ["markov", "--model", path])["result"]
    assert rep["transitions"]["1"]["2"] == "1/5"
    assert rep["lower"] == 2 and rep["upper"] == 4
    rep = _json(capsys, ["two-point", "--model", path])["result"]
    assert rep["synchronizes"] is False
    (cls,) = rep["off_diagonal_recurrent_classes"]
    assert {tuple(p) for p in cls} == {("1", "3"), ("3", "1"), ("2", "4"), ("4", "2"),
                                       ("2", "3"), ("3", "2"), ("4", "1"), ("1", "4")}


def test_boolnet_commands(capsys, tmp_path):
    rep = _json(capsys, ["boolnet", "compile", str(p53.fixture_path("p53_stress.bn"))])
    assert rep["result"]["table"] == p53.load_fixture().stress.image.tolist()
    rep = _json(capsys, ["boolnet", "attractors", str(p53.fixture_path("p53_rest.bn"))])
    cycles = {tuple(a["cycle"]): a["basin_size"] for a in rep["result"]["attractors"]}
    assert cycles == {(0, 20, 31, 11): 12, (6,): 20}


def test_boolnet_parse_error(capsys, tmp_path):
    bad = tmp_path / "bad.bn"
    bad.write_text("node a;\na' = b;\n")
    code, _, err = _run(capsys, ["boolnet", "compile", str(bad)])
    assert code == cli.EXIT_PARSE and "2:6" in err


def test_p53(capsys):
    rep = _json(capsys, ["p53", "--seed", "1", "--trials", "40"])["result"]
    assert rep["modal_m1"] == 5 and rep["m1_equals_5"] is True
    assert rep["bounds"]["lower"] == 5 and rep["bounds"]["upper"] == 14
    assert rep["structure"]["stress_basin_sizes"] == [12, 20]
    assert rep["structure"]["rest_collapse_image"] == [6]


def test_four_state(capsys):
    rep = _json(capsys, ["four-state", "--seed", "1", "--trials", "30"])["result"]
    assert rep["lower"] == 2 and rep["synchronizes"] is False
    assert rep["m1_histogram"] == {"2": 30}
    assert sorted(map(tuple, rep["conflict_edges"])) == [("1", "3"), ("1", "4"), ("2", "3"), ("2", "4")]


def test_countable_suite(capsys):
    rep = _json(capsys, ["countable"])["result"]
    assert all(r["closed_form_exact"] and r["contains_log_lambda"] for r in rep["geometric_decay"])
    assert rep["two_block"] == {"blockwise_holds": True, "single_block_holds": False}
    assert rep["shift_down"]["annihilation_matches_max_minus_1"]


def test_countable_model_file(capsys, tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"map": "shift_down",
                                "vector": {"head": ["1"], "tail": {"ratio": "1/2", "first": "-1/2"}}}))
    rep = _json(capsys, ["countable", "--model", str(path), "--n-max", "20"])["result"]
    assert rep["verdict"] == "Limit" and rep["in_sum_zero_space"] is True
    assert rep["norms"][:2] == ["1/1", "1/2"]


def test_seed_is_required(identity_model):
    with pytest.raises(SystemExit) as info:
        cli.run(["m1-dist", "--model", identity_model])
    assert info.value.code == cli.EXIT_PARSE


def test_malformed_json_is_parse_error(capsys, tmp_path):
    path = tmp_path / "m.json"
    path.write_text("{not json")
    code, _, _ = _run(capsys, ["markov", "--model", str(path)])
    assert code == cli.EXIT_PARSE


def test_validation_errors(capsys, tmp_path):
    bad = _model_file(tmp_path, ["a", "b"], {"f": ["a", "z"]}, {"f": "1"})
    assert _run(capsys, ["markov", "--model", bad])[0] == cli.EXIT_VALIDATION
    bad = _model_file(tmp_path, ["a"], {"f": ["a"]}, {"f": "1/2"}, "half.json")
    assert _run(capsys, ["markov", "--model", bad])[0] == cli.EXIT_VALIDATION
    assert _run(capsys, ["markov", "--model", str(tmp_path / "missing.json")])[0] == cli.EXIT_VALIDATION
    assert _run(capsys, ["p53", "--seed", "1", "--p", "3/2"])[0] == cli.EXIT_VALIDATION
    fx = json.loads(p53.fixture_path().read_text())
    fx["B"][6] = 5
    corrupt = tmp_path / "p53.json"
    corrupt.write_text(json.dumps(fx))
    assert _run(capsys, ["p53", "--seed", "1", "--model", str(corrupt)])[0] == cli.EXIT_VALIDATION


def test_internal_breach_exit(capsys, monkeypatch, identity_model):
    def broken(args):
        raise RefinementViolation("partition refined at step 3")
    monkeypatch.setitem(cli.COMMANDS, "markov", broken)
    code, _, err = _run(capsys, ["markov", "--model", identity_model])
    assert code == cli.EXIT_INTERNAL and "refined" in err
