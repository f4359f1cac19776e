import json

import pytest

from introspect import cli
from introspect.cli import CliError, ExperimentSpec, main, parse_instance, run
from introspect.experiments import REGISTRY, by_criterion
from introspect.sat import TOY_CORPUS, SatError, bundled_circuit, parse_circuit


def test_bundled_instance_parses():
    inst = parse_instance("sat_toy")
    assert inst.n_vars == 4


def test_parse_instance_from_file(tmp_path):
    path = tmp_path / "toy.circ"
    path.write_text(bundled_circuit("unsat_toy").serialize())
    assert parse_instance(path).n_vars == 4
    with pytest.raises(CliError):
        parse_instance(tmp_path / "missing.circ")


def test_parse_instance_rejects_wrong_input_count(tmp_path):
    path = tmp_path / "two.circ"
    path.write_text("inputs 2\ngate 0 INPUT 0\ngate 1 INPUT 1\ngate 2 AND 0 1\noutput 2\n")
    with pytest.raises(SatError):
        parse_instance(path)


def test_cycle_error_names_the_cycle():
    text = "inputs 1\ngate 0 INPUT 0\ngate 1 AND 0 2\ngate 2 NOT 3\ngate 3 OR 1 0\noutput 3\n"
    with pytest.raises(SatError, match=r"1 -> 2 -> 3 -> 1"):
        parse_circuit(text)


def test_arity_error_has_line_number():
    with pytest.raises(SatError, match="line 3"):
        parse_circuit("inputs 1\ngate 0 INPUT 0\ngate 1 AND 0\noutput 1\n")


@pytest.mark.parametrize("name", TOY_CORPUS)
def test_fixture_round_trip(name):
    c = bundled_circuit(name)
    assert parse_circuit(c.serialize()).serialize() == c.serialize()


def test_every_criterion_has_one_experiment():
    crits = [e.criterion for e in by_criterion()]
    assert crits == list(range(1, 11))
    assert len(REGISTRY) == 10


def test_run_unknown_and_malformed():
    with pytest.raises(CliError):
        run(ExperimentSpec("no-such-experiment"))
    with pytest.raises(CliError):
        run(ExperimentSpec("pauli-algebra", {"bogus": 1}))


def test_run_pauli_algebra_q4(tmp_path):
    out = tmp_path / "r.json"
    rep = run(ExperimentSpec("pauli-algebra", {"q": 4}, seed=1, output=str(out)))
    assert rep["passed"] and rep["schema_version"] == cli.SCHEMA_VERSION
    assert json.loads(out.read_text())["values"]["q"] == [4]


def test_reports_are_byte_identical(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for p in (a, b):
        run(ExperimentSpec("cheating-detection", seed=3, trials=300, output=str(p)))
    assert a.read_bytes() == b.read_bytes()
    assert "wall_time" not in json.loads(a.read_text())


def test_timing_is_opt_in():
    rep = run(ExperimentSpec("twirl-identities", seed=0), timing=True)
    assert rep["wall_time"] >= 0 and rep["passed"]


def test_main_run_and_params(capsys):
    assert main(["run", "pcp-soundness", "--instance", "unsat_toy", "--q", "16"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["checks"]["rejection-bound"] and rep["params"]["q"] == 16
    assert main(["run", "pauli-algebra", "--param", "nonsense"]) == 2


@pytest.mark.parametrize("argv,key", [
    (["gf", "mul", "3", "7", "--q", "16"], "result"),
    (["gf", "self-dual", "--q", "4"], "result"),
    (["poly", "1011"], "encoding"),
    (["qsim", "epr", "--q", "2", "--n", "1"], "csv"),
    (["qsim", "z", "1", "0", "--q", "2"], "trace"),
    (["sat", "neg_toy", "--pcp"], "pcp_acceptance"),
    (["game", "lying-surface"], "exact_value"),
    (["game", "data-hiding", "--trials", "50"], "mc"),
    (["ldt", "--m", "2", "--d", "1", "--q", "2"], "exact_value"),
    (["anred", "--source", "toy", "--trials", "20"], "mc"),
])
def test_subcommands(capsys, argv, key):
    assert main(argv) == 0
    out = json.loads(capsys.readouterr().out)
    assert key in out and out["schema_version"] == cli.SCHEMA_VERSION


def test_subcommand_errors(capsys):
    assert main(["gf", "frobnicate", "--q", "4"]) == 2
    assert main(["gf", "inv", "--q", "4"]) == 2
    assert main(["game", "nope"]) == 2
    assert main(["anred", "--pcpp", "mie"]) == 2


def test_dim_cap_flag(monkeypatch, capsys):
    monkeypatch.setenv("INTROSPECT_DIM_CAP", "1024")  # restored after the test
    assert main(["--dim-cap", "2", "qsim", "epr", "--q", "2", "--n", "2"]) == 2
    assert capsys.readouterr().err.startswith("error:")
