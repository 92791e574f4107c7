import json

import pytest

from nlsym.cli import EXIT_BOUND, EXIT_INTERNAL, EXIT_OK, EXIT_USAGE, main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_survey_json(capsys):
    code, out, _ = run(capsys, "survey", "--group", "Z5", "--json", "--workers", "1")
    assert code == EXIT_OK
    d = json.loads(out)
    assert (d["distinct"], d["classical"], d["local"], d["nonlocal"]) == (8, 4, 4, 4)


def test_survey_text_and_output_file(capsys, tmp_path):
    target = tmp_path / "z4.txt"
    code, _, _ = run(capsys, "survey", "--group", "Z2xZ2", "-o", str(target))
    assert code == EXIT_OK
    assert "distinct=6 classical=6 local=6 nonlocal=0" in target.read_text()


@pytest.mark.parametrize("argv,code", [
    (["survey", "--group", "Z16"], EXIT_BOUND),
    (["survey", "--group", "Z7"], EXIT_BOUND),
    (["survey", "--group", "Q8"], EXIT_USAGE),
    (["survey"], EXIT_USAGE),
    (["bogus"], EXIT_USAGE),
    ([], EXIT_USAGE),
    (["qls", "--group", "Z5", "--perm", "0,1,2,3"], EXIT_USAGE),
    (["graph", "--name", "nonsense", "--classify"], EXIT_USAGE),
    (["graph", "--graph6", "~~~~", "--classify"], EXIT_USAGE),
    (["certify", "--correlation", "/nonexistent", "--certificate", "/nonexistent"], EXIT_USAGE),
])
def test_exit_codes(capsys, argv, code):
    assert run(capsys, *argv)[0] == code


def test_k5_demo(capsys):
    code, out, _ = run(capsys, "k5-demo", "--json")
    assert code == EXIT_OK
    d = json.loads(out)
    assert d["sign"] == "NEGATIVE"
    assert abs(d["value_approx"] - (5 - 3 * 5 ** 0.5) / 50) < 1e-12
    assert d["q_0301"] == "1/25"
    assert d["lifted_certificate"]["min_over_deterministic"] == "0"


def test_qls_certificate_round_trip(capsys, tmp_path):
    cert, corr = tmp_path / "cert.json", tmp_path / "corr.json"
    code, out, _ = run(capsys, "qls", "--group", "Z5", "--perm", "0,1,2,4,3",
                       "--emit-certificate", str(cert), "--emit-correlation", str(corr))
    assert code == EXIT_OK and "NONLOCAL" in out
    code, out, _ = run(capsys, "certify", "--correlation", str(corr), "--certificate", str(cert))
    assert code == EXIT_OK and "certificate verified" in out
    # a certificate claiming a larger offset than its true minimum is rejected
    data = json.loads(cert.read_text())
    data["min_over_deterministic"] = "1000"
    cert.write_text(json.dumps(data))
    code, out, _ = run(capsys, "certify", "--correlation", str(corr), "--certificate", str(cert))
    assert code == EXIT_INTERNAL


def test_qls_local(capsys):
    code, out, _ = run(capsys, "qls", "--group", "Z4", "--perm", "0,1,2,3", "--json")
    assert code == EXIT_OK and json.loads(out)["verdict"] == "LOCAL"


def test_graph_commands(capsys, tmp_path):
    code, out, _ = run(capsys, "graph", "--name", "3K2", "--classify", "--json")
    assert code == EXIT_OK
    assert json.loads(out)["classification"]["verdict"] == "NONLOCAL"
    edges = tmp_path / "c4.txt"
    edges.write_text("4 4\n0 1\n1 2\n2 3\n3 0\n")
    code, out, _ = run(capsys, "graph", "--edges", str(edges), "--classify", "--automorphisms")
    assert code == EXIT_OK and "NO_NONLOCAL" in out
    code, out, _ = run(capsys, "graph", "--graph6", "Dhc", "--classify")   # C5
    assert code == EXIT_OK and "UNDECIDED" in out


def test_vertex_transitive_corpus(capsys):
    code, out, _ = run(capsys, "graph", "--corpus")
    assert code == EXIT_OK and "12/12 verdicts match" in out


def test_k4_check(capsys, tmp_path):
    code, out, _ = run(capsys, "k4-check", "--group", "Z4", "--uniform")
    assert code == EXIT_OK and "LOCAL" in out
    corr = tmp_path / "corr.json"
    assert run(capsys, "qls", "--group", "Z4", "--perm", "0,1,3,2", "--emit-correlation", str(corr))[0] == 0
    code, out, _ = run(capsys, "k4-check", "--correlation", str(corr), "--json")
    assert code == EXIT_OK
    k5 = tmp_path / "k5.json"
    run(capsys, "qls", "--group", "Z5", "--perm", "0,1,2,4,3", "--emit-correlation", str(k5))
    assert run(capsys, "k4-check", "--correlation", str(k5))[0] == EXIT_USAGE
