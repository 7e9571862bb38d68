import json

import numpy as np
import pytest

from qclt.chain import dump_document, make_chain
from qclt.cli import main


@pytest.fixture
def chain_file(tmp_path):
    chain = make_chain(["0", "1"], [[0.75, 0.25], [0.25, 0.75]])
    path = tmp_path / "chain.json"
    path.write_text(dump_document(chain, {"f": [1.0, -1.0]}))
    return str(path)


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_analyze_report(capsys, chain_file):
    code, out, _ = run(capsys, "analyze", chain_file, "--observable", "f")
    assert code == 0
    assert "sigma_sq = 3" in out
    assert "reversible = true" in out
    assert "atom_0 = 0.5 1" in out
    assert "seed" not in out  # analyze has no randomness to echo


def test_analyze_reruns_byte_identical(capsys, chain_file):
    _, first, _ = run(capsys, "analyze", chain_file, "--observable", "f")
    _, second, _ = run(capsys, "analyze", chain_file, "--observable", "f")
    assert first == second


def test_analyze_unknown_observable_exits_2(capsys, chain_file):
    code, _, err = run(capsys, "analyze", chain_file, "--observable", "nope")
    assert code == 2
    assert "error:" in err


def test_unknown_flag_exits_2(chain_file):
    with pytest.raises(SystemExit) as exc:
        main(["analyze", chain_file, "--bogus"])
    assert exc.value.code == 2


def test_approx_table(capsys, chain_file):
    code, out, _ = run(capsys, "approx", chain_file, "--observable", "f",
                       "--n", "1,2,4", "--start", "0")
    assert code == 0
    lines = out.splitlines()
    header = lines[lines.index("[diagnostics]") + 1]
    assert header == "n,x,cond_mean,residual_msq,residual_over_n,asdl_sup"
    rows = lines[lines.index("[diagnostics]") + 2:]
    assert len(rows) == 3
    assert rows[0].startswith("1,0,0.5,")


def test_simulate_reruns_byte_identical(capsys, chain_file):
    args = ("simulate", chain_file, "--observable", "f", "--start", "0",
            "--n", "128", "--paths", "500", "--seed", "7", "--threads", "1")
    _, first, _ = run(capsys, *args)
    _, second, _ = run(capsys, *args)
    assert first == second
    assert "seed = 7" in first


def test_simulate_threads_do_not_change_numbers(capsys, chain_file):
    outs = {}
    for threads in ("1", "3"):
        _, text, _ = run(capsys, "simulate", chain_file, "--observable", "f",
                         "--start", "0", "--n", "128", "--paths", "500",
                         "--seed", "7", "--threads", threads)
        outs[threads] = text[text.index("[report]"):]
    assert outs["1"] == outs["3"]


def test_group_document_pipes_into_analyze(capsys, tmp_path):
    out_path = tmp_path / "z5.json"
    code, out, _ = run(capsys, "group", "--moduli", "5", "--step", "1:0.5,4:0.5",
                       "--harmonic", "1", "--output", str(out_path))
    assert code == 0
    assert "SR_sum = 1.4472135955" in out
    doc = json.loads(out_path.read_text())
    assert len(doc["Q"]) == 5
    code, out, _ = run(capsys, "analyze", str(out_path))
    assert code == 0
    assert "reversible = true" in out


def test_group_document_to_stdout(capsys):
    code, out, _ = run(capsys, "group", "--moduli", "3", "--step", "1:1.0")
    assert code == 0
    doc = json.loads(out)
    np.testing.assert_allclose(doc["pi"], [1 / 3] * 3)


def test_torus_series_schema(capsys):
    code, out, _ = run(capsys, "torus", "--alpha", "golden", "--cutoff", "100")
    assert code == 0
    lines = out.splitlines()
    assert "n,dist,one_minus_nuhat,ratio,partial_sum" in lines
    assert any(line.startswith("1,0.38196601125") for line in lines)
    assert "8/13" in lines[lines.index("[convergents]") + 1]


def test_torus_rational_alpha_exits_2(capsys):
    code, _, err = run(capsys, "torus", "--alpha", "0.5", "--cutoff", "100")
    assert code == 2
    assert "error:" in err


def test_verify_quick_exits_0(capsys):
    code, out, _ = run(capsys, "verify", "--quick")
    assert code == 0
    assert "result = 12/12 passed" in out
