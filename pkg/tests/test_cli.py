import io
import json
import subprocess
import sys

import pytest

from rankmech.cli import main


def run(argv):
    buf = io.StringIO()
    code = main(argv, out=buf)
    return code, buf.getvalue()


@pytest.fixture
def files(tmp_path):
    def write(name, data):
        path = tmp_path / name
        path.write_text(json.dumps(data) if not isinstance(data, str) else data)
        return str(path)

    return write


def test_optimal():
    code, text = run(["optimal", "--n", "9"])
    assert code == 0
    data = json.loads(text)
    assert data["pi1"] == "12/13" and data["ell"] == 4


def test_optimal_n8_tie(capsys):
    assert json.loads(run(["optimal", "--n", "8"])[1])["ell"] == 2
    assert json.loads(run(["optimal", "--n", "8", "--ell-tie", "4"])[1])["ell"] == 4
    code, text = run(["optimal", "--n", "9", "--ell-tie", "2"])
    assert code == 0 and json.loads(text)["ell"] == 4
    assert "only applies at n=8" in capsys.readouterr().err


def test_price_all_methods(files):
    rule = files("gl4.json", {"n": 4, "pi": ["3/4", "1/4", "0", "0"]})
    prof = files("v.json", {"values": [8, 4, 2, 1]})
    code, text = run(["price", "--rule", rule, "--profile", prof, "--method", "all"])
    assert code == 0
    data = json.loads(text)
    assert data["payments"] == ["2", "0", "-1", "-1"]
    assert data["utilities"] == ["4", "1", "1", "1"]
    assert data["methods_agree"] is True and set(data["methods"]) == {"subset", "recursive", "two-step"}


def test_price_csv_and_sample(files):
    rule = files("gl4.json", {"n": 4, "pi": ["3/4", "1/4", "0", "0"]})
    prof = files("v.json", {"values": [8, 4, 2, 1]})
    code, text = run(["price", "--rule", rule, "--profile", prof, "--format", "csv"])
    assert code == 0
    assert text.splitlines()[:2] == ["agent,value,allocation,payment,utility", "1,8,3/4,2,4"]
    winner = json.loads(run(["price", "--rule", rule, "--profile", prof, "--sample", "5"])[1])["sampled_winner"]
    assert winner in (1, 2)


def test_price_input_errors(files, capsys):
    good = files("gl3.json", {"pi": ["2/3", "1/3", "0"]})
    prof4 = files("v4.json", {"values": [1, 2, 3, 4]})
    assert run(["price", "--rule", good, "--profile", prof4])[0] == 2
    bad = files("eff.json", {"pi": [1, 0, 0]})
    prof3 = files("v3.json", {"values": [1, 2, 3]})
    assert run(["price", "--rule", bad, "--profile", prof3])[0] == 2
    assert run(["price", "--rule", files("junk.json", "{"), "--profile", prof3])[0] == 2
    assert run(["price", "--rule", "/nonexistent.json", "--profile", prof3])[0] == 2
    tied = files("tied.json", {"values": [1, 1, 3]})
    assert run(["price", "--rule", good, "--profile", tied, "--method", "two-step"])[0] == 2
    assert "error:" in capsys.readouterr().err


def test_verify(files):
    gl3 = files("gl3.json", {"pi": ["2/3", "1/3", "0"]})
    code, text = run(["verify", "--rule", gl3])
    assert code == 0 and json.loads(text)["passed"] is True
    code, text = run(["verify", "--rule", files("eff.json", {"pi": [1, 0, 0]}), "--format", "csv"])
    assert code == 1 and text.startswith("check,passed,checked,residual,counterexample")
    assert run(["verify", "--rule", gl3, "--random", "20", "--seed", "4"])[0] == 0
    assert run(["verify", "--rule", gl3, "--ir"])[0] == 0
    assert run(["verify", "--rule", gl3, "--grid", "nonsense"])[0] == 2
    assert run(["verify", "--rule", gl3, "--grid", "random=5", "--random", "5"])[0] == 2


def test_table():
    code, text = run(["table", "--from", "9", "--to", "10"])
    assert code == 0
    assert text == "n,ell,binomial,pi1_exact,pi1_percent\n9,4,35,12/13,92.3\n10,4,56,19/20,95.0\n"
    rows = json.loads(run(["table", "--from", "3", "--to", "4", "--format", "json"])[1])["rows"]
    assert [r["pi1_exact"] for r in rows] == ["2/3", "3/4"]
    assert run(["table", "--from", "5", "--to", "4"])[0] == 2
    human = run(["table", "--from", "9", "--to", "9", "--format", "human"])[1]
    assert "12/13" in human


def test_check():
    code, text = run(["check", "--pi", "3/4,1/4,0,0"])
    assert code == 0 and json.loads(text)["residual"] == "0"
    code, text = run(["check", "--pi", "1,0,0"])
    assert code == 1 and json.loads(text)["residual"] == "-1"
    assert run(["check", "--pi", "1/4,1/2"])[0] == 2
    assert run(["check", "--pi", "a,b"])[0] == 2


def test_certify():
    code, text = run(["certify", "--n", "11"])
    data = json.loads(text)
    assert code == 0 and data["dual_feasible"] and data["strong_duality"]
    assert data["dual_value"] == "85/88"
    assert run(["certify", "--n", "2"])[0] == 2


def test_pareto(files):
    assert run(["pareto", "--rule", files("gl5.json", {"pi": ["4/5", "1/5", 0, 0, 0]})])[0] == 0
    code, text = run(["pareto", "--rule", files("eq.json", {"pi": ["1/4"] * 4})])
    data = json.loads(text)
    assert code == 1 and data["dominated"] and data["witness"] is not None
    assert run(["pareto", "--rule", files("eff.json", {"pi": [1, 0, 0]})])[0] == 2


def test_output_is_byte_identical_across_runs(files):
    for argv in (["optimal", "--n", "14"], ["table", "--from", "3", "--to", "20"], ["certify", "--n", "9"]):
        assert run(argv) == run(argv)


def test_usage_error_exit_code():
    with pytest.raises(SystemExit) as exc:
        main(["optimal"], out=io.StringIO())
    assert exc.value.code == 2


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "rankmech", "optimal", "--n", "5"], capture_output=True, text=True, check=False
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["pi1"] == "4/5"
