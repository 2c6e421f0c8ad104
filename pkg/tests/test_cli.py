import json
import os
import subprocess
import sys

import pytest

from artifact.cli import main


def run_json(capsys, argv):
    code = main(argv + ["--format", "json"])
    return code, json.loads(capsys.readouterr().out)


def test_hh_dual_numbers(capsys):
    code, rep = run_json(capsys, ["hh", "dual-numbers", "--max-degree", "4"])
    assert code == 0
    assert [r["rank"] for r in rep["homology"]] == [2, 1, 1, 1, 1]


def test_hh_ground_and_torsion(capsys):
    code, rep = run_json(capsys, ["hh", "k"])
    assert code == 0 and [r["rank"] for r in rep["homology"]] == [1, 0, 0, 0]
    code, rep = run_json(capsys, ["hh", "group:2", "--ring", "z", "--max-degree", "1"])
    assert rep["homology"][1]["torsion"] == [2, 2]


def test_hh_json_file(capsys, tmp_path):
    data = {"name": "dn", "basis": [{"name": "1"}, {"name": "e"}], "unit": "1",
            "mult": [["1", "1", [["1", 1]]], ["1", "e", [["e", 1]]], ["e", "1", [["e", 1]]]]}
    path = tmp_path / "dn.json"
    path.write_text(json.dumps(data))
    code, rep = run_json(capsys, ["hh", str(path), "--max-degree", "2"])
    assert code == 0 and [r["rank"] for r in rep["homology"]] == [2, 1, 1]


def test_act_shuffle_then_multiply(capsys):
    code, rep = run_json(capsys, ["act", "chopf", "sh(1,1);m", "group:2", "--max-degree", "1"])
    assert code == 0
    m0 = rep["matrices"]["0"]
    assert (m0["rows"], m0["cols"]) == (2, 4)
    # g^i ⊗ g^j -> g^{i+j}
    assert m0["dense"] == [["1", "0", "0", "1"], ["0", "1", "1", "0"]]


def test_act_markdown(capsys):
    assert main(["act", "com", "sh(1,1);m", "dual-numbers", "--max-degree", "0"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("# act com") and "degree 0: 2x4" in out


def test_usage_errors(capsys):
    assert main(["act", "chopf", "m;sh(1,1)", "group:2"]) == 2
    assert main(["verify", "no-such-suite"]) == 2
    assert main(["hh", "no-such-algebra"]) == 2
    assert main(["hh", "k", "--ring", "f4"]) == 2
    assert main(["hh", "k", "--max-degree", "-1"]) == 2
    assert main(["act", "chopf", "m", "dual-numbers"]) == 2
    assert main([]) == 2
    capsys.readouterr()


def test_guards(capsys):
    assert main(["hh", "k", "--max-degree", "7"]) == 3
    assert main(["act", "com", "m", "k", "--max-degree", "5"]) == 3
    capsys.readouterr()


def test_verify_dold_kan(capsys):
    code, rep = run_json(capsys, ["verify", "dold-kan", "--max-degree", "5"])
    assert code == 0 and rep["verdict"] == "pass"
    assert rep["checks"]


def test_verify_chopf_includes_theta(capsys):
    code, rep = run_json(capsys, ["verify", "chopf", "--max-degree", "2"])
    assert code == 0
    assert any("θ" in r["check"] and r["verdict"] == "pass" for r in rep["checks"])


@pytest.mark.parametrize("suite", ["bcy", "natural", "fatten"])
def test_verify_suites_pass(capsys, suite):
    code, rep = run_json(capsys, ["verify", suite, "--max-degree", "2"])
    assert code == 0 and rep["verdict"] == "pass"


def test_reports_are_deterministic(tmp_path):
    outs = []
    for i in range(2):
        p = tmp_path / f"r{i}.json"
        assert main(["verify", "fatten", "--max-degree", "2", "--seed", "3",
                     "--format", "json", "--out", str(p)]) == 0
        outs.append(p.read_bytes())
    assert outs[0] == outs[1]
    assert b"seconds" not in outs[0]


def test_timings_flag(capsys):
    code, rep = run_json(capsys, ["verify", "bcy", "--max-degree", "1", "--timings"])
    assert code == 0 and "bcy" in rep["seconds"]


def test_module_entry_point():
    env = dict(os.environ)
    src = os.path.join(os.path.dirname(os.path.dirname(__file__)), "src")
    env["PYTHONPATH"] = src + os.pathsep + env.get("PYTHONPATH", "")
    r = subprocess.run([sys.executable, "-m", "artifact", "hh", "k", "--max-degree", "1"],
                       capture_output=True, text=True, env=env)
    assert r.returncode == 0 and "| 0 | 1 | [] |" in r.stdout
