import json

import pytest

from hcontent.cli import main
from hcontent.io import load_grid, read_json


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    return tmp_path


def run(*argv):
    return main(list(argv))


def test_gen_round_trip_digest(workdir):
    assert run("gen", "--kind", "cantor-dust", "--n", "2", "--L", "4", "--dimension", "1", "-o", "E.json") == 0
    doc = read_json("E.json")
    E = load_grid(doc)
    assert E.digest() == doc["digest"]
    assert doc["tool_version"] and doc["config"]["kind"] == "cantor-dust"
    assert run("gen", "--kind", "cantor-dust", "--n", "2", "--L", "4", "--dimension", "1", "-o", "E2.json") == 0
    assert read_json("E2.json")["digest"] == doc["digest"]


def test_content_command(workdir):
    run("gen", "--kind", "union-of-cubes", "--n", "2", "--L", "3", "--seed", "3", "-o", "E.json")
    assert run("content", "-i", "E.json", "--delta", "1.5", "--backend", "dyadic", "-o", "c.json") == 0
    doc = read_json("c.json")
    assert doc["type"] == "ContentResult" and doc["schema"] == 1
    assert doc["value"] > 0 and doc["certificate"] and doc["bracket"]["c_low"] > 0
    assert doc["input_digests"]["input"] == read_json("E.json")["digest"]
    assert run("content", "-i", "E.json", "--delta", "1.5", "--backend", "ball-greedy", "-o", "b.json") == 0
    assert read_json("b.json")["value"] <= doc["bracket"]["c_high"] * doc["value"] * (1 + 1e-12)


def test_integrate_maximal_riesz_render(workdir):
    run("gen", "--kind", "random-simple", "--n", "2", "--L", "3", "-o", "f.json")
    assert run("integrate", "-i", "f.json", "--delta", "1", "--p", "2", "-o", "i.json") == 0
    assert read_json("i.json")["p"] == 2.0
    for variant in ("centered", "uncentered", "sharp", "classical"):
        assert run("maximal", "-i", "f.json", "--variant", variant, "-o", f"m-{variant}.json") == 0
    assert run("maximal", "-i", "f.json", "--kappa", "0.5", "--svg", "m.svg", "--scale", "log", "-o", "m.json") == 0
    assert (workdir / "m.svg").read_text().startswith("<?xml")
    assert run("riesz", "-i", "f.json", "--alpha", "1", "-o", "r.json") == 0
    assert run("riesz", "-i", "f.json", "--alpha", "1", "--classical", "-o", "rc.json") == 0
    assert run("render", "-i", "r.json", "-o", "r.svg") == 0


def test_verify_pass_and_outputs(workdir):
    code = run("verify", "--suite", "i7-holder", "--samples", "200", "--seed", "7", "-o", "v.json", "--csv", "v.csv")
    assert code == 0
    doc = read_json("v.json")
    assert doc["verdict"] == "pass" and doc["reports"][0]["summary"]["violations"] == 0
    assert "timestamp" in doc
    lines = (workdir / "v.csv").read_text().splitlines()
    assert lines[0].startswith("suite,index") and len(lines) == 201


def test_verify_failure_exit_code(workdir):
    # an artificially small cap must fail the suite
    assert run("verify", "--suite", "i6", "--cap", "0.5", "--samples", "20", "-o", "v.json") == 1


def test_hypothesis_gate(workdir, capsys):
    code = run("verify", "--suite", "thm-5.2", "--n", "2", "--delta", "1.5", "--alpha", "0.5", "--p", "0.7")
    assert code == 2
    assert "(0.75, 3)" in capsys.readouterr().err
    code = run("verify", "--suite", "thm-5.2", "--n", "2", "--L", "3", "--delta", "1.5", "--alpha", "0.5",
               "--p", "0.9", "--samples", "3", "-o", "ok.json")
    assert code == 0


def test_sweep_csv(workdir):
    code = run("sweep", "--suite", "thm-4.3", "--n", "2", "--L", "3", "--delta", "1.5", "--param", "p",
               "--values", "0.7875,1.5", "--samples", "6", "-o", "s.csv")
    assert code == 0
    lines = (workdir / "s.csv").read_text().splitlines()
    assert lines[0] == "p,max_ratio,verdict,trend" and len(lines) == 3


def test_config_file_and_override(workdir):
    run("gen", "--kind", "checkerboard", "--n", "2", "--L", "2", "-o", "E.json")
    (workdir / "cfg.json").write_text(json.dumps({"delta": 1.0, "p": 2.0}))
    assert run("integrate", "-i", "E.json", "--config", "cfg.json", "--delta", "2", "-o", "x.json") == 0
    doc = read_json("x.json")
    assert doc["delta"] == 2.0 and doc["p"] == 2.0
    (workdir / "bad.json").write_text(json.dumps({"nonsense": 1}))
    assert run("integrate", "-i", "E.json", "--config", "bad.json") == 2


def test_error_exit_codes(workdir):
    assert run("content", "-i", "missing.json", "--delta", "1") == 3
    assert run("frobnicate") == 2
    assert run("verify", "--suite", "no-such-suite") == 2
    run("gen", "--kind", "random-simple", "--n", "2", "--L", "2", "-o", "f.json")
    assert run("content", "-i", "f.json", "--delta", "1") == 2
    assert run("maximal", "-i", "f.json", "--delta", "3") == 2
