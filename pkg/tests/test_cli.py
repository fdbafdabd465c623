import json

import pytest

from curvebill.cli import EXIT_CONFIG, EXIT_OK, EXIT_VERIFY, ExperimentConfig, main


@pytest.fixture(autouse=True)
def _no_env_seed(monkeypatch):
    monkeypatch.delenv("CURVEBILL_SEED", raising=False)


def run(tmp_path, name, *args):
    out = tmp_path / name
    code = main([*args, "--out", str(out)])
    return code, out.read_text() if out.exists() else ""


def test_find_orbits_json(tmp_path):
    code, text = run(tmp_path, "o.json", "find-orbits", "--table",
                     "geodesic_circle:kappa=0,r=1", "--multistarts", "4")
    assert code == EXIT_OK
    doc = json.loads(text)
    assert doc["config"]["multistarts"] == 4
    assert doc["orbits"]
    assert doc["orbits"][0]["classification"] == "Degenerate"


def test_measure_scan_csv_and_determinism(tmp_path):
    args = ["measure-scan", "--table", "ellipse_euclidean:a=1.2,b=1.0",
            "--n", "20000", "--eps0", "0.05", "--seed", "4"]
    c1, a = run(tmp_path, "a.csv", *args, "--workers", "1")
    c2, b = run(tmp_path, "b.csv", *args, "--workers", "2")
    assert c1 == c2 == EXIT_OK
    assert a == b
    lines = a.splitlines()
    assert lines[0].startswith("# config: ")
    assert len(lines) == 2 + 4


def test_config_file_and_precedence(tmp_path, monkeypatch):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"table": "octant_s2", "n": 50, "seed": 1}))
    monkeypatch.setenv("CURVEBILL_SEED", "99")
    code, text = run(tmp_path, "d.csv", "octant-demo", "--config", str(cfg), "--seed", "7")
    assert code == EXIT_OK
    header = json.loads(text.splitlines()[0][len("# config: "):])
    assert header["seed"] == 7 and header["n"] == 50
    code, text = run(tmp_path, "e.csv", "octant-demo", "--config", str(cfg))
    header = json.loads(text.splitlines()[0][len("# config: "):])
    assert header["seed"] == 1
    cfg.write_text(json.dumps({"n": 5}))
    code, text = run(tmp_path, "f.csv", "octant-demo", "--config", str(cfg))
    header = json.loads(text.splitlines()[0][len("# config: "):])
    assert header["seed"] == 99


def test_octant_demo_excludes_corner_start(tmp_path):
    code, text = run(tmp_path, "g.csv", "octant-demo", "--n", "20", "--start", "0.0", "0.7")
    assert code == EXIT_OK
    lines = text.splitlines()
    assert "indices=[0]" in lines[1]
    rows = [ln.split(",") for ln in lines[3:]]
    assert len(rows) >= 19
    for r in rows:
        assert abs(float(r[3]) - 3.141592653589793) < 1e-8
        assert float(r[4]) < 1e-8


@pytest.mark.parametrize("args", [
    ["find-orbits", "--table", "not_a_table"],
    ["measure-scan", "--halvings", "2"],
    ["measure-scan", "--n", "0"],
    ["find-orbits", "--table", "geodesic_circle:kappa=1,r=2"],
])
def test_config_errors(tmp_path, args):
    code, _ = run(tmp_path, "x", *args)
    assert code == EXIT_CONFIG


def test_bad_config_file(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    assert main(["verify", "--config", str(p)]) == EXIT_CONFIG
    p.write_text(json.dumps({"bogus_key": 1}))
    assert main(["verify", "--config", str(p)]) == EXIT_CONFIG


@pytest.mark.slow
def test_verify_passes_and_debug_flags_fail(tmp_path, capsys):
    assert main(["verify"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "FAIL" not in out
    assert main(["verify", "--debug-printed-s2"]) == EXIT_VERIFY
    out = capsys.readouterr().out
    assert "top_right_entry_identity  FAIL" in out
    assert main(["verify", "--debug-flip-kg"]) == EXIT_VERIFY


def test_config_round_trip():
    cfg = ExperimentConfig.from_dict({"command": "measure-scan", "table": "hemisphere_s2"})
    again = ExperimentConfig.from_dict(cfg.to_dict())
    assert again == cfg
