import json

import pytest

from cpgames.cli import EXIT_OK, EXIT_VALIDATION, main


def run(*argv):
    return main([str(a) for a in argv])


def test_collab_zero_iterations(tmp_path):
    assert run("collab", "--modes", "unsocial-optimistic", "--iterations", 0, "--out-dir", tmp_path) == EXIT_VALIDATION


def test_adver_bad_probs(tmp_path):
    code = run("adver", "--modes", "unsocial-optimistic", "--ticks", 10, "--probs", "0.3,0.3,0.3", "--out-dir", tmp_path)
    assert code == EXIT_VALIDATION


def test_unknown_flag():
    assert run("collab", "--bogus") == EXIT_VALIDATION


def test_collab_outputs_and_determinism(tmp_path):
    args = ("collab", "--modes", "social-optimistic", "--iterations", 300, "--seed", 5)
    assert run(*args, "--out-dir", tmp_path / "a") == EXIT_OK
    assert run(*args, "--out-dir", tmp_path / "b") == EXIT_OK
    for name in ("trace.csv", "report.json", "comparison.json", "curves.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    rep = json.loads((tmp_path / "a" / "report.json").read_text())
    assert rep["provenance"]["version"] == "0.1.0"
    assert rep["provenance"]["config"]["seed"] == 5


def test_config_file_and_flag_override(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"modes": "unsocial-realistic", "iterations": 20, "seed": 1}))
    assert run("collab", "--config", cfg, "--seed", 2, "--out-dir", tmp_path / "o") == EXIT_OK
    rep = json.loads((tmp_path / "o" / "report.json").read_text())
    assert rep["report"]["seed"] == 2 and rep["report"]["config"]["iterations"] == 20


def test_unknown_config_key(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"modes": "unsocial-realistic", "iterations": 20, "sed": 1}))
    assert run("collab", "--config", cfg, "--out-dir", tmp_path) == EXIT_VALIDATION


def test_env_seed(tmp_path, monkeypatch):
    monkeypatch.setenv("CPG_SEED", "77")
    assert run("collab", "--modes", "social-realistic", "--iterations", 5, "--out-dir", tmp_path) == EXIT_OK
    assert json.loads((tmp_path / "report.json").read_text())["report"]["seed"] == 77


def test_adver_tracks_predicted_path(tmp_path):
    assert run("adver", "--modes", "social-realistic", "--ticks", 2000, "--seed", 1, "--out-dir", tmp_path) == EXIT_OK
    paths = json.loads((tmp_path / "paths.json").read_text())
    assert paths["predicted"][0]["path"] == [0, 3]
    header = (tmp_path / "trace.csv").read_text().splitlines()[1]
    assert header == "tick,state_index,phi_cum,psi_cum,in_predicted_path"


def test_replications_merge_by_index(tmp_path):
    args = ("adver", "--modes", "unsocial-realistic", "--ticks", 500, "--seed", 3, "--replications", 2)
    assert run(*args, "--out-dir", tmp_path / "a") == EXIT_OK
    assert run(*args, "--out-dir", tmp_path / "b") == EXIT_OK
    merged = json.loads((tmp_path / "a" / "merged.json").read_text())
    assert [r["replication"] for r in merged["replications"]] == [0, 1]
    assert merged["replications"][0]["seed"] == 3
    assert (tmp_path / "a" / "merged.json").read_bytes() == (tmp_path / "b" / "merged.json").read_bytes()


def test_matrix_and_paths(tmp_path, capsys):
    assert run("matrix", "--modes", "unsocial-optimistic", "--out-dir", tmp_path) == EXIT_OK
    diff = json.loads((tmp_path / "matrix_diff.json").read_text())
    assert diff["n_cells"] == len(diff["cells"])
    capsys.readouterr()
    assert run("paths", tmp_path / "matrix_fixture.csv", "--out-dir", tmp_path) == EXIT_OK
    assert json.loads((tmp_path / "paths.json").read_text())["paths"] == [[3, 5, 7]]


def test_paths_parse_error(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("0,1\n1,zz\n")
    assert run("paths", bad) == EXIT_VALIDATION
    assert "row 1, column 1" in capsys.readouterr().err


def test_predict_and_compare(tmp_path):
    assert run("predict", "--modes", "unsocial-optimistic", "--out-dir", tmp_path) == EXIT_OK
    pred = json.loads((tmp_path / "prediction.json").read_text())
    assert pred["prediction"]["rates"]["phi"] == {"num": 1, "den": 3}
    run("collab", "--modes", "unsocial-optimistic", "--iterations", 100, "--seed", 1, "--out-dir", tmp_path / "r")
    assert run("compare", tmp_path / "r" / "report.json", "--out-dir", tmp_path / "c") == EXIT_OK
    assert (tmp_path / "c" / "curves.csv").exists()
