import csv
import json
from pathlib import Path

import pytest

import zrplab
from zrplab.cli import (
    TASKS,
    ScenarioError,
    load_scenario,
    main,
    run_scenario,
    validate_scenario,
)

SCENARIO_DIR = Path(zrplab.__file__).parent / "scenarios"


def _write(tmp_path, doc, name="scenario.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return path


def _stationary_doc(**overrides):
    doc = {
        "graph": {"kind": "two-site"},
        "alpha": 2.0,
        "ladder": [20, 40, 80],
        "task": "stationary",
        "seed": 0,
        "params": {},
    }
    doc.update(overrides)
    return doc


def test_list_tasks_prints_catalog(capsys):
    assert main(["list-tasks"]) == 0
    catalog = json.loads(capsys.readouterr().out)
    assert set(catalog) == set(TASKS)
    for spec in catalog.values():
        assert "description" in spec and "params" in spec


def test_stationary_run_writes_artifacts(tmp_path, capsys):
    path = _write(tmp_path, _stationary_doc())
    out = tmp_path / "out"
    assert main(["run", str(path), "--out", str(out)]) == 0
    index = json.loads((out / "index.json").read_text())
    names = {a["path"] for a in index["artifacts"]}
    assert {"partition_convergence.csv", "stationary_rho.csv", "sidecar.json"} <= names
    # header comment carries tool version, scenario hash, task, and seed
    first = (out / "partition_convergence.csv").read_text().splitlines()[0]
    assert first.startswith("# zrplab ")
    assert "task=stationary" in first and "seed=0" in first
    with (out / "partition_convergence.csv").open() as fh:
        fh.readline()
        rows = list(csv.DictReader(fh))
    assert [int(r["N"]) for r in rows] == [20, 40, 80]


def test_runs_are_byte_identical(tmp_path):
    path = _write(tmp_path, _stationary_doc())
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert main(["run", str(path), "--out", str(out1)]) == 0
    assert main(["run", str(path), "--out", str(out2)]) == 0
    files1 = sorted(p.name for p in out1.iterdir())
    assert files1 == sorted(p.name for p in out2.iterdir())
    for name in files1:
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()


def test_index_hashes_match_files(tmp_path):
    path = _write(tmp_path, _stationary_doc())
    out = tmp_path / "out"
    assert main(["run", str(path), "--out", str(out)]) == 0
    import hashlib

    index = json.loads((out / "index.json").read_text())
    for art in index["artifacts"]:
        data = (out / art["path"]).read_bytes()
        assert hashlib.sha256(data).hexdigest() == art["sha256"]
        assert len(data) == art["bytes"]


def test_unknown_task_prints_catalog(tmp_path, capsys):
    path = _write(tmp_path, _stationary_doc(task="bogus"))
    assert main(["run", str(path), "--out", str(tmp_path / "out")]) == 1
    err = capsys.readouterr().err
    assert "unknown task" in err
    assert "stationary" in err  # catalog follows the error


def test_missing_scenario_file(tmp_path, capsys):
    assert main(["run", str(tmp_path / "nope.json")]) == 1
    assert "not found" in capsys.readouterr().err


def test_bad_ladder_rejected(tmp_path, capsys):
    path = _write(tmp_path, _stationary_doc(ladder=[40, 20]))
    assert main(["run", str(path), "--out", str(tmp_path / "out")]) == 1
    assert "ladder" in capsys.readouterr().err


def test_validate_scenario_rejects_unknown_params():
    with pytest.raises(ScenarioError, match="unknown parameter"):
        validate_scenario(_stationary_doc(params={"wat": 1}))
    with pytest.raises(ScenarioError, match="alpha"):
        validate_scenario(_stationary_doc(alpha=1.0))


def test_state_cap_env_gives_clean_error(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("ZRPLAB_CAP_STATES", "10")
    path = _write(tmp_path, _stationary_doc())
    assert main(["run", str(path), "--out", str(tmp_path / "out")]) == 1
    err = capsys.readouterr().err
    assert "ZRPLAB_CAP_STATES" in err and "hint" in err


def test_threshold_failure_exits_two(tmp_path, capsys):
    path = _write(tmp_path, _stationary_doc(params={"max_error": 0.0}))
    assert main(["run", str(path), "--out", str(tmp_path / "out")]) == 2


def test_toml_scenario_normalizes(tmp_path):
    toml = tmp_path / "scenario.toml"
    toml.write_text(
        'task = "stationary"\nalpha = 2.0\nladder = [20, 40, 80]\nseed = 3\n'
        '[graph]\nkind = "two-site"\n'
    )
    doc = validate_scenario(load_scenario(toml))
    assert doc["task"] == "stationary" and doc["seed"] == 3
    out = tmp_path / "out"
    assert main(["run", str(toml), "--out", str(out)]) == 0
    sidecar = json.loads((out / "sidecar.json").read_text())
    assert sidecar["seed"] == 3


def test_cli_overrides_task_and_seed(tmp_path):
    path = _write(tmp_path, _stationary_doc())
    out = tmp_path / "out"
    code = main(
        ["run", str(path), "--out", str(out), "--task", "rate-table", "--seed", "5"]
    )
    assert code == 0
    sidecar = json.loads((out / "sidecar.json").read_text())
    assert sidecar["task"] == "rate-table" and sidecar["seed"] == 5


def test_bundled_scenarios_validate():
    paths = sorted(SCENARIO_DIR.glob("*.json")) + sorted(SCENARIO_DIR.glob("*.toml"))
    assert len(paths) >= 5
    for path in paths:
        doc = validate_scenario(load_scenario(path))
        assert doc["task"] in TASKS


def test_selftest_scenario_all_checks_pass(tmp_path, capsys):
    path = SCENARIO_DIR / "two_site_selftest.toml"
    out = tmp_path / "out"
    assert main(["run", str(path), "--out", str(out)]) == 0
    with (out / "selftest.csv").open() as fh:
        fh.readline()
        rows = list(csv.DictReader(fh))
    assert len(rows) >= 8
    assert all(r["status"] == "pass" for r in rows)


def test_figures_flag_renders_png(tmp_path):
    pytest.importorskip("matplotlib")
    path = _write(tmp_path, _stationary_doc())
    out = tmp_path / "out"
    assert main(["run", str(path), "--out", str(out), "--figures"]) == 0
    pngs = list(out.glob("*.png"))
    assert pngs
    index = json.loads((out / "index.json").read_text())
    assert any(a["path"].endswith(".png") for a in index["artifacts"])


def test_run_scenario_python_api(tmp_path):
    code, writer = run_scenario(_stationary_doc(), tmp_path / "out")
    assert code == 0
    assert any(a["path"] == "partition_convergence.csv" for a in writer.artifacts)
