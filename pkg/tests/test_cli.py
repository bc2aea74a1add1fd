"""Config validation, artifact layout and CLI exit codes."""

import hashlib
import json
import os

import pytest

from conftest import TWO_D_OP, model_file
from gosp.cli import SchemaError, main, parse_config, run, validate_plan
from gosp.field import MIXER_ID


def _survival_plan(model_path, **over):
    plan = {
        "estimator": "survival", "model": model_path, "seed": 7,
        "p": 1.0, "T": 5, "reps": 20,
    }
    plan.update(over)
    return plan


@pytest.fixture
def model_path(tmp_path):
    return model_file(tmp_path, TWO_D_OP)


# ---------------------------------------------------------------------------
# schema validation

def test_validate_plan_accepts_minimal(model_path):
    plan = _survival_plan(model_path)
    assert validate_plan(plan) is plan


def test_unknown_key_pointer(model_path):
    with pytest.raises(SchemaError) as exc:
        validate_plan(_survival_plan(model_path, foo=1))
    assert exc.value.pointer == "/foo"


def test_bad_value_pointer(model_path):
    with pytest.raises(SchemaError) as exc:
        validate_plan(_survival_plan(model_path, p="high"))
    assert exc.value.pointer == "/p"
    with pytest.raises(SchemaError) as exc:
        validate_plan(_survival_plan(model_path, p=1.5))
    assert exc.value.pointer == "/p"


def test_missing_required_key(model_path):
    plan = _survival_plan(model_path)
    del plan["reps"]
    with pytest.raises(SchemaError) as exc:
        validate_plan(plan)
    assert "reps" in str(exc.value)


def test_unknown_estimator():
    with pytest.raises(SchemaError) as exc:
        validate_plan({"estimator": "magic", "model": "m", "seed": 1})
    assert exc.value.pointer == "/estimator"


def test_parse_config_rejects_bad_json(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    with pytest.raises(SchemaError):
        parse_config(str(path))


def test_parse_config_roundtrip(tmp_path, model_path):
    path = tmp_path / "plan.json"
    path.write_text(json.dumps(_survival_plan(model_path)))
    assert parse_config(str(path))["estimator"] == "survival"


# ---------------------------------------------------------------------------
# artifacts

def test_run_artifacts(tmp_path, model_path):
    out = tmp_path / "out"
    res = run(_survival_plan(model_path), out_dir=str(out))
    assert res["rows"][0]["mean"] == 1.0

    csv_text = (out / "summary.csv").read_bytes().decode()
    assert csv_text.splitlines()[0] == (
        "estimator,p,T,reps,mean,stderr,ci_lo,ci_hi,seed"
    )
    assert "\r" not in csv_text

    lines = (out / "results.jsonl").read_text().splitlines()
    assert len(lines) == 20
    recs = [json.loads(line) for line in lines]
    assert [r["replica"] for r in recs] == list(range(20))
    assert all(r["tau"] is None for r in recs)       # p = 1: nobody dies
    for line in lines:
        assert line == line.rstrip()

    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["mixer"] == MIXER_ID
    assert manifest["master_seed"] == 7
    assert manifest["timing"]["wall_s"] >= 0
    with open(model_path, "rb") as fh:
        assert manifest["model_sha256"] == hashlib.sha256(fh.read()).hexdigest()
    assert not list(out.glob("*.partial"))


def test_run_is_reproducible_across_threads(tmp_path, model_path):
    plan = _survival_plan(model_path, p=0.6, T=30, reps=3000)
    outs = []
    for name, threads in (("a", 1), ("b", 2), ("c", 1)):
        d = tmp_path / name
        run(dict(plan), parallelism=threads, out_dir=str(d))
        outs.append(
            ((d / "results.jsonl").read_bytes(), (d / "summary.csv").read_bytes())
        )
    assert outs[0] == outs[1] == outs[2]


def test_refused_run_leaves_manifest_only(tmp_path, model_path):
    out = tmp_path / "out"
    code = main([
        "shape", "--model", model_path, "--seed", "1", "--p", "0.3",
        "--T", "20", "--reps", "5", "--out", str(out),
    ])
    assert code == 2
    assert (out / "manifest.json").exists()
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["timing"] is None       # crash-safe: written before results
    assert not (out / "results.jsonl").exists()
    assert not (out / "summary.csv").exists()


def test_simulate_snapshot_records(tmp_path, model_path):
    out = tmp_path / "out"
    plan = {
        "estimator": "simulate", "model": model_path, "seed": 3,
        "p": 1.0, "T": 4, "reps": 2, "snapshots": [0, 4],
    }
    run(plan, out_dir=str(out))
    recs = [
        json.loads(line)
        for line in (out / "results.jsonl").read_text().splitlines()
    ]
    for r in recs:
        times = [s["t"] for s in r["snapshots"]]
        assert times == [0, 4]
        assert set(recs[0]["snapshots"][0]) == {"t", "anchor", "shape", "rows"}


# ---------------------------------------------------------------------------
# exit codes

def test_main_validate_ok(capsys, model_path):
    assert main(["validate", "--model", model_path]) == 0
    assert "R=1" in capsys.readouterr().out


def test_main_validate_proper_sublattice(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"d": 2, "X": [[-1, 1], [1, 1]]}))
    assert main(["validate", "--model", str(path)]) == 1
    assert "ProperSublattice" in capsys.readouterr().err


def test_main_schema_error_exit_code(tmp_path, model_path, capsys):
    cfg = tmp_path / "plan.json"
    cfg.write_text(json.dumps(_survival_plan(model_path, foo=1)))
    assert main(["survival", "--config", str(cfg)]) == 1
    assert "/foo" in capsys.readouterr().err


def test_main_missing_model_flag(capsys):
    assert main(["survival", "--seed", "1", "--p", "0.5", "--T", "5",
                 "--reps", "10"]) == 1
    assert "/model" in capsys.readouterr().err


def test_main_success_prints_rows(tmp_path, model_path, capsys):
    out = tmp_path / "out"
    code = main([
        "survival", "--model", model_path, "--seed", "2", "--p", "1.0",
        "--T", "5", "--reps", "10", "--out", str(out),
    ])
    assert code == 0
    assert "survival: mean=1.0" in capsys.readouterr().out
