"""Experiment runner: config validation, determinism, reports, exit codes."""

import json
import os

import numpy as np
import pytest

from vexpot.acceptance import ACCEPTANCE_CHECKS
from vexpot.cli import (
    ConfigError,
    ExperimentConfig,
    load_config,
    main,
    run,
)
from vexpot.grids import load_grid_function


def _write_config(path, **overrides):
    raw = {
        "experiment_id": "t",
        "seed": 5,
        "space": "whole",
        "box": [[-1, -1, -1], [1, 1, 1]],
        "h": 0.25,
        "exponent": {"rule": "constant", "value": 2.0},
        "data": {"count": 2, "components": 1, "mean_zero": True},
        "checks": ["norms"],
        "tolerances": {"residual": 0.5},
        "output_dir": str(path.parent / "out"),
    }
    raw.update(overrides)
    path.write_text(json.dumps(raw))
    return raw


def test_load_config_roundtrip(tmp_path):
    cfg_path = tmp_path / "c.json"
    _write_config(cfg_path)
    config = load_config(cfg_path)
    assert config.experiment_id == "t"
    assert config.seed == 5
    assert config.grid_shape() == (9, 9, 9)
    assert config.domain().n == 3
    assert config.exponent_on(config.domain()).p_minus == 2.0
    # the hash covers the experiment content, not the output location
    other = ExperimentConfig(**{**config.__dict__, "output_dir": "x"})
    assert other.config_hash() == config.config_hash()


def test_config_error_lists_all_offending_fields(tmp_path):
    cfg_path = tmp_path / "bad.json"
    cfg_path.write_text(json.dumps({
        "experiment_id": "",
        "seed": "no",
        "h": -1,
        "space": "tube",
        "mystery": 1,
        "tolerances": {"a": 0.0},
    }))
    with pytest.raises(ConfigError) as err:
        load_config(cfg_path)
    assert set(err.value.fields) >= {"experiment_id", "seed", "h", "space",
                                     "mystery", "tolerances"}


def test_config_error_on_unreadable_and_bad_json(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.json")
    bad = tmp_path / "notjson.json"
    bad.write_text("{nope")
    with pytest.raises(ConfigError):
        load_config(bad)


def test_half_space_box_must_touch_wall(tmp_path):
    cfg_path = tmp_path / "c.json"
    _write_config(cfg_path, space="half", box=[[-1, -1, 0.5], [1, 1, 1]])
    with pytest.raises(ConfigError) as err:
        load_config(cfg_path)
    assert "box" in err.value.fields


def test_bounded_space_cannot_solve(tmp_path):
    cfg_path = tmp_path / "c.json"
    _write_config(cfg_path, space="bounded", checks=["poisson"])
    with pytest.raises(ConfigError) as err:
        load_config(cfg_path)
    assert "checks" in err.value.fields


def test_empty_checks_give_empty_tables_with_provenance(tmp_path):
    cfg_path = tmp_path / "c.json"
    _write_config(cfg_path, checks=[])
    bundle = run(load_config(cfg_path), write_files=False)
    assert bundle.tables == {}
    assert bundle.passed
    assert len(bundle.provenance["config_hash"]) == 64
    assert bundle.provenance["code_version"]
    assert bundle.provenance["seed"] == 5
    # every acceptance criterion appears exactly once, as not-run
    acc = bundle.summary["acceptance"]
    assert sorted(acc) == sorted(name for name, _ in ACCEPTANCE_CHECKS)
    assert all(info["status"] == "not-run" for info in acc.values())


def test_norm_stage_rows_carry_required_columns(tmp_path):
    cfg_path = tmp_path / "c.json"
    _write_config(cfg_path)
    bundle = run(load_config(cfg_path), write_files=False)
    rows = bundle.tables["norms"]
    assert len(rows) == 2
    for row in rows:
        assert row["experiment-id"] == "t"
        assert row["h"] == 0.25
        assert row["exponent-id"] == "constant,value=2.0"
        assert row["seed"] == 5
        assert row["norm"] > 0


def test_same_config_and_seed_byte_identical(tmp_path):
    cfg_path = tmp_path / "c.json"
    _write_config(cfg_path, checks=["norms", "kernel-identities"])
    config = load_config(cfg_path)
    out1, out2 = tmp_path / "r1", tmp_path / "r2"
    for out in (out1, out2):
        os.environ["VEXPOT_OUTPUT_DIR"] = str(out)
        try:
            run(config)
        finally:
            del os.environ["VEXPOT_OUTPUT_DIR"]
    for name in ("norms.csv", "kernel-checks.csv", "summary.json"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes(), name


def test_solve_stage_writes_loadable_binaries(tmp_path):
    cfg_path = tmp_path / "c.json"
    _write_config(cfg_path, checks=["poisson"],
                  output_dir=str(tmp_path / "out"))
    config = load_config(cfg_path)
    bundle = run(config)
    u = load_grid_function(tmp_path / "out" / "poisson-potential.grid")
    assert u.grid_shape == (9, 9, 9)
    assert np.all(np.isfinite(u.values))
    row = bundle.tables["residuals"][0]
    assert row["solve"] == "poisson"
    assert row["residual"] == bundle.summary["poisson"]["residual"]


def test_main_exit_codes(tmp_path, capsys):
    cfg_path = tmp_path / "c.json"
    _write_config(cfg_path)
    assert main(["norm", "--config", str(cfg_path)]) == 0
    out = capsys.readouterr().out
    assert "field-0" in out and "norm=" in out

    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"experiment_id": ""}))
    assert main(["norm", "--config", str(bad)]) == 2
    assert "experiment_id" in capsys.readouterr().err

    assert main(["kernel-check"]) == 0
    assert main(["verify", "--estimate", "bogus"]) == 2
    assert main(["verify", "--estimate", "holder-product",
                 "--family", "count=2,seed=1,shape=9"]) == 0
    assert main(["verify", "--estimate", "holder-product",
                 "--family", "count=2,banana=1"]) == 2


def test_main_accept_subset(tmp_path, capsys):
    out = tmp_path / "acc"
    code = main(["accept", "--only", "localization-identity",
                 "--out", str(out)])
    assert code == 0
    printed = capsys.readouterr().out
    assert "PASS" in printed and "localization-identity" in printed
    payload = json.loads((out / "summary.json").read_text())
    acc = payload["summary"]["acceptance"]
    assert acc["localization-identity"]["status"] == "pass"
    assert acc["norm-axioms"]["status"] == "not-run"
    assert len(acc) == len(ACCEPTANCE_CHECKS)


def test_run_acceptance_rejects_unknown_names():
    from vexpot.acceptance import run_acceptance
    with pytest.raises(ValueError, match="unknown acceptance checks"):
        run_acceptance(["no-such-criterion"])
