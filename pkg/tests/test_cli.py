import json
from pathlib import Path

import numpy as np
import pytest

from fsir.cli import main
from fsir.config import ConfigError, RunConfig


def small_config(**over):
    doc = {
        "basis": {"family": "cosine", "n_basis": 20, "grid_size": 128},
        "example": {"kind": "binary", "alpha": 2.0, "delta": 0.5},
        "sample": {"n": 400, "seed": 3, "n_mc": 5000},
        "estimate": {"slices": "by_category", "rank_tol": 1e-3, "ridge_C": 1e-3, "d": 1},
        "diagnostics": {"trials": 20, "linearity_n": 2000},
    }
    for section, vals in over.items():
        doc.setdefault(section, {}).update(vals)
    return doc


def write_config(tmp_path, doc, name="config.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


def run(cfg, out, *cmds):
    for c in cmds:
        code = main([c, "--config", cfg, "--out", str(out)])
        if code:
            return code
    return 0


def test_full_pipeline(tmp_path):
    cfg = write_config(tmp_path, small_config())
    out = tmp_path / "run"
    assert run(cfg, out, "simulate", "fit", "oracle-compare", "diagnose") == 0
    comp = json.loads((out / "comparison.json").read_text())
    for key in ("cosine_gamma_metric", "subspace_distance", "lambda_hat", "lambda_oracle",
                "mc_error_rate", "analytic_error_rate"):
        assert comp[key] is not None
    assert comp["cosine_gamma_metric"] >= 0.9
    assert abs(comp["mc_error_rate"] - comp["analytic_error_rate"]) < 0.02
    diag = json.loads((out / "diagnostics.json").read_text())
    checks = [r["check"] for r in diag["reports"]]
    assert checks[0] == "theorem1" and checks[-1] == "linearity"


def test_envelope_and_no_temp_files(tmp_path):
    doc = small_config()
    cfg = write_config(tmp_path, doc)
    out = tmp_path / "run"
    assert run(cfg, out, "simulate", "fit", "oracle-compare", "diagnose") == 0
    resolved = RunConfig.from_dict(doc).to_dict()
    for name in ("result.json", "slice_means.json", "comparison.json", "diagnostics.json"):
        body = json.loads((out / name).read_text())
        assert body["format_version"] == 1
        assert body["config"] == resolved
        assert body["kind"]
    for name in ("dataset.csv", "betas.csv"):
        meta = json.loads((out / name).read_text().splitlines()[0][2:])
        assert meta["format_version"] == 1 and meta["config"] == resolved
    assert not [p for p in out.iterdir() if p.name.startswith(".")]


def test_byte_identical_reruns(tmp_path):
    cfg = write_config(tmp_path, small_config())
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert run(cfg, out, "simulate", "fit", "oracle-compare", "diagnose") == 0
    for name in sorted(p.name for p in a.iterdir()):
        assert (a / name).read_bytes() == (b / name).read_bytes(), name


def test_seed_override(tmp_path):
    cfg = write_config(tmp_path, small_config())
    main(["simulate", "--config", cfg, "--out", str(tmp_path / "a")])
    main(["simulate", "--config", cfg, "--out", str(tmp_path / "b"), "--seed-override", "4"])
    assert (tmp_path / "a" / "dataset.csv").read_bytes() != (tmp_path / "b" / "dataset.csv").read_bytes()
    meta = json.loads((tmp_path / "b" / "dataset.csv").read_text().splitlines()[0][2:])
    assert meta["config"]["sample"]["seed"] == 4


def test_constant_response_exit_2(tmp_path, capsys):
    cfg = write_config(tmp_path, small_config())
    out = tmp_path / "run"
    assert run(cfg, out, "simulate") == 0
    lines = (out / "dataset.csv").read_text().splitlines()
    rows = [lines[0], lines[1]] + ["1.0," + r.split(",", 1)[1] for r in lines[2:]]
    bad = tmp_path / "constant.csv"
    bad.write_text("\n".join(rows) + "\n")
    assert main(["fit", "--config", cfg, "--out", str(out), str(bad)]) == 2
    assert "fewer than 2 slices" in capsys.readouterr().err
    assert not (out / "result.json").exists()


@pytest.mark.parametrize(
    "doc",
    [
        {"estimate": {"bogus": 1}},
        {"extra": {}},
        {"example": {"delta": 0.9}},
        {"estimate": {"slices": 1}},
        {"outputs": {"formats": ["csv"]}},
        {"sample": {"n": 1.5}},
    ],
)
def test_invalid_config_exit_2(tmp_path, doc):
    base = small_config()
    for k, v in doc.items():
        base.setdefault(k, {}).update(v)
    cfg = write_config(tmp_path, base)
    with pytest.raises(ConfigError):
        RunConfig.from_dict(base)
    assert main(["simulate", "--config", cfg, "--out", str(tmp_path / "o")]) == 2
    assert not (tmp_path / "o").exists()


def test_missing_files_exit_3(tmp_path):
    cfg = write_config(tmp_path, small_config())
    assert main(["simulate", "--config", str(tmp_path / "nope.json")]) == 3
    assert main(["fit", "--config", cfg, "--out", str(tmp_path / "empty")]) == 3
    assert main(["fit", "--config", cfg, str(tmp_path / "missing.csv")]) == 3


def test_malformed_dataset_exit_3(tmp_path):
    cfg = write_config(tmp_path, small_config())
    bad = tmp_path / "bad.csv"
    bad.write_text("y,a_1\n1,2\n")
    assert main(["fit", "--config", cfg, "--out", str(tmp_path), str(bad)]) == 3


def test_zero_paths_exit_4(tmp_path):
    cfg = write_config(tmp_path, small_config())
    out = tmp_path / "run"
    assert run(cfg, out, "simulate") == 0
    lines = (out / "dataset.csv").read_text().splitlines()
    rows = lines[:2] + [r.split(",", 1)[0] + ",0.0" * 20 for r in lines[2:]]
    zero = tmp_path / "zero.csv"
    zero.write_text("\n".join(rows) + "\n")
    assert main(["fit", "--config", cfg, "--out", str(out), str(zero)]) == 4
    assert not (out / "result.json").exists()


def test_discrete_design_pipeline(tmp_path):
    cfg = write_config(tmp_path, small_config(estimate={"design": "discrete_points", "observation_points": 64}))
    out = tmp_path / "run"
    assert run(cfg, out, "simulate", "fit", "oracle-compare") == 0
    pts = json.loads((out / "observations.points.json").read_text())["points"]
    assert len(pts) == 64 and pts[0] == 0.0 and pts[-1] == 1.0
    sm = json.loads((out / "slice_means.json").read_text())
    assert len(sm["alphas"]) == 2 and len(sm["alphas"][0]) == 64
    comp = json.loads((out / "comparison.json").read_text())
    assert comp["cosine_gamma_metric"] >= 0.9
    res = json.loads((out / "result.json").read_text())
    assert res["ridge_C"] == 1e-3


def test_continuous_default_slices(tmp_path):
    cfg = write_config(tmp_path, small_config(example={"kind": "continuous"}, estimate={"slices": None, "d": 2}))
    out = tmp_path / "run"
    assert run(cfg, out, "simulate", "fit", "oracle-compare") == 0
    res = json.loads((out / "result.json").read_text())
    assert len(res["betas"]) in (1, 2)
    assert all(0 <= v <= 1 + 1e-8 for v in res["eigvals"])
    comp = json.loads((out / "comparison.json").read_text())
    assert comp["mc_error_rate"] is None
    betas = (out / "betas.csv").read_text().splitlines()
    assert betas[1].startswith("t,beta_1")
    assert len(betas) == 2 + 128
    assert np.isfinite(np.array([float(v) for v in betas[2].split(",")])).all()
