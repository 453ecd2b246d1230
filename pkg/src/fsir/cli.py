"""Command line entry point: ``fsir {simulate,fit,oracle-compare,diagnose}``.

Exit codes: 0 success, 2 invalid config or input data, 3 I/O failure,
4 numerical failure (e.g. empty retained spectrum).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import diagnostics, estimate, simulate
from .config import FORMAT_VERSION, ConfigError, RunConfig
from .dataset import FunctionalDataset, read_csv, write_csv
from .estimate import FsirResult, SliceMeans, SlicingError
from .operators import EmptySpectrumError

DATASET = "dataset.csv"
OBSERVATIONS = "observations.csv"
POINTS = "observations.points.json"
RESULT = "result.json"
SLICE_MEANS = "slice_means.json"
BETAS_CSV = "betas.csv"
COMPARISON = "comparison.json"
DIAGNOSTICS = "diagnostics.json"


class InputError(Exception):
    """Unreadable or malformed input file (exit 3)."""


def _envelope(cfg: RunConfig, kind: str, body: dict) -> dict:
    return {"format_version": FORMAT_VERSION, "kind": kind, "config": cfg.to_dict(), **body}


def atomic_write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dump_json(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n"


def _read_json(path: Path) -> dict:
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc


def load_config(path: str, seed_override: int | None) -> RunConfig:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise InputError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    cfg = RunConfig.from_dict(doc)
    return cfg.with_seed(seed_override) if seed_override is not None else cfg


# -- commands -------------------------------------------------------------------


def cmd_simulate(cfg: RunConfig, out: Path) -> list[Path]:
    basis, spec = cfg.basis_spec(), cfg.example_spec()
    data = simulate.gen_example(spec, cfg.sample.n, cfg.sample.seed, basis)
    meta = {"format_version": FORMAT_VERSION, "kind": "dataset", "config": cfg.to_dict()}
    written = [out / DATASET]
    atomic_write(out / DATASET, write_csv(data, meta))
    if cfg.estimate.design == "discrete_points":
        pts = cfg.points()
        obs = data.observe(pts)
        atomic_write(out / OBSERVATIONS, write_csv(obs, {**meta, "kind": "observations"}))
        atomic_write(out / POINTS, dump_json(_envelope(cfg, "observation_points", {"points": pts.tolist()})))
        written += [out / OBSERVATIONS, out / POINTS]
    return written


def load_dataset(cfg: RunConfig, path: Path) -> FunctionalDataset:
    basis = cfg.basis_spec()
    points = None
    if cfg.estimate.design == "discrete_points":
        points = np.asarray(_read_json(path.parent / POINTS)["points"], dtype=float)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read dataset {path}: {exc}") from exc
    try:
        data, _ = read_csv(text, basis, points)
    except ValueError as exc:
        raise InputError(f"malformed dataset {path}: {exc}") from exc
    return data


def cmd_fit(cfg: RunConfig, out: Path, dataset: Path | None = None) -> list[Path]:
    if dataset is None:
        dataset = out / (OBSERVATIONS if cfg.estimate.design == "discrete_points" else DATASET)
    data = load_dataset(cfg, dataset)
    est = cfg.estimate
    result, sm, _ = estimate.fit_fsir(data, cfg.slice_spec(), est.d, est.rank_tol, est.ridge_C)
    atomic_write(out / RESULT, dump_json(_envelope(cfg, "fsir_result", result.to_dict())))
    atomic_write(out / SLICE_MEANS, dump_json(_envelope(cfg, "slice_means", sm.to_dict())))
    written = [out / RESULT, out / SLICE_MEANS]
    if "csv" in cfg.outputs.formats:
        basis = cfg.basis_spec()
        cols = [basis.nodes] + [b.basis.design @ b.coef for b in result.betas] + [
            e.basis.design @ e.coef for e in result.etas
        ]
        header = ["t"] + [f"beta_{j + 1}" for j in range(result.d)] + [f"eta_{j + 1}" for j in range(result.d)]
        lines = ["# " + json.dumps({"format_version": FORMAT_VERSION, "kind": "directions_on_grid",
                                    "config": cfg.to_dict()}, sort_keys=True, separators=(",", ":")),
                 ",".join(header)]
        lines += [",".join(repr(float(v)) for v in row) for row in np.column_stack(cols)]
        atomic_write(out / BETAS_CSV, "\n".join(lines) + "\n")
        written.append(out / BETAS_CSV)
    return written


def _load_result(cfg: RunConfig, path: Path) -> tuple[FsirResult, SliceMeans | None]:
    basis = cfg.basis_spec()
    doc = _read_json(path)
    try:
        result = FsirResult.from_dict(doc, basis)
    except (KeyError, ValueError) as exc:
        raise InputError(f"malformed result file {path}: {exc}") from exc
    sm = None
    sm_path = path.parent / SLICE_MEANS
    if sm_path.exists():
        sdoc = _read_json(sm_path)
        sm = SliceMeans(np.asarray(sdoc["weights"]), np.asarray(sdoc["means"]), basis, sdoc.get("alphas"))
    return result, sm


def oracle_comparison(cfg: RunConfig, result: FsirResult, sm: SliceMeans | None) -> dict:
    basis, spec = cfg.basis_spec(), cfg.example_spec()
    Gw, Ge, G = simulate.oracle_kernels(spec, basis)
    beta0 = simulate.oracle_beta(spec, basis)
    pop = estimate.fsir_solve(G, Ge, 1)
    body = {
        "cosine_gamma_metric": None,
        "subspace_distance": None,
        "lambda_hat": float(result.eigvals[0]) if result.d else None,
        "lambda_oracle": float(pop.eigvals[0]) if pop.d else 0.0,
        "mc_error_rate": None,
        "analytic_error_rate": None,
    }
    if result.d == 0:
        return body
    bhat = result.betas[0]
    body["cosine_gamma_metric"] = abs(estimate.gamma_cosine(bhat, beta0, G))
    body["subspace_distance"] = estimate.subspace_distance([bhat], [beta0], G)
    if spec.kind == "binary":
        body["analytic_error_rate"] = simulate.analytic_error_rate(spec)
        # orient by the fitted slice means: larger response on the positive side
        sign = 1.0
        if sm is not None:
            sign = 1.0 if bhat.coef @ (sm.means[-1] - sm.means[0]) >= 0 else -1.0
        fresh = simulate.gen_example(spec, cfg.sample.n_mc, cfg.sample.seed, basis, replicate=1)
        pred = estimate.classify(sign * bhat, fresh.x)
        body["mc_error_rate"] = float(np.mean(pred != fresh.y))
    return body


def cmd_oracle_compare(cfg: RunConfig, out: Path, result_path: Path | None = None) -> list[Path]:
    result, sm = _load_result(cfg, result_path or out / RESULT)
    body = oracle_comparison(cfg, result, sm)
    atomic_write(out / COMPARISON, dump_json(_envelope(cfg, "oracle_comparison", body)))
    return [out / COMPARISON]


def cmd_diagnose(cfg: RunConfig, out: Path, result_path: Path | None = None) -> list[Path]:
    basis, spec = cfg.basis_spec(), cfg.example_spec()
    Gw, Ge, G = simulate.oracle_kernels(spec, basis)
    beta0 = simulate.oracle_beta(spec, basis)
    seed = cfg.sample.seed
    reports = [diagnostics.theorem1_check(G, Ge, cfg.diagnostics.trials, seed)]
    m_y = simulate.conditional_mean(spec, 1.0, basis)
    reports.append({
        "check": "mean_range_oracle",
        "inputs": {"metric": "Gamma_w", "y": 1.0},
        "statistics": diagnostics.hgamma_membership(m_y, Gw).to_dict(),
        "verdict": diagnostics.hgamma_membership(m_y, Gw).verdict,
    })
    bm = diagnostics.beta_membership_check(beta0, Gw)
    reports.append({
        "check": "beta_membership_oracle",
        "inputs": {"metric": "Gamma_w"},
        "statistics": {k: v.to_dict() for k, v in bm.items()},
        "verdict": {k: v.verdict for k, v in bm.items()},
    })
    path = result_path or out / RESULT
    if path.exists():
        result, sm = _load_result(cfg, path)
        if sm is not None:
            mr = diagnostics.mean_range_check(sm, G)
            reports.append({
                "check": "mean_range_fitted",
                "inputs": {"metric": "Gamma", "slices": len(mr)},
                "statistics": [r.to_dict() for r in mr],
                "verdict": [r.verdict for r in mr],
            })
        if result.d:
            bm = diagnostics.beta_membership_check(result.betas[0], G)
            reports.append({
                "check": "beta_membership_fitted",
                "inputs": {"metric": "Gamma"},
                "statistics": {k: v.to_dict() for k, v in bm.items()},
                "verdict": {k: v.verdict for k, v in bm.items()},
            })
    reports.append(diagnostics.linearity_check(Gw, beta0, cfg.diagnostics.linearity_n, seed))
    atomic_write(out / DIAGNOSTICS, dump_json(_envelope(cfg, "diagnostics", {"reports": reports})))
    return [out / DIAGNOSTICS]


# -- argument handling ------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fsir", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name, helptext in (
        ("simulate", "draw an example dataset"),
        ("fit", "fit FSIR to a dataset (default: <out>/dataset.csv)"),
        ("oracle-compare", "compare a fitted result with the closed-form solution"),
        ("diagnose", "run the structural diagnostics"),
    ):
        sp = sub.add_parser(name, help=helptext)
        sp.add_argument("--config", required=True, help="run configuration (JSON)")
        sp.add_argument("--out", help="output directory (overrides outputs.directory)")
        sp.add_argument("--seed-override", type=int, help="replace sample.seed")
        if name != "simulate":
            sp.add_argument("input", nargs="?", help="input file (dataset for fit, result otherwise)")
    return p


COMMANDS = {
    "simulate": lambda cfg, out, inp: cmd_simulate(cfg, out),
    "fit": cmd_fit,
    "oracle-compare": cmd_oracle_compare,
    "diagnose": cmd_diagnose,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, args.seed_override)
        out = Path(args.out or cfg.outputs.directory)
        inp = Path(args.input) if getattr(args, "input", None) else None
        if inp is not None and not inp.exists():
            raise InputError(f"input file {inp} does not exist")
        written = COMMANDS[args.command](cfg, out, inp)
    except (ConfigError, SlicingError) as exc:
        print(f"fsir: invalid input: {exc}", file=sys.stderr)
        return 2
    except (InputError, OSError) as exc:
        print(f"fsir: I/O failure: {exc}", file=sys.stderr)
        return 3
    except (EmptySpectrumError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"fsir: numerical failure: {exc}", file=sys.stderr)
        return 4
    except ValueError as exc:
        print(f"fsir: invalid input: {exc}", file=sys.stderr)
        return 2
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
