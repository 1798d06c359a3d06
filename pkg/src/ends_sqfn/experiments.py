"""Headline experiments: witness sweeps, reverse inequality, suite runner.

The witness sweep drives the boundedness dichotomy: on a model whose
smallest end dimension is n_min, the family f_eps = r^(-(n_min/p)(1+eps))
times a cutoff has p-norm ~ eps^(-1/p), while the low-energy vertical square
function applied to it blows up pointwise near the hub as eps -> 0 when
p >= n_min.  The sweep records the ratio ||S_< f_eps||_p / ||f_eps||_p on a
decreasing eps grid and fits its log-log slope against 1/eps: positive slope
means blow-up, slope ~ 0 means a boundedness plateau.

The suite runner executes a configured list of experiments
deterministically, writing per-experiment CSV files (byte-identical across
reruns), SVG plots, and a JSON manifest carrying the config hash, library
versions, and the pass/fail status of every declared contract.
"""

from __future__ import annotations

import configparser
import hashlib
import json
import math
import sys
import time
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np

from .radial_model import EndProfile, ModelManifold, build_model, witness_function, cutoff
from .sqfn import (SpectralGrid, SqfnEngine, horizontal_sqfn, lp_norm,
                   resolution_identity_residual, vertical_sqfn)


class ConfigError(ValueError):
    """The experiment configuration is invalid; nothing was solved."""


@dataclass
class ExperimentRecord:
    experiment_id: str
    config_hash: str
    M: int
    p: float
    eps: float | None
    k_range: str
    input_norm: float
    output_norm: float
    ratio: float
    slope: float | None
    wall_time: float
    grid_meta: dict = field(default_factory=dict)


@dataclass
class SweepResult:
    eps_grid: list
    ratios: list
    slope: float
    slope_stderr: float


def _witness_end(model: ModelManifold) -> int:
    return min(range(len(model.ends)), key=lambda i: model.ends[i].n)


def witness_sweep(model: ModelManifold, M: int, p: float, eps_grid, kind: str,
                  engine: SqfnEngine | None = None,
                  grid: SpectralGrid | None = None) -> SweepResult:
    """Low-energy square-function ratios over a decreasing eps grid."""
    eps_grid = [float(e) for e in eps_grid]
    if len(eps_grid) < 4 or any(b >= a for a, b in zip(eps_grid, eps_grid[1:])):
        raise ValueError("eps_grid must be strictly decreasing with >= 4 points")
    if kind not in ("vertical", "horizontal"):
        raise ValueError("kind must be 'vertical' or 'horizontal'")
    end_index = _witness_end(model)
    end = model.ends[end_index]
    if kind == "vertical" and 2 * M >= model.n_min:
        raise ValueError(
            f"vertical witness needs 2M < n_min (got M={M}, n_min={model.n_min})"
        )
    for eps in eps_grid:
        if end.n * eps * math.log(end.r_max) < 3:
            raise ValueError(
                f"eps={eps} is below the truncation guard for r_max={end.r_max:g}"
            )
    engine = engine or SqfnEngine(model)
    grid = grid or SpectralGrid.for_model(model)
    apply_fn = vertical_sqfn if kind == "vertical" else horizontal_sqfn
    ratios = []
    for eps in eps_grid:
        f = witness_function(model, end_index, p, eps)
        out = apply_fn(engine, grid, M, f, "low")
        ratios.append(lp_norm(model, out, p) / lp_norm(model, f, p))
    x = np.log(1.0 / np.array(eps_grid))
    y = np.log(ratios)
    (slope, _), cov = np.polyfit(x, y, 1, cov=True)
    return SweepResult(eps_grid=eps_grid, ratios=ratios,
                       slope=float(slope), slope_stderr=float(math.sqrt(cov[0, 0])))


def default_samples(model: ModelManifold, p: float = 2.0, seed: int = 0):
    """Oscillatory, bump, and witness-type functions away from the boundary."""
    samples = []
    for i in range(len(model.ends)):
        r = model.node_radius(i)
        sl = model.end_slice(i)
        logr = np.log(r)
        bump = np.zeros(model.num_nodes)
        bump[sl] = np.exp(-((logr - math.log(30.0)) ** 2))
        samples.append(("bump", bump))
        osc = np.zeros(model.num_nodes)
        osc[sl] = np.sin(3.0 * logr) * np.exp(-((logr - math.log(100.0)) ** 2) / 4)
        samples.append(("oscillatory", osc))
    w = witness_function(model, _witness_end(model), p, 0.5)
    interior = w.values.copy()
    r = model.node_radius(_witness_end(model))
    interior[model.end_slice(_witness_end(model))] *= r <= 1e4
    samples.append(("witness-type", interior))
    return samples


def reverse_check(model: ModelManifold, M: int, p: float, sample_functions=None,
                  engine: SqfnEngine | None = None,
                  grid: SpectralGrid | None = None) -> float:
    """max over samples of ||f||_p / ||S f||_p (full k-range)."""
    n = model.n_min
    if not (n / (n - 1) < p < n):
        raise ValueError(f"p must lie in (n_min', n_min) = ({n/(n-1):.3f}, {n})")
    engine = engine or SqfnEngine(model)
    grid = grid or SpectralGrid.for_model(model)
    if sample_functions is None:
        sample_functions = default_samples(model, p=p)
    best = 0.0
    for item in sample_functions:
        f = item[1] if isinstance(item, tuple) else item
        fp = lp_norm(model, f, p)
        if fp == 0.0:
            continue
        sf = vertical_sqfn(engine, grid, M, f, "full")
        best = max(best, fp / lp_norm(model, sf, p))
    return best


# ---------------------------------------------------------------------------
# Suite runner.

def _fmt(x) -> str:
    if isinstance(x, float):
        return format(x, ".12g")
    return str(x)


def _write_csv(path: Path, header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def _plot(path: Path, x, ys, xlabel, ylabel, labels, logx=False, logy=False):
    import matplotlib
    matplotlib.use("Agg")
    matplotlib.rcParams["svg.hashsalt"] = "ends-sqfn"
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4))
    for y, lab in zip(ys, labels):
        ax.plot(x, y, marker="o", label=lab)
    if logx:
        ax.set_xscale("log")
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def _model_from_config(cfg: configparser.ConfigParser) -> ModelManifold:
    if "model" not in cfg:
        raise ConfigError("config needs a [model] section")
    sec = cfg["model"]
    dims = [int(s) for s in sec.get("ends", "3,4").split(",")]
    r_max = float(sec.get("r_max", "1e9"))
    ppd = int(sec.get("points_per_decade", "64"))
    try:
        return build_model([EndProfile(n, 1.0, r_max, ppd) for n in dims])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def run_suite(config_path, out_dir=None) -> int:
    """Execute the configured experiments; 0 iff every contract passed."""
    config_path = Path(config_path)
    if not config_path.is_file():
        raise ConfigError(f"no such config: {config_path}")
    raw = config_path.read_bytes()
    config_hash = hashlib.sha256(raw).hexdigest()
    cfg = configparser.ConfigParser()
    cfg.read_string(raw.decode())

    out = Path(out_dir) if out_dir is not None else Path("results")
    out.mkdir(parents=True, exist_ok=True)

    exp_sections = [s for s in cfg.sections() if s.startswith("experiments.")]
    failures = []
    records = []

    model = engine = grid = None
    if exp_sections:
        model = _model_from_config(cfg)
        # Validate every experiment before any solve.
        for s in exp_sections:
            sec = cfg[s]
            kind = sec.get("kind", "vertical")
            M = int(sec.get("M", "1"))
            if sec.get("type", "witness") == "witness" and kind == "vertical" \
                    and 2 * M >= model.n_min:
                raise ConfigError(
                    f"[{s}]: vertical witness requires 2M < n_min"
                )
        gsec = cfg["grid"] if "grid" in cfg else {}
        grid = SpectralGrid.for_model(
            model, points_per_decade_k=int(gsec.get("points_per_decade_k", "32")))
        engine = SqfnEngine(model)

    for s in exp_sections:
        sec = cfg[s]
        exp_id = s.split(".", 1)[1]
        etype = sec.get("type", "witness")
        M = int(sec.get("M", "1"))
        t0 = time.perf_counter()
        if etype == "witness":
            p = float(sec.get("p", "3"))
            kind = sec.get("kind", "vertical")
            eps_grid = [float(e) for e in sec.get("eps", "0.4,0.2,0.1,0.05").split(",")]
            res = witness_sweep(model, M, p, eps_grid, kind, engine, grid)
            wall = time.perf_counter() - t0
            rows = [(e, r) for e, r in zip(res.eps_grid, res.ratios)]
            _write_csv(out / f"{exp_id}.csv", ["eps", "ratio"], rows)
            _plot(out / f"{exp_id}.svg", res.eps_grid, [res.ratios],
                  "eps", f"ratio (p={p}, {kind})", [f"slope={res.slope:.3f}"],
                  logx=True, logy=True)
            records.append(ExperimentRecord(
                exp_id, config_hash, M, p, None, "low",
                1.0, 1.0, res.ratios[-1], res.slope, wall,
                {"k_points": int(grid.nodes.size)}))
            if "slope_min" in sec and res.slope < float(sec["slope_min"]):
                failures.append({"experiment": exp_id, "contract": "slope_min",
                                 "expected": float(sec["slope_min"]),
                                 "observed": res.slope})
            if "slope_abs_max" in sec and abs(res.slope) > float(sec["slope_abs_max"]):
                failures.append({"experiment": exp_id, "contract": "slope_abs_max",
                                 "expected": float(sec["slope_abs_max"]),
                                 "observed": res.slope})
        elif etype == "reverse":
            p = float(sec.get("p", "2"))
            ratio = reverse_check(model, M, p, None, engine, grid)
            wall = time.perf_counter() - t0
            _write_csv(out / f"{exp_id}.csv", ["p", "max_ratio"], [(p, ratio)])
            records.append(ExperimentRecord(
                exp_id, config_hash, M, p, None, "full",
                1.0, ratio, ratio, None, wall, {}))
            target = sec.get("ratio_target")
            tol = float(sec.get("ratio_tol", "0.02"))
            if target is not None and abs(ratio - float(target)) > tol * float(target):
                failures.append({"experiment": exp_id, "contract": "ratio_target",
                                 "expected": float(target), "observed": ratio})
        elif etype == "l2const":
            kind = sec.get("kind", "vertical")
            rng = np.random.default_rng(int(sec.get("seed", "7")))
            f = rng.standard_normal(model.num_nodes)
            for i in range(len(model.ends)):
                sl = model.end_slice(i)
                f[sl] *= model.node_radius(i) <= 1e3
            apply_fn = vertical_sqfn if kind == "vertical" else horizontal_sqfn
            sf = apply_fn(engine, grid, M, f, "full")
            measured = (lp_norm(model, sf, 2) / lp_norm(model, f, 2)) ** 2
            wall = time.perf_counter() - t0
            target = (1.0 / (2 * (2 * M - 1)) if kind == "vertical"
                      else 1.0 / (2 * (2 * M - 1) * (2 * M - 2)))
            _write_csv(out / f"{exp_id}.csv", ["measured", "analytic"],
                       [(measured, target)])
            records.append(ExperimentRecord(
                exp_id, config_hash, M, 2.0, None, "full",
                1.0, measured, measured, None, wall, {}))
            tol = float(sec.get("tol", "0.02"))
            if abs(measured - target) > tol * target:
                failures.append({"experiment": exp_id, "contract": "l2const",
                                 "expected": target, "observed": measured})
        else:
            raise ConfigError(f"[{s}]: unknown experiment type {etype!r}")

    manifest = {
        "config_hash": config_hash,
        "config_file": config_path.name,
        "versions": {
            "python": sys.version.split()[0],
            "numpy": np.__version__,
            "scipy": __import__("scipy").__version__,
        },
        "generated_at": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        "records": [asdict(r) for r in records],
        "failures": failures,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    return 0 if not failures else 1
