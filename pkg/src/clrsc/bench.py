"""Experiment runner: generate, corrupt, solve, segment, score, report."""

from __future__ import annotations

import csv
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import datagen
from .errors import ContractViolation, NumericalFailure
from .io import load_matrix_csv
from .metrics import coeff_difference, sca
from .numerics import RngStream
from .solvers import SolverConfig, solve_clrsc, solve_lrr, solve_mlap
from .spectral import KMEANS_RESTARTS, cluster, fuse_affinity

METHODS = ("clrsc", "mlap", "lrr-per-view")
DEFAULT_NOISE_GRID = (math.inf, 48.0, 44.0, 40.0, 36.0, 32.0)

# stream purposes; every stream id starts with one of these
STREAM_DATA, STREAM_NOISE, STREAM_KMEANS, STREAM_LIBRARY = 0, 1, 2, 3
METHOD_CODES = {"clrsc": 1, "mlap": 2, "lrr-per-view": 3}

RECORD_FIELDS = ("trial", "psnr_db", "method", "sca", "z_diff", "iterations", "converged", "runtime_ms")
SUMMARY_FIELDS = ("psnr_db", "method", "mean_sca", "median_sca", "min_sca", "max_sca", "mean_z_diff")


@dataclass
class ExperimentConfig:
    generator: str = "synthetic"
    library: Optional[str] = None
    noise_levels: tuple = DEFAULT_NOISE_GRID
    trials: int = 50
    methods: tuple = ("clrsc", "mlap", "lrr-per-view")
    solver: dict = field(default_factory=dict)
    seed: int = 0
    generator_params: dict = field(default_factory=dict)
    kmeans_restarts: int = KMEANS_RESTARTS

    def __post_init__(self):
        self.noise_levels = tuple(parse_level(v) for v in self.noise_levels)
        self.methods = tuple(self.methods)
        self.validate()

    def validate(self):
        if self.generator not in ("synthetic", "semisynthetic"):
            raise ContractViolation(f"unknown generator {self.generator!r}")
        if self.trials < 1:
            raise ContractViolation("trials must be >= 1")
        if not self.methods:
            raise ContractViolation("at least one method is required")
        bad = [m for m in self.methods if m not in METHODS]
        if bad:
            raise ContractViolation(f"unknown methods {bad}; choose from {METHODS}")
        if len(set(self.methods)) != len(self.methods):
            raise ContractViolation("duplicate methods")
        if not self.noise_levels:
            raise ContractViolation("at least one noise level is required")
        for v in self.noise_levels:
            if math.isnan(v) or v == -math.inf:
                raise ContractViolation(f"invalid noise level {v}")
        self.solver_config().validate()

    def solver_config(self) -> SolverConfig:
        try:
            return SolverConfig(**self.solver)
        except TypeError as exc:
            raise ContractViolation(f"bad solver override: {exc}") from None

    def to_dict(self) -> dict:
        d = asdict(self)
        d["noise_levels"] = [format_level(v) for v in self.noise_levels]
        d["methods"] = list(self.methods)
        d["solver"] = self.solver_config().to_dict()
        return d


@dataclass
class TrialRecord:
    trial: int
    psnr_db: float
    method: str
    sca: float
    z_diff: Optional[float]
    iterations: int
    converged: bool
    runtime_ms: float


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    records: list
    summary: list
    library_source: Optional[str] = None


def parse_level(v) -> float:
    if isinstance(v, str):
        if v.strip().lower() in ("clean", "inf"):
            return math.inf
        v = float(v)
    return float(v)


def format_level(v: float) -> str:
    return "inf" if math.isinf(v) else repr(float(v))


def _level_code(level: float) -> int:
    return 0 if math.isinf(level) else 1 + int(round(level * 1000))


def resolve_library(cfg: ExperimentConfig):
    if cfg.generator != "semisynthetic":
        return None, None
    if cfg.library:
        return load_matrix_csv(cfg.library), f"file:{cfg.library}"
    params = {k: cfg.generator_params[k] for k in ("bands", "count") if k in cfg.generator_params}
    lib = datagen.standin_library(RngStream(cfg.seed, (STREAM_LIBRARY,)), **params)
    return lib, f"standin(seed={cfg.seed}, bands={lib.shape[0]}, count={lib.shape[1]})"


def generate_clean(cfg: ExperimentConfig, trial: int, library=None):
    rng = RngStream(cfg.seed, (STREAM_DATA, trial))
    params = {k: v for k, v in cfg.generator_params.items() if k not in ("bands", "count")}
    if cfg.generator == "synthetic":
        return datagen.gen_synthetic(rng, **params)
    return datagen.gen_semisynthetic(rng, library, **params)


def _segment(Zs, k, rng, restarts):
    return cluster(fuse_affinity(Zs), k, rng, restarts=restarts)


def _run_method(method, data, solver_cfg, rng, restarts):
    """Yields ``(name, sca, z_diff, iterations, converged, runtime_ms)``."""
    if method in ("clrsc", "mlap"):
        solve = solve_clrsc if method == "clrsc" else solve_mlap
        t0 = time.perf_counter()
        try:
            stack = solve(data.views, solver_cfg)
        except NumericalFailure as exc:
            yield method, math.nan, None, exc.iteration or 0, False, (time.perf_counter() - t0) * 1e3
            return
        labels = _segment(stack.Z, data.k, rng, restarts)
        ms = (time.perf_counter() - t0) * 1e3
        zd = coeff_difference(stack) if data.n_views > 1 else None
        yield method, sca(labels, data.labels), zd, stack.diagnostics.iterations, stack.diagnostics.converged, ms
        return

    lams = solver_cfg.lambdas(data.n_views)
    results = []
    for v, X in enumerate(data.views):
        t0 = time.perf_counter()
        try:
            stack = solve_lrr(X, lams[v], solver_cfg, error="l12")
        except NumericalFailure as exc:
            results.append((None, exc.iteration or 0, False, (time.perf_counter() - t0) * 1e3))
            continue
        labels = _segment(stack.Z, data.k, rng.child(v + 1), restarts)
        ms = (time.perf_counter() - t0) * 1e3
        results.append(((stack.Z[0], sca(labels, data.labels)), stack.diagnostics.iterations, stack.diagnostics.converged, ms))
    Zs = [r[0][0] for r in results if r[0] is not None]
    # cross-view agreement of the independent solutions, shared by every lrr row
    zd = coeff_difference(Zs) if len(Zs) == len(results) and len(Zs) > 1 else None
    for v, (res, iters, conv, ms) in enumerate(results, start=1):
        yield f"lrr-v{v}", (math.nan if res is None else res[1]), zd, iters, conv, ms


def run_trial(cfg: ExperimentConfig, trial: int, library=None) -> list:
    clean = generate_clean(cfg, trial, library)
    if clean.labels is None:
        raise ContractViolation("benchmark data must carry ground-truth labels")
    solver_cfg = cfg.solver_config()
    records = []
    for level in cfg.noise_levels:
        code = _level_code(level)
        if math.isinf(level):
            data = clean
        else:
            data = datagen.add_noise_at_psnr(RngStream(cfg.seed, (STREAM_NOISE, trial, code)), clean, level)
        for method in cfg.methods:
            rng = RngStream(cfg.seed, (STREAM_KMEANS, trial, code, METHOD_CODES[method]))
            for name, score, zd, iters, conv, ms in _run_method(method, data, solver_cfg, rng, cfg.kmeans_restarts):
                records.append(TrialRecord(trial, level, name, float(score), zd, int(iters), bool(conv), ms))
    return records


def _trial_job(args):
    return run_trial(*args)


def run_experiment(cfg: ExperimentConfig, jobs: int = 1, progress=None) -> ExperimentReport:
    """Run every (trial, noise level, method) cell; records come back in that
    order whatever the completion order of parallel trials."""
    cfg.validate()
    library, source = resolve_library(cfg)
    args = [(cfg, t, library) for t in range(cfg.trials)]
    records = []
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for t, recs in enumerate(pool.map(_trial_job, args)):
                records.extend(recs)
                if progress:
                    progress(t)
    else:
        for t, a in enumerate(args):
            records.extend(_trial_job(a))
            if progress:
                progress(t)
    return ExperimentReport(cfg, records, summarize(records), source)


def _nan_stats(values):
    vals = np.array([v for v in values if v is not None and not math.isnan(v)], dtype=float)
    if vals.size == 0:
        return math.nan, math.nan, math.nan, math.nan
    return float(np.mean(vals)), float(np.median(vals)), float(np.min(vals)), float(np.max(vals))


def summarize(records) -> list:
    """One row per (psnr, method) in first-seen order."""
    groups = {}
    for r in records:
        groups.setdefault((r.psnr_db, r.method), []).append(r)
    rows = []
    for (level, method), recs in groups.items():
        mean, median, lo, hi = _nan_stats([r.sca for r in recs])
        zds = [r.z_diff for r in recs if r.z_diff is not None]
        mean_zd = float(np.mean(zds)) if zds else None
        rows.append(
            {"psnr_db": level, "method": method, "mean_sca": mean, "median_sca": median,
             "min_sca": lo, "max_sca": hi, "mean_z_diff": mean_zd}
        )
    return rows


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return "inf" if v == math.inf else ("nan" if math.isnan(v) else repr(v))
    return str(v)


def record_row(r: TrialRecord) -> list:
    return [
        str(r.trial), format_level(r.psnr_db), r.method, _fmt(r.sca), _fmt(r.z_diff),
        str(r.iterations), _fmt(r.converged), f"{r.runtime_ms:.3f}",
    ]


def write_report(report: ExperimentReport, out_dir) -> Path:
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "records.csv", "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(RECORD_FIELDS)
            w.writerows(record_row(r) for r in report.records)
        with open(out / "summary.csv", "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(SUMMARY_FIELDS)
            for row in report.summary:
                w.writerow([format_level(row["psnr_db"])] + [_fmt(row[k]) for k in SUMMARY_FIELDS[1:]])
        manifest = {
            "config": report.config.to_dict(),
            "library": report.library_source,
            "vec_order": "column-major",
            "record_count": len(report.records),
        }
        (out / "run_manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write report to {out}: {exc}") from exc
    return out


def read_records(path) -> list:
    """Inverse of the records.csv writer."""
    def opt(s):
        return None if s == "" else float(s)

    records = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            records.append(
                TrialRecord(
                    trial=int(row["trial"]),
                    psnr_db=parse_level(row["psnr_db"]),
                    method=row["method"],
                    sca=float(row["sca"]),
                    z_diff=opt(row["z_diff"]),
                    iterations=int(row["iterations"]),
                    converged=row["converged"] == "true",
                    runtime_ms=float(row["runtime_ms"]),
                )
            )
    return records


def load_config_file(path) -> dict:
    import yaml

    try:
        with open(path, encoding="utf-8") as fh:
            data = yaml.safe_load(fh) or {}
    except (OSError, yaml.YAMLError) as exc:
        raise ContractViolation(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ContractViolation(f"config {path} must be a mapping")
    return data
