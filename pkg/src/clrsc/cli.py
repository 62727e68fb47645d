"""Command line entry point (``clrsc``)."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import bench, datagen
from .errors import ContractViolation, DataError, NumericalFailure
from .io import load_dataset, load_matrix_csv, write_dataset, write_labels
from .metrics import sca
from .numerics import RngStream
from .prox import prox_l12_columns
from .solvers import SolverConfig, solve_clrsc, solve_lrr, solve_mlap
from .spectral import cluster, fuse_affinity

log = logging.getLogger("clrsc")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3

PROX_EXAMPLE_V = np.array([[0.0010, 1.0000, 1.0000], [0.0015, 0.1000, 1.0100]])
PROX_EXAMPLE_TAU = 0.1
PROX_EXAMPLE_EXPECTED = np.array([[0.0, 0.9005, 0.9296], [0.0, 0.0900, 0.9389]])

SOLVER_FLAGS = {
    "tau": float, "mu0": float, "mu_max": float, "rho": float,
    "gamma0": float, "eps1": float, "eps2": float, "max_iters": int,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _float_list(text):
    return [float(v) for v in text.split(",") if v.strip()]


def _add_solver_flags(p):
    g = p.add_argument_group("solver")
    g.add_argument("--lambda", dest="lambda_per_view", type=_float_list, help="lambda, or comma list per view")
    for name, typ in SOLVER_FLAGS.items():
        g.add_argument("--" + name.replace("_", "-"), dest=name, type=typ)


def _solver_overrides(args) -> dict:
    out = {}
    if getattr(args, "lambda_per_view", None) is not None:
        lams = args.lambda_per_view
        out["lambda_per_view"] = lams[0] if len(lams) == 1 else lams
    for name in SOLVER_FLAGS:
        v = getattr(args, name, None)
        if v is not None:
            out[name] = v
    return out


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="clrsc", description="Collaborative low-rank subspace clustering")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen-synthetic", help="union-of-subspaces multi-view data")
    g.add_argument("--out", required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--ambient", type=int, default=100)
    g.add_argument("--k", type=int, default=5)
    g.add_argument("--dim", type=int, default=4)
    g.add_argument("--per-cluster", type=int, default=20)
    g.add_argument("--views", type=int, default=2)

    s = sub.add_parser("gen-semisynthetic", help="spectral-mixture multi-view data")
    s.add_argument("--out", required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--library", help="D x M spectra CSV (default: built-in stand-in)")
    s.add_argument("--k", type=int, default=5)
    s.add_argument("--endmembers", type=int, default=5)
    s.add_argument("--repeats", type=int, default=10)
    s.add_argument("--views", type=int, default=2)

    n = sub.add_parser("add-noise", help="Gaussian noise at a target PSNR")
    n.add_argument("--dataset", required=True, help="dataset manifest")
    n.add_argument("--psnr", type=float, required=True)
    n.add_argument("--seed", type=int, default=0)
    n.add_argument("--out", required=True)

    c = sub.add_parser("cluster", help="segment one dataset")
    c.add_argument("--dataset", required=True)
    c.add_argument("--method", choices=("clrsc", "mlap", "lrr"), default="clrsc")
    c.add_argument("--view", type=int, default=1, help="view used by lrr (1-based)")
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--out", help="write predicted labels here")
    _add_solver_flags(c)

    b = sub.add_parser("benchmark", help="full experiment matrix")
    b.add_argument("--config", help="YAML/JSON file with ExperimentConfig fields")
    b.add_argument("--out", required=True)
    b.add_argument("--generator", choices=("synthetic", "semisynthetic"))
    b.add_argument("--library")
    b.add_argument("--noise-levels", type=lambda t: [x.strip() for x in t.split(",") if x.strip()],
                   help="comma list of PSNR dB values; 'clean' for no noise")
    b.add_argument("--trials", type=int)
    b.add_argument("--methods", type=lambda t: [x.strip() for x in t.split(",") if x.strip()])
    b.add_argument("--seed", type=int)
    b.add_argument("--jobs", type=int, default=1)
    _add_solver_flags(b)

    sub.add_parser("prox-check", help="run the l1,2 shrinkage worked example")
    return p


def _cmd_gen_synthetic(args):
    ds = datagen.gen_synthetic(RngStream(args.seed), args.ambient, args.k, args.dim, args.per_cluster, args.views)
    print(write_dataset(args.out, ds))


def _cmd_gen_semisynthetic(args):
    if args.library:
        lib, source = load_matrix_csv(args.library), args.library
    else:
        lib, source = datagen.standin_library(RngStream(args.seed, (bench.STREAM_LIBRARY,))), "standin"
    ds = datagen.gen_semisynthetic(RngStream(args.seed), lib, args.k, args.endmembers, args.repeats, args.views)
    log.info("library: %s", source)
    print(write_dataset(args.out, ds))


def _cmd_add_noise(args):
    ds = load_dataset(args.dataset)
    noisy = datagen.add_noise_at_psnr(RngStream(args.seed, (bench.STREAM_NOISE,)), ds, args.psnr)
    print(write_dataset(args.out, noisy))


def _cmd_cluster(args):
    ds = load_dataset(args.dataset)
    cfg = SolverConfig(**_solver_overrides(args))
    if args.method == "lrr":
        if not 1 <= args.view <= ds.n_views:
            raise ContractViolation(f"--view must lie in 1..{ds.n_views}")
        lam = cfg.lambdas(ds.n_views)[args.view - 1]
        stack = solve_lrr(ds.views[args.view - 1], lam, cfg)
    else:
        stack = (solve_clrsc if args.method == "clrsc" else solve_mlap)(ds.views, cfg)
    labels = cluster(fuse_affinity(stack), ds.k, RngStream(args.seed, (bench.STREAM_KMEANS,)))
    d = stack.diagnostics
    print(f"iterations={d.iterations} converged={str(d.converged).lower()}")
    if args.out:
        write_labels(args.out, labels.labels)
    if ds.labels is not None:
        print(f"sca={sca(labels, ds.labels):.4f}")
    else:
        print("sca=unavailable (no ground-truth labels)")


def _cmd_benchmark(args):
    fields = bench.load_config_file(args.config) if args.config else {}
    for key in ("generator", "library", "noise_levels", "trials", "methods", "seed"):
        v = getattr(args, key)
        if v is not None:
            fields[key] = v
    solver = dict(fields.get("solver") or {})
    solver.update(_solver_overrides(args))
    fields["solver"] = solver
    try:
        cfg = bench.ExperimentConfig(**fields)
    except TypeError as exc:
        raise ContractViolation(f"bad config field: {exc}") from None
    report = bench.run_experiment(cfg, jobs=args.jobs, progress=lambda t: log.info("trial %d done", t))
    out = bench.write_report(report, args.out)
    print(out / "summary.csv")


def _cmd_prox_check(args):
    got = prox_l12_columns(PROX_EXAMPLE_V, PROX_EXAMPLE_TAU)
    err = float(np.max(np.abs(got - PROX_EXAMPLE_EXPECTED)))
    np.set_printoptions(precision=4, suppress=True)
    print("input V =\n", PROX_EXAMPLE_V, f"\ntau = {PROX_EXAMPLE_TAU}")
    print("computed =\n", got)
    print("expected =\n", PROX_EXAMPLE_EXPECTED)
    ok = err < 5e-5
    print(json.dumps({"max_abs_error": err, "tolerance": 5e-5, "pass": ok}))
    return EXIT_OK if ok else EXIT_NUMERIC


COMMANDS = {
    "gen-synthetic": _cmd_gen_synthetic,
    "gen-semisynthetic": _cmd_gen_semisynthetic,
    "add-noise": _cmd_add_noise,
    "cluster": _cmd_cluster,
    "benchmark": _cmd_benchmark,
    "prox-check": _cmd_prox_check,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return COMMANDS[args.command](args) or EXIT_OK
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ContractViolation as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
