"""Command line entry point.

    curldrift <simulate|laplace|bounds|verify|covariance> --config PATH
              [--seed N] [--threads N] [--out DIR]

Exit codes: 0 all requested checks pass, 1 a check failed, 2 invalid
configuration, 3 numerical failure, 4 too many invalid replicas.
"""

from __future__ import annotations

import argparse
import dataclasses
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from . import config as _config
from .io import emit_csv, emit_json
from .kernel import DynamicsSpec
from .particle_sim import ReplicaFailureError, ensemble_runner
from .quadrature import QuadratureError
from .resolvent_bounds import bracket, envelope_shapes, gamma_level1, simplified_level1
from .verify import covariance_check, run_check_suite

EXIT_OK, EXIT_CHECK_FAILED, EXIT_CONFIG, EXIT_NUMERIC, EXIT_REPLICAS = 0, 1, 2, 3, 4

MSD_COLUMNS = ["t", "msd_mean", "msd_stderr", "d_of_t", "d_stderr", "x1_mean", "x1_stderr", "x2_mean",
               "x2_stderr", "iso_mean", "iso_stderr", "drift1_mean", "drift1_var", "drift_sq_mean",
               "drift_sq_stderr", "cross", "cross_stderr", "b1_var"]
LAPLACE_COLUMNS = ["lambda", "d_t", "d_t_stderr", "d_v", "d_v_stderr", "d_v_direct", "d_v_direct_stderr",
                   "tail_bound", "d_v_direct_tail"]


def _msd_rows(curve):
    for i, t in enumerate(curve.times):
        yield (t, curve.msd_mean[i], curve.msd_stderr[i], curve.d_of_t[i], curve.d_stderr[i],
               curve.x_mean[i, 0], curve.x_stderr[i, 0], curve.x_mean[i, 1], curve.x_stderr[i, 1],
               curve.iso_mean[i], curve.iso_stderr[i], curve.drift_mean[i], curve.drift_var[i],
               curve.drift_sq_mean[i], curve.drift_sq_stderr[i], curve.cross[i], curve.cross_stderr[i],
               curve.b1_var[i])


def _simulate(cfg, out: Path, threads, with_laplace: bool) -> int:
    lams = cfg.bounds.lambdas if with_laplace else ()
    curve, lap, diag = ensemble_runner(cfg.sim_params(lams), threads)
    emit_csv(out / "msd.csv", MSD_COLUMNS, _msd_rows(curve))
    summary = {"n_replicas": diag.n_replicas, "n_valid": diag.n_valid, "n_invalid": diag.n_invalid}
    if with_laplace:
        rows = ((lap.lam[i], lap.d_t[i], lap.d_t_se[i], lap.d_v[i], lap.d_v_se[i], lap.d_v_direct[i],
                 lap.d_v_direct_se[i], lap.tail_bound[i], lap.d_v_direct_tail[i]) for i in range(len(lap.lam)))
        emit_csv(out / "laplace.csv", LAPLACE_COLUMNS, rows)
    emit_json(out / "summary.json", summary)
    return EXIT_OK


def _bounds(cfg, out: Path) -> int:
    dyn, kern, bp = cfg.dynamics(), cfg.kernel(), cfg.bound_params()
    ok = True
    rows = []
    for lam in cfg.bounds.lambdas:
        br = bracket(lam, dyn, kern)
        ok &= br.lower <= br.upper
        rows.append((lam, dyn.label(), br.lower, br.upper, br.lower_err, br.upper_err, br.resolvent_lower,
                     br.resolvent_upper, simplified_level1(lam, dyn) if lam <= 1 else float("nan")))
    emit_csv(out / "bracket.csv", ["lambda", "dynamics", "lower", "upper", "lower_err", "upper_err",
                                   "resolvent_lower", "resolvent_upper", "simplified_level1"], rows)
    env = (envelope_shapes(lam, bp) for lam in cfg.bounds.envelope_lambdas)
    emit_csv(out / "envelope.csv", ["lambda", "L", "k", "z", "f", "upper_env", "lower_env"],
             ((e.lam, e.L0, e.k, e.z, e.f, e.upper_env, e.lower_env) for e in env))
    grows = ((lam, g, gamma_level1(lam, g)) for g in cfg.bounds.gammas for lam in cfg.bounds.gamma_lambdas)
    emit_csv(out / "gamma.csv", ["lambda", "gamma", "gamma_level1"], grows)
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def _verify(cfg, out: Path) -> int:
    v = cfg.verify
    checks = run_check_suite(v.seed, v.n_random, v.n_derivative, v.include_constant_scans)
    emit_csv(out / "verify.csv", ["check", "passed", "value", "tolerance", "detail"],
             ((c.name, c.passed, c.value, c.tolerance, c.detail) for c in checks))
    all_ok = all(c.passed for c in checks)
    emit_json(out / "verify.json", {"all_passed": all_ok, "checks": [dataclasses.asdict(c) for c in checks]})
    return EXIT_OK if all_ok else EXIT_CHECK_FAILED


def _covariance(cfg, out: Path) -> int:
    c = cfg.covariance
    rep = covariance_check(c.n_modes, c.n_realizations, c.times, c.points, cfg.dynamics(), cfg.master_seed,
                           cfg.kernel(), c.t_stationary, c.threshold)
    cols = ["t", "x1", "x2", "i", "j", "mc_mean", "mc_se", "quadrature", "z"]
    emit_csv(out / "covariance.csv", cols, ([r[k] for k in cols] for r in rep.rows))
    scols = ["t", "i", "j", "diff_mean", "diff_se", "z"]
    emit_csv(out / "stationarity.csv", scols, ([r[k] for k in scols] for r in rep.stationarity))
    emit_json(out / "covariance.json", {"passed": rep.passed, "max_abs_z": rep.max_abs_z,
                                        "threshold": rep.threshold})
    return EXIT_OK if rep.passed else EXIT_CHECK_FAILED


COMMANDS = ("simulate", "laplace", "bounds", "verify", "covariance")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="curldrift", description="Brownian particle in a curl-of-SHE drift: "
                                 "simulation, bounds and numerical checks.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", required=True, help="TOML run configuration")
    ap.add_argument("--seed", type=int, help="override master_seed")
    ap.add_argument("--threads", type=int, help="worker threads (default: $CURLDRIFT_THREADS or CPU count)")
    ap.add_argument("--out", help="output directory (overrides io.out_dir)")
    ap.add_argument("--version", action="version", version=f"curldrift {__version__}")
    return ap


def run(command: str, config_path, seed=None, threads=None, out=None) -> int:
    start = time.time()
    try:
        cfg = _config.load(config_path)
        if seed is not None:
            cfg.master_seed = seed
            _config.validate(cfg)
    except _config.ConfigError as exc:
        print(f"curldrift: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if threads is not None and threads < 1:
        print("curldrift: config error: --threads must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    out_dir = Path(out if out is not None else cfg.io.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    try:
        if command == "simulate":
            code = _simulate(cfg, out_dir, threads, False)
        elif command == "laplace":
            code = _simulate(cfg, out_dir, threads, True)
        elif command == "bounds":
            code = _bounds(cfg, out_dir)
        elif command == "verify":
            code = _verify(cfg, out_dir)
        else:
            code = _covariance(cfg, out_dir)
    except ReplicaFailureError as exc:
        print(f"curldrift: {exc}", file=sys.stderr)
        code = EXIT_REPLICAS
    except (QuadratureError, FloatingPointError, ArithmeticError) as exc:
        print(f"curldrift: numerical failure: {exc}", file=sys.stderr)
        code = EXIT_NUMERIC
    except ValueError as exc:
        print(f"curldrift: config error: {exc}", file=sys.stderr)
        code = EXIT_CONFIG
    emit_json(out_dir / "metadata.json", {"command": command, "config": cfg.to_dict(), "seed": cfg.master_seed,
                                          "version": __version__, "exit_code": code,
                                          "wall_time_s": round(time.time() - start, 3)})
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return run(args.command, args.config, args.seed, args.threads, args.out)


if __name__ == "__main__":
    sys.exit(main())
