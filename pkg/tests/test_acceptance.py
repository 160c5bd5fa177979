"""Acceptance suite: one test per criterion, each printing a single
PASS/FAIL line (also collected into the terminal summary)."""

import json
import math
import os
import time
from pathlib import Path

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from curldrift import rng
from curldrift.cli import main
from curldrift.kernel import DynamicsSpec
from curldrift.particle_sim import SimParams, ensemble_runner, simulate_replica
from curldrift.resolvent_bounds import (bracket, envelope_shapes, fit_log_exponent, fit_loglog_slope,
                                        gamma_level1, simplified_level1)
from curldrift.spectral_field import eval_divergence, init_stationary, sample_modes
from curldrift.verify import (check_bound_chains, check_ub_integral_identity, check_lb_integral_inequality, check_bound_derivatives,
                              check_c_sequence, covariance_check)

S1, SHALF = DynamicsSpec.power(1), DynamicsSpec.power(0.5)
SEED = 12345  # fixed before any acceptance run
FULL = os.environ.get("CURLDRIFT_FULL_ACCEPTANCE") == "1"


def report(n, ok, detail):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} - {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def test_criterion_01_ub_integral_identity():
    t0 = time.perf_counter()
    gen = rng.stream(SEED, 0, 1)
    errs = []
    for _ in range(100):
        a, b = np.sort(10.0 ** gen.uniform(-8, 1, 2))
        errs.append(check_ub_integral_identity(float(a), float(b), float(gen.uniform(1, 100)), int(gen.integers(0, 9)))[2])
    dt = time.perf_counter() - t0
    report(1, max(errs) <= 1e-8 and dt < 10, f"max abs err {max(errs):.2e} (tol 1e-8), {dt:.1f}s (< 10s)")


def test_criterion_02_bound_derivatives():
    t0 = time.perf_counter()
    gen = rng.stream(SEED, 0, 2)
    x = 10.0 ** gen.uniform(-8, 1, 1000)
    z = gen.uniform(1, 100, 1000)
    k = gen.integers(0, 11, 1000)
    worst = max(check_bound_derivatives(x[k == kk], z[k == kk], int(kk)) for kk in np.unique(k))
    dt = time.perf_counter() - t0
    report(2, worst <= 1e-6 and dt < 5, f"max rel err {worst:.2e} (tol 1e-6) on 1000 points, {dt:.2f}s (< 5s)")


def test_criterion_03_inequality_chains():
    rep = check_bound_chains(np.logspace(-8, 1, 400), np.linspace(1, 100, 100), 10, slack=1e-12)
    xs = np.logspace(-8, 1, 12)
    bad = 0
    n = 0
    for i in range(len(xs)):
        for j in range(i + 1, len(xs)):
            for z in (1.0, 10.0, 100.0):
                for k in range(11):
                    bad += not check_lb_integral_inequality(xs[i], xs[j], z, k, slack=1e-12)[0]
                    n += 1
    report(3, rep.violations == 0 and rep.monotone_violations == 0 and bad == 0,
           f"chains {rep.violations} violations / {rep.points} points, monotonicity {rep.monotone_violations}, "
           f"integral inequality {bad} / {n}")


def test_criterion_04_c_sequence():
    rep = check_c_sequence(10_000, 0.5)
    ok = (rep.c2 == 2 * math.pi and rep.even_increasing and rep.odd_decreasing
          and rep.even_gap < 1e-6 and rep.odd_gap < 1e-6)
    report(4, ok, f"c2 = 2pi: {rep.c2 == 2 * math.pi}, even increasing {rep.even_increasing}, odd decreasing "
                  f"{rep.odd_decreasing}, tail gaps even {rep.even_gap:.2e} odd {rep.odd_gap:.2e} (need < 1e-6)")


def test_criterion_05_level1_dichotomy():
    t0 = time.perf_counter()
    lams = np.logspace(-10, -6, 17)
    ratio = np.array([simplified_level1(l, S1) / math.log1p(1 / l) for l in lams])
    spread = ratio.max() / ratio.min() - 1
    lams2 = np.logspace(-12, 0, 49)
    vals = np.array([simplified_level1(l, SHALF) for l in lams2])
    tail = vals[lams2 <= 1e-6]
    tail_var = (tail.max() - tail.min()) / tail.max()
    dt = time.perf_counter() - t0
    ok = spread <= 0.05 and np.isfinite(vals).all() and tail_var < 0.01 and dt < 10
    report(5, ok, f"s=1 ratio spread {spread:.2%} (<= 5%); s=0.5 sup {vals.max():.4f}, "
                  f"tail variation {tail_var:.1e} (< 1%), {dt:.1f}s")


def test_criterion_06_log_modified_exponents():
    t0 = time.perf_counter()
    lams = np.logspace(-12, -4, 17)
    parts = []
    ok = True
    for g in (0.5, 0.75):
        slope, _ = fit_log_exponent(lams, [gamma_level1(l, g) for l in lams])
        good = abs(slope - (1 - g)) <= 0.05
        ok &= good
        parts.append(f"gamma={g}: exponent {slope:.3f} vs {1 - g:.2f}")
    r = np.array([gamma_level1(l, 1.0) for l in lams]) / np.log(np.abs(np.log(lams)))
    ok &= r.max() / r.min() <= 1.25
    parts.append(f"gamma=1: ratio in [{r.min():.3f}, {r.max():.3f}]")
    v = np.array([gamma_level1(l, 1.5) for l in lams])
    v0 = gamma_level1(0.0, 1.5)
    ok &= bool(np.all(v <= v0))
    parts.append(f"gamma=1.5: max {v.max():.3f} <= limit {v0:.3f}")
    dt = time.perf_counter() - t0
    ok &= dt < 30
    report(6, ok, "; ".join(parts) + f"; {dt:.1f}s")


def test_criterion_07_envelope_shape():
    t0 = time.perf_counter()
    lams = np.logspace(-12, -4, 33)
    env = [envelope_shapes(l) for l in lams]
    Ls = np.array([e.L0 for e in env])
    up = np.array([e.upper_env for e in env]) / np.sqrt(Ls)
    lo = np.array([e.lower_env for e in env]) / np.sqrt(Ls)
    s_up, _ = fit_loglog_slope(np.log(Ls), up)
    if np.all(lo > 0):
        s_lo, _ = fit_loglog_slope(np.log(Ls), lo)
    else:
        s_lo = float("nan")
    dt = time.perf_counter() - t0
    ok = abs(s_up - 1.5) <= 0.15 and abs(s_lo + 1.5) <= 0.15 and dt < 10
    report(7, ok, f"upper slope {s_up:.3f} (target 1.5 +- 0.15), lower slope {s_lo:.3f} "
                  f"(target -1.5 +- 0.15; nan = lower envelope clamped at 0 on {np.sum(lo == 0)}/{len(lo)} points)")


def test_criterion_08_covariance_oracle():
    t0 = time.perf_counter()
    parts = []
    ok = True
    for s in (0.0, 1.0):
        rep = covariance_check(2048, 10_000, [0.0, 0.5], [[0.0, 0.0], [1.0, 0.0]], DynamicsSpec.power(s),
                               seed=SEED, t_stationary=5.0)
        ok &= rep.passed
        parts.append(f"s={s:g}: max |z| {rep.max_abs_z:.2f}")
    dt = time.perf_counter() - t0
    ok &= dt < 180
    report(8, ok, ", ".join(parts) + f" (<= 3, incl. stationarity t=0 vs 5), {dt:.0f}s (< 180s)")


def test_criterion_09_divergence_free():
    gen = rng.stream(SEED, 0, 9)
    worst = 0.0
    nonzero = 0
    for i in range(1000):
        modes = sample_modes(64, seed=SEED, replica_id=i)
        st = init_stationary(modes, seed=SEED, replica_id=i)
        x = gen.uniform(-100, 100, 2)
        nonzero += eval_divergence(st, x) != 0.0
        scale = math.sqrt(np.sum(st.a ** 2 + st.b ** 2))
        worst = max(worst, abs(eval_divergence(st, x, "finite_difference", 1e-4)) / scale)
    report(9, nonzero == 0 and worst <= 1e-6,
           f"analytic nonzero in {nonzero}/1000, finite-difference max {worst:.2e} x field scale (<= 1e-6)")


def test_criterion_10_yaglom_uncorrelated():
    t0 = time.perf_counter()
    p = SimParams(0.01, 10.0, (1.0, 10.0), 10_000, 128, S1, master_seed=SEED)
    curve, _, diag = ensemble_runner(p)
    z = curve.cross / curve.cross_stderr
    dt = time.perf_counter() - t0
    ok = bool(np.all(np.abs(z) <= 3)) and dt < 300
    report(10, ok, f"cross z-scores {np.round(z, 2).tolist()} at t = 1, 10 (|z| <= 3), "
                   f"{diag.n_valid} valid replicas, {dt:.0f}s (< 300s)")


def test_criterion_11_bracket_sandwich():
    t0 = time.perf_counter()
    ts = tuple(np.round(np.arange(1, 1001) * 0.1, 10))
    p = SimParams(0.01, 100.0, ts, 10_000, 32, S1, master_seed=SEED, lambda_grid=(0.5, 0.1))
    _, lap, _ = ensemble_runner(p)
    parts = []
    ok = True
    for i, lam in enumerate(lap.lam):
        br = bracket(lam, S1)
        est, se, tail = lap.d_v_direct[i], lap.d_v_direct_se[i], lap.d_v_direct_tail[i]
        good = br.lower - 3 * se <= est + tail and est <= br.upper + 3 * se
        ok &= good
        parts.append(f"lambda={lam:g}: D_V {est:.4f} +- {se:.4f} in [{br.lower:.4f}, {br.upper:.4f}]")
    dt = time.perf_counter() - t0
    ok &= dt < 600
    report(11, ok, "; ".join(parts) + f", {dt:.0f}s (< 600s)")


def _trend_checkpoints():
    return tuple(sorted(set(np.round(np.geomspace(1.0, 500.0, 40), 2))))


def _per_replica_slopes(params):
    t = np.asarray(params.checkpoint_times)
    lt = np.log(t)
    c = (lt - lt.mean()) / np.sum((lt - lt.mean()) ** 2)
    out = np.empty(params.n_replicas)
    for r in range(params.n_replicas):
        rec = simulate_replica(params, r)
        out[r] = c @ (np.sum(rec.x ** 2, axis=1) / t)
    return out


def test_criterion_12_trend_separation():
    budget = 1200.0
    ts = _trend_checkpoints()
    n_steps = round(500 / 0.01)
    # throughput calibration on the production kernel
    probe = SimParams(0.01, 2.0, (2.0,), 32, 2048, S1, master_seed=SEED)
    ensemble_runner(SimParams(0.01, 0.02, (0.02,), 2, 2048, S1))  # warm-up (JIT cache load)
    t0 = time.perf_counter()
    ensemble_runner(probe)
    per_step = (time.perf_counter() - t0) / (32 * 200)
    projected = 2 * 10_000 * n_steps * per_step
    # pure-Brownian control (always executed)
    t0 = time.perf_counter()
    ctrl, _, _ = ensemble_runner(SimParams(0.01, 500.0, ts, 10_000, 0, master_seed=SEED))
    ctrl_ok = bool(np.all(np.abs(ctrl.d_of_t - 4) <= 3 * ctrl.d_stderr))
    ctrl_time = time.perf_counter() - t0
    detail = (f"Brownian control D=4 within 3 SE at all {len(ts)} times: {ctrl_ok} ({ctrl_time:.0f}s); "
              f"projected matched runs {projected / 3600:.1f} h on this machine")
    if projected > budget and not FULL:
        report(12, False, detail + f" exceeds the {budget / 60:.0f} min budget (set CURLDRIFT_FULL_ACCEPTANCE=1 "
                                   "to run regardless)")
    zs = {}
    for s in (1.0, 0.5):
        sl = _per_replica_slopes(SimParams(0.01, 500.0, ts, 10_000, 2048, DynamicsSpec.power(s), master_seed=SEED))
        zs[s] = sl.mean() / (sl.std(ddof=1) / math.sqrt(sl.size))
    ok = ctrl_ok and zs[1.0] > 3 and abs(zs[0.5]) <= 3
    report(12, ok, detail + f"; slope z-scores s=1 {zs[1.0]:.2f} (> 3), s=0.5 {zs[0.5]:.2f} (|z| <= 3)")


DET_CONFIG = """
master_seed = 99
[discretization]
dt = 0.05
horizon = 20.0
checkpoint_spacing = 0.5
[ensemble]
n_replicas = 100
n_modes = 16
[bounds]
lambdas = [1.0, 0.5]
envelope_lambdas = [1e-8, 1e-4]
gamma_lambdas = [1e-8, 1e-6, 1e-4]
[verify]
n_random = 20
n_derivative = 200
include_constant_scans = false
[covariance]
n_modes = 32
n_realizations = 300
"""


def test_criterion_13_determinism(tmp_path):
    cfg = tmp_path / "det.toml"
    cfg.write_text(DET_CONFIG)
    mismatches = []
    n_files = 0
    for cmd in ("simulate", "laplace", "bounds", "verify", "covariance"):
        outs = []
        for threads in (1, 8):
            out = tmp_path / f"{cmd}-{threads}"
            code = main([cmd, "--config", str(cfg), "--threads", str(threads), "--out", str(out)])
            outs.append((out, code))
        (a, ca), (b, cb) = outs
        if ca != cb:
            mismatches.append(f"{cmd} exit codes {ca}/{cb}")
        names = sorted(f.name for f in a.iterdir())
        if names != sorted(f.name for f in b.iterdir()):
            mismatches.append(f"{cmd} file lists differ")
        for name in names:
            n_files += 1
            if name == "metadata.json":
                ma, mb = (json.loads((d / name).read_text()) for d in (a, b))
                ma.pop("wall_time_s"), mb.pop("wall_time_s")
                same = ma == mb
            else:
                same = (a / name).read_bytes() == (b / name).read_bytes()
            if not same:
                mismatches.append(f"{cmd}/{name}")
    report(13, not mismatches, f"{n_files} output files over 5 subcommands, 1 vs 8 threads; "
                               f"mismatches: {mismatches or 'none'} (metadata compared without wall time)")
