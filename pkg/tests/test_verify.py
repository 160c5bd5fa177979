import math

import numpy as np
import pytest

from curldrift.kernel import DynamicsSpec, SpectralKernel, covariance_quadrature
from curldrift.resolvent_bounds import L, ub
from curldrift.verify import (a_plus_norm_wick, diag_comparison_terms, off_diag_term, chaos2_form, check_bound_chains, check_ub_integral_identity,
                              check_lb_integral_inequality, check_bound_derivatives, check_log_weight_comparison, check_c_sequence,
                              check_gamma_primitive, check_z_monotone, covariance_check, default_scan_grid, h2_route,
                              run_check_suite, scan_diag_constant, scan_off_constant)

S1 = DynamicsSpec.power(1)
UB_IDENTITY_RHS = 0.214687277235970744  # log((1 + log 3)/(1 + log 2)), 30-digit evaluation


# ------------------------------------------------------------ integral identities

def test_ub_identity_worked_example():
    lhs, rhs, err = check_ub_integral_identity(0.5, 1.0, 1.0, 0)
    assert rhs == pytest.approx(UB_IDENTITY_RHS, rel=1e-14)
    assert err <= 1e-8


def test_integral_checks_degenerate_interval():
    assert check_ub_integral_identity(0.3, 0.3, 2.0, 3) == (0.0, 0.0, 0.0)
    ok, lhs, rhs = check_lb_integral_inequality(0.3, 0.3, 2.0, 3)
    assert ok and lhs == 0 and rhs == 0
    with pytest.raises(ValueError):
        check_ub_integral_identity(1.0, 0.5, 1.0, 0)


def test_lb_inequality_level_zero_closed_form():
    # k = 0: lhs = ∫ dx/(x²+x) = log((b/(1+b)) (1+a)/a), rhs = 2 (L(a) - L(b))
    a, b, z = 0.01, 2.0, 5.0
    ok, lhs, rhs = check_lb_integral_inequality(a, b, z, 0)
    assert lhs == pytest.approx(math.log((1 + a) / a) - math.log((1 + b) / b), rel=1e-10)
    assert rhs == pytest.approx(2 * (L(a, z) - L(b, z)), rel=1e-14)
    assert ok


def test_derivative_examples():
    assert check_bound_derivatives(np.array([1.0]), 0.0, 0) <= 1e-6
    gen = np.random.default_rng(1)
    x = 10.0 ** gen.uniform(-8, 1, 200)
    z = gen.uniform(1, 100, 200)
    for k in range(0, 11):
        assert check_bound_derivatives(x, z, k) <= 1e-6
        assert check_z_monotone(x, z, k)


def test_log_weight_comparison_examples():
    ok, lhs, rhs = check_log_weight_comparison(0.5, math.sqrt(0.5), 3.0, 2)
    assert ok and lhs == 0.0
    # k = 0, z = 1: lhs = ∫ dϱ/ϱ - ∫ dϱ/(ϱ(1+ϱ)) over [x0, 1] = log(2/(1+x0))
    x0 = 0.01
    ok, lhs, rhs = check_log_weight_comparison(x0, 0.0, 1.0, 0)
    assert lhs == pytest.approx(math.log(2 / (1 + x0)), rel=1e-10)
    assert rhs == pytest.approx(ub(0, x0, 1.0), rel=1e-14)
    assert ok


def test_chain_grid():
    rep = check_bound_chains(np.logspace(-8, 1, 120), np.linspace(1, 100, 40), 10)
    assert rep.violations == 0 and rep.monotone_violations == 0


def test_c_sequence_report():
    rep = check_c_sequence(400, 0.5)
    assert rep.c2 == 2 * math.pi
    assert rep.c3 == pytest.approx(0.5 * (1 - 2 ** -1.5), rel=1e-15)
    assert rep.even_increasing and rep.odd_decreasing
    assert rep.limit_even > 2 * math.pi and rep.limit_odd < 1


def test_gamma_primitive_check():
    assert check_gamma_primitive(np.logspace(-8, 0, 30), 0.5) <= 1e-6


# ------------------------------------------------------------ constant scans

def test_diag_comparison_zero_kernel_uses_only_radial_term():
    two, one = diag_comparison_terms(0.1, 0.3, 5.0, 1, 1.0, kernel=SpectralKernel("zero"), n_r=32, n_theta=32)
    assert two == 0.0 and math.isfinite(one) and one > 0


def test_constant_scans_bounded_and_refinement_stable():
    grid = [(1e-3, 0.3, 2.0, 0), (0.1, 0.02, 50.0, 2), (1.0, 0.3, 10.0, 1)]
    c1 = scan_diag_constant(grid, n_r=64, n_theta=64)
    f1 = scan_diag_constant(grid, n_r=128, n_theta=128)
    assert np.all(np.isfinite(f1.ratios))
    assert abs(f1.max_ratio - c1.max_ratio) <= 0.2 * f1.max_ratio
    r = f1.ratios.reshape(len(grid), 2)
    # s = 1 and s = 1.5 share a common bound
    assert r[:, 1].max() <= 3 * r[:, 0].max() and r[:, 0].max() <= 3 * r[:, 1].max()
    c2 = scan_off_constant(grid, n_r=64, n_theta=64)
    f2 = scan_off_constant(grid, n_r=128, n_theta=128)
    assert np.all(np.isfinite(f2.ratios))
    assert abs(f2.max_ratio - c2.max_ratio) <= 0.2 * f2.max_ratio
    assert len(default_scan_grid(quick=True)) < len(default_scan_grid())


def test_off_diag_term_small_momentum_is_linear():
    v1 = off_diag_term(0.1, 1e-3, (0.0, 0.0), 5.0, 1, n_r=64, n_theta=64)
    v2 = off_diag_term(0.1, 2e-3, (0.0, 0.0), 5.0, 1, n_r=64, n_theta=64)
    assert 0 < v1 < v2
    assert v2 / v1 == pytest.approx(2.0, rel=0.05)


# ------------------------------------------------------------ chaos-2 oracle

def test_chaos2_norm_matches_wick():
    form = chaos2_form(0.1, S1, unit_resolvent=True)
    assert form["full"] == pytest.approx(a_plus_norm_wick(), rel=1e-8)


@pytest.mark.parametrize("lam", [0.1, 0.5])
def test_chaos2_form_matches_level2_multipliers(lam):
    form = chaos2_form(lam, S1)
    diag, off_bound = h2_route(lam, S1)
    assert abs(form["full"] - (diag + form["off"])) <= 1e-6
    assert form["diag"] == pytest.approx(diag, rel=1e-6)
    assert abs(form["off"]) <= off_bound


# ------------------------------------------------------------ covariance

def test_covariance_check_small_run():
    rep = covariance_check(64, 2000, [0.0, 0.5], [[0.0, 0.0], [1.0, 0.0]], S1, seed=4)
    assert rep.passed and rep.max_abs_z <= 3
    assert len(rep.rows) == 2 * 2 * 4 and len(rep.stationarity) == 3
    off0 = [r for r in rep.rows if r["t"] == 0 and r["x1"] == 0 and r["i"] != r["j"]]
    assert all(abs(r["mc_mean"]) <= 3 * r["mc_se"] for r in off0)


def test_covariance_ou_temporal_decay():
    dyn = DynamicsSpec.power(0)
    rep = covariance_check(32, 3000, [0.0, 1.0], [[0.0, 0.0]], dyn, seed=6)
    r0 = next(r for r in rep.rows if r["t"] == 0 and r["i"] == 1 and r["j"] == 1)
    r1 = next(r for r in rep.rows if r["t"] == 1 and r["i"] == 1 and r["j"] == 1)
    assert r1["quadrature"] == pytest.approx(math.exp(-1) * r0["quadrature"], rel=1e-12)
    assert abs(r1["mc_mean"] - math.exp(-1) * r0["quadrature"]) <= 3 * r1["mc_se"]


# ------------------------------------------------------------ suite

def test_check_suite_passes():
    out = run_check_suite(seed=7, include_scans=False)
    failed = [o.name for o in out if not o.passed]
    assert failed == []
    names = {o.name for o in out}
    assert {"ub_integral_identity", "bound_derivatives", "bound_chains", "lb_integral_inequality", "log_weight_comparison", "c2_equals_2pi"} <= names
