"""Independent numerical checks of the bound identities and of the field.

The ``check_*`` functions test calculus identities and inequalities of
the ``L``/``lb``/``ub`` family by quadrature. ``scan_diag_constant`` and
``scan_off_constant`` turn existence-of-constant statements into
bounded-ratio scans.
``covariance_check`` compares Monte Carlo field statistics with the
spectral covariance, and ``chaos2_form`` evaluates the level-2
quadratic form by brute-force 4-d quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import rng as _rng
from .kernel import (DEFAULT_KERNEL, FOURIER_PREFACTOR, DynamicsSpec, SpectralKernel,
                     covariance_quadrature)
from .quadrature import adaptive, gauss_legendre_panels, graded_edges, periodic_nodes
from .resolvent_bounds import L, c_seq, gamma_primitive, h2_diag, h2_off_bound, lb, lb_of_L, poisson_clt_constant, ub
from .spectral_field import advance, eval_field, init_stationary, sample_modes


# ------------------------------------------------------------ calculus

def _log_integral(g, a: float, b: float, epsrel: float = 1e-13):
    """``∫_a^b g(x) dx`` computed in ``u = log x``."""
    if a == b:
        return 0.0
    lo, hi = math.log(a), math.log(b)
    n = max(int((hi - lo) / 2.0), 0)
    pts = list(np.linspace(lo, hi, n + 2)[1:-1]) if n else None
    return adaptive(lambda u: g(math.exp(u)) * math.exp(u), lo, hi, epsabs=1e-15, epsrel=epsrel, points=pts).value


def check_ub_integral_identity(a: float, b: float, z: float, k: int):
    """``∫_a^b dx / ((x²+x) ub_k) = 2 (lb_{k+1}(a) - lb_{k+1}(b))``.

    Returns
    -------
    lhs, rhs, abs_err : float
    """
    if not 0 < a <= b:
        raise ValueError("need 0 < a <= b")
    lhs = _log_integral(lambda x: 1.0 / ((x * x + x) * ub(k, x, z)), a, b)
    rhs = 2.0 * (lb(k + 1, a, z) - lb(k + 1, b, z))
    return lhs, rhs, abs(lhs - rhs)


def check_lb_integral_inequality(a: float, b: float, z: float, k: int, slack: float = 1e-10):
    """``∫_a^b dx / ((x²+x) lb_k) <= 2 (ub_k(a) - ub_k(b))`` up to ``slack``.

    Returns
    -------
    ok : bool
    lhs, rhs : float
    """
    if not 0 < a <= b:
        raise ValueError("need 0 < a <= b")
    lhs = _log_integral(lambda x: 1.0 / ((x * x + x) * lb(k, x, z)), a, b)
    rhs = 2.0 * (ub(k, a, z) - ub(k, b, z))
    return lhs <= rhs + slack, lhs, rhs


def derivative_closed_forms(x, z, k: int):
    """Closed-form x-derivatives of ``L``, ``lb_k`` and ``ub_k``."""
    x = np.asarray(x, dtype=float)
    Lval = L(x, z)
    xx = x * x + x
    dL = -1.0 / xx
    lbk = lb_of_L(k, Lval)
    if k == 0:
        dlb = np.zeros_like(x)
    else:
        dlb = -lb_of_L(k - 1, Lval) / (2.0 * xx * Lval)
    y = 0.5 * np.log(Lval)
    dub = -(1.0 / (2.0 * xx * lbk)) * (1.0 + y ** k / (math.factorial(k) * lbk))
    return dL, dlb, dub


def check_bound_derivatives(x, z, k: int, h: float = 1e-6) -> float:
    """Largest relative error of the closed-form derivatives against
    central differences with step ``h*x``."""
    x = np.asarray(x, dtype=float)
    step = h * x
    closed = derivative_closed_forms(x, z, k)
    fns = (lambda t: L(t, z), lambda t: lb(k, t, z), lambda t: ub(k, t, z))
    worst = 0.0
    for fn, d in zip(fns, closed):
        fd = (np.asarray(fn(x + step)) - np.asarray(fn(x - step))) / (2.0 * step)
        scale = np.maximum(np.abs(d), 1e-300)
        if k == 0 and fn is fns[1]:
            err = np.abs(fd)
        else:
            err = np.abs(fd - d) / scale
        worst = max(worst, float(np.max(err)))
    return worst


def check_z_monotone(x, z, k: int, dz: float = 1e-3) -> bool:
    """Forward differences in ``z``: ``L``, ``lb_k`` and ``ub_k`` increase."""
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    ok = True
    for fn in (lambda zz: L(x, zz), lambda zz: lb(k, x, zz), lambda zz: ub(k, x, zz)):
        ok &= bool(np.all(np.asarray(fn(z + dz)) >= np.asarray(fn(z))))
    return ok


def check_log_weight_comparison(lam: float, pmag: float, z: float, k: int, slack: float = 1e-10):
    """``|∫_x0^1 dϱ/(ϱ lb) - ∫_x0^1 dϱ/((ϱ+ϱ²) lb)| <= ub_k(x0, z)/z``, ``x0 = λ + |p|²``."""
    x0 = lam + pmag * pmag
    if x0 > 1:
        raise ValueError("need lambda + |p|^2 <= 1")
    i1 = _log_integral(lambda r: 1.0 / (r * lb(k, r, z)), x0, 1.0)
    i2 = _log_integral(lambda r: 1.0 / ((r + r * r) * lb(k, r, z)), x0, 1.0)
    lhs = abs(i1 - i2)
    rhs = ub(k, x0, z) / z
    return lhs <= rhs + slack, lhs, rhs


@dataclass(frozen=True)
class ChainReport:
    points: int
    violations: int
    monotone_violations: int
    worst_excess: float


def check_bound_chains(x_grid, z_grid, k_max: int = 10, slack: float = 1e-12) -> ChainReport:
    """Inequality chains ``1 <= lb <= √L`` and ``√z <= √L <= ub <= L`` on a grid,
    plus monotonicity of ``L``, ``lb``, ``ub`` (decreasing in x, increasing in z)."""
    X, Z = np.meshgrid(np.asarray(x_grid, float), np.asarray(z_grid, float), indexing="ij")
    Lv = L(X, Z)
    sq = np.sqrt(Lv)
    viol = 0
    mono = 0
    worst = 0.0
    funcs = [Lv]
    for k in range(k_max + 1):
        lbk = lb_of_L(k, Lv)
        ubk = Lv / lbk
        excess = [1.0 - lbk, lbk - sq, np.sqrt(Z) - sq, sq - ubk, ubk - Lv, 1.0 - np.sqrt(Z)]
        for e in excess:
            viol += int(np.sum(e > slack))
            worst = max(worst, float(np.max(e)))
        funcs += [lbk, ubk]
    for F in funcs:
        mono += int(np.sum(np.diff(F, axis=0) > slack))   # x increasing along axis 0
        mono += int(np.sum(np.diff(F, axis=1) < -slack))  # z increasing along axis 1
    return ChainReport(int(X.size) * (k_max + 1), viol, mono, worst)


def check_gamma_primitive(x, gamma: float, h: float = 1e-6) -> float:
    """Relative error between the derivative of ``log(e+1/x)^(1-γ)`` by central
    differences and ``-(1-γ)/((e x² + x) log(e+1/x)^γ)``."""
    x = np.asarray(x, dtype=float)
    step = h * x
    fd = (gamma_primitive(x + step, gamma) - gamma_primitive(x - step, gamma)) / (2.0 * step)
    closed = -(1.0 - gamma) / ((math.e * x * x + x) * np.log(math.e + 1.0 / x) ** gamma)
    return float(np.max(np.abs(fd - closed) / np.abs(closed)))


@dataclass(frozen=True)
class CSeqReport:
    c2: float
    c3: float
    even_increasing: bool
    odd_decreasing: bool
    even_gap: float
    odd_gap: float
    limit_even: float
    limit_odd: float


def check_c_sequence(k_max: int = 10_000, eps: float = 0.5) -> CSeqReport:
    """Monotonicity and tail gaps of the even and odd ``c`` subsequences."""
    c = c_seq(k_max, eps)
    even = c[1::2]   # c_2, c_4, ...
    odd = c[0::2]    # c_1, c_3, ...
    return CSeqReport(float(c[1]), float(c[2]), bool(np.all(np.diff(even) > 0)),
                      bool(np.all(np.diff(odd[1:]) < 0)), float(abs(even[-1] - even[-2])),
                      float(abs(odd[-1] - odd[-2])), float(even[-1]), float(odd[-1]))


# ------------------------------------------------------------ constant scans

def _polar_partition(f, centers, radius, n_r: int, n_theta: int, focus_scale: float = 1e-9):
    """``∫ f(q) dq`` over the disk ``|q| < radius`` for integrands with
    point singularities at ``centers``.

    A partition of unity ``φ_i ∝ Π_{j≠i} |q - c_j|²`` assigns each
    centre its own polar grid (graded toward the centre), so every piece
    is smooth in its own coordinates.
    """
    cents = []
    for c in centers:
        c = np.asarray(c, float)
        if not any(np.hypot(*(c - d)) < 1e-14 for d in cents):
            cents.append(c)
    theta, wt = periodic_nodes(n_theta)
    ct, st = np.cos(theta), np.sin(theta)
    total = 0.0
    for i, c in enumerate(cents):
        rmax = radius + float(np.hypot(*c))
        edges = graded_edges(0.0, rmax, 0.0, n_geometric=int(math.log2(rmax / focus_scale)) + 1,
                             n_uniform=max(n_r // 16, 2))
        rho, wr = gauss_legendre_panels(edges, 8)
        q1 = c[0] + rho[:, None] * ct[None, :]
        q2 = c[1] + rho[:, None] * st[None, :]
        vals = f(q1, q2)
        if len(cents) > 1:
            d2 = [(q1 - d[0]) ** 2 + (q2 - d[1]) ** 2 for d in cents]
            num = np.ones_like(q1)
            for j, dj in enumerate(d2):
                if j != i:
                    num = num * dj
            den = np.zeros_like(q1)
            for l in range(len(cents)):
                term = np.ones_like(q1)
                for j, dj in enumerate(d2):
                    if j != l:
                        term = term * dj
                den = den + term
            vals = vals * np.where(den > 0, num / np.where(den > 0, den, 1.0), 1.0 if i == 0 else 0.0)
        total += float(wr @ ((vals @ wt) * rho))
    return total


def _sin2_q(q1, q2):
    r2 = q1 * q1 + q2 * q2
    return np.where(r2 > 0, q2 * q2 / np.where(r2 > 0, r2, 1.0), 0.0)


def _ub_arr(k, x, z):
    return ub(k, np.asarray(x), z)


def diag_comparison_terms(lam_t: float, pmag: float, z: float, k: int, s: float, kernel: SpectralKernel = DEFAULT_KERNEL,
             n_r: int = 128, n_theta: int = 128):
    """Left and right side of the diagonal comparison with ``p = (pmag, 0)``.

    Returns ``(two_d, one_d)`` with ``two_d = ∫ V̂(q) sin²θ dq / ((λ̃+|p+q|²) ub_k(λ̃+|p+q|²) + |q|^{2s})``
    and ``one_d = (π/2) ∫_{λ̃+|p|²}^1 dϱ / (ϱ ub_k(ϱ))``.
    """

    def f(q1, q2):
        r = np.hypot(q1, q2)
        x = lam_t + (q1 + pmag) ** 2 + q2 ** 2
        return kernel.vhat(r) * _sin2_q(q1, q2) / (x * _ub_arr(k, x, z) + r ** (2 * s))

    two_d = _polar_partition(f, [(0.0, 0.0), (-pmag, 0.0)], 1.0, n_r, n_theta)
    x0 = lam_t + pmag * pmag
    one_d = 0.0 if x0 >= 1 else 0.5 * math.pi * _log_integral(lambda r: 1.0 / (r * ub(k, r, z)), x0, 1.0, 1e-11)
    return two_d, one_d


def off_diag_term(lam_t: float, pmag: float, pprime, z: float, k: int, kernel: SpectralKernel = DEFAULT_KERNEL,
            n_r: int = 128, n_theta: int = 128) -> float:
    """``|p| ∫ V̂(q) sin²θ dq / ([λ̃ + |p+q|² ub_k(λ̃+|p+q|²+|q|²)] |p'+q|)`` with ``p = (pmag, 0)``."""
    pp = np.asarray(pprime, float)

    def f(q1, q2):
        r = np.hypot(q1, q2)
        pq = (q1 + pmag) ** 2 + q2 ** 2
        dist = np.hypot(q1 + pp[0], q2 + pp[1])
        den = (lam_t + pq * _ub_arr(k, lam_t + pq + r * r, z)) * dist
        return np.where(dist > 0, kernel.vhat(r) * _sin2_q(q1, q2) / np.where(dist > 0, den, 1.0), 0.0)

    return pmag * _polar_partition(f, [(0.0, 0.0), (-pmag, 0.0), (-pp[0], -pp[1])], 1.0, n_r, n_theta)


@dataclass
class ScanResult:
    max_ratio: float
    ratios: np.ndarray
    points: list = field(default_factory=list)


def default_scan_grid(quick: bool = False):
    lams = [1e-6, 1e-3, 0.1] if quick else [1e-8, 1e-6, 1e-4, 1e-2, 0.1, 0.5]
    offs = [0.0, 1.0] if quick else [0.0, 0.5, 2.0]
    pms = [0.02, 0.3] if quick else [0.005, 0.05, 0.3, 0.7]
    zs = [2.0, 50.0] if quick else [1.5, 10.0, 100.0]
    ks = [0, 2] if quick else [0, 1, 3]
    return [(l + o, p, z, k) for l in lams for o in offs for p in pms for z in zs for k in ks]


def scan_diag_constant(grid=None, s_values=(1.0, 1.5), kernel: SpectralKernel = DEFAULT_KERNEL,
            n_r: int = 128, n_theta: int = 128) -> ScanResult:
    """Max over the grid of ``|two_d - one_d| √z / lb_{k+1}(λ̃ + |p|²)``."""
    grid = default_scan_grid() if grid is None else grid
    ratios = []
    pts = []
    for (lt, pm, z, k) in grid:
        for s in s_values:
            two, one = diag_comparison_terms(lt, pm, z, k, s, kernel, n_r, n_theta)
            ratios.append(abs(two - one) * math.sqrt(z) / lb(k + 1, lt + pm * pm, z))
            pts.append((lt, pm, z, k, s))
    ratios = np.array(ratios)
    return ScanResult(float(ratios.max()), ratios, pts)


def scan_off_constant(grid=None, pprime_factors=(0.0, 1.0, 3.0), kernel: SpectralKernel = DEFAULT_KERNEL,
            n_r: int = 128, n_theta: int = 128) -> ScanResult:
    """Max over the grid of ``off_integral · z / lb_k(λ̃ + |p|²)``; ``p'`` is
    ``factor·|p|`` along a direction at 60° to ``p`` (``factor = 0`` is the
    single-momentum case)."""
    grid = default_scan_grid() if grid is None else grid
    ratios = []
    pts = []
    direction = np.array([math.cos(math.pi / 3), math.sin(math.pi / 3)])
    for (lt, pm, z, k) in grid:
        for fac in pprime_factors:
            off = off_diag_term(lt, pm, fac * pm * direction, z, k, kernel, n_r, n_theta)
            ratios.append(off * z / lb(k, lt + pm * pm, z))
            pts.append((lt, pm, z, k, fac))
    ratios = np.array(ratios)
    return ScanResult(float(ratios.max()), ratios, pts)


# ------------------------------------------------------- chaos-2 oracle

def chaos2_form(lam: float, dyn: DynamicsSpec, kernel: SpectralKernel = DEFAULT_KERNEL,
                n_r: int = 48, n_theta: int = 64, unit_resolvent: bool = False):
    """Brute-force 4-d quadrature of the level-2 form for ``V = ω¹(0)``.

    With ``w = V̂/|p|²`` and ``σ = λ + |p1+p2|² + m(p1) + m(p2)``::

        full = 1/(2 (2π)^4) ∫∫ w1 w2 σ^-1 (p1×p2)² (p1₂ - p2₂)²
        diag = 1/(2π)^4    ∫∫ w1 w2 σ^-1 (p1×p2)² p1₂²
        off  = -1/(2π)^4   ∫∫ w1 w2 σ^-1 (p1×p2)² p1₂ p2₂

    ``unit_resolvent=True`` replaces ``σ`` by 1 (the squared norm).
    """
    nodes, weights = gauss_legendre_panels(np.linspace(0.0, 1.0, n_r // 16 + 1), 16)
    theta, wt = periodic_nodes(n_theta)
    vr = kernel.vhat(nodes)
    mr = dyn.rate(nodes)
    # grids over (r, θ) for p2, flattened
    R2 = np.repeat(nodes, n_theta)
    T2 = np.tile(theta, n_r // 16 * 16)
    W2 = np.repeat(weights * nodes * vr, n_theta) * np.tile(wt, n_r // 16 * 16)
    M2 = np.repeat(mr, n_theta)
    p2x, p2y = R2 * np.cos(T2), R2 * np.sin(T2)
    full = diag = off = 0.0
    for i, r1 in enumerate(nodes):
        for t1, w1t in zip(theta, wt):
            w1 = weights[i] * r1 * vr[i] * w1t
            if w1 == 0.0:
                continue
            p1x, p1y = r1 * math.cos(t1), r1 * math.sin(t1)
            cross2 = np.sin(t1 - T2) ** 2  # w1 w2 (p1×p2)² = V̂1 V̂2 sin²
            if unit_resolvent:
                inv = 1.0
            else:
                inv = 1.0 / (lam + (p1x + p2x) ** 2 + (p1y + p2y) ** 2 + mr[i] + M2)
            base = W2 * cross2 * inv
            full += w1 * float(base @ (p1y - p2y) ** 2)
            diag += w1 * p1y ** 2 * float(base.sum())
            off -= w1 * p1y * float(base @ p2y)
    c = FOURIER_PREFACTOR ** 2
    return {"full": 0.5 * c * full, "diag": c * diag, "off": c * off}


def h2_route(lam: float, dyn: DynamicsSpec, kernel: SpectralKernel = DEFAULT_KERNEL):
    """Diagonal part and off-diagonal bound of the level-2 form from the
    1-d multipliers: ``(2π)^-2 ∫ V̂ p₂²/|p|² h(|p|) dp``."""
    g_d = lambda r: r * float(kernel.vhat(r)) * h2_diag(r, lam, dyn, kernel) if r > 0 else 0.0
    g_o = lambda r: r * float(kernel.vhat(r)) * h2_off_bound(r, lam, dyn, kernel) if r > 0 else 0.0
    scale = FOURIER_PREFACTOR * 0.5 * 2.0 * math.pi
    d = adaptive(g_d, 0.0, 1.0, epsabs=0.0, epsrel=1e-10).value
    o = adaptive(g_o, 0.0, 1.0, epsabs=0.0, epsrel=1e-10).value
    return scale * d, scale * o


def a_plus_norm_wick(kernel: SpectralKernel = DEFAULT_KERNEL) -> float:
    """``E[(ω·∇ω¹)(0)²]`` by Wick's theorem: ``½ tr R(0,0) · ∫ |p|² S₁₁(p) dp``."""
    half_trace = 0.5 * FOURIER_PREFACTOR * kernel.total_mass
    grad = FOURIER_PREFACTOR * 0.5 * kernel.radial_moment(2.0)
    return half_trace * grad


# ------------------------------------------------------ covariance check

@dataclass
class CovarianceReport:
    rows: list
    stationarity: list
    max_abs_z: float
    passed: bool
    threshold: float = 3.0


def covariance_check(n_modes: int, n_realizations: int, t_list, x_list, dyn: DynamicsSpec, seed: int,
                     kernel: SpectralKernel = DEFAULT_KERNEL, t_stationary: float = 5.0,
                     threshold: float = 3.0) -> CovarianceReport:
    """Monte Carlo ``E[ω₀(0) ⊗ ω_t(x)]`` against the covariance quadrature.

    Each realization draws fresh modes and amplitudes and is evolved by
    exact OU steps through the sorted times. Stationarity compares the
    one-point covariance at ``t = 0`` and ``t = t_stationary`` through
    paired per-realization differences.
    """
    times = sorted(set(float(t) for t in t_list) | {0.0, float(t_stationary)})
    xs = np.asarray(x_list, dtype=float).reshape(-1, 2)
    nt, nx = len(times), len(xs)
    prod = np.empty((n_realizations, nt, nx, 2, 2))
    stat = np.empty((n_realizations, 2, 2))
    for r in range(n_realizations):
        modes = sample_modes(n_modes, kernel, seed, replica_id=r)
        state = init_stationary(modes, seed, replica_id=r)
        gen = _rng.stream(seed, r, _rng.ENV_NOISE)
        w00 = eval_field(state, np.zeros(2))
        for it, t in enumerate(times):
            if t > state.time:
                state = advance(state, t - state.time, gen, dyn)
            w = eval_field(state, xs)
            prod[r, it] = w00[None, :, None] * w[:, None, :]
            if t == t_stationary:
                w0t = eval_field(state, np.zeros(2))
                stat[r] = np.outer(w0t, w0t) - np.outer(w00, w00)
    mean = prod.mean(axis=0)
    se = prod.std(axis=0, ddof=1) / math.sqrt(n_realizations)
    rows = []
    zmax = 0.0
    for it, t in enumerate(times):
        if t not in [float(v) for v in t_list]:
            continue
        for ix, x in enumerate(xs):
            quad = covariance_quadrature(t, x, dyn, kernel).matrix
            for i in range(2):
                for j in range(2):
                    z = (mean[it, ix, i, j] - quad[i, j]) / se[it, ix, i, j] if se[it, ix, i, j] > 0 else 0.0
                    zmax = max(zmax, abs(z))
                    rows.append(dict(t=t, x1=x[0], x2=x[1], i=i + 1, j=j + 1, mc_mean=mean[it, ix, i, j],
                                     mc_se=se[it, ix, i, j], quadrature=quad[i, j], z=z))
    smean = stat.mean(axis=0)
    sse = stat.std(axis=0, ddof=1) / math.sqrt(n_realizations)
    srows = []
    for i in range(2):
        for j in range(i, 2):
            z = smean[i, j] / sse[i, j] if sse[i, j] > 0 else 0.0
            zmax = max(zmax, abs(z))
            srows.append(dict(t=t_stationary, i=i + 1, j=j + 1, diff_mean=smean[i, j], diff_se=sse[i, j], z=z))
    return CovarianceReport(rows, srows, zmax, zmax <= threshold, threshold)


# ------------------------------------------------------------ suite

@dataclass
class CheckOutcome:
    name: str
    passed: bool
    value: float
    tolerance: float
    detail: str = ""


def run_check_suite(seed: int = 7, n_random: int = 100, n_deriv: int = 1000, include_scans: bool = True,
                    quick_scans: bool = True) -> list[CheckOutcome]:
    """Randomized identity, inequality and scan checks with a fixed seed; used by the CLI ``verify``."""
    gen = _rng.stream(seed, 0, 0)
    out = []
    # upper-bound integral identity
    errs = []
    for _ in range(n_random):
        a, b = np.sort(10.0 ** gen.uniform(-8, 1, 2))
        z = gen.uniform(1, 100)
        k = int(gen.integers(0, 9))
        errs.append(check_ub_integral_identity(float(a), float(b), float(z), k)[2])
    out.append(CheckOutcome("ub_integral_identity", max(errs) <= 1e-8, max(errs), 1e-8, f"{n_random} random points"))
    # closed-form derivatives
    x = 10.0 ** gen.uniform(-8, 1, n_deriv)
    z = gen.uniform(1, 100, n_deriv)
    k = gen.integers(0, 11, n_deriv)
    worst = max(check_bound_derivatives(x[k == kk], z[k == kk], int(kk)) for kk in np.unique(k))
    out.append(CheckOutcome("bound_derivatives", worst <= 1e-6, worst, 1e-6, f"{n_deriv} random points"))
    zmono = all(check_z_monotone(x, z, kk) for kk in range(11))
    out.append(CheckOutcome("z_monotone", zmono, 0.0 if zmono else 1.0, 0.0))
    # inequality chains
    rep = check_bound_chains(np.logspace(-8, 1, 200), np.linspace(1, 100, 60), 10)
    ok = rep.violations == 0 and rep.monotone_violations == 0
    out.append(CheckOutcome("bound_chains", ok, rep.violations + rep.monotone_violations, 0.0, f"{rep.points} points"))
    # lower-bound integral inequality
    bad = 0
    xs = np.logspace(-8, 1, 10)
    for i in range(len(xs)):
        for j in range(i + 1, len(xs)):
            for zz in (1.0, 10.0, 100.0):
                for kk in range(11):
                    bad += not check_lb_integral_inequality(xs[i], xs[j], zz, kk, slack=1e-12)[0]
    out.append(CheckOutcome("lb_integral_inequality", bad == 0, bad, 0.0, "grid of (a,b,z,k)"))
    # log-weight comparison
    bad = 0
    for _ in range(n_random):
        lam = 10.0 ** gen.uniform(-10, -0.5)
        pm = gen.uniform(0, math.sqrt(max(1 - lam, 0)))
        bad += not check_log_weight_comparison(lam, pm, gen.uniform(1, 100), int(gen.integers(0, 9)))[0]
    out.append(CheckOutcome("log_weight_comparison", bad == 0, bad, 0.0, f"{n_random} random points"))
    # calculus of the log-modified primitive
    worst = max(check_gamma_primitive(10.0 ** gen.uniform(-8, 0, 50), g) for g in (0.5, 0.75, 1.5))
    out.append(CheckOutcome("gamma_primitive_derivative", worst <= 1e-6, worst, 1e-6))
    # c2 and Poisson constant
    c = c_seq(2, 0.5)
    out.append(CheckOutcome("c2_equals_2pi", bool(c[1] == 2 * math.pi), float(c[1]), 0.0))
    pc = max(poisson_clt_constant(l) for l in np.logspace(-12, -3, 40))
    out.append(CheckOutcome("poisson_clt_constant", pc <= 3.0, pc, 3.0))
    if include_scans:
        grid = default_scan_grid(quick=quick_scans)
        b1 = scan_diag_constant(grid, n_r=64, n_theta=64).max_ratio
        b1f = scan_diag_constant(grid, n_r=128, n_theta=128).max_ratio
        rel = abs(b1f - b1) / b1f
        out.append(CheckOutcome("diag_constant_refinement_stable", bool(np.isfinite(b1f)) and rel < 0.2, rel, 0.2,
                                f"max ratio {b1f:.6g}"))
        b2 = scan_off_constant(grid, n_r=64, n_theta=64).max_ratio
        b2f = scan_off_constant(grid, n_r=128, n_theta=128).max_ratio
        rel = abs(b2f - b2) / b2f
        out.append(CheckOutcome("off_constant_refinement_stable", bool(np.isfinite(b2f)) and rel < 0.2, rel, 0.2,
                                f"max ratio {b2f:.6g}"))
    return out
