"""Scalar machinery for resolvent truncation bounds.

Contents:

* the functions ``L``, ``lb``, ``ub`` that arise when the resolvent
  hierarchy is iterated, and the constants ``z_k``, ``f_k``, ``c_k``;
* level-1 and level-2 bracket integrals for ``<V, (λ - L)^-1 V>`` with
  ``V = ω¹(0)`` (chaos-1 kernel ``p₂``);
* the superdiffusive envelope shape with its level selection ``k(λ)``;
* level-1 integrals for the log-modified dynamics and an exponent fit.

All chaos-1 quadratic forms use the norm ``(2π)^-2 ∫ V̂(p)|p|^-2 |ψ̂(p)|² dp``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .kernel import DEFAULT_KERNEL, FOURIER_PREFACTOR, DynamicsSpec, SpectralKernel
from .quadrature import adaptive, gauss_legendre_panels, periodic_nodes

C0 = FOURIER_PREFACTOR


@dataclass(frozen=True)
class BoundParams:
    """Tuning constants of the envelope: exponent ``eps`` and sizes ``K1``, ``K2``."""

    eps: float = 0.5
    K1: float = 4.0
    K2: float = 4.0

    def __post_init__(self):
        if not self.eps > 0:
            raise ValueError("eps must be positive")
        if self.K1 < 1 or self.K2 < 1:
            raise ValueError("K1 and K2 must be >= 1")


@dataclass(frozen=True)
class BracketResult:
    """Two-sided bracket of ``D_V(λ)``.

    ``lower``/``upper`` are on the ``D_V`` scale, i.e. ``4/λ²`` times the
    resolvent quadratic forms ``resolvent_lower``/``resolvent_upper``.
    """

    lam: float
    lower: float
    upper: float
    lower_err: float
    upper_err: float
    resolvent_lower: float
    resolvent_upper: float


# ---------------------------------------------------------------- L, LB, UB

def L(x, z=0.0):
    """``z + log(1 + 1/x)``."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise ValueError("L needs x > 0")
    out = np.asarray(z, dtype=float) + np.log1p(1.0 / x)
    return out if out.ndim else float(out)


def lb_of_L(k: int, Lval):
    """Truncated exponential series ``Σ_{j<=k} (½ log L)^j / j!``."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    y = 0.5 * np.log(np.asarray(Lval, dtype=float))
    term = np.ones_like(y)
    total = np.ones_like(y)
    for j in range(1, k + 1):
        term = term * y / j
        total = total + term
    return total if total.ndim else float(total)


def lb(k: int, x, z=0.0):
    return lb_of_L(k, L(x, z))


def ub(k: int, x, z=0.0):
    Lval = L(x, z)
    return Lval / lb_of_L(k, Lval)


def z_k(k: int, n: int, params: BoundParams = BoundParams()) -> float:
    return params.K1 * float(n + k) ** (2.0 + 2.0 * params.eps)


def f_k(k: int, n: int, params: BoundParams = BoundParams()) -> float:
    return params.K2 * math.sqrt(z_k(k, n, params))


def c_seq(k_max: int, eps: float) -> np.ndarray:
    """``c_1 … c_{k_max}`` (index ``i`` of the result holds ``c_{i+1}``)."""
    if not eps > 0:
        raise ValueError("eps must be positive; the sequence has no limit otherwise")
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    c = np.empty(k_max)
    c[0] = 1.0
    for i in range(2, k_max + 1):
        if i % 2 == 0:
            k = i // 2
            c[i - 1] = (math.pi / c[i - 2]) * (1.0 + k ** (-(1.0 + eps)))
        else:
            k = (i - 1) // 2
            c[i - 1] = (math.pi / c[i - 2]) * (1.0 - (k + 1) ** (-(1.0 + eps)))
    return c


# ----------------------------------------------------------- level-1 forms

def _radial_integral(g, lam: float, upper: float = 1.0, epsrel: float = 1e-11):
    """``∫_0^upper g(r) dr`` for integrands of size ``O(r/λ)`` near zero.

    Integrates in ``u = log r`` from ``r0 = 1e-9 √λ`` (the dropped piece
    is below ``r0²/(2λ) ~ 5e-19``), breaking the range every two e-folds.
    """
    r0 = 1e-9 * math.sqrt(lam) if lam > 0 else 0.0
    if r0 == 0.0:
        lo = -math.inf
        pts = None
    else:
        lo = math.log(r0)
        pts = list(np.arange(math.log(upper), lo, -2.0)[1:])
    hi = math.log(upper)
    h = lambda u: g(math.exp(u)) * math.exp(u)
    return adaptive(h, lo, hi, epsabs=0.0 if lam > 0 else 1e-13, epsrel=epsrel, points=pts)


def simplified_level1(lam: float, dyn: DynamicsSpec) -> float:
    """``∫_0^1 r dr / (λ + r² + m(r))``."""
    if not lam > 0:
        raise ValueError("lambda must be positive")
    return _radial_integral(lambda r: r / (lam + r * r + float(dyn.rate(r))), lam).value


def level1_upper(lam: float, dyn: DynamicsSpec, kernel: SpectralKernel = DEFAULT_KERNEL,
                 with_error: bool = False):
    """``<V, (λ - Δ - L₀)^-1 V>``, i.e. ``½(2π)^-2 ∫ V̂ / (λ + |p|² + m)``."""
    if not lam > 0:
        raise ValueError("lambda must be positive")
    g = lambda r: r * float(kernel.vhat(r)) / (lam + r * r + float(dyn.rate(r)))
    res = _radial_integral(g, lam)
    val = 0.5 * C0 * 2.0 * math.pi * res.value
    return (val, 0.5 * C0 * 2.0 * math.pi * res.error) if with_error else val


# ----------------------------------------------------------- level-2 forms

def _angular_closed(a, b):
    """``∫_0^{2π} sin²φ / (a + b cos φ) dφ = 2π / (a + √(a² - b²))`` for ``a > |b|``."""
    return 2.0 * math.pi / (a + np.sqrt((a - b) * (a + b)))


def _h2_integrand(rho, pmag, lam, dyn, kernel, power):
    rho = np.asarray(rho, dtype=float)
    a = lam + pmag * pmag + rho * rho + dyn.rate(pmag) + dyn.rate(rho)
    b = 2.0 * pmag * rho
    return rho ** power * kernel.vhat(rho) * _angular_closed(a, b)


def _h2_tensor(pmag, lam, dyn, kernel, singular: bool, n_r: int, n_theta: int) -> float:
    nodes, weights = gauss_legendre_panels(np.linspace(0.0, 1.0, n_r // 16 + 1), 16)
    theta, wt = periodic_nodes(n_theta)
    q1 = nodes[:, None] * np.cos(theta)[None, :]
    q2 = nodes[:, None] * np.sin(theta)[None, :]
    pq2 = (pmag + q1) ** 2 + q2 ** 2
    sig = lam + pq2 + dyn.rate(pmag) + dyn.rate(nodes)[:, None]
    sin2 = np.sin(theta)[None, :] ** 2
    radial = nodes * kernel.vhat(nodes)
    if singular:
        radial = kernel.vhat(nodes)  # the polar Jacobian cancels 1/|q|
    return float(weights @ ((sin2 / sig) @ wt * radial))


def h2_diag(pmag: float, lam: float, dyn: DynamicsSpec, kernel: SpectralKernel = DEFAULT_KERNEL,
            method: str = "adaptive", n_r: int = 256, n_theta: int = 512) -> float:
    """Diagonal multiplier of the level-2 correction on the first chaos.

    ``C₀ |p|² ∫ V̂(q) sin²θ / (λ + |p+q|² + m(p) + m(q)) dq`` with ``θ``
    the angle between ``p`` and ``q``. The angular integral is done in
    closed form (``method="adaptive"``) or on a polar tensor grid
    (``method="tensor"``).
    """
    if not pmag > 0:
        raise ValueError("pmag must be positive")
    if method == "tensor":
        inner = _h2_tensor(pmag, lam, dyn, kernel, False, n_r, n_theta)
    else:
        inner = adaptive(lambda r: float(_h2_integrand(r, pmag, lam, dyn, kernel, 1)), 0.0, 1.0,
                         epsabs=0.0, epsrel=1e-11).value
    return C0 * pmag * pmag * inner


def h2_off_bound(pmag: float, lam: float, dyn: DynamicsSpec, kernel: SpectralKernel = DEFAULT_KERNEL,
                 method: str = "adaptive", n_r: int = 256, n_theta: int = 512) -> float:
    """Bound on the off-diagonal part of the level-2 correction.

    ``C₀ |p|³ ∫ V̂(q) sin²θ / ((λ + |p+q|² + m(p) + m(q)) |q|) dq``. In
    polar coordinates around ``q = 0`` the ``1/|q|`` factor cancels the
    Jacobian, leaving a smooth radial integrand.
    """
    if not pmag > 0:
        raise ValueError("pmag must be positive")
    if method == "tensor":
        inner = _h2_tensor(pmag, lam, dyn, kernel, True, n_r, n_theta)
    else:
        inner = adaptive(lambda r: float(_h2_integrand(r, pmag, lam, dyn, kernel, 0)), 0.0, 1.0,
                         epsabs=0.0, epsrel=1e-11).value
    return C0 * pmag ** 3 * inner


def bracket(lam: float, dyn: DynamicsSpec, kernel: SpectralKernel = DEFAULT_KERNEL) -> BracketResult:
    """Level-1 upper and level-2 lower bracket of ``D_V(λ)``."""
    if not lam > 0:
        raise ValueError("lambda must be positive")
    up, up_err = level1_upper(lam, dyn, kernel, with_error=True)

    def g(r):
        if r <= 0:
            return 0.0
        v = float(kernel.vhat(r))
        if v == 0.0:
            return 0.0
        den = lam + r * r + float(dyn.rate(r)) + h2_diag(r, lam, dyn, kernel) + h2_off_bound(r, lam, dyn, kernel)
        return r * v / den

    res = adaptive(g, 0.0, 1.0, epsabs=0.0, epsrel=1e-9, points=[1e-3, 1e-2, 0.1, 0.5])
    scale = 0.5 * C0 * 2.0 * math.pi
    lo, lo_err = scale * res.value, scale * res.error
    dv = 4.0 / lam ** 2
    return BracketResult(lam, dv * lo, dv * up, dv * lo_err, dv * up_err, lo, up)


# ------------------------------------------------------------- envelope

@dataclass(frozen=True)
class Envelope:
    lam: float
    L0: float
    k: int
    z: float
    f: float
    upper_env: float
    lower_env: float


def level_choice(L0: float) -> int:
    """``k = ⌊log L / 2⌋`` (never negative).

    A relative tolerance of a few ulps keeps exact integer boundaries
    such as ``L = e⁸`` from rounding down.
    """
    return max(int(math.floor(math.log(L0) / 2.0 * (1 + 4e-16) + 1e-15)), 0)


def envelope_at_L(L0: float, params: BoundParams = BoundParams(), lam: float = float("nan")) -> Envelope:
    """Envelope shape functions expressed through ``L0 = L(λ, 0)``.

    Allows evaluation deep in the asymptotic regime where ``λ`` itself
    underflows double precision.
    """
    if not L0 > 0:
        raise ValueError("L0 must be positive")
    k = level_choice(L0)
    z = z_k(2 * k + 1, 1, params)
    f = f_k(2 * k + 1, 1, params)
    Lz = L0 + z
    lbv = lb_of_L(k, Lz)
    upper = f * Lz / lbv
    lower = max((lbv - f) / f, 0.0)
    return Envelope(lam, L0, k, z, f, upper, lower)


def envelope_shapes(lam: float, params: BoundParams = BoundParams()) -> Envelope:
    """Upper and lower envelope shapes at ``λ`` with level ``k(λ)``."""
    if not 0 < lam < 1:
        raise ValueError("lambda must lie in (0, 1)")
    return envelope_at_L(math.log1p(1.0 / lam), params, lam)


def poisson_clt_constant(lam: float) -> float:
    """``√L(λ,0) / lb(k(λ), λ, 0)``: the constant in ``1/lb <= C/√L``."""
    L0 = math.log1p(1.0 / lam)
    return math.sqrt(L0) / lb_of_L(level_choice(L0), L0)


# ------------------------------------------------------ log-modified case

def gamma_level1(lam: float, gamma: float) -> float:
    """``∫_0^1 r dr / (λ + r² + r² log(e + r^-2)^γ)``.

    At ``λ = 0`` the integral converges only for ``γ > 1``; it is then
    computed on the half-line in ``u = log r``.
    """
    if gamma < 0:
        raise ValueError("gamma must be nonnegative")
    if lam == 0:
        if gamma <= 1:
            raise ValueError("the lambda = 0 integral diverges for gamma <= 1")
        # r dr / (r² (1 + ℓ^γ)) = du / (1 + ℓ^γ) with u = log r, ℓ = log(e + r^-2)
        ell = lambda u: -2.0 * u + math.log1p(math.exp(1.0 + 2.0 * u))
        return adaptive(lambda u: 1.0 / (1.0 + ell(u) ** gamma), -math.inf, 0.0,
                        epsabs=1e-12, epsrel=1e-10).value
    if not lam > 0:
        raise ValueError("lambda must be nonnegative")

    def g(r):
        r2 = r * r
        return r / (lam + r2 + r2 * math.log(math.e + 1.0 / r2) ** gamma) if r2 > 0 else 0.0

    return _radial_integral(g, lam).value


def gamma_primitive(x, gamma: float):
    """``log(e + 1/x)^(1-γ)``; its derivative is ``-(1-γ) / ((e x² + x) log(e + 1/x)^γ)``."""
    if gamma == 1:
        raise ValueError("gamma = 1 has a log-log primitive")
    x = np.asarray(x, dtype=float)
    out = np.log(np.e + 1.0 / x) ** (1.0 - gamma)
    return out if out.ndim else float(out)


def fit_log_exponent(lams, values):
    """Least-squares slope of ``log v`` against ``log|log λ|``.

    Returns
    -------
    slope, stderr : float
    """
    lams = np.asarray(lams, dtype=float)
    values = np.asarray(values, dtype=float)
    if lams.size < 3:
        raise ValueError("need at least three points")
    res = stats.linregress(np.log(np.abs(np.log(lams))), np.log(values))
    return float(res.slope), float(res.stderr)


def fit_loglog_slope(xs, ys):
    """Least-squares slope of ``log y`` against ``log x``."""
    res = stats.linregress(np.log(np.asarray(xs, float)), np.log(np.asarray(ys, float)))
    return float(res.slope), float(res.stderr)
