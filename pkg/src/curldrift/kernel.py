"""Mollifier, dynamics multipliers and the spectral covariance of the drift.

The drift is the curl of a mollified scalar field. In Fourier space its
stationary covariance density is

    S(p) = (2π)^-2 V̂(p) (p⊥ ⊗ p⊥) / |p|²,   p⊥ = (p₂, -p₁),

and each Fourier component relaxes at rate ``m(p)``. The space-time
covariance is ``R(t, x) = ∫ cos(p·x) exp(-m(p) t) S(p) dp``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate

from .quadrature import QuadratureError, adaptive, gauss_legendre_panels, periodic_nodes

FOURIER_PREFACTOR = 1.0 / (2.0 * np.pi) ** 2

_PROFILES = ("bump", "indicator", "zero")


@dataclass(frozen=True)
class SpectralKernel:
    """Radial mollifier transform ``V̂ = Û²`` supported in the unit disk.

    Parameters
    ----------
    bump_profile : {"bump", "indicator", "zero"}
        ``"bump"`` is ``Û(r) = exp(1 - 1/(1 - r²))``; ``"indicator"`` is the
        unit-disk indicator (used to probe constant-only dependence);
        ``"zero"`` is a degenerate kernel with no spectral mass.
    cutoff_radius : float
        Support radius, fixed to 1.
    """

    bump_profile: str = "bump"
    cutoff_radius: float = 1.0

    def __post_init__(self):
        if self.bump_profile not in _PROFILES:
            raise ValueError(f"unknown bump_profile {self.bump_profile!r}; expected one of {_PROFILES}")
        if self.cutoff_radius != 1.0:
            raise ValueError("cutoff_radius is fixed to 1")

    def u_hat(self, r):
        r = np.asarray(r, dtype=float)
        if self.bump_profile == "indicator":
            return np.where(r < 1.0, 1.0, 0.0)
        if self.bump_profile == "zero":
            return np.zeros_like(r)
        inside = r < 1.0
        rr = np.where(inside, r, 0.0)
        return np.where(inside, np.exp(1.0 - 1.0 / (1.0 - rr * rr)), 0.0)

    def vhat(self, r):
        """``V̂`` as a function of the radius ``|p|`` (vectorized)."""
        u = self.u_hat(r)
        return u * u

    def radial_moment(self, k: float) -> float:
        """``∫ |p|^k V̂(p) dp`` over the plane."""
        return _radial_moment(self.bump_profile, float(k))

    @property
    def total_mass(self) -> float:
        """``Z_V = ∫ V̂(p) dp``."""
        return self.radial_moment(0.0)


DEFAULT_KERNEL = SpectralKernel()


@lru_cache(maxsize=128)
def _radial_moment(profile: str, k: float) -> float:
    kern = SpectralKernel(profile)
    if profile == "zero":
        return 0.0
    res = adaptive(lambda r: r ** (k + 1.0) * float(kern.vhat(r)), 0.0, 1.0, epsabs=1e-15, epsrel=1e-13)
    return 2.0 * np.pi * res.value


@dataclass(frozen=True)
class DynamicsSpec:
    """Fourier multiplier of the environment dynamics.

    ``family="power"`` gives ``m(p) = |p|^{2s}``; ``family="log_modified"``
    gives ``m(p) = |p|² log(e + |p|^-2)^γ``.
    """

    family: str = "power"
    s: float = 1.0
    gamma: float = 1.0

    def __post_init__(self):
        if self.family == "power":
            if not self.s >= 0:
                raise ValueError("power family needs s >= 0")
        elif self.family == "log_modified":
            if not self.gamma > 0:
                raise ValueError("log_modified family needs gamma > 0")
        else:
            raise ValueError(f"unknown dynamics family {self.family!r}")

    @classmethod
    def power(cls, s: float) -> "DynamicsSpec":
        return cls("power", s=float(s))

    @classmethod
    def log_modified(cls, gamma: float) -> "DynamicsSpec":
        return cls("log_modified", gamma=float(gamma))

    def rate(self, r):
        """``m`` as a function of ``|p|``, extended to ``r = 0`` by continuity."""
        r = np.asarray(r, dtype=float)
        if self.family == "power":
            if self.s == 0:
                return np.ones_like(r)
            return r ** (2.0 * self.s)
        r2 = r * r
        safe = np.where(r2 > 0, r2, 1.0)
        val = r2 * np.log(np.e + 1.0 / safe) ** self.gamma
        return np.where(r2 > 0, val, 0.0)

    def label(self) -> str:
        if self.family == "power":
            return f"power(s={self.s:g})"
        return f"log_modified(gamma={self.gamma:g})"


def _norm(p):
    p = np.asarray(p, dtype=float)
    if p.shape[-1] != 2:
        raise ValueError("expected 2-vectors in the last axis")
    return p, np.hypot(p[..., 0], p[..., 1])


def mollifier_hat(p, kernel: SpectralKernel = DEFAULT_KERNEL):
    """``V̂(p)`` for one or many 2-vectors."""
    _, r = _norm(p)
    return kernel.vhat(r)


def dynamics_rate(p, dyn: DynamicsSpec):
    """``m(p)`` for one or many 2-vectors."""
    _, r = _norm(p)
    return dyn.rate(r)


def spectral_density(p, kernel: SpectralKernel = DEFAULT_KERNEL):
    """Stationary spectral density matrix ``S(p)`` (shape ``(..., 2, 2)``)."""
    p, r = _norm(p)
    if np.any(r == 0):
        raise ValueError("spectral density is undefined at p = 0")
    perp = np.stack([p[..., 1], -p[..., 0]], axis=-1)
    scale = FOURIER_PREFACTOR * kernel.vhat(r) / (r * r)
    return scale[..., None, None] * perp[..., :, None] * perp[..., None, :]


@dataclass(frozen=True)
class CovarianceResult:
    matrix: np.ndarray
    error: float


def _angular_rule(xnorm: float, n_theta: int | None):
    if n_theta is None:
        n_theta = 64 + 2 * int(np.ceil(xnorm))
    return periodic_nodes(n_theta)


def _angular_integrals(r, t, x, dyn, kernel, theta, wtheta):
    """Angle-integrated covariance entries (R11, R22, R12) times r, at radii ``r``."""
    r = np.atleast_1d(r)
    c, s = np.cos(theta), np.sin(theta)
    phase = np.cos(r[:, None] * (c[None, :] * x[0] + s[None, :] * x[1]))
    radial = FOURIER_PREFACTOR * r * kernel.vhat(r) * np.exp(-dyn.rate(r) * t)
    w = phase * wtheta[None, :]
    r11 = w @ (s * s)
    r22 = w @ (c * c)
    r12 = -(w @ (s * c))
    return radial[:, None] * np.stack([r11, r22, r12], axis=-1)


def covariance_quadrature(t: float, x, dyn: DynamicsSpec, kernel: SpectralKernel = DEFAULT_KERNEL,
                          tol: float = 1e-10, method: str = "adaptive", n_theta: int | None = None,
                          n_panels: int = 32, order: int = 16) -> CovarianceResult:
    """Space-time covariance ``R(t, x)`` of the drift field.

    Polar quadrature: a fixed periodic trapezoid rule in the angle and,
    in the radius, either adaptive Gauss-Kronrod (``method="adaptive"``)
    or a composite Gauss-Legendre tensor grid (``method="tensor"``).

    Raises
    ------
    QuadratureError
        If the adaptive radial integral misses ``tol``.
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    x = np.asarray(x, dtype=float).reshape(2)
    theta, wtheta = _angular_rule(float(np.hypot(*x)), n_theta)
    if method == "adaptive":
        f = lambda r: _angular_integrals(r, t, x, dyn, kernel, theta, wtheta)[0]
        val, err = integrate.quad_vec(f, 0.0, 1.0, epsabs=tol, epsrel=0.0, limit=2000)
        if not np.all(np.isfinite(val)) or err > 10 * tol:
            raise QuadratureError("covariance quadrature did not converge", float(err))
        r11, r22, r12 = val
    elif method == "tensor":
        nodes, weights = gauss_legendre_panels(np.linspace(0.0, 1.0, n_panels + 1), order)
        r11, r22, r12 = weights @ _angular_integrals(nodes, t, x, dyn, kernel, theta, wtheta)
        err = float("nan")
    else:
        raise ValueError(f"unknown method {method!r}")
    mat = np.array([[r11, r12], [r12, r22]])
    return CovarianceResult(mat, float(err))
