"""Random-Fourier-mode synthesis of the divergence-free drift field.

The field is a finite sum

    ω_t(x) = Σ_j e_j (A_j(t) cos(p_j·x) + B_j(t) sin(p_j·x)),

with wavevectors ``p_j`` drawn i.i.d. from the density proportional to
``V̂``, directions ``e_j = p_j⊥/|p_j|`` and amplitudes that are independent
Ornstein-Uhlenbeck processes of rate ``m(p_j)`` and variance
``v_j = Z_V / ((2π)² n_modes)``. With fresh wavevectors per realization
the two-point function is exact for any number of modes.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import rng as _rng
from .kernel import DEFAULT_KERNEL, FOURIER_PREFACTOR, DynamicsSpec, SpectralKernel

INFRARED_CUTOFF = 1e-6


class SamplingBudgetError(RuntimeError):
    pass


@dataclass(frozen=True)
class ModeSet:
    """Sampled Fourier modes.

    Attributes
    ----------
    radii : ndarray, shape (n,)
        ``|p_j|``.
    unit : ndarray, shape (n, 2)
        ``p_j / |p_j|``.
    directions : ndarray, shape (n, 2)
        ``e_j``, the unit vector ``(u₂, -u₁)`` orthogonal to ``p_j``.
    variance : ndarray, shape (n,)
        Stationary variance ``v_j`` of each amplitude.
    master_seed : int
    """

    radii: np.ndarray
    unit: np.ndarray
    directions: np.ndarray
    variance: np.ndarray
    master_seed: int = 0

    @property
    def n_modes(self) -> int:
        return self.radii.shape[0]

    @property
    def wavevectors(self) -> np.ndarray:
        return self.radii[:, None] * self.unit

    def rates(self, dyn: DynamicsSpec) -> np.ndarray:
        return dyn.rate(self.radii)


@dataclass(frozen=True)
class EnvironmentState:
    modes: ModeSet
    a: np.ndarray
    b: np.ndarray
    time: float = 0.0


def _propose(gen, size):
    u = gen.random((3, size))
    return np.sqrt(u[0]), 2.0 * np.pi * u[1], u[2]


def sample_modes(n_modes: int, kernel: SpectralKernel = DEFAULT_KERNEL, seed=0, *, replica_id: int = 0,
                 eps: float = INFRARED_CUTOFF, max_proposals: int | None = None) -> ModeSet:
    """Draw ``n_modes`` wavevectors from the density proportional to ``V̂``.

    Rejection sampling against the uniform law on the unit disk, with
    the ball ``|p| <= eps`` removed. ``seed`` is either a master seed
    (the modes stream of ``replica_id`` is used) or a generator.

    Raises
    ------
    SamplingBudgetError
        If more than ``max_proposals`` proposals are needed (default
        ``10**4 * n_modes + 10**6``).
    """
    if n_modes < 0:
        raise ValueError("n_modes must be nonnegative")
    gen = _rng.as_generator(seed, replica_id, _rng.MODES)
    zv = kernel.total_mass
    if max_proposals is None:
        max_proposals = 10_000 * n_modes + 1_000_000
    radii = np.empty(n_modes)
    angles = np.empty(n_modes)
    filled = 0
    used = 0
    if zv == 0.0:
        # degenerate kernel: no spectral mass, placement is irrelevant
        r, phi, _ = _propose(gen, n_modes)
        radii[:], angles[:] = np.maximum(r, 2 * eps), phi
        filled = n_modes
    # acceptance probability is Z_V / π for the disk proposal
    accept_rate = max(zv / np.pi, 1e-3)
    while filled < n_modes:
        batch = int(np.ceil(1.1 * (n_modes - filled) / accept_rate)) + 16
        if used + batch > max_proposals:
            batch = max_proposals - used
            if batch <= 0:
                raise SamplingBudgetError(
                    f"rejection sampling exhausted {max_proposals} proposals with {filled}/{n_modes} modes accepted")
        used += batch
        r, phi, u = _propose(gen, batch)
        ok = (u < kernel.vhat(r)) & (r > eps)
        take = min(int(ok.sum()), n_modes - filled)
        radii[filled:filled + take] = r[ok][:take]
        angles[filled:filled + take] = phi[ok][:take]
        filled += take
    c, s = np.cos(angles), np.sin(angles)
    unit = np.stack([c, s], axis=1)
    directions = np.stack([s, -c], axis=1)
    v = zv * FOURIER_PREFACTOR / n_modes if n_modes else 0.0
    master = seed if not isinstance(seed, np.random.Generator) else -1
    return ModeSet(radii, unit, directions, np.full(n_modes, v), int(master))


def init_stationary(modes: ModeSet, seed=0, *, replica_id: int = 0) -> EnvironmentState:
    """Draw amplitudes from the stationary law ``N(0, v_j)``."""
    gen = _rng.as_generator(seed, replica_id, _rng.INIT)
    xi = gen.standard_normal((2, modes.n_modes))
    sd = np.sqrt(modes.variance)
    return EnvironmentState(modes, sd * xi[0], sd * xi[1], 0.0)


def ou_coefficients(rates: np.ndarray, variance: np.ndarray, dt: float):
    """Decay factor and innovation standard deviation of one exact OU step."""
    decay = np.exp(-rates * dt)
    sd = np.sqrt(variance * -np.expm1(-2.0 * rates * dt))
    return decay, sd


def advance(state: EnvironmentState, dt: float, gen: np.random.Generator, dyn: DynamicsSpec) -> EnvironmentState:
    """Exact-in-law Ornstein-Uhlenbeck update of every amplitude over ``dt``."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    decay, sd = ou_coefficients(state.modes.rates(dyn), state.modes.variance, dt)
    xi = gen.standard_normal((2, state.modes.n_modes))
    return replace(state, a=decay * state.a + sd * xi[0], b=decay * state.b + sd * xi[1],
                   time=state.time + dt)


def eval_field(state: EnvironmentState, x) -> np.ndarray:
    """``ω_t(x)`` at one point (shape ``(2,)``) or many (shape ``(k, 2)``)."""
    x = np.asarray(x, dtype=float)
    phase = x @ state.modes.wavevectors.T
    coef = state.a * np.cos(phase) + state.b * np.sin(phase)
    return coef @ state.modes.directions


def eval_divergence(state: EnvironmentState, x, method: str = "analytic", h: float = 1e-4):
    """Divergence of the field at ``x``.

    ``"analytic"`` sums ``(e_j·p_j)(B_j cos - A_j sin)`` with
    ``e_j·p_j = r_j (e_j·u_j)``, which vanishes exactly in floating point.
    ``"finite_difference"`` uses centered differences of step ``h``.
    """
    x = np.asarray(x, dtype=float)
    m = state.modes
    if method == "analytic":
        e_dot_u = m.directions[:, 0] * m.unit[:, 0] + m.directions[:, 1] * m.unit[:, 1]
        phase = x @ m.wavevectors.T
        return (state.b * np.cos(phase) - state.a * np.sin(phase)) @ (m.radii * e_dot_u)
    if method == "finite_difference":
        if not h > 0:
            raise ValueError("h must be positive")
        ex = np.array([h, 0.0])
        ey = np.array([0.0, h])
        d1 = eval_field(state, x + ex)[..., 0] - eval_field(state, x - ex)[..., 0]
        d2 = eval_field(state, x + ey)[..., 1] - eval_field(state, x - ey)[..., 1]
        return (d1 + d2) / (2.0 * h)
    raise ValueError(f"unknown method {method!r}")
