"""Monte Carlo simulation of a Brownian particle in the synthesized drift.

The particle follows ``dX = ω_t(X) dt + √2 dB`` discretized by
Euler-Maruyama with the field frozen over each step; the environment
moves by exact OU steps. Replicas run in fixed-size chunks; chunk
statistics are merged in chunk order, so results do not depend on the
number of worker threads.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numba
import numpy as np

from . import rng as _rng
from .kernel import DEFAULT_KERNEL, DynamicsSpec, SpectralKernel
from .quadrature import adaptive
from .spectral_field import INFRARED_CUTOFF, init_stationary, ou_coefficients, sample_modes

CHUNK_SIZE = 32
INVALID_FRACTION_LIMIT = 1e-3
_NOISE_BLOCK = 1 << 18  # normals per environment noise block


class ReplicaFailureError(RuntimeError):
    def __init__(self, n_invalid: int, n_total: int):
        super().__init__(f"{n_invalid} of {n_total} replicas produced non-finite states")
        self.n_invalid = n_invalid
        self.n_total = n_total


def default_threads() -> int:
    env = os.environ.get("CURLDRIFT_THREADS")
    if env:
        return max(int(env), 1)
    return os.cpu_count() or 1


@dataclass(frozen=True)
class SimParams:
    """Discretization and ensemble description.

    ``checkpoint_times`` must be positive multiples of ``dt`` not beyond
    ``horizon``. ``lambda_grid`` (optional) requests per-replica Laplace
    transforms, which give exact standard errors for ``D_T`` and ``D_V``.
    """

    dt: float
    horizon: float
    checkpoint_times: tuple
    n_replicas: int
    n_modes: int
    dyn: DynamicsSpec = DynamicsSpec.power(1.0)
    master_seed: int = 0
    kernel: SpectralKernel = DEFAULT_KERNEL
    fresh_wavevectors: bool = True
    frozen_environment: bool = False
    eps: float = INFRARED_CUTOFF
    lambda_grid: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "checkpoint_times", tuple(float(t) for t in self.checkpoint_times))
        object.__setattr__(self, "lambda_grid", tuple(float(l) for l in self.lambda_grid))
        self.validate()

    def validate(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not self.horizon > 0:
            raise ValueError("horizon must be positive")
        if len(self.checkpoint_times) == 0:
            raise ValueError("checkpoint_times must be non-empty")
        ts = np.asarray(self.checkpoint_times)
        if np.any(ts <= 0) or np.any(np.diff(ts) <= 0):
            raise ValueError("checkpoint_times must be positive and strictly increasing")
        if ts[-1] > self.horizon * (1 + 1e-12):
            raise ValueError("checkpoint beyond horizon")
        steps = ts / self.dt
        if np.any(np.abs(steps - np.rint(steps)) > 1e-6 * np.maximum(steps, 1.0)):
            raise ValueError("checkpoint_times must be multiples of dt")
        spacing = np.diff(np.concatenate([[0.0], ts]))
        if self.dt > spacing.min() * (1 + 1e-9):
            raise ValueError("dt must not exceed the checkpoint spacing")
        if self.n_replicas < 1 or self.n_modes < 0:
            raise ValueError("need n_replicas >= 1 and n_modes >= 0")
        if any(l <= 0 for l in self.lambda_grid):
            raise ValueError("lambda values must be positive")

    @property
    def checkpoint_steps(self) -> np.ndarray:
        return np.rint(np.asarray(self.checkpoint_times) / self.dt).astype(np.int64)


@dataclass
class ReplicaRecord:
    """Checkpoint values of one replica.

    ``x`` is the position, ``b1`` the first Brownian coordinate and
    ``drift`` the running integral of the field along the path.
    """

    replica_id: int
    times: np.ndarray
    x: np.ndarray
    b1: np.ndarray
    drift: np.ndarray
    valid: bool


@numba.njit(nogil=True, cache=True, fastmath=False)
def _advance_block(px, py, ex, ey, decay, sd, a, b, state, env_noise, bm_noise, n_steps, step0,
                   ck_steps, ck_pos, out_x, out_b1, out_drift, dt, frozen):
    """Run ``n_steps`` Euler steps; returns the next checkpoint index or -1 on overflow."""
    n = px.shape[0]
    sq2dt = math.sqrt(2.0 * dt)
    sqdt = math.sqrt(dt)
    x, y, b1, d1, d2 = state[0], state[1], state[2], state[3], state[4]
    ci = ck_pos
    for k in range(n_steps):
        wx = 0.0
        wy = 0.0
        for j in range(n):
            ph = px[j] * x + py[j] * y
            coef = a[j] * math.cos(ph) + b[j] * math.sin(ph)
            wx += ex[j] * coef
            wy += ey[j] * coef
            if not frozen:
                a[j] = decay[j] * a[j] + sd[j] * env_noise[k, 0, j]
                b[j] = decay[j] * b[j] + sd[j] * env_noise[k, 1, j]
        xi1 = bm_noise[k, 0]
        xi2 = bm_noise[k, 1]
        x += wx * dt + sq2dt * xi1
        y += wy * dt + sq2dt * xi2
        b1 += sqdt * xi1
        d1 += wx * dt
        d2 += wy * dt
        if not (math.isfinite(x) and math.isfinite(y)):
            return -1
        step = step0 + k + 1
        while ci < ck_steps.shape[0] and ck_steps[ci] == step:
            out_x[ci, 0] = x
            out_x[ci, 1] = y
            out_b1[ci] = b1
            out_drift[ci, 0] = d1
            out_drift[ci, 1] = d2
            ci += 1
    state[0], state[1], state[2], state[3], state[4] = x, y, b1, d1, d2
    return ci


def _replica_modes(params: SimParams, replica_id: int):
    mode_replica = replica_id if params.fresh_wavevectors else 0
    return sample_modes(params.n_modes, params.kernel, params.master_seed, replica_id=mode_replica, eps=params.eps)


def simulate_replica(params: SimParams, replica_id: int) -> ReplicaRecord:
    """Simulate one replica from ``X₀ = 0`` up to the last checkpoint."""
    modes = _replica_modes(params, replica_id)
    env = init_stationary(modes, params.master_seed, replica_id=replica_id)
    decay, sd = ou_coefficients(modes.rates(params.dyn), modes.variance, params.dt)
    p = modes.wavevectors
    px, py = np.ascontiguousarray(p[:, 0]), np.ascontiguousarray(p[:, 1])
    ex, ey = np.ascontiguousarray(modes.directions[:, 0]), np.ascontiguousarray(modes.directions[:, 1])
    a, b = env.a.copy(), env.b.copy()
    ck = params.checkpoint_steps
    nc = ck.shape[0]
    out_x = np.full((nc, 2), np.nan)
    out_b1 = np.full(nc, np.nan)
    out_drift = np.full((nc, 2), np.nan)
    state = np.zeros(5)
    g_env = _rng.stream(params.master_seed, replica_id, _rng.ENV_NOISE)
    g_bm = _rng.stream(params.master_seed, replica_id, _rng.BROWNIAN)
    total = int(ck[-1])
    block = max(1, min(total, _NOISE_BLOCK // max(2 * params.n_modes, 1)))
    frozen = params.frozen_environment or params.n_modes == 0
    empty_env = np.zeros((block, 2, 0))
    step, ci, valid = 0, 0, True
    while step < total:
        m = min(block, total - step)
        bm = g_bm.standard_normal((m, 2))
        envn = empty_env[:m] if frozen else g_env.standard_normal((m, 2, params.n_modes))
        ci = _advance_block(px, py, ex, ey, decay, sd, a, b, state, envn, bm, m, step, ck, ci,
                            out_x, out_b1, out_drift, params.dt, frozen)
        if ci < 0:
            valid = False
            break
        step += m
    return ReplicaRecord(replica_id, np.asarray(params.checkpoint_times), out_x, out_b1, out_drift, valid)


# ----------------------------------------------------------- statistics

@dataclass
class Moments:
    """Streaming count, mean and centred second moments of a vector
    quantity, with co-moments for selected index pairs."""

    n: int
    mean: np.ndarray
    m2: np.ndarray
    pairs: np.ndarray
    comoment: np.ndarray

    @classmethod
    def from_samples(cls, q: np.ndarray, pairs: np.ndarray) -> "Moments":
        n = q.shape[0]
        if n == 0:
            return cls(0, np.zeros(q.shape[1]), np.zeros(q.shape[1]), pairs, np.zeros(len(pairs)))
        mean = q.mean(axis=0)
        dev = q - mean
        m2 = np.einsum("ij,ij->j", dev, dev)
        co = np.einsum("ij,ij->j", dev[:, pairs[:, 0]], dev[:, pairs[:, 1]]) if len(pairs) else np.zeros(0)
        return cls(n, mean, m2, pairs, co)

    def merge(self, other: "Moments") -> "Moments":
        if other.n == 0:
            return self
        if self.n == 0:
            return other
        n = self.n + other.n
        delta = other.mean - self.mean
        mean = self.mean + delta * (other.n / n)
        f = self.n * other.n / n
        m2 = self.m2 + other.m2 + delta * delta * f
        co = self.comoment + other.comoment + delta[self.pairs[:, 0]] * delta[self.pairs[:, 1]] * f
        return Moments(n, mean, m2, self.pairs, co)

    def variance(self) -> np.ndarray:
        return self.m2 / (self.n - 1)

    def stderr(self) -> np.ndarray:
        return np.sqrt(self.variance() / self.n)

    def covariance(self) -> np.ndarray:
        return self.comoment / (self.n - 1)


class _Layout:
    """Column layout of the per-replica quantity vector."""

    names = ("msd", "x1", "x2", "iso", "b1", "drift1", "drift_sq", "b1_drift1", "b1_sq")

    def __init__(self, nc: int, nl: int):
        self.nc, self.nl = nc, nl
        self.slices = {name: slice(i * nc, (i + 1) * nc) for i, name in enumerate(self.names)}
        base = len(self.names) * nc
        self.slices["lap_msd"] = slice(base, base + nl)
        self.slices["lap_drift"] = slice(base + nl, base + 2 * nl)
        self.width = base + 2 * nl
        b1 = np.arange(self.slices["b1"].start, self.slices["b1"].stop)
        d1 = np.arange(self.slices["drift1"].start, self.slices["drift1"].stop)
        self.pairs = np.stack([np.concatenate([b1, b1]), np.concatenate([d1, b1])], axis=1)


def _trapezoid_weights(times: np.ndarray) -> np.ndarray:
    """Trapezoid weights on ``[0] + times`` restricted to the checkpoint
    nodes (the value at ``t = 0`` is zero for all recorded quantities)."""
    t = np.concatenate([[0.0], times])
    h = np.diff(t)
    w = np.zeros_like(times)
    w += 0.5 * h
    w[:-1] += 0.5 * h[1:]
    return w


def _quantities(records, layout: _Layout, times, lams):
    rows = []
    w = _trapezoid_weights(times)
    kern = np.exp(-np.outer(lams, times)) * w[None, :] if len(lams) else np.zeros((0, len(times)))
    for rec in records:
        x1, x2 = rec.x[:, 0], rec.x[:, 1]
        msd = x1 * x1 + x2 * x2
        dsq = rec.drift[:, 0] ** 2 + rec.drift[:, 1] ** 2
        row = np.concatenate([msd, x1, x2, x1 * x1 - x2 * x2, rec.b1, rec.drift[:, 0], dsq,
                              rec.b1 * rec.drift[:, 0], rec.b1 * rec.b1, kern @ msd, kern @ dsq])
        rows.append(row)
    return np.array(rows).reshape(len(rows), layout.width)


@dataclass
class EnsembleStats:
    times: np.ndarray
    lambda_grid: np.ndarray
    moments: Moments
    n_invalid: int
    layout: _Layout = field(repr=False)

    @property
    def n_valid(self) -> int:
        return self.moments.n

    def mean(self, name):
        return self.moments.mean[self.layout.slices[name]]

    def stderr(self, name):
        return self.moments.stderr()[self.layout.slices[name]]

    def variance(self, name):
        return self.moments.variance()[self.layout.slices[name]]


def ensemble_from_records(records, lambda_grid=()) -> EnsembleStats:
    """Statistics of a list of replica records (invalid ones are excluded and counted)."""
    records = list(records)
    if not records:
        raise ValueError("no replica records")
    times = np.asarray(records[0].times, dtype=float)
    lams = np.asarray(lambda_grid, dtype=float)
    layout = _Layout(len(times), len(lams))
    valid = [r for r in records if r.valid]
    q = _quantities(valid, layout, times, lams)
    return EnsembleStats(times, lams, Moments.from_samples(q, layout.pairs), len(records) - len(valid), layout)


def _merge_stats(parts) -> EnsembleStats:
    parts = list(parts)
    first = parts[0]
    mom = first.moments
    n_invalid = first.n_invalid
    for p in parts[1:]:
        mom = mom.merge(p.moments)
        n_invalid += p.n_invalid
    return EnsembleStats(first.times, first.lambda_grid, mom, n_invalid, first.layout)


@dataclass
class MsdCurve:
    times: np.ndarray
    msd_mean: np.ndarray
    msd_stderr: np.ndarray
    d_of_t: np.ndarray
    d_stderr: np.ndarray
    x_mean: np.ndarray
    x_stderr: np.ndarray
    iso_mean: np.ndarray
    iso_stderr: np.ndarray
    drift_mean: np.ndarray
    drift_var: np.ndarray
    drift_sq_mean: np.ndarray
    drift_sq_stderr: np.ndarray
    cross: np.ndarray
    cross_stderr: np.ndarray
    b1_var: np.ndarray
    n_valid: int
    n_invalid: int


def estimate_msd(ensemble) -> MsdCurve:
    """Ensemble mean-square displacement with standard errors.

    ``ensemble`` is either an :class:`EnsembleStats` or a sequence of
    :class:`ReplicaRecord`.
    """
    ens = ensemble if isinstance(ensemble, EnsembleStats) else ensemble_from_records(ensemble)
    if ens.n_valid == 0:
        raise ReplicaFailureError(ens.n_invalid, ens.n_invalid)
    if ens.n_valid < 2:
        raise ValueError("need at least two valid replicas")
    t = ens.times
    msd = ens.mean("msd")
    se = ens.stderr("msd")
    cross, cross_se = yaglom_cross_stat(ens)
    return MsdCurve(t, msd, se, msd / t, se / t,
                    np.stack([ens.mean("x1"), ens.mean("x2")], 1), np.stack([ens.stderr("x1"), ens.stderr("x2")], 1),
                    ens.mean("iso"), ens.stderr("iso"), ens.mean("drift1"), ens.variance("drift1"),
                    ens.mean("drift_sq"), ens.stderr("drift_sq"), cross, cross_se, ens.variance("b1"),
                    ens.n_valid, ens.n_invalid)


def yaglom_cross_stat(ensemble, self_test: bool = False):
    """Sample ``Cov(B₁(t), ∫₀ᵗ ω¹(X_r) dr)`` and its standard error per checkpoint.

    With ``self_test=True`` the drift integral is replaced by ``B₁``, so
    the result estimates ``Var(B₁(t)) = t``.
    """
    ens = ensemble if isinstance(ensemble, EnsembleStats) else ensemble_from_records(ensemble)
    nc = len(ens.times)
    cov = ens.moments.covariance()
    if self_test:
        est = cov[nc:2 * nc]
        prod = "b1_sq"
    else:
        est = cov[:nc]
        prod = "b1_drift1"
    # the products have mean ≈ cov since both factors are centred in law
    return est, ens.stderr(prod)


@dataclass
class LaplaceEstimate:
    """Laplace transforms of the mean-square displacement.

    ``d_t``: ``∫ e^{-λt} E|X_t|² dt`` on the checkpoint grid;
    ``d_v = d_t - 4/λ²``; ``d_v_direct``: transform of ``E|∫ω(X)dr|²``,
    which equals ``d_v`` in law and has far smaller variance.
    ``tail_bound`` bounds the neglected ``∫_T^∞`` part of ``d_t``.
    """

    lam: np.ndarray
    d_t: np.ndarray
    d_t_se: np.ndarray
    d_v: np.ndarray
    d_v_se: np.ndarray
    tail_bound: np.ndarray
    d_v_direct: np.ndarray | None = None
    d_v_direct_se: np.ndarray | None = None
    d_v_direct_tail: np.ndarray | None = None


def _tail_bound(times, values, lam) -> float:
    """``C ∫_T^∞ e^{-λt} t √log(e+t) dt`` with ``C`` fitted on the last quarter of the curve."""
    q = max(len(times) // 4, 1)
    tt, vv = times[-q:], values[-q:]
    c = float(np.max(np.maximum(vv, 0.0) / (tt * np.sqrt(np.log(np.e + tt)))))
    if c == 0.0:
        return 0.0
    T = float(times[-1])
    g = lambda t: math.exp(-lam * (t - T)) * t * math.sqrt(math.log(math.e + t))
    res = adaptive(g, T, math.inf, epsabs=0.0, epsrel=1e-8)
    return c * math.exp(-lam * T) * res.value


def _check_horizon(times, lams):
    T = float(times[-1])
    lmin = float(np.min(lams))
    if lmin * T < 8.0:
        raise ValueError(f"horizon T = {T:g} too short for lambda = {lmin:g}; "
                         f"need T >= {8.0 / lmin:g} (lambda_min * T >= 8)")


def estimate_laplace(curve: MsdCurve, lam_grid) -> LaplaceEstimate:
    """Trapezoidal Laplace transform of the MSD curve with linear
    (conservative) propagation of the pointwise standard errors."""
    lams = np.atleast_1d(np.asarray(lam_grid, dtype=float))
    if np.any(lams <= 0):
        raise ValueError("lambda must be positive")
    t = np.asarray(curve.times, dtype=float)
    _check_horizon(t, lams)
    w = _trapezoid_weights(t)
    kern = np.exp(-np.outer(lams, t)) * w[None, :]
    d_t = kern @ curve.msd_mean
    se = kern @ curve.msd_stderr
    tail = np.array([_tail_bound(t, curve.msd_mean, l) for l in lams])
    out = LaplaceEstimate(lams, d_t, se, d_t - 4.0 / lams ** 2, se, tail)
    if curve.drift_sq_mean is not None:
        out.d_v_direct = kern @ curve.drift_sq_mean
        out.d_v_direct_se = kern @ curve.drift_sq_stderr
        out.d_v_direct_tail = np.array([_tail_bound(t, curve.drift_sq_mean, l) for l in lams])
    return out


def restrict_curve(curve: MsdCurve, t_max: float) -> MsdCurve:
    """Curve truncated to checkpoints ``t <= t_max``."""
    keep = curve.times <= t_max * (1 + 1e-12)
    vals = {}
    for name, v in curve.__dict__.items():
        if isinstance(v, np.ndarray) and v.shape[:1] == curve.times.shape:
            vals[name] = v[keep]
        else:
            vals[name] = v
    return MsdCurve(**vals)


@dataclass
class Diagnostics:
    n_replicas: int
    n_valid: int
    n_invalid: int
    n_chunks: int
    threads: int


def _run_chunk(params: SimParams, chunk: int, layout: _Layout) -> EnsembleStats:
    lo = chunk * CHUNK_SIZE
    hi = min(lo + CHUNK_SIZE, params.n_replicas)
    recs = [simulate_replica(params, r) for r in range(lo, hi)]
    return ensemble_from_records(recs, params.lambda_grid)


def run_ensemble(params: SimParams, threads: int | None = None) -> tuple[EnsembleStats, Diagnostics]:
    """Simulate all replicas and merge their statistics in replica order."""
    threads = default_threads() if threads is None else max(int(threads), 1)
    n_chunks = -(-params.n_replicas // CHUNK_SIZE)
    layout = _Layout(len(params.checkpoint_times), len(params.lambda_grid))
    if threads == 1:
        parts = [_run_chunk(params, c, layout) for c in range(n_chunks)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda c: _run_chunk(params, c, layout), range(n_chunks)))
    ens = _merge_stats(parts)
    diag = Diagnostics(params.n_replicas, ens.n_valid, ens.n_invalid, n_chunks, threads)
    return ens, diag


def ensemble_runner(params: SimParams, threads: int | None = None):
    """Run the ensemble and summarize it.

    Returns
    -------
    curve : MsdCurve
    laplace : LaplaceEstimate or None
        ``None`` when ``params.lambda_grid`` is empty. Otherwise standard
        errors come from per-replica transforms (exact, not linear bounds).
    diagnostics : Diagnostics

    Raises
    ------
    ReplicaFailureError
        If more than 0.1% of the replicas are invalid.
    """
    ens, diag = run_ensemble(params, threads)
    if ens.n_invalid > INVALID_FRACTION_LIMIT * params.n_replicas or ens.n_valid == 0:
        raise ReplicaFailureError(ens.n_invalid, params.n_replicas)
    curve = estimate_msd(ens)
    lap = None
    if params.lambda_grid:
        lams = np.asarray(params.lambda_grid)
        _check_horizon(curve.times, lams)
        d_t, d_t_se = ens.mean("lap_msd"), ens.stderr("lap_msd")
        d_v, d_v_se = ens.mean("lap_drift"), ens.stderr("lap_drift")
        tail = np.array([_tail_bound(curve.times, curve.msd_mean, l) for l in lams])
        tail_v = np.array([_tail_bound(curve.times, curve.drift_sq_mean, l) for l in lams])
        lap = LaplaceEstimate(lams, d_t, d_t_se, d_t - 4.0 / lams ** 2, d_t_se, tail, d_v, d_v_se, tail_v)
    return curve, lap, diag
