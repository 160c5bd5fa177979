"""Simulation and numerical bounds for a Brownian particle advected by the
curl of a (fractional or log-modified) stochastic heat equation."""

__version__ = "0.1.0"

from .kernel import (DEFAULT_KERNEL, DynamicsSpec, SpectralKernel, covariance_quadrature, dynamics_rate,
                     mollifier_hat, spectral_density)
from .particle_sim import (LaplaceEstimate, MsdCurve, SimParams, ensemble_runner, estimate_laplace,
                           estimate_msd, simulate_replica, yaglom_cross_stat)
from .resolvent_bounds import (BoundParams, BracketResult, L, bracket, c_seq, envelope_shapes, f_k,
                               fit_log_exponent, gamma_level1, gamma_primitive, h2_diag, h2_off_bound, lb,
                               level1_upper, simplified_level1, ub, z_k)
from .spectral_field import (EnvironmentState, ModeSet, advance, eval_divergence, eval_field, init_stationary,
                             sample_modes)

__all__ = [name for name in dir() if not name.startswith("_")]
