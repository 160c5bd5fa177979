"""Run configuration: TOML file with fixed sections and strict keys."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

import numpy as np

from .kernel import DynamicsSpec, SpectralKernel
from .particle_sim import SimParams
from .resolvent_bounds import BoundParams

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    pass


@dataclass
class PhysicsConfig:
    family: str = "power"
    s: float = 1.0
    gamma: float = 1.0
    bump_profile: str = "bump"


@dataclass
class DiscretizationConfig:
    dt: float = 0.01
    horizon: float = 10.0
    checkpoint_spacing: float = 0.1
    checkpoints: list = field(default_factory=list)


@dataclass
class EnsembleConfig:
    n_replicas: int = 256
    n_modes: int = 64
    fresh_wavevectors: bool = True
    frozen_environment: bool = False
    infrared_cutoff: float = 1e-6


@dataclass
class BoundsConfig:
    lambdas: list = field(default_factory=lambda: [0.5, 0.1])
    eps: float = 0.5
    K1: float = 4.0
    K2: float = 4.0
    envelope_lambdas: list = field(default_factory=lambda: [1e-12, 1e-8, 1e-4, 1e-2])
    gammas: list = field(default_factory=lambda: [0.5, 0.75, 1.0, 1.5])
    gamma_lambdas: list = field(default_factory=lambda: [1e-12, 1e-10, 1e-8, 1e-6, 1e-4])


@dataclass
class VerifyConfig:
    seed: int = 7
    n_random: int = 100
    n_derivative: int = 1000
    include_constant_scans: bool = True


@dataclass
class CovarianceConfig:
    n_modes: int = 256
    n_realizations: int = 2000
    times: list = field(default_factory=lambda: [0.0, 0.5])
    points: list = field(default_factory=lambda: [[0.0, 0.0], [1.0, 0.0]])
    t_stationary: float = 5.0
    threshold: float = 3.0


@dataclass
class IoConfig:
    out_dir: str = "curldrift-out"


@dataclass
class RunConfig:
    schema_version: int = SCHEMA_VERSION
    master_seed: int = 0
    physics: PhysicsConfig = field(default_factory=PhysicsConfig)
    discretization: DiscretizationConfig = field(default_factory=DiscretizationConfig)
    ensemble: EnsembleConfig = field(default_factory=EnsembleConfig)
    bounds: BoundsConfig = field(default_factory=BoundsConfig)
    verify: VerifyConfig = field(default_factory=VerifyConfig)
    covariance: CovarianceConfig = field(default_factory=CovarianceConfig)
    io: IoConfig = field(default_factory=IoConfig)

    # ------------------------------------------------------------ views
    def dynamics(self) -> DynamicsSpec:
        p = self.physics
        if p.family == "power":
            return DynamicsSpec.power(p.s)
        return DynamicsSpec.log_modified(p.gamma)

    def kernel(self) -> SpectralKernel:
        return SpectralKernel(self.physics.bump_profile)

    def bound_params(self) -> BoundParams:
        b = self.bounds
        return BoundParams(b.eps, b.K1, b.K2)

    def checkpoint_times(self) -> tuple:
        d = self.discretization
        if d.checkpoints:
            return tuple(float(t) for t in d.checkpoints)
        n = int(round(d.horizon / d.checkpoint_spacing))
        return tuple(float(v) for v in np.arange(1, n + 1) * d.checkpoint_spacing)

    def sim_params(self, lambda_grid=()) -> SimParams:
        e = self.ensemble
        return SimParams(dt=self.discretization.dt, horizon=self.discretization.horizon,
                         checkpoint_times=self.checkpoint_times(), n_replicas=e.n_replicas, n_modes=e.n_modes,
                         dyn=self.dynamics(), master_seed=self.master_seed, kernel=self.kernel(),
                         fresh_wavevectors=e.fresh_wavevectors, frozen_environment=e.frozen_environment,
                         eps=e.infrared_cutoff, lambda_grid=tuple(lambda_grid))

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


_SECTION_TYPES = {"physics": PhysicsConfig, "discretization": DiscretizationConfig, "ensemble": EnsembleConfig,
                  "bounds": BoundsConfig, "verify": VerifyConfig, "covariance": CovarianceConfig, "io": IoConfig}


def _coerce(where: str, value, default):
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"{where}: expected a boolean")
        return value
    if isinstance(default, int):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{where}: expected an integer")
        return value
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{where}: expected a number")
        return float(value)
    if isinstance(default, str):
        if not isinstance(value, str):
            raise ConfigError(f"{where}: expected a string")
        return value
    if isinstance(default, list):
        if not isinstance(value, list):
            raise ConfigError(f"{where}: expected an array")
        return value
    return value


def from_dict(data: dict) -> RunConfig:
    """Build and validate a configuration; unknown keys are rejected by name."""
    cfg = RunConfig()
    for key, value in data.items():
        if key in ("schema_version", "master_seed"):
            setattr(cfg, key, _coerce(key, value, getattr(cfg, key)))
            continue
        if key not in _SECTION_TYPES:
            raise ConfigError(f"unknown key '{key}'")
        if not isinstance(value, dict):
            raise ConfigError(f"'{key}' must be a section")
        section = getattr(cfg, key)
        names = {f.name for f in dataclasses.fields(section)}
        for sub, v in value.items():
            if sub not in names:
                raise ConfigError(f"unknown key '{key}.{sub}'")
            setattr(section, sub, _coerce(f"{key}.{sub}", v, getattr(section, sub)))
    validate(cfg)
    return cfg


def _positive(where, v):
    if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
        raise ConfigError(f"{where} must be a positive finite number")


def validate(cfg: RunConfig) -> None:
    if cfg.schema_version != SCHEMA_VERSION:
        raise ConfigError(f"schema_version: unsupported value {cfg.schema_version} (expected {SCHEMA_VERSION})")
    if not 0 <= cfg.master_seed < 2**64:
        raise ConfigError("master_seed must be a 64-bit unsigned integer")
    p = cfg.physics
    if p.family not in ("power", "log_modified"):
        raise ConfigError("physics.family must be 'power' or 'log_modified'")
    if p.s < 0:
        raise ConfigError("physics.s must be >= 0")
    _positive("physics.gamma", p.gamma)
    if p.bump_profile not in ("bump", "indicator", "zero"):
        raise ConfigError("physics.bump_profile must be 'bump', 'indicator' or 'zero'")
    d = cfg.discretization
    _positive("discretization.dt", d.dt)
    _positive("discretization.horizon", d.horizon)
    _positive("discretization.checkpoint_spacing", d.checkpoint_spacing)
    e = cfg.ensemble
    if e.n_replicas < 2:
        raise ConfigError("ensemble.n_replicas must be >= 2")
    if e.n_modes < 0:
        raise ConfigError("ensemble.n_modes must be >= 0")
    _positive("ensemble.infrared_cutoff", e.infrared_cutoff)
    b = cfg.bounds
    for lam in b.lambdas:
        _positive("bounds.lambdas", lam)
    for lam in b.envelope_lambdas + b.gamma_lambdas:
        if not 0 < lam < 1:
            raise ConfigError("bounds envelope/gamma lambdas must lie in (0, 1)")
    for g in b.gammas:
        _positive("bounds.gammas", g)
    _positive("bounds.eps", b.eps)
    if b.K1 < 1 or b.K2 < 1:
        raise ConfigError("bounds.K1 and bounds.K2 must be >= 1")
    v = cfg.verify
    if v.n_random < 1 or v.n_derivative < 1:
        raise ConfigError("verify sample counts must be >= 1")
    c = cfg.covariance
    if c.n_modes < 1 or c.n_realizations < 2:
        raise ConfigError("covariance.n_modes >= 1 and covariance.n_realizations >= 2 required")
    if any(t < 0 for t in c.times):
        raise ConfigError("covariance.times must be >= 0")
    if any(not (isinstance(pt, list) and len(pt) == 2) for pt in c.points):
        raise ConfigError("covariance.points must be a list of 2-element arrays")
    try:
        cfg.sim_params()
    except ValueError as exc:
        raise ConfigError(f"discretization: {exc}") from None


def load(path) -> RunConfig:
    path = Path(path)
    try:
        with path.open("rb") as fh:
            data = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from None
    return from_dict(data)
