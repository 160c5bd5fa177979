"""Quadrature helpers shared by the covariance, bound and verification modules.

Two families are provided. ``adaptive`` wraps QUADPACK's Gauss-Kronrod
driver and raises instead of warning when the tolerance is missed.
The tensor rules build fixed node sets (composite Gauss-Legendre in the
radius, periodic trapezoid in the angle) for vectorized 2-d integrals.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate


class QuadratureError(RuntimeError):
    """Raised when an integral misses its tolerance.

    Attributes
    ----------
    achieved : float
        Error estimate reached before giving up.
    """

    def __init__(self, message: str, achieved: float):
        super().__init__(f"{message} (achieved error estimate {achieved:.3e})")
        self.achieved = achieved


@dataclass(frozen=True)
class QuadResult:
    value: float
    error: float


def adaptive(f, a: float, b: float, *, epsabs: float = 1e-12, epsrel: float = 1e-10,
             points=None, limit: int = 400) -> QuadResult:
    """Integrate a scalar function on ``[a, b]`` with adaptive Gauss-Kronrod.

    The interval is split at ``points`` (if given) and each piece is
    integrated separately. The call fails with :class:`QuadratureError`
    when the summed error estimate exceeds ``max(epsabs, epsrel*|value|)``
    by more than a factor ten.
    """
    if b == a:
        return QuadResult(0.0, 0.0)
    edges = [a]
    if points is not None:
        edges += sorted(p for p in points if a < p < b)
    edges.append(b)
    total = 0.0
    err = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            val, e = integrate.quad(f, lo, hi, epsabs=epsabs, epsrel=epsrel, limit=limit)
        total += val
        err += e
    if not np.isfinite(total) or err > 10.0 * max(epsabs, epsrel * abs(total)):
        raise QuadratureError(f"adaptive quadrature on [{a}, {b}] did not converge", err)
    return QuadResult(float(total), float(err))


@lru_cache(maxsize=64)
def _gauss_legendre(order: int):
    x, w = np.polynomial.legendre.leggauss(order)
    return x, w


def gauss_legendre_panels(edges, order: int = 16):
    """Nodes and weights of a composite Gauss-Legendre rule.

    Parameters
    ----------
    edges : array_like
        Increasing panel boundaries.
    order : int
        Points per panel.
    """
    edges = np.asarray(edges, dtype=float)
    x, w = _gauss_legendre(order)
    lo = edges[:-1, None]
    half = 0.5 * np.diff(edges)[:, None]
    nodes = lo + half * (x[None, :] + 1.0)
    weights = half * w[None, :]
    return nodes.ravel(), weights.ravel()


def graded_edges(a: float, b: float, focus: float, n_geometric: int = 24, n_uniform: int = 8,
                 ratio: float = 0.5):
    """Panel edges on ``[a, b]`` refined geometrically toward ``focus``.

    Panels shrink by ``ratio`` on each side of ``focus`` until they reach
    a width of ``ratio**n_geometric`` times the interval length; the
    remainder of the interval is covered by ``n_uniform`` panels per side.
    """
    length = b - a
    pts = {a, b}
    focus = min(max(focus, a), b)
    for side_lo, side_hi, sign in ((a, focus, -1.0), (focus, b, 1.0)):
        span = side_hi - side_lo
        if span <= 0:
            continue
        h = span
        for _ in range(n_geometric):
            h *= ratio
            if h < length * 1e-14:
                break
            pts.add(focus + sign * h)
        for t in np.linspace(0.0, 1.0, n_uniform + 1):
            pts.add(side_lo + t * span)
    pts.add(focus)
    return np.array(sorted(pts))


def periodic_nodes(n: int):
    """Equispaced angles on ``[0, 2π)`` with trapezoid weights."""
    theta = 2.0 * np.pi * np.arange(n) / n
    return theta, np.full(n, 2.0 * np.pi / n)
