"""Quadrature side: resolvent bracket, level-1 dichotomy and the
log-modified case.

Everything here is deterministic and cheap; lambda can go to 1e-12.
"""

import numpy as np

from curldrift.kernel import DynamicsSpec
from curldrift.resolvent_bounds import (bracket, envelope_shapes, fit_log_exponent, gamma_level1,
                                        simplified_level1)

s1, shalf = DynamicsSpec.power(1.0), DynamicsSpec.power(0.5)

# %% bracket of D_V(lambda) for the heat dynamics
print(f"{'lambda':>8} {'lower':>12} {'upper':>12}")
for lam in (1.0, 0.5, 0.1, 0.01):
    br = bracket(lam, s1)
    print(f"{lam:8.3g} {br.lower:12.6g} {br.upper:12.6g}")

# %% level-1 integral: logarithmic for s = 1, bounded for s = 1/2
print(f"\n{'lambda':>8} {'s=1 / log(1+1/l)':>18} {'s=1/2':>10}")
for lam in np.logspace(-12, -2, 6):
    print(f"{lam:8.1e} {simplified_level1(lam, s1) / np.log1p(1 / lam):18.5f} "
          f"{simplified_level1(lam, shalf):10.5f}")

# %% log-modified multiplier: growth in |log lambda|
lams = np.logspace(-12, -4, 17)
for g in (0.5, 0.75, 1.0, 1.5):
    vals = [gamma_level1(l, g) for l in lams]
    slope, se = fit_log_exponent(lams, vals)
    print(f"gamma={g:4}: fitted exponent {slope:.3f} +- {se:.3f}, value at 1e-12 {vals[0]:.4f}")

# %% envelope shapes and the level k(lambda)
for lam in (1e-4, 1e-8, 1e-12):
    e = envelope_shapes(lam)
    print(f"lambda={lam:.0e}: L={e.L0:.2f} k={e.k} upper={e.upper_env:.4g} lower={e.lower_env:.4g}")
