"""A small particle ensemble.

Runs 512 replicas up to T = 20 and prints D(t), the Brownian/drift
cross-covariance and the Laplace transform next to the bracket at
lambda = 0.5. About a minute on one core; the acceptance suite runs the
same code at 10^4 replicas.
"""

import numpy as np

from curldrift.kernel import DynamicsSpec
from curldrift.particle_sim import SimParams, ensemble_runner
from curldrift.resolvent_bounds import bracket

dyn = DynamicsSpec.power(1.0)
times = tuple(np.round(np.arange(1, 201) * 0.1, 10))
params = SimParams(dt=0.01, horizon=20.0, checkpoint_times=times, n_replicas=512, n_modes=32, dyn=dyn,
                   master_seed=2024, lambda_grid=(0.5,))
curve, lap, diag = ensemble_runner(params)
print(f"valid replicas: {diag.n_valid}/{diag.n_replicas}")

print(f"\n{'t':>6} {'D(t)':>10} {'se':>8} {'cross/se':>9}")
for i in (9, 49, 99, 199):
    print(f"{curve.times[i]:6.1f} {curve.d_of_t[i]:10.4f} {curve.d_stderr[i]:8.4f} "
          f"{curve.cross[i] / curve.cross_stderr[i]:9.2f}")

br = bracket(0.5, dyn)
print(f"\nD_V(0.5): Monte Carlo {lap.d_v_direct[0]:.4f} +- {lap.d_v_direct_se[0]:.4f}, "
      f"bracket [{br.lower:.4f}, {br.upper:.4f}]")
print(f"D_T(0.5) - 4/lambda^2 from the full MSD: {lap.d_v[0]:.3f} +- {lap.d_t_se[0]:.3f} (much noisier)")
