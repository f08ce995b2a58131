"""The estimator contains the Kalman filter as a special case.

With the L1 weight switched off (lam = 0) and the inertia weight scaled so
that tau * n / p = 1, one sequential step reproduces the Kalman update
exactly. The information-form variant gives the same answer while solving
only p x p systems, which is dramatically faster when p << n.
"""

import time

import numpy as np

from irs import (
    EpochData,
    Hyperparams,
    ModelState,
    NoiseSpec,
    StateTransition,
    innovation_noise_scale,
    irs_step,
    kalman_step,
    kalman_step_fast,
    predict_state,
)

rng = np.random.default_rng(3)

# --- equivalence at modest size ---------------------------------------
n, p = 120, 8
prev = ModelState(rng.standard_normal(p), np.eye(p), 1.0, 0)
X = rng.standard_normal((n, p))
y = X @ rng.standard_normal(p) + 0.5 * rng.standard_normal(n)
data = EpochData(X, y)
trans = StateTransition.identity(p, q=0.2)

pred = predict_state(prev, trans)
noise = NoiseSpec.iid(innovation_noise_scale(data, pred))

via_irs = irs_step(prev, data, trans, Hyperparams(lam=0.0, tau=p / n))
via_gain = kalman_step(prev, data, trans, noise, tau_star=1.0)
via_info = kalman_step_fast(prev, data, trans, noise)

print("max |theta difference|, sequential vs gain-form:",
      f"{np.max(np.abs(via_irs.theta - via_gain.theta)):.2e}")
print("max |theta difference|, gain-form vs information-form:",
      f"{np.max(np.abs(via_gain.theta - via_info.theta)):.2e}")
print("covariance Frobenius gap:",
      f"{np.linalg.norm(via_gain.sigma - via_info.sigma):.2e}")

# --- speed at n >> p ---------------------------------------------------
n, p = 2000, 50
prev = ModelState(rng.standard_normal(p), np.eye(p), 1.0, 0)
X = rng.standard_normal((n, p))
data = EpochData(X, X @ rng.standard_normal(p) + rng.standard_normal(n))
trans = StateTransition.identity(p, q=0.1)
noise = NoiseSpec.iid(1.0)

for name, fn in [
    ("gain-form (inverts an n x n system)", lambda: kalman_step(prev, data, trans, noise, 1.0)),
    ("information-form (p x p only)", lambda: kalman_step_fast(prev, data, trans, noise)),
]:
    times = []
    for _ in range(5):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    print(f"{name}: median {1e3 * np.median(times):7.1f} ms over 5 runs")
