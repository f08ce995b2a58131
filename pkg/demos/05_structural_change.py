"""Predictors come and go; the model keeps up without manual surgery.

Adding a predictor: grow the state with a zero mean and a large uncorrelated
prior variance. Until its column carries signal, the adaptive penalty keeps
the new coefficient at exactly zero.

Removing a predictor: nothing to do. Once its column stops varying, the L1
path shrinks the stale coefficient every epoch and lands it on exactly zero.
"""

import numpy as np

from irs import (
    EpochData,
    Hyperparams,
    StateTransition,
    expand_model,
    initial_state,
    irs_step,
    standardize,
)

rng = np.random.default_rng(42)
hp = Hyperparams(lam=0.15, tau=0.5)

# --- a new predictor arrives -------------------------------------------
p = 4
theta_true = np.array([1.2, -0.8, 0.0, 0.6])
X = rng.standard_normal((40, p))
state = initial_state(EpochData(X, X @ theta_true + 0.3 * rng.standard_normal(40)))
print(f"state dimension before expansion: {state.p}")

state = expand_model(state, n_new=1, prior_variance=100.0)
print(f"after expansion: {state.p}; new coefficient {state.theta[-1]}, "
      f"prior variance {state.sigma[-1, -1]}")

trans = StateTransition.identity(p + 1, q=0.1)
for t in range(3):
    X = np.column_stack([rng.standard_normal((40, p)), np.zeros(40)])
    y = X[:, :p] @ theta_true + 0.3 * rng.standard_normal(40)
    state = irs_step(state, EpochData(X, y, t), trans, hp)
    print(f"  epoch {t}: new coefficient = {state.theta[-1]} (column still all-zero)")

# once the column carries signal, the coefficient wakes up
theta_grown = np.append(theta_true, 0.9)
for t in range(3, 6):
    X = rng.standard_normal((40, p + 1))
    y = X @ theta_grown + 0.3 * rng.standard_normal(40)
    state = irs_step(state, EpochData(X, y, t), trans, hp)
print(f"after 3 epochs of real signal: new coefficient = {state.theta[-1]:+.3f} "
      f"(truth 0.9)")

# --- a predictor disappears --------------------------------------------
p = 8
rng = np.random.default_rng(5)
theta = np.zeros(p)
theta[[1, 4]] = [1.5, -2.0]
trans = StateTransition.identity(p, q=1.0)
state = None
print("\ncoefficient of the vanished predictor (column zeroed from epoch 2):")
for t in range(10):
    n = 24
    X = rng.standard_normal((n, p))
    if t >= 2:
        X[:, 4] = 0.0
    y = X @ theta + rng.standard_normal(n)
    ep, _ = standardize(EpochData(X, y, t))
    if state is None:
        state = initial_state(ep)
    state = irs_step(state, ep, trans, Hyperparams(0.2, 0.5))
    print(f"  epoch {t}: {state.theta[4]:+.4f}")
print("decays epoch over epoch and parks on exactly 0.0")
