"""Desk-scale benchmark on the two synthetic protocols.

Protocol 1 keeps a fixed sparse support whose active coordinates random-walk;
protocol 2 lets coordinates activate/deactivate while the per-epoch sample
size shrinks below p. Compare the sequential estimator against the per-epoch
adaptive Lasso (no prior knowledge) and the Kalman filter (no selection)
using per-epoch cross-validated test rMSE, averaged over seeds.

This is a trimmed version of the acceptance runs (fewer seeds, so ~10 s).
"""

import numpy as np

from irs import DescentConfig, Hyperparams, StateSpec, gen_exp1, gen_exp2
from irs.harness import _sequential_cv

SEEDS = 6
FOLDS = 10
HP = Hyperparams(lam=0.2, tau=0.05)
STATE = StateSpec(f=1.0, q=1.0)  # matches the generators' unit-variance walk


def mean_curves(gen, methods, T=9, p=50):
    curves = {m: np.zeros(T) for m in methods}
    for seed in range(SEEDS):
        stream = gen(p, T, seed)
        for m in methods:
            res = _sequential_cv(
                stream, m, HP, DescentConfig(), STATE, FOLDS, seed, ("rmse",)
            )
            for t in range(T):
                curves[m][t] += res[t]["rmse"] / SEEDS
    return curves


def show(title, curves):
    print(f"\n{title}")
    print("epoch      " + "".join(f"{t + 1:>8d}" for t in range(9)))
    for m, vals in curves.items():
        print(f"{m:<11s}" + "".join(f"{v:8.3f}" for v in vals))


show(
    "fixed support, random-walk coefficients (test rMSE; noise floor is 1.0)",
    mean_curves(gen_exp1, ["irs", "lasso-local"]),
)
show(
    "evolving support, shrinking samples (n drops from 2p to 0.8p)",
    mean_curves(gen_exp2, ["irs", "lasso-local", "kalman"]),
)

print(
    "\nReading the tables: the local Lasso cannot carry information across"
    "\nepochs, so its error stays flat (protocol 1) or blows up once n < p"
    "\n(protocol 2). The sequential estimator starts at the Lasso's level and"
    "\nimproves as prior knowledge accumulates; the Kalman filter carries the"
    "\nprior but, lacking selection, overfits all 50 coordinates."
)
