"""Statistical and structural properties of the estimator."""

import numpy as np

from irs import (
    EpochData,
    Hyperparams,
    NoiseSpec,
    PredictedState,
    StateTransition,
    gen_exp1,
    inertial_ols,
    initial_state,
    irs_step,
    loss_gradient,
    objective,
    proximal_descent,
    standardize,
)
from conftest import random_instance, random_spd


def test_first_order_optimality_across_instances():
    for seed in range(10):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(40, 120))
        p = int(rng.integers(3, 50))
        data, pred, _ = random_instance(rng, n, p)
        noise = NoiseSpec.iid(float(rng.uniform(0.5, 2.0)))
        tau = float(rng.uniform(0.2, 3.0))
        theta_star = inertial_ols(data, pred, noise, tau)
        g = loss_gradient(theta_star, data, pred, noise, tau)
        assert np.max(np.abs(g)) < 1e-8


def test_sparsity_soft_monotone_in_lambda():
    # nonzero counts may wobble along a proximal path, but never by much
    lambdas = [0.01, 0.05, 0.2, 0.5, 1.0, 3.0]
    for seed in range(5):
        rng = np.random.default_rng(100 + seed)
        p = 30
        data, pred, _ = random_instance(rng, 70, p)
        noise = NoiseSpec.iid(1.0)
        counts = []
        for lam in lambdas:
            result = proximal_descent(data, pred, noise, Hyperparams(lam, 0.8))
            counts.append(int(np.sum(result.theta != 0.0)))
        for lo, hi in zip(counts[:-1], counts[1:]):
            assert hi <= lo + p / 10


def _dead_column_stream(seed, p=10, T=16, kill_at=2):
    """Fixed-support walk stream whose largest starting coordinate loses its
    column (all zeros) from epoch kill_at on."""
    rng = np.random.default_rng(seed)
    theta = rng.standard_normal(p)
    keep = np.argsort(-np.abs(theta))[:2]
    mask = np.zeros(p, dtype=bool)
    mask[keep] = True
    theta = np.where(mask, theta, 0.0)
    dead = int(keep[0])
    epochs = []
    for t in range(T):
        if t > 0:
            theta = theta + np.where(mask, rng.standard_normal(p), 0.0)
        n = int(rng.integers(int(1.8 * p), int(2.1 * p) + 1))
        X = rng.standard_normal((n, p))
        if t >= kill_at:
            X[:, dead] = 0.0  # the zero column removes the signal by itself
        y = X @ theta + rng.standard_normal(n)
        epochs.append(EpochData(X, y, t))
    return epochs, dead


def run_dead_column(seed, lam, T=16, kill_at=2, p=10):
    epochs, dead = _dead_column_stream(seed, p=p, T=T, kill_at=kill_at)
    hp = Hyperparams(lam, 0.5)
    trans = StateTransition.identity(p, q=1.0)
    state = None
    path = []
    for ep in epochs:
        ep_std, _ = standardize(ep)
        if state is None:
            state = initial_state(ep_std)
        state = irs_step(state, ep_std, trans, hp)
        path.append(abs(float(state.theta[dead])))
    return np.asarray(path), kill_at


def test_dead_predictor_decays_to_exact_zero():
    seeds = range(20)
    reach_zero = 0
    mean_path = None
    for seed in seeds:
        path, kill_at = run_dead_column(seed, lam=0.1)
        if path[-1] == 0.0:
            reach_zero += 1
        mean_path = path if mean_path is None else mean_path + path
    mean_path = mean_path / len(list(seeds))
    # decaying in expectation once the column disappears
    tail = mean_path[kill_at:]
    assert np.all(np.diff(tail) <= 1e-9)
    assert reach_zero >= 18


def test_loss_parts_have_constant_expectation():
    # simulated at the true parameters, the data term averages 1/2 and the
    # inertia term tau/2, independent of the epoch
    rng = np.random.default_rng(7)
    n, p, tau, w2 = 600, 40, 0.8, 1.3
    X = rng.standard_normal((n, p))
    theta_pred = rng.standard_normal(p)
    sigma_pred = random_spd(rng, p)
    L = np.linalg.cholesky(sigma_pred)
    pred = PredictedState(theta_pred, sigma_pred)
    noise = NoiseSpec.iid(w2)
    part_a, part_b = [], []
    for _ in range(200):
        theta_t = theta_pred + L @ rng.standard_normal(p)
        y = X @ theta_t + np.sqrt(w2) * rng.standard_normal(n)
        data = EpochData(X, y)
        a = objective(theta_t, data, pred, noise, Hyperparams(0.0, 0.0), theta_t)
        ab = objective(theta_t, data, pred, noise, Hyperparams(0.0, tau), theta_t)
        part_a.append(a)
        part_b.append(ab - a)
    mean_a = float(np.mean(part_a))
    mean_b = float(np.mean(part_b))
    assert abs(mean_a - 0.5) / 0.5 < 0.05
    assert abs(mean_b - tau / 2) / (tau / 2) < 0.05


def test_irs_error_does_not_grow_on_walk_stream():
    # three sequential epochs on the fixed-support protocol at p = 20: the
    # held-out error at later epochs stays at or below the first epoch's
    p, T = 20, 3
    hp = Hyperparams(0.1, 0.5)
    trans = StateTransition.identity(p, q=1.0)
    errors = np.zeros(T)
    n_seeds = 20
    for seed in range(n_seeds):
        stream = gen_exp1(p, T, seed)
        rng = np.random.default_rng(1000 + seed)
        state = None
        for t, ep in enumerate(stream.epochs):
            idx = rng.permutation(ep.n)
            cut = int(0.8 * ep.n)
            tr, te = np.sort(idx[:cut]), np.sort(idx[cut:])
            ep_std, scaler = standardize(EpochData(ep.X[tr], ep.y[tr], t))
            if state is None:
                state = initial_state(ep_std)
            state = irs_step(state, ep_std, trans, hp)
            yhat = scaler.transform(ep.X[te]) @ state.theta + scaler.y_mean
            errors[t] += np.sqrt(np.mean((ep.y[te] - yhat) ** 2))
    errors /= n_seeds
    assert errors[1] <= errors[0]
    assert errors[2] <= errors[0]
