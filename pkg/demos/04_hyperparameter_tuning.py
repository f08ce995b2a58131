"""Pick the regularization pair (lambda, tau) by cross-validation.

The loss normalization keeps its expectation constant across epochs, so a
pair chosen on a short prefix keeps working for the rest of the stream: run
k-fold cross-validation over a 2-D grid on the first three epochs only.
"""

from irs import GridSpec, cv_score, gen_exp1, grid_search

stream = gen_exp1(p=20, T=9, seed=1)

grid = GridSpec(
    lambdas=(0.01, 0.1, 0.5, 1.0),
    taus=(0.01, 0.1, 1.0),
    k=10,
    n_epochs=3,
    seed=0,
)
best, table = grid_search(stream.prefix(grid.n_epochs), grid, q=1.0)

print("score table (10-fold CV on the 3-epoch prefix):\n")
print(f"{'lambda':>8s} {'tau':>8s} {'rmse':>8s}")
for lam, tau, score in table:
    marker = "  <- selected" if (lam, tau) == (best.lam, best.tau) else ""
    print(f"{lam:8.2f} {tau:8.2f} {score:8.4f}{marker}")

# the selected pair generalizes: score it on the full stream
full = cv_score(stream, best, k=10, seed=0, q=1.0)
print(f"\nselected (lambda={best.lam}, tau={best.tau})")
print(f"pooled rMSE on the prefix: {min(r[2] for r in table):.4f}")
print(f"pooled rMSE on all 9 epochs: {full:.4f}")
