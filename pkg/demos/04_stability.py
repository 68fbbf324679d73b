"""How stable is the training algorithm, and what does that buy?

Error stability (alpha) is the largest change in expected test loss when one
training record is replaced; uniform training stability (beta) is the largest
change in the loss at any retained training record. Both are estimated by
maxima over sampled replacements, so they are lower-bound estimates. The
deviation bound ``sqrt(t/n) + sqrt(n t) alpha + sqrt(n t) beta`` holds up to
an unknown constant and is printed for order of magnitude only.

Run with ``python demos/04_stability.py``.
"""

from causalmia import TrainerConfig, make_problem
from causalmia.stability import estimate_stability, theorem_deviation
from causalmia.trainers import RIDGE

spec = make_problem(0, 50, 0.9)
print(f"{'n_train':>7s} {'lambda':>7s} {'alpha':>9s} {'beta':>9s} {'bound (xC)':>11s}")
for lam in (1e-6, 1e3):
    for n in (200, 2000):
        est = estimate_stability(spec, TrainerConfig(RIDGE, ridge_lambda=lam), n, 10, 2000, seed=1)
        bound = theorem_deviation(est.alpha_hat, est.beta_hat, 400, 3.0)
        print(f"{n:7d} {lam:7.0e} {est.alpha_hat:9.2e} {est.beta_hat:9.2e} {bound:11.3f}")
print("alpha shrinks with n; without regularisation beta is largest when n is small")
