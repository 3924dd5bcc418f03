"""The leading-index subset construction and its rank-failure probabilities:
cardinalities, the closed forms, and a Monte Carlo cross-check.

Run with:  python demos/02_subset_probabilities.py
"""

import numpy as np

from micnsim.milic import (MULTI_TABLE_ROWS, RankFailureQuery, cardinality,
                           prob_fail_monte_carlo, prob_fail_multi,
                           prob_fail_single, sample_uniform, subset_of)

n, q = 10, 256
print(f"subsets of F_{q}^{n}: |A_i| = (q-1) q^(n-i)")
for i in (1, 5, 10):
    print(f"  |A_{i}| = {cardinality(i, n, q)}")
total = sum(cardinality(i, n, q) for i in range(1, n + 1))
print(f"  sum over i = {total} = q^n - 1 = {q ** n - 1}")

rng = np.random.default_rng(0)
v = sample_uniform(4, n, q, rng)
print(f"\nuniform draw from A_4: {list(map(int, v))} -> subset {subset_of(v)}")

print(f"\nP(dependent | l draws from one subset), n={n}, q={q}:")
header = "        " + "".join(f"l={l:<12}" for l in range(1, 6))
print(header)
for k in range(1, 6):
    cells = "".join(f"{prob_fail_single(l, k, n, q):<14.2e}" for l in range(1, 6))
    print(f"  A_{k}:  {cells}")

print("\nP(dependent | l draws from each of A_1..A_k), n=100:")
print(f"  {'k':>3} {'l':>3} {'q=2':>12} {'q=256':>12} {'monte carlo (q=2)':>20}")
for k, l in MULTI_TABLE_ROWS:
    p2 = prob_fail_multi(l, k, 100, 2)
    p256 = prob_fail_multi(l, k, 100, 256)
    est = prob_fail_monte_carlo(RankFailureQuery(l, k, 100, 2), 2000, rng)
    print(f"  {k:>3} {l:>3} {p2:>12.2e} {p256:>12.2e} "
          f"{est.estimate:>12.4f} +/- {est.stderr:.4f}")
