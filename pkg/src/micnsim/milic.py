"""Leading-index subset algebra for coded-content interests.

The nonzero vectors of F_q^n are partitioned into subsets by the position
of their first nonzero coordinate: subset i holds every vector whose
coordinates before i are zero and whose i-th coordinate is nonzero.  One
vector picked from each subset is automatically a row-echelon matrix, so
any such selection has full rank.  This module provides membership,
uniform sampling, exact cardinalities, the recombination step that moves a
pair of same-subset vectors to a strictly higher subset, and closed-form /
Monte Carlo rank-failure probabilities for random selections.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .gf import Field, RrefBasis, leading_index


def subset_of(vec: np.ndarray) -> int:
    """Subset index (1-based first-nonzero position) of a nonzero vector."""
    i = leading_index(np.asarray(vec, dtype=np.uint8))
    if i is None:
        raise ValueError("the all-zero vector belongs to no subset")
    return i


def cardinality(i: int, n: int, q: int) -> int:
    """Exact size of subset i in F_q^n: (q-1) * q^(n-i)."""
    if not 1 <= i <= n:
        raise ValueError(f"subset index {i} outside 1..{n}")
    return (q - 1) * q ** (n - i)


def sample_uniform(i: int, n: int, q: int, rng) -> np.ndarray:
    """Vector drawn uniformly from subset i of F_q^n."""
    if not 1 <= i <= n:
        raise ValueError(f"subset index {i} outside 1..{n}")
    vec = np.zeros(n, dtype=np.uint8)
    vec[i - 1] = rng.integers(1, q)
    if i < n:
        vec[i:] = rng.integers(0, q, size=n - i)
    return vec


def recombine_to_higher(a1: np.ndarray, a2: np.ndarray, field: Field, rng) -> np.ndarray:
    """Combine two independent same-subset vectors into a higher subset.

    With alpha_1 uniform over the nonzero elements and alpha_2 chosen so the
    leading coordinates cancel, the result is nonzero exactly when the
    inputs are independent, and its leading index is strictly larger.
    """
    a1 = np.asarray(a1, dtype=np.uint8)
    a2 = np.asarray(a2, dtype=np.uint8)
    i1, i2 = subset_of(a1), subset_of(a2)
    if i1 != i2:
        raise ValueError(f"inputs come from different subsets ({i1} and {i2})")
    alpha1 = field.random_nonzero(rng)
    # Characteristic 2: -x = x, so alpha_2 = alpha_1 * a1_i / a2_i.
    alpha2 = field.mul(alpha1, field.mul(int(a1[i1 - 1]), field.inv(int(a2[i1 - 1]))))
    out = field.scale(a1, alpha1) ^ field.scale(a2, alpha2)
    if not out.any():
        raise ValueError("inputs are linearly dependent")
    return out


@dataclass(frozen=True)
class RankFailureQuery:
    """Parameters for a rank-failure probability: vectors_per_subset from
    each of subsets 1..num_subsets in F_q^n."""

    vectors_per_subset: int
    num_subsets: int
    n: int
    q: int

    def __post_init__(self):
        if self.vectors_per_subset < 1 or self.num_subsets < 1:
            raise ValueError("need at least one vector from at least one subset")
        if self.vectors_per_subset * self.num_subsets > self.n:
            raise ValueError(
                f"{self.vectors_per_subset} vectors from each of "
                f"{self.num_subsets} subsets exceed dimension {self.n}"
            )


def _one_minus_product(terms) -> float:
    """1 - prod(1 - t_j) evaluated without catastrophic cancellation.

    Sums log1p(-t_j) and applies expm1, so failure probabilities down in the
    1e-30 range keep several significant digits.
    """
    acc = 0.0
    for t in terms:
        if t >= 1.0:
            return 1.0
        acc += math.log1p(-t)
    return -math.expm1(acc) + 0.0  # normalize -0.0


def prob_fail_single(ell: int, k: int, n: int, q: int) -> float:
    """Probability that ell uniform draws from subset k are dependent.

    Complement of prod_{j=1..ell} (1 - (q^(j-1)-1) / ((q-1) q^(n-k))).
    """
    if not 1 <= k <= n:
        raise ValueError(f"subset index {k} outside 1..{n}")
    if not 1 <= ell <= n - k + 1:
        raise ValueError(f"need 1 <= ell <= n-k+1 = {n - k + 1}, got {ell}")
    denom = (q - 1) * q ** (n - k)
    return _one_minus_product((q ** (j - 1) - 1) / denom for j in range(1, ell + 1))


def prob_fail_multi(ell: int, k: int, n: int, q: int) -> float:
    """Probability that ell draws from each of subsets 1..k are dependent.

    Complement of prod_{j=1..(ell-1)k} (1 - q^(j-1) / q^(n-k)).
    """
    RankFailureQuery(ell, k, n, q)  # bounds check
    denom = q ** (n - k)
    return _one_minus_product(q ** (j - 1) / denom for j in range(1, (ell - 1) * k + 1))


@dataclass(frozen=True)
class MonteCarloEstimate:
    estimate: float
    stderr: float
    failures: int
    trials: int


def _mc_failures_gf2(query: RankFailureQuery, trials: int, rng) -> int:
    """Bit-packed GF(2) path; rows become ints with bit (n-i) for coordinate i."""
    n, k, ell = query.n, query.num_subsets, query.vectors_per_subset
    nbytes = (n + 7) // 8
    raw = rng.bytes(nbytes * k * ell * trials)
    pos = 0
    failures = 0
    for _ in range(trials):
        pivots: dict[int, int] = {}
        full = True
        for i in range(1, k + 1):
            lead = 1 << (n - i)
            mask = lead - 1
            for _ in range(ell):
                r = (int.from_bytes(raw[pos:pos + nbytes], "big") & mask) | lead
                pos += nbytes
                while r:
                    h = r.bit_length()
                    p = pivots.get(h)
                    if p is None:
                        pivots[h] = r
                        break
                    r ^= p
                else:
                    full = False
            if not full:
                break
        if not full:
            failures += 1
    return failures


def _mc_failures_general(query: RankFailureQuery, trials: int, rng, field: Field) -> int:
    n, k, ell = query.n, query.num_subsets, query.vectors_per_subset
    failures = 0
    for _ in range(trials):
        basis = RrefBasis(field, n)
        full = True
        for i in range(1, k + 1):
            for _ in range(ell):
                if not basis.insert(sample_uniform(i, n, query.q, rng)):
                    full = False
            if not full:
                break
        if not full:
            failures += 1
    return failures


def prob_fail_monte_carlo(query: RankFailureQuery, trials: int, rng) -> MonteCarloEstimate:
    """Empirical rank-failure frequency with its binomial standard error."""
    if trials < 1:
        raise ValueError("need at least one trial")
    if query.q == 2:
        failures = _mc_failures_gf2(query, trials, rng)
    else:
        exponent = query.q.bit_length() - 1
        if 1 << exponent != query.q:
            raise ValueError(f"field size {query.q} is not a power of two")
        failures = _mc_failures_general(query, trials, rng, Field(exponent))
    p = failures / trials
    return MonteCarloEstimate(p, math.sqrt(p * (1.0 - p) / trials), failures, trials)


# The nine (num_subsets, vectors_per_subset) rows of the consecutive-subset
# failure table, in presentation order; generation size 100.
MULTI_TABLE_ROWS = (
    (50, 2), (25, 4), (33, 3), (49, 2), (48, 2), (32, 3), (24, 4), (47, 2), (45, 2),
)
MULTI_TABLE_N = 100


def single_subset_table(n: int = 10, q: int = 256, max_subset: int = 5, max_ell: int = 5):
    """Grid of prob_fail_single values: rows = subsets 1..max_subset, cols = ell."""
    return [
        [prob_fail_single(ell, k, n, q) for ell in range(1, max_ell + 1)]
        for k in range(1, max_subset + 1)
    ]


def multi_subset_table(n: int = MULTI_TABLE_N, qs: tuple[int, ...] = (2, 256),
                       rows: tuple[tuple[int, int], ...] = MULTI_TABLE_ROWS):
    """Rows of (k, ell, {q: prob_fail_multi}) for the consecutive-subset table."""
    out = []
    for k, ell in rows:
        out.append((k, ell, {q: prob_fail_multi(ell, k, n, q) for q in qs}))
    return out
