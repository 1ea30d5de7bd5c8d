"""Exact ground truth on tiny instances.

Every function here enumerates a finite space exhaustively and returns
arbitrary-precision rationals. Nothing is shared with the fast projection
path (different arithmetic, different code), so these results can referee
it. Enumeration cost is checked against a budget up front and refused with
the estimate when too large; enumeration order is lexicographic so partial
results are reproducible by index.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .bounds import eulerian_count_estimate

DEFAULT_BUDGET = 1 << 26


class BudgetExceeded(Exception):
    """Enumeration would visit more states than the configured budget."""

    def __init__(self, cost: int, budget: int, what: str):
        self.cost = cost
        self.budget = budget
        super().__init__(f"{what} needs {cost} states, budget is {budget}")


def _check_budget(cost: int, budget: int, what: str) -> None:
    if cost > budget:
        raise BudgetExceeded(cost, budget, what)


class ExactVector:
    """A vector c * w with rational weights w and rational c^2.

    Storing the scale squared keeps every squared norm, and therefore
    every distortion moment, an exact rational even when c itself is
    irrational. ``unit_flat(k)`` is the unit vector with k equal entries
    (w = 1, c^2 = 1/k), the extremal input for the tradeoff.
    """

    __slots__ = ("weights", "scale_sq")

    def __init__(self, weights, scale_sq=Fraction(1)):
        self.weights = tuple(Fraction(w) for w in weights)
        if any(w == 0 for w in self.weights):
            raise ValueError("weights must be nonzero (they define the support)")
        self.scale_sq = Fraction(scale_sq)
        if self.scale_sq <= 0:
            raise ValueError("scale_sq must be positive")

    @classmethod
    def unit_flat(cls, k: int) -> "ExactVector":
        if not isinstance(k, int) or isinstance(k, bool) or k < 1:
            raise ValueError("k must be a positive integer")
        return cls((1,) * k, Fraction(1, k))

    @property
    def nnz(self) -> int:
        return len(self.weights)

    @property
    def norm_sq(self) -> Fraction:
        return self.scale_sq * sum(w * w for w in self.weights)


def exact_failure_probability(m: int, k: int, eps, budget: int = DEFAULT_BUDGET) -> Fraction:
    """Probability that the unit flat vector on k keys distorts by eps or more.

    Enumerates all m^k bucket maps and 2^k sign patterns. With S the sum
    of squared signed bucket counts, the squared projected norm is S/k, so
    a (h, sigma) pair fails exactly when |S - k| * den >= num * k for
    eps = num/den; the count is exact integer arithmetic throughout.
    """
    if not isinstance(m, int) or isinstance(m, bool) or m < 1:
        raise ValueError("m must be a positive integer")
    if not isinstance(k, int) or isinstance(k, bool) or k < 1:
        raise ValueError("k must be a positive integer")
    eps = Fraction(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    cost = (m ** k) * (2 ** k)
    _check_budget(cost, budget, f"exact_failure_probability(m={m}, k={k})")
    num, den = eps.numerator, eps.denominator
    pair_list = [(a, b) for a in range(k) for b in range(a + 1, k)]
    signs_list = list(itertools.product((1, -1), repeat=k))

    def pattern_failures(pattern: tuple[bool, ...]) -> int:
        live = [pair for pair, same in zip(pair_list, pattern) if same]
        count = 0
        for signs in signs_list:
            s_val = k + 2 * sum(signs[a] * signs[b] for a, b in live)
            if abs(s_val - k) * den >= num * k:
                count += 1
        return count

    # The failure indicator depends on h only through its collision
    # pattern, so the inner sign loop is memoized per pattern; totals are
    # identical to the plain double loop.
    failures_by_pattern: dict[tuple[bool, ...], int] = {}
    total = 0
    for h in itertools.product(range(m), repeat=k):
        pattern = tuple(h[a] == h[b] for a, b in pair_list)
        hit = failures_by_pattern.get(pattern)
        if hit is None:
            hit = failures_by_pattern[pattern] = pattern_failures(pattern)
        total += hit
    return Fraction(total, cost)


def _canonical_blocks(h: tuple[int, ...]) -> tuple[int, ...]:
    seen: dict[int, int] = {}
    return tuple(seen.setdefault(b, len(seen)) for b in h)


def exact_moment_bruteforce(m: int, x: ExactVector, r: int,
                            budget: int = DEFAULT_BUDGET) -> Fraction:
    """r-th moment of the norm distortion |proj_norm_sq - norm_sq|, exactly.

    Enumerates all m^k bucket maps and 2^k sign patterns for the support
    of x and averages the distortion power as a rational. r must be even
    and positive.
    """
    if not isinstance(m, int) or isinstance(m, bool) or m < 1:
        raise ValueError("m must be a positive integer")
    if not isinstance(r, int) or isinstance(r, bool) or r < 2 or r % 2 != 0:
        raise ValueError("r must be an even integer >= 2")
    k = x.nnz
    cost = (m ** k) * (2 ** k)
    _check_budget(cost, budget, f"exact_moment_bruteforce(m={m}, k={k})")
    weights = x.weights
    wsq_total = sum(w * w for w in weights)
    signs_list = list(itertools.product((1, -1), repeat=k))

    def block_moment(labels: tuple[int, ...]) -> Fraction:
        nblocks = max(labels) + 1
        total = Fraction(0)
        for signs in signs_list:
            block_sums = [Fraction(0)] * nblocks
            for j, lab in enumerate(labels):
                block_sums[lab] += signs[j] * weights[j]
            deviation = sum(bs * bs for bs in block_sums) - wsq_total
            total += abs(deviation) ** r
        return total

    # The deviation depends on h only through the partition it induces on
    # the support, so the sign loop is memoized per canonical partition.
    moment_by_blocks: dict[tuple[int, ...], Fraction] = {}
    total = Fraction(0)
    for h in itertools.product(range(m), repeat=k):
        labels = _canonical_blocks(h)
        hit = moment_by_blocks.get(labels)
        if hit is None:
            hit = moment_by_blocks[labels] = block_moment(labels)
        total += hit
    return x.scale_sq ** r * total / cost


def exact_moment_sequences(m: int, x: ExactVector, r: int,
                           budget: int = DEFAULT_BUDGET) -> Fraction:
    """Same moment as ``exact_moment_bruteforce`` via the sequence identity.

    Sums over all length-r sequences of ordered index pairs (a, b), a != b,
    from the support of x; a sequence contributes only when every index
    degree is even, and then contributes m^-(alpha - beta) times the
    product of entry powers, where alpha counts the touched vertices and
    beta the connected components of the induced multigraph (components
    always have at least two nodes, since isolated vertices are not
    touched). This is an independent route to the identical rational.
    """
    if not isinstance(m, int) or isinstance(m, bool) or m < 1:
        raise ValueError("m must be a positive integer")
    if not isinstance(r, int) or isinstance(r, bool) or r < 2 or r % 2 != 0:
        raise ValueError("r must be an even integer >= 2")
    k = x.nnz
    pairs = [(a, b) for a in range(k) for b in range(k) if a != b]
    cost = len(pairs) ** r
    _check_budget(cost, budget, f"exact_moment_sequences(k={k}, r={r})")
    weights_sq = [w * w for w in x.weights]
    total = Fraction(0)
    for seq in itertools.product(pairs, repeat=r):
        degree = [0] * k
        for a, b in seq:
            degree[a] += 1
            degree[b] += 1
        if any(d & 1 for d in degree):
            continue
        parent = list(range(k))

        def find(v: int) -> int:
            while parent[v] != v:
                parent[v] = parent[parent[v]]
                v = parent[v]
            return v

        for a, b in seq:
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[ra] = rb
        touched = [q for q in range(k) if degree[q] > 0]
        alpha = len(touched)
        beta = len({find(q) for q in touched})
        weight_prod = Fraction(1)
        for q in touched:
            weight_prod *= weights_sq[q] ** (degree[q] // 2)
        total += Fraction(weight_prod, m ** (alpha - beta))
    return x.scale_sq ** r * total


@dataclass(frozen=True)
class EulerianCountResult:
    """Exact labeled Eulerian multigraph count next to its closed-form estimate.

    ``log2_ratio_per_r`` is |log2(exact / estimate)| / r, the per-edge
    exponential gap; None when the exact count is zero (parity or
    connectivity makes some cells unrealizable, e.g. alpha = 2 with odd r).
    """

    alpha: int
    beta: int
    r: int
    exact_count: int
    estimate: Fraction
    log2_ratio_per_r: float | None


@lru_cache(maxsize=256)
def _eulerian_counts_by_components(alpha: int, r: int) -> dict[int, int]:
    """Count length-r edge sequences on [alpha] that cover every vertex with
    all degrees even, grouped by number of connected components.

    Edges are unordered pairs of distinct vertices; the sequence position
    is the edge label. The last edge of a valid sequence is forced: it must
    flip the parity of exactly the odd-degree vertices, so the loop
    enumerates length r-1 prefixes and completes each one, which counts
    exactly the same set as full enumeration.
    """
    pairs = list(itertools.combinations(range(alpha), 2))
    masks = [(1 << a) | (1 << b) for a, b in pairs]
    pair_index = {mask: idx for idx, mask in enumerate(masks)}
    full_cover = (1 << alpha) - 1
    counts: dict[int, int] = {}
    for prefix in itertools.product(range(len(pairs)), repeat=r - 1):
        parity = 0
        cover = 0
        for e in prefix:
            parity ^= masks[e]
            cover |= masks[e]
        last = pair_index.get(parity)
        if last is None:
            continue
        if (cover | masks[last]) != full_cover:
            continue
        parent = list(range(alpha))

        def find(v: int) -> int:
            while parent[v] != v:
                parent[v] = parent[parent[v]]
                v = parent[v]
            return v

        for e in prefix:
            a, b = pairs[e]
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[ra] = rb
        a, b = pairs[last]
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
        beta = len({find(v) for v in range(alpha)})
        counts[beta] = counts.get(beta, 0) + 1
    return counts


def count_eulerian_graphs(alpha: int, beta: int, r: int,
                          budget: int = DEFAULT_BUDGET) -> EulerianCountResult:
    """Exactly count the labeled Eulerian multigraphs behind the estimate.

    Counts sequences of r unordered vertex pairs on [alpha] (position =
    edge label) whose multigraph has every degree even and positive and
    exactly beta connected components, then pairs the count with the
    closed-form estimate.
    """
    estimate = eulerian_count_estimate(alpha, beta, r)  # validates the domain
    pair_count = alpha * (alpha - 1) // 2
    cost = pair_count ** r
    _check_budget(cost, budget, f"count_eulerian_graphs(alpha={alpha}, r={r})")
    counts = _eulerian_counts_by_components(alpha, r)
    exact = counts.get(beta, 0)
    if exact > 0:
        ratio = abs(math.log2(exact) - math.log2(float(estimate))) / r
    else:
        ratio = None
    return EulerianCountResult(alpha, beta, r, exact, estimate, ratio)
