"""Guarantee coefficients for greedy and degree-limited selection.

The guarantees are driven by a curvature ratio ``alpha``: the most an
incremental gain may grow relative to the gain one step earlier along a
greedy selection chain.  Submodular objectives have ``alpha <= 1``;
directed information scores can exceed it (synergy between parents), and
the coefficients below degrade gracefully as ``alpha`` grows.

Measured ratios follow two conventions: 0/0 counts as 1 (a stalled chain
is no evidence of synergy), and a positive gain right after a zero gain
admits no finite ratio, so the estimate becomes ``inf`` -- flagged on the
result, never raised.  The coefficient functions accept ``inf`` and
return their degenerate limits so measured values can be piped straight
in.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass

from .errors import ValidationError
from .estimation import DIEvaluator
from .structures import ParentAssignment, _check_process


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if math.isnan(alpha) or alpha <= 0.0:
        raise ValidationError(f"alpha must be positive, got {alpha}")
    return alpha


def _check_size(value: int, name: str) -> int:
    if not isinstance(value, int) or isinstance(value, bool) or value < 1:
        raise ValidationError(f"{name} must be a positive integer, got {value!r}")
    return value


def _geometric_sum(alpha: float, k: int) -> float:
    # 1 + alpha + ... + alpha^(k-1), stable at alpha == 1
    if alpha == 1.0:
        return float(k)
    return (alpha**k - 1.0) / (alpha - 1.0)


def greedy_bound_coefficient(alpha: float, K: int, L: int) -> float:
    """Guaranteed fraction of the best size-K score reached by L greedy picks.

    Equals ``1 - exp(-L / (1 + alpha + ... + alpha^(K-1)))``; at
    ``alpha=1`` and ``L=K`` this is the familiar ``1 - 1/e``.  An
    unbounded measured alpha collapses the guarantee to 0.
    """
    alpha = _check_alpha(alpha)
    K = _check_size(K, "K")
    L = _check_size(L, "L")
    if math.isinf(alpha):
        return 0.0
    return 1.0 - math.exp(-L / _geometric_sum(alpha, K))


def degree_gap_coefficient(alpha: float, K: int, L: int) -> float:
    """Guaranteed fraction of the best size-K score kept by the best size-L set.

    Requires ``L <= K``.  Equals ``(alpha^L - 1) / (alpha^K - 1)``, read
    as ``L / K`` in the ``alpha -> 1`` limit; an unbounded alpha gives 0
    (or 1 when the sizes agree).
    """
    alpha = _check_alpha(alpha)
    K = _check_size(K, "K")
    L = _check_size(L, "L")
    if L > K:
        raise ValidationError(f"L={L} must not exceed K={K}")
    if math.isinf(alpha):
        return 1.0 if L == K else 0.0
    return _geometric_sum(alpha, L) / _geometric_sum(alpha, K)


def geometric_budget_maximum(alpha: float, K: int, L: int, budget: float) -> float:
    """Largest total of a ratio-capped chain whose first L terms are budgeted.

    Solves ``max sum(b_1..b_K)`` over nonnegative chains with
    ``b_i <= alpha * b_(i-1)`` and ``sum(b_1..b_L) <= budget``, for
    ``alpha > 1`` and ``L <= K``.  Both constraints bind at the optimum,
    which is the pure geometric chain, giving
    ``budget * (1 - alpha^K) / (1 - alpha^L)``.  The ``alpha -> 1`` limit
    would be ``budget * K / L``, but the closed form is specific to
    ``alpha > 1`` and smaller values are rejected.
    """
    alpha = float(alpha)
    if math.isnan(alpha) or math.isinf(alpha) or alpha <= 1.0:
        raise ValidationError(f"alpha must be finite and > 1, got {alpha}")
    K = _check_size(K, "K")
    L = _check_size(L, "L")
    if L > K:
        raise ValidationError(f"L={L} must not exceed K={K}")
    budget = float(budget)
    if not math.isfinite(budget) or budget <= 0.0:
        raise ValidationError(f"budget must be positive, got {budget}")
    return budget * _geometric_sum(alpha, K) / _geometric_sum(alpha, L)


def coefficient_table(
    kind: str, alphas: Sequence[float], K: int, L: int
) -> list[tuple[float, int, int, float]]:
    """Rows of ``(alpha, K, L, coefficient)`` over a grid of alphas."""
    if kind == "greedy":
        fn = greedy_bound_coefficient
    elif kind == "degree-gap":
        fn = degree_gap_coefficient
    else:
        raise ValidationError(f"unknown table kind: {kind!r}")
    return [(float(a), K, L, fn(a, K, L)) for a in alphas]


# ---------------------------------------------------------------------------
# measured curvature


@dataclass(frozen=True)
class AlphaEstimate:
    """A measured curvature ratio with the chain that attained it.

    ``alpha`` is the largest consecutive-gain ratio observed: the
    smallest value for which every recorded step satisfies
    ``gain[k+1] <= alpha * gain[k]``.  It may be below 1 (submodular
    behavior) or ``inf`` (a positive gain after a zero gain, reported by
    ``unbounded``).  The witness records the target node, the ordered
    picks, and the gain sequence of the chain containing the maximum.
    """

    alpha: float
    witness_target: int
    witness_path: tuple[int, ...]
    witness_increments: tuple[float, ...]

    @property
    def unbounded(self) -> bool:
        return math.isinf(self.alpha)


def _chain_ratios(increments: Sequence[float]) -> list[float]:
    out = []
    for prev, nxt in zip(increments, increments[1:]):
        if prev == 0.0:
            out.append(1.0 if nxt == 0.0 else math.inf)
        else:
            out.append(nxt / prev)
    return out


class _AlphaTracker:
    def __init__(self) -> None:
        self.alpha = -math.inf
        self.target = 0
        self.path: tuple[int, ...] = ()
        self.increments: tuple[float, ...] = ()

    def offer(self, target: int, path: Sequence[int], increments: Sequence[float]):
        ratios = _chain_ratios(increments)
        if ratios and max(ratios) > self.alpha:
            self.alpha = max(ratios)
            self.target = target
            self.path = tuple(path)
            self.increments = tuple(increments)

    def estimate(self) -> AlphaEstimate:
        if self.alpha == -math.inf:
            # no chain long enough to yield a ratio; 1 asserts nothing
            return AlphaEstimate(1.0, 0, (), ())
        return AlphaEstimate(self.alpha, self.target, self.path, self.increments)


def _greedy_chain(
    evaluator: DIEvaluator,
    target: int,
    pool: Sequence[int],
    prefix: Sequence[int],
) -> tuple[list[int], list[float]]:
    """Order ``pool`` greedily after ``prefix``; return picks and gains."""
    chosen = list(prefix)
    remaining = sorted(set(pool))
    picks: list[int] = []
    gains: list[float] = []
    while remaining:
        best_j, best_v = None, -math.inf
        cond = tuple(sorted(chosen))
        for j in remaining:
            v = evaluator.increment(target, (j,), cond)
            if v > best_v:
                best_j, best_v = j, v
        picks.append(best_j)
        gains.append(best_v)
        chosen.append(best_j)
        remaining.remove(best_j)
    return picks, gains


def empirical_alpha(
    evaluator: DIEvaluator, target: int, pool: Sequence[int]
) -> AlphaEstimate:
    """Curvature measured along one greedy ordering of ``pool``.

    The pool (at least two processes, none equal to the target) is
    ordered greedily for the target; the estimate is the maximum
    consecutive-gain ratio along that single chain.
    """
    m = evaluator.m
    _check_process(target, m, "target")
    members = sorted(set(pool))
    if len(members) < 2:
        raise ValidationError(f"pool must contain at least 2 processes, got {pool!r}")
    for j in members:
        _check_process(j, m, "pool entry")
        if j == target:
            raise ValidationError(f"pool must not contain the target {target}")
    tracker = _AlphaTracker()
    picks, gains = _greedy_chain(evaluator, target, members, ())
    tracker.offer(target, picks, gains)
    return tracker.estimate()


def network_empirical_alpha(evaluator: DIEvaluator) -> AlphaEstimate:
    """The largest per-node curvature, each node measured over all others."""
    m = evaluator.m
    if m < 3:
        raise ValidationError(f"need m >= 3 for a ratio, got m={m}")
    tracker = _AlphaTracker()
    for target in range(1, m + 1):
        pool = [j for j in range(1, m + 1) if j != target]
        picks, gains = _greedy_chain(evaluator, target, pool, ())
        tracker.offer(target, picks, gains)
    return tracker.estimate()


def bound_witness_alpha(
    evaluator: DIEvaluator,
    optimal: ParentAssignment,
    greedy_orders: Sequence[Sequence[int]],
) -> AlphaEstimate:
    """Curvature measured over exactly the chains the greedy guarantee uses.

    For each node and each greedy prefix length l (0 up to one less than
    the greedy order's length), the members of the node's optimal set not
    already in the prefix are ordered greedily after it and the chain's
    consecutive-gain ratios are recorded.  The maximum over all chains is
    the smallest alpha making every inequality in the guarantee's proof
    hold, so a coefficient computed from this estimate never overshoots
    the realized greedy-to-optimal ratio.
    """
    m = evaluator.m
    if optimal.m != m:
        raise ValidationError(f"assignment has m={optimal.m} but evaluator has m={m}")
    if len(greedy_orders) != m:
        raise ValidationError(f"expected {m} greedy orders, got {len(greedy_orders)}")
    tracker = _AlphaTracker()
    for target in range(1, m + 1):
        order = list(greedy_orders[target - 1])
        opt = set(optimal.members_of(target))
        for l in range(len(order)):
            prefix = order[:l]
            pool = sorted(opt - set(prefix))
            if len(pool) < 2:
                continue
            picks, gains = _greedy_chain(evaluator, target, pool, prefix)
            tracker.offer(target, list(prefix) + picks, gains)
    return tracker.estimate()
