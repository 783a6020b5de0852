"""Ranked enumeration of the r best structures.

All variants share one pooling scheme: a seed solution enters a priority
queue; whenever a solution is emitted, a branching rule generates nearby
candidates that re-enter the queue, with a seen-set suppressing duplicate
assignments across the queue and the emitted list.  The queue orders by
score descending with deterministic tie keys, so runs are reproducible.

Branching rules differ per variant:

* unconstrained exact (:func:`top_r_general`): replace one node's parent
  set with its next-best candidate.  Every solution one step below an
  emitted one is generated, which makes the enumeration exact: the
  (l+1)-th best always differs from some better solution in exactly one
  parent set.
* tree-constrained exact (:func:`top_r_connected`): the same
  one-coordinate branching, run per candidate root over per-node
  candidate lists, with assignments filtered to those containing a
  spanning tree.  A score plateau is fully drained before anything below
  it is emitted, so the ranking stays exact under the tree constraint.
* greedy (:func:`top_r_greedy`): walk each node's greedy choice sequence
  depth-first, changing the most recently added parent first and backing
  up to earlier picks when alternatives run out.  The tree-constrained
  combination demotes the greedy set behind one tree edge (and every
  subset of edges currently inducing that same set) and re-runs the
  arborescence search.  Emission follows pool order, which here is not
  guaranteed globally sorted.
"""

from __future__ import annotations

import heapq
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from itertools import combinations
from math import comb

import numpy as np

from .arborescence import (
    EdgeWeights,
    augment_with_dummy_root,
    max_weight_arborescence,
)
from .errors import InfeasibleArborescenceError, ValidationError
from .estimation import DIEvaluator
from .structures import (
    DirectedInfoCache,
    ParentAssignment,
    ScoredApproximation,
    approximation_index,
    contains_spanning_arborescence,
)


@dataclass(frozen=True)
class TopR:
    """An ordered batch of enumerated solutions.

    ``truncated`` flags that a completeness cap (the bound on how many
    equal-weight edges are demoted together in the connected search) was
    hit, so ranks beyond the first may be incomplete.
    """

    solutions: tuple[ScoredApproximation, ...]
    truncated: bool = False

    def __iter__(self):
        return iter(self.solutions)

    def __len__(self) -> int:
        return len(self.solutions)

    def __getitem__(self, idx):
        return self.solutions[idx]


# ---------------------------------------------------------------------------
# unconstrained exact enumeration


def _node_candidate_lists(
    cache: DirectedInfoCache, K: int
) -> tuple[list[list[tuple[tuple[int, ...], float]]], list[dict[tuple[int, ...], int]]]:
    """Per node: all size-K sets sorted best-first, plus position maps.

    Sorting is by value descending with the smaller set index first among
    equal values, the same total order used everywhere else.
    """
    m = cache.m
    lists = []
    positions = []
    for i in range(1, m + 1):
        others = [j for j in range(1, m + 1) if j != i]
        cands = [(ms, cache.get(i, ms)) for ms in combinations(others, K)]
        cands.sort(key=lambda mv: (-mv[1], mv[0]))
        lists.append(cands)
        positions.append({ms: p for p, (ms, _) in enumerate(cands)})
    return lists, positions


def _score_at(
    lists: list[list[tuple[tuple[int, ...], float]]], pos: tuple[int, ...]
) -> float:
    return sum(lists[i][p][1] for i, p in enumerate(pos))


def top_r_general(cache: DirectedInfoCache, K: int, r: int) -> TopR:
    """The exact r best unconstrained structures, best first.

    Output order is score descending, ties by ascending assignment index;
    it matches a full enumeration sort exactly.
    """
    m = cache.m
    if K < 0 or K >= m:
        raise ValidationError(f"degree too large: K={K} with m={m}")
    space = comb(m - 1, K) ** m
    if not 1 <= r <= space:
        raise ValidationError(f"r={r} out of range 1..{space}")

    lists, _ = _node_candidate_lists(cache, K)
    seed = tuple(0 for _ in range(m))

    def as_assignment(pos: tuple[int, ...]) -> ParentAssignment:
        return ParentAssignment.from_lists(
            [lists[i][p][0] for i, p in enumerate(pos)]
        )

    heap: list[tuple[float, int, tuple[int, ...]]] = []
    seed_assignment = as_assignment(seed)
    heapq.heappush(
        heap, (-_score_at(lists, seed), approximation_index(seed_assignment), seed)
    )
    seen = {seed}
    emitted: list[ScoredApproximation] = []
    while heap and len(emitted) < r:
        neg_score, _, pos = heapq.heappop(heap)
        emitted.append(ScoredApproximation(as_assignment(pos), -neg_score))
        for i in range(m):
            if pos[i] + 1 < len(lists[i]):
                nxt = pos[:i] + (pos[i] + 1,) + pos[i + 1:]
                if nxt in seen:
                    continue
                seen.add(nxt)
                heapq.heappush(
                    heap,
                    (
                        -_score_at(lists, nxt),
                        approximation_index(as_assignment(nxt)),
                        nxt,
                    ),
                )
    return TopR(tuple(emitted))


def get_new_solutions(
    cache: DirectedInfoCache, K: int, seed: ParentAssignment
) -> tuple[ScoredApproximation, ...]:
    """One branch step: per node, swap in the next-best parent set.

    For each node in turn the seed's set is replaced by the best strictly
    worse candidate (worse meaning lower value, or equal value with a
    larger set index).  Nodes already at their worst candidate contribute
    nothing.  Results come back in node order.
    """
    m = cache.m
    if seed.m != m:
        raise ValidationError(f"seed has m={seed.m} but cache has m={m}")
    lists, positions = _node_candidate_lists(cache, K)
    out: list[ScoredApproximation] = []
    for i in range(m):
        ms = seed.members_of(i + 1)
        if len(ms) != K:
            raise ValidationError(
                f"seed parent set for node {i + 1} has size {len(ms)}, expected {K}"
            )
        p = positions[i].get(ms)
        if p is None:
            raise ValidationError(f"seed set {ms} unknown for node {i + 1}")
        if p + 1 >= len(lists[i]):
            continue
        members = [seed.members_of(k + 1) for k in range(m)]
        members[i] = lists[i][p + 1][0]
        assignment = ParentAssignment.from_lists(members)
        pos = tuple(
            positions[k][assignment.members_of(k + 1)] for k in range(m)
        )
        out.append(ScoredApproximation(assignment, _score_at(lists, pos)))
    return tuple(out)


# ---------------------------------------------------------------------------
# greedy choice sequences walked depth-first


def _ranked_candidates(
    evaluator: DIEvaluator, target: int, avail: set[int], prefix: Sequence[int]
) -> list[int]:
    cond = tuple(sorted(prefix))
    scored = sorted(
        (-evaluator.increment(target, (j,), cond), j) for j in avail
    )
    return [j for _, j in scored]


def _initial_state(
    evaluator: DIEvaluator, target: int, length: int, pinned: tuple[int, ...]
) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """All-greedy state: pinned picks first, then rank-0 choices."""
    m = evaluator.m
    if length > m - 1:
        raise ValidationError(f"degree too large: L={length} with m={m}")
    choices = list(pinned)
    avail = set(range(1, m + 1)) - {target} - set(pinned)
    while len(choices) < length:
        ranked = _ranked_candidates(evaluator, target, avail, choices)
        choices.append(ranked[0])
        avail.discard(ranked[0])
    return tuple(choices), tuple([0] * length)


def _dfs_successor(
    evaluator: DIEvaluator,
    target: int,
    choices: tuple[int, ...],
    ranks: tuple[int, ...],
    n_pinned: int,
) -> tuple[tuple[int, ...], tuple[int, ...]] | None:
    """The next state in depth-first order over greedy choice sequences.

    Advancing a slot moves it to the next-ranked candidate; deeper slots
    restart greedily over what remains.  Candidates outranking an earlier
    slot's choice are excluded from deeper slots, since sets containing
    them were already enumerated under that earlier branch; this makes the
    walk visit every parent set exactly once.
    """
    length = len(choices)
    m = evaluator.m
    # forward pass: the available pool entering each slot
    avails: list[set[int]] = []
    avail = set(range(1, m + 1)) - {target}
    for k in range(length):
        avails.append(set(avail))
        if k < n_pinned:
            avail.discard(choices[k])
        else:
            ranked = _ranked_candidates(evaluator, target, avail, choices[:k])
            avail -= set(ranked[: ranks[k] + 1])

    for k in reversed(range(n_pinned, length)):
        ranked = _ranked_candidates(evaluator, target, avails[k], choices[:k])
        nr = ranks[k] + 1
        while nr < len(ranked):
            if len(avails[k]) - (nr + 1) >= length - k - 1:
                new_choices = list(choices[:k]) + [ranked[nr]]
                new_ranks = list(ranks[:k]) + [nr]
                pool = avails[k] - set(ranked[: nr + 1])
                for _ in range(k + 1, length):
                    deeper = _ranked_candidates(
                        evaluator, target, pool, new_choices
                    )
                    new_choices.append(deeper[0])
                    new_ranks.append(0)
                    pool.discard(deeper[0])
                return tuple(new_choices), tuple(new_ranks)
            nr += 1
    return None


class _GreedyEdgeList:
    """Lazily materialized alternatives for one pinned-first-parent edge."""

    def __init__(self, evaluator: DIEvaluator, target: int, pin: int, length: int):
        self._evaluator = evaluator
        self._target = target
        state = _initial_state(evaluator, target, length, (pin,))
        self._states = [state]
        self._entries = [self._entry(state)]
        self._exhausted = False

    def _entry(self, state) -> tuple[tuple[int, ...], float]:
        members = tuple(sorted(state[0]))
        return members, self._evaluator.set_value(self._target, members)

    def get(self, level: int) -> tuple[tuple[int, ...], float] | None:
        while len(self._entries) <= level and not self._exhausted:
            nxt = _dfs_successor(
                self._evaluator, self._target, *self._states[-1], n_pinned=1
            )
            if nxt is None:
                self._exhausted = True
                break
            self._states.append(nxt)
            self._entries.append(self._entry(nxt))
        return self._entries[level] if level < len(self._entries) else None


# ---------------------------------------------------------------------------
# tree-constrained demotion engine (greedy edge lists)


@dataclass
class _ConnectedEntry:
    assignment: ParentAssignment
    score: float
    root: int
    tree: tuple[tuple[int, int], ...]  # real (parent, child) edges
    levels: dict[tuple[int, int], int] = field(repr=False)


class _ConnectedEngine:
    """Pool-and-branch over demotion levels of edge-constrained sets."""

    def __init__(
        self,
        m: int,
        edge_lists: dict[tuple[int, int], object],
        root_set_fn: Callable[[int], tuple[tuple[int, ...], float]] | None,
        demote_cap: int,
    ):
        self.m = m
        self.edge_lists = edge_lists
        self.root_set_fn = root_set_fn  # None means roots keep empty sets
        self.demote_cap = demote_cap
        self.truncated = False
        self._root_sets: dict[int, tuple[tuple[int, ...], float]] = {}

    def _root_set(self, root: int) -> tuple[tuple[int, ...], float]:
        if self.root_set_fn is None:
            return (), 0.0
        if root not in self._root_sets:
            self._root_sets[root] = self.root_set_fn(root)
        return self._root_sets[root]

    def solve(self, levels: dict[tuple[int, int], int]) -> _ConnectedEntry:
        m = self.m
        w = np.zeros((m, m))
        allowed = np.zeros((m, m), dtype=bool)
        current: dict[tuple[int, int], tuple[tuple[int, ...], float]] = {}
        for (i, j), level in levels.items():
            entry = self.edge_lists[(i, j)].get(level)
            if entry is None:
                continue
            current[(i, j)] = entry
            w[j - 1, i - 1] = entry[1]
            allowed[j - 1, i - 1] = True
        weights = EdgeWeights(w, allowed)

        if self.root_set_fn is not None:
            tree = max_weight_arborescence(augment_with_dummy_root(weights), root=0)
            dummy_children = sorted(c for c, p in tree.parent.items() if p == 0)
            if len(dummy_children) != 1:
                raise InfeasibleArborescenceError(
                    "demotions left a node without usable in-edges"
                )
            root = dummy_children[0]
            real = tuple(sorted((p, c) for c, p in tree.parent.items() if p != 0))
        else:
            tree = max_weight_arborescence(weights)
            root = tree.root
            real = tuple(sorted((p, c) for c, p in tree.parent.items()))

        lists = []
        score = 0.0
        parent_of = dict(tree.parent)
        for i in range(1, m + 1):
            if i == root:
                members, value = self._root_set(i)
            else:
                members, value = current[(i, parent_of[i])]
            lists.append(members)
            score += value
        return _ConnectedEntry(
            ParentAssignment.from_lists(lists), score, root, real, dict(levels)
        )

    def branches(self, entry: _ConnectedEntry):
        """Candidate entries one demotion step away from ``entry``."""
        for p, child in entry.tree:
            target_set = entry.assignment.members_of(child)
            same = [
                j
                for j in range(1, self.m + 1)
                if j != child
                and (got := self.edge_lists[(child, j)].get(
                    entry.levels[(child, j)]
                ))
                is not None
                and got[0] == target_set
            ]
            if len(same) > self.demote_cap:
                keep = [p] + [j for j in same if j != p][: self.demote_cap - 1]
                same = sorted(keep)
                self.truncated = True
            others = [j for j in same if j != p]
            for mask in range(1 << len(others)):
                subset = [p] + [
                    others[b] for b in range(len(others)) if mask >> b & 1
                ]
                levels = dict(entry.levels)
                for j in subset:
                    levels[(child, j)] += 1
                # demote further while the result collapses back onto the
                # popped assignment (weight ties can hide one level down)
                while True:
                    try:
                        candidate = self.solve(levels)
                    except InfeasibleArborescenceError:
                        candidate = None
                    if candidate is None:
                        break
                    if candidate.assignment != entry.assignment:
                        break
                    exhausted = True
                    levels = dict(levels)
                    for j in subset:
                        if self.edge_lists[(child, j)].get(
                            levels[(child, j)] + 1
                        ) is not None:
                            exhausted = False
                        levels[(child, j)] += 1
                    if exhausted:
                        candidate = None
                        break
                if candidate is not None:
                    yield candidate

    def run(self, r: int) -> TopR:
        base = {
            (i, j): 0
            for i in range(1, self.m + 1)
            for j in range(1, self.m + 1)
            if j != i
        }
        seed = self.solve(base)
        heap: list[tuple[float, tuple, int]] = []
        store: dict[int, _ConnectedEntry] = {}
        seen = {seed.assignment.canonical_key()}
        counter = 0
        store[counter] = seed
        heapq.heappush(heap, (-seed.score, seed.assignment.canonical_key(), counter))
        counter += 1
        emitted: list[ScoredApproximation] = []
        while heap and len(emitted) < r:
            neg_score, _, idx = heapq.heappop(heap)
            entry = store.pop(idx)
            emitted.append(ScoredApproximation(entry.assignment, -neg_score))
            for cand in self.branches(entry):
                key = cand.assignment.canonical_key()
                if key in seen:
                    continue
                seen.add(key)
                store[counter] = cand
                heapq.heappush(heap, (-cand.score, key, counter))
                counter += 1
        return TopR(tuple(emitted), truncated=self.truncated)


def top_r_connected(
    cache: DirectedInfoCache,
    K: int,
    r: int,
    root_has_parents: bool = False,
) -> TopR:
    """The r best tree-constrained structures, best first.

    For each candidate root the product lattice of per-node candidate
    sets is walked in score order with the same one-coordinate branching
    the unconstrained enumeration uses, keeping assignments that contain
    a spanning tree.  Walking every lattice point at or above a score
    before moving below it makes the ranking exact; equal scores order by
    the canonical assignment key.  The output may be shorter than ``r``
    when the class is exhausted.  Worst case (members sparse among high
    scores) the walk degrades to full enumeration of the lattice.
    """
    m = cache.m
    if K < 1 or K >= m:
        raise ValidationError(f"degree too large: K={K} with m={m}")
    space = comb(m - 1, K) ** m
    if not 1 <= r <= space:
        raise ValidationError(f"r={r} out of range 1..{space}")

    lists, _ = _node_candidate_lists(cache, K)

    # pseudo-root 0 means every node keeps K parents and any spanning
    # tree qualifies; otherwise the root node itself takes the empty set
    roots = [0] if root_has_parents else list(range(1, m + 1))
    others = {rt: [i for i in range(1, m + 1) if i != rt] for rt in roots}

    def score_of(rt: int, pos: tuple[int, ...]) -> float:
        return sum(lists[i - 1][p][1] for i, p in zip(others[rt], pos))

    def as_assignment(rt: int, pos: tuple[int, ...]) -> ParentAssignment:
        by_node = {i: lists[i - 1][p][0] for i, p in zip(others[rt], pos)}
        return ParentAssignment.from_lists(
            [by_node.get(i, ()) for i in range(1, m + 1)]
        )

    heap: list[tuple[float, int, tuple[int, ...]]] = []
    seen: dict[int, set[tuple[int, ...]]] = {rt: set() for rt in roots}
    for rt in roots:
        pos0 = tuple(0 for _ in others[rt])
        seen[rt].add(pos0)
        heapq.heappush(heap, (-score_of(rt, pos0), rt, pos0))

    emitted: list[ScoredApproximation] = []
    block: list[tuple[tuple, ScoredApproximation]] = []
    block_score: float | None = None

    def flush() -> None:
        block.sort(key=lambda row: row[0])
        emitted.extend(sol for _, sol in block)
        block.clear()

    while heap:
        neg, rt, pos = heapq.heappop(heap)
        score = -neg
        # children never beat their parent, so once the popped score drops
        # the finished plateau holds every solution at that score
        if block and score != block_score:
            flush()
            if len(emitted) >= r:
                break
        block_score = score
        assignment = as_assignment(rt, pos)
        if contains_spanning_arborescence(
            assignment, None if root_has_parents else rt
        ):
            block.append(
                (assignment.canonical_key(), ScoredApproximation(assignment, score))
            )
        for c, node in enumerate(others[rt]):
            if pos[c] + 1 < len(lists[node - 1]):
                nxt = pos[:c] + (pos[c] + 1,) + pos[c + 1:]
                if nxt not in seen[rt]:
                    seen[rt].add(nxt)
                    heapq.heappush(heap, (-score_of(rt, nxt), rt, nxt))
    if block:
        flush()
    return TopR(tuple(emitted[:r]))


# ---------------------------------------------------------------------------
# greedy enumeration


def top_r_greedy(
    evaluator: DIEvaluator,
    L: int,
    r: int,
    connected: bool = False,
    root_has_parents: bool = False,
    demote_cap: int = 12,
) -> TopR:
    """r structures enumerated through greedy choice sequences.

    The first solution is the greedy one; later solutions come from
    depth-first alternatives (change the last greedy pick first).  The
    pool still emits by score among generated candidates, so the score
    sequence may jump non-monotonically; output is pool order, not a
    certified global ranking.  With ``connected`` the same walk drives
    the edge-demotion search of :func:`top_r_connected`.
    """
    m = evaluator.m
    if L < 1 or L >= m:
        raise ValidationError(f"degree too large: L={L} with m={m}")
    space = comb(m - 1, L) ** m
    if not 1 <= r <= space:
        raise ValidationError(f"r={r} out of range 1..{space}")

    if connected:
        edge_lists = {
            (i, j): _GreedyEdgeList(evaluator, i, j, L)
            for i in range(1, m + 1)
            for j in range(1, m + 1)
            if j != i
        }
        root_set_fn = None
        if root_has_parents:
            def root_set_fn(root: int) -> tuple[tuple[int, ...], float]:
                choices, _ = _initial_state(evaluator, root, L, ())
                members = tuple(sorted(choices))
                return members, evaluator.set_value(root, members)

        engine = _ConnectedEngine(m, edge_lists, root_set_fn, demote_cap)
        return engine.run(r)

    states = tuple(_initial_state(evaluator, i, L, ()) for i in range(1, m + 1))

    def as_solution(sts) -> ScoredApproximation:
        lists = [tuple(sorted(st[0])) for st in sts]
        assignment = ParentAssignment.from_lists(lists)
        score = sum(
            evaluator.set_value(i + 1, lists[i]) for i in range(m)
        )
        return ScoredApproximation(assignment, score)

    seed_sol = as_solution(states)
    heap: list[tuple[float, int, int]] = []
    store: dict[int, tuple] = {}
    counter = 0
    seen = {seed_sol.assignment.canonical_key()}
    store[counter] = (states, seed_sol)
    heapq.heappush(
        heap, (-seed_sol.score, approximation_index(seed_sol.assignment), counter)
    )
    counter += 1
    emitted: list[ScoredApproximation] = []
    while heap and len(emitted) < r:
        _, _, idx = heapq.heappop(heap)
        sts, sol = store.pop(idx)
        emitted.append(sol)
        for i in range(m):
            nxt = _dfs_successor(evaluator, i + 1, *sts[i], n_pinned=0)
            if nxt is None:
                continue
            new_states = sts[:i] + (nxt,) + sts[i + 1:]
            new_sol = as_solution(new_states)
            key = new_sol.assignment.canonical_key()
            if key in seen:
                continue
            seen.add(key)
            store[counter] = (new_states, new_sol)
            heapq.heappush(
                heap,
                (-new_sol.score, approximation_index(new_sol.assignment), counter),
            )
            counter += 1
    return TopR(tuple(emitted))
