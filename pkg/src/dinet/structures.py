"""Core structures for bounded in-degree network approximation.

Processes are identified by 1-based integer indices ``1..m``.  A candidate
structure assigns every process a parent set; the quality of a structure is
the sum of cached directed information values, one per node.  Everything in
this module is pure bookkeeping: validation, scoring, combinatorial
indexing of parent sets and whole assignments, and serialization to JSON
and GraphViz DOT.

All public types are immutable after construction and safe to share across
threads.
"""

from __future__ import annotations

import json
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass, field
from math import comb

from .errors import UncachedParentSetError, ValidationError

ProcessIndex = int


def _check_process(i: int, m: int, what: str = "process index") -> None:
    if not isinstance(i, int) or isinstance(i, bool):
        raise ValidationError(f"{what} must be an integer, got {i!r}")
    if not 1 <= i <= m:
        raise ValidationError(f"{what} {i} out of range 1..{m}")


@dataclass(frozen=True)
class ParentSet:
    """A target process together with its chosen set of parent processes.

    ``members`` is kept strictly ascending; the target itself can never be
    a member.  Instances are hashable and compare by value.
    """

    target: ProcessIndex
    members: tuple[ProcessIndex, ...]

    def __post_init__(self) -> None:
        members = tuple(sorted(self.members))
        if any(not isinstance(j, int) or isinstance(j, bool) for j in members):
            raise ValidationError(f"parent set members must be integers: {members!r}")
        for a, b in zip(members, members[1:]):
            if a == b:
                raise ValidationError(f"duplicate parent {a} for target {self.target}")
        if self.target in members:
            raise ValidationError(f"target {self.target} cannot be its own parent")
        if members and members[0] < 1:
            raise ValidationError(f"parent indices must be >= 1: {members!r}")
        object.__setattr__(self, "members", members)

    @property
    def size(self) -> int:
        return len(self.members)

    def __iter__(self) -> Iterator[int]:
        return iter(self.members)

    def __contains__(self, j: int) -> bool:
        return j in self.members


@dataclass(frozen=True)
class ParentAssignment:
    """One parent set per process: a complete candidate structure.

    ``parents[i - 1]`` is the parent set of process ``i``.  The induced
    graph has an edge ``j -> i`` for every ``j`` in ``parents[i - 1]``.
    """

    parents: tuple[ParentSet, ...]

    def __post_init__(self) -> None:
        parents = tuple(self.parents)
        m = len(parents)
        if m == 0:
            raise ValidationError("assignment needs at least one process")
        for i, ps in enumerate(parents, start=1):
            if not isinstance(ps, ParentSet):
                raise ValidationError(f"parents[{i - 1}] is not a ParentSet")
            if ps.target != i:
                raise ValidationError(
                    f"parents[{i - 1}] has target {ps.target}, expected {i}"
                )
            for j in ps.members:
                _check_process(j, m, f"parent of {i}")
        object.__setattr__(self, "parents", parents)

    @classmethod
    def from_lists(cls, members_per_node: Sequence[Iterable[int]]) -> "ParentAssignment":
        """Build from one iterable of parent indices per node, in node order."""
        return cls(
            tuple(
                ParentSet(i, tuple(ms))
                for i, ms in enumerate(members_per_node, start=1)
            )
        )

    @property
    def m(self) -> int:
        return len(self.parents)

    def members_of(self, i: int) -> tuple[int, ...]:
        _check_process(i, self.m)
        return self.parents[i - 1].members

    def uniform_degree(self) -> int | None:
        """The common parent set size, or None if sizes differ."""
        sizes = {ps.size for ps in self.parents}
        return sizes.pop() if len(sizes) == 1 else None

    def root(self) -> int | None:
        """The unique node with an empty parent set, if exactly one exists."""
        empties = [ps.target for ps in self.parents if ps.size == 0]
        return empties[0] if len(empties) == 1 else None

    def canonical_key(self) -> tuple[tuple[int, ...], ...]:
        """A deterministic total-order key: the tuple of member tuples."""
        return tuple(ps.members for ps in self.parents)

    def edges(self) -> list[tuple[int, int]]:
        """All edges ``(source, destination)``, sorted."""
        out = [
            (j, ps.target)
            for ps in self.parents
            for j in ps.members
        ]
        out.sort()
        return out

    def to_json_dict(self) -> dict:
        degree = self.uniform_degree()
        if degree == 0 and self.m > 1:
            degree = None
        sizes = {ps.size for ps in self.parents if ps.size > 0}
        if degree is None and len(sizes) == 1 and self.root() is not None:
            # connected-style structure: one empty root, uniform elsewhere
            degree = sizes.pop()
        return {
            "m": self.m,
            "K": degree,
            "parents": [list(ps.members) for ps in self.parents],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2) + "\n"

    @classmethod
    def from_json_dict(cls, obj: dict) -> "ParentAssignment":
        try:
            m = obj["m"]
            lists = obj["parents"]
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed assignment JSON: missing {exc}") from exc
        if not isinstance(lists, list) or len(lists) != m:
            raise ValidationError("assignment JSON: 'parents' length must equal m")
        return cls.from_lists(lists)

    @classmethod
    def from_json(cls, text: str) -> "ParentAssignment":
        return cls.from_json_dict(json.loads(text))

    def to_dot(self, root: int | None = None) -> str:
        """GraphViz DOT rendering with one edge per parent relation."""
        lines = ["digraph approximation {"]
        for i in range(1, self.m + 1):
            attrs = ' [shape=doublecircle]' if i == root else ""
            lines.append(f'  x{i} [label="X{i}"]{attrs};')
        for j, i in self.edges():
            lines.append(f"  x{j} -> x{i};")
        lines.append("}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class ScoredApproximation:
    """A candidate structure together with its total directed information."""

    assignment: ParentAssignment
    score: float


class DirectedInfoCache:
    """Directed information values keyed by (target, parent set members).

    Values are per-time-step rates in nats.  The cache is append-only;
    reads of missing keys raise :class:`UncachedParentSetError` naming the
    target and set.  ``K`` records the nominal parent set size the cache
    was built for, but entries of other sizes may be stored to support
    per-node degree vectors.
    """

    def __init__(self, m: int, K: int) -> None:
        if m < 1:
            raise ValidationError(f"m must be >= 1, got {m}")
        if K < 0 or K >= m:
            raise ValidationError(f"degree too large: K={K} with m={m}")
        self.m = m
        self.K = K
        self._entries: dict[tuple[int, tuple[int, ...]], float] = {}

    def put(self, target: int, members: Iterable[int], value: float) -> None:
        _check_process(target, self.m, "target")
        key = tuple(sorted(members))
        for j in key:
            _check_process(j, self.m, f"parent of {target}")
        if target in key:
            raise ValidationError(f"target {target} cannot be its own parent")
        self._entries[(target, key)] = float(value)

    def get(self, target: int, members: Iterable[int]) -> float:
        key = tuple(sorted(members))
        try:
            return self._entries[(target, key)]
        except KeyError:
            raise UncachedParentSetError(target, key) from None

    def __contains__(self, key: tuple[int, Iterable[int]]) -> bool:
        target, members = key
        return (target, tuple(sorted(members))) in self._entries

    def __len__(self) -> int:
        return len(self._entries)

    def items(self) -> list[tuple[int, tuple[int, ...], float]]:
        """All entries as (target, members, value), deterministically sorted."""
        return sorted(
            (t, ms, v) for (t, ms), v in self._entries.items()
        )

    def to_json_dict(self) -> dict:
        return {
            "m": self.m,
            "K": self.K,
            "entries": [
                {"target": t, "set": list(ms), "value": v}
                for t, ms, v in self.items()
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2) + "\n"

    @classmethod
    def from_json_dict(cls, obj: dict) -> "DirectedInfoCache":
        try:
            cache = cls(obj["m"], obj["K"])
            for e in obj["entries"]:
                cache.put(e["target"], e["set"], e["value"])
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed cache JSON: {exc}") from exc
        return cache

    @classmethod
    def from_json(cls, text: str) -> "DirectedInfoCache":
        return cls.from_json_dict(json.loads(text))


def total_score(cache: DirectedInfoCache, assignment: ParentAssignment) -> float:
    """Sum of cached values over all nodes, in ascending node order.

    Empty parent sets contribute exactly 0.0 without a cache lookup, since
    conditioning on nothing carries no information.  A missing entry for a
    nonempty set raises :class:`UncachedParentSetError`.
    """
    if assignment.m != cache.m:
        raise ValidationError(
            f"assignment has m={assignment.m} but cache has m={cache.m}"
        )
    score = 0.0
    for ps in assignment.parents:
        if ps.size:
            score += cache.get(ps.target, ps.members)
    return score


def contains_spanning_arborescence(
    assignment: ParentAssignment, root: int | None = None
) -> bool:
    """Whether the induced graph contains a directed spanning tree.

    Edges point from parent to child.  With ``root`` given, every node must
    be reachable from it; otherwise any node may serve as the root.
    """
    m = assignment.m
    children: list[list[int]] = [[] for _ in range(m + 1)]
    for ps in assignment.parents:
        for j in ps.members:
            children[j].append(ps.target)

    def reaches_all(r: int) -> bool:
        seen = {r}
        stack = [r]
        while stack:
            u = stack.pop()
            for v in children[u]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        return len(seen) == m

    if root is not None:
        _check_process(root, m, "root")
        return reaches_all(root)
    # only nodes with no in-edges can root a spanning tree; if none exists,
    # any node on a source cycle works, so fall back to trying all
    candidates = [
        i for i in range(1, m + 1) if not assignment.members_of(i)
    ] or list(range(1, m + 1))
    return any(reaches_all(r) for r in candidates)


def parent_set_index(m: int, target: int, members: Iterable[int]) -> int:
    """Zero-based lexicographic rank of a parent set among same-size sets.

    The target is removed from the universe by sliding indices above it
    down one, then the rank of the resulting subset of ``{1..m-1}`` is
    computed recursively: count the sets with a smaller minimum, then rank
    the remainder within the reduced universe.
    """
    _check_process(target, m, "target")
    ps = ParentSet(target, tuple(members))
    for j in ps.members:
        _check_process(j, m, f"parent of {target}")
    remapped = [j - 1 if j > target else j for j in ps.members]
    return _subset_rank(m, remapped)


def _subset_rank(m: int, idx: list[int]) -> int:
    """Rank of the strictly ascending subset ``idx`` of ``{1..m-1}``."""
    K = len(idx)
    if K == 0:
        return 0
    if K == 1:
        return idx[0] - 1
    first = idx[0]
    cnt = sum(comb(m - l, K - 1) for l in range(2, first + 1))
    shifted = [j - first for j in idx[1:]]
    return cnt + _subset_rank(m - first, shifted)


def parent_set_from_index(m: int, target: int, K: int, rank: int) -> tuple[int, ...]:
    """Inverse of :func:`parent_set_index` for size-``K`` sets."""
    total = comb(m - 1, K)
    if not 0 <= rank < total:
        raise ValidationError(f"rank {rank} out of range for C({m - 1},{K})={total}")
    universe = [j for j in range(1, m + 1) if j != target]
    chosen: list[int] = []
    lo = 0  # position in universe of the smallest remaining candidate
    remaining = rank
    for slot in range(K):
        for pos in range(lo, len(universe)):
            block = comb(len(universe) - pos - 1, K - slot - 1)
            if remaining < block:
                chosen.append(universe[pos])
                lo = pos + 1
                break
            remaining -= block
    return tuple(chosen)


def all_parent_sets(m: int, target: int, K: int) -> Iterator[tuple[int, ...]]:
    """All size-``K`` parent sets for ``target``, in index order."""
    from itertools import combinations

    universe = [j for j in range(1, m + 1) if j != target]
    return iter(combinations(universe, K))


def approximation_index(assignment: ParentAssignment) -> int:
    """One-based mixed-radix index of a uniform-degree assignment.

    Node ``i`` contributes its parent set rank times ``C(m-1, K)**(i-1)``.
    The result ranges over ``1 .. C(m-1, K)**m`` and is a bijection on the
    set of uniform-degree assignments.  Python integers keep this exact at
    any scale.
    """
    K = assignment.uniform_degree()
    if K is None:
        raise ValidationError(
            "approximation_index requires all parent sets to share one size"
        )
    m = assignment.m
    radix = comb(m - 1, K)
    index = 1
    weight = 1
    for ps in assignment.parents:
        index += parent_set_index(m, ps.target, ps.members) * weight
        weight *= radix
    return index


def assignment_from_index(m: int, K: int, index: int) -> ParentAssignment:
    """Inverse of :func:`approximation_index`."""
    radix = comb(m - 1, K)
    total = radix**m
    if not 1 <= index <= total:
        raise ValidationError(f"index {index} out of range 1..{total}")
    rest = index - 1
    lists = []
    for target in range(1, m + 1):
        rest, rank = divmod(rest, radix)
        lists.append(parent_set_from_index(m, target, K, rank))
    return ParentAssignment.from_lists(lists)
