"""Maximum weight directed spanning trees (arborescences).

The solver is the classic cycle-contraction algorithm: greedily pick the
best in-edge per node, contract any cycle that forms, adjust the weights of
edges entering the cycle by the weight of the in-cycle edge they displace,
and recurse.  Everything is deterministic: among equal-weight choices the
smaller original ``(source, destination)`` pair wins, so equal-weight
inputs always reproduce the same tree.

Weights live in an :class:`EdgeWeights` table.  Forbidden edges are an
explicit mask, never a large negative float, so they can never be chosen
no matter how the finite weights scale.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleArborescenceError, ValidationError


class EdgeWeights:
    """Dense edge weight table over nodes ``first_node .. first_node+m-1``.

    ``weight(j, i)`` is the value of edge ``j -> i``.  Self-loops are always
    forbidden.  The table is immutable after construction.
    """

    def __init__(
        self,
        weights: np.ndarray,
        allowed: np.ndarray | None = None,
        first_node: int = 1,
    ) -> None:
        w = np.array(weights, dtype=float)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise ValidationError(f"weights must be square, got shape {w.shape}")
        if first_node not in (0, 1):
            raise ValidationError("first_node must be 0 or 1")
        m = w.shape[0]
        if allowed is None:
            mask = np.ones((m, m), dtype=bool)
        else:
            mask = np.array(allowed, dtype=bool)
            if mask.shape != w.shape:
                raise ValidationError("allowed mask shape must match weights")
        np.fill_diagonal(mask, False)
        if not np.all(np.isfinite(w[mask])):
            raise ValidationError("allowed edge weights must be finite")
        w.flags.writeable = False
        mask.flags.writeable = False
        self._w = w
        self._allowed = mask
        self.first_node = first_node

    @property
    def m(self) -> int:
        return self._w.shape[0]

    @property
    def nodes(self) -> range:
        return range(self.first_node, self.first_node + self.m)

    def _pos(self, node: int) -> int:
        if node not in self.nodes:
            raise ValidationError(f"node {node} out of range {self.nodes}")
        return node - self.first_node

    def weight(self, src: int, dst: int) -> float:
        return float(self._w[self._pos(src), self._pos(dst)])

    def is_allowed(self, src: int, dst: int) -> bool:
        return bool(self._allowed[self._pos(src), self._pos(dst)])

    def arcs(self) -> list[tuple[int, int, float]]:
        """All allowed arcs as ``(src, dst, weight)``, sorted by (src, dst)."""
        base = self.first_node
        out = []
        for a in range(self.m):
            for b in range(self.m):
                if self._allowed[a, b]:
                    out.append((a + base, b + base, float(self._w[a, b])))
        return out


def augment_with_dummy_root(weights: EdgeWeights) -> EdgeWeights:
    """Add node 0 with weight -1 edges to every real node and no in-edges.

    With nonnegative real weights an optimal arborescence rooted at 0 then
    uses exactly one dummy edge: swapping a second -1 edge for any real
    edge can only improve the total.
    """
    if weights.first_node != 1:
        raise ValidationError("weights already carry a dummy root")
    m = weights.m
    w = np.zeros((m + 1, m + 1))
    allowed = np.zeros((m + 1, m + 1), dtype=bool)
    w[1:, 1:] = weights._w
    allowed[1:, 1:] = weights._allowed
    w[0, 1:] = -1.0
    allowed[0, 1:] = True
    return EdgeWeights(w, allowed, first_node=0)


@dataclass(frozen=True)
class Arborescence:
    """A spanning tree result: every node but the root has one parent."""

    root: int
    parent: dict[int, int]
    total_weight: float

    def edges(self) -> list[tuple[int, int]]:
        return sorted((p, c) for c, p in self.parent.items())


@dataclass(frozen=True)
class _Arc:
    src: int
    dst: int
    w: float
    key: tuple[int, int]  # original (src, dst), used for deterministic ties
    # for arcs touching a contracted node: the one-level-down arc they wrap
    # and, for arcs entering the cycle, the cycle node they enter at
    orig: "_Arc | None"
    enters_at: int | None


def _better(a: _Arc, b: _Arc | None) -> bool:
    """Whether arc ``a`` beats ``b``: higher weight, then smaller key."""
    if b is None:
        return True
    if a.w != b.w:
        return a.w > b.w
    return a.key < b.key


def _solve(nodes: list[int], arcs: list[_Arc], root: int) -> list[_Arc] | None:
    """Chosen arcs at this contraction level, or None if infeasible."""
    best_in: dict[int, _Arc] = {}
    for arc in arcs:
        if arc.dst == root:
            continue
        if _better(arc, best_in.get(arc.dst)):
            best_in[arc.dst] = arc

    for v in nodes:
        if v != root and v not in best_in:
            return None

    # look for a cycle among the chosen in-edges
    color: dict[int, int] = {}  # 0 on current walk, 1 finished
    cycle: list[int] | None = None
    for start in nodes:
        if start == root or start in color:
            continue
        path: list[int] = []
        v = start
        while v != root and v not in color:
            color[v] = 0
            path.append(v)
            v = best_in[v].src
        if v != root and color[v] == 0:
            cycle = path[path.index(v):]
        for u in path:
            color[u] = 1
        if cycle:
            break

    if cycle is None:
        return [best_in[v] for v in nodes if v != root]

    cyc = set(cycle)
    super_node = max(nodes) + 1
    new_nodes = [v for v in nodes if v not in cyc] + [super_node]
    merged: dict[tuple[int, int], _Arc] = {}
    for arc in arcs:
        s_in, d_in = arc.src in cyc, arc.dst in cyc
        if s_in and d_in:
            continue
        if d_in:
            adjusted = arc.w - best_in[arc.dst].w
            cand = _Arc(arc.src, super_node, adjusted, arc.key, arc, arc.dst)
        elif s_in:
            cand = _Arc(super_node, arc.dst, arc.w, arc.key, arc, None)
        else:
            cand = arc
        pair = (cand.src, cand.dst)
        if _better(cand, merged.get(pair)):
            merged[pair] = cand

    sub = _solve(new_nodes, list(merged.values()), root)
    if sub is None:
        return None

    chosen: list[_Arc] = []
    entered_at: int | None = None
    for arc in sub:
        if arc.dst == super_node:
            entered_at = arc.enters_at
            chosen.append(arc.orig)  # type: ignore[arg-type]
        elif arc.src == super_node:
            chosen.append(arc.orig)  # type: ignore[arg-type]
        else:
            chosen.append(arc)
    if entered_at is None:
        return None
    for v in cycle:
        if v != entered_at:
            chosen.append(best_in[v])
    return chosen


def max_weight_arborescence(
    weights: EdgeWeights, root: int | None = None
) -> Arborescence:
    """Maximum total weight spanning arborescence.

    With ``root`` given the tree is rooted there; otherwise every root is
    tried and the best total wins, ties going to the smallest root index.
    Raises :class:`InfeasibleArborescenceError` when no spanning tree of
    allowed edges exists.
    """
    nodes = list(weights.nodes)
    if root is not None and root not in weights.nodes:
        raise ValidationError(f"root {root} out of range {weights.nodes}")
    arcs = [_Arc(s, d, w, (s, d), None, None) for s, d, w in weights.arcs()]
    roots = [root] if root is not None else nodes

    best: Arborescence | None = None
    for r in roots:
        chosen = _solve(nodes, arcs, r)
        if chosen is None:
            continue
        total = sum(a.w for a in sorted(chosen, key=lambda a: a.dst))
        cand = Arborescence(
            root=r,
            parent={a.dst: a.src for a in chosen},
            total_weight=total,
        )
        if best is None or cand.total_weight > best.total_weight:
            best = cand
    if best is None:
        raise InfeasibleArborescenceError(
            "infeasible: no spanning arborescence with allowed edges"
            + (f" rooted at {root}" if root is not None else "")
        )
    return best
