"""DAGs, skeletons, linear extensions, chordality and perfectness.

Nodes are the integers ``1..p``.
"""
from __future__ import annotations

import itertools
import json
import random
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

MAX_EXTENSION_NODES = 8
MAX_ENUM_NODES = 5


class GraphError(ValueError):
    pass


class CycleError(GraphError):
    pass


def _check_node(p: int, v: int) -> None:
    if not 1 <= v <= p:
        raise GraphError(f"node {v} out of range 1..{p}")


@dataclass(frozen=True)
class UndirectedGraph:
    p: int
    edges: frozenset  # of frozenset({u, v})

    def __post_init__(self):
        for e in self.edges:
            if len(e) != 2:
                raise GraphError(f"not a simple edge: {sorted(e)}")
            for v in e:
                _check_node(self.p, v)

    @classmethod
    def from_pairs(cls, p: int, pairs: Iterable[Sequence[int]]) -> "UndirectedGraph":
        return cls(p, frozenset(frozenset(e) for e in pairs))

    def neighbors(self, v: int) -> frozenset:
        return frozenset(u for e in self.edges if v in e for u in e if u != v)

    def adjacent(self, u: int, v: int) -> bool:
        return frozenset((u, v)) in self.edges

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(tuple(sorted(e)) for e in self.edges)


@dataclass(frozen=True)
class Dag:
    """A directed acyclic graph on nodes ``1..p``.

    ``edges`` is a frozenset of ``(u, v)`` pairs meaning ``u -> v``.
    Construction rejects self-loops, out-of-range nodes and cycles.
    """

    p: int
    edges: frozenset

    def __post_init__(self):
        if self.p < 0:
            raise GraphError("p must be non-negative")
        for u, v in self.edges:
            _check_node(self.p, u)
            _check_node(self.p, v)
            if u == v:
                raise GraphError(f"self-loop at {u}")
        if len(topological_sort(self.p, self.edges)) != self.p:
            raise CycleError(f"edges contain a directed cycle: {sorted(self.edges)}")

    @classmethod
    def from_edges(cls, p: int, edges: Iterable[Sequence[int]]) -> "Dag":
        edges = [tuple(e) for e in edges]
        if len(set(edges)) != len(edges):
            raise GraphError("duplicate edge")
        return cls(p, frozenset(edges))

    @property
    def nodes(self) -> range:
        return range(1, self.p + 1)

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    def adjacent(self, u: int, v: int) -> bool:
        return (u, v) in self.edges or (v, u) in self.edges

    def __str__(self):
        body = ", ".join(f"{u}->{v}" for u, v in self.sorted_edges())
        return f"Dag(p={self.p}, {{{body}}})"

    # JSON: {"p": 4, "edges": [[1, 3], ...]}
    def to_json(self) -> dict:
        return {"p": self.p, "edges": [list(e) for e in self.sorted_edges()]}

    @classmethod
    def from_json(cls, data) -> "Dag":
        if isinstance(data, str):
            data = json.loads(data)
        if not isinstance(data, dict):
            raise GraphError("DAG JSON must be an object")
        for key in ("p", "edges"):
            if key not in data:
                raise GraphError(f"DAG JSON missing key '{key}'")
        p = data["p"]
        if not isinstance(p, int) or isinstance(p, bool):
            raise GraphError("DAG JSON key 'p' must be an integer")
        edges = data["edges"]
        if not isinstance(edges, list) or not all(
            isinstance(e, list) and len(e) == 2 and all(isinstance(x, int) for x in e)
            for e in edges
        ):
            raise GraphError("DAG JSON key 'edges' must be a list of [source, target] pairs")
        return cls.from_edges(p, edges)


def topological_sort(p: int, edges: Iterable[tuple[int, int]]) -> list[int]:
    """Kahn's algorithm, smallest available node first.

    Returns fewer than ``p`` nodes when the edges contain a cycle.
    """
    indeg = {v: 0 for v in range(1, p + 1)}
    out: dict[int, list[int]] = {v: [] for v in range(1, p + 1)}
    for u, v in edges:
        out[u].append(v)
        indeg[v] += 1
    ready = sorted(v for v, d in indeg.items() if d == 0)
    order = []
    while ready:
        u = ready.pop(0)
        order.append(u)
        for v in out[u]:
            indeg[v] -= 1
            if indeg[v] == 0:
                ready.append(v)
        ready.sort()
    return order


def parents(g: Dag, v: int) -> frozenset:
    _check_node(g.p, v)
    return frozenset(u for u, w in g.edges if w == v)


def children(g: Dag, v: int) -> frozenset:
    _check_node(g.p, v)
    return frozenset(w for u, w in g.edges if u == v)


def _closure(g: Dag, v: int, step) -> frozenset:
    _check_node(g.p, v)
    seen = set()
    queue = deque([v])
    while queue:
        for u in step(g, queue.popleft()):
            if u not in seen:
                seen.add(u)
                queue.append(u)
    seen.discard(v)
    return frozenset(seen)


def ancestors(g: Dag, v: int) -> frozenset:
    """All nodes with a directed path to ``v`` (``v`` excluded)."""
    return _closure(g, v, parents)


def descendants(g: Dag, v: int) -> frozenset:
    """All nodes reachable from ``v`` (``v`` excluded)."""
    return _closure(g, v, children)


def _check_permutation(p: int, order: Sequence[int]) -> None:
    if len(order) != p:
        raise GraphError(f"ordering has length {len(order)}, expected {p}")
    if sorted(order) != list(range(1, p + 1)):
        raise GraphError(f"ordering {list(order)} is not a permutation of 1..{p}")


def is_linear_extension(g: Dag, order: Sequence[int]) -> bool:
    _check_permutation(g.p, order)
    pos = {v: i for i, v in enumerate(order)}
    return all(pos[u] < pos[v] for u, v in g.edges)


def enumerate_linear_extensions(g: Dag, max_nodes: int = MAX_EXTENSION_NODES) -> list[tuple[int, ...]]:
    """All linear extensions of ``g`` in lexicographic order."""
    if g.p > max_nodes:
        raise GraphError(f"p={g.p} exceeds linear extension bound {max_nodes}")
    pa = {v: parents(g, v) for v in g.nodes}
    out: list[tuple[int, ...]] = []

    def extend(prefix: list[int], placed: set):
        if len(prefix) == g.p:
            out.append(tuple(prefix))
            return
        for v in g.nodes:
            if v not in placed and pa[v] <= placed:
                prefix.append(v)
                placed.add(v)
                extend(prefix, placed)
                placed.remove(v)
                prefix.pop()

    extend([], set())
    return out


def skeleton(g: Dag) -> UndirectedGraph:
    return UndirectedGraph(g.p, frozenset(frozenset(e) for e in g.edges))


def maximum_cardinality_search(ug: UndirectedGraph) -> list[int]:
    """Visit order of maximum cardinality search; ties go to the smallest node.

    The reverse of the visit order is a perfect elimination ordering
    exactly when ``ug`` is chordal.
    """
    nbrs = {v: ug.neighbors(v) for v in range(1, ug.p + 1)}
    weight = {v: 0 for v in nbrs}
    order = []
    while weight:
        v = max(weight, key=lambda u: (weight[u], -u))
        del weight[v]
        order.append(v)
        for u in nbrs[v]:
            if u in weight:
                weight[u] += 1
    return order


def is_perfect_elimination_ordering(ug: UndirectedGraph, order: Sequence[int]) -> bool:
    """Check that each node's later neighbours form a clique."""
    pos = {v: i for i, v in enumerate(order)}
    for v in order:
        later = [u for u in ug.neighbors(v) if pos[u] > pos[v]]
        if not later:
            continue
        # enough to check the earliest later neighbour is adjacent to the rest
        first = min(later, key=pos.__getitem__)
        if any(u != first and not ug.adjacent(u, first) for u in later):
            return False
    return True


def is_chordal(ug: UndirectedGraph) -> bool:
    peo = maximum_cardinality_search(ug)[::-1]
    return is_perfect_elimination_ordering(ug, peo)


def is_perfect(g: Dag) -> bool:
    """True iff every node's parents are pairwise adjacent."""
    for v in g.nodes:
        for a, b in itertools.combinations(sorted(parents(g, v)), 2):
            if not g.adjacent(a, b):
                return False
    return True


def find_collider(g: Dag) -> Optional[tuple[int, int, int]]:
    """Lexicographically least ``(i, l, j)`` with ``i -> l <- j``, ``i < j``, ``i`` and ``j`` non-adjacent."""
    best = None
    for l in g.nodes:
        for i, j in itertools.combinations(sorted(parents(g, l)), 2):
            if not g.adjacent(i, j):
                cand = (i, l, j)
                if best is None or cand < best:
                    best = cand
    return best


def _has_cycle(p: int, edges) -> bool:
    return len(topological_sort(p, edges)) != p


def enumerate_dags(p: int, max_nodes: int = MAX_ENUM_NODES) -> list[Dag]:
    """All labeled DAGs on ``p`` nodes.

    Every DAG is an edge subset of the transitive tournament of some
    permutation, so the generator orients subsets along each permutation
    and de-duplicates. Output is sorted by edge count, then edge list.
    """
    if p > max_nodes:
        raise GraphError(f"p={p} exceeds DAG enumeration bound {max_nodes}")
    seen: set[frozenset] = set()
    for perm in itertools.permutations(range(1, p + 1)):
        tournament = [(perm[a], perm[b]) for a in range(p) for b in range(a + 1, p)]
        for mask in range(1 << len(tournament)):
            seen.add(frozenset(e for k, e in enumerate(tournament) if mask >> k & 1))
    ordered = sorted(seen, key=lambda es: (len(es), sorted(es)))
    return [Dag(p, es) for es in ordered]


def random_dag(p: int, edge_prob: float = 0.5, seed: int = 0) -> Dag:
    """Sample each pair with probability ``edge_prob`` and orient along a random permutation."""
    if not 0.0 <= edge_prob <= 1.0:
        raise GraphError(f"edge_prob must lie in [0, 1], got {edge_prob}")
    rng = random.Random(seed)
    perm = list(range(1, p + 1))
    rng.shuffle(perm)
    edges = set()
    for a in range(p):
        for b in range(a + 1, p):
            if rng.random() < edge_prob:
                edges.add((perm[a], perm[b]))
    return Dag(p, frozenset(edges))


def complete_dag(order: Sequence[int]) -> Dag:
    """The DAG with ``order[a] -> order[b]`` for every ``a < b``."""
    p = len(order)
    return Dag(p, frozenset((order[a], order[b]) for a in range(p) for b in range(a + 1, p)))

