"""Staged trees: construction from DAGs, axiom checks and DAG recognition.

A vertex is identified by its outcome prefix, a tuple of outcome indices
``(x_{pi_1}, ..., x_{pi_k})``; the root is ``()``. The child reached by
outcome ``x`` of vertex ``v`` is ``v + (x,)``. Edge labels are interned:
every distinct semantic key gets one integer id.
"""
from __future__ import annotations

import itertools
import json
import math
import os
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Hashable, Iterable, Mapping, Optional, Sequence

from .graph_core import Dag, GraphError, _check_permutation, is_linear_extension, parents

DEFAULT_MAX_LEAVES = 10**6
DOT_MAX_LEAVES = 4096

Prefix = tuple


class StagedTreeError(ValueError):
    pass


class SizeBoundError(StagedTreeError):
    pass


def max_leaves_default() -> int:
    env = os.environ.get("STK_MAX_LEAVES")
    return int(env) if env else DEFAULT_MAX_LEAVES


@dataclass(frozen=True)
class StateSpace:
    """Outcome counts ``d_1..d_p``; variable ``i`` takes values ``0..d_i - 1``."""

    cardinalities: tuple

    def __post_init__(self):
        cards = tuple(self.cardinalities)
        object.__setattr__(self, "cardinalities", cards)
        if len(cards) < 1:
            raise StagedTreeError("state space needs at least one variable")
        for i, d in enumerate(cards, start=1):
            if not isinstance(d, int) or d < 2:
                raise StagedTreeError(f"cardinality of variable {i} must be an integer >= 2, got {d!r}")

    @classmethod
    def binary(cls, p: int) -> "StateSpace":
        return cls((2,) * p)

    @property
    def p(self) -> int:
        return len(self.cardinalities)

    def card(self, var: int) -> int:
        return self.cardinalities[var - 1]

    def size(self) -> int:
        return math.prod(self.cardinalities)

    def outcomes(self, variables: Sequence[int]) -> Iterable[tuple]:
        """All joint outcomes of ``variables`` in lexicographic order."""
        return itertools.product(*(range(self.card(v)) for v in variables))


@dataclass(frozen=True)
class Label:
    id: int
    key: Hashable

    def __str__(self):
        key = self.key
        if isinstance(key, tuple) and len(key) == 3 and isinstance(key[0], int):
            var, value, ctx = key
            cond = ",".join(f"x{j}={x}" for j, x in ctx)
            return f"f(x{var}={value}|{cond})" if cond else f"f(x{var}={value})"
        return f"theta{self.id}"


@dataclass(frozen=True)
class Violation:
    kind: str  # "axiom1", "axiom2", "stages"
    vertices: tuple
    message: str


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok


@dataclass(frozen=True, eq=False)
class StagedTree:
    """An edge-labeled rooted tree with its stage partition.

    ``theta`` maps each internal vertex to the label ids of its out-edges,
    indexed by child outcome. Vertices absent from ``theta`` are leaves.
    ``order`` and ``state_space`` describe the variable attached to each
    level; they are ``None`` only for hand-built trees that are not
    uniform. ``stages`` defaults to the partition induced by ``theta``.
    """

    theta: Mapping
    labels: tuple
    order: Optional[tuple] = None
    state_space: Optional[StateSpace] = None
    stages: Optional[tuple] = None
    _vertices: tuple = field(init=False, repr=False)
    _levels: tuple = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "theta", MappingProxyType(dict(self.theta)))
        if () not in self.theta:
            raise StagedTreeError("tree has no root vertex ()")
        verts = []
        frontier = [()]
        while frontier:
            verts.extend(frontier)
            nxt = []
            for v in frontier:
                for x in range(len(self.theta.get(v, ()))):
                    nxt.append(v + (x,))
            frontier = nxt
        reachable = set(verts)
        stray = [v for v in self.theta if v not in reachable]
        if stray:
            raise StagedTreeError(f"vertices unreachable from the root: {sorted(stray)[:3]}")
        object.__setattr__(self, "_vertices", tuple(verts))
        levels: list = []
        for v in verts:
            if len(v) == len(levels):
                levels.append([])
            levels[len(v)].append(v)
        object.__setattr__(self, "_levels", tuple(tuple(lv) for lv in levels))
        if self.order is not None:
            object.__setattr__(self, "order", tuple(self.order))
        if self.stages is None:
            object.__setattr__(self, "stages", induced_stages(self))
        else:
            object.__setattr__(self, "stages", tuple(tuple(tuple(v) for v in b) for b in self.stages))

    # -- construction ------------------------------------------------------

    @classmethod
    def from_label_keys(cls, keyed: Mapping, order=None, state_space=None, stages=None) -> "StagedTree":
        """Build from ``vertex -> [label key per child]``, interning keys by first appearance."""
        ids: dict = {}
        labels: list = []
        theta = {}
        for v in sorted(keyed, key=lambda u: (len(u), u)):
            row = []
            for key in keyed[v]:
                if key not in ids:
                    ids[key] = len(labels)
                    labels.append(Label(len(labels), key))
                row.append(ids[key])
            theta[tuple(v)] = tuple(row)
        return cls(theta, tuple(labels), order, state_space, stages)

    @classmethod
    def from_staging(cls, order: Sequence[int], cards: Sequence[int], stages: Sequence) -> "StagedTree":
        """Compatibly labeled uniform tree from per-level stage blocks.

        ``stages[k]`` lists the blocks partitioning level ``k`` for
        ``k = 0..p-1``; each block is a list of prefixes.
        """
        s = StateSpace(tuple(cards))
        order = tuple(order)
        _check_permutation(s.p, order)
        if len(stages) != s.p:
            raise StagedTreeError(f"expected stage blocks for {s.p} levels, got {len(stages)}")
        keyed = {}
        blocks_out = []
        for k, blocks in enumerate(stages):
            level = set(itertools.product(*(range(s.card(order[j])) for j in range(k))))
            seen = set()
            d_next = s.card(order[k])
            for b, block in enumerate(blocks):
                if not block:
                    raise StagedTreeError(f"empty stage block at level {k}")
                for v in block:
                    v = tuple(v)
                    if v not in level:
                        raise StagedTreeError(f"prefix {list(v)} is not a vertex of level {k}")
                    if v in seen:
                        raise StagedTreeError(f"prefix {list(v)} appears in two blocks at level {k}")
                    seen.add(v)
                    keyed[v] = [("stage", k, b, x) for x in range(d_next)]
                blocks_out.append(tuple(sorted(tuple(v) for v in block)))
            if seen != level:
                missing = sorted(level - seen)
                raise StagedTreeError(f"level {k} blocks miss prefixes, e.g. {list(missing[0])}")
        return cls.from_label_keys(keyed, order, s, _sort_blocks(blocks_out))

    # -- queries -----------------------------------------------------------

    @property
    def vertices(self) -> tuple:
        """All vertices, ordered by level then lexicographically."""
        return self._vertices

    @property
    def internal_vertices(self) -> list:
        return [v for v in self._vertices if v in self.theta]

    @property
    def leaves(self) -> list:
        return [v for v in self._vertices if v not in self.theta]

    @property
    def depth(self) -> int:
        return len(self._levels) - 1

    def is_vertex(self, v) -> bool:
        v = tuple(v)
        if v == ():
            return True
        parent = v[:-1]
        return parent in self.theta and 0 <= v[-1] < len(self.theta[parent])

    def children(self, v) -> list:
        v = tuple(v)
        return [v + (x,) for x in range(len(self.theta.get(v, ())))]

    def edge_label(self, v, x: int) -> int:
        return self.theta[tuple(v)][x]

    def level(self, k: int) -> list:
        return list(self._levels[k]) if 0 <= k < len(self._levels) else []

    def label_set(self, v) -> frozenset:
        return frozenset(self.theta.get(tuple(v), ()))

    def stages_at_level(self, k: int) -> list:
        return [b for b in self.stages if len(b[0]) == k]

    def stage_of(self, v) -> tuple:
        v = tuple(v)
        for b in self.stages:
            if v in b:
                return b
        raise StagedTreeError(f"{list(v)} is not an internal vertex")

    def same_stage(self, v, w) -> bool:
        return v in self.theta and self.label_set(v) == self.label_set(w)

    def variable_at(self, k: int) -> int:
        """Variable attached to the edges leaving level ``k``."""
        if self.order is None:
            return k + 1
        return self.order[k]

    # -- serialization -----------------------------------------------------

    def to_json(self) -> dict:
        if self.order is None or self.state_space is None:
            raise StagedTreeError("only trees with a causal ordering serialize to JSON")
        p = len(self.order)
        stages = [[[list(v) for v in b] for b in self.stages_at_level(k)] for k in range(p)]
        return {
            "order": list(self.order),
            "cardinalities": [self.state_space.card(v) for v in self.order],
            "stages": stages,
        }

    @classmethod
    def from_json(cls, data) -> "StagedTree":
        if isinstance(data, str):
            data = json.loads(data)
        if not isinstance(data, dict):
            raise StagedTreeError("staged-tree JSON must be an object")
        for key in ("order", "cardinalities", "stages"):
            if key not in data:
                raise StagedTreeError(f"staged-tree JSON missing key '{key}'")
        order, cards_by_level = data["order"], data["cardinalities"]
        if not isinstance(order, list) or not isinstance(cards_by_level, list) or len(order) != len(cards_by_level):
            raise StagedTreeError("'order' and 'cardinalities' must be lists of equal length")
        # file cardinalities follow the level order; StateSpace is indexed by variable
        cards = [0] * len(order)
        for var, d in zip(order, cards_by_level):
            if not isinstance(var, int) or not 1 <= var <= len(order):
                raise StagedTreeError(f"bad variable {var!r} in 'order'")
            cards[var - 1] = d
        if not isinstance(data["stages"], list):
            raise StagedTreeError("'stages' must be a list of levels")
        try:
            return cls.from_staging(order, cards, data["stages"])
        except GraphError as exc:
            raise StagedTreeError(str(exc)) from exc


def _sort_blocks(blocks) -> tuple:
    return tuple(sorted(blocks, key=lambda b: (len(b[0]), b[0])))


def induced_stages(t: StagedTree) -> tuple:
    """Partition internal vertices by equality of outgoing label sets."""
    groups: dict = {}
    for v in t.vertices:
        if v in t.theta:
            groups.setdefault(frozenset(t.theta[v]), []).append(v)
    return _sort_blocks(tuple(b) for b in groups.values())


def leaf_count(s: StateSpace) -> int:
    return s.size()


def build_tree(g: Dag, order: Sequence[int], s: StateSpace, max_leaves: Optional[int] = None) -> StagedTree:
    """The staged tree of ``g`` along the linear extension ``order``.

    The edge ``x -> x + (value,)`` leaving level ``k`` gets the label
    ``(var, value, x restricted to pa(var))`` with ``var = order[k]``.
    """
    order = tuple(order)
    if s.p != g.p:
        raise StagedTreeError(f"state space has {s.p} variables, DAG has {g.p} nodes")
    if not is_linear_extension(g, order):
        raise StagedTreeError(f"{list(order)} is not a linear extension of {g}")
    bound = max_leaves_default() if max_leaves is None else max_leaves
    if s.size() > bound:
        raise SizeBoundError(f"tree would have {s.size()} leaves, bound is {bound}")
    pos = {v: i for i, v in enumerate(order)}
    keyed = {}
    for k, var in enumerate(order):
        pa = sorted(parents(g, var))
        d = s.card(var)
        for x in s.outcomes(order[:k]):
            ctx = tuple((j, x[pos[j]]) for j in pa)
            keyed[x] = [(var, value, ctx) for value in range(d)]
    return StagedTree.from_label_keys(keyed, order, s)


def validate(t: StagedTree) -> ValidationReport:
    out = []
    for v in t.internal_vertices:
        row = t.theta[v]
        if len(set(row)) != len(row):
            out.append(Violation("axiom1", (v,), f"vertex {list(v)} repeats a label on its out-edges"))
    # axiom 2: label sets pairwise equal or disjoint
    reps: dict = {}
    for v in t.internal_vertices:
        reps.setdefault(frozenset(t.theta[v]), v)
    owners: dict = {}
    for ls, v in reps.items():
        for lab in ls:
            owners.setdefault(lab, []).append(v)
    flagged = set()
    for lab, vs in owners.items():
        for a, b in itertools.combinations(vs, 2):
            if (a, b) not in flagged:
                flagged.add((a, b))
                out.append(Violation(
                    "axiom2", (a, b),
                    f"vertices {list(a)} and {list(b)} have overlapping but unequal label sets",
                ))
    induced = induced_stages(t)
    if set(induced) != set(t.stages):
        out.append(Violation("stages", (), "declared stages differ from the partition induced by the labels"))
    return ValidationReport(tuple(out))


def is_uniform(t: StagedTree) -> bool:
    degrees: dict = {}
    for v in t.vertices:
        degrees.setdefault(len(v), set()).add(len(t.theta.get(v, ())))
    return all(len(ds) == 1 for ds in degrees.values())


def is_stratified(t: StagedTree) -> bool:
    if len({len(v) for v in t.leaves}) != 1:
        return False
    return all(len({len(v) for v in b}) == 1 for b in t.stages)


def is_compatibly_labeled(t: StagedTree) -> bool:
    """Same-stage vertices put the same label on the edge to the same outcome."""
    return all(len({t.theta[v] for v in b}) == 1 for b in t.stages)


def recognize_dag_staging(t: StagedTree) -> Optional[tuple[Dag, tuple]]:
    """Recover ``(G, order)`` when every level's staging is a coordinate projection.

    Returns ``None`` when some level's stages are not the fibers of a
    projection onto a subset of the earlier coordinates.
    """
    if not (is_uniform(t) and is_stratified(t) and is_compatibly_labeled(t)):
        raise StagedTreeError("recognition needs a uniform, stratified, compatibly labeled tree")
    p = t.depth
    order = t.order if t.order is not None else tuple(range(1, p + 1))
    edges = set()
    for k in range(p):
        level = t.level(k)
        stage_id = {}
        for b, block in enumerate(t.stages_at_level(k)):
            for v in block:
                stage_id[v] = b
        members = set(level)
        coords = set()
        for v in level:
            for j in range(k):
                for x in range(v[j] + 1, _width(t, j)):
                    w = v[:j] + (x,) + v[j + 1:]
                    if w in members and stage_id[v] != stage_id[w]:
                        coords.add(j)
        coords = sorted(coords)
        fibers: dict = {}
        for v in level:
            fibers.setdefault(tuple(v[j] for j in coords), set()).add(stage_id[v])
        # projection fibers must coincide with stages: one stage per fiber, distinct stages across fibers
        if any(len(ids) != 1 for ids in fibers.values()):
            return None
        if len({next(iter(ids)) for ids in fibers.values()}) != len(fibers):
            return None
        edges.update((order[j], order[k]) for j in coords)
    return Dag(p, frozenset(edges)), tuple(order)


def _width(t: StagedTree, k: int) -> int:
    return len(t.theta[t._levels[k][0]])


_PALETTE = (
    "#e6194b", "#3cb44b", "#ffe119", "#4363d8", "#f58231", "#911eb4", "#46f0f0",
    "#f032e6", "#bcf60c", "#fabebe", "#008080", "#e6beff", "#9a6324", "#fffac8",
    "#800000", "#aaffc3", "#808000", "#ffd8b1", "#000075", "#808080",
)


def stage_colors(t: StagedTree) -> dict:
    """Vertex -> fill color; singleton stages and leaves are white."""
    colors = {}
    n = 0
    for block in t.stages:
        if len(block) == 1:
            continue
        # golden-ratio hue steps once the fixed palette runs out
        c = _PALETTE[n] if n < len(_PALETTE) else f"{(n * 0.618034) % 1:.4f} 0.55 0.95"
        n += 1
        for v in block:
            colors[v] = c
    return colors


def export_dot(t: StagedTree, max_leaves: int = DOT_MAX_LEAVES) -> str:
    if len(t.leaves) > max_leaves:
        raise SizeBoundError(f"{len(t.leaves)} leaves exceeds DOT export bound {max_leaves}")
    colors = stage_colors(t)
    name = {v: f"n{i}" for i, v in enumerate(t.vertices)}
    lines = ["digraph staged_tree {", "  rankdir=LR;", '  node [shape=circle, style=filled, label=""];']
    for v in t.vertices:
        tip = "".join(map(str, v)) or "root"
        lines.append(f'  {name[v]} [fillcolor="{colors.get(v, "white")}", tooltip="{tip}"];')
    for v in t.internal_vertices:
        for x, lab in enumerate(t.theta[v]):
            lines.append(f'  {name[v]} -> {name[v + (x,)]} [label="{x}", tooltip="{t.labels[lab]}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
