"""Monomial maps of DAG and staged tree models and their quadratic binomials.

Columns of every exponent matrix are full outcomes ``(x_1, ..., x_p)`` in
variable order, so relations from different maps can be evaluated
against the same distribution.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .graph_core import Dag, UndirectedGraph, skeleton
from .model import LeafDistribution
from .staged_tree import StagedTree, StateSpace

MAX_CLIQUE_NODES = 10
MAX_RELATION_COLUMNS = 4096


class ToricError(ValueError):
    pass


@dataclass(frozen=True)
class ExponentMatrix:
    rows: tuple      # row names
    columns: tuple   # outcome tuples
    entries: np.ndarray  # len(rows) x len(columns), nonnegative ints

    @property
    def shape(self) -> tuple:
        return self.entries.shape

    def column_sums(self) -> np.ndarray:
        return self.entries.sum(axis=0)

    def is_homogeneous(self) -> bool:
        sums = self.column_sums()
        return bool(len(sums) == 0 or (sums == sums[0]).all())


@dataclass(frozen=True)
class BinomialRelation:
    """``prod_{a in positive} p_a - prod_{b in negative} p_b``, as column indices."""

    positive: tuple
    negative: tuple

    def in_kernel(self, m: ExponentMatrix) -> bool:
        lhs = m.entries[:, list(self.positive)].sum(axis=1)
        rhs = m.entries[:, list(self.negative)].sum(axis=1)
        return bool((lhs == rhs).all())

    def to_json(self, m: ExponentMatrix) -> dict:
        return {
            "positive": [list(m.columns[a]) for a in self.positive],
            "negative": [list(m.columns[b]) for b in self.negative],
        }


def _leaf_outcome(order: Sequence[int], leaf: tuple) -> tuple:
    x = [0] * len(order)
    for slot, var in enumerate(order):
        x[var - 1] = leaf[slot]
    return tuple(x)


def exponent_matrix_psi_toric(t: StagedTree) -> ExponentMatrix:
    """Rows ``z`` then every label; a leaf's column marks ``z`` and the labels on its path."""
    order = t.order if t.order is not None else tuple(range(1, t.depth + 1))
    leaves = sorted(t.leaves, key=lambda leaf: _leaf_outcome(order, leaf))
    ent = np.zeros((1 + len(t.labels), len(leaves)), dtype=np.int64)
    for c, leaf in enumerate(leaves):
        ent[0, c] = 1
        for k in range(len(leaf)):
            ent[1 + t.theta[leaf[:k]][leaf[k]], c] += 1
    rows = ("z",) + tuple(str(lab) for lab in t.labels)
    return ExponentMatrix(rows, tuple(_leaf_outcome(order, leaf) for leaf in leaves), ent)


def maximal_cliques(ug: UndirectedGraph, max_nodes: int = MAX_CLIQUE_NODES) -> list:
    """Bron-Kerbosch with pivoting; cliques as sorted tuples, sorted."""
    if ug.p > max_nodes:
        raise ToricError(f"clique enumeration limited to {max_nodes} nodes")
    nbrs = {v: set(ug.neighbors(v)) for v in range(1, ug.p + 1)}
    out = []

    def expand(r: set, cand: set, excl: set):
        if not cand and not excl:
            out.append(tuple(sorted(r)))
            return
        pivot = max(cand | excl, key=lambda u: (len(nbrs[u] & cand), -u))
        for v in sorted(cand - nbrs[pivot]):
            expand(r | {v}, cand & nbrs[v], excl & nbrs[v])
            cand = cand - {v}
            excl = excl | {v}

    if ug.p:
        expand(set(), set(nbrs), set())
    return sorted(out)


def exponent_matrix_cliques(g: Dag, s: StateSpace) -> ExponentMatrix:
    """Rows ``(C, x_C)`` over maximal cliques of the skeleton; one 1 per clique in each column."""
    cliques = maximal_cliques(skeleton(g))
    rows = [(c, xc) for c in cliques for xc in s.outcomes(c)]
    index = {r: n for n, r in enumerate(rows)}
    cols = list(s.outcomes(tuple(g.nodes)))
    ent = np.zeros((len(rows), len(cols)), dtype=np.int64)
    for n, x in enumerate(cols):
        for c in cliques:
            ent[index[(c, tuple(x[v - 1] for v in c))], n] += 1
    return ExponentMatrix(tuple(rows), tuple(cols), ent)


def quadratic_relations(m: ExponentMatrix, max_columns: int = MAX_RELATION_COLUMNS) -> list:
    """All degree-2 binomials ``p_a p_b - p_c p_d`` in the kernel lattice.

    Column pairs are grouped by their summed exponent vector; every two
    distinct pairs in a group give one relation.
    """
    n = m.entries.shape[1]
    if n > max_columns:
        raise ToricError(f"{n} columns exceeds relation search bound {max_columns}")
    ent = m.entries
    groups: dict = {}
    for a, b in itertools.combinations_with_replacement(range(n), 2):
        groups.setdefault((ent[:, a] + ent[:, b]).tobytes(), []).append((a, b))
    out = []
    for pairs in groups.values():
        for pos, neg in itertools.combinations(pairs, 2):
            out.append(BinomialRelation(pos, neg))
    out.sort(key=lambda rel: (rel.positive, rel.negative))
    return out


@dataclass(frozen=True)
class VanishingReport:
    residuals: tuple   # one per relation
    failing: tuple     # indices into residuals
    tol: float
    exact: bool

    @property
    def passed(self) -> bool:
        return not self.failing

    def to_json(self, relations=None, m=None) -> dict:
        recs = []
        for n, res in enumerate(self.residuals):
            rec = {"index": n, "residual": str(res) if self.exact else float(res)}
            if relations is not None and m is not None:
                rec.update(relations[n].to_json(m))
            recs.append(rec)
        return {
            "passed": self.passed,
            "exact": self.exact,
            "tol": self.tol,
            "n_relations": len(self.residuals),
            "n_failing": len(self.failing),
            "failing": list(self.failing),
            "residuals": recs,
        }


def check_vanishing(rels: Sequence[BinomialRelation], m: ExponentMatrix, f: LeafDistribution,
                    tol: float = 1e-9, exact: bool = False) -> VanishingReport:
    """Evaluate each binomial at ``f``; exact mode flags any nonzero residual."""
    joint = f.by_outcome()
    if any(pr <= 0 for pr in joint.values()):
        raise ToricError("distribution must be strictly positive")
    if exact:
        vals = [Fraction(joint[x]) for x in m.columns]
    else:
        vals = [float(joint[x]) for x in m.columns]
    residuals, failing = [], []
    for n, rel in enumerate(rels):
        res = math.prod(vals[a] for a in rel.positive) - math.prod(vals[b] for b in rel.negative)
        residuals.append(res)
        if (res != 0) if exact else abs(res) > tol:
            failing.append(n)
    return VanishingReport(tuple(residuals), tuple(failing), tol, exact)
