"""Balanced and simple staged trees.

A same-stage pair ``v, w`` is balanced when, after matching children by
edge label, ``t(v_i) t(w_j) == t(w_i) t(v_j)`` for all child indices
``i != j``. Everything here is exact polynomial equality.
"""
from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

from .graph_core import Dag, ancestors, is_perfect, parents
from .polynomial import interpolating_poly
from .staged_tree import StagedTree, StagedTreeError, validate

DEFAULT_ORACLE_TERMS = 64


class BalanceError(ValueError):
    pass


@dataclass(frozen=True)
class Failure:
    level: int
    v: tuple
    w: tuple
    i: int
    j: int

    def to_json(self) -> dict:
        return {"level": self.level, "v": list(self.v), "w": list(self.w), "i": self.i, "j": self.j}


@dataclass(frozen=True)
class BalanceReport:
    balanced: bool
    failures: tuple = ()

    def to_json(self) -> dict:
        return {"balanced": self.balanced, "failures": [f.to_json() for f in self.failures]}


def _matched_children(t: StagedTree, v: tuple, w: tuple) -> list:
    """Pairs ``(v_i, w_i)`` with ``theta(v -> v_i) == theta(w -> w_i)``."""
    rv, rw = t.theta.get(v), t.theta.get(w)
    if rv is None or rw is None or set(rv) != set(rw):
        raise BalanceError(f"{list(v)} and {list(w)} are not in the same stage")
    where = {lab: x for x, lab in enumerate(rw)}
    return [(v + (x,), w + (where[lab],)) for x, lab in enumerate(rv)]


def _pair_failures(t: StagedTree, v: tuple, w: tuple) -> list:
    kids = _matched_children(t, v, w)
    tv = [interpolating_poly(t, a) for a, _ in kids]
    tw = [interpolating_poly(t, b) for _, b in kids]
    out = []
    # the condition is symmetric in (i, j), so i < j covers i != j
    for i, j in itertools.combinations(range(len(kids)), 2):
        if tv[i] * tw[j] != tw[i] * tv[j]:
            out.append((i, j))
    return out


def is_balanced_pair(t: StagedTree, v, w) -> bool:
    v, w = tuple(v), tuple(w)
    if v == w:
        if v not in t.theta:
            raise BalanceError(f"{list(v)} is not an internal vertex")
        return True
    return not _pair_failures(t, v, w)


def _require_valid(t: StagedTree) -> None:
    report = validate(t)
    if not report.ok:
        raise StagedTreeError("invalid staged tree: " + report.violations[0].message)


def is_balanced(t: StagedTree) -> BalanceReport:
    """Check every unordered same-stage pair; failures in (stage, pair, i, j) order."""
    _require_valid(t)
    failures = []
    for block in t.stages:
        for v, w in itertools.combinations(block, 2):
            for i, j in _pair_failures(t, v, w):
                failures.append(Failure(len(v), v, w, i, j))
    return BalanceReport(not failures, tuple(failures))


def is_simple(t: StagedTree) -> bool:
    """Every same-stage pair is in the same position, i.e. ``t(v) == t(w)``."""
    _require_valid(t)
    for block in t.stages:
        first = interpolating_poly(t, block[0])
        if any(interpolating_poly(t, v) != first for v in block[1:]):
            return False
    return True


def non_simple_pairs(t: StagedTree) -> list:
    out = []
    for block in t.stages:
        for v, w in itertools.combinations(block, 2):
            if interpolating_poly(t, v) != interpolating_poly(t, w):
                out.append((v, w))
    return out


# -- explicit bijection for perfect DAGs ---------------------------------


def witness_bijection(g: Dag, order: Sequence[int], v, w, pair) -> tuple:
    """Map a pair of continuations ``(y, y')`` below level ``len(v) + 1``.

    Position ``k`` keeps ``(y_k, y'_k)`` when the variable decided at
    level ``len(v)`` is an ancestor of the variable at position ``k``,
    and swaps them otherwise. Only guaranteed to witness balance for
    perfect ``g``.
    """
    if not is_perfect(g):
        raise BalanceError(f"{g} is not perfect; the swap rule is not a balance witness")
    order = tuple(order)
    v, w = tuple(v), tuple(w)
    i = len(v)
    if len(w) != i or i >= len(order):
        raise BalanceError("v and w must be internal vertices on the same level")
    pos = {u: n for n, u in enumerate(order)}
    nxt = order[i]
    if any(v[pos[u]] != w[pos[u]] for u in parents(g, nxt)):
        raise BalanceError(f"{list(v)} and {list(w)} are not in the same stage")
    y, y2 = (tuple(c) for c in pair)
    rest = order[i + 1:]
    if len(y) != len(rest) or len(y2) != len(rest):
        raise BalanceError(f"continuations must have length {len(rest)}")
    z, z2 = [], []
    for m, var in enumerate(rest):
        if nxt in ancestors(g, var):
            z.append(y[m])
            z2.append(y2[m])
        else:
            z.append(y2[m])
            z2.append(y[m])
    return tuple(z), tuple(z2)


def witness_identity_holds(t: StagedTree, v, w, pair, image) -> bool:
    """Per-position label identity that makes ``(y, y') -> (z, z')`` a balance witness.

    For each ``s != r`` and each later position ``k`` the label pair
    ``{label(y_k | v, s, y), label(y'_k | w, r, y')}`` must equal
    ``{label(z_k | w, s, z), label(z'_k | v, r, z')}`` as multisets.
    """
    v, w = tuple(v), tuple(w)
    y, y2 = (tuple(c) for c in pair)
    z, z2 = (tuple(c) for c in image)
    width = len(t.theta[v])

    def lab(base, s, tail, m):
        return t.theta[base + (s,) + tail[:m]][tail[m]]

    for s, r in itertools.permutations(range(width), 2):
        for m in range(len(y)):
            lhs = sorted((lab(v, s, y, m), lab(w, r, y2, m)))
            rhs = sorted((lab(w, s, z, m), lab(v, r, z2, m)))
            if lhs != rhs:
                return False
    return True


# -- term-multiset oracle ------------------------------------------------


def _paths(t: StagedTree, u: tuple) -> list:
    """Label sequences of every path from ``u`` down to a leaf."""
    row = t.theta.get(u)
    if row is None:
        return [()]
    return [(lab,) + rest for x, lab in enumerate(row) for rest in _paths(t, u + (x,))]


def lemma_balance_bruteforce(t: StagedTree, v, w, max_terms: int = DEFAULT_ORACLE_TERMS) -> bool:
    """Compare the expanded term multisets of ``t(vs) t(wr)`` and ``t(vr) t(ws)``.

    Each product is expanded path-pair by path-pair into monomials
    (sorted label tuples) and the two sides are compared as multisets,
    for all outcomes ``s != r`` of the next variable. Requires the pair to
    label its out-edges identically, as in trees built from a DAG.
    """
    v, w = tuple(v), tuple(w)
    if t.theta.get(v) is None or t.theta.get(v) != t.theta.get(w):
        raise BalanceError(f"{list(v)} and {list(w)} do not share out-edge labels")
    width = len(t.theta[v])
    n_rest = len(_paths(t, v + (0,)))
    if n_rest * n_rest > max_terms:
        raise BalanceError(f"{n_rest}^2 term pairs exceeds oracle bound {max_terms}")

    def expand(a: tuple, b: tuple) -> Counter:
        return Counter(tuple(sorted(pa + pb)) for pa in _paths(t, a) for pb in _paths(t, b))

    for s, r in itertools.permutations(range(width), 2):
        if expand(v + (s,), w + (r,)) != expand(v + (r,), w + (s,)):
            return False
    return True
