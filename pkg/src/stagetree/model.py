"""Probability semantics of staged trees, in exact rational arithmetic."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Mapping, Optional

import numpy as np

from .graph_core import Dag, parents
from .staged_tree import StagedTree, StateSpace

DENOMINATOR = 10**9


class ModelError(ValueError):
    pass


def _random_simplex_point(rng: np.random.Generator, n: int) -> list:
    """Uniform point of the open simplex, rounded to ``DENOMINATOR`` and renormalised exactly."""
    raw = rng.dirichlet(np.ones(n))
    ints = [max(1, int(round(x * DENOMINATOR))) for x in raw]
    total = sum(ints)
    return [Fraction(c, total) for c in ints]


@dataclass(frozen=True)
class ParameterAssignment:
    """A point of the parameter space: one rational in (0, 1) per label id."""

    values: Mapping

    def __getitem__(self, lab: int) -> Fraction:
        return self.values[lab]

    def check(self, t: StagedTree) -> None:
        for v in t.internal_vertices:
            row = t.theta[v]
            missing = [lab for lab in row if lab not in self.values]
            if missing:
                raise ModelError(f"no value for label {missing[0]}")
            if any(not 0 < self.values[lab] < 1 for lab in row):
                raise ModelError(f"parameter outside (0, 1) at vertex {list(v)}")
            if sum(self.values[lab] for lab in row) != 1:
                raise ModelError(f"parameters at vertex {list(v)} do not sum to 1")


def sample_parameters(t: StagedTree, seed: int) -> ParameterAssignment:
    """One random probability vector per stage, shared by all of its vertices."""
    rng = np.random.default_rng(seed)
    values = {}
    for block in t.stages:
        row = t.theta[block[0]]
        for lab, val in zip(row, _random_simplex_point(rng, len(row))):
            values[lab] = val
    return ParameterAssignment(values)


@dataclass(frozen=True, eq=False)
class LeafDistribution:
    """Leaf probabilities keyed by leaf prefix (outcomes in causal order)."""

    probabilities: Mapping
    order: Optional[tuple] = None

    def __getitem__(self, leaf) -> Fraction:
        return self.probabilities[tuple(leaf)]

    def __len__(self):
        return len(self.probabilities)

    def total(self) -> Fraction:
        return sum(self.probabilities.values(), Fraction(0))

    @cached_property
    def marginals(self) -> dict:
        """Probability of every prefix of every leaf, the empty prefix included."""
        out: dict = {}
        for leaf, pr in self.probabilities.items():
            for k in range(len(leaf) + 1):
                out[leaf[:k]] = out.get(leaf[:k], 0) + pr
        return out

    def by_outcome(self) -> dict:
        """Re-key by the full outcome ``(x_1, ..., x_p)`` in variable order."""
        if self.order is None:
            return dict(self.probabilities)
        out = {}
        for leaf, pr in self.probabilities.items():
            x = [0] * len(leaf)
            for slot, var in enumerate(self.order):
                x[var - 1] = leaf[slot]
            out[tuple(x)] = pr
        return out

    def to_json(self) -> dict:
        order = list(self.order) if self.order is not None else list(range(1, len(next(iter(self.probabilities))) + 1))
        return {
            "order": order,
            "probabilities": [
                {"outcome": list(leaf), "p": f"{pr.numerator}/{pr.denominator}"}
                for leaf, pr in sorted(self.probabilities.items())
            ],
        }

    @classmethod
    def from_json(cls, data) -> "LeafDistribution":
        if isinstance(data, str):
            data = json.loads(data)
        probs = {tuple(e["outcome"]): Fraction(e["p"]) for e in data["probabilities"]}
        return cls(probs, tuple(data["order"]))


def leaf_distribution(t: StagedTree, alpha: ParameterAssignment) -> LeafDistribution:
    """Path products of the parameters, one per leaf."""
    probs = {}
    mass = {(): Fraction(1)}
    for v in t.vertices:
        row = t.theta.get(v)
        if row is None:
            probs[v] = mass[v]
            continue
        for x, lab in enumerate(row):
            try:
                mass[v + (x,)] = mass[v] * alpha.values[lab]
            except KeyError:
                raise ModelError(f"no value for label {lab}") from None
    return LeafDistribution(probs, t.order)


def conditional(f: LeafDistribution, t: StagedTree, prefix, next_value: int) -> Fraction:
    """``f(x_k | x_1..x_{k-1})`` as a ratio of prefix marginals."""
    prefix = tuple(prefix)
    if prefix not in t.theta:
        raise ModelError(f"{list(prefix)} is not an internal vertex")
    if not 0 <= next_value < len(t.theta[prefix]):
        raise ModelError(f"outcome {next_value} out of range at {list(prefix)}")
    denom = f.marginals.get(prefix, 0)
    if denom == 0:
        raise ModelError(f"prefix {list(prefix)} has probability zero")
    return f.marginals.get(prefix + (next_value,), 0) / denom


# -- DAG factorisation ---------------------------------------------------


def _marginal_table(joint: Mapping, variables: tuple) -> dict:
    out: dict = {}
    for x, pr in joint.items():
        key = tuple(x[v - 1] for v in variables)
        out[key] = out.get(key, 0) + pr
    return out


def check_dag_factorization(f: LeafDistribution, g: Dag, s: StateSpace) -> bool:
    """Does ``f(x) == prod_k f(x_k | x_pa(k))`` hold for every outcome ``x``?"""
    joint = f.by_outcome()
    if len(joint) != s.size():
        raise ModelError(f"distribution has {len(joint)} outcomes, state space has {s.size()}")
    if any(pr <= 0 for pr in joint.values()):
        raise ModelError("distribution must be strictly positive")
    factors = []
    for k in g.nodes:
        pa = tuple(sorted(parents(g, k)))
        factors.append((k, pa, _marginal_table(joint, pa + (k,)), _marginal_table(joint, pa)))
    for x, pr in joint.items():
        prod = Fraction(1)
        for k, pa, num, den in factors:
            ctx = tuple(x[j - 1] for j in pa)
            prod *= num[ctx + (x[k - 1],)] / den[ctx]
        if prod != pr:
            return False
    return True


def check_invariances(f: LeafDistribution, t: StagedTree) -> bool:
    """Same-stage vertices have equal conditionals for each next outcome."""
    if any(pr <= 0 for pr in f.probabilities.values()):
        raise ModelError("distribution must be strictly positive")
    for block in t.stages:
        width = len(t.theta[block[0]])
        first = [conditional(f, t, block[0], x) for x in range(width)]
        for v in block[1:]:
            if len(t.theta[v]) != width:
                return False
            if any(conditional(f, t, v, x) != first[x] for x in range(width)):
                return False
    return True


# -- conditional probability tables --------------------------------------


@dataclass(frozen=True)
class Cpds:
    """Conditional tables ``(var, parent outcome) -> probability vector``."""

    tables: Mapping
    dag: Dag = field(repr=False)
    state_space: StateSpace = field(repr=False)

    def prob(self, var: int, value: int, ctx: tuple) -> Fraction:
        return self.tables[(var, ctx)][value]


def random_cpds(g: Dag, s: StateSpace, seed: int) -> Cpds:
    rng = np.random.default_rng(seed)
    tables = {}
    for k in g.nodes:
        pa = tuple(sorted(parents(g, k)))
        for y in s.outcomes(pa):
            tables[(k, y)] = _random_simplex_point(rng, s.card(k))
    return Cpds(tables, g, s)


def dag_distribution(cpds: Cpds, order=None) -> LeafDistribution:
    """Joint distribution by the recursive factorisation, keyed in ``order``."""
    g, s = cpds.dag, cpds.state_space
    order = tuple(order) if order is not None else tuple(g.nodes)
    pas = {k: tuple(sorted(parents(g, k))) for k in g.nodes}
    probs = {}
    for leaf in s.outcomes(order):
        x = [0] * s.p
        for slot, var in enumerate(order):
            x[var - 1] = leaf[slot]
        pr = Fraction(1)
        for k in g.nodes:
            pr *= cpds.prob(k, x[k - 1], tuple(x[j - 1] for j in pas[k]))
        probs[leaf] = pr
    return LeafDistribution(probs, order)


def induced_parameters(t: StagedTree, cpds: Cpds) -> ParameterAssignment:
    """Parameters of a DAG-built tree read off from conditional tables."""
    values = {}
    for lab in t.labels:
        var, value, ctx = lab.key
        values[lab.id] = cpds.prob(var, value, tuple(x for _, x in ctx))
    return ParameterAssignment(values)
