"""Exact sparse polynomials over the edge-label indeterminates.

A monomial is a tuple of ``(label_id, exponent)`` pairs sorted by label id
with positive exponents; a polynomial maps monomials to nonzero integers.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Mapping

ONE_MONOMIAL: tuple = ()


def mono_mul(a: tuple, b: tuple) -> tuple:
    if not a:
        return b
    if not b:
        return a
    out = []
    i = j = 0
    while i < len(a) and j < len(b):
        if a[i][0] == b[j][0]:
            out.append((a[i][0], a[i][1] + b[j][1]))
            i += 1
            j += 1
        elif a[i][0] < b[j][0]:
            out.append(a[i])
            i += 1
        else:
            out.append(b[j])
            j += 1
    out.extend(a[i:])
    out.extend(b[j:])
    return tuple(out)


def mono_degree(m: tuple) -> int:
    return sum(e for _, e in m)


class Poly:
    """Immutable polynomial with integer coefficients, kept in canonical form."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping | None = None):
        clean = {}
        for mono, c in (terms or {}).items():
            if c:
                clean[_canonical(mono)] = clean.get(_canonical(mono), 0) + c
        self._terms = {m: c for m, c in clean.items() if c}
        self._hash = None

    @classmethod
    def _raw(cls, terms: dict) -> "Poly":
        # terms already canonical with nonzero coefficients
        p = object.__new__(cls)
        p._terms = terms
        p._hash = None
        return p

    @classmethod
    def zero(cls) -> "Poly":
        return cls._raw({})

    @classmethod
    def one(cls) -> "Poly":
        return cls._raw({ONE_MONOMIAL: 1})

    @classmethod
    def const(cls, c: int) -> "Poly":
        return cls._raw({ONE_MONOMIAL: c} if c else {})

    @classmethod
    def var(cls, label_id: int) -> "Poly":
        return cls._raw({((label_id, 1),): 1})

    @property
    def terms(self) -> dict:
        return dict(self._terms)

    def __len__(self):
        return len(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def variables(self) -> set:
        return {lab for m in self._terms for lab, _ in m}

    def degree(self) -> int:
        return max((mono_degree(m) for m in self._terms), default=-1)

    def __add__(self, other):
        if isinstance(other, int):
            other = Poly.const(other)
        out = dict(self._terms)
        for m, c in other._terms.items():
            s = out.get(m, 0) + c
            if s:
                out[m] = s
            else:
                out.pop(m, None)
        return Poly._raw(out)

    __radd__ = __add__

    def __neg__(self):
        return Poly._raw({m: -c for m, c in self._terms.items()})

    def __sub__(self, other):
        if isinstance(other, int):
            other = Poly.const(other)
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, int):
            return Poly._raw({m: c * other for m, c in self._terms.items()} if other else {})
        out: dict = {}
        for ma, ca in self._terms.items():
            for mb, cb in other._terms.items():
                m = mono_mul(ma, mb)
                s = out.get(m, 0) + ca * cb
                if s:
                    out[m] = s
                else:
                    del out[m]
        return Poly._raw(out)

    __rmul__ = __mul__

    def __eq__(self, other):
        if isinstance(other, int):
            other = Poly.const(other)
        if not isinstance(other, Poly):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def sorted_terms(self) -> list:
        return sorted(self._terms.items())

    def __repr__(self):
        return f"Poly({self.sorted_terms()!r})"

    def format(self, names=None) -> str:
        """Human-readable text; ``names`` maps label id to a display string."""
        if not self._terms:
            return "0"
        parts = []
        for m, c in self.sorted_terms():
            factors = []
            for lab, e in m:
                base = names(lab) if names else f"t{lab}"
                factors.append(base if e == 1 else f"{base}^{e}")
            body = "*".join(factors)
            if not body:
                parts.append(str(c))
            elif c == 1:
                parts.append(body)
            elif c == -1:
                parts.append("-" + body)
            else:
                parts.append(f"{c}*{body}")
        return " + ".join(parts).replace("+ -", "- ")

    __str__ = format


def _canonical(mono) -> tuple:
    acc: dict = {}
    for lab, e in mono:
        if e < 0:
            raise ValueError("negative exponent")
        acc[lab] = acc.get(lab, 0) + e
    return tuple(sorted((lab, e) for lab, e in acc.items() if e))


def poly_add(a: Poly, b: Poly) -> Poly:
    return a + b


def poly_mul(a: Poly, b: Poly) -> Poly:
    return a * b


def poly_eq(a: Poly, b: Poly) -> bool:
    return a == b


def evaluate(pol: Poly, point: Mapping) -> Fraction:
    """Exact value of ``pol`` at ``point`` (label id -> rational)."""
    total = Fraction(0)
    for m, c in pol._terms.items():
        term = Fraction(c)
        for lab, e in m:
            try:
                term *= Fraction(point[lab]) ** e
            except KeyError:
                raise KeyError(f"no value for label {lab}") from None
        total += term
    return total


def interpolating_polys(t) -> dict:
    """``t(v)`` for every vertex, computed bottom-up in one pass."""
    out: dict = {}
    for v in reversed(t.vertices):
        row = t.theta.get(v)
        if row is None:
            out[v] = Poly.one()
            continue
        acc: dict = {}
        for x, lab in enumerate(row):
            for m, c in out[v + (x,)]._terms.items():
                mm = mono_mul(((lab, 1),), m)
                acc[mm] = acc.get(mm, 0) + c
        out[v] = Poly._raw({m: c for m, c in acc.items() if c})
    return out


def interpolating_poly(t, v) -> Poly:
    """Sum over root-to-leaf paths of the subtree at ``v`` of the label products."""
    v = tuple(v)
    if not t.is_vertex(v):
        raise KeyError(f"{list(v)} is not a vertex of the tree")
    cache = _tree_cache(t)
    return cache[v]


def _tree_cache(t) -> dict:
    # trees are immutable, so the table can be attached once
    cache = t.__dict__.get("_interp")
    if cache is None:
        cache = interpolating_polys(t)
        object.__setattr__(t, "_interp", cache)
    return cache


def format_poly(pol: Poly, t) -> str:
    """Render using the tree's label names, e.g. ``f(x4=1|x2=0,x3=1)``."""
    return pol.format(lambda lab: str(t.labels[lab]))
