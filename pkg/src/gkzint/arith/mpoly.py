"""Sparse multivariate polynomials with generic exact coefficients."""

from __future__ import annotations

from fractions import Fraction
from typing import Mapping

import flint

from .fields import ParamRat, Ring, _fmpq, to_fraction
from .orders import TermOrder, divides, exp_add, exp_sub
from .printing import format_terms


class MPoly:
    """Polynomial in ``variables`` with coefficients in Q (``Fraction``) or Q(δ) (``ParamRat``).

    ``terms`` maps exponent tuples to nonzero coefficients.  Instances are
    treated as immutable.
    """

    __slots__ = ("variables", "terms", "order")
    default_order = TermOrder("grevlex")

    def __init__(self, variables, terms: Mapping | None = None, order: TermOrder | None = None):
        self.variables = tuple(variables)
        self.order = order or MPoly.default_order
        n = len(self.variables)
        clean = {}
        for e, c in (terms or {}).items():
            e = tuple(int(x) for x in e)
            if len(e) != n or any(x < 0 for x in e):
                raise ValueError(f"bad exponent {e} for variables {self.variables}")
            if isinstance(c, int):
                c = Fraction(c)
            if c != 0:
                clean[e] = c
        self.terms = clean

    # -- constructors
    @classmethod
    def constant(cls, variables, c, order=None):
        return cls(variables, {(0,) * len(tuple(variables)): c}, order)

    @classmethod
    def gen(cls, variables, name, order=None):
        variables = tuple(variables)
        e = tuple(1 if v == name else 0 for v in variables)
        if not any(e):
            raise KeyError(name)
        return cls(variables, {e: Fraction(1)}, order)

    def _new(self, terms):
        return MPoly(self.variables, terms, self.order)

    def _check(self, other):
        if isinstance(other, MPoly):
            if other.variables != self.variables:
                raise ValueError("variable lists differ")
            return other
        return self._new({(0,) * len(self.variables): other}) if other != 0 else self._new({})

    # -- ring operations
    def __add__(self, other):
        other = self._check(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            s = out.get(e)
            s = c if s is None else s + c
            if s == 0:
                out.pop(e, None)
            else:
                out[e] = s
        return self._new(out)

    __radd__ = __add__

    def __neg__(self):
        return self._new({e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._check(other))

    def __rsub__(self, other):
        return self._check(other) - self

    def __mul__(self, other):
        if not isinstance(other, MPoly):
            if other == 0:
                return self._new({})
            return self._new({e: c * other for e, c in self.terms.items()})
        other = self._check(other)
        out: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = exp_add(e1, e2)
                s = out.get(e)
                out[e] = c1 * c2 if s is None else s + c1 * c2
        return self._new({e: c for e, c in out.items() if c != 0})

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power of a polynomial")
        result = MPoly.constant(self.variables, Fraction(1), self.order)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, MPoly):
            return self.variables == other.variables and self.terms == other.terms
        if other == 0:
            return not self.terms
        return self == self._check(other)

    def __hash__(self):
        return hash((self.variables, frozenset((e, hash(c)) for e, c in self.terms.items())))

    def __bool__(self):
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    # -- term access
    def sorted_terms(self):
        key = self.order.key()
        return sorted(self.terms.items(), key=lambda t: key(t[0]), reverse=True)

    def lead(self):
        """(exponent, coefficient) of the leading term."""
        if not self.terms:
            raise ValueError("zero polynomial has no leading term")
        key = self.order.key()
        e = max(self.terms, key=key)
        return e, self.terms[e]

    def lm(self):
        return self.lead()[0]

    def lc(self):
        return self.lead()[1]

    def total_degree(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)

    def monic(self):
        if not self.terms:
            return self
        c = self.lc()
        return self._new({e: v / c for e, v in self.terms.items()})

    def mul_term(self, exp, c=Fraction(1)):
        return self._new({exp_add(e, exp): v * c for e, v in self.terms.items()})

    def derivative(self, var: str):
        i = self.variables.index(var)
        out = {}
        for e, c in self.terms.items():
            if e[i]:
                d = list(e)
                d[i] -= 1
                out[tuple(d)] = c * e[i]
        return self._new(out)

    def reorder(self, variables):
        """Same polynomial expressed over a permutation of the variable list."""
        variables = tuple(variables)
        perm = [self.variables.index(v) for v in variables]
        return MPoly(variables, {tuple(e[p] for p in perm): c for e, c in self.terms.items()}, self.order)

    def with_order(self, order: TermOrder):
        return MPoly(self.variables, self.terms, order)

    def divides_exactly_by_var(self, var: str) -> int:
        """Largest k with var^k dividing every term."""
        i = self.variables.index(var)
        return min((e[i] for e in self.terms), default=0)

    def __str__(self):
        terms = self.sorted_terms()
        if all(isinstance(c, Fraction) for _, c in terms):
            if all(c.denominator == 1 for _, c in terms):
                return format_terms([(e, int(c)) for e, c in terms], self.variables)
        parts = []
        for e, c in terms:
            mono = "*".join(
                v if k == 1 else f"{v}^{k}" for v, k in zip(self.variables, e) if k
            )
            cs = str(c)
            if not mono:
                parts.append(f"({cs})")
            else:
                parts.append(f"({cs})*{mono}")
        return "+".join(parts) if parts else "0"

    __repr__ = __str__


# --------------------------------------------------------------------------
# gcd

def _rational_gcd(a: MPoly, b: MPoly) -> MPoly:
    ctx = flint.fmpq_mpoly_ctx.get(a.variables, "degrevlex")
    fa = ctx.from_dict({e: _fmpq(c) for e, c in a.terms.items()})
    fb = ctx.from_dict({e: _fmpq(c) for e, c in b.terms.items()})
    g = fa.gcd(fb)
    return MPoly(a.variables, {tuple(e): to_fraction(c) for e, c in g.terms()}, a.order).monic()


def _param_gcd(a: MPoly, b: MPoly, ring: Ring) -> MPoly:
    # Clear Q(δ) denominators, take the gcd in Q[z, δ], then remove the
    # δ-content: by Gauss' lemma this is the gcd over Q(δ)[z] up to a unit.
    names = a.variables + ring.params
    ctx = flint.fmpq_mpoly_ctx.get(names, "degrevlex")
    nv = len(a.variables)

    def joint(p: MPoly):
        den = ring.pctx.constant(1)
        for c in p.terms.values():
            den = den * (c.den / den.gcd(c.den))
        d = {}
        for e, c in p.terms.items():
            q = c.num * (den / c.den)
            for pe, pc in q.terms():
                d[tuple(e) + tuple(pe)] = pc
        return ctx.from_dict(d)

    g = joint(a).gcd(joint(b))
    groups: dict = {}
    for e, c in g.terms():
        groups.setdefault(tuple(e[:nv]), {})[tuple(e[nv:])] = c
    out = {ze: ParamRat(ring, ring.pctx.from_dict(d)) for ze, d in groups.items()}
    return MPoly(a.variables, out, a.order).monic()


def poly_gcd(a: MPoly, b: MPoly) -> MPoly:
    """Monic greatest common divisor; ``gcd(0, 0) = 0``."""
    if a.variables != b.variables:
        raise ValueError("poly_gcd needs a common variable list")
    if a.is_zero() and b.is_zero():
        return a
    if a.is_zero():
        return b.monic()
    if b.is_zero():
        return a.monic()
    coeffs = list(a.terms.values()) + list(b.terms.values())
    rings = {c.ring for c in coeffs if isinstance(c, ParamRat)}
    if not rings:
        return _rational_gcd(a, b)
    if len(rings) > 1:
        raise ValueError("coefficients from different parameter rings")
    ring = rings.pop()
    lift = lambda p: p._new({e: c if isinstance(c, ParamRat) else ring.pconst(c) for e, c in p.terms.items()})
    return _param_gcd(lift(a), lift(b), ring)


def poly_divmod(p: MPoly, divisors: list) -> tuple:
    """Multivariate division; returns (quotients, remainder)."""
    qs = [p._new({}) for _ in divisors]
    r = p._new({})
    p = p
    leads = [d.lead() for d in divisors]
    while p:
        e, c = p.lead()
        for k, (de, dc) in enumerate(leads):
            if divides(de, e):
                m = exp_sub(e, de)
                f = c / dc
                qs[k] = qs[k] + p._new({m: f})
                p = p - divisors[k].mul_term(m, f)
                break
        else:
            r = r + p._new({e: c})
            p = p - p._new({e: c})
    return qs, r
