"""Differential operators with rational function coefficients.

An operator is stored in normal order, ``sum_a f_a(z) ∂^a`` with the
coefficients to the left.  Left ideals of this ring have Gröbner bases with
respect to term orders on ∂-monomials alone, because coefficients form a
field.  The staircase of a holonomic ideal is finite; its size is the rank.
"""

from __future__ import annotations

import heapq
import time
from dataclasses import dataclass, field
from math import comb

from .arith.fields import ParamRat, RatFunc, Ring
from .arith.orders import TermOrder, divides, exp_add, exp_lcm, exp_sub
from .arith.parse import fold, parse_ast
from .errors import NonHolonomicError, ParseError, ResourceLimitError, UnknownSymbolError

Exp = tuple


class DiffOp:
    __slots__ = ("ring", "terms")

    def __init__(self, ring: Ring, terms=None):
        self.ring = ring
        n = ring.nz
        clean = {}
        for e, c in (terms or {}).items():
            e = tuple(e)
            if len(e) != n:
                raise ValueError(f"exponent {e} has wrong length")
            if not isinstance(c, RatFunc):
                c = _coef(ring, c)
            if c:
                clean[e] = c
        self.terms = clean

    # -- constructors
    @classmethod
    def scalar(cls, ring: Ring, c) -> "DiffOp":
        return cls(ring, {(0,) * ring.nz: _coef(ring, c)})

    @classmethod
    def d(cls, ring: Ring, var: str, power: int = 1) -> "DiffOp":
        e = [0] * ring.nz
        e[ring.zindex(var)] = power
        return cls(ring, {tuple(e): ring.one})

    @classmethod
    def monomial(cls, ring: Ring, exp, c=None) -> "DiffOp":
        return cls(ring, {tuple(exp): ring.one if c is None else c})

    # -- linear structure
    def _wrap(self, other):
        if isinstance(other, DiffOp):
            return other
        return DiffOp.scalar(self.ring, other)

    def __add__(self, other):
        other = self._wrap(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            s = out.get(e)
            s = c if s is None else s + c
            if s:
                out[e] = s
            else:
                out.pop(e, None)
        return DiffOp(self.ring, out)

    __radd__ = __add__

    def __neg__(self):
        return DiffOp(self.ring, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._wrap(other))

    def __rsub__(self, other):
        return self._wrap(other) - self

    def lmul(self, c) -> "DiffOp":
        """Left multiplication by a function or parameter constant."""
        c = _coef(self.ring, c)
        if not c:
            return DiffOp(self.ring)
        return DiffOp(self.ring, {e: c * v for e, v in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, DiffOp):
            return op_mul(self, other)
        # right multiplication by a function is an operator product too
        return op_mul(self, DiffOp.scalar(self.ring, other))

    def __rmul__(self, other):
        return self.lmul(other)

    def __pow__(self, k: int):
        out = DiffOp.scalar(self.ring, 1)
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        if isinstance(other, DiffOp):
            return self.ring == other.ring and self.terms == other.terms
        return self == self._wrap(other)

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __bool__(self):
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def order(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)

    def is_function(self) -> bool:
        return all(not any(e) for e in self.terms)

    def function_part(self) -> RatFunc:
        if not self.is_function():
            raise ValueError(f"{self} is not a function")
        return self.terms.get((0,) * self.ring.nz, self.ring.zero)

    # -- order dependent
    def lead(self, order: TermOrder):
        key = order.key()
        e = max(self.terms, key=key)
        return e, self.terms[e]

    def monic(self, order: TermOrder) -> "DiffOp":
        _, c = self.lead(order)
        if c.is_one():
            return self
        return self.lmul(c.inverse())

    def map_coeffs(self, f) -> "DiffOp":
        return DiffOp(self.ring, {e: f(c) for e, c in self.terms.items()})

    def to_str(self, order: TermOrder | None = None) -> str:
        if not self.terms:
            return "0"
        order = order or TermOrder()
        dn = ["d" + z for z in self.ring.zvars]
        parts = []
        for e in order.sort_desc(self.terms):
            c = self.terms[e]
            mono = "*".join(n if k == 1 else f"{n}^{k}" for n, k in zip(dn, e) if k)
            cs = str(c)
            if mono:
                if c.is_one():
                    parts.append(mono)
                    continue
                if any(ch in cs[1:] for ch in "+-/") or cs.startswith("-"):
                    cs = f"({cs})"
                parts.append(f"{cs}*{mono}")
            else:
                parts.append(cs if not any(ch in cs[1:] for ch in "+-") else f"({cs})")
        return "+".join(parts)

    def __str__(self):
        return self.to_str()

    __repr__ = __str__


def _coef(ring: Ring, c) -> RatFunc:
    if isinstance(c, RatFunc):
        return c
    if isinstance(c, ParamRat):
        return c.to_ratfunc()
    return ring.const(c)


# --------------------------------------------------------------------------
# products


class _Derivatives:
    """Memoized mixed partial derivatives of coefficients."""

    def __init__(self, ring: Ring):
        self.ring = ring
        self.cache: dict = {}

    def __call__(self, f: RatFunc, kappa: Exp) -> RatFunc:
        if not any(kappa):
            return f
        key = (f, kappa)
        hit = self.cache.get(key)
        if hit is not None:
            return hit
        i = next(k for k, v in enumerate(kappa) if v)
        lower = list(kappa)
        lower[i] -= 1
        out = self(f, tuple(lower)).derivative(self.ring.zvars[i])
        self.cache[key] = out
        return out


_DERIVS: dict = {}


def _derivs(ring: Ring) -> _Derivatives:
    d = _DERIVS.get(ring)
    if d is None:
        d = _DERIVS[ring] = _Derivatives(ring)
    return d


def _sub_multi_indices(alpha):
    if not alpha:
        yield ()
        return
    for rest in _sub_multi_indices(alpha[1:]):
        for k in range(alpha[0] + 1):
            yield (k,) + rest


def op_mul(a: DiffOp, b: DiffOp) -> DiffOp:
    """Normal-ordered product, via ∂^α f = Σ_κ C(α,κ) (∂^κ f) ∂^(α-κ)."""
    if a.ring != b.ring:
        raise ValueError("operators over different rings")
    ring = a.ring
    der = _derivs(ring)
    out: dict = {}
    for alpha, fa in a.terms.items():
        for beta, gb in b.terms.items():
            for kappa in _sub_multi_indices(alpha):
                binom = 1
                for x, y in zip(alpha, kappa):
                    binom *= comb(x, y)
                dg = der(gb, kappa)
                if not dg:
                    continue
                e = exp_add(exp_sub(alpha, kappa), beta)
                t = fa * dg
                if binom != 1:
                    t = t * binom
                s = out.get(e)
                out[e] = t if s is None else s + t
    return DiffOp(ring, {e: c for e, c in out.items() if c})


def d_times(op: DiffOp, i: int) -> DiffOp:
    """∂_i · op."""
    ring = op.ring
    var = ring.zvars[i]
    out: dict = {}
    for e, c in op.terms.items():
        up = list(e)
        up[i] += 1
        up = tuple(up)
        s = out.get(up)
        out[up] = c if s is None else s + c
        dc = c.derivative(var)
        if dc:
            s = out.get(e)
            out[e] = dc if s is None else s + dc
    return DiffOp(ring, {e: c for e, c in out.items() if c})


# --------------------------------------------------------------------------
# parsing


class _OpBuilder:
    def __init__(self, ring: Ring):
        self.ring = ring
        self.dnames = {"d" + z: z for z in ring.zvars}

    def const(self, v):
        return DiffOp.scalar(self.ring, v)

    def symbol(self, name, offset, text):
        ring = self.ring
        if name in self.dnames:
            return DiffOp.d(ring, self.dnames[name])
        if name in ring.zvars or name in ring.params:
            return DiffOp.scalar(ring, ring.symbol(name))
        raise UnknownSymbolError(name, offset, text)

    def mul(self, a, b):
        return op_mul(a, b)

    def power(self, a, k):
        return a**k

    def div(self, a, b, offset, text):
        if not b.is_function() or not b:
            raise ParseError("division by an operator or by zero", offset, text)
        return a.lmul(b.function_part().inverse()) if a.is_function() else op_mul(
            a, DiffOp.scalar(self.ring, b.function_part().inverse())
        )


def parse_op(text: str, ring: Ring) -> DiffOp:
    """Parse an operator string such as ``"z4*dz4"``; products are noncommutative."""
    return fold(parse_ast(text), _OpBuilder(ring), text)


# --------------------------------------------------------------------------
# Gröbner bases


@dataclass
class GroebnerBasis:
    generators: list
    order: TermOrder
    ring: Ring
    stats: dict = field(default_factory=dict)

    def __post_init__(self):
        self._reducer = _Reducer(self.generators, self.order)

    @property
    def leading_monomials(self) -> list:
        return [g.lead(self.order)[0] for g in self.generators]

    def reduce(self, p: DiffOp) -> DiffOp:
        return self._reducer.reduce(p)


class _Reducer:
    def __init__(self, gens, order: TermOrder):
        self.gens = list(gens)
        self.order = order
        self.key = order.key()
        self.leads = [g.lead(order)[0] for g in self.gens]
        self.cache: dict = {}

    def add(self, g):
        self.gens.append(g)
        self.leads.append(g.lead(self.order)[0])

    def shifted(self, k: int, kappa: Exp) -> DiffOp:
        """∂^κ · g_k, memoized."""
        key = (k, kappa)
        hit = self.cache.get(key)
        if hit is not None:
            return hit
        if not any(kappa):
            out = self.gens[k]
        else:
            i = next(j for j, v in enumerate(kappa) if v)
            lower = list(kappa)
            lower[i] -= 1
            out = d_times(self.shifted(k, tuple(lower)), i)
        self.cache[key] = out
        return out

    def reduce(self, p: DiffOp, skip: int | None = None) -> DiffOp:
        key = self.key
        todo = dict(p.terms)
        rem = {}
        leads = self.leads
        while todo:
            e = max(todo, key=key)
            c = todo[e]
            for k, le in enumerate(leads):
                if k == skip or not divides(le, e):
                    continue
                red = self.shifted(k, exp_sub(e, le))
                for e2, c2 in red.terms.items():
                    s = todo.get(e2)
                    t = c * c2
                    s = -t if s is None else s - t
                    if s:
                        todo[e2] = s
                    else:
                        todo.pop(e2, None)
                todo.pop(e, None)
                break
            else:
                rem[e] = todo.pop(e)
        return DiffOp(p.ring, rem)


def normal_form(p: DiffOp, g: GroebnerBasis) -> DiffOp:
    """Remainder of ``p`` modulo the left ideal, supported on standard monomials."""
    return g.reduce(p)


def _sugar(op: DiffOp) -> int:
    return op.order()


def buchberger(gens, order: TermOrder | None = None, *, max_pairs: int = 100_000,
               deadline: float | None = None) -> GroebnerBasis:
    """Reduced Gröbner basis of the left ideal generated by ``gens``.

    Pairs are selected by sugar degree; pairs are skipped by the chain
    criterion only (the coprime-leading-monomial criterion does not hold for
    operators).  ``max_pairs`` caps the number of pairs ever formed and
    ``deadline`` is an absolute ``time.monotonic()`` bound.
    """
    order = order or TermOrder()
    gens = [g for g in gens if g]
    if not gens:
        raise ValueError("buchberger needs a nonzero generator")
    ring = gens[0].ring
    key = order.key()

    red = _Reducer([], order)
    sugar: list = []
    queue: list = []
    done: set = set()
    npairs = 0
    nreductions = 0
    tick = 0

    def push_pairs(t):
        nonlocal npairs, tick
        lt = red.leads[t]
        for i in range(t):
            if red.gens[i] is None:
                continue
            li = red.leads[i]
            lcm = exp_lcm(li, lt)
            s = max(sugar[i] + sum(lcm) - sum(li), sugar[t] + sum(lcm) - sum(lt))
            tick += 1
            heapq.heappush(queue, (s, key(lcm), i, t, lcm))
            npairs += 1
            if npairs > max_pairs:
                raise ResourceLimitError(
                    f"Gröbner pair cap {max_pairs} exceeded", stage="weyl",
                    counters={"pairs": npairs, "basis": len(red.gens)})

    def insert(h, s):
        h = h.monic(order)
        red.add(h)
        sugar.append(s)
        push_pairs(len(red.gens) - 1)

    # inter-reduce the input before pairing
    for g in sorted(gens, key=lambda g: key(g.lead(order)[0])):
        h = red.reduce(g)
        if h:
            insert(h, _sugar(g))

    while queue:
        if deadline is not None and time.monotonic() > deadline:
            raise ResourceLimitError("Gröbner basis deadline exceeded", stage="weyl",
                                     counters={"pairs": npairs, "basis": len(red.gens)})
        s, _, i, j, lcm = heapq.heappop(queue)
        done.add((i, j))
        if _chain_skip(i, j, lcm, red.leads, done):
            continue
        li, lj = red.leads[i], red.leads[j]
        spoly = red.shifted(i, exp_sub(lcm, li)) - red.shifted(j, exp_sub(lcm, lj))
        h = red.reduce(spoly)
        nreductions += 1
        if h:
            insert(h, s)

    basis = _reduce_basis(red.gens, order)
    return GroebnerBasis(basis, order, ring, stats={"pairs": npairs, "reductions": nreductions})


def _chain_skip(i, j, lcm, leads, done) -> bool:
    for k, lk in enumerate(leads):
        if k in (i, j) or not divides(lk, lcm):
            continue
        a, b = (min(i, k), max(i, k)), (min(j, k), max(j, k))
        if a in done and b in done:
            return True
    return False


def _reduce_basis(gens, order: TermOrder) -> list:
    key = order.key()
    gens = sorted(gens, key=lambda g: key(g.lead(order)[0]))
    minimal = []
    for g in gens:
        lg = g.lead(order)[0]
        if any(divides(h.lead(order)[0], lg) for h in minimal):
            continue
        minimal = [h for h in minimal if not divides(lg, h.lead(order)[0])]
        minimal.append(g)
    out = []
    for k, g in enumerate(minimal):
        others = _Reducer([h for m, h in enumerate(minimal) if m != k], order)
        le, lc = g.lead(order)
        tail = DiffOp(g.ring, {e: c for e, c in g.terms.items() if e != le})
        r = others.reduce(tail)
        out.append((DiffOp.monomial(g.ring, le, lc) + r).monic(order))
    return sorted(out, key=lambda g: key(g.lead(order)[0]))


def standard_monomials(g: GroebnerBasis) -> list:
    """Ascending list of ∂-exponents not divisible by any leading monomial."""
    leads = g.leading_monomials
    n = g.ring.nz
    bounds = []
    for i in range(n):
        pure = [le[i] for le in leads if le[i] and all(le[j] == 0 for j in range(n) if j != i)]
        if not pure:
            raise NonHolonomicError(
                f"no leading monomial is a pure power of d{g.ring.zvars[i]}; the staircase is infinite",
                stage="weyl")
        bounds.append(min(pure))
    out = []

    def walk(prefix):
        if len(prefix) == n:
            e = tuple(prefix)
            if not any(divides(le, e) for le in leads):
                out.append(e)
            return
        for k in range(bounds[len(prefix)]):
            walk(prefix + [k])

    walk([])
    return sorted(out, key=g.order.key())
