"""The coefficient tower Q ⊂ Q(δ) ⊂ Q(δ)(z).

:class:`Ring` fixes two disjoint symbol lists, parameters ``δ`` and z-variables.
:class:`ParamRat` is an element of Q(δ); :class:`RatFunc` is an element of
Q(δ)(z).  Both are immutable reduced fractions whose numerator and denominator
are FLINT ``fmpq_mpoly`` objects; the denominator is made monic, so equality is
structural.  A ``RatFunc`` stores its polynomials in one joint context
(z-variables first, then parameters) so that the GCD runs in a single call;
:meth:`RatFunc.numer` and :meth:`RatFunc.denom` expose the layered view, a
polynomial in z with ``ParamRat`` coefficients.
"""

from __future__ import annotations

import re
from fractions import Fraction
from functools import cached_property

import flint

from .printing import format_fraction

_SYMBOL = re.compile(r"[A-Za-z][A-Za-z0-9_]*\Z")


def to_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, flint.fmpq):
        return Fraction(int(x.p), int(x.q))
    if isinstance(x, flint.fmpz):
        return Fraction(int(x))
    raise TypeError(f"not an exact rational: {x!r}")


def _fmpq(x) -> flint.fmpq:
    f = to_fraction(x)
    return flint.fmpq(f.numerator, f.denominator)


class Ring:
    """Descriptor for Q(params)(zvars)."""

    def __init__(self, zvars=(), params=(), order: str = "degrevlex"):
        self.zvars = tuple(zvars)
        self.params = tuple(params)
        self.order = order
        names = self.zvars + self.params
        for s in names:
            if not _SYMBOL.match(s):
                raise ValueError(f"invalid symbol name {s!r}")
        if len(set(names)) != len(names):
            raise ValueError("parameter and z-variable symbols must be distinct")
        self.nz = len(self.zvars)
        self.np = len(self.params)
        self.pctx = flint.fmpq_mpoly_ctx.get(self.params, order)
        self.jctx = flint.fmpq_mpoly_ctx.get(names, order)
        self._pzero = (0,) * self.np
        self._zzero = (0,) * self.nz

    def __repr__(self):
        return f"Ring(zvars={self.zvars!r}, params={self.params!r})"

    def _key(self):
        return (self.zvars, self.params, self.order)

    def __eq__(self, other):
        return isinstance(other, Ring) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    # -- conversions between the parameter context and the joint context
    def lift(self, p: flint.fmpq_mpoly) -> flint.fmpq_mpoly:
        zz = self._zzero
        return self.jctx.from_dict({zz + tuple(e): c for e, c in p.terms()})

    def split(self, p: flint.fmpq_mpoly) -> dict:
        """Joint polynomial -> {z-exponent: parameter polynomial}."""
        nz = self.nz
        groups: dict = {}
        for e, c in p.terms():
            groups.setdefault(tuple(e[:nz]), {})[tuple(e[nz:])] = c
        return {ze: self.pctx.from_dict(d) for ze, d in groups.items()}

    def join(self, parts: dict) -> flint.fmpq_mpoly:
        d = {}
        for ze, pp in parts.items():
            ze = tuple(ze)
            for e, c in pp.terms():
                d[ze + tuple(e)] = c
        return self.jctx.from_dict(d)

    def zindex(self, var: str) -> int:
        try:
            return self.zvars.index(var)
        except ValueError:
            raise KeyError(f"{var!r} is not a z-variable of {self!r}") from None

    # -- element constructors
    def param(self, name: str) -> "ParamRat":
        return ParamRat(self, self.pctx.gen(self.params.index(name)))

    def pconst(self, x) -> "ParamRat":
        return ParamRat(self, self.pctx.constant(_fmpq(x)))

    def z(self, name: str) -> "RatFunc":
        return RatFunc(self, self.jctx.gen(self.zindex(name)))

    def const(self, x) -> "RatFunc":
        return RatFunc(self, self.jctx.constant(_fmpq(x)))

    @cached_property
    def zero(self) -> "RatFunc":
        return self.const(0)

    @cached_property
    def one(self) -> "RatFunc":
        return self.const(1)

    def symbol(self, name: str) -> "RatFunc":
        if name in self.zvars:
            return self.z(name)
        if name in self.params:
            return RatFunc(self, self.jctx.gen(self.nz + self.params.index(name)))
        raise KeyError(name)


class _Frac:
    __slots__ = ("ring", "num", "den", "__dict__")

    def __init__(self, ring: Ring, num, den=None, *, reduced: bool = False):
        ctx = self._ctx(ring)
        if den is None:
            den = ctx.constant(1)
        elif den.is_zero():
            raise ZeroDivisionError("zero denominator")
        if num.is_zero():
            den = ctx.constant(1)
        elif not reduced and not den.is_constant():
            g = num.gcd(den)
            if not g.is_one():
                num = num / g
                den = den / g
        lc = den.leading_coefficient()
        if lc != 1:
            inv = 1 / lc
            num = num * inv
            den = den * inv
        self.ring = ring
        self.num = num
        self.den = den

    @staticmethod
    def _ctx(ring):
        raise NotImplementedError

    # -- coercion
    def _coerce(self, other):
        if isinstance(other, type(self)):
            if other.ring != self.ring:
                raise ValueError("ring mismatch")
            return other
        if isinstance(other, (int, Fraction, flint.fmpq, flint.fmpz)):
            return type(self)(self.ring, self._ctx(self.ring).constant(_fmpq(other)), reduced=True)
        return NotImplemented

    # -- arithmetic
    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        cls = type(self)
        if self.den == o.den:
            return cls(self.ring, self.num + o.num, self.den)
        if self.den.is_one():
            return cls(self.ring, self.num * o.den + o.num, o.den, reduced=True)
        if o.den.is_one():
            return cls(self.ring, o.num * self.den + self.num, self.den, reduced=True)
        g = self.den.gcd(o.den)
        if g.is_one():
            return cls(self.ring, self.num * o.den + o.num * self.den, self.den * o.den, reduced=True)
        a = o.den / g
        b = self.den / g
        return cls(self.ring, self.num * a + o.num * b, self.den * a)

    __radd__ = __add__

    def __neg__(self):
        return type(self)(self.ring, -self.num, self.den, reduced=True)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        cls = type(self)
        if self.num.is_zero() or o.num.is_zero():
            return cls(self.ring, self._ctx(self.ring).constant(0), reduced=True)
        n1, d1, n2, d2 = self.num, self.den, o.num, o.den
        if not d2.is_one():
            g = n1.gcd(d2)
            if not g.is_one():
                n1, d2 = n1 / g, d2 / g
        if not d1.is_one():
            g = n2.gcd(d1)
            if not g.is_one():
                n2, d1 = n2 / g, d1 / g
        return cls(self.ring, n1 * n2, d1 * d2, reduced=True)

    __rmul__ = __mul__

    def inverse(self):
        if self.num.is_zero():
            raise ZeroDivisionError("inverse of zero")
        return type(self)(self.ring, self.den, self.num, reduced=True)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return o * self.inverse()

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return self.inverse() ** (-k)
        return type(self)(self.ring, self.num**k, self.den**k, reduced=True)

    # -- comparison
    def __eq__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self.num == o.num and self.den == o.den

    def __ne__(self, other):
        r = self.__eq__(other)
        return r if r is NotImplemented else not r

    @cached_property
    def _hash(self):
        return hash((type(self).__name__, str(self.num), str(self.den)))

    def __hash__(self):
        return self._hash

    def __bool__(self):
        return not self.num.is_zero()

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_one(self) -> bool:
        return self.num.is_one() and self.den.is_one()

    def is_constant(self) -> bool:
        return self.num.is_constant() and self.den.is_constant()

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise ValueError(f"{self} is not a constant")
        return to_fraction(self.num.leading_coefficient()) if not self.num.is_zero() else Fraction(0)

    def _names(self):
        raise NotImplementedError

    def __str__(self):
        return format_fraction(list(self.num.terms()), list(self.den.terms()), self._names())

    def __repr__(self):
        return f"{type(self).__name__}({self})"


class ParamRat(_Frac):
    """Element of Q(δ)."""

    __slots__ = ()

    @staticmethod
    def _ctx(ring):
        return ring.pctx

    def _names(self):
        return self.ring.params

    def evaluate(self, values: dict) -> Fraction:
        """Exact value at a rational parameter point ``{name: rational}``."""
        args = [_fmpq(values[p]) for p in self.ring.params]
        den = self.den(*args) if args else self.den.leading_coefficient()
        if den == 0:
            raise ZeroDivisionError(f"denominator of {self} vanishes at {values}")
        num = self.num(*args) if args else (self.num.leading_coefficient() if not self.num.is_zero() else 0)
        return to_fraction(flint.fmpq(num) / den)

    def to_ratfunc(self) -> "RatFunc":
        return RatFunc(self.ring, self.ring.lift(self.num), self.ring.lift(self.den), reduced=True)

    def negate_params(self) -> "ParamRat":
        """The image under δ ↦ −δ."""
        ctx = self.ring.pctx
        imgs = [-g for g in ctx.gens()]
        if not imgs:
            return self
        return ParamRat(self.ring, self.num.compose(*imgs), self.den.compose(*imgs))


class RatFunc(_Frac):
    """Element of Q(δ)(z)."""

    __slots__ = ()

    @staticmethod
    def _ctx(ring):
        return ring.jctx

    def _names(self):
        return self.ring.zvars + self.ring.params

    def _coerce(self, other):
        if isinstance(other, ParamRat):
            if other.ring != self.ring:
                raise ValueError("ring mismatch")
            return other.to_ratfunc()
        return super()._coerce(other)

    def derivative(self, var: str) -> "RatFunc":
        i = self.ring.zindex(var)
        n, d = self.num, self.den
        dn = n.derivative(i)
        if d.is_one():
            return RatFunc(self.ring, dn, d, reduced=True)
        dd = d.derivative(i)
        if dd.is_zero():
            return RatFunc(self.ring, dn, d)
        # d/dz (n/d) = (n' d - n d') / d^2 ; cancel gcd(d, d') first
        g = d.gcd(dd)
        dg = d / g
        return RatFunc(self.ring, dn * dg - n * (dd / g), d * dg)

    def zdegrees(self):
        """Total z-degrees of numerator and denominator."""
        nz = self.ring.nz
        def deg(p):
            return max((sum(e[:nz]) for e, _ in p.terms()), default=0)
        return deg(self.num), deg(self.den)

    def free_zvars(self) -> set:
        nz = self.ring.nz
        used = set()
        for p in (self.num, self.den):
            for e, _ in p.terms():
                used.update(self.ring.zvars[i] for i in range(nz) if e[i])
        return used

    def is_z_free(self) -> bool:
        return not self.free_zvars()

    def to_param(self) -> ParamRat:
        if not self.is_z_free():
            raise ValueError(f"{self} depends on z")
        ring = self.ring
        return ParamRat(ring, ring.split(self.num).get(ring._zzero, ring.pctx.constant(0)),
                        ring.split(self.den)[ring._zzero], reduced=True)

    def subs(self, assignment: dict) -> "RatFunc":
        """Substitute rational constants for z-variables.

        Raises ``ZeroDivisionError`` if the denominator vanishes identically.
        """
        if not assignment:
            return self
        vals = {k: _fmpq(v) for k, v in assignment.items()}
        for k in vals:
            self.ring.zindex(k)
        den = self.den.subs(vals)
        if den.is_zero():
            raise ZeroDivisionError(f"denominator of {self} vanishes at {assignment}")
        return RatFunc(self.ring, self.num.subs(vals), den)

    def evaluate(self, values: dict) -> Fraction:
        names = self.ring.zvars + self.ring.params
        args = [_fmpq(values[s]) for s in names]
        den = self.den(*args)
        if den == 0:
            raise ZeroDivisionError(f"denominator of {self} vanishes at {values}")
        return to_fraction(flint.fmpq(self.num(*args)) / den)

    def numer(self):
        """Numerator as an MPoly in z over Q(δ), denominator normalized to lc 1."""
        return self._layered()[0]

    def denom(self):
        return self._layered()[1]

    def _layered(self):
        from .mpoly import MPoly

        ring = self.ring
        num_parts = ring.split(self.num)
        den_parts = ring.split(self.den)
        order = MPoly.default_order
        lead = max(den_parts, key=order.key())
        lc = ParamRat(ring, den_parts[lead])
        num = MPoly(ring.zvars, {e: ParamRat(ring, p) / lc for e, p in num_parts.items()})
        den = MPoly(ring.zvars, {e: ParamRat(ring, p) / lc for e, p in den_parts.items()})
        return num, den
