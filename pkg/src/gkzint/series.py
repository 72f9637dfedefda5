"""Γ-series solutions attached to simplices, and the quadratic relation check.

For a simplex σ with |det A_σ| = 1 put ρ = −A_σ^{-1}δ on σ and 0 elsewhere.
The lattice points are ℓ(m) with ℓ_j = m_j off σ (m ∈ N^{N−n−k}) and
ℓ_σ = −A_σ^{-1} A_σ̄ m, and

    φ_σ(z; δ) = Σ_m z^{ρ+ℓ(m)} / Π_i Γ(1 + ρ_i + ℓ_i)
              = (1 / Π_{i∈σ} Γ(1+ρ_i)) Σ_m c(m) z^{ρ+ℓ(m)}

with c(m) ∈ Q(δ) obtained from Γ(x+1) = xΓ(x).
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

from .arith.fields import ParamRat, Ring
from .errors import ResonanceError, ValidationError
from .gkz import CayleyMatrix, ParamVector, Triangulation, inverse_submatrix, simplex_solution


class SeriesDivergenceWarning(UserWarning):
    pass


@dataclass
class GammaSeries:
    simplex: tuple
    exponent: list  # ρ, length N, ParamRat entries
    directions: list  # ℓ(e_k) for each off-σ column k, integer vectors
    order: int
    terms: dict = field(default_factory=dict)  # m -> ParamRat c(m)

    def lattice_point(self, m) -> tuple:
        n = len(self.exponent)
        return tuple(sum(mk * d[j] for mk, d in zip(m, self.directions)) for j in range(n))


def _lattice_directions(a: CayleyMatrix, sigma) -> tuple:
    inv = inverse_submatrix(a, sigma)
    off = [j for j in range(a.N) if j not in sigma]
    dirs = []
    for k in off:
        col = a.column(k)
        v = [0] * a.N
        v[k] = 1
        for r, i in enumerate(sigma):
            x = -sum(inv[r][c] * col[c] for c in range(a.rows))
            if x.denominator != 1:
                raise ValidationError(f"simplex {[s + 1 for s in sigma]} is not unimodular")
            v[i] = int(x)
        dirs.append(tuple(v))
    return off, dirs


def _gamma_ratio(rho: ParamRat, l: int) -> ParamRat:
    """Γ(1+ρ)/Γ(1+ρ+l) for an integer l."""
    out = rho.ring.pconst(1)
    if l >= 0:
        for j in range(1, l + 1):
            f = rho + j
            if f.is_zero():
                raise ResonanceError(f"Γ-ratio hits a pole: 1+ρ+{j - 1} = 0 for ρ = {rho}", stage="series")
            out = out / f
    else:
        for j in range(0, -l):
            out = out * (rho - j)
    return out


def gamma_series(a: CayleyMatrix, sigma, d: ParamVector, order: int) -> GammaSeries:
    """Terms with total lattice degree |m| ≤ order."""
    sigma = tuple(sorted(sigma))
    d.check(a)
    y = simplex_solution(a, sigma, d)
    zero = d.delta[0] * 0
    rho = [zero] * a.N
    for i, yi in zip(sigma, y):
        rho[i] = -yi
    off, dirs = _lattice_directions(a, sigma)
    s = GammaSeries(sigma, rho, dirs, order)
    for m in product(range(order + 1), repeat=len(off)):
        if sum(m) > order:
            continue
        l = s.lattice_point(m)
        c = zero + 1
        for i in sigma:
            if l[i]:
                c = c * _gamma_ratio(rho[i], l[i])
                if c.is_zero():
                    break
        if c.is_zero():
            s.terms[m] = c
            continue
        for k, mk in zip(off, m):
            c = c / math.factorial(mk)
        s.terms[m] = c
    return s


@dataclass
class NumericContext:
    params: dict  # name -> rational
    point: dict  # z name -> number
    order: int | None = None


@dataclass
class SeriesValue:
    value: complex
    tail: float
    order: int


def _num(x: ParamRat, params: dict) -> float:
    return float(x.evaluate(params))


def eval_series(s: GammaSeries, ctx: NumericContext, zvars) -> SeriesValue:
    """Floating value of the truncated series and the size of its last shell."""
    rho = [_num(r, ctx.params) for r in s.exponent]
    z = [complex(ctx.point[v]) for v in zvars]
    logz = [cmath.log(x) for x in z]
    pref = 1.0
    for i in s.simplex:
        pref /= math.gamma(1 + rho[i])
    shells = [0j] * (s.order + 1)
    for m, c in s.terms.items():
        if c.is_zero():
            continue
        l = s.lattice_point(m)
        expo = sum((rho[j] + l[j]) * logz[j] for j in range(len(z)) if l[j] or rho[j])
        shells[sum(m)] += float(c.evaluate(ctx.params)) * cmath.exp(expo)
    total = pref * sum(shells)
    tail = abs(pref * shells[-1])
    if s.order >= 2 and abs(shells[-1]) > abs(shells[-2]) > 0:
        warnings.warn(f"series for σ={[i + 1 for i in s.simplex]} is not converging at {ctx.point}",
                      SeriesDivergenceWarning, stacklevel=2)
    return SeriesValue(total, tail, s.order)


def numeric_delta(d: ParamVector, params: dict) -> ParamVector:
    """Specialize the parameter symbols of δ to exact rationals."""
    ring = d.delta[0].ring
    vals = tuple(ring.pconst(x.evaluate(params)) for x in d.delta)
    return ParamVector(vals, d.k)


@dataclass
class RelationCheck:
    lhs: complex
    rhs: float
    residual: float
    tail: float
    order: int
    contributions: list

    def to_json(self) -> dict:
        return {
            "check": "quadratic_relation",
            "lhs": f"{self.lhs.real:.15e}",
            "rhs": f"{self.rhs:.15e}",
            "residual": f"{self.residual:.3e}",
            "tail": f"{self.tail:.3e}",
            "order": self.order,
        }


def quadratic_relation_check(a: CayleyMatrix, t: Triangulation, d: ParamVector, params: dict,
                             point: dict, order: int | None = None) -> RelationCheck:
    """|Πγ Σ_σ Π_i π/sin(π y_i) φ_σ(δ) φ_σ(−δ) − C(δ)| with y = A_σ^{-1}δ."""
    from .intersection import self_intersection_constant

    ring: Ring = d.delta[0].ring
    zvars = a.zvars()
    missing = [v for v in zvars if v not in point]
    if missing:
        raise ValidationError(f"evaluation point lacks {missing}")
    dn = numeric_delta(d, params)
    lattice_rank = a.N - a.rows
    if order is None:
        order = 30 if lattice_rank <= 1 else 20
    ctx = NumericContext(params, point, order)
    total = 0j
    tail = 0.0
    parts = []
    for sigma in t.simplices:
        y = [float(v.evaluate(params)) for v in simplex_solution(a, sigma, dn)]
        w = 1.0
        for yi in y:
            w *= math.pi / math.sin(math.pi * yi)
        f = eval_series(gamma_series(a, sigma, dn, order), ctx, zvars)
        g = eval_series(gamma_series(a, sigma, -dn, order), ctx, zvars)
        contrib = w * f.value * g.value
        tail += abs(w) * (f.tail * abs(g.value) + g.tail * abs(f.value))
        parts.append({"simplex": [i + 1 for i in sigma], "value": contrib})
        total += contrib
    gamma = 1.0
    for g in dn.gamma:
        gamma *= float(g.evaluate(params))
    lhs = gamma * total
    rhs = float(self_intersection_constant(a, t, d).evaluate(params))
    return RelationCheck(lhs, rhs, abs(lhs - rhs), abs(gamma) * tail, order, parts)
