"""Rational solutions of the secondary equation and their normalization.

The secondary equation for a primal system ∂_i Φ = M_i Φ and a dual system
∂_i Ψ = M∨_i Ψ is

    R_i(I) = ∂_i I − M_i I − I ᵗM∨_i = 0.

:func:`rational_solve` looks for a solution of the form P / (z^α · base^l)
where ``base`` is the z-part of the LCM of all denominators of both systems.
Each ansatz stage is a linear system over Q(δ) in the coefficients of P.  A
stage is first screened modulo a prime at a random parameter point: the
specialized nullity bounds the generic one from above, so nullity 0 rejects
the stage, and nullity 1 pins down the support of the unique solution,
which is then computed exactly and checked by substitution.
"""

from __future__ import annotations

import logging
import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

import flint

from .arith.fields import ParamRat, RatFunc, Ring
from .arith.matrix import (Matrix, modp_kernel, modp_pivot_rows, modp_sparse_matrix, modp_value,
                           sparse_nullspace)
from .arith.parse import parse_ratfunc
from .errors import (DimensionError, MultiplicityError, NoSolutionError, ResonanceError,
                     ResourceLimitError, ValidationError)
from .gkz import CayleyMatrix, ParamVector, Triangulation, simplex_solution
from .pfaffian import PfaffianSystem

log = logging.getLogger(__name__)


@dataclass
class SecondarySystem:
    primal: PfaffianSystem
    dual: PfaffianSystem

    def __post_init__(self):
        if self.primal.rank != self.dual.rank:
            raise DimensionError("primal and dual systems have different ranks")
        if tuple(self.primal.free_vars) != tuple(self.dual.free_vars):
            raise DimensionError("primal and dual systems have different free variables")

    @property
    def ring(self) -> Ring:
        return self.primal.ring

    @property
    def rank(self) -> int:
        return self.primal.rank

    @property
    def free_vars(self) -> tuple:
        return tuple(self.primal.free_vars)


def secondary_residual(i_mat: Matrix, s: SecondarySystem) -> list:
    """[R_i(I) for each free variable], exactly."""
    if (i_mat.rows, i_mat.cols) != (s.rank, s.rank):
        raise DimensionError(f"candidate is {i_mat.rows}x{i_mat.cols}, system rank is {s.rank}")
    out = []
    for v in s.free_vars:
        out.append(i_mat.derivative(v) - s.primal[v] @ i_mat - i_mat @ s.dual[v].T)
    return out


@dataclass
class IntersectionMatrix:
    entries: Matrix
    prefactor_exponent: int = 0
    normalized: bool = False
    info: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "prefactor_exponent": self.prefactor_exponent,
            "entries": [[str(x) for x in row] for row in self.entries.tolist()],
            "normalized": self.normalized,
        }

    @classmethod
    def from_json(cls, data: dict, ring: Ring) -> "IntersectionMatrix":
        rows = data["entries"]
        n = len(rows)
        if n == 0 or any(len(r) != n for r in rows):
            raise DimensionError("intersection matrix must be square and nonempty")
        m = Matrix.from_rows([[parse_ratfunc(x, ring) for x in r] for r in rows])
        return cls(m, int(data.get("prefactor_exponent", 0)), bool(data.get("normalized", False)))


# --------------------------------------------------------------------------
# polynomial helpers on the joint context


def _lcm(a, b):
    return a * (b / a.gcd(b))


def _z_primitive(ring: Ring, p):
    """Drop the Q(δ)-content of a joint polynomial viewed as a polynomial in z."""
    parts = ring.split(p)
    g = None
    for q in parts.values():
        g = q if g is None else g.gcd(q)
        if g.is_constant():
            break
    if g is not None and not g.is_constant():
        p = p / ring.lift(g)
    lc = p.leading_coefficient()
    return p / lc if lc != 1 else p


def _zdegree(ring: Ring, p, variables=None) -> int:
    idx = range(ring.nz) if variables is None else [ring.zindex(v) for v in variables]
    return int(max((sum(e[i] for i in idx) for e, _ in p.terms()), default=0))


def singular_base(s: SecondarySystem):
    """z-primitive LCM of all denominators of M_i and M∨_i (a joint polynomial)."""
    ring = s.ring
    base = ring.jctx.constant(1)
    for sys in (s.primal, s.dual):
        for m in sys.matrices.values():
            for x in m.entries:
                if not x.den.is_one():
                    base = _lcm(base, x.den)
    return _z_primitive(ring, base)


@dataclass(frozen=True)
class DenominatorAnsatz:
    base: object
    power: int
    shift: tuple
    degree_bound: int

    def denominator(self, ring: Ring, free_vars):
        e = [0] * (ring.nz + ring.np)
        for v, a in zip(free_vars, self.shift):
            e[ring.zindex(v)] = a
        return self.base ** self.power * ring.jctx.from_dict({tuple(e): 1})


@dataclass(frozen=True)
class AnsatzCaps:
    powers: tuple = (1, 2, 3)
    extra_degrees: tuple = (0, 1, 2)
    max_shift: int = 2
    modular_points: int = 3
    seed: int = 20190101
    deadline: float | None = None  # absolute time.monotonic()
    max_unknowns: int = 20000

    @classmethod
    def from_json(cls, data: dict | None) -> "AnsatzCaps":
        data = dict(data or {})
        kw = {}
        for k in ("powers", "extra_degrees"):
            if k in data:
                kw[k] = tuple(int(x) for x in data.pop(k))
        for k in ("max_shift", "modular_points", "seed", "max_unknowns"):
            if k in data:
                kw[k] = int(data.pop(k))
        if data:
            raise ValidationError(f"unknown ansatz cap(s): {sorted(data)}")
        caps = cls(**kw)
        if not caps.powers or any(p < 0 for p in caps.powers) or any(d < 0 for d in caps.extra_degrees):
            raise ValidationError("ansatz caps must be non-negative and nonempty")
        return caps


def _shifts(nvars: int, max_shift: int) -> list:
    out = [a for a in product(range(max_shift + 1), repeat=nvars) if sum(a) <= max_shift]
    return sorted(out, key=lambda a: (sum(a), tuple(-x for x in a)))


def ansatz_schedule(s: SecondarySystem, caps: AnsatzCaps) -> list:
    ring = s.ring
    base = singular_base(s)
    bdeg = _zdegree(ring, base, s.free_vars)
    out = []
    for l in caps.powers:
        for d0 in caps.extra_degrees:
            for a in _shifts(len(s.free_vars), caps.max_shift):
                out.append(DenominatorAnsatz(base, l, a, l * bdeg + sum(a) + d0))
    return out


def _monomials(nvars: int, bound: int) -> list:
    out = [e for e in product(range(bound + 1), repeat=nvars) if sum(e) <= bound]
    return sorted(out, key=lambda e: (sum(e), tuple(-x for x in e)))


# --------------------------------------------------------------------------
# the linear system of one ansatz stage


_PRIMES = []


def _prime(k: int) -> int:
    while len(_PRIMES) <= k:
        p = (1 << 30) - 1 if not _PRIMES else _PRIMES[-1] - 2
        while not flint.fmpz(p).is_prime():
            p -= 2
        _PRIMES.append(p)
    return _PRIMES[k]


class _StageSystem:
    """Linear system of one ansatz stage.

    Unknowns are the coefficients of P[a][b] on the monomials ``monos``.
    Equations either match coefficients of z-monomials in the numerator of
    R_i(P / D), giving rows keyed by (i, p, q, z-exponent), or evaluate that
    numerator at a point, giving rows keyed by (i, p, q).  The numerator is
    built from a few fixed polynomials shifted by the monomial of a column, so
    both kinds of row are assembled lazily from shared pieces.
    """

    def __init__(self, s: SecondarySystem, ansatz: DenominatorAnsatz):
        ring = s.ring
        self.s = s
        self.ring = ring
        self.ansatz = ansatz
        self.r = r = s.rank
        free = s.free_vars
        self.zidx = [ring.zindex(v) for v in free]
        self.den = D = ansatz.denominator(ring, free)
        self.monos = _monomials(len(free), ansatz.degree_bound)
        self.columns = [(a, b, m) for a in range(r) for b in range(r) for m in self.monos]
        self.pieces = []
        for v in free:
            idx = ring.zindex(v)
            mp, md = s.primal[v], s.dual[v]
            q = ring.jctx.constant(1)
            for x in mp.entries + md.entries:
                if not x.den.is_one():
                    q = _lcm(q, x.den)
            qd = q * D
            p = {"idx": idx, "lead": qd, "dlead": q * D.derivative(idx), "np": {}, "nd": {}}
            for c in range(r):
                for a in range(r):
                    x = mp[c, a]
                    if not x.is_zero():
                        p["np"][c, a] = x.num * (qd / x.den)
                    x = md[c, a]
                    if not x.is_zero():
                        p["nd"][c, a] = x.num * (qd / x.den)
            self.pieces.append(p)
        self._splits = None

    @property
    def ncols(self) -> int:
        return len(self.columns)

    def col(self, a: int, b: int, k: int) -> int:
        return (a * self.r + b) * len(self.monos) + k

    # -- evaluation rows -----------------------------------------------------

    def eval_rows(self, params, zpoint, prime: int) -> list:
        """Dense rows mod ``prime``: the numerator of every R_i entry at one point."""
        ring, r, nm = self.ring, self.r, len(self.monos)
        args = [flint.fmpq(1)] * ring.nz + list(params)
        for k, x in zip(self.zidx, zpoint):
            args[k] = flint.fmpq(x)

        def ev(p):
            return modp_value(p, args, prime)

        zm = []
        for m in self.monos:
            t = 1
            for x, e in zip(zpoint, m):
                t = t * pow(x, e, prime) % prime
            zm.append(t)
        out = []
        for vi, pc in enumerate(self.pieces):
            lead, dlead = ev(pc["lead"]), ev(pc["dlead"])
            inv = pow(zpoint[vi], -1, prime)
            dz = [m[vi] * t * inv % prime for m, t in zip(self.monos, zm)]
            diag = [(lead * u - dlead * t) % prime for u, t in zip(dz, zm)]
            npv = {key: ev(p) for key, p in pc["np"].items()}
            ndv = {key: ev(p) for key, p in pc["nd"].items()}
            for P in range(r):
                for Q in range(r):
                    row = [0] * self.ncols
                    base = self.col(P, Q, 0)
                    row[base:base + nm] = diag
                    for a in range(r):
                        c = npv.get((P, a))
                        if c:
                            o = self.col(a, Q, 0)
                            row[o:o + nm] = [(x - c * t) % prime for x, t in zip(row[o:o + nm], zm)]
                    for b in range(r):
                        c = ndv.get((Q, b))
                        if c:
                            o = self.col(P, b, 0)
                            row[o:o + nm] = [(x - c * t) % prime for x, t in zip(row[o:o + nm], zm)]
                    out.append(row)
        return out

    # -- coefficient rows ----------------------------------------------------

    def _split_pieces(self):
        if self._splits is None:
            ring = self.ring
            sp = []
            for pc in self.pieces:
                sp.append({"lead": ring.split(pc["lead"]), "dlead": ring.split(pc["dlead"]),
                           "np": {k: ring.split(p) for k, p in pc["np"].items()},
                           "nd": {k: ring.split(p) for k, p in pc["nd"].items()}})
            self._splits = sp
        return self._splits

    def coefficient_rows(self, cols=None) -> list:
        """Coefficient-matching rows restricted to ``cols`` (re-indexed), sorted by key."""
        r = self.r
        cols = list(range(self.ncols)) if cols is None else list(cols)
        rows: dict = {}

        def put(key, j, c, sign):
            row = rows.setdefault(key, {})
            row[j] = row[j] + sign * c if j in row else sign * c

        for vi, sp in enumerate(self._split_pieces()):
            for j, col in enumerate(cols):
                a, b, m = self.columns[col]
                if m[vi]:
                    mm = list(m)
                    mm[vi] -= 1
                    for ze, c in sp["lead"].items():
                        put((vi, a, b, _shift(ze, self.zidx, mm)), j, c, m[vi])
                for ze, c in sp["dlead"].items():
                    put((vi, a, b, _shift(ze, self.zidx, m)), j, c, -1)
                for P in range(r):
                    piece = sp["np"].get((P, a))
                    if piece:
                        for ze, c in piece.items():
                            put((vi, P, b, _shift(ze, self.zidx, m)), j, c, -1)
                for Q in range(r):
                    piece = sp["nd"].get((Q, b))
                    if piece:
                        for ze, c in piece.items():
                            put((vi, a, Q, _shift(ze, self.zidx, m)), j, c, -1)
        out = []
        for key in sorted(rows):
            row = {j: c for j, c in rows[key].items() if not c.is_zero()}
            if row:
                out.append(row)
        return out

    def assemble(self, vector, cols=None) -> Matrix:
        """Matrix of numerators over the stage denominator from a kernel vector."""
        ring = self.ring
        cols = list(range(self.ncols)) if cols is None else list(cols)
        r = self.r
        nj = ring.nz + ring.np
        den = RatFunc(ring, self.den)
        nums = [[ring.zero] * r for _ in range(r)]
        for c, x in zip(cols, vector):
            if not x:
                continue
            a, b, m = self.columns[c]
            e = [0] * nj
            for k, t in zip(self.zidx, m):
                e[k] = t
            nums[a][b] = nums[a][b] + RatFunc(ring, ring.jctx.from_dict({tuple(e): 1})) * x.to_ratfunc()
        return Matrix.from_rows([[x / den for x in row] for row in nums])


def _shift(ze: tuple, zidx: list, m) -> tuple:
    e = list(ze)
    for k, t in zip(zidx, m):
        e[k] += t
    return tuple(e)


def _scale(m: Matrix) -> Matrix:
    first = next((x for x in m.entries if x), None)
    if first is None:
        return m
    num, den = first.numer(), first.denom()
    c = num.lc() / den.lc()
    return m.scale(c.inverse().to_ratfunc()) if not c.is_one() else m


def _random_point(rng: random.Random, ring: Ring) -> tuple:
    return tuple(flint.fmpq(rng.randrange(1, 1 << 40)) for _ in ring.params)


def _screen(st: _StageSystem, params, prime: int, rng: random.Random):
    """Kernel modulo ``prime`` of the stage evaluated at random z-points.

    Each evaluated row is a combination of coefficient rows, so the kernel
    can only grow: nullity 0 rejects the stage and nullity 1 bounds the
    generic nullity by one.  Points are added while the nullity exceeds one.
    """
    per_point = len(st.pieces) * st.r ** 2
    npts = -(-(st.ncols + 16) // per_point)
    rows: list = []
    while True:
        while len(rows) < npts * per_point:
            z = [rng.randrange(1, prime) for _ in st.zidx]
            rows.extend(st.eval_rows(params, z, prime))
        m = flint.nmod_mat(len(rows), st.ncols, [x for r in rows for x in r], prime)
        basis = modp_kernel(m)
        if len(basis) <= 1 or len(rows) >= 4 * st.ncols + 64:
            return basis
        npts *= 2


def _independent_rows(rows, ncols: int, point, prime: int, rng: random.Random) -> list:
    """Random rows of rank ``ncols - 1`` mod ``prime``, or None."""
    order = list(range(len(rows)))
    rng.shuffle(order)
    take = min(len(order), ncols + 32)
    while True:
        idx = sorted(order[:take])
        sub = [rows[i] for i in idx]
        keep = modp_pivot_rows(modp_sparse_matrix(sub, ncols, point, prime))
        if len(keep) >= ncols - 1:
            return [sub[i] for i in keep[:ncols - 1]]
        if take == len(order):
            return None
        take = min(len(order), 2 * take)


def _try_stage(st: _StageSystem, caps: AnsatzCaps, rng: random.Random, stats: dict):
    """None if the stage has no solution; otherwise (matrix, proof data)."""
    ring = st.ring
    best = None
    for k in range(max(1, caps.modular_points)):
        prime = _prime(k)
        point = _random_point(rng, ring)
        basis = _screen(st, point, prime, rng)
        stats["modular_checks"] += 1
        if not basis:
            return None
        if len(basis) == 1:
            best = (basis[0], point, prime)
            break
    if best is None:
        return _symbolic_stage(st, stats)
    vec, point, prime = best
    support = [c for c, x in enumerate(vec) if x]
    rows = st.coefficient_rows(support)
    chosen = _independent_rows(rows, len(support), point, prime, rng)
    if chosen is not None:
        kernel, _ = sparse_nullspace(chosen, len(support), ring, method="primitive")
        stats["symbolic_solves"] += 1
        if len(kernel) == 1:
            m = st.assemble(kernel[0], support)
            if all(r.is_zero() for r in secondary_residual(m, st.s)):
                return m, {"nullity": 1, "prime": prime, "support": len(support)}
    return _symbolic_stage(st, stats)


def _symbolic_stage(st: _StageSystem, stats: dict):
    rows = st.coefficient_rows()
    kernel, _ = sparse_nullspace(rows, st.ncols, st.ring, method="primitive")
    stats["symbolic_solves"] += 1
    if not kernel:
        return None
    if len(kernel) > 1:
        raise MultiplicityError(
            f"solution space of the ansatz has dimension {len(kernel)} > 1 "
            "(resonant or reducible parameters?)", stage="intersection",
            counters={"unknowns": st.ncols, "nullity": len(kernel)})
    m = st.assemble(kernel[0])
    if not all(r.is_zero() for r in secondary_residual(m, st.s)):
        raise AssertionError("kernel vector fails the secondary equation")
    return m, {"nullity": 1, "prime": None, "support": st.ncols}


def rational_solve(s: SecondarySystem, caps: AnsatzCaps | None = None) -> IntersectionMatrix:
    """First rational solution along the ansatz schedule, scaled to a canonical form.

    The solution space of an accepted stage is proved to be one-dimensional.
    Raises :class:`NoSolutionError` when the schedule is exhausted.
    """
    caps = caps or AnsatzCaps()
    rng = random.Random(caps.seed)
    stats = {"stages": 0, "modular_checks": 0, "symbolic_solves": 0}
    t0 = time.monotonic()
    for ansatz in ansatz_schedule(s, caps):
        if caps.deadline is not None and time.monotonic() > caps.deadline:
            raise ResourceLimitError("ansatz search deadline exceeded", stage="intersection", counters=stats)
        nunk = s.rank ** 2 * len(_monomials(len(s.free_vars), ansatz.degree_bound))
        if nunk > caps.max_unknowns:
            continue
        stats["stages"] += 1
        st = _StageSystem(s, ansatz)
        found = _try_stage(st, caps, rng, stats)
        log.debug("stage l=%d shift=%s deg<=%d unknowns=%d: %s (%.2fs)", ansatz.power, ansatz.shift,
                  ansatz.degree_bound, st.ncols, "solution" if found else "none", time.monotonic() - t0)
        if found is None:
            continue
        m, proof = found
        m = _scale(m)
        info = dict(stats, seconds=round(time.monotonic() - t0, 3), power=ansatz.power,
                    shift=list(ansatz.shift), degree_bound=ansatz.degree_bound,
                    unknowns=st.ncols, **proof)
        return IntersectionMatrix(m, 0, False, info)
    raise NoSolutionError("no rational solution within the ansatz caps", stage="intersection", counters=stats)


# --------------------------------------------------------------------------
# normalization


def self_intersection_constant(a: CayleyMatrix, t: Triangulation, d: ParamVector) -> ParamRat:
    """C(δ) = (Π γ_l) Σ_{σ∈T} Π_i 1/(A_σ^{-1}δ)_i."""
    d.check(a)
    total = None
    for sigma in t.simplices:
        term = None
        for y in simplex_solution(a, sigma, d):
            if y.is_zero():
                raise ResonanceError(f"(A_σ^-1 δ) has a zero entry for σ={[i + 1 for i in sigma]}",
                                     stage="intersection")
            term = y.inverse() if term is None else term * y.inverse()
        total = term if total is None else total + term
    for g in d.gamma:
        total = total * g
    return total


def normalize(i: IntersectionMatrix, c, n: int) -> IntersectionMatrix:
    """Rescale so that entry (1,1) equals ``c``; tag with (2π√−1)^n."""
    e11 = i.entries[0, 0]
    if e11.is_zero():
        raise ValidationError("entry (1,1) is zero; permute the frame so a nonzero pairing leads",
                              stage="intersection")
    if isinstance(c, ParamRat):
        c = c.to_ratfunc()
    f = c / e11
    entries = i.entries if f.is_one() else i.entries.scale(f)
    return IntersectionMatrix(entries, n, True, dict(i.info))


def denominator_check(i: IntersectionMatrix, s: SecondarySystem, max_power: int = 16) -> dict:
    """Does the z-denominator of I divide a power of the singular-locus proxy?"""
    ring = s.ring
    g = ring.jctx.constant(1)
    for x in i.entries.entries:
        if not x.den.is_one():
            g = _lcm(g, x.den)
    g = _z_primitive(ring, g)
    h = singular_base(s)
    power = None
    acc = ring.jctx.constant(1)
    for m in range(max_power + 1):
        if (acc % g).is_zero():
            power = m
            break
        acc = acc * h
    return {
        "check": "denominator",
        "passed": power is not None,
        "power": power,
        "denominator": str(RatFunc(ring, g)),
        "singular_locus": str(RatFunc(ring, h)),
    }


def det_nonzero(m: Matrix) -> bool:
    return not m.det().is_zero()
