"""GKZ ideals attached to a Cayley configuration."""

from __future__ import annotations

import random
import warnings
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

import flint

from .arith.fields import ParamRat, Ring
from .arith.mpoly import MPoly
from .arith.orders import TermOrder, divides, exp_lcm, exp_sub
from .errors import DimensionError, ResourceLimitError, ValidationError
from .weyl import DiffOp


@dataclass(frozen=True)
class CayleyMatrix:
    n: int
    k: int
    block_sizes: tuple
    entries: tuple  # (n+k) rows of length N

    def __post_init__(self):
        rows = self.entries
        N = sum(self.block_sizes)
        if len(rows) != self.n + self.k or any(len(r) != N for r in rows):
            raise DimensionError("Cayley matrix has the wrong shape")
        col = 0
        for l, size in enumerate(self.block_sizes):
            for j in range(N):
                want = 1 if col <= j < col + size else 0
                if rows[l][j] != want:
                    raise ValidationError(f"row {l + 1} is not the indicator row of block {l + 1}")
            col += size
        snf = flint.fmpz_mat([list(r) for r in rows]).snf()
        diag = [abs(int(snf[i, i])) for i in range(self.n + self.k)]
        if any(d != 1 for d in diag):
            raise ValidationError(f"columns do not span Z^{self.n + self.k} (invariant factors {diag})")

    @property
    def N(self) -> int:
        return sum(self.block_sizes)

    @property
    def rows(self) -> int:
        return self.n + self.k

    def column(self, j: int) -> tuple:
        return tuple(r[j] for r in self.entries)

    def submatrix(self, cols) -> list:
        return [[r[j] for j in cols] for r in self.entries]

    def zvars(self) -> tuple:
        return tuple(f"z{j + 1}" for j in range(self.N))

    @classmethod
    def from_matrix(cls, entries, k: int) -> "CayleyMatrix":
        rows = tuple(tuple(int(x) for x in r) for r in entries)
        sizes = tuple(sum(rows[l]) for l in range(k))
        return cls(len(rows) - k, k, sizes, rows)


def cayley(blocks) -> CayleyMatrix:
    """Stack blocks A_1..A_k (each n rows) under their indicator rows."""
    blocks = [[list(map(int, r)) for r in b] for b in blocks]
    if not blocks:
        raise DimensionError("at least one block is required")
    n = len(blocks[0])
    if n == 0 or any(len(b) != n for b in blocks):
        raise DimensionError("all blocks must have the same number of rows")
    sizes = []
    for b in blocks:
        w = {len(r) for r in b}
        if len(w) != 1 or 0 in w:
            raise DimensionError("ragged block")
        sizes.append(w.pop())
    k = len(blocks)
    N = sum(sizes)
    rows = []
    col = 0
    for size in sizes:
        rows.append(tuple(1 if col <= j < col + size else 0 for j in range(N)))
        col += size
    for i in range(n):
        rows.append(tuple(x for b in blocks for x in b[i]))
    return CayleyMatrix(n, k, tuple(sizes), tuple(rows))


@dataclass(frozen=True)
class ParamVector:
    delta: tuple
    k: int

    def __post_init__(self):
        for l, g in enumerate(self.delta[: self.k]):
            if g.is_constant() and g.constant_value().denominator == 1:
                warnings.warn(f"gamma_{l + 1} = {g} is an integer; the regularization condition fails",
                              stacklevel=3)

    @property
    def gamma(self) -> tuple:
        return self.delta[: self.k]

    @property
    def c(self) -> tuple:
        return self.delta[self.k:]

    def __neg__(self) -> "ParamVector":
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return ParamVector(tuple(-d for d in self.delta), self.k)

    def check(self, a: CayleyMatrix):
        if len(self.delta) != a.rows:
            raise DimensionError(f"delta has length {len(self.delta)}, expected {a.rows}")


@dataclass(frozen=True)
class Triangulation:
    simplices: tuple  # 0-based, each sorted

    def __post_init__(self):
        s = tuple(tuple(sorted(int(i) for i in sig)) for sig in self.simplices)
        object.__setattr__(self, "simplices", s)

    @classmethod
    def from_one_based(cls, simplices) -> "Triangulation":
        return cls(tuple(tuple(i - 1 for i in sig) for sig in simplices))

    def one_based(self) -> list:
        return [[i + 1 for i in sig] for sig in self.simplices]

    def __len__(self):
        return len(self.simplices)


@dataclass(frozen=True)
class LatticeBasis:
    vectors: tuple  # each of length N; the columns of B

    @property
    def rank(self) -> int:
        return len(self.vectors)


def lattice_kernel(a: CayleyMatrix) -> LatticeBasis:
    """Basis of ker(A) over Z, LLL-reduced, first nonzero entry of each positive."""
    N, m = a.N, a.rows
    big = flint.fmpz_mat([[a.entries[i][j] for i in range(m)] + [1 if j == t else 0 for t in range(N)]
                          for j in range(N)])
    h = big.hnf()
    kernel = []
    for r in range(N):
        if all(int(h[r, c]) == 0 for c in range(m)):
            kernel.append([int(h[r, m + t]) for t in range(N)])
    if kernel:
        kernel = flint.fmpz_mat(kernel).lll().tolist()
        kernel = [[int(x) for x in v] for v in kernel]
    out = []
    for v in kernel:
        lead = next(x for x in v if x)
        out.append(tuple(x if lead > 0 else -x for x in v))
    for v in out:
        assert all(sum(a.entries[i][j] * v[j] for j in range(N)) == 0 for i in range(m))
    return LatticeBasis(tuple(out))


# --------------------------------------------------------------------------
# commutative binomial Gröbner machinery for the toric ideal


def _spoly(f: MPoly, g: MPoly) -> MPoly:
    ef, cf = f.lead()
    eg, cg = g.lead()
    l = exp_lcm(ef, eg)
    return f.mul_term(exp_sub(l, ef), 1 / cf) - g.mul_term(exp_sub(l, eg), 1 / cg)


def _reduce(p: MPoly, basis: list) -> MPoly:
    leads = [b.lead() for b in basis]
    rem = {}
    while p:
        e, c = p.lead()
        for (be, bc), b in zip(leads, basis):
            if divides(be, e):
                p = p - b.mul_term(exp_sub(e, be), c / bc)
                break
        else:
            rem[e] = c
            p = p - p._new({e: c})
    return p._new(rem)


def commutative_groebner(polys, max_pairs: int = 100_000) -> list:
    """Reduced Gröbner basis (product and chain criteria) in each poly's order."""
    basis = []
    for p in polys:
        r = _reduce(p, basis) if basis else p
        if r:
            basis.append(r.monic())
    pairs = [(i, j) for j in range(len(basis)) for i in range(j)]
    count = len(pairs)
    while pairs:
        i, j = pairs.pop(0)
        ei, ej = basis[i].lm(), basis[j].lm()
        if all(x == 0 or y == 0 for x, y in zip(ei, ej)):
            continue
        l = exp_lcm(ei, ej)
        if any(k not in (i, j) and divides(basis[k].lm(), l)
               and (min(i, k), max(i, k)) not in pairs and (min(j, k), max(j, k)) not in pairs
               for k in range(len(basis))):
            continue
        r = _reduce(_spoly(basis[i], basis[j]), basis)
        if r:
            basis.append(r.monic())
            t = len(basis) - 1
            pairs.extend((s, t) for s in range(t))
            count += t
            if count > max_pairs:
                raise ResourceLimitError("toric Gröbner pair cap exceeded", stage="gkz",
                                         counters={"pairs": count})
    # minimal + reduced
    basis.sort(key=lambda b: b.order.key()(b.lm()))
    minimal = []
    for b in basis:
        if not any(divides(m.lm(), b.lm()) for m in minimal):
            minimal.append(b)
    return [_reduce(b - b._new({b.lm(): b.lc()}), [m for m in minimal if m is not b]) + b._new({b.lm(): b.lc()})
            for b in minimal]


def _saturate_by(polys: list, var: str) -> list:
    """I : var^∞ for a homogeneous ideal, via grevlex with ``var`` last."""
    variables = polys[0].variables
    perm = tuple(v for v in variables if v != var) + (var,)
    gb = commutative_groebner([p.reorder(perm) for p in polys])
    out = []
    for g in gb:
        k = g.divides_exactly_by_var(var)
        e = tuple(k if v == var else 0 for v in perm)
        q = g._new({exp_sub(x, e): c for x, c in g.terms.items()})
        out.append(q.reorder(variables))
    return out


def toric_binomials(a: CayleyMatrix) -> list:
    """Generators (u, v) of the toric ideal I_A, with ∂^u − ∂^v."""
    basis = lattice_kernel(a)
    if not basis.rank:
        return []
    names = tuple(f"d{j + 1}" for j in range(a.N))
    polys = []
    for b in basis.vectors:
        u = tuple(max(x, 0) for x in b)
        v = tuple(max(-x, 0) for x in b)
        polys.append(MPoly(names, {u: Fraction(1), v: Fraction(-1)}))
    for var in names:
        polys = _saturate_by(polys, var)
    gb = commutative_groebner(polys)
    out = []
    for g in gb:
        if len(g.terms) != 2 or sorted(g.terms.values()) != [Fraction(-1), Fraction(1)]:
            raise AssertionError(f"toric Gröbner element {g} is not a binomial")
        u = next(e for e, c in g.terms.items() if c == 1)
        v = next(e for e, c in g.terms.items() if c == -1)
        out.append((u, v))
    return out


def toric_generators(a: CayleyMatrix, ring: Ring) -> list:
    """Binomial operators ∂^u − ∂^v generating the toric ideal (Au = Av)."""
    out = []
    for u, v in toric_binomials(a):
        au = [sum(a.entries[i][j] * u[j] for j in range(a.N)) for i in range(a.rows)]
        av = [sum(a.entries[i][j] * v[j] for j in range(a.N)) for i in range(a.rows)]
        assert au == av
        out.append(DiffOp.monomial(ring, u) - DiffOp.monomial(ring, v))
    return out


def euler_generators(a: CayleyMatrix, d: ParamVector, ring: Ring) -> list:
    """The n+k operators Σ_j a_ij z_j ∂_j + δ_i."""
    d.check(a)
    ops = []
    for i in range(a.rows):
        terms = {(0,) * a.N: d.delta[i].to_ratfunc()}
        for j in range(a.N):
            if a.entries[i][j]:
                e = tuple(1 if t == j else 0 for t in range(a.N))
                terms[e] = ring.z(ring.zvars[j]) * a.entries[i][j]
        ops.append(DiffOp(ring, terms))
    return ops


def gkz_ring(a: CayleyMatrix, params) -> Ring:
    return Ring(a.zvars(), params)


def gkz_ideal(a: CayleyMatrix, d: ParamVector, ring: Ring) -> list:
    return euler_generators(a, d, ring) + toric_generators(a, ring)


# --------------------------------------------------------------------------
# triangulations


def _det(m) -> int:
    return int(flint.fmpz_mat(m).det())


def validate_triangulation(a: CayleyMatrix, t: Triangulation, rank: int | None = None) -> dict:
    """Unimodularity, distinctness, covering and (optionally) count checks.

    Covering is tested at a few generic points of conv(A): each must lie in
    exactly one simplex.  Regularity is not verified.
    """
    checks = []
    ok = True
    size = a.rows
    for sig in t.simplices:
        if len(sig) != size or len(set(sig)) != size or not all(0 <= i < a.N for i in sig):
            checks.append({"check": "shape", "simplex": [i + 1 for i in sig], "passed": False})
            ok = False
            continue
        det = _det(a.submatrix(sig))
        passed = abs(det) == 1
        ok &= passed
        checks.append({"check": "unimodular", "simplex": [i + 1 for i in sig], "det": int(det), "passed": passed})
    distinct = len(set(t.simplices)) == len(t.simplices)
    ok &= distinct
    checks.append({"check": "distinct", "passed": distinct})
    if ok and t.simplices:
        bad = _cover_failures(a, t)
        ok &= not bad
        checks.append({"check": "cover", "passed": not bad, "multiplicities": bad})
    if rank is not None:
        passed = len(t.simplices) == rank
        ok &= passed
        checks.append({"check": "count", "simplices": len(t.simplices), "rank": rank, "passed": passed})
    return {"passed": bool(ok), "simplices": len(t.simplices), "checks": checks}


def _cover_failures(a: CayleyMatrix, t: Triangulation, samples: int = 8) -> list:
    """How many simplices contain each generic sample point, for points not covered once."""
    rng = random.Random(0)
    invs = [inverse_submatrix(a, sig) for sig in t.simplices]
    bad = []
    for _ in range(samples):
        w = [rng.randint(1, 10**6) for _ in range(a.N)]
        tot = sum(w)
        p = [Fraction(sum(wj * a.entries[r][j] for j, wj in enumerate(w)), tot) for r in range(a.rows)]
        hits = sum(all(sum(f * x for f, x in zip(row, p)) >= 0 for row in inv) for inv in invs)
        if hits != 1:
            bad.append(hits)
    return bad


def inverse_submatrix(a: CayleyMatrix, sigma) -> list:
    """A_σ^{-1} as a list of Fraction rows."""
    m = flint.fmpq_mat(a.submatrix(sigma))
    inv = m.inv()
    return [[Fraction(int(inv[i, j].p), int(inv[i, j].q)) for j in range(len(sigma))] for i in range(len(sigma))]


def simplex_solution(a: CayleyMatrix, sigma, d: ParamVector) -> list:
    """y = A_σ^{-1} δ with entries in Q(δ)."""
    inv = inverse_submatrix(a, sigma)
    out = []
    for row in inv:
        acc = d.delta[0] * 0
        for f, x in zip(row, d.delta):
            if f:
                acc = acc + x * f
        out.append(acc)
    return out
