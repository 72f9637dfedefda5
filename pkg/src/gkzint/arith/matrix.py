"""Dense matrices over exact fields and fraction-free nullspaces."""

from __future__ import annotations

from fractions import Fraction

import flint

from .fields import ParamRat, RatFunc


class Matrix:
    """Row-major dense matrix over RatFunc, ParamRat or Fraction entries."""

    __slots__ = ("rows", "cols", "entries")

    def __init__(self, rows: int, cols: int, entries):
        entries = list(entries)
        if rows <= 0 or cols <= 0 or len(entries) != rows * cols:
            raise ValueError(f"bad matrix shape {rows}x{cols} for {len(entries)} entries")
        self.rows = rows
        self.cols = cols
        self.entries = entries

    @classmethod
    def from_rows(cls, rows):
        rows = [list(r) for r in rows]
        return cls(len(rows), len(rows[0]), [x for r in rows for x in r])

    @classmethod
    def identity(cls, n: int, one):
        zero = one * 0
        return cls(n, n, [one if i == j else zero for i in range(n) for j in range(n)])

    @classmethod
    def zeros(cls, rows: int, cols: int, zero):
        return cls(rows, cols, [zero] * (rows * cols))

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i * self.cols + j]

    def row(self, i: int) -> list:
        return self.entries[i * self.cols:(i + 1) * self.cols]

    def tolist(self) -> list:
        return [self.row(i) for i in range(self.rows)]

    def _same_shape(self, other):
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ValueError("shape mismatch")

    def __add__(self, other):
        self._same_shape(other)
        return Matrix(self.rows, self.cols, [a + b for a, b in zip(self.entries, other.entries)])

    def __sub__(self, other):
        self._same_shape(other)
        return Matrix(self.rows, self.cols, [a - b for a, b in zip(self.entries, other.entries)])

    def __neg__(self):
        return Matrix(self.rows, self.cols, [-a for a in self.entries])

    def scale(self, c):
        return Matrix(self.rows, self.cols, [c * a for a in self.entries])

    def __matmul__(self, other):
        if self.cols != other.rows:
            raise ValueError("shape mismatch in product")
        n, m, p = self.rows, self.cols, other.cols
        out = []
        for i in range(n):
            ri = self.row(i)
            for j in range(p):
                acc = None
                for k in range(m):
                    a = ri[k]
                    if not a:
                        continue
                    b = other.entries[k * p + j]
                    if not b:
                        continue
                    acc = a * b if acc is None else acc + a * b
                out.append(acc if acc is not None else self.entries[0] * 0)
        return Matrix(n, p, out)

    def transpose(self):
        return Matrix(self.cols, self.rows, [self[i, j] for j in range(self.cols) for i in range(self.rows)])

    T = property(transpose)

    def map(self, f):
        return Matrix(self.rows, self.cols, [f(a) for a in self.entries])

    def is_zero(self) -> bool:
        return all(not a for a in self.entries)

    def __eq__(self, other):
        if not isinstance(other, Matrix):
            return NotImplemented
        return (self.rows, self.cols) == (other.rows, other.cols) and all(
            a == b for a, b in zip(self.entries, other.entries)
        )

    def __repr__(self):
        return "Matrix(" + repr([[str(x) for x in r] for r in self.tolist()]) + ")"

    def derivative(self, var: str):
        return self.map(lambda a: a.derivative(var))

    def inverse(self):
        """Gauss-Jordan inverse over the entry field."""
        if self.rows != self.cols:
            raise ValueError("inverse of a non-square matrix")
        n = self.rows
        one = self.entries[0] * 0 + 1
        zero = one * 0
        a = [self.row(i) + [one if i == j else zero for j in range(n)] for i in range(n)]
        for c in range(n):
            p = next((r for r in range(c, n) if a[r][c]), None)
            if p is None:
                raise ZeroDivisionError("singular matrix")
            a[c], a[p] = a[p], a[c]
            inv = 1 / a[c][c]
            a[c] = [x * inv for x in a[c]]
            for r in range(n):
                if r != c and a[r][c]:
                    f = a[r][c]
                    a[r] = [x - f * y for x, y in zip(a[r], a[c])]
        return Matrix(n, n, [x for r in a for x in r[n:]])

    def det(self):
        if self.rows != self.cols:
            raise ValueError("det of a non-square matrix")
        n = self.rows
        a = self.tolist()
        d = a[0][0] * 0 + 1
        for c in range(n):
            p = next((r for r in range(c, n) if a[r][c]), None)
            if p is None:
                return d * 0
            if p != c:
                a[c], a[p] = a[p], a[c]
                d = -d
            d = d * a[c][c]
            inv = 1 / a[c][c]
            for r in range(c + 1, n):
                if a[r][c]:
                    f = a[r][c] * inv
                    a[r] = [x - f * y for x, y in zip(a[r], a[c])]
        return d


# --------------------------------------------------------------------------
# nullspace


def _row_to_polys(row):
    """Scale a row of ParamRat/Fraction entries to polynomial (or integer) entries."""
    sample = next((x for x in row if isinstance(x, ParamRat)), None)
    if sample is None:
        fr = [Fraction(x) for x in row]
        den = 1
        for x in fr:
            den = den * x.denominator // _igcd(den, x.denominator)
        return {j: int(x * den) for j, x in enumerate(fr) if x}, None
    ring = sample.ring
    ctx = ring.pctx
    den = ctx.constant(1)
    xs = [x if isinstance(x, ParamRat) else ring.pconst(x) for x in row]
    for x in xs:
        if not x.den.is_one():
            den = den * (x.den / den.gcd(x.den))
    return {j: x.num * (den / x.den) for j, x in enumerate(xs) if x}, ring


def _igcd(a, b):
    while b:
        a, b = b, a % b
    return abs(a)


def _size(p):
    if isinstance(p, int):
        return (0, abs(p).bit_length())
    return (p.total_degree(), len(p))


def fraction_free_echelon(rows, ncols):
    """Bareiss elimination on sparse rows ``{col: poly}``.

    Returns ``(echelon_rows, pivot_cols)``.  Entries stay polynomial: every
    division by the previous pivot is exact.
    """
    rows = [dict(r) for r in rows if r]
    pivots = []
    prev = None
    r = 0
    for c in range(ncols):
        cand = [i for i in range(r, len(rows)) if c in rows[i]]
        if not cand:
            continue
        best = min(cand, key=lambda i: (_size(rows[i][c]), len(rows[i])))
        rows[r], rows[best] = rows[best], rows[r]
        prow = rows[r]
        piv = prow[c]
        for i in range(r + 1, len(rows)):
            row = rows[i]
            f = row.pop(c, None)
            new = {}
            for j, v in row.items():
                t = piv * v
                if f is not None and j in prow:
                    t = t - f * prow[j]
                if prev is not None:
                    t = _exact_div(t, prev)
                if t:
                    new[j] = t
            if f is not None:
                for j, v in prow.items():
                    if j != c and j not in row:
                        t = -f * v
                        if prev is not None:
                            t = _exact_div(t, prev)
                        if t:
                            new[j] = t
            rows[i] = new
        pivots.append(c)
        prev = piv
        r += 1
    return rows[:r], pivots


def _exact_div(a, b):
    if isinstance(a, int):
        q, rem = divmod(a, b)
        assert rem == 0, "inexact Bareiss division"
        return q
    return a / b


def nullspace(m: Matrix) -> list:
    """Basis of the right nullspace of a matrix over Q(δ) (or Q).

    Rows are cleared to polynomial form, reduced by fraction-free (Bareiss)
    elimination, and the kernel is read off by back-substitution.  The basis
    has one vector per non-pivot column, with a 1 in that column.
    """
    rows = []
    ring = None
    for i in range(m.rows):
        r, rg = _row_to_polys(m.row(i))
        ring = ring or rg
        rows.append(r)
    ech, pivots = fraction_free_echelon(rows, m.cols)
    return _kernel_from_echelon(ech, pivots, m.cols, ring)


def rank(m: Matrix) -> int:
    rows = [_row_to_polys(m.row(i))[0] for i in range(m.rows)]
    return len(fraction_free_echelon(rows, m.cols)[1])


def _kernel_from_echelon(ech, pivots, ncols, ring):
    if ring is None:
        conv = lambda p: Fraction(p)
        zero, one = Fraction(0), Fraction(1)
    else:
        conv = lambda p: ParamRat(ring, p)
        zero, one = ring.pconst(0), ring.pconst(1)
    free = [c for c in range(ncols) if c not in set(pivots)]
    basis = []
    for f in free:
        v = [zero] * ncols
        v[f] = one
        for row, pc in reversed(list(zip(ech, pivots))):
            acc = zero
            for j, a in row.items():
                if j != pc and v[j]:
                    acc = acc + conv(a) * v[j]
            if acc:
                v[pc] = -acc / conv(row[pc])
        basis.append(v)
    return basis


def _gcd(a, b):
    if isinstance(a, int):
        return _igcd(a, b)
    return a.gcd(b)


def _is_unit(g) -> bool:
    return abs(g) == 1 if isinstance(g, int) else g.is_constant()


def _rational_content(row: dict):
    """Positive rational c making every coefficient of ``row / c`` a coprime integer."""
    num, den = 0, 1
    for v in row.values():
        for x in v.coeffs():
            num = _igcd(num, int(x.p))
            q = int(x.q)
            den = den * q // _igcd(den, q)
    return flint.fmpq(num, den) if num else flint.fmpq(1)


def _primitive(row: dict) -> dict:
    """Divide a row by the gcd of its entries, including the rational content."""
    if not row or isinstance(next(iter(row.values())), int):
        g = 0
        for v in row.values():
            g = _igcd(g, v)
        return {j: v // g for j, v in row.items()} if g > 1 else row
    g = None
    for v in row.values():
        g = v if g is None else _gcd(g, v)
        if _is_unit(g):
            break
    if g is not None and not _is_unit(g):
        row = {j: _exact_div(v, g) for j, v in row.items()}
    c = _rational_content(row)
    return {j: v / c for j, v in row.items()} if c != 1 else row


def primitive_echelon(rows, ncols):
    """Sparse fraction-free elimination keeping every row primitive.

    Each elimination step cross-multiplies by cofactors reduced with a gcd and
    then divides the new row by its content.  Pivots are chosen Markowitz
    style (shortest row, smallest entry), which keeps fill-in and degree
    growth low on the sparse systems met by the ansatz solver.
    """
    active = [_primitive(dict(r)) for r in rows if r]
    ech, pivots = [], []
    for c in range(ncols):
        cand = [i for i, r in enumerate(active) if c in r]
        if not cand:
            continue
        best = min(cand, key=lambda i: (len(active[i]), _size(active[i][c])))
        prow = active.pop(best)
        piv = prow[c]
        for i, row in enumerate(active):
            f = row.get(c)
            if f is None:
                continue
            g = _gcd(piv, f)
            a, b = _exact_div(piv, g), _exact_div(f, g)
            new = {}
            for j in set(row) | set(prow):
                if j == c:
                    continue
                t = None
                if j in row:
                    t = a * row[j]
                if j in prow:
                    t = -b * prow[j] if t is None else t - b * prow[j]
                if t:
                    new[j] = t
            active[i] = _primitive(new)
        active = [r for r in active if r]
        ech.append(prow)
        pivots.append(c)
    order = sorted(range(len(pivots)), key=lambda k: pivots[k])
    return [ech[k] for k in order], [pivots[k] for k in order]


def sparse_nullspace(rows, ncols, ring, method: str = "bareiss"):
    """Nullspace of sparse polynomial rows ``{col: pctx poly}`` over Q(δ).

    ``method`` is ``"bareiss"`` or ``"primitive"``; returns (basis, rank).
    """
    if method == "bareiss":
        ech, pivots = fraction_free_echelon(rows, ncols)
    elif method == "primitive":
        ech, pivots = primitive_echelon(rows, ncols)
    else:
        raise ValueError(f"unknown elimination method {method!r}")
    return _kernel_from_echelon(ech, pivots, ncols, ring), len(pivots)


# --------------------------------------------------------------------------
# modular images


def modp_value(p, point, prime: int) -> int:
    """Image of a parameter polynomial at an integer point, reduced mod ``prime``."""
    v = p(*point) if point else (p.leading_coefficient() if not p.is_zero() else flint.fmpq(0))
    num, den = int(v.p), int(v.q)
    return num * pow(den, -1, prime) % prime


def modp_sparse_matrix(rows, ncols: int, point, prime: int) -> flint.nmod_mat:
    """Image of sparse parameter-polynomial rows at ``point`` modulo ``prime``."""
    m = flint.nmod_mat(max(len(rows), 1), ncols, prime)
    for i, row in enumerate(rows):
        for j, v in row.items():
            x = modp_value(v, point, prime) if not isinstance(v, int) else v % prime
            if x:
                m[i, j] = x
    return m


def modp_kernel(m: flint.nmod_mat) -> list:
    """Right nullspace basis of an nmod_mat as lists of ints."""
    x, nullity = m.nullspace()
    cols = x.tolist()
    return [[int(cols[i][j]) for i in range(m.ncols())] for j in range(nullity)]


def modp_pivot_rows(m: flint.nmod_mat) -> list:
    """Indices of a maximal set of independent rows of ``m``."""
    red, rk = m.transpose().rref()
    rows = red.tolist()
    out = []
    for i in range(rk):
        for j, v in enumerate(rows[i]):
            if int(v):
                out.append(j)
                break
    return out


def modp_nullspace(dense_rows, ncols: int, prime: int):
    """Nullspace over Z/p of a dense integer matrix; returns (basis, rank)."""
    nrows = len(dense_rows)
    if nrows == 0:
        basis = [[1 if i == j else 0 for i in range(ncols)] for j in range(ncols)]
        return basis, 0
    m = flint.nmod_mat(nrows, ncols, [x for r in dense_rows for x in r], prime)
    x, nullity = m.nullspace()
    cols = x.tolist()
    basis = [[int(cols[i][j]) for i in range(ncols)] for j in range(nullity)]
    return basis, ncols - nullity


def modp_independent_rows(dense_rows, ncols: int, prime: int) -> list:
    """Indices of a maximal independent subset of rows over Z/p."""
    if not dense_rows:
        return []
    t = flint.nmod_mat(ncols, len(dense_rows), [dense_rows[i][j] for j in range(ncols) for i in range(len(dense_rows))], prime)
    red, rk = t.rref()
    out = []
    rows = red.tolist()
    for i in range(rk):
        for j, v in enumerate(rows[i]):
            if int(v):
                out.append(j)
                break
    return out
