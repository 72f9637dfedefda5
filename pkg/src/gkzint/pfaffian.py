"""Connection matrices of a holonomic ideal in a chosen frame.

Convention: for the frame column vector Φ = (f_1 • ω, ..., f_r • ω) the
system reads ∂_i Φ = M_i Φ.  Connection forms printed as ``Ω_i`` in the
usual ``d + Ω`` notation relate to these by M_i = ᵗΩ_i.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .arith.fields import ParamRat, RatFunc, Ring
from .arith.matrix import Matrix
from .arith.orders import TermOrder
from .arith.parse import parse_ratfunc
from .errors import DenominatorVanishingError, DimensionError, FrameError, ValidationError
from .gkz import CayleyMatrix, ParamVector, gkz_ideal
from .weyl import DiffOp, GroebnerBasis, buchberger, d_times, normal_form, parse_op, standard_monomials


@dataclass
class Frame:
    elements: list

    def __post_init__(self):
        if not self.elements:
            raise FrameError("empty frame")

    @classmethod
    def standard(cls, g: GroebnerBasis) -> "Frame":
        return cls([DiffOp.monomial(g.ring, e) for e in standard_monomials(g)])

    @classmethod
    def parse(cls, texts, ring: Ring) -> "Frame":
        return cls([parse_op(t, ring) for t in texts])

    def __len__(self):
        return len(self.elements)

    def strings(self) -> list:
        return [str(f) for f in self.elements]


@dataclass
class PfaffianSystem:
    frame: Frame
    free_vars: tuple
    matrices: dict  # var -> Matrix
    ring: Ring
    info: dict = field(default_factory=dict)

    @property
    def rank(self) -> int:
        return len(self.frame)

    def __getitem__(self, var) -> Matrix:
        return self.matrices[var]

    def curvature(self, i: str, j: str) -> Matrix:
        """∂_i M_j + M_j M_i − ∂_j M_i − M_i M_j."""
        mi, mj = self.matrices[i], self.matrices[j]
        return mj.derivative(i) + mj @ mi - mi.derivative(j) - mi @ mj

    def flatness_defects(self) -> list:
        out = []
        vs = self.free_vars
        for a in range(len(vs)):
            for b in range(a + 1, len(vs)):
                if not self.curvature(vs[a], vs[b]).is_zero():
                    out.append((vs[a], vs[b]))
        return out

    def is_flat(self) -> bool:
        return not self.flatness_defects()

    def map(self, f) -> "PfaffianSystem":
        return PfaffianSystem(self.frame, self.free_vars, {v: m.map(f) for v, m in self.matrices.items()},
                              self.ring, dict(self.info))

    def to_json(self) -> dict:
        return {
            "frame": self.frame.strings(),
            "variables": list(self.free_vars),
            "matrices": {v: [[str(x) for x in row] for row in self.matrices[v].tolist()] for v in self.free_vars},
        }

    @classmethod
    def from_json(cls, data: dict, ring: Ring) -> "PfaffianSystem":
        frame = Frame.parse(data["frame"], ring)
        free = tuple(data["variables"])
        mats = {}
        for v in free:
            rows = data["matrices"][v]
            if len(rows) != len(frame) or any(len(r) != len(frame) for r in rows):
                raise DimensionError(f"matrix for {v} is not {len(frame)}x{len(frame)}")
            mats[v] = Matrix.from_rows([[parse_ratfunc(x, ring) for x in r] for r in rows])
        return cls(frame, free, mats, ring)


def _coords(op: DiffOp, monos: list, ring: Ring) -> list:
    index = {m: k for k, m in enumerate(monos)}
    row = [ring.zero] * len(monos)
    for e, c in op.terms.items():
        if e not in index:
            raise AssertionError(f"normal form has non-standard monomial {e}")
        row[index[e]] = c
    return row


def connection_matrices(g: GroebnerBasis, frame: Frame | None = None, variables=None) -> PfaffianSystem:
    """M_i for each requested variable: row k holds ∂_i f_k in frame coordinates."""
    ring = g.ring
    monos = standard_monomials(g)
    frame = frame or Frame.standard(g)
    if len(frame) != len(monos):
        raise FrameError(f"frame has {len(frame)} elements but the rank is {len(monos)}")
    variables = tuple(variables or ring.zvars)
    nfs = [normal_form(f, g) for f in frame.elements]
    c = Matrix.from_rows([_coords(p, monos, ring) for p in nfs])
    try:
        cinv = c.inverse()
    except ZeroDivisionError:
        raise FrameError("frame elements are linearly dependent modulo the ideal", stage="pfaffian") from None
    identity = c == Matrix.identity(len(monos), ring.one)
    mats = {}
    for v in variables:
        i = ring.zindex(v)
        rows = [_coords(normal_form(d_times(f, i), g), monos, ring) for f in frame.elements]
        m = Matrix.from_rows(rows)
        mats[v] = m if identity else m @ cinv
    return PfaffianSystem(frame, variables, mats, ring, {"standard_monomials": monos})


def specialize(p: PfaffianSystem, assignment: dict, keep=None) -> PfaffianSystem:
    """Substitute constants for z-variables and drop their matrices.

    Every matrix, kept or dropped, must be regular at the substituted point.
    """
    if not assignment:
        return p
    keep = tuple(keep) if keep is not None else tuple(v for v in p.free_vars if v not in assignment)
    clash = [v for v in keep if v in assignment]
    if clash:
        raise ValidationError(f"variables {clash} are both specialized and kept free", stage="pfaffian")
    mats = {}
    for v in p.free_vars:
        m = p.matrices[v]
        out = []
        for r in range(m.rows):
            for s in range(m.cols):
                try:
                    out.append(m[r, s].subs(assignment))
                except ZeroDivisionError:
                    raise DenominatorVanishingError(
                        f"denominator of M_{v}[{r + 1},{s + 1}] = {m[r, s]} vanishes at {assignment}",
                        stage="pfaffian") from None
        if v in keep:
            mats[v] = Matrix(m.rows, m.cols, out)
    return PfaffianSystem(p.frame, keep, mats, p.ring, dict(p.info, specialization={
        k: str(v) for k, v in assignment.items()}))


def gkz_groebner(a: CayleyMatrix, d: ParamVector, ring: Ring, order: TermOrder | None = None,
                 **caps) -> GroebnerBasis:
    return buchberger(gkz_ideal(a, d, ring), order, **caps)


def gkz_pfaffian(a: CayleyMatrix, d: ParamVector, ring: Ring, frame_texts=None, variables=None,
                 order: TermOrder | None = None, **caps) -> PfaffianSystem:
    g = gkz_groebner(a, d, ring, order, **caps)
    frame = Frame.parse(frame_texts, ring) if frame_texts else None
    return connection_matrices(g, frame, variables)


def dual_system(a: CayleyMatrix, d: ParamVector, ring: Ring, frame_texts=None, variables=None,
                order: TermOrder | None = None, **caps) -> PfaffianSystem:
    """The system of M_A(−δ) in the same operator frame."""
    return gkz_pfaffian(a, -d, ring, frame_texts, variables, order, **caps)
