"""Problem files, the end-to-end pipeline, and bundle verification."""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .arith.fields import Ring
from .arith.orders import TermOrder
from .arith.parse import parse_param, parse_ratfunc
from .errors import CheckFailure, GkzError, ValidationError
from .gkz import CayleyMatrix, ParamVector, Triangulation, cayley, validate_triangulation
from .intersection import (AnsatzCaps, IntersectionMatrix, SecondarySystem, denominator_check,
                           normalize, rational_solve, secondary_residual, self_intersection_constant)
from .pfaffian import PfaffianSystem, connection_matrices, gkz_groebner, specialize, Frame
from .series import quadratic_relation_check

TASKS = ("pfaffian", "intersect", "check")
FIXTURES = Path(__file__).parent / "fixtures"


def parse_order(text) -> TermOrder:
    """``grevlex``, ``grlex``, ``lex`` or ``weighted:w1,w2,...``."""
    if isinstance(text, TermOrder):
        return text
    if isinstance(text, dict):
        return TermOrder(text.get("kind", "grevlex"), tuple(text["weights"]) if text.get("weights") else None)
    text = str(text)
    try:
        if text.startswith("weighted:"):
            return TermOrder("weighted", tuple(int(w) for w in text[9:].split(",")))
        return TermOrder(text)
    except ValueError as e:
        raise ValidationError(str(e)) from None


@dataclass
class SeriesOptions:
    params: dict
    point: dict
    triangulation: Triangulation | None = None
    order: int | None = None
    tolerance: float = 1e-8


@dataclass
class ProblemSpec:
    name: str
    matrix: CayleyMatrix
    ring: Ring
    delta: ParamVector
    triangulation: Triangulation
    specialization: dict = field(default_factory=dict)
    frame: list | None = None
    order: TermOrder = field(default_factory=TermOrder)
    caps: dict = field(default_factory=dict)
    series: SeriesOptions | None = None
    tasks: tuple = TASKS

    @property
    def free_vars(self) -> tuple:
        return tuple(v for v in self.ring.zvars if v not in self.specialization)

    @classmethod
    def from_json(cls, data: dict) -> "ProblemSpec":
        try:
            return _problem_from_json(data)
        except GkzError:
            raise
        except (KeyError, TypeError, ValueError) as e:
            raise ValidationError(f"malformed problem file: {e!r}", stage="input") from None

    @classmethod
    def load(cls, path) -> "ProblemSpec":
        path = Path(path)
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            raise ValidationError(f"cannot read problem file {path}: {e}", stage="input") from None
        return cls.from_json(data)


def _constant(text, ring: Ring) -> Fraction:
    x = parse_param(str(text), ring)
    if not x.is_constant():
        raise ValidationError(f"{text!r} is not a rational constant", stage="input")
    return x.constant_value()


def _problem_from_json(data: dict) -> ProblemSpec:
    if "blocks" in data:
        a = cayley(data["blocks"])
    elif "cayley" in data:
        a = CayleyMatrix.from_matrix(data["cayley"]["matrix"], int(data["cayley"]["k"]))
    else:
        raise ValidationError("problem needs 'blocks' or 'cayley'", stage="input")
    params = tuple(data.get("params", ()))
    ring = Ring(a.zvars(), params)
    delta = data["delta"]
    if len(delta) != a.rows:
        raise ValidationError(f"delta has {len(delta)} entries, expected {a.rows}", stage="input")
    d = ParamVector(tuple(parse_param(str(x), ring) for x in delta), a.k)
    spec = {}
    for v, x in (data.get("specialize") or {}).items():
        ring.zindex(v) if v in ring.zvars else _unknown_var(v)
        spec[v] = _constant(x, ring)
    t = Triangulation.from_one_based(data["triangulation"])
    for sig in t.simplices:
        if any(not 0 <= i < a.N for i in sig):
            raise ValidationError(f"simplex {[i + 1 for i in sig]} has an index out of range", stage="input")
    series = None
    if data.get("series"):
        sd = data["series"]
        sparams = {p: _constant(sd["params"][p], ring) for p in params}
        point = {v: _constant(x, ring) for v, x in spec.items()}
        point.update({v: _constant(x, ring) for v, x in sd["point"].items()})
        st = Triangulation.from_one_based(sd["triangulation"]) if sd.get("triangulation") else None
        series = SeriesOptions(sparams, point, st, sd.get("order"), float(sd.get("tolerance", 1e-8)))
    tasks = tuple(data.get("tasks", TASKS))
    bad = [x for x in tasks if x not in TASKS]
    if bad:
        raise ValidationError(f"unknown task(s) {bad}", stage="input")
    return ProblemSpec(
        name=str(data.get("name", "problem")), matrix=a, ring=ring, delta=d, triangulation=t,
        specialization=spec, frame=data.get("frame"), order=parse_order(data.get("order", "grevlex")),
        caps=dict(data.get("caps") or {}), series=series, tasks=tasks,
    )


def _unknown_var(v):
    raise ValidationError(f"cannot specialize unknown variable {v!r}", stage="input")


def load_fixture(name: str) -> ProblemSpec:
    return ProblemSpec.load(FIXTURES / f"{name}.json")


def load_golden(name: str) -> dict:
    return json.loads((FIXTURES / f"{name}.golden.json").read_text(encoding="utf-8"))


def _golden_entries(g: dict):
    """Golden matrices give full ``entries`` rows or sparse 1-based ``[i, j, expr]`` triples."""
    for i, row in enumerate(g.get("entries", [])):
        for j, x in enumerate(row):
            yield i, j, x
    for i, j, x in g.get("sparse", []):
        yield i - 1, j - 1, x


def compare_golden(p: ProblemSpec, data: dict, golden: dict) -> list:
    """Differences between a result bundle and a golden file, as messages.

    Connection matrices, the normalized matrix and the constant must agree
    exactly; the unnormalized matrix only up to one overall scalar.
    """
    ring = p.ring
    out = []
    if "rank" in golden and data.get("rank") != golden["rank"]:
        out.append(f"rank: expected {golden['rank']}, got {data.get('rank')}")
    for key in ("pfaffian", "dual_pfaffian"):
        if key not in golden:
            continue
        mats = data[key]["matrices"]
        for v, rows in golden[key].items():
            for i, row in enumerate(rows):
                for j, x in enumerate(row):
                    if parse_ratfunc(mats[v][i][j], ring) != parse_ratfunc(x, ring):
                        out.append(f"{key}[{v}][{i + 1},{j + 1}]: expected {x}, got {mats[v][i][j]}")
    for key, up_to_scalar in (("intersection", True), ("normalized", False)):
        if key not in golden:
            continue
        got = data[key]["entries"]
        want = list(_golden_entries(golden[key]))
        scale = None
        if up_to_scalar:
            i, j, x = next(t for t in want if not parse_ratfunc(t[2], ring).is_zero())
            scale = parse_ratfunc(got[i][j], ring) / parse_ratfunc(x, ring)
        for i, j, x in want:
            w = parse_ratfunc(x, ring)
            if scale is not None:
                w = w * scale
            if parse_ratfunc(got[i][j], ring) != w:
                out.append(f"{key}[{i + 1},{j + 1}]: expected {x}, got {got[i][j]}")
        pe = golden[key].get("prefactor_exponent")
        if pe is not None and data[key].get("prefactor_exponent") != pe:
            out.append(f"{key}: prefactor exponent {data[key].get('prefactor_exponent')} != {pe}")
    if "constant" in golden and data.get("constant") is not None:
        if parse_param(data["constant"], ring) != parse_param(golden["constant"], ring):
            out.append(f"constant: expected {golden['constant']}, got {data['constant']}")
    return out


# --------------------------------------------------------------------------
# pipeline


@dataclass
class ResultBundle:
    problem: str
    data: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)
    objects: dict = field(default_factory=dict)  # live objects, not serialized

    def to_json(self, with_timings: bool = True) -> dict:
        out = {"problem": self.problem, **self.data}
        if with_timings:
            out["timings"] = {k: round(v, 3) for k, v in self.timings.items()}
        return out

    def dumps(self, with_timings: bool = True) -> str:
        return json.dumps(self.to_json(with_timings), indent=2, sort_keys=False) + "\n"


def _split_caps(caps: dict):
    caps = dict(caps)
    gb = {}
    if "max_pairs" in caps:
        gb["max_pairs"] = int(caps.pop("max_pairs"))
    return gb, caps


def pfaffian_pair(p: ProblemSpec, deadline: float | None = None):
    """(primal, dual) systems after specialization, plus the rank."""
    gb_caps, _ = _split_caps(p.caps)
    out = []
    for d in (p.delta, -p.delta):
        g = gkz_groebner(p.matrix, d, p.ring, p.order, deadline=deadline, **gb_caps)
        frame = Frame.parse(p.frame, p.ring) if p.frame else None
        full = connection_matrices(g, frame, p.free_vars)
        out.append(specialize(full, p.specialization))
    return out[0], out[1]


def run(p: ProblemSpec, tasks=None, deadline: float | None = None) -> ResultBundle:
    """Execute the requested stages in order and collect their results."""
    tasks = tuple(tasks or p.tasks)
    b = ResultBundle(p.name)
    clock = time.monotonic()

    def lap(name):
        nonlocal clock
        now = time.monotonic()
        b.timings[name] = now - clock
        clock = now

    report = validate_triangulation(p.matrix, p.triangulation)
    b.data["triangulation"] = report
    if not report["passed"]:
        raise ValidationError("triangulation is not unimodular", stage="gkz", counters={"report": report})
    primal, dual = pfaffian_pair(p, deadline)
    rank = primal.rank
    count = validate_triangulation(p.matrix, p.triangulation, rank)
    b.data["triangulation"] = count
    b.data["rank"] = rank
    b.data["pfaffian"] = primal.to_json()
    b.data["dual_pfaffian"] = dual.to_json()
    b.objects.update(primal=primal, dual=dual)
    lap("pfaffian")
    if "intersect" in tasks or "check" in tasks:
        s = SecondarySystem(primal, dual)
        _, caps = _split_caps(p.caps)
        caps = AnsatzCaps.from_json(caps)
        if deadline is not None:
            caps = AnsatzCaps(**{**caps.__dict__, "deadline": deadline})
        sol = rational_solve(s, caps)
        info = {k: v for k, v in sol.info.items() if k != "seconds"}
        b.data["intersection"] = {**sol.to_json(), "ansatz": info}
        c = self_intersection_constant(p.matrix, p.triangulation, p.delta)
        b.data["constant"] = str(c)
        norm = normalize(sol, c, p.matrix.n)
        b.data["normalized"] = norm.to_json()
        b.objects.update(system=s, solution=sol, normalized=norm, constant=c)
        lap("intersect")
    if "check" in tasks:
        b.data["checks"] = verify_objects(p, b.objects["primal"], b.objects["dual"],
                                          b.objects["normalized"], numeric=p.series is not None)
        lap("check")
    return b


# --------------------------------------------------------------------------
# verification


def verify_objects(p: ProblemSpec, primal: PfaffianSystem, dual: PfaffianSystem, imat: IntersectionMatrix,
                   numeric: bool = False) -> list:
    checks = []
    for name, sys in (("primal", primal), ("dual", dual)):
        defects = sys.flatness_defects()
        checks.append({"check": f"flatness_{name}", "passed": not defects,
                       "defects": [list(x) for x in defects]})
    s = SecondarySystem(primal, dual)
    res = secondary_residual(imat.entries, s)
    bad = [v for v, r in zip(s.free_vars, res) if not r.is_zero()]
    checks.append({"check": "secondary_residual", "passed": not bad, "nonzero_in": bad})
    checks.append({"check": "nondegenerate", "passed": not imat.entries.det().is_zero()})
    checks.append(denominator_check(imat, s))
    if imat.normalized:
        c = self_intersection_constant(p.matrix, p.triangulation, p.delta)
        ok = imat.entries[0, 0] == c.to_ratfunc() and imat.prefactor_exponent == p.matrix.n
        checks.append({"check": "normalization", "passed": bool(ok), "constant": str(c)})
    if numeric and p.series is not None:
        so = p.series
        t = so.triangulation or p.triangulation
        r = quadratic_relation_check(p.matrix, t, p.delta, so.params, so.point, so.order)
        checks.append({**r.to_json(), "tolerance": so.tolerance, "passed": r.residual < so.tolerance,
                       "triangulation": t.one_based()})
    return checks


def verify(p: ProblemSpec, bundle: dict, numeric: bool = False) -> list:
    """Re-check a result bundle (or a bare intersection matrix) against a problem."""
    ring = p.ring
    if "pfaffian" in bundle and "dual_pfaffian" in bundle:
        primal = PfaffianSystem.from_json(bundle["pfaffian"], ring)
        dual = PfaffianSystem.from_json(bundle["dual_pfaffian"], ring)
    else:
        primal, dual = pfaffian_pair(p)
    if "normalized" in bundle:
        imat = IntersectionMatrix.from_json(bundle["normalized"], ring)
    elif "intersection" in bundle:
        imat = IntersectionMatrix.from_json(bundle["intersection"], ring)
    elif "entries" in bundle:
        imat = IntersectionMatrix.from_json(bundle, ring)
    else:
        raise ValidationError("bundle has no intersection matrix", stage="check")
    return verify_objects(p, primal, dual, imat, numeric)


def first_failure(checks: list):
    return next((c for c in checks if not c.get("passed")), None)


def require(checks: list):
    bad = first_failure(checks)
    if bad is not None:
        raise CheckFailure(f"check {bad['check']} failed", stage="check", counters={"check": bad})
