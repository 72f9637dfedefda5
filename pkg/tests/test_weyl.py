import random

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from gkzint.arith import Ring, TermOrder, parse_param
from gkzint.errors import NonHolonomicError, ResourceLimitError
from gkzint.gkz import gkz_ideal
from gkzint.weyl import DiffOp, buchberger, normal_form, op_mul, parse_op, standard_monomials

RING = Ring(("x", "y"), ("a",))
SYMS = {s: sympy.Symbol(s) for s in RING.zvars + RING.params}


def _sym(x):
    return sympy.sympify(str(x).replace("^", "**"), locals=SYMS)


def apply(op: DiffOp, f):
    """Independent action of an operator on a sympy expression."""
    out = 0
    for e, c in op.terms.items():
        g = f
        for v, k in zip(RING.zvars, e):
            if k:
                g = sympy.diff(g, SYMS[v], k)
        out += _sym(c) * g
    return out


def random_op(rng: random.Random, terms: int = 3, max_order: int = 2) -> DiffOp:
    coeffs = ["1", "x", "y", "a", "x*y", "1/(x+1)", "a*y^2", "x-a"]
    parts = []
    for _ in range(rng.randint(1, terms)):
        c = rng.choice(coeffs)
        mono = "*".join(["dx"] * rng.randint(0, max_order) + ["dy"] * rng.randint(0, max_order))
        parts.append(f"({c})*{mono}" if mono else f"({c})")
    return parse_op("+".join(parts), RING)


ops = st.integers(0, 2**32).map(lambda s: random_op(random.Random(s)))


def test_commutation_relation():
    x, dx = parse_op("x", RING), parse_op("dx", RING)
    assert op_mul(dx, x) == op_mul(x, dx) + 1
    assert parse_op("dx*x^2", RING) == parse_op("x^2*dx + 2*x", RING)
    assert parse_op("dy*x", RING) == parse_op("x*dy", RING)


@settings(max_examples=40, deadline=None)
@given(ops, ops, ops)
def test_product_is_associative(a, b, c):
    assert op_mul(op_mul(a, b), c) == op_mul(a, op_mul(b, c))


@settings(max_examples=25, deadline=None)
@given(ops, ops)
def test_product_matches_composition(a, b):
    x, y, p = SYMS["x"], SYMS["y"], SYMS["a"]
    f = (x**2 * y + p) / (x + y + 3) + x**5 * y**3
    diff = apply(op_mul(a, b), f) - apply(a, apply(b, f))
    for pt in ({x: sympy.Rational(3, 7), y: sympy.Rational(-5, 2), p: sympy.Rational(11, 3)},
               {x: sympy.Rational(13, 5), y: sympy.Rational(2, 9), p: sympy.Rational(-1, 4)}):
        assert diff.subs(pt) == 0


@pytest.fixture(scope="module")
def gauss_basis(gauss_ring_ideal=None):
    from tests._examples import gauss_example

    ex = gauss_example()
    return buchberger(gkz_ideal(ex.a, ex.delta, ex.ring))


def test_gauss_staircase(gauss_basis):
    assert standard_monomials(gauss_basis) == [(0, 0, 0, 0), (0, 0, 0, 1)]


def test_normal_form_idempotent_and_linear(gauss_basis):
    g = gauss_basis
    ring = g.ring
    rng = random.Random(11)
    names = ring.zvars
    gammas = [parse_param(s, ring) for s in ("g1", "g2", "c", "g1+1/3")]
    for _ in range(100):
        parts = []
        for _ in range(rng.randint(1, 3)):
            mono = "*".join(f"d{rng.choice(names)}" for _ in range(rng.randint(0, 3)))
            c = rng.choice(["1", "z1", "g1", "z4/(z2+1)", "c*z3"])
            parts.append(f"({c})*{mono}" if mono else c)
        p = parse_op("+".join(parts), ring)
        q = parse_op(f"{rng.choice(names)}*d{rng.choice(names)}", ring)
        lam = DiffOp.scalar(ring, rng.choice(gammas))
        nf = normal_form(p, g)
        assert normal_form(nf, g) == nf
        assert normal_form(op_mul(lam, p) + q, g) == op_mul(lam, nf) + normal_form(q, g)
        assert all(e in ((0, 0, 0, 0), (0, 0, 0, 1)) for e in nf.terms)


def test_s_pairs_reduce_to_zero(gauss_basis):
    g = gauss_basis
    order = g.order
    gens = g.generators
    for i in range(len(gens)):
        for j in range(i + 1, len(gens)):
            (li, ci), (lj, cj) = gens[i].lead(order), gens[j].lead(order)
            lcm = tuple(max(a, b) for a, b in zip(li, lj))
            si = op_mul(DiffOp.monomial(g.ring, tuple(a - b for a, b in zip(lcm, li))), gens[i])
            sj = op_mul(DiffOp.monomial(g.ring, tuple(a - b for a, b in zip(lcm, lj))), gens[j])
            s = op_mul(DiffOp.scalar(g.ring, 1 / ci), si) - op_mul(DiffOp.scalar(g.ring, 1 / cj), sj)
            assert normal_form(s, g).is_zero()


@pytest.mark.parametrize("order", [TermOrder("grevlex"), TermOrder("grlex"), TermOrder("lex"),
                                   TermOrder("weighted", (1, 2, 3, 4))])
def test_rank_does_not_depend_on_order(order):
    from tests._examples import gauss_example

    ex = gauss_example()
    g = buchberger(gkz_ideal(ex.a, ex.delta, ex.ring), order)
    assert len(standard_monomials(g)) == 2


def test_non_holonomic_ideal_is_rejected():
    g = buchberger([parse_op("dx", RING)])
    with pytest.raises(NonHolonomicError):
        standard_monomials(g)


def test_pair_cap():
    from tests._examples import k3_example

    ex = k3_example()
    with pytest.raises(ResourceLimitError):
        buchberger(gkz_ideal(ex.a, ex.delta, ex.ring), max_pairs=3)
