import warnings
from fractions import Fraction

import mpmath
import pytest

from gkzint.errors import ValidationError
from gkzint.gkz import Triangulation
from gkzint.series import (NumericContext, SeriesDivergenceWarning, eval_series, gamma_series, numeric_delta,
                           quadratic_relation_check)

GAUSS_PARAMS = {"g1": Fraction(1, 3), "g2": Fraction(1, 5), "c": Fraction(1, 7)}
K3_PARAMS = {"e": Fraction(1, 10)}


def _point(**kw):
    p = {"z1": 1, "z2": 1, "z3": 1}
    p.update(kw)
    return p


def test_exponent_and_directions(gauss):
    d = numeric_delta(gauss.delta, GAUSS_PARAMS)
    s = gamma_series(gauss.a, (1, 2, 3), d, 5)
    for i, row in enumerate(gauss.a.entries):
        total = sum((r * x for r, x in zip(row, s.exponent)), d.delta[0] * 0)
        assert total == -d.delta[i]
    for v in s.directions:
        assert all(sum(r[j] * v[j] for j in range(len(v))) == 0 for r in gauss.a.entries)


@pytest.mark.parametrize("simplices, z4", [([[1, 2, 3], [2, 3, 4]], 0.3), ([[1, 2, 4], [1, 3, 4]], 20)])
def test_series_solve_the_pfaffian_system(gauss, simplices, z4):
    """Each Γ-series, as a function of z4, gives Φ = (φ, z4 φ') with Φ' = M Φ."""
    d = numeric_delta(gauss.delta, GAUSS_PARAMS)
    m = gauss.primal["z4"]
    num = [[complex(float(m[i, j].subs({"z4": Fraction(z4).limit_denominator()}).to_param().evaluate(GAUSS_PARAMS)))
            for j in range(2)] for i in range(2)]
    for sigma in Triangulation.from_one_based(simplices).simplices:
        s = gamma_series(gauss.a, sigma, d, 40)

        f, df, d2f = _z4_jet(s, z4)
        vec = [f, z4 * df]
        dvec = [df, df + z4 * d2f]
        for i in range(2):
            rhs = num[i][0] * vec[0] + num[i][1] * vec[1]
            assert abs(dvec[i] - rhs) < 1e-12 * max(abs(dvec[i]), 1e-3)


def _z4_jet(s, z4):
    """φ, φ', φ'' in z4 at z1 = z2 = z3 = 1, summed termwise with mpmath."""
    rho = [mpmath.mpf(x.constant_value().numerator) / x.constant_value().denominator for x in s.exponent]
    pref = 1 / mpmath.fprod(mpmath.gamma(1 + rho[i]) for i in s.simplex)
    out = [mpmath.mpc(0)] * 3
    for m, c in s.terms.items():
        if c.is_zero():
            continue
        cv = mpmath.mpf(c.constant_value().numerator) / c.constant_value().denominator
        k = rho[3] + s.lattice_point(m)[3]
        zk = mpmath.power(mpmath.mpc(z4), k)
        out[0] += cv * zk
        out[1] += cv * k * zk / z4
        out[2] += cv * k * (k - 1) * zk / z4**2
    return [pref * x for x in out]


def test_gauss_quadratic_relation(gauss):
    t = Triangulation.from_one_based([[1, 2, 4], [1, 3, 4]])
    r = quadratic_relation_check(gauss.a, t, gauss.delta, GAUSS_PARAMS, _point(z4=20))
    want = float(-(Fraction(8, 15)) / (Fraction(1, 7) * (Fraction(1, 7) - Fraction(8, 15))))
    assert abs(r.rhs - want) < 1e-12
    assert r.residual < 1e-8


def test_k3_quadratic_relation(k3):
    r = quadratic_relation_check(k3.a, k3.t, k3.delta, K3_PARAMS, _point(z4=10, z5=1))
    assert abs(r.rhs - 32 / (1 - 16 / 100)) < 1e-12
    assert r.residual < 1e-8
    assert len(r.contributions) == 4


def test_wrong_triangulation_for_the_point_diverges(gauss):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SeriesDivergenceWarning)
        r = quadratic_relation_check(gauss.a, gauss.t, gauss.delta, GAUSS_PARAMS, _point(z4=20))
    assert not r.residual < 1e-8


def test_divergence_is_flagged(gauss):
    d = numeric_delta(gauss.delta, GAUSS_PARAMS)
    s = gamma_series(gauss.a, (1, 2, 3), d, 20)
    with pytest.warns(SeriesDivergenceWarning):
        eval_series(s, NumericContext(GAUSS_PARAMS, _point(z4=20)), gauss.a.zvars())


def test_missing_coordinates_are_rejected(gauss):
    with pytest.raises(ValidationError):
        quadratic_relation_check(gauss.a, gauss.t, gauss.delta, GAUSS_PARAMS, {"z4": 20})
