from fractions import Fraction

import mpmath
import pytest

from gkzint.arith import parse_ratfunc
from gkzint.errors import DenominatorVanishingError, FrameError
from gkzint.pfaffian import PfaffianSystem, gkz_pfaffian, specialize

# connection matrices printed for the Gauss example, as ∂Φ = ᵗΩ Φ
OMEGA = [["0", "-c*g2/(z4-1)"], ["1/z4", "(-(c+g2)*z4+c-g1)/(z4*(z4-1))"]]
OMEGA_DUAL = [["0", "-c*g2/(z4-1)"], ["1/z4", "((c+g2)*z4-c+g1)/(z4*(z4-1))"]]


def _transpose_matches(m, printed, ring):
    return all(m[i, j] == parse_ratfunc(printed[j][i], ring) for i in range(2) for j in range(2))


def test_gauss_connection_matrices_match_print(gauss):
    assert gauss.primal.free_vars == ("z4",)
    assert _transpose_matches(gauss.primal["z4"], OMEGA, gauss.ring)
    assert _transpose_matches(gauss.dual["z4"], OMEGA_DUAL, gauss.ring)


def test_dual_is_primal_at_negated_parameters(gauss):
    neg = specialize(gkz_pfaffian(gauss.a, -gauss.delta, gauss.ring, gauss.frame), {"z1": 1, "z2": 1, "z3": 1})
    assert neg["z4"] == gauss.dual["z4"]


def test_full_systems_are_flat(gauss, k3):
    assert gauss.primal_full.is_flat()
    assert gauss.dual_full.is_flat()
    assert k3.primal_full.is_flat()
    assert k3.dual_full.is_flat()
    assert k3.primal.is_flat() and k3.dual.is_flat()


def test_k3_rank_and_default_frame(k3):
    assert k3.primal.rank == 4
    assert k3.primal.frame.strings() == ["1", "dz5", "dz4", "dz5^2"]
    assert k3.primal.free_vars == ("z4", "z5")


def test_gauss_system_against_euler_integral(gauss):
    """Φ = (F, z4 F') for F = ∫_0^∞ x^c (1+x)^-g1 (1+z4 x)^-g2 dx/x satisfies ∂Φ = MΦ."""
    mpmath.mp.dps = 30
    g1, g2, c = mpmath.mpf(1) / 3, mpmath.mpf(1) / 5, mpmath.mpf(1) / 7

    z = mpmath.mpf(3)

    def moment(k):
        # ∫ x^c (1+x)^-g1 (1+zx)^-g2 (x/(1+zx))^k dx/x over x = e^s
        def f(s):
            x = mpmath.exp(s)
            return x**c * (1 + x) ** -g1 * (1 + z * x) ** -g2 * (x / (1 + z * x)) ** k
        return mpmath.quad(f, [-mpmath.inf, -20, 0, 20, mpmath.inf])

    m0, m1, m2 = moment(0), moment(1), moment(2)
    f, df, d2f = m0, -g2 * m1, g2 * (g2 + 1) * m2
    phi = [f, z * df]
    dphi = [df, df + z * d2f]
    m = gauss.primal["z4"]
    vals = {"g1": Fraction(1, 3), "g2": Fraction(1, 5), "c": Fraction(1, 7), "z4": Fraction(3)}
    num = [[_eval(m[i, j], vals) for j in range(2)] for i in range(2)]
    for i in range(2):
        rhs = num[i][0] * phi[0] + num[i][1] * phi[1]
        assert abs(dphi[i] - rhs) < mpmath.mpf(10) ** -15 * abs(dphi[i] or 1)


def _eval(x, vals):
    names = {k: mpmath.mpf(v.numerator) / v.denominator for k, v in vals.items()}
    return eval(str(x).replace("^", "**"), {}, names)


def test_json_round_trip(gauss):
    data = gauss.primal.to_json()
    back = PfaffianSystem.from_json(data, gauss.ring)
    assert back["z4"] == gauss.primal["z4"]
    assert back.frame.strings() == ["1", "z4*dz4"]


def test_singular_frame_is_rejected(gauss):
    with pytest.raises(FrameError):
        gkz_pfaffian(gauss.a, gauss.delta, gauss.ring, ["1", "2"])


def test_specializing_onto_the_singular_locus_fails(gauss):
    with pytest.raises(DenominatorVanishingError):
        specialize(gauss.primal, {"z4": 1})
