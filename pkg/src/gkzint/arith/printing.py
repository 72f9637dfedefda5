"""Canonical text form of polynomials and fractions.

The printed form uses integer coefficients: numerator and denominator are
scaled to a primitive integer pair with a positive leading denominator
coefficient.  Output parses back through :func:`gkzint.arith.parse.parse_expr`.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd, lcm


def _monomial(exp, names) -> str:
    parts = []
    for e, name in zip(exp, names):
        if e == 1:
            parts.append(name)
        elif e > 1:
            parts.append(f"{name}^{e}")
    return "*".join(parts)


def format_terms(terms, names) -> str:
    """``terms`` is a list of ``(exp, int)`` pairs, already in print order."""
    if not terms:
        return "0"
    out = []
    for k, (exp, c) in enumerate(terms):
        mono = _monomial(exp, names)
        sign = "-" if c < 0 else "+"
        a = abs(c)
        if not mono:
            body = str(a)
        elif a == 1:
            body = mono
        else:
            body = f"{a}*{mono}"
        if k == 0:
            out.append(body if sign == "+" else "-" + body)
        else:
            out.append(sign + body)
    return "".join(out)


def _frac(c) -> Fraction:
    if hasattr(c, "p") and hasattr(c, "q"):
        return Fraction(int(c.p), int(c.q))
    return Fraction(c)


def _integer_pair(num_terms, den_terms):
    coeffs = [_frac(c) for _, c in num_terms] + [_frac(c) for _, c in den_terms]
    scale = 1
    for c in coeffs:
        scale = lcm(scale, c.denominator)
    ints = [int(c * scale) for c in coeffs]
    g = 0
    for v in ints:
        g = gcd(g, v)
    g = g or 1
    if den_terms and _frac(den_terms[0][1]) < 0:
        g = -g
    n = len(num_terms)
    num = [(e, v // g) for (e, _), v in zip(num_terms, ints[:n])]
    den = [(e, v // g) for (e, _), v in zip(den_terms, ints[n:])]
    return num, den


def format_fraction(num_terms, den_terms, names) -> str:
    """Format ``num/den`` given term lists in descending order.

    Term coefficients may be any rationals; the output is integer-normalized.
    """
    if not num_terms:
        return "0"
    num, den = _integer_pair(num_terms, den_terms)
    num_s = format_terms(num, names)
    if len(den) == 1 and not any(den[0][0]) and den[0][1] == 1:
        return num_s
    if len(num) > 1:
        num_s = f"({num_s})"
    den_s = format_terms(den, names)
    bare = len(den) == 1 and (
        not any(den[0][0]) or (den[0][1] == 1 and sum(1 for e in den[0][0] if e) == 1)
    )
    if not bare:
        den_s = f"({den_s})"
    return f"{num_s}/{den_s}"
