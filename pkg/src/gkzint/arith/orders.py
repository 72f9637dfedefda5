"""Monomial term orders on exponent tuples."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

Exp = tuple[int, ...]

_KINDS = ("grevlex", "grlex", "lex", "weighted")


@dataclass(frozen=True)
class TermOrder:
    """A well-order on monomials, compatible with multiplication.

    ``weighted`` compares the weight vector first and breaks ties by grevlex.
    Variables are ranked in their list order (first variable largest).
    """

    kind: str = "grevlex"
    weights: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown term order {self.kind!r}")
        if self.kind == "weighted":
            if not self.weights or any(w < 0 for w in self.weights):
                raise ValueError("weighted order needs a non-negative weight vector")
            object.__setattr__(self, "weights", tuple(int(w) for w in self.weights))

    def key(self) -> Callable[[Exp], tuple]:
        return order_key(self)

    def max(self, exps):
        return max(exps, key=self.key())

    def sort_desc(self, exps):
        return sorted(exps, key=self.key(), reverse=True)


def _grevlex(e: Exp) -> tuple:
    return (sum(e), tuple(-x for x in reversed(e)))


def _grlex(e: Exp) -> tuple:
    return (sum(e), e)


def _lex(e: Exp) -> tuple:
    return e


def order_key(order: "TermOrder | str") -> Callable[[Exp], tuple]:
    if isinstance(order, str):
        order = TermOrder(order)
    if order.kind == "grevlex":
        return _grevlex
    if order.kind == "grlex":
        return _grlex
    if order.kind == "lex":
        return _lex
    w = order.weights

    def _weighted(e: Exp) -> tuple:
        if len(e) != len(w):
            raise ValueError("weight vector length does not match the number of variables")
        return (sum(a * b for a, b in zip(w, e)),) + _grevlex(e)

    return _weighted


def divides(a: Sequence[int], b: Sequence[int]) -> bool:
    return all(x <= y for x, y in zip(a, b))


def exp_sub(a: Exp, b: Exp) -> Exp:
    return tuple(x - y for x, y in zip(a, b))


def exp_add(a: Exp, b: Exp) -> Exp:
    return tuple(x + y for x, y in zip(a, b))


def exp_lcm(a: Exp, b: Exp) -> Exp:
    return tuple(max(x, y) for x, y in zip(a, b))
