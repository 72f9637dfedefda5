"""The two worked examples, built once per session."""

import functools

from gkzint.arith import Ring, parse_param
from gkzint.gkz import ParamVector, Triangulation, cayley
from gkzint.intersection import SecondarySystem, rational_solve
from gkzint.pfaffian import dual_system, gkz_pfaffian, specialize

ONES = {"z1": 1, "z2": 1, "z3": 1}


class Example:
    def __init__(self, blocks, params, delta, frame, triangulation):
        self.a = cayley(blocks)
        self.ring = Ring(self.a.zvars(), params)
        self.delta = ParamVector(tuple(parse_param(s, self.ring) for s in delta), self.a.k)
        self.frame = frame
        self.t = Triangulation.from_one_based(triangulation)

    @functools.cached_property
    def primal_full(self):
        return gkz_pfaffian(self.a, self.delta, self.ring, self.frame)

    @functools.cached_property
    def dual_full(self):
        return dual_system(self.a, self.delta, self.ring, self.frame)

    @functools.cached_property
    def primal(self):
        return specialize(self.primal_full, ONES)

    @functools.cached_property
    def dual(self):
        return specialize(self.dual_full, ONES)

    @functools.cached_property
    def secondary(self):
        return SecondarySystem(self.primal, self.dual)

    @functools.cached_property
    def solution(self):
        return rational_solve(self.secondary)


@functools.lru_cache(maxsize=None)
def gauss_example() -> Example:
    return Example([[[0, 1]], [[0, 1]]], ("g1", "g2", "c"), ("g1", "g2", "c"), ["1", "z4*dz4"],
                   [[1, 2, 3], [2, 3, 4]])


@functools.lru_cache(maxsize=None)
def k3_example() -> Example:
    return Example([[[3, 2, 2, 2, 1], [0, 1, -1, 0, 0]]], ("e",), ("1/2", "1+e", "e"), None,
                   [[3, 4, 5], [2, 4, 5], [1, 3, 4], [1, 2, 4]])
