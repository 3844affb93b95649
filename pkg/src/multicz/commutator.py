"""Iterated and sum commutators of an m-linear operator with BMO symbols.

Two routes compute the iterated commutator: the kernel route multiplies the
kernel by prod_j (b_j(x) - b_j(y_j)) inside the quadrature, the expansion
route sums 2^m calls of the plain operator with signs. On shared quadrature
nodes they agree up to rounding.
"""
from __future__ import annotations

from itertools import combinations
from typing import Sequence

import numpy as np

from .czop import MKernel, _apply
from .lattice import GridFunction
from .maximal import SymbolTuple

ROUTES = ("expansion", "kernel")


def _check(K: MKernel, b: SymbolTuple, f_vec: Sequence[GridFunction]):
    if not (b.m == K.m == len(f_vec)):
        raise ValueError(f"arity mismatch: kernel {K.m}, symbols {b.m}, functions {len(f_vec)}")
    grid = f_vec[0].grid
    for g in list(b.b_vec) + list(f_vec):
        if g.grid != grid:
            raise ValueError("symbols and functions live on different grids")


def iterated_commutator_kernel(K: MKernel, b: SymbolTuple, f_vec: Sequence[GridFunction],
                               method: str = "auto") -> GridFunction:
    """Quadrature of ``prod_j (b_j(x) - b_j(y_j)) K(x, y) prod_j f_j(y_j)``."""
    _check(K, b, f_vec)
    return _apply(K, list(f_vec), factors=b.b_vec, method=method)


def iterated_commutator_expansion(K: MKernel, b: SymbolTuple, f_vec: Sequence[GridFunction],
                                  method: str = "auto") -> GridFunction:
    """``sum over S of (-1)^|S| prod_{j not in S} b_j(x) T(..., b_j f_j for j in S, ...)``."""
    _check(K, b, f_vec)
    m = K.m
    bvals = [bj.values for bj in b.b_vec]
    total = np.zeros(f_vec[0].grid.n_points)
    for size in range(m + 1):
        for S in combinations(range(m), size):
            args = [b.b_vec[j] * f_vec[j] if j in S else f_vec[j] for j in range(m)]
            term = _apply(K, args, method=method).values
            for j in range(m):
                if j not in S:
                    term = term * bvals[j]
            total += (-1) ** size * term
    return GridFunction(f_vec[0].grid, total)


def iterated_commutator(K: MKernel, b: SymbolTuple, f_vec: Sequence[GridFunction],
                        route: str = "expansion", method: str = "auto") -> GridFunction:
    if route == "expansion":
        return iterated_commutator_expansion(K, b, f_vec, method)
    if route == "kernel":
        return iterated_commutator_kernel(K, b, f_vec, method)
    raise ValueError(f"unknown route {route!r}")


def sum_commutator(K: MKernel, b: SymbolTuple, f_vec: Sequence[GridFunction],
                   method: str = "auto") -> GridFunction:
    """``sum_j [b_j T(f) - T(f_1, ..., b_j f_j, ..., f_m)]``."""
    _check(K, b, f_vec)
    f_vec = list(f_vec)
    base = _apply(K, f_vec, method=method).values
    total = np.zeros_like(base)
    for j, bj in enumerate(b.b_vec):
        args = f_vec.copy()
        args[j] = bj * f_vec[j]
        total += bj.values * base - _apply(K, args, method=method).values
    return GridFunction(f_vec[0].grid, total)
