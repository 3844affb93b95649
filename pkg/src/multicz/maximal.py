"""Maximal operators over cube families, and the BMO norm.

Every operator here is a node-wise maximum of a cube functional. The cube
functionals are computed only on cubes that meet the support of the input
(all others vanish), which keeps sparse inputs on huge windows cheap.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .lattice import CubeFamily, CubeValues, GridFunction, prefix_sums
from .orlicz import luxemburg_batch


def _support_slots(family: CubeFamily, idx: np.ndarray) -> np.ndarray:
    if idx.size * family.n_groups >= family.n_slots:
        return family.all_slots()
    return np.unique(family.locate(idx).ravel())


def _incidence(family: CubeFamily, idx: np.ndarray):
    """(slots, entry_node, entry_cube, counts) for the cubes meeting ``idx``."""
    slots, entry_node, entry_cube = family.memberships(idx)
    start, end = family.bounds(slots)
    return slots, entry_node, entry_cube, end - start


def _check_grid(family: CubeFamily, *fs: GridFunction):
    for f in fs:
        if f.grid != family.grid:
            raise ValueError("function and cube family live on different grids")


def mean_oscillation_cubes(f: GridFunction, cubes: CubeFamily) -> CubeValues:
    """``avg_Q |f - f_Q|`` on every cube meeting the support of f."""
    _check_grid(cubes, f)
    idx, val = f.support()
    slots, node, cube, counts = _incidence(cubes, idx)
    n = slots.size
    mean = np.bincount(cube, val[node], minlength=n) / counts
    dev = np.bincount(cube, np.abs(val[node] - mean[cube]), minlength=n)
    # zero samples of the cube each deviate by |f_Q|
    nnz = np.bincount(cube, minlength=n)
    osc = (dev + (counts - nnz) * np.abs(mean)) / counts
    return CubeValues(cubes, slots, osc)


def bmo_norm(b: GridFunction, cubes: CubeFamily) -> float:
    """``max over family cubes of avg_Q |b - b_Q|``."""
    return mean_oscillation_cubes(b, cubes).max()


@dataclass
class SymbolTuple:
    """BMO symbols (b_1, ..., b_m) with cached norms.

    With ``center=True`` each symbol has its window mean removed; commutators
    only see differences b_j(x) - b_j(y), so this changes nothing but the
    conditioning of expanded formulas.
    """

    b_vec: Sequence[GridFunction]
    cubes: CubeFamily
    center: bool = True
    bmo_norms: tuple = field(init=False)

    def __post_init__(self):
        b = tuple(self.b_vec)
        if self.center:
            b = tuple(GridFunction(bj.grid, bj.values - np.mean(bj.values)) for bj in b)
        self.b_vec = b
        self.bmo_norms = tuple(bmo_norm(bj, self.cubes) for bj in b)

    @property
    def m(self) -> int:
        return len(self.b_vec)

    @property
    def norm_product(self) -> float:
        return float(np.prod(self.bmo_norms))


def maximal_delta_cubes(f: GridFunction, delta: float, cubes: CubeFamily) -> CubeValues:
    if not delta > 0:
        raise ValueError("delta must be positive")
    _check_grid(cubes, f)
    idx, val = f.support()
    slots = _support_slots(cubes, idx)
    dense = np.zeros(cubes.grid.n_points)
    dense[idx] = np.abs(val) ** delta
    start, end = cubes.bounds(slots)
    c = prefix_sums(dense)
    avg = np.maximum((c[end] - c[start]) / (end - start), 0.0)
    return CubeValues(cubes, slots, avg ** (1.0 / delta))


def maximal_delta(f: GridFunction, delta: float, cubes: CubeFamily) -> GridFunction:
    """``M(|f|^delta)^(1/delta)``; delta = 1 is the Hardy-Littlewood operator."""
    return maximal_delta_cubes(f, delta, cubes).to_grid()


def hardy_littlewood(f: GridFunction, cubes: CubeFamily) -> GridFunction:
    return maximal_delta(f, 1.0, cubes)


def sharp_maximal_delta(f: GridFunction, delta: float, cubes: CubeFamily) -> GridFunction:
    """``M#(|f|^delta)^(1/delta)`` with the averaged-oscillation form of M#."""
    if not delta > 0:
        raise ValueError("delta must be positive")
    osc = mean_oscillation_cubes(abs(f) ** delta, cubes)
    osc.values = osc.values ** (1.0 / delta)
    return osc.to_grid()


def luxemburg_cubes(f: GridFunction, cubes: CubeFamily, k: int = 1) -> CubeValues:
    """Luxemburg norms ``||f||_{Phi^(k), Q}`` of every cube meeting supp f."""
    _check_grid(cubes, f)
    idx, val = f.support()
    slots, node, cube, counts = _incidence(cubes, idx)
    return CubeValues(cubes, slots, luxemburg_batch(np.abs(val[node]), cube, counts, k))


def average_cubes(f: GridFunction, cubes: CubeFamily) -> CubeValues:
    """``avg_Q |f|`` on every cube meeting supp f."""
    _check_grid(cubes, f)
    idx, val = f.support()
    slots = _support_slots(cubes, idx)
    dense = np.zeros(cubes.grid.n_points)
    dense[idx] = np.abs(val)
    start, end = cubes.bounds(slots)
    c = prefix_sums(dense)
    return CubeValues(cubes, slots, np.maximum((c[end] - c[start]) / (end - start), 0.0))


def _product(parts: Sequence[CubeValues]) -> CubeValues:
    slots, values = parts[0].slots, parts[0].values
    for p in parts[1:]:
        slots, i, j = np.intersect1d(slots, p.slots, assume_unique=True, return_indices=True)
        values = values[i] * p.values[j]
    return CubeValues(parts[0].family, slots, values)


def m_llogl_cubes(f_vec: Sequence[GridFunction], cubes: CubeFamily, k: int = 1) -> CubeValues:
    """``prod_j ||f_j||_{Phi^(k), Q}`` on the cubes where it can be nonzero."""
    if len(f_vec) < 1:
        raise ValueError("need at least one function")
    return _product([luxemburg_cubes(f, cubes, k) for f in f_vec])


def m_llogl(f_vec: Sequence[GridFunction], cubes: CubeFamily, k: int = 1) -> GridFunction:
    """Multilinear L(log L) maximal function; ``k = 0`` gives the plain
    multilinear maximal function ``sup prod avg_Q |f_j|``."""
    return m_llogl_cubes(f_vec, cubes, k).to_grid()


def m_i_llogl(f_vec: Sequence[GridFunction], i: int, cubes: CubeFamily) -> GridFunction:
    """Luxemburg norm in slot i, plain averages in the others."""
    parts = [luxemburg_cubes(f, cubes, 1) if j == i else average_cubes(f, cubes)
             for j, f in enumerate(f_vec)]
    return _product(parts).to_grid()


def m_sigma_llogl(f_vec: Sequence[GridFunction], cubes: CubeFamily) -> GridFunction:
    terms = [m_i_llogl(f_vec, i, cubes) for i in range(len(f_vec))]
    total = terms[0].values.copy()
    for t in terms[1:]:
        total += t.values
    return GridFunction(cubes.grid, total)
