"""Uniform 1-D grids, grid functions, cube families and distribution functions.

Everything else in the package computes on these objects. Cubes are
half-open intervals made of whole grid cells; a node belongs to a cube
when its midpoint lies in it.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Optional, Sequence

import numpy as np

FAMILY_KINDS = ("dyadic", "shifted_dyadic", "all")

# beyond this many (node, cube) pairs a nonlinear cube functional refuses to run
MAX_ENTRIES = 60_000_000


@dataclass(frozen=True)
class Grid:
    """Midpoint-sampled uniform grid on ``[center - R, center + R]``."""

    center: float
    half_width: float
    n_points: int

    def __post_init__(self):
        n = self.n_points
        if n < 1 or n & (n - 1):
            raise ValueError(f"n_points must be a power of two, got {n}")
        if not self.half_width > 0:
            raise ValueError("half_width must be positive")

    @property
    def h(self) -> float:
        return 2.0 * self.half_width / self.n_points

    @property
    def left(self) -> float:
        return self.center - self.half_width

    @property
    def right(self) -> float:
        return self.center + self.half_width

    @property
    def levels(self) -> int:
        return self.n_points.bit_length() - 1

    @cached_property
    def nodes(self) -> np.ndarray:
        x = self.left + (np.arange(self.n_points) + 0.5) * self.h
        x.flags.writeable = False
        return x

    def node(self, i):
        return self.left + (np.asarray(i) + 0.5) * self.h

    def refine(self, factor: int = 2) -> "Grid":
        return Grid(self.center, self.half_width, self.n_points * factor)

    def index_range(self, a: float, b: float) -> tuple[int, int]:
        """Index range ``[lo, hi)`` of the nodes lying in ``[a, b)``."""
        lo = int(np.ceil((a - self.left) / self.h - 0.5))
        hi = int(np.ceil((b - self.left) / self.h - 0.5))
        return max(lo, 0), min(max(hi, 0), self.n_points)

    def open_index_range(self, a: float, b: float) -> tuple[int, int]:
        """Index range of the nodes lying in the open interval ``(a, b)``."""
        lo = int(np.floor((a - self.left) / self.h - 0.5)) + 1
        hi = int(np.ceil((b - self.left) / self.h - 0.5))
        return max(lo, 0), min(max(hi, 0), self.n_points)


class GridFunction:
    """Real function sampled at the nodes of a grid.

    Functions with small support can be built with :meth:`from_support`;
    they keep only the nonzero samples and materialize ``values`` lazily,
    which is what makes windows of 10^7 cells affordable.
    """

    def __init__(self, grid: Grid, values):
        values = np.array(values, dtype=float)
        if values.shape != (grid.n_points,):
            raise ValueError(f"expected {grid.n_points} values, got shape {values.shape}")
        bad = np.flatnonzero(~np.isfinite(values))
        if bad.size:
            raise ValueError(f"non-finite value at node {bad[0]}")
        values.flags.writeable = False
        self.grid = grid
        self._values = values
        self._support = None

    @classmethod
    def from_support(cls, grid: Grid, index, values) -> "GridFunction":
        index = np.asarray(index, dtype=np.int64)
        values = np.broadcast_to(np.asarray(values, dtype=float), index.shape).copy()
        if index.size and (index.min() < 0 or index.max() >= grid.n_points):
            raise ValueError("support index outside the grid")
        if np.any(np.diff(index) <= 0):
            raise ValueError("support index must be strictly increasing")
        bad = np.flatnonzero(~np.isfinite(values))
        if bad.size:
            raise ValueError(f"non-finite value at node {index[bad[0]]}")
        keep = values != 0
        self = cls.__new__(cls)
        self.grid = grid
        self._values = None
        self._support = (index[keep], values[keep])
        return self

    @property
    def values(self) -> np.ndarray:
        if self._values is None:
            v = np.zeros(self.grid.n_points)
            idx, val = self._support
            v[idx] = val
            v.flags.writeable = False
            self._values = v
        return self._values

    def support(self) -> tuple[np.ndarray, np.ndarray]:
        """Indices and values of the nonzero samples."""
        if self._support is None:
            idx = np.flatnonzero(self._values)
            self._support = (idx, self._values[idx])
        return self._support

    @property
    def is_sparse(self) -> bool:
        return self._values is None

    def __len__(self):
        return self.grid.n_points

    def _same_grid(self, other):
        if other.grid != self.grid:
            raise ValueError("grid functions live on different grids")

    def map(self, fn: Callable[[np.ndarray], np.ndarray]) -> "GridFunction":
        """Apply ``fn`` to the values; keeps sparsity when ``fn(0) == 0``."""
        if self.is_sparse and fn(np.zeros(1))[0] == 0:
            idx, val = self._support
            return GridFunction.from_support(self.grid, idx, fn(val))
        return GridFunction(self.grid, fn(self.values))

    def __abs__(self):
        return self.map(np.abs)

    def __neg__(self):
        return self.map(np.negative)

    def __mul__(self, other):
        if isinstance(other, GridFunction):
            self._same_grid(other)
            if self.is_sparse:
                idx, val = self._support
                return GridFunction.from_support(self.grid, idx, val * other.values[idx])
            if other.is_sparse:
                return other * self
            return GridFunction(self.grid, self.values * other.values)
        c = float(other)
        return self.map(lambda v: c * v)

    __rmul__ = __mul__

    def __add__(self, other):
        if isinstance(other, GridFunction):
            self._same_grid(other)
            return GridFunction(self.grid, self.values + other.values)
        return GridFunction(self.grid, self.values + float(other))

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-other if isinstance(other, GridFunction) else -float(other))

    def __pow__(self, p):
        return self.map(lambda v: np.power(v, p))

    def __repr__(self):
        return f"GridFunction(N={self.grid.n_points}, sparse={self.is_sparse})"


def build_grid_function(grid: Grid, formula: Callable) -> GridFunction:
    """Sample ``formula`` at every node; the formula should accept arrays."""
    x = grid.nodes
    try:
        v = np.asarray(formula(x), dtype=float)
    except (TypeError, ValueError):
        v = np.array([formula(float(t)) for t in x], dtype=float)
    if v.shape != x.shape:
        v = np.broadcast_to(v, x.shape)
    bad = np.flatnonzero(~np.isfinite(v))
    if bad.size:
        raise ValueError(f"formula is not finite at node {bad[0]} (x={x[bad[0]]!r})")
    return GridFunction(grid, v)


def indicator(grid: Grid, a: float, b: float, value: float = 1.0) -> GridFunction:
    """Sparse sample of ``value * chi_(a, b)``."""
    lo, hi = grid.open_index_range(a, b)
    return GridFunction.from_support(grid, np.arange(lo, max(lo, hi)), value)


@dataclass(frozen=True)
class Cube:
    left: float
    length: float

    def node_range(self, grid: Grid) -> tuple[int, int]:
        return grid.index_range(self.left, self.left + self.length)


def cube_of_range(grid: Grid, i0: int, i1: int) -> Cube:
    return Cube(grid.left + i0 * grid.h, (i1 - i0) * grid.h)


def _check_cube(grid: Grid, Q: Cube) -> tuple[int, int]:
    if Q.left < grid.left - 1e-12 * grid.half_width or \
            Q.left + Q.length > grid.right + 1e-12 * grid.half_width:
        raise ValueError(f"{Q} is not contained in the grid window")
    i0, i1 = Q.node_range(grid)
    if i1 <= i0:
        raise ValueError(f"{Q} contains no grid node")
    return i0, i1


class CubeFamily:
    """A finite family of node-aligned intervals standing in for "all cubes".

    The family is a union of *groups*; a group with cell length ``L`` and
    offset ``o`` partitions the nodes into ``[o + (k-1)L, o + kL)`` clipped
    to the window, k = 0, 1, .... Every cube is addressed by an integer
    slot ``slot_offset[g] + k``; slot numbers are never materialized unless
    a caller asks for the whole family.

    ``dyadic`` has one group per level; ``shifted_dyadic`` adds the lattices
    displaced by a third and two thirds of the cube length; ``all`` has
    every (length, offset) pair and so contains every node-aligned interval.
    """

    def __init__(self, grid: Grid, kind: str = "shifted_dyadic"):
        if kind not in FAMILY_KINDS:
            raise ValueError(f"unknown family kind {kind!r}")
        self.grid = grid
        self.kind = kind
        n = grid.n_points
        pairs = []
        if kind == "all":
            for L in range(1, n + 1):
                pairs.extend((L, o) for o in range(L))
        else:
            shifts = (0.0,) if kind == "dyadic" else (0.0, 1 / 3, 2 / 3)
            for level in range(grid.levels + 1):
                L = n >> level
                seen = set()
                for s in shifts:
                    o = int(round(s * L)) % L
                    if o not in seen:
                        seen.add(o)
                        pairs.append((L, o))
        arr = np.array(pairs, dtype=np.int64)
        self.lengths = arr[:, 0]
        self.offsets = arr[:, 1]
        kmax = (n - 1 - self.offsets + self.lengths) // self.lengths
        self.slot_offset = np.concatenate([[0], np.cumsum(kmax + 1)]).astype(np.int64)

    def __eq__(self, other):
        return isinstance(other, CubeFamily) and other.grid == self.grid and other.kind == self.kind

    def __hash__(self):
        return hash((self.grid, self.kind))

    def __repr__(self):
        return f"CubeFamily({self.kind}, N={self.grid.n_points}, groups={self.n_groups})"

    @property
    def n_groups(self) -> int:
        return len(self.lengths)

    @property
    def n_slots(self) -> int:
        return int(self.slot_offset[-1])

    def locate(self, nodes) -> np.ndarray:
        """Slot of the cube containing each node, one row per group."""
        nodes = np.asarray(nodes, dtype=np.int64)
        L = self.lengths[:, None]
        k = (nodes[None, :] - self.offsets[:, None] + L) // L
        return k + self.slot_offset[:-1, None]

    def bounds(self, slots) -> tuple[np.ndarray, np.ndarray]:
        """Node ranges ``[start, end)`` of the given slots."""
        slots = np.asarray(slots, dtype=np.int64)
        g = np.searchsorted(self.slot_offset, slots, side="right") - 1
        k = slots - self.slot_offset[g]
        L, o = self.lengths[g], self.offsets[g]
        start = np.maximum(o + (k - 1) * L, 0)
        end = np.minimum(o + k * L, self.grid.n_points)
        return start, end

    def all_slots(self) -> np.ndarray:
        """Every nonempty cube of the family."""
        slots = np.arange(self.n_slots, dtype=np.int64)
        start, end = self.bounds(slots)
        return slots[end > start]

    @property
    def cubes(self) -> list[Cube]:
        start, end = self.bounds(self.all_slots())
        return [cube_of_range(self.grid, int(a), int(b)) for a, b in zip(start, end)]

    def memberships(self, nodes) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Cubes meeting ``nodes`` and the (node, cube) incidence list.

        Returns ``(slots, entry_node, entry_cube)``: the sorted unique slots
        of cubes containing at least one of ``nodes``, and for every pair
        the position in ``nodes`` and the index into ``slots``.
        """
        nodes = np.asarray(nodes, dtype=np.int64)
        n_entries = nodes.size * self.n_groups
        if n_entries > MAX_ENTRIES:
            raise ValueError(
                f"{n_entries} node/cube pairs exceed the limit; use a smaller "
                "grid or a dyadic family")
        keys = self.locate(nodes)
        slots, inverse = np.unique(keys.ravel(), return_inverse=True)
        entry_node = np.broadcast_to(np.arange(nodes.size), keys.shape).ravel()
        return slots, entry_node, inverse.ravel()

    def slot_of_cube(self, Q: Cube) -> Optional[int]:
        i0, i1 = _check_cube(self.grid, Q)
        s = self.locate([i0])[:, 0]
        start, end = self.bounds(s)
        hit = np.flatnonzero((start == i0) & (end == i1))
        return int(s[hit[0]]) if hit.size else None

    def containing_cube(self, i0: int, i1: int) -> tuple[int, int]:
        """Shortest family cube containing the node range ``[i0, i1)``."""
        s = self.locate([i0])[:, 0]
        start, end = self.bounds(s)
        ok = end >= i1
        lengths = np.where(ok, end - start, np.iinfo(np.int64).max)
        j = int(np.argmin(lengths))
        return int(start[j]), int(end[j])


class CubeValues:
    """Values attached to a set of family cubes; cubes not listed count as 0.

    A maximal function is the node-wise maximum over the cubes containing
    each node. Its superlevel sets are unions of cubes, so their measure is
    computable without ever building the node array.
    """

    def __init__(self, family: CubeFamily, slots, values):
        self.family = family
        self.slots = np.asarray(slots, dtype=np.int64)
        self.values = np.asarray(values, dtype=float)

    def max(self) -> float:
        return float(self.values.max(initial=0.0))

    def to_grid(self) -> GridFunction:
        fam = self.family
        n = fam.grid.n_points
        if fam.kind == "all":
            start, end = fam.bounds(self.slots)
            table = np.zeros((n, n + 1))
            np.maximum.at(table, (start, end), self.values)
            tail = np.maximum.accumulate(table[:, ::-1], axis=1)[:, ::-1][:, 1:]
            lower = np.tril(np.ones((n, n), dtype=bool)).T
            out = np.where(lower, tail, 0.0).max(axis=0)
        else:
            dense = np.zeros(fam.n_slots)
            dense[self.slots] = self.values
            out = np.zeros(n)
            for keys in fam.locate(np.arange(n)):
                np.maximum(out, dense[keys], out=out)
        return GridFunction(fam.grid, out)

    def superlevel_measure(self, t: float, w: Optional[GridFunction] = None) -> float:
        """Measure of ``{x : max over cubes containing x > t}``, for ``t > 0``."""
        if not t > 0:
            raise ValueError("threshold must be positive")
        sel = self.values > t
        if not sel.any():
            return 0.0
        start, end = self.family.bounds(self.slots[sel])
        order = np.argsort(start, kind="stable")
        start, end = start[order], end[order]
        reach = np.maximum.accumulate(end)
        new_run = np.ones(start.size, dtype=bool)
        new_run[1:] = start[1:] > reach[:-1]
        run_id = np.cumsum(new_run) - 1
        run_start = start[new_run]
        run_end = np.zeros(run_start.size, dtype=np.int64)
        np.maximum.at(run_end, run_id, end)
        h = self.family.grid.h
        if w is None:
            return float(np.sum(run_end - run_start)) * h
        cw = np.concatenate([[0.0], np.cumsum(w.values)])
        return float(np.sum(cw[run_end] - cw[run_start])) * h


def prefix_sums(values: np.ndarray) -> np.ndarray:
    return np.concatenate([[0.0], np.cumsum(values)])


def cube_means(values: np.ndarray, family: CubeFamily, slots) -> np.ndarray:
    """Plain averages of node values over the given cubes (prefix sums)."""
    start, end = family.bounds(slots)
    c = prefix_sums(values)
    return (c[end] - c[start]) / (end - start)


def cube_minima(values: np.ndarray, family: CubeFamily, slots) -> np.ndarray:
    """Node minima over the given cubes (sparse-table range minimum)."""
    start, end = family.bounds(slots)
    table = [np.asarray(values, dtype=float)]
    while 2 ** len(table) <= values.size:
        prev = table[-1]
        half = 2 ** (len(table) - 1)
        table.append(np.minimum(prev[:-half], prev[half:]))
    width = end - start
    lvl = np.floor(np.log2(width)).astype(np.int64)
    out = np.empty(start.size)
    for j in np.unique(lvl):
        sel = lvl == j
        a, b = start[sel], end[sel] - 2 ** j
        out[sel] = np.minimum(table[j][a], table[j][b])
    return out


def cube_average(f: GridFunction, Q: Cube) -> float:
    """``(sum of f over nodes in Q) * h / |Q|``; exact for cell-aligned Q."""
    i0, i1 = _check_cube(f.grid, Q)
    if f.is_sparse:
        idx, val = f.support()
        total = val[(idx >= i0) & (idx < i1)].sum()
    else:
        total = f.values[i0:i1].sum()
    return float(total * f.grid.h / Q.length)


def superlevel_measure(g: GridFunction, t: float, w: Optional[GridFunction] = None) -> float:
    """Discretized (weighted) measure of ``{|g| > t}``."""
    if not t > 0:
        raise ValueError("threshold must be positive")
    if w is not None:
        if np.any(w.values <= 0):
            raise ValueError("weight must be positive")
        return float(w.values[np.abs(g.values) > t].sum() * g.grid.h)
    idx, val = g.support()
    return float(np.count_nonzero(np.abs(val) > t) * g.grid.h)


def distribution_function(g: GridFunction, thresholds: Sequence[float],
                          w: Optional[GridFunction] = None) -> np.ndarray:
    """``superlevel_measure`` at many thresholds at once."""
    t = np.asarray(thresholds, dtype=float)
    if np.any(t <= 0):
        raise ValueError("thresholds must be positive")
    idx, val = g.support()
    a = np.abs(val)
    weights = np.full(a.size, g.grid.h) if w is None else w.values[idx] * g.grid.h
    order = np.argsort(a)
    a, cw = a[order], np.concatenate([[0.0], np.cumsum(weights[order])])
    pos = np.searchsorted(a, t, side="right")
    return cw[-1] - cw[pos]


def weighted_lp_norm(f: GridFunction, p: float, w: Optional[GridFunction] = None) -> float:
    if not p > 0:
        raise ValueError("p must be positive")
    idx, val = f.support()
    a = np.abs(val) ** p
    if w is not None:
        a = a * w.values[idx]
    return float((a.sum() * f.grid.h) ** (1.0 / p))


def lambda_grid(lo: float, hi: float, per_decade: int = 64) -> np.ndarray:
    """Geometric grid with ``per_decade`` points per decade covering [lo, hi]."""
    if not 0 < lo <= hi:
        raise ValueError("need 0 < lo <= hi")
    if lo == hi:
        return np.array([lo])
    n = int(np.ceil(per_decade * np.log10(hi / lo))) + 1
    return np.geomspace(lo, hi, n)


def weak_norm(values: np.ndarray, q: float, cell_measure: Optional[float] = None) -> float:
    """``sup_lambda lambda * |{|v| > lambda}|^(1/q)`` for sampled data.

    Each sample carries ``cell_measure`` (default ``1/len(values)``, i.e. a
    probability measure). The distribution function is a step function, so
    the supremum is the left limit at one of the sample values; it is
    evaluated there exactly instead of on a lambda grid.
    """
    a = np.sort(np.abs(np.asarray(values, dtype=float)))[::-1]
    a = a[a > 0]
    if a.size == 0:
        return 0.0
    if cell_measure is None:
        cell_measure = 1.0 / len(values)
    # number of samples >= a[i]; ties share the largest count
    count = np.searchsorted(-a, -a, side="right")
    return float(np.max(a * (count * cell_measure) ** (1.0 / q)))


def kolmogorov_lhs_rhs(f: GridFunction, Q: Cube, p: float, q: float) -> tuple[float, float]:
    """Normalized ``L^p(Q)`` norm and ``L^{q,inf}(Q)`` quasi-norm of f."""
    if not 0 < p < q:
        raise ValueError("need 0 < p < q")
    i0, i1 = _check_cube(f.grid, Q)
    v = np.abs(f.values[i0:i1])
    frac = f.grid.h / Q.length
    lhs = float((np.sum(v ** p) * frac) ** (1.0 / p))
    return lhs, weak_norm(v, q, frac)


def kolmogorov_constant(p: float, q: float) -> float:
    return (q / (q - p)) ** (1.0 / p)
