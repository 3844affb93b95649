"""m-linear Calderon-Zygmund kernels and their discretized operators (n = 1).

The operator is evaluated by a product midpoint rule over the source nodes.
The evaluation point is staggered: T at node x_i is the mean of the sums
taken at x_i - h/2 and x_i + h/2, so no sampled tuple sits on the diagonal
and, for odd kernels, the two halves cancel the singular cell exactly as a
principal value would.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from numpy.lib.stride_tricks import as_strided

from .lattice import GridFunction

# dense offset tables are used up to this many entries
TABLE_LIMIT = 2 ** 23
# entries per block in the direct summation
BLOCK = 2 ** 22


@dataclass(frozen=True)
class MKernel:
    """Kernel K(x, y_1, ..., y_m) with claimed size/smoothness constants.

    ``eval`` must broadcast over its arguments. ``profile``, if given, is the
    same kernel written in the differences ``x - y_j``; it enables the fast
    offset-table summation.
    """

    m: int
    eval: Callable
    size_constant: float
    smoothness_exponent: float = 1.0
    profile: Optional[Callable] = None
    name: str = "kernel"

    def __call__(self, x, *ys):
        if len(ys) != self.m:
            raise ValueError(f"{self.name} takes {self.m} source points")
        return self.eval(x, *ys)

    def scaled(self, c: float) -> "MKernel":
        prof = None if self.profile is None else (lambda *u: c * self.profile(*u))
        return MKernel(self.m, lambda x, *ys: c * self.eval(x, *ys),
                       abs(c) * self.size_constant, self.smoothness_exponent,
                       prof, f"{c}*{self.name}")


def _riesz_profile(u, v):
    return u / (u * u + v * v) ** 1.5


def riesz_bilinear_kernel() -> MKernel:
    """``(x - y1) / ((x - y1)^2 + (x - y2)^2)^(3/2)``, homogeneous of degree -2."""
    return MKernel(
        m=2,
        eval=lambda x, y1, y2: _riesz_profile(x - y1, x - y2),
        size_constant=750.0,
        smoothness_exponent=1.0,
        profile=_riesz_profile,
        name="riesz_bilinear",
    )


def hilbert_kernel() -> MKernel:
    """``1 / (x - y)``."""
    return MKernel(
        m=1,
        eval=lambda x, y: 1.0 / (x - y),
        size_constant=8.0,
        smoothness_exponent=1.0,
        profile=lambda u: 1.0 / u,
        name="hilbert",
    )


def pair_distance_sum(config: np.ndarray) -> np.ndarray:
    """``sum over ordered pairs (k, l) of |y_k - y_l|`` for each row."""
    d = np.abs(config[:, :, None] - config[:, None, :])
    return d.sum(axis=(1, 2))


def random_probes(m: int, n: int, seed: int = 0) -> np.ndarray:
    """Random configurations (y_0, ..., y_m) in [-1, 1]^(m+1)."""
    return np.random.default_rng(seed).uniform(-1.0, 1.0, size=(n, m + 1))


def scan_probes(m: int, n: int) -> np.ndarray:
    """Deterministic probes covering configurations up to translation and scale.

    Both kernel conditions are invariant under translating and dilating the
    configuration, so for m = 2 it suffices to put y_0 = 0 and (y_1, y_2)
    on the unit circle.
    """
    if m == 1:
        return np.array([[0.0, 1.0], [0.0, -1.0]])
    if m == 2:
        th = np.linspace(0.0, 2 * np.pi, n, endpoint=False)
        return np.stack([np.zeros(n), np.cos(th), np.sin(th)], axis=1)
    raise ValueError("scan probes are provided for m <= 2 only")


@dataclass
class SizeReport:
    estimate: float
    skipped: int


def kernel_size_check(K: MKernel, probes: np.ndarray) -> SizeReport:
    """Lower estimate of A in ``|K| <= A / (sum |y_k - y_l|)^m``."""
    probes = np.asarray(probes, dtype=float)
    s = pair_distance_sum(probes)
    diag = s == 0
    p = probes[~diag]
    vals = np.abs(K(p[:, 0], *p[:, 1:].T)) * s[~diag] ** K.m
    return SizeReport(float(vals.max(initial=0.0)), int(diag.sum()))


@dataclass
class SmoothnessReport:
    max_ratio: float
    per_slot: list
    skipped: int


def kernel_smoothness_check(K: MKernel, probes: np.ndarray, eps: Optional[float] = None,
                            displacements: Optional[np.ndarray] = None,
                            seed: int = 0, fractions=None) -> SmoothnessReport:
    """Largest ratio ``|K(y) - K(y')| (sum|y_k - y_l|)^(m+eps) / |y_j - y_j'|^eps``.

    Each slot j = 0..m is moved separately by ``displacements[:, j]``; by
    default the displacement is random within the admissible range
    ``|y_j - y_j'| <= max_k |y_j - y_k| / 2``. With ``fractions`` every
    probe is moved by each ``t * max_k |y_j - y_k|`` instead. Inadmissible
    moves and diagonal probes are skipped.
    """
    eps = K.smoothness_exponent if eps is None else eps
    probes = np.asarray(probes, dtype=float)
    if fractions is not None:
        spread = np.abs(probes[:, :, None] - probes[:, None, :]).max(axis=2)
        reports = [kernel_smoothness_check(K, probes, eps, t * spread) for t in fractions]
        per_slot = list(np.max([r.per_slot for r in reports], axis=0))
        return SmoothnessReport(max(per_slot), per_slot, sum(r.skipped for r in reports))
    n, width = probes.shape
    spread = np.abs(probes[:, :, None] - probes[:, None, :]).max(axis=2)
    if displacements is None:
        rng = np.random.default_rng(seed)
        displacements = rng.uniform(-0.5, 0.5, size=(n, width)) * spread
    displacements = np.asarray(displacements, dtype=float)
    s = pair_distance_sum(probes)
    base = K(probes[:, 0], *probes[:, 1:].T)
    per_slot, skipped = [], 0
    for j in range(width):
        step = displacements[:, j]
        ok = (np.abs(step) <= 0.5 * spread[:, j] * (1 + 1e-12)) & (s > 0)
        skipped += int((~ok).sum())
        moved = probes.copy()
        moved[:, j] += step
        new = K(moved[:, 0], *moved[:, 1:].T)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.abs(new - base) * s ** (K.m + eps) / np.abs(step) ** eps
        ratio = np.where(ok & (step != 0), ratio, 0.0)
        per_slot.append(float(ratio.max(initial=0.0)))
    return SmoothnessReport(max(per_slot), per_slot, skipped)


def _ranges(f_vec):
    out = []
    for f in f_vec:
        idx, _ = f.support()
        if idx.size == 0:
            return None
        out.append((int(idx[0]), int(idx[-1]) + 1))
    return out


def _check_finite(block, where):
    if not np.all(np.isfinite(block)):
        bad = np.argwhere(~np.isfinite(block))[0]
        raise ValueError(f"kernel is not finite at sampled tuple {where(bad)}")


def _apply_table(K, f_vec, ranges, factors):
    grid = f_vec[0].grid
    n, h, m = grid.n_points, grid.h, K.m
    sizes = [e - a for a, e in ranges]
    axes = [np.arange(-(e - 1), n - a) for a, e in ranges]
    if m == 1:
        d = axes[0] * h
        tab = 0.5 * (K.profile(d + h / 2) + K.profile(d - h / 2))
    else:
        d1, d2 = np.meshgrid(axes[0] * h, axes[1] * h, indexing="ij", sparse=True)
        tab = 0.5 * (K.profile(d1 + h / 2, d2 + h / 2) + K.profile(d1 - h / 2, d2 - h / 2))

    def where(bad):
        return ("x-y", tuple(float(axes[j][bad[j]]) for j in range(m)))

    _check_finite(tab, where)
    # g_j[r] = f_j(y) h at y = e_j - 1 - r, matching row r of the table window
    g = [np.asarray(f.values[a:e] * h)[::-1] for f, (a, e) in zip(f_vec, ranges)]
    st = tab.strides
    view = as_strided(tab, shape=(n, *sizes), strides=(sum(st), *st), writeable=False)
    if factors is None:
        if m == 1:
            return view @ g[0]
        return np.einsum("r,irc,c->i", g[0], view, g[1], optimize=False)
    # kernel multiplied by prod_j (b_j(x_i) - b_j(y_j))
    u = []
    for b, gj, (a, e) in zip(factors, g, ranges):
        by = b[a:e][::-1]
        u.append(gj[None, :] * (b[:, None] - by[None, :]))
    if m == 1:
        return np.einsum("ir,ir->i", view, u[0], optimize=False)
    return np.einsum("ir,irc,ic->i", u[0], view, u[1], optimize=False)


def _apply_direct(K, f_vec, ranges, factors):
    grid = f_vec[0].grid
    n, h, m = grid.n_points, grid.h, K.m
    x_all = grid.nodes
    ys = [x_all[a:e] for a, e in ranges]
    ws = [np.asarray(f.values[a:e]) * h for f, (a, e) in zip(f_vec, ranges)]
    inner = int(np.prod([e - a for a, e in ranges]))
    chunk = max(1, BLOCK // inner)
    out = np.empty(n)

    def shaped(arr, j):
        shape = [1] * (m + 1)
        shape[j] = arr.size
        return arr.reshape(shape)

    y_b = [shaped(y, j + 1) for j, y in enumerate(ys)]
    for i0 in range(0, n, chunk):
        i1 = min(n, i0 + chunk)
        x = shaped(x_all[i0:i1], 0)
        block = 0.5 * (K(x - h / 2, *y_b) + K(x + h / 2, *y_b))
        if not np.all(np.isfinite(block)):
            bad = np.argwhere(~np.isfinite(block))[0]
            tup = (float(x_all[i0 + bad[0]]),) + tuple(float(ys[j][bad[j + 1]]) for j in range(m))
            raise ValueError(f"kernel is not finite at sampled tuple {tup}")
        if factors is not None:
            for j, (b, (a, e)) in enumerate(zip(factors, ranges)):
                block = block * (shaped(b[i0:i1], 0) - shaped(b[a:e], j + 1))
        for w in reversed(ws):
            block = block @ w
        out[i0:i1] = block
    return out


def _apply(K: MKernel, f_vec: Sequence[GridFunction], factors=None,
           method: str = "auto") -> GridFunction:
    if len(f_vec) != K.m:
        raise ValueError(f"{K.name} is {K.m}-linear, got {len(f_vec)} functions")
    grid = f_vec[0].grid
    for f in f_vec:
        if f.grid != grid:
            raise ValueError("functions live on different grids")
    ranges = _ranges(f_vec)
    if ranges is None:
        return GridFunction(grid, np.zeros(grid.n_points))
    if factors is not None:
        factors = [np.asarray(b.values, dtype=float) for b in factors]
    n = grid.n_points
    table_size = int(np.prod([n + e - a for a, e in ranges]))
    inner = int(np.prod([e - a for a, e in ranges]))
    if method == "auto":
        use_table = (K.profile is not None and K.m in (1, 2)
                     and table_size <= TABLE_LIMIT and inner >= 256)
        method = "table" if use_table else "direct"
    if method == "table":
        if K.profile is None or K.m not in (1, 2):
            raise ValueError("table summation needs a translation-invariant kernel with m <= 2")
        out = _apply_table(K, f_vec, ranges, factors)
    elif method == "direct":
        out = _apply_direct(K, f_vec, ranges, factors)
    else:
        raise ValueError(f"unknown method {method!r}")
    return GridFunction(grid, out)


def apply_operator(K: MKernel, f_vec: Sequence[GridFunction], method: str = "auto") -> GridFunction:
    """``T(f_1, ..., f_m)`` at every node by staggered product midpoint rule."""
    return _apply(K, f_vec, None, method)
