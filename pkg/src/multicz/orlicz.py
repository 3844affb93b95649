"""The Young functions Phi^(k), Phi(t) = t (1 + log+ t), and Luxemburg norms."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lattice import Cube, GridFunction, _check_cube

REL_TOL = 1e-12
MAX_BISECTIONS = 200


def phi(t, k: int = 1):
    """k-fold composition of Phi, vectorized. ``k = 0`` is the identity."""
    t = np.asarray(t, dtype=float)
    for _ in range(k):
        t = t * (1.0 + np.log(np.maximum(t, 1.0)))
    return t


def phi_eval(k: int, t):
    if k < 0:
        raise ValueError("order must be nonnegative")
    a = np.asarray(t, dtype=float)
    if np.any(a < 0):
        raise ValueError("Phi is defined on [0, inf)")
    out = phi(a, k)
    return float(out) if out.ndim == 0 else out


def phi_inverse(k: int, y):
    """Inverse of Phi^(k) by bisection, relative accuracy ~1e-12."""
    if k < 0:
        raise ValueError("order must be nonnegative")
    y = np.asarray(y, dtype=float)
    if np.any(y < 0):
        raise ValueError("Phi^(k) maps onto [0, inf)")
    if k == 0:
        return float(y) if y.ndim == 0 else y.copy()
    # Phi^(k)(t) = t on [0, 1] and Phi^(k)(t) >= t, so the root is in [1, y]
    lo = np.where(y > 1, 1.0, y)
    hi = np.where(y > 1, y, y)
    for _ in range(MAX_BISECTIONS):
        if np.all(hi - lo <= REL_TOL * lo):
            break
        mid = np.sqrt(lo * hi) if np.any(hi > 1e3 * lo) else 0.5 * (lo + hi)
        above = phi(mid, k) > y
        hi = np.where(above, mid, hi)
        lo = np.where(above, lo, mid)
    out = 0.5 * (lo + hi)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class YoungFunction:
    order: int = 1

    def __post_init__(self):
        if self.order < 0:
            raise ValueError("order must be nonnegative")

    def __call__(self, t):
        return phi_eval(self.order, t)

    def inverse(self, y):
        return phi_inverse(self.order, y)


def luxemburg_batch(absvals: np.ndarray, entry_cube: np.ndarray, counts: np.ndarray,
                    k: int = 1) -> np.ndarray:
    """Luxemburg norms of many cubes at once.

    ``absvals[e]`` is the (nonnegative) sample of entry ``e``, which lies in
    cube ``entry_cube[e]``; ``counts[c]`` is the number of nodes of cube
    ``c`` (zeros need not be listed since Phi(0) = 0; fractional counts
    describe cubes not aligned to cells). Geometric bisection
    on lambda between avg|f| and avg|f| + avg Phi^(k)(|f|) + 1.
    """
    n = counts.size
    counts = counts.astype(float)
    avg = np.bincount(entry_cube, absvals, minlength=n) / counts
    out = np.zeros(n)
    live = avg > 0
    if not live.any():
        return out
    if k == 0:
        return avg
    lo = avg.copy()
    hi = avg + np.bincount(entry_cube, phi(absvals, k), minlength=n) / counts + 1.0
    lo[~live] = hi[~live] = 1.0
    for _ in range(MAX_BISECTIONS):
        if np.all(hi[live] <= lo[live] * (1 + REL_TOL)):
            break
        mid = np.sqrt(lo * hi)
        mean_phi = np.bincount(entry_cube, phi(absvals / mid[entry_cube], k), minlength=n) / counts
        ok = mean_phi <= 1.0
        hi = np.where(ok, mid, hi)
        lo = np.where(ok, lo, mid)
    out[live] = hi[live]
    return out


def _cube_samples(f: GridFunction, Q: Cube) -> tuple[np.ndarray, int]:
    i0, i1 = _check_cube(f.grid, Q)
    idx, val = f.support()
    sel = (idx >= i0) & (idx < i1)
    return np.abs(val[sel]), i1 - i0


def luxemburg_norm(f: GridFunction, Q: Cube, k: int = 1) -> float:
    """``inf{lam > 0 : avg_Q Phi^(k)(|f| / lam) <= 1}``; 0 when f vanishes on Q."""
    a, _ = _cube_samples(f, Q)
    cells = np.array([Q.length / f.grid.h])
    return float(luxemburg_batch(a, np.zeros(a.size, dtype=np.int64), cells, k)[0])


def mean_phi(f: GridFunction, Q: Cube, k: int = 1) -> float:
    """``(1/|Q|) * integral over Q of Phi^(k)(|f|)``."""
    a, _ = _cube_samples(f, Q)
    return float(phi(a, k).sum() * f.grid.h / Q.length)


def luxemburg_equiv_functional(f: GridFunction, Q: Cube, k: int = 1,
                               points: int = 1201) -> float:
    """``min over mu of mu + mu * avg_Q Phi^(k)(|f| / mu)`` on a geometric grid.

    The grid spans three decades either side of the Luxemburg norm and
    contains the norm itself.
    """
    norm = luxemburg_norm(f, Q, k)
    if norm == 0:
        return 0.0
    a, _ = _cube_samples(f, Q)
    frac = f.grid.h / Q.length
    mu = np.concatenate([norm * np.geomspace(1e-3, 1e3, points), [norm]])
    vals = mu + mu * frac * phi(a[None, :] / mu[:, None], k).sum(axis=1)
    return float(vals.min())
