"""Fixed-seed random corpus of compactly supported test functions.

A corpus item is a list of components (indicators, truncated logarithms,
smooth bumps); it is a formula, so the same item can be sampled on grids of
different resolution.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lattice import Grid, GridFunction, build_grid_function

CORPUS_VERSION = 1
KINDS = ("indicator", "log", "bump")


@dataclass(frozen=True)
class Component:
    kind: str
    center: float
    radius: float
    scale: float

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        d = np.abs(x - self.center)
        inside = d < self.radius
        if self.kind == "indicator":
            return np.where(inside, self.scale, 0.0)
        if self.kind == "log":
            with np.errstate(divide="ignore"):
                v = np.log(self.radius / np.maximum(d, 1e-300))
            return np.where(inside, self.scale * v, 0.0)
        if self.kind == "bump":
            s = self.radius / 3.0
            return np.where(inside, self.scale * np.exp(-0.5 * (d / s) ** 2), 0.0)
        raise ValueError(f"unknown component kind {self.kind!r}")


@dataclass(frozen=True)
class Item:
    components: tuple

    def __call__(self, x):
        out = np.zeros(np.shape(x))
        for c in self.components:
            out = out + c(x)
        return out

    def sample(self, grid: Grid) -> GridFunction:
        return build_grid_function(grid, self)

    def describe(self) -> list:
        return [(c.kind, c.center, c.radius, c.scale) for c in self.components]


def random_item(rng: np.random.Generator, reach: float = 1.0, max_parts: int = 3,
                signed: bool = False, kinds=KINDS) -> Item:
    """One random item supported in ``[-reach, reach]``."""
    parts = []
    for _ in range(int(rng.integers(1, max_parts + 1))):
        kind = kinds[int(rng.integers(len(kinds)))]
        radius = reach * rng.uniform(0.05, 0.5)
        center = rng.uniform(-reach + radius, reach - radius)
        scale = rng.uniform(0.2, 2.0)
        if signed and rng.random() < 0.5:
            scale = -scale
        parts.append(Component(kind, float(center), float(radius), float(scale)))
    return Item(tuple(parts))


def random_corpus(n: int, seed: int, reach: float = 1.0, **kw) -> list[Item]:
    rng = np.random.default_rng(seed)
    return [random_item(rng, reach, **kw) for _ in range(n)]


def log_symbol(x):
    """``log|1 + x|``, the canonical unbounded BMO symbol."""
    return np.log(np.abs(1.0 + np.asarray(x, dtype=float)))


def random_symbol(rng: np.random.Generator, reach: float = 1.0):
    """A smooth bounded symbol: a short random trigonometric sum."""
    freqs = rng.uniform(0.2, 3.0, size=3) / reach
    phases = rng.uniform(0, 2 * np.pi, size=3)
    amps = rng.uniform(0.2, 1.0, size=3)

    def b(x):
        x = np.asarray(x, dtype=float)
        return sum(a * np.sin(w * x + p) for a, w, p in zip(amps, freqs, phases))

    return b
