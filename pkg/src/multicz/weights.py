"""Weights, the product weight nu, and classical / multiple A_p constants."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

from .lattice import (CubeFamily, Grid, GridFunction, build_grid_function,
                      cube_means, cube_minima)

# refinement growth above this flags a constant as divergent
GROWTH_LIMIT = 2.0


def _as_fraction(p) -> Fraction:
    if isinstance(p, Fraction):
        return p
    if isinstance(p, int):
        return Fraction(p)
    return Fraction(str(p))


@dataclass(frozen=True)
class ExponentVector:
    """``(p_1, ..., p_m)`` with every p_j >= 1, and p from 1/p = sum 1/p_j."""

    p_vec: tuple

    def __post_init__(self):
        fr = tuple(_as_fraction(p) for p in self.p_vec)
        if not fr:
            raise ValueError("need at least one exponent")
        if any(p < 1 for p in fr):
            raise ValueError("exponents must be >= 1")
        object.__setattr__(self, "p_vec", fr)

    @property
    def m(self) -> int:
        return len(self.p_vec)

    @property
    def p_exact(self) -> Fraction:
        return 1 / sum(1 / p for p in self.p_vec)

    @property
    def p(self) -> float:
        return float(self.p_exact)

    def dual(self, j: int) -> Optional[Fraction]:
        """Conjugate exponent p_j' (None stands for p_j = 1, p_j' = inf)."""
        pj = self.p_vec[j]
        return None if pj == 1 else pj / (pj - 1)


def _check_positive(w: GridFunction, name="weight"):
    if np.any(w.values <= 0):
        raise ValueError(f"{name} must be positive at every node")


@dataclass
class WeightVector:
    """``(w_1, ..., w_m)`` with the derived product weight ``nu``."""

    weights: Sequence[GridFunction]
    exponents: ExponentVector
    nu: GridFunction = field(init=False)

    def __post_init__(self):
        self.weights = tuple(self.weights)
        if len(self.weights) != self.exponents.m:
            raise ValueError("one weight per exponent is required")
        self.nu = nu_weight(self.weights, self.exponents)

    @property
    def m(self) -> int:
        return len(self.weights)


def nu_weight(w, P: ExponentVector) -> GridFunction:
    """``prod_j w_j^(p / p_j)``."""
    weights = w.weights if isinstance(w, WeightVector) else tuple(w)
    if len(weights) != P.m:
        raise ValueError("dimension mismatch between weights and exponents")
    p = P.p_exact
    logs = np.zeros(weights[0].grid.n_points)
    for wj, pj in zip(weights, P.p_vec):
        _check_positive(wj)
        logs += float(p / pj) * np.log(wj.values)
    return GridFunction(weights[0].grid, np.exp(logs))


def power_weight(grid: Grid, a: float, x0: float = 0.0) -> GridFunction:
    """``|x - x0|^a`` sampled at the nodes."""
    return build_grid_function(grid, lambda x: np.abs(x - x0) ** a)


def ap_constant(w: GridFunction, p, cubes: CubeFamily) -> float:
    """Largest A_p characteristic over the family cubes."""
    _check_positive(w)
    p = _as_fraction(p)
    if p < 1:
        raise ValueError("p must be >= 1")
    v = w.values
    slots = cubes.all_slots()
    avg = cube_means(v, cubes, slots)
    if p == 1:
        ratio = avg / cube_minima(v, cubes, slots)
    else:
        dual = p / (p - 1)
        inv = cube_means(v ** float(1 - dual), cubes, slots)
        ratio = avg * inv ** float(p - 1)
    return float(ratio.max())


def multi_ap_constant(w: WeightVector, P: ExponentVector, cubes: CubeFamily) -> float:
    """Largest multilinear A_P characteristic over the family cubes.

    The factor of a component with p_j = 1 is ``1 / min_Q w_j``.
    """
    if w.m != P.m:
        raise ValueError("dimension mismatch between weights and exponents")
    slots = cubes.all_slots()
    nu = nu_weight(w.weights, P)
    value = cube_means(nu.values, cubes, slots) ** (1.0 / P.p)
    for j, wj in enumerate(w.weights):
        _check_positive(wj)
        dual = P.dual(j)
        if dual is None:
            value = value / cube_minima(wj.values, cubes, slots)
        else:
            avg = cube_means(wj.values ** float(1 - dual), cubes, slots)
            value = value * avg ** float(1 / dual)
    return float(value.max())


def component_constants(w: WeightVector, P: ExponentVector, cubes: CubeFamily) -> dict:
    """The classical constants whose finiteness characterizes A_P.

    ``w_j^(1 - p_j')`` in A_(m p_j') (or ``w_j^(1/m)`` in A_1 when p_j = 1)
    and ``nu`` in A_(m p).
    """
    m = P.m
    comps = []
    for j, wj in enumerate(w.weights):
        dual = P.dual(j)
        if dual is None:
            comps.append(ap_constant(wj ** (1.0 / m), 1, cubes))
        else:
            comps.append(ap_constant(wj ** float(1 - dual), m * dual, cubes))
    nu_c = ap_constant(nu_weight(w.weights, P), m * P.p_exact, cubes)
    return {"components": comps, "nu": nu_c}


@dataclass
class CharacterizationReport:
    multi_ap: float
    components: list
    nu: float
    multi_finite: bool
    components_finite: bool

    @property
    def agreement(self) -> bool:
        return self.multi_finite == self.components_finite


def characterization_check(w: WeightVector, P: ExponentVector, cubes: CubeFamily,
                           threshold: float,
                           component_thresholds: Optional[Sequence[float]] = None
                           ) -> CharacterizationReport:
    """Compare multi-A_P finiteness with the componentwise conditions.

    On a single grid "finite" means "at most the threshold";
    ``component_thresholds`` lists m + 1 thresholds (the last one for nu)
    and defaults to ``threshold`` for every component.
    """
    multi = multi_ap_constant(w, P, cubes)
    comp = component_constants(w, P, cubes)
    values = comp["components"] + [comp["nu"]]
    limits = list(component_thresholds) if component_thresholds is not None \
        else [threshold] * len(values)
    return CharacterizationReport(
        multi_ap=multi, components=comp["components"], nu=comp["nu"],
        multi_finite=multi <= threshold,
        components_finite=all(v <= t for v, t in zip(values, limits)))


@dataclass
class RefinedCharacterization:
    coarse: CharacterizationReport
    fine: CharacterizationReport

    @staticmethod
    def _finite(a, b):
        return b <= GROWTH_LIMIT * a

    @property
    def multi_finite(self) -> bool:
        return self._finite(self.coarse.multi_ap, self.fine.multi_ap)

    @property
    def components_finite(self) -> bool:
        pairs = list(zip(self.coarse.components + [self.coarse.nu],
                         self.fine.components + [self.fine.nu]))
        return all(self._finite(a, b) for a, b in pairs)

    @property
    def agreement(self) -> bool:
        return self.multi_finite == self.components_finite


def refined_characterization(weight_formulas: Sequence[Callable], P: ExponentVector,
                             grid: Grid, kind: str = "shifted_dyadic") -> RefinedCharacterization:
    """Characterization check on ``grid`` and on its refinement N -> 2N.

    A constant counts as finite when refinement grows it by at most a
    factor of two.
    """
    reports = []
    for g in (grid, grid.refine(2)):
        wv = WeightVector([build_grid_function(g, f) for f in weight_formulas], P)
        reports.append(characterization_check(wv, P, CubeFamily(g, kind), np.inf))
    return RefinedCharacterization(*reports)


def refinement_growth(constant: Callable[[Grid], float], grid: Grid) -> float:
    """Ratio of a grid-dependent constant between ``grid`` and its refinement."""
    return constant(grid.refine(2)) / constant(grid)
