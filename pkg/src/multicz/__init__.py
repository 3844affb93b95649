"""Numerical experiments with multilinear Calderon-Zygmund operators, their
commutators with BMO symbols, and L(log L) maximal functions on the line."""

from .lattice import (Cube, CubeFamily, CubeValues, Grid, GridFunction, build_grid_function,
                      indicator, superlevel_measure)
from .orlicz import YoungFunction, luxemburg_norm, phi_eval, phi_inverse
from .weights import ExponentVector, WeightVector, ap_constant, multi_ap_constant, nu_weight
from .maximal import SymbolTuple, bmo_norm, hardy_littlewood, m_llogl
from .czop import MKernel, apply_operator, hilbert_kernel, riesz_bilinear_kernel
from .commutator import iterated_commutator, sum_commutator
from .endpoint import ExperimentReport, run_suite

__version__ = "0.1.0"

__all__ = [
    "Cube", "CubeFamily", "CubeValues", "Grid", "GridFunction", "build_grid_function",
    "indicator", "superlevel_measure", "YoungFunction", "luxemburg_norm", "phi_eval",
    "phi_inverse", "ExponentVector", "WeightVector", "ap_constant", "multi_ap_constant",
    "nu_weight", "SymbolTuple", "bmo_norm", "hardy_littlewood", "m_llogl", "MKernel",
    "apply_operator", "hilbert_kernel", "riesz_bilinear_kernel", "iterated_commutator",
    "sum_commutator", "ExperimentReport", "run_suite",
]
