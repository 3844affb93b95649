"""Endpoint, strong-type and sharpness experiments, and the CSV suite runner.

Every experiment returns an ``ExperimentReport``: a series of
(abscissa, value) pairs plus summary statistics and enough provenance
(grid, family, seeds) to rerun it bit for bit.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .commutator import iterated_commutator
from .czop import MKernel, apply_operator
from .lattice import CubeFamily, GridFunction, distribution_function, weighted_lp_norm
from .maximal import (SymbolTuple, m_llogl, m_llogl_cubes, maximal_delta,
                      sharp_maximal_delta)
from .orlicz import phi
from .weights import ExponentVector, WeightVector, nu_weight

# a denominator this small relative to the numerator counts as zero
DEGENERATE_RTOL = 1e-12


@dataclass
class ExperimentReport:
    experiment: str
    params: list
    series: list
    summary: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)
    flags: list = field(default_factory=list)

    def __post_init__(self):
        if not self.series:
            raise ValueError("a report needs a nonempty series")
        if not all(math.isfinite(a) and math.isfinite(v) for a, v in self.series):
            raise ValueError("series values must be finite")

    @property
    def abscissae(self) -> np.ndarray:
        return np.array([a for a, _ in self.series])

    @property
    def values(self) -> np.ndarray:
        return np.array([v for _, v in self.series])


def _provenance(grid, family=None, **extra) -> dict:
    out = {"grid": [grid.center, grid.half_width, grid.n_points]}
    if family is not None:
        out["family"] = family.kind
    out.update(extra)
    return out


def log_fit(lam, values) -> dict:
    """Least squares ``value = a log(1/lam) + b``, with R^2."""
    z = np.log(1.0 / np.asarray(lam, dtype=float))
    v = np.asarray(values, dtype=float)
    a, b = np.polyfit(z, v, 1)
    resid = v - (a * z + b)
    ss = float(np.sum((v - v.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss if ss > 0 else 0.0
    return {"slope": float(a), "intercept": float(b), "r2": r2}


def refinement_ratio(coarse: ExperimentReport, fine: ExperimentReport, metric: str = "max") -> float:
    """``max(a, b) / min(a, b)`` of a summary metric across two runs (1 when both vanish)."""
    a, b = coarse.summary[metric], fine.summary[metric]
    if a == b:
        return 1.0
    lo, hi = min(a, b), max(a, b)
    return hi / lo if lo > 0 else math.inf


def _orlicz_integral(f: GridFunction, t: float, k: int, w: Optional[GridFunction]) -> float:
    """``integral of Phi^(k)(|f| / t) w``."""
    idx, val = f.support()
    a = phi(np.abs(val) / t, k)
    if w is not None:
        a = a * w.values[idx]
    return float(a.sum() * f.grid.h)


def _weights(w: Optional[WeightVector], m: int):
    if w is None:
        return [None] * m, None
    if w.m != m:
        raise ValueError("dimension mismatch between weights and functions")
    return list(w.weights), w.nu


def _ratio_series(t_grid, lhs, rhs):
    series, flags = [], []
    for t, a, b in zip(t_grid, lhs, rhs):
        if b > 0:
            series.append((float(t), float(a / b)))
        elif a > 0:
            flags.append(f"degenerate t={t!r}: zero right-hand side")
        else:
            series.append((float(t), 0.0))
    return series, flags


def _endpoint_summary(series) -> dict:
    v = np.array([s[1] for s in series]) if series else np.zeros(1)
    pos = v[v > 0]
    return {"max": float(v.max()),
            "median_positive": float(np.median(pos)) if pos.size else 0.0,
            "max_over_median": float(pos.max() / np.median(pos)) if pos.size else 0.0,
            "n_positive": int(pos.size)}


def _endpoint_report(name, f_vec, lhs_of, t_grid, w, order, extra_params, provenance):
    m = len(f_vec)
    order = m if order is None else order
    ws, _ = _weights(w, m)
    t_grid = np.asarray(t_grid, dtype=float)
    if np.any(t_grid <= 0):
        raise ValueError("t must be positive")
    lhs = [lhs_of(t ** m) for t in t_grid]
    rhs = [float(np.prod([_orlicz_integral(f, t, order, wj) for f, wj in zip(f_vec, ws)]))
           ** (1.0 / m) for t in t_grid]
    series, flags = _ratio_series(t_grid, lhs, rhs)
    if not series:
        raise ValueError("every datapoint is degenerate")
    params = [("m", m), ("order", order)] + extra_params
    return ExperimentReport(name, params, series, _endpoint_summary(series), provenance, flags)


def endpoint_functional_maximal(f_vec: Sequence[GridFunction], w: Optional[WeightVector],
                                t_grid, cubes: CubeFamily, order: Optional[int] = None,
                                k: int = 1) -> ExperimentReport:
    """Ratios ``nu({M_{L log L} f > t^m}) / prod (int Phi^(order)(|f_j| / t) w_j)^(1/m)``.

    ``w=None`` means every weight is identically one. The maximal function
    is never sampled on the grid: its superlevel sets are unions of cubes.
    """
    _, nu = _weights(w, len(f_vec))
    cv = m_llogl_cubes(f_vec, cubes, k)
    return _endpoint_report("endpoint_maximal", f_vec, lambda s: cv.superlevel_measure(s, nu),
                            t_grid, w, order, [("k", k)], _provenance(cubes.grid, cubes))


def endpoint_functional_commutator(K: MKernel, b: SymbolTuple, f_vec: Sequence[GridFunction],
                                   w: Optional[WeightVector], t_grid, order: Optional[int] = None,
                                   route: str = "kernel") -> ExperimentReport:
    """Same ratio with ``|T_{Pi b} f|`` in place of the maximal function."""
    _, nu = _weights(w, len(f_vec))
    T = abs(iterated_commutator(K, b, f_vec, route=route))
    t_grid = np.asarray(t_grid, dtype=float)
    dist = distribution_function(T, t_grid ** len(f_vec), nu)
    table = dict(zip((t_grid ** len(f_vec)).tolist(), dist.tolist()))
    return _endpoint_report("endpoint_commutator", f_vec, lambda s: table[s], t_grid, w, order,
                            [("kernel", K.name), ("route", route)],
                            _provenance(b.cubes.grid, b.cubes))


def _sharpness_report(name, f_vec, measure_at, lam_grid, k, power, params, provenance):
    """Running sup over ``lam' >= lam`` of
    ``|{g > mu}|^m / (int Phi^(k)(|f_1| / mu) prod_{j>=2} int Phi^(k)(|f_j|))``
    with ``mu = lam^power``."""
    m = len(f_vec)
    lam = np.sort(np.asarray(lam_grid, dtype=float))
    if np.any(lam <= 0):
        raise ValueError("lambda must be positive")
    rest = float(np.prod([_orlicz_integral(f, 1.0, k, None) for f in f_vec[1:]]))
    raw = []
    for mu in lam ** power:
        den = _orlicz_integral(f_vec[0], mu, k, None) * rest
        if den <= 0:
            raise ValueError("zero right-hand side")
        raw.append(measure_at(mu) ** m / den)
    run = np.maximum.accumulate(np.array(raw)[::-1])[::-1]
    fit = log_fit(lam, run)
    raw_fit = log_fit(lam, raw)
    summary = {"max": float(run.max()), "slope": fit["slope"], "intercept": fit["intercept"],
               "r2": fit["r2"], "raw_slope": raw_fit["slope"], "raw_r2": raw_fit["r2"]}
    series = [(float(a), float(v)) for a, v in zip(lam, run)]
    return ExperimentReport(name, [("m", m), ("k", k)] + params, series, summary, provenance)


def maximal_sharpness(f_vec: Sequence[GridFunction], cubes: CubeFamily, lam_grid,
                      k: Optional[int] = None) -> ExperimentReport:
    """Sharpness functional for ``M_{L log L}`` at threshold ``lam^m``.

    With ``k = m - 1`` it grows like log(1/lam) for indicator data; with
    ``k = m`` it stays bounded.
    """
    m = len(f_vec)
    k = m - 1 if k is None else k
    cv = m_llogl_cubes(f_vec, cubes, 1)
    return _sharpness_report("sharpness_maximal", f_vec, cv.superlevel_measure, lam_grid, k, m,
                             [], _provenance(cubes.grid, cubes))


def commutator_sharpness(K: MKernel, b: SymbolTuple, f_vec: Sequence[GridFunction], lam_grid,
                         k: Optional[int] = None, route: str = "kernel") -> ExperimentReport:
    """Sharpness functional for ``|T_{Pi b} f|`` at threshold ``lam``."""
    m = len(f_vec)
    k = m - 1 if k is None else k
    T = abs(iterated_commutator(K, b, f_vec, route=route))
    lam = np.sort(np.asarray(lam_grid, dtype=float))
    table = dict(zip(lam.tolist(), distribution_function(T, lam).tolist()))
    return _sharpness_report("sharpness_commutator", f_vec, lambda mu: table[mu], lam, k, 1,
                             [("kernel", K.name), ("route", route)],
                             _provenance(b.cubes.grid, b.cubes))


def strong_bound_ratio(K: MKernel, b: SymbolTuple, f_vec: Sequence[GridFunction],
                       w: Optional[WeightVector], P: ExponentVector,
                       route: str = "expansion") -> ExperimentReport:
    """Strong-type ratios for the iterated commutator.

    ``product``: ``||T_{Pi b} f||_{L^p(nu)} / (prod ||b_j||_BMO prod ||f_j||_{L^{p_j}(w_j)})``;
    ``maximal``: ``||T_{Pi b} f||_{L^p(nu)} / (prod ||b_j||_BMO ||M_{L log L} f||_{L^p(nu)})``.
    """
    if any(p <= 1 for p in P.p_vec):
        raise ValueError("every p_j must exceed 1")
    if P.m != len(f_vec):
        raise ValueError("dimension mismatch between exponents and functions")
    grid = f_vec[0].grid
    if w is None:
        ws = [None] * P.m
        nu = None
    else:
        ws = list(w.weights)
        nu = nu_weight(ws, P)
    p = P.p
    T = iterated_commutator(K, b, f_vec, route=route)
    num = weighted_lp_norm(T, p, nu)
    norms = b.norm_product
    fprod = float(np.prod([weighted_lp_norm(f, float(pj), wj)
                           for f, pj, wj in zip(f_vec, P.p_vec, ws)]))
    mnorm = weighted_lp_norm(m_llogl(f_vec, b.cubes), p, nu)
    flags = []
    ratios = []
    for name, den in (("product", norms * fprod), ("maximal", norms * mnorm)):
        if den > 0:
            ratios.append(num / den)
        else:
            ratios.append(0.0)
            flags.append(f"degenerate {name}: zero denominator")
    summary = {"product": ratios[0], "maximal": ratios[1], "numerator": num,
               "max": max(ratios), "degenerate": bool(flags)}
    params = [("p_vec", [str(q) for q in P.p_vec]), ("kernel", K.name), ("route", route)]
    return ExperimentReport("strong_bound", params, [(0.0, ratios[0]), (1.0, ratios[1])],
                            summary, _provenance(grid, b.cubes), flags)


def pointwise_sharp_ratio(K: MKernel, b: SymbolTuple, f_vec: Sequence[GridFunction],
                          delta: float, eps: float, route: str = "expansion") -> ExperimentReport:
    """Node-wise ``M#_delta(T_{Pi b} f) / (prod ||b_j|| (M_{L log L} f + M_eps(T f)))``."""
    m = len(f_vec)
    if not (0 < delta < eps and delta < 1.0 / m):
        raise ValueError("need 0 < delta < eps and delta < 1/m")
    cubes = b.cubes
    Tb = iterated_commutator(K, b, f_vec, route=route)
    num = sharp_maximal_delta(Tb, delta, cubes).values
    den = b.norm_product * (m_llogl(f_vec, cubes).values
                            + maximal_delta(apply_operator(K, f_vec), eps, cubes).values)
    flags = []
    bad = (den <= 0) & (num > 0)
    if bad.any():
        flags.append(f"degenerate at {int(bad.sum())} nodes: zero denominator")
    ratio = np.where(den > 0, num / np.where(den > 0, den, 1.0), 0.0)
    x = cubes.grid.nodes
    series = [(float(a), float(v)) for a, v in zip(x, ratio)]
    params = [("m", m), ("delta", delta), ("eps", eps), ("kernel", K.name), ("route", route)]
    return ExperimentReport("pointwise_sharp", params, series, {"max": float(ratio.max())},
                            _provenance(cubes.grid, cubes), flags)


def _weak_sup(values: np.ndarray, weights: np.ndarray, p: float) -> float:
    """``sup_lam lam^p * W({v > lam})`` evaluated exactly at the left limits."""
    order = np.argsort(-values, kind="stable")
    v, cw = values[order], np.cumsum(weights[order])
    keep = v > 0
    if not keep.any():
        return 0.0
    # weight of {values >= v_i}; ties share the largest cumulative weight
    last = np.searchsorted(-v, -v, side="right") - 1
    return float(np.max((v ** p * cw[last])[keep]))


def fefferman_stein_ratio(g: GridFunction, delta: float, p: float, w: Optional[GridFunction],
                          mode: str, cubes: CubeFamily) -> ExperimentReport:
    """Ratio of ``M_delta g`` to ``M#_delta g`` in ``L^p(w)`` (strong) or ``L^{p,inf}(w)`` (weak)."""
    if not p > 0:
        raise ValueError("p must be positive")
    if mode not in ("strong", "weak"):
        raise ValueError(f"unknown mode {mode!r}")
    if w is not None and np.any(w.values <= 0):
        raise ValueError("weight must be positive")
    big = maximal_delta(g, delta, cubes).values
    sharp = sharp_maximal_delta(g, delta, cubes).values
    wv = np.ones(big.size) if w is None else w.values
    h = cubes.grid.h
    if mode == "strong":
        num, den = float(np.sum(big ** p * wv) * h), float(np.sum(sharp ** p * wv) * h)
    else:
        num, den = _weak_sup(big, wv * h, p), _weak_sup(sharp, wv * h, p)
    flags = []
    # constants leave only rounding noise in the oscillation
    if den > DEGENERATE_RTOL * num:
        ratio = num / den
    else:
        ratio = 0.0
        flags.append("degenerate: sharp maximal function vanishes")
    params = [("delta", delta), ("p", p), ("mode", mode)]
    return ExperimentReport("fefferman_stein", params, [(0.0, ratio)],
                            {"max": ratio, "degenerate": bool(flags)},
                            _provenance(cubes.grid, cubes), flags)


def write_report_csv(report: ExperimentReport, path: str) -> None:
    param_json = json.dumps(dict(report.params), sort_keys=True, default=str)
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["experiment", "param_json", "abscissa", "value"])
        for a, v in report.series:
            out.writerow([report.experiment, param_json, "%.17g" % a, "%.17g" % v])


def write_summary_csv(reports: Sequence[ExperimentReport], path: str) -> None:
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["experiment", "metric", "value"])
        for r in reports:
            for key in sorted(r.summary):
                val = r.summary[key]
                out.writerow([r.experiment, key, "%.17g" % float(val)])


def run_suite(config: dict):
    """Run a configured batch of experiments; see ``multicz.suite``."""
    from .suite import run_suite as _run
    return _run(config)
