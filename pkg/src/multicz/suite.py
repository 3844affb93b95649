"""Named experiments, the default configuration, and the CSV suite runner."""
from __future__ import annotations

import copy
import operator
import os
from typing import Callable

import numpy as np

from .commutator import iterated_commutator_expansion, iterated_commutator_kernel
from .corpus import CORPUS_VERSION, log_symbol, random_corpus, random_symbol
from .czop import apply_operator, hilbert_kernel, riesz_bilinear_kernel
from .endpoint import (ExperimentReport, commutator_sharpness, endpoint_functional_commutator,
                       endpoint_functional_maximal, fefferman_stein_ratio, maximal_sharpness,
                       pointwise_sharp_ratio, strong_bound_ratio, write_report_csv,
                       write_summary_csv)
from .lattice import (Cube, CubeFamily, Grid, GridFunction, build_grid_function, indicator,
                      lambda_grid)
from .maximal import SymbolTuple, hardy_littlewood
from .orlicz import luxemburg_norm, phi_inverse
from .weights import ExponentVector, WeightVector, power_weight, refined_characterization

FAMILIES = {"dyadic": "dyadic", "shifted": "shifted_dyadic", "shifted_dyadic": "shifted_dyadic",
            "all": "all"}


def _family(name: str) -> str:
    try:
        return FAMILIES[name]
    except KeyError:
        raise ValueError(f"unknown family {name!r}") from None


def kernel_for(m: int):
    if m == 1:
        return hilbert_kernel()
    if m == 2:
        return riesz_bilinear_kernel()
    raise ValueError("built-in kernels exist for m = 1 and m = 2 only")


def _prov(grid, kind, **extra):
    out = {"grid": [grid.center, grid.half_width, grid.n_points], "family": kind}
    out.update(extra)
    return out


def exp_orlicz(n_pairs=200, seed=0, n=1024, window=1.0, **_):
    """Relative error of the indicator closed form over random (A, Q)."""
    grid = Grid(0.0, window, n)
    rng = np.random.default_rng(seed)
    h = grid.h
    errs = []
    for _ in range(n_pairs):
        q0, q1 = np.sort(rng.integers(0, n + 1, size=2))
        if q1 == q0:
            q1 = q0 + 1
        a0 = int(rng.integers(0, n))
        a1 = int(rng.integers(a0 + 1, n + 1))
        A = indicator(grid, grid.left + a0 * h, grid.left + a1 * h)
        Q = Cube(grid.left + q0 * h, (q1 - q0) * h)
        overlap = max(0, min(a1, q1) - max(a0, q0))
        got = luxemburg_norm(A, Q, 1)
        want = 0.0 if overlap == 0 else 1.0 / phi_inverse(1, (q1 - q0) / overlap)
        errs.append(abs(got - want) / want if want else abs(got))
    series = [(float(i), float(e)) for i, e in enumerate(errs)]
    return ExperimentReport("orlicz", [("n_pairs", n_pairs), ("seed", seed)], series,
                            {"max": float(max(errs))}, _prov(grid, "none", seed=seed))


def exp_weak_type(n=1024, window=16.0, center=0.5, **_):
    """``|{M chi_(0,1) > lam}|`` against ``2 / lam - 1`` over lam in (4h, 1)."""
    grid = Grid(center, window, n)
    fam = CubeFamily(grid, "all")
    M = hardy_littlewood(indicator(grid, 0.0, 1.0), fam)
    lam = lambda_grid(4 * grid.h * 1.001, 0.999, 32)
    err = [abs(float(np.count_nonzero(M.values > t)) * grid.h - (2 / t - 1)) for t in lam]
    series = [(float(t), e) for t, e in zip(lam, err)]
    return ExperimentReport("weak_type", [("n", n)], series,
                            {"max": float(max(err)), "max_over_h": float(max(err) / grid.h)},
                            _prov(grid, "all"))


def exp_weights(n=256, window=1.0, family="shifted", exponents=(-7.0, -0.5, 0.0, 0.5, 5.0),
                p_vec=(2, 2), **_):
    """Agreement of multiple-A_P finiteness with the componentwise conditions."""
    grid = Grid(0.0, window, n)
    P = ExponentVector(tuple(p_vec))
    series = []
    for i, a1 in enumerate(exponents):
        for j, a2 in enumerate(exponents):
            rc = refined_characterization(
                [lambda x, a=a1: np.abs(x) ** a, lambda x, a=a2: np.abs(x) ** a], P, grid,
                _family(family))
            series.append((float(i * len(exponents) + j), float(rc.agreement)))
    agree = float(np.mean([v for _, v in series]))
    return ExperimentReport("weights", [("exponents", list(exponents)), ("p_vec", list(p_vec))],
                            series, {"agreement": agree}, _prov(grid, _family(family)))


def _chi_pair(grid):
    f = indicator(grid, 0.0, 1.0)
    return [f, f]


def exp_maximal_endpoint(n=2 ** 16, window=2.0 ** 15, family="shifted", t_lo=1e-3, t_hi=1e3,
                         per_decade=64, **_):
    grid = Grid(0.0, window, n)
    fam = CubeFamily(grid, _family(family))
    return endpoint_functional_maximal(_chi_pair(grid), None, lambda_grid(t_lo, t_hi, per_decade),
                                       fam)


def exp_maximal_sharpness(n=2 ** 26, window=2.0 ** 25, family="shifted", lam_lo=1e-6,
                          lam_hi=1e-1, per_decade=64, **_):
    grid = Grid(0.0, window, n)
    fam = CubeFamily(grid, _family(family))
    return maximal_sharpness(_chi_pair(grid), fam, lambda_grid(lam_lo, lam_hi, per_decade))


def _log_symbols(grid, fam):
    b = build_grid_function(grid, log_symbol)
    return SymbolTuple([b, b], fam)


def exp_commutator_endpoint(n=2 ** 17, window=2.0 ** 14, family="shifted", t_lo=1e-3, t_hi=1e3,
                            per_decade=64, **_):
    grid = Grid(0.0, window, n)
    fam = CubeFamily(grid, _family(family))
    return endpoint_functional_commutator(riesz_bilinear_kernel(), _log_symbols(grid, fam),
                                          _chi_pair(grid), None,
                                          lambda_grid(t_lo, t_hi, per_decade))


def exp_commutator_sharpness(n=2 ** 17, window=2.0 ** 14, family="shifted", lam_lo=1e-6,
                             lam_hi=1e-1, per_decade=64, **_):
    grid = Grid(0.0, window, n)
    fam = CubeFamily(grid, _family(family))
    return commutator_sharpness(riesz_bilinear_kernel(), _log_symbols(grid, fam),
                                _chi_pair(grid), lambda_grid(lam_lo, lam_hi, per_decade))


def _corpus_pairs(grid, n_draws, seed, m=2, reach=2.0):
    items = random_corpus(n_draws * m, seed, reach=reach)
    return [[items[m * d + j].sample(grid) for j in range(m)] for d in range(n_draws)]


def exp_route(n=256, window=4.0, family="shifted", n_draws=50, seed=0, m=2, **_):
    """Relative gap between the kernel and expansion routes over random draws."""
    grid = Grid(0.0, window, n)
    fam = CubeFamily(grid, _family(family))
    K = kernel_for(m)
    rng = np.random.default_rng(seed)
    series = []
    for d, f in enumerate(_corpus_pairs(grid, n_draws, seed, m)):
        b = SymbolTuple([build_grid_function(grid, random_symbol(rng, window / 2))
                         for _ in range(m)], fam)
        a = iterated_commutator_kernel(K, b, f).values
        e = iterated_commutator_expansion(K, b, f).values
        scale = np.abs(a).max()
        series.append((float(d), float(np.abs(a - e).max() / scale) if scale else 0.0))
    return ExperimentReport("route", [("m", m), ("n_draws", n_draws)], series,
                            {"max": max(v for _, v in series)}, _prov(grid, fam.kind, seed=seed))


def exp_pointwise(n=256, window=4.0, family="shifted", n_draws=10, seed=0, delta=0.125,
                  eps=0.25, **_):
    grid = Grid(0.0, window, n)
    fam = CubeFamily(grid, _family(family))
    K = riesz_bilinear_kernel()
    b = _log_symbols(grid, fam)
    series = []
    for d, f in enumerate(_corpus_pairs(grid, n_draws, seed)):
        r = pointwise_sharp_ratio(K, b, f, delta, eps)
        series.append((float(d), r.summary["max"]))
    return ExperimentReport("pointwise", [("delta", delta), ("eps", eps), ("n_draws", n_draws)],
                            series, {"max": max(v for _, v in series)},
                            _prov(grid, fam.kind, seed=seed, corpus=CORPUS_VERSION))


def exp_strong(n=256, window=4.0, family="shifted", n_draws=100, seed=0,
               weight_exponents=(-0.5, 0.0, 0.5), p_vec=(2, 2), **_):
    """Strong-type ratio over corpus draws with power weights |x|^a."""
    grid = Grid(0.0, window, n)
    fam = CubeFamily(grid, _family(family))
    K = riesz_bilinear_kernel()
    P = ExponentVector(tuple(p_vec))
    rng = np.random.default_rng(seed)
    ws = {a: power_weight(grid, a) for a in weight_exponents}
    series = []
    for d, f in enumerate(_corpus_pairs(grid, n_draws, seed)):
        a1, a2 = rng.choice(weight_exponents, size=2)
        b = SymbolTuple([build_grid_function(grid, random_symbol(rng, window / 2))
                         for _ in range(2)], fam)
        r = strong_bound_ratio(K, b, f, WeightVector([ws[a1], ws[a2]], P), P)
        series.append((float(d), r.summary["product"]))
    return ExperimentReport("strong", [("p_vec", list(p_vec)),
                                       ("weight_exponents", list(weight_exponents))],
                            series, {"max": max(v for _, v in series)},
                            _prov(grid, fam.kind, seed=seed, corpus=CORPUS_VERSION))


def exp_fefferman_stein(n=256, window=4.0, family="shifted", n_draws=20, seed=0, delta=0.5,
                        p=1.0, mode="strong", **_):
    grid = Grid(0.0, window, n)
    fam = CubeFamily(grid, _family(family))
    items = random_corpus(n_draws, seed, reach=window / 2)
    series = [(float(d), fefferman_stein_ratio(it.sample(grid), delta, p, None, mode, fam)
               .summary["max"]) for d, it in enumerate(items)]
    return ExperimentReport("fefferman_stein", [("delta", delta), ("p", p), ("mode", mode)],
                            series, {"max": max(v for _, v in series)},
                            _prov(grid, fam.kind, seed=seed, corpus=CORPUS_VERSION))


def exp_operator(n=1024, window=16.0, m=2, **_):
    """``T(chi_(0,1), ..., chi_(0,1))`` at every node."""
    grid = Grid(0.0, window, n)
    K = kernel_for(m)
    T = apply_operator(K, [indicator(grid, 0.0, 1.0)] * m)
    series = [(float(x), float(v)) for x, v in zip(grid.nodes, T.values)]
    return ExperimentReport("operator", [("m", m), ("kernel", K.name)], series,
                            {"max_abs": float(np.abs(T.values).max())}, _prov(grid, "none"))


def exp_trivial(n=256, window=4.0, family="shifted", **_):
    """Endpoint functional of the zero pair: every ratio is 0."""
    grid = Grid(0.0, window, n)
    fam = CubeFamily(grid, _family(family))
    zero = GridFunction.from_support(grid, [], [])
    return endpoint_functional_maximal([zero, zero], None, lambda_grid(1e-3, 1e3, 8), fam)


EXPERIMENTS: dict[str, Callable[..., ExperimentReport]] = {
    "orlicz": exp_orlicz,
    "weak_type": exp_weak_type,
    "weights": exp_weights,
    "route": exp_route,
    "pointwise": exp_pointwise,
    "maximal_endpoint": exp_maximal_endpoint,
    "maximal_sharpness": exp_maximal_sharpness,
    "commutator_endpoint": exp_commutator_endpoint,
    "commutator_sharpness": exp_commutator_sharpness,
    "strong": exp_strong,
    "fefferman_stein": exp_fefferman_stein,
    "operator": exp_operator,
    "trivial": exp_trivial,
}

DEFAULT_CONFIG = {
    "out": "suite_out",
    "experiments": [
        {"id": "orlicz"},
        {"id": "weak_type"},
        {"id": "weights"},
        {"id": "route"},
        {"id": "pointwise"},
        {"id": "maximal_endpoint"},
        {"id": "maximal_sharpness"},
        {"id": "commutator_endpoint"},
        {"id": "commutator_sharpness"},
        {"id": "strong", "params": {"n_draws": 20}},
        {"id": "fefferman_stein"},
    ],
    "assertions": [
        {"experiment": "orlicz", "metric": "max", "op": "<=", "value": 1e-6},
        {"experiment": "weak_type", "metric": "max_over_h", "op": "<=", "value": 4.0},
        {"experiment": "weights", "metric": "agreement", "op": ">=", "value": 1.0},
        {"experiment": "route", "metric": "max", "op": "<=", "value": 1e-10},
        {"experiment": "maximal_endpoint", "metric": "max_over_median", "op": "<", "value": 50.0},
        {"experiment": "maximal_sharpness", "metric": "r2", "op": ">=", "value": 0.9},
        {"experiment": "maximal_sharpness", "metric": "slope", "op": ">", "value": 0.0},
        {"experiment": "commutator_endpoint", "metric": "max_over_median", "op": "<",
         "value": 50.0},
        {"experiment": "commutator_sharpness", "metric": "r2", "op": ">=", "value": 0.9},
        {"experiment": "commutator_sharpness", "metric": "slope", "op": ">", "value": 0.0},
    ],
}

_OPS = {"<": operator.lt, "<=": operator.le, ">": operator.gt, ">=": operator.ge,
        "==": operator.eq}


def apply_overrides(config: dict, **common) -> dict:
    """Copy of ``config`` with common parameters (n, window, family, seed, m) forced."""
    config = copy.deepcopy(config)
    common = {k: v for k, v in common.items() if v is not None}
    for exp in config.get("experiments", []):
        exp.setdefault("params", {}).update(common)
    return config


def run_suite(config: dict) -> tuple[list[ExperimentReport], bool]:
    """Run the configured experiments and write one CSV per report plus summary.csv.

    Returns the reports and whether every assertion holds.
    """
    experiments = config.get("experiments", [])
    for exp in experiments:
        if exp["id"] not in EXPERIMENTS:
            raise ValueError(f"unknown experiment id {exp['id']!r}")
    out = config.get("out", "suite_out")
    os.makedirs(out, exist_ok=True)
    if not os.access(out, os.W_OK):
        raise PermissionError(f"output path {out!r} is not writable")
    reports, names = [], []
    for exp in experiments:
        name = exp.get("name", exp["id"])
        report = EXPERIMENTS[exp["id"]](**exp.get("params", {}))
        report.experiment = name
        write_report_csv(report, os.path.join(out, f"{name}.csv"))
        reports.append(report)
        names.append(name)
    write_summary_csv(reports, os.path.join(out, "summary.csv"))
    by_name = dict(zip(names, reports))
    ok = True
    for a in config.get("assertions", []):
        r = by_name.get(a["experiment"])
        if r is None:
            continue
        if not _OPS[a["op"]](float(r.summary[a["metric"]]), float(a["value"])):
            ok = False
    return reports, ok
