"""Analysis orchestration producing plot-ready JSON documents."""
from __future__ import annotations

import numpy as np

from . import engine, pf, theory
from .config import AnalysisConfig
from .errors import DataError, ShapeMismatch
from .wavelet import ScaleGrid, cwt

ANALYZE_MODES = ("wt", "pf", "both", "direct", "diagonal")


def _surface_doc(surface, spectrum):
    return {
        "T": surface.T,
        "r2": surface.r2,
        "flagged": surface.flagged,
        "scaling_range": list(surface.scaling_range),
        "h_x": spectrum.h_x,
        "h_y": spectrum.h_y,
        "D": spectrum.D,
    }


def _axes(grid):
    return {"p_values": grid.p_values, "q_values": grid.q_values}


def _pf_doc(x, y, grid):
    """Box-counting analysis on the largest dyadic prefix of both measures."""
    x = pf.dyadic_prefix(x)
    y = pf.dyadic_prefix(y)
    n = x.size
    levels = 2 ** np.arange(0, int(np.log2(n)) - 2)
    table = pf.joint_partition_pf(pf.box_measures(x, levels), pf.box_measures(y, levels), grid)
    surface = engine.fit_mass_exponents(table)
    return {
        "box_sizes": table.scales,
        "tau": surface.T,
        "r2": surface.r2,
        "log_chi": table.log_chi,
    }


def _comparison_doc(x, y, grid, cfg):
    x = pf.dyadic_prefix(x)
    y = pf.dyadic_prefix(y)
    n = x.size
    dyadic = ScaleGrid.dyadic(2, int(np.log2(n)) - 3)
    wt_table = engine.joint_partition(cwt(x, dyadic, cfg.kernel), cwt(y, dyadic, cfg.kernel), grid)
    scaled = engine.scaled_partition_for_comparison(wt_table)
    pf_table = pf.joint_partition_pf(pf.box_measures(x, dyadic.scales), pf.box_measures(y, dyadic.scales), grid)
    cmp = pf.compare_wt_pf(scaled, pf_table)
    return {
        "scales": cmp.scales,
        "slope_wt_scaled": cmp.slope_wt,
        "slope_pf": cmp.slope_pf,
        "slope_diff": cmp.diff,
        "max_abs_diff": cmp.max_abs,
        "log_chi_wt_scaled": scaled.log_chi,
        "log_chi_pf": pf_table.log_chi,
    }


def diagonal_doc(spec):
    return {
        "q_values": spec.q_values,
        "h_xy": spec.h_xy,
        "D": spec.D,
        "T": spec.T,
        "h_xy_legendre": spec.h_legendre,
        "D_legendre": spec.D_legendre,
        "r2": spec.r2,
        "width": spec.width,
        "scaling_range": list(spec.scaling_range),
    }


def analyze(x, y, mode="wt", cfg=None):
    """Run one analysis mode on a pair of equal-length series."""
    if mode not in ANALYZE_MODES:
        raise ValueError(f"unknown mode {mode!r}")
    cfg = cfg or AnalysisConfig()
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise ShapeMismatch(f"series lengths differ: {x.size} vs {y.size}")
    grid = cfg.order_grid
    doc = {"mode": mode, "n": int(x.size), "config": cfg.to_dict()}
    if mode in ("pf", "both") and (np.any(x < 0) or np.any(y < 0)):
        raise DataError("box counting needs non-negative measures (use raw measures or volatilities)")
    if mode == "pf":
        doc.update(_axes(grid))
        doc["pf"] = _pf_doc(x, y, grid)
        return doc

    wx = cfg.transform(x)
    wy = cfg.transform(y)
    doc["scales"] = wx.scales
    if mode == "diagonal":
        d = engine.diagonal_analysis(wx, wy, cfg.diag_orders, cfg.scaling_range, cfg.exclude_edges, cfg.floor)
        doc["diagonal"] = diagonal_doc(d)
        doc["warnings"] = d.meta["warnings"]
        return doc

    doc.update(_axes(grid))
    table = engine.joint_partition(wx, wy, grid, cfg.exclude_edges, cfg.floor)
    surface = engine.fit_mass_exponents(table, cfg.scaling_range)
    doc["warnings"] = table.meta["warnings"]
    doc["log_chi"] = table.log_chi
    doc.update(_surface_doc(surface, engine.legendre_spectrum(surface)))
    a, b, c, r2 = engine.plane_fit(surface)
    doc["plane_fit"] = {"p": a, "q": b, "const": c, "r2": r2}
    if mode == "direct":
        ds = engine.direct_estimate(wx, wy, grid, cfg.scaling_range, cfg.exclude_edges, cfg.floor)
        doc["direct"] = {"h_x": ds.h_x, "h_y": ds.h_y, "D": ds.D}
    if mode == "both":
        doc["pf"] = _pf_doc(x, y, grid)
        doc["comparison"] = _comparison_doc(x, y, grid, cfg)
    return doc


def theory_doc(p_x, p_y, order_max=10.0, order_step=0.5, diag_step=0.25):
    """Closed-form curves and surfaces for a binomial pair, both conventions."""
    th = theory.BinomialTheory(p_x, p_y)
    grid = engine.OrderGrid.uniform(order_max, order_step)
    pp, qq = grid.mesh()
    tau = theory.joint_tau_pf(pp, qq, th)
    ax, ay = theory.joint_alphas(pp, qq, th)
    f = theory.joint_f(pp, qq, th)
    T, hx, hy, D = theory.map_pf_to_wt(tau, ax, ay, f, pp, qq)
    qd = diag_step * np.arange(int(round(order_max / diag_step)) + 1)
    qnz = qd[qd > 0]
    return {
        "p_x": p_x,
        "p_y": p_y,
        "beta": th.beta,
        "gamma": th.gamma,
        "Z": th.Z,
        "p_values": grid.p_values,
        "q_values": grid.q_values,
        "pf": {"tau": tau, "alpha_x": ax, "alpha_y": ay, "f": f},
        "wt": {"T": T, "h_x": hx, "h_y": hy, "D": D},
        "single": {
            "q": qd,
            "tau_x": theory.tau_zz(qd, p_x),
            "tau_y": theory.tau_zz(qd, p_y),
            "q_nonzero": qnz,
            "H_x": theory.H_zz(qnz, p_x),
            "H_y": theory.H_zz(qnz, p_y),
        },
        "diagonal": {
            "q": qd,
            "T": theory.map_pf_to_wt(theory.joint_tau_pf(qd, qd, th), 0, 0, 0, qd, qd)[0],
            "h_xy": (np.add(*theory.joint_alphas(qd, qd, th))) / 2 - 1,
            "D": theory.joint_f(qd, qd, th) - 1,
        },
    }
