"""Box-counting joint partition functions for conservative measures.

Used as an independent reference for the wavelet partition functions: on a
binomial pair its log-log slopes are the exact joint mass exponents.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .engine import OrderGrid, PartitionTable, loglog_fit
from .errors import DegenerateField, IndivisibleLength, NegativeMeasure, NoCommonScales, ShapeMismatch
from .wavelet import ScaleGrid


@dataclass(frozen=True)
class BoxMeasureField:
    sizes: np.ndarray
    measures: tuple  # one array of box masses per size
    total_mass: float

    def level(self, size):
        idx = int(np.flatnonzero(self.sizes == size)[0])
        return self.measures[idx]


def _is_power_of_two(v):
    return v >= 1 and (v & (v - 1)) == 0


def dyadic_prefix(series):
    """Truncate to the largest power-of-two length, warning when samples are dropped."""
    x = np.asarray(series, dtype=float)
    n = 1 << (x.size.bit_length() - 1)
    if n != x.size:
        warnings.warn(f"truncating measure from {x.size} to dyadic length {n}", stacklevel=2)
    return x[:n]


def box_measures(series, levels) -> BoxMeasureField:
    x = np.asarray(series, dtype=float)
    if np.any(x < 0) or not np.all(np.isfinite(x)):
        raise NegativeMeasure("box counting needs a finite non-negative measure")
    sizes = np.array(sorted(int(s) for s in levels))
    if sizes.size == 0 or not all(_is_power_of_two(int(s)) for s in sizes):
        raise IndivisibleLength(f"box sizes must be powers of two, got {list(levels)}")
    if x.size % sizes[-1]:
        raise IndivisibleLength(f"length {x.size} is not a multiple of box size {sizes[-1]}")
    meas = tuple(x.reshape(-1, int(s)).sum(axis=1) for s in sizes)
    return BoxMeasureField(sizes, meas, float(x.sum()))


def joint_partition_pf(mx: BoxMeasureField, my: BoxMeasureField, grid: OrderGrid) -> PartitionTable:
    if not np.array_equal(mx.sizes, my.sizes):
        raise ShapeMismatch("box fields have different levels")
    P, Q = grid.p_values, grid.q_values
    log_chi = np.empty((P.size, Q.size, mx.sizes.size))
    for j, (bx, by) in enumerate(zip(mx.measures, my.measures)):
        if bx.size != by.size:
            raise ShapeMismatch("box fields hold different numbers of boxes")
        # 0**0 == 1 keeps empty boxes counted at zero order
        top_x = bx.max() if bx.max() > 0 else 1.0
        top_y = by.max() if by.max() > 0 else 1.0
        px = np.power.outer(bx / top_x, P / 2).T
        py = np.power.outer(by / top_y, Q / 2).T
        tot = px @ py.T
        if np.any(tot <= 0):
            raise DegenerateField("box partition vanishes for some order pair")
        log_chi[:, :, j] = (P / 2 * np.log(top_x))[:, None] + (Q / 2 * np.log(top_y))[None, :] + np.log(tot)
    return PartitionTable(log_chi, grid, ScaleGrid(mx.sizes.astype(float)))


@dataclass(frozen=True)
class SlopeComparison:
    p_values: np.ndarray
    q_values: np.ndarray
    scales: np.ndarray
    slope_wt: np.ndarray
    slope_pf: np.ndarray

    @property
    def diff(self):
        return self.slope_wt - self.slope_pf

    @property
    def max_abs(self):
        return float(np.max(np.abs(self.diff)))


def _common(a, b):
    ia, ib = [], []
    for i, v in enumerate(a):
        j = np.flatnonzero(np.abs(b - v) <= 1e-9 * max(1.0, abs(v)))
        if j.size:
            ia.append(i)
            ib.append(int(j[0]))
    return np.array(ia, dtype=int), np.array(ib, dtype=int)


def compare_wt_pf(chi_wt_scaled: PartitionTable, chi_pf: PartitionTable, min_scales=3) -> SlopeComparison:
    """Per-cell difference of log-log slopes over the scales and orders both tables share."""
    si, sj = _common(chi_wt_scaled.scales, chi_pf.scales)
    if si.size < min_scales:
        raise NoCommonScales(f"only {si.size} common scales; need {min_scales}")
    pa, pb = _common(chi_wt_scaled.order_grid.p_values, chi_pf.order_grid.p_values)
    qa, qb = _common(chi_wt_scaled.order_grid.q_values, chi_pf.order_grid.q_values)
    if pa.size == 0 or qa.size == 0:
        raise NoCommonScales("tables share no order pairs")
    log_s = np.log(chi_wt_scaled.scales[si])
    wt = chi_wt_scaled.log_chi[np.ix_(pa, qa, si)]
    pf = chi_pf.log_chi[np.ix_(pb, qb, sj)]
    return SlopeComparison(
        chi_wt_scaled.order_grid.p_values[pa],
        chi_wt_scaled.order_grid.q_values[qa],
        chi_wt_scaled.scales[si],
        loglog_fit(log_s, wt)[0],
        loglog_fit(log_s, pf)[0],
    )
