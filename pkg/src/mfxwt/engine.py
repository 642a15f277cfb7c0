"""Joint partition functions of two wavelet fields and the spectra derived from them.

Moment orders follow the half-order convention: a cell ``(p, q)`` weights the
coefficients as ``|w_x|**(p/2) * |w_y|**(q/2)``.  Partition values are held
as natural logarithms because high orders leave the double range quickly.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateField, InvalidGrid, RangeTooNarrow, ShapeMismatch, ZeroCoefficient
from .wavelet import ScaleGrid, WaveletField

COEF_FLOOR = 1e-300
FLOOR_WARN_FRACTION = 1e-3
R2_FLAG = 0.95
MIN_FIT_SCALES = 5


class DataQualityWarning(UserWarning):
    pass


def _check_axis(values, name):
    v = np.asarray(values, dtype=float)
    if v.ndim != 1 or v.size < 1:
        raise InvalidGrid(f"{name} must be a non-empty 1-d array")
    if np.any(v < 0):
        raise InvalidGrid(f"{name} must be non-negative")
    if v.size > 1:
        d = np.diff(v)
        if np.any(d <= 0):
            raise InvalidGrid(f"{name} must be strictly increasing")
        if np.max(np.abs(d - d[0])) > 1e-9 * max(1.0, abs(d[0])):
            raise InvalidGrid(f"{name} must be uniformly spaced")
    v.setflags(write=False)
    return v


@dataclass(frozen=True)
class OrderGrid:
    p_values: np.ndarray
    q_values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "p_values", _check_axis(self.p_values, "p_values"))
        object.__setattr__(self, "q_values", _check_axis(self.q_values, "q_values"))

    @classmethod
    def uniform(cls, stop=10.0, step=0.5, start=0.0):
        axis = start + step * np.arange(int(round((stop - start) / step)) + 1)
        return cls(axis, axis.copy())

    @property
    def shape(self):
        return self.p_values.size, self.q_values.size

    @property
    def step_p(self):
        return float(self.p_values[1] - self.p_values[0]) if self.p_values.size > 1 else np.nan

    @property
    def step_q(self):
        return float(self.q_values[1] - self.q_values[0]) if self.q_values.size > 1 else np.nan

    def mesh(self):
        return np.meshgrid(self.p_values, self.q_values, indexing="ij")


@dataclass(frozen=True)
class PartitionTable:
    """``log_chi[a, b, j] = ln chi(p_a, q_b, s_j)``."""

    log_chi: np.ndarray
    order_grid: OrderGrid
    scale_grid: ScaleGrid
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.log_chi.shape != self.order_grid.shape + (len(self.scale_grid),):
            raise ShapeMismatch("partition array does not match its grids")
        if not np.all(np.isfinite(self.log_chi)):
            raise DegenerateField("partition function has zero or non-finite entries")

    @property
    def chi(self):
        return np.exp(self.log_chi)

    @property
    def scales(self):
        return self.scale_grid.scales


@dataclass(frozen=True)
class MassExponentSurface:
    T: np.ndarray
    r2: np.ndarray
    order_grid: OrderGrid
    scaling_range: tuple
    intercept: np.ndarray | None = None

    @property
    def flagged(self):
        """Cells whose log-log fit falls below the r-squared threshold."""
        return self.r2 < R2_FLAG


@dataclass(frozen=True)
class JointSpectrum:
    h_x: np.ndarray
    h_y: np.ndarray
    D: np.ndarray
    order_grid: OrderGrid
    method: str


@dataclass(frozen=True)
class DiagonalSpectrum:
    """p = q slice; ``h_xy``/``D`` from the direct route, ``*_legendre`` from T(q)."""

    q_values: np.ndarray
    h_xy: np.ndarray
    D: np.ndarray
    T: np.ndarray
    h_legendre: np.ndarray
    D_legendre: np.ndarray
    r2: np.ndarray
    scaling_range: tuple
    meta: dict = field(default_factory=dict)

    @property
    def width(self):
        return float(np.max(self.h_xy) - np.min(self.h_xy))


# ---------------------------------------------------------------- helpers

def _rows(field_, exclude_edges):
    """Per-scale coefficient rows, trimmed when edges are excluded."""
    w = field_.coefficients
    if not exclude_edges:
        return [w[j] for j in range(w.shape[0])]
    rows = []
    for j, h in enumerate(field_.edge_halfwidths()):
        if 2 * h >= field_.n:
            raise RangeTooNarrow(
                f"no interior positions at scale {field_.scales[j]:g} once edges are excluded"
            )
        rows.append(w[j, h : field_.n - h])
    return rows


def _log_abs_rows(field_, exclude_edges, floor, name):
    """``ln max(|w|, floor)`` per scale plus per-scale floored counts."""
    out, floored = [], []
    for j, row in enumerate(_rows(field_, exclude_edges)):
        a = np.abs(row)
        if not np.any(a > 0):
            raise DegenerateField(f"{name} is identically zero at scale {field_.scales[j]:g}")
        below = a < floor if floor > 0 else a == 0
        n_below = int(np.count_nonzero(below))
        if n_below and floor <= 0:
            raise ZeroCoefficient(f"{name} has exact zeros at scale {field_.scales[j]:g}")
        floored.append(n_below)
        out.append(np.log(np.maximum(a, floor)))
    return out, floored


def _check_pair(wx, wy):
    if wx.coefficients.shape != wy.coefficients.shape:
        raise ShapeMismatch("wavelet fields differ in shape")
    if not np.array_equal(wx.scales, wy.scales):
        raise ShapeMismatch("wavelet fields use different scale grids")
    if wx.kernel != wy.kernel:
        raise ShapeMismatch("wavelet fields use different kernels")


def _quality_meta(floored_x, floored_y, lengths):
    frac = max(max(fx, fy) / m for fx, fy, m in zip(floored_x, floored_y, lengths))
    meta = {
        "floored_x": list(floored_x),
        "floored_y": list(floored_y),
        "max_floored_fraction": frac,
        "warnings": [],
    }
    if frac > FLOOR_WARN_FRACTION:
        msg = f"{frac:.3%} of coefficients at some scale were floored before taking logs"
        meta["warnings"].append(msg)
        warnings.warn(msg, DataQualityWarning, stacklevel=3)
    return meta


def _power_table(log_row, orders):
    """``exp((o/2) * (ln|w| - max ln|w|))`` for every order; values in [0, 1]."""
    top = log_row.max()
    return np.exp(np.multiply.outer(orders / 2, log_row - top)), top


def _moment_sums(wx, wy, grid, exclude_edges=False, floor=COEF_FLOOR, with_logs=False):
    """Per-cell, per-scale partition logs and (optionally) measure-weighted log sums.

    Returns ``log_chi`` and, with ``with_logs``, ``sum mu ln|w_x|``,
    ``sum mu ln|w_y|`` and ``sum mu ln mu`` with shape ``(P, Q, S)``.
    """
    _check_pair(wx, wy)
    lx_rows, fx = _log_abs_rows(wx, exclude_edges, floor, "x field")
    ly_rows, fy = _log_abs_rows(wy, exclude_edges, floor, "y field")
    P, Q = grid.p_values, grid.q_values
    S = len(lx_rows)
    log_chi = np.empty((P.size, Q.size, S))
    if with_logs:
        mlx = np.empty_like(log_chi)
        mly = np.empty_like(log_chi)
    for j in range(S):
        lx, ly = lx_rows[j], ly_rows[j]
        ax, top_x = _power_table(lx, P)
        ay, top_y = _power_table(ly, Q)
        if with_logs:
            axl = ax * lx
            ayl = ay * ly
        for a in range(P.size):
            for b in range(Q.size):
                tot = np.dot(ax[a], ay[b])
                if not tot > 0:
                    raise DegenerateField("joint partition underflowed; orders too large for this data")
                log_chi[a, b, j] = (P[a] / 2) * top_x + (Q[b] / 2) * top_y + np.log(tot)
                if with_logs:
                    mlx[a, b, j] = np.dot(axl[a], ay[b]) / tot
                    mly[a, b, j] = np.dot(ax[a], ayl[b]) / tot
    meta = _quality_meta(fx, fy, [r.size for r in lx_rows])
    meta["positions"] = [int(r.size) for r in lx_rows]
    if not with_logs:
        return log_chi, meta
    # ln mu = (p/2) ln|w_x| + (q/2) ln|w_y| - ln chi, and sum mu = 1
    pp, qq = grid.mesh()
    mlm = (pp / 2)[..., None] * mlx + (qq / 2)[..., None] * mly - log_chi
    return log_chi, mlx, mly, mlm, meta


def _scale_mask(scale_grid, scaling_range):
    lo, hi = scaling_range if scaling_range is not None else (None, None)
    mask = scale_grid.select(lo, hi)
    if np.count_nonzero(mask) < MIN_FIT_SCALES:
        raise RangeTooNarrow(
            f"scaling range {scaling_range} holds {np.count_nonzero(mask)} scales; "
            f"need at least {MIN_FIT_SCALES}"
        )
    s = scale_grid.scales[mask]
    return mask, (float(s[0]), float(s[-1]))


def loglog_fit(log_s, y):
    """Least-squares slope, intercept and r-squared of ``y`` against ``log_s``.

    Works along the last axis.  A constant ``y`` yields slope exactly 0 and
    r-squared 1.
    """
    log_s = np.asarray(log_s, dtype=float)
    y = np.asarray(y, dtype=float)
    x = log_s - log_s.mean()
    sxx = np.dot(x, x)
    y0 = y - y[..., :1]  # shift keeps constant rows exactly zero
    slope = (y0 @ x) / sxx
    resid_mean = y0.mean(axis=-1)
    intercept = y[..., 0] + resid_mean - slope * log_s.mean()
    yc = y0 - resid_mean[..., None]
    ss_tot = np.sum(yc * yc, axis=-1)
    fitted = slope[..., None] * x
    ss_res = np.sum((yc - fitted) ** 2, axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        r2 = np.where(ss_tot > 0, 1.0 - ss_res / np.where(ss_tot > 0, ss_tot, 1.0), 1.0)
    return slope, intercept, np.clip(r2, 0.0, 1.0)


# ---------------------------------------------------------------- operations

def joint_partition(wx: WaveletField, wy: WaveletField, grid: OrderGrid,
                    exclude_edges=False, floor=COEF_FLOOR) -> PartitionTable:
    log_chi, meta = _moment_sums(wx, wy, grid, exclude_edges, floor)
    return PartitionTable(log_chi, grid, wx.scale_grid, meta)


def fit_mass_exponents(table: PartitionTable, scaling_range=None) -> MassExponentSurface:
    mask, used = _scale_mask(table.scale_grid, scaling_range)
    slope, intercept, r2 = loglog_fit(np.log(table.scales[mask]), table.log_chi[..., mask])
    return MassExponentSurface(slope, r2, table.order_grid, used, intercept)


def _derivative(values, step, axis):
    if values.shape[axis] < 2:
        raise InvalidGrid("need at least two orders along each axis for the Legendre transform")
    return np.gradient(values, step, axis=axis, edge_order=1)


def legendre_spectrum(surface: MassExponentSurface) -> JointSpectrum:
    """Finite-difference double Legendre transform of ``T(p, q)``.

    Central differences inside the grid, first-order one-sided differences
    on its edges.
    """
    g = surface.order_grid
    T = surface.T
    h_x = 2 * _derivative(T, g.step_p, 0)
    h_y = 2 * _derivative(T, g.step_q, 1)
    pp, qq = g.mesh()
    D = pp * h_x / 2 + qq * h_y / 2 - T
    return JointSpectrum(h_x, h_y, D, g, "legendre")


def direct_estimate(wx, wy, grid: OrderGrid, scaling_range=None,
                    exclude_edges=False, floor=COEF_FLOOR) -> JointSpectrum:
    """Canonical estimates: scale-regression slopes of measure-weighted logs."""
    _, mlx, mly, mlm, _ = _moment_sums(wx, wy, grid, exclude_edges, floor, with_logs=True)
    mask, _ = _scale_mask(wx.scale_grid, scaling_range)
    log_s = np.log(wx.scales[mask])
    h_x = loglog_fit(log_s, mlx[..., mask])[0]
    h_y = loglog_fit(log_s, mly[..., mask])[0]
    D = loglog_fit(log_s, mlm[..., mask])[0]
    return JointSpectrum(h_x, h_y, D, grid, "direct")


def joint_measure(wx, wy, p, q, scale_index, floor=COEF_FLOOR):
    """Explicit ``mu(p, q, s, i)`` for one scale; mainly for inspection."""
    ax = np.maximum(np.abs(wx.coefficients[scale_index]), floor)
    ay = np.maximum(np.abs(wy.coefficients[scale_index]), floor)
    a = (p / 2) * np.log(ax) + (q / 2) * np.log(ay)
    a -= a.max()
    e = np.exp(a)
    return e / e.sum()


def diagonal_analysis(wx, wy, q_values=None, scaling_range=None,
                      exclude_edges=False, floor=COEF_FLOOR) -> DiagonalSpectrum:
    """Spectrum along p = q; the width is taken from the direct ``h_xy``."""
    if q_values is None:
        q_values = np.arange(41) * 0.25
    q = _check_axis(q_values, "q_values")
    _check_pair(wx, wy)
    lx_rows, fx = _log_abs_rows(wx, exclude_edges, floor, "x field")
    ly_rows, fy = _log_abs_rows(wy, exclude_edges, floor, "y field")
    S = len(lx_rows)
    log_chi = np.empty((q.size, S))
    mlw = np.empty_like(log_chi)
    for j in range(S):
        lw = 0.5 * (lx_rows[j] + ly_rows[j])  # ln |w_x w_y|^(1/2)
        tab, top = _power_table(2 * lw, q)  # |w_x w_y|^(q/2)
        tot = tab.sum(axis=1)
        if not np.all(tot > 0):
            raise DegenerateField("diagonal partition underflowed")
        log_chi[:, j] = (q / 2) * top + np.log(tot)
        mlw[:, j] = (tab @ lw) / tot
    meta = _quality_meta(fx, fy, [r.size for r in lx_rows])
    mlm = q[:, None] * mlw - log_chi
    mask, used = _scale_mask(wx.scale_grid, scaling_range)
    log_s = np.log(wx.scales[mask])
    T, _, r2 = loglog_fit(log_s, log_chi[:, mask])
    h = loglog_fit(log_s, mlw[:, mask])[0]
    D = loglog_fit(log_s, mlm[:, mask])[0]
    if q.size >= 2:
        h_leg = np.gradient(T, q, edge_order=1)
    else:
        h_leg = np.full_like(T, np.nan)
    D_leg = q * h_leg - T
    meta["log_chi"] = log_chi
    meta["sum_mu_log_w"] = mlw
    meta["sum_mu_log_mu"] = mlm
    return DiagonalSpectrum(q, h, D, T, h_leg, D_leg, r2, used, meta)


def scaled_partition_for_comparison(table: PartitionTable) -> PartitionTable:
    """``chi * s**(p/2 + q/2 - 1)``, the wavelet partition put on box-counting footing."""
    pp, qq = table.order_grid.mesh()
    expo = (pp / 2 + qq / 2 - 1)[..., None]
    shifted = table.log_chi + expo * np.log(table.scales)
    return PartitionTable(shifted, table.order_grid, table.scale_grid, dict(table.meta))


def plane_fit(surface: MassExponentSurface):
    """Least-squares plane ``T ~ a p + b q + c``; returns ``(a, b, c, r2)``."""
    pp, qq = surface.order_grid.mesh()
    A = np.column_stack([pp.ravel(), qq.ravel(), np.ones(pp.size)])
    t = surface.T.ravel()
    coef, *_ = np.linalg.lstsq(A, t, rcond=None)
    resid = t - A @ coef
    ss_tot = np.sum((t - t.mean()) ** 2)
    r2 = 1.0 - np.sum(resid**2) / ss_tot if ss_tot > 0 else 1.0
    return float(coef[0]), float(coef[1]), float(coef[2]), float(r2)
