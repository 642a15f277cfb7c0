"""Gaussian-derivative kernels and the real continuous wavelet transform.

The transform follows the plain sum definition

    w(s, i) = (1/s) * sum_t x(t) * psi((t - i) / s)

with the series zero-padded outside its support and the kernel truncated to
``|t - i| <= L * s``.  No further kernel normalisation is applied.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from numpy.polynomial import hermite_e
from scipy import fft as sp_fft

from .errors import InvalidGrid, NonFiniteInput, SeriesTooShort

MIN_LENGTH = 64
# Above this amount of work (n * L * s) a scale row goes through the FFT path.
FFT_WORK_THRESHOLD = 1e6


@dataclass(frozen=True)
class KernelSpec:
    """Order ``m`` Gaussian derivative truncated at ``|x| <= half_width``."""

    order: int = 2
    half_width: float = 8.0

    def __post_init__(self):
        if int(self.order) != self.order or self.order < 1:
            raise InvalidGrid(f"kernel order must be a positive integer, got {self.order}")
        if not self.half_width >= 4:
            raise InvalidGrid(f"kernel half-width must be >= 4, got {self.half_width}")


@dataclass(frozen=True)
class ScaleGrid:
    scales: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.scales, dtype=float)
        if s.ndim != 1 or s.size < 1:
            raise InvalidGrid("scale grid must be a non-empty 1-d array")
        if np.any(~np.isfinite(s)) or np.any(s <= 0):
            raise InvalidGrid("scales must be finite and positive")
        if s.size > 1:
            if np.any(np.diff(s) <= 0):
                raise InvalidGrid("scales must be strictly increasing")
            ratios = s[1:] / s[:-1]
            if np.max(np.abs(ratios / ratios[0] - 1)) > 1e-9:
                raise InvalidGrid("scales must be logarithmically spaced")
        s.setflags(write=False)
        object.__setattr__(self, "scales", s)

    def __len__(self):
        return self.scales.size

    @property
    def count(self):
        return self.scales.size

    @classmethod
    def logspaced(cls, s_min, s_max, count):
        if count < 1:
            raise InvalidGrid("scale count must be positive")
        if count == 1:
            return cls(np.array([float(s_min)]))
        return cls(np.geomspace(s_min, s_max, count))

    @classmethod
    def dyadic(cls, lo_exp, hi_exp):
        return cls(2.0 ** np.arange(lo_exp, hi_exp + 1))

    @classmethod
    def default(cls, n, count=30):
        return cls.logspaced(4.0, n / 8.0, count)

    def check_for_length(self, n):
        if self.scales[0] < 4 - 1e-12:
            raise InvalidGrid(f"smallest scale {self.scales[0]} is below 4 samples")
        if self.scales[-1] > n / 8 * (1 + 1e-12):
            raise InvalidGrid(f"largest scale {self.scales[-1]} exceeds n/8 = {n / 8}")

    def select(self, s_lo=None, s_hi=None):
        """Boolean mask of scales inside ``[s_lo, s_hi]`` (relative slack 1e-9)."""
        s = self.scales
        lo = -np.inf if s_lo is None else s_lo * (1 - 1e-9)
        hi = np.inf if s_hi is None else s_hi * (1 + 1e-9)
        return (s >= lo) & (s <= hi)


@dataclass(frozen=True)
class WaveletField:
    coefficients: np.ndarray
    scale_grid: ScaleGrid
    kernel: KernelSpec = field(default_factory=KernelSpec)

    @property
    def n(self):
        return self.coefficients.shape[1]

    @property
    def scales(self):
        return self.scale_grid.scales

    def edge_halfwidths(self):
        """Number of positions within ``L*s`` of an edge, per scale."""
        return np.floor(self.kernel.half_width * self.scales).astype(int)


def kernel_value(spec, x):
    """m-th derivative of exp(-x**2/2), exactly zero outside the truncation."""
    x = np.asarray(x, dtype=float)
    coef = np.zeros(spec.order + 1)
    coef[-1] = 1.0
    # d^m/dx^m exp(-x^2/2) = (-1)^m He_m(x) exp(-x^2/2)
    val = (-1) ** spec.order * hermite_e.hermeval(x, coef) * np.exp(-0.5 * x * x)
    val = np.where(np.abs(x) > spec.half_width, 0.0, val)
    return val if val.ndim else float(val)


def discrete_kernel(spec, s):
    """Samples ``psi(u/s)/s`` for integer lags ``u = -h..h`` with ``h = floor(L*s)``."""
    h = int(np.floor(spec.half_width * s))
    u = np.arange(-h, h + 1, dtype=float)
    return kernel_value(spec, u / s) / s, h


def _validate_series(series):
    x = np.asarray(series, dtype=float)
    if x.ndim != 1:
        raise SeriesTooShort("series must be one-dimensional")
    if x.size < MIN_LENGTH:
        raise SeriesTooShort(f"series length {x.size} < {MIN_LENGTH}")
    if not np.all(np.isfinite(x)):
        raise NonFiniteInput("series contains non-finite samples")
    return x


def _direct_row(x, spec, s):
    k, h = discrete_kernel(spec, s)
    padded = np.concatenate([np.zeros(h), x, np.zeros(h)])
    # np.correlate evaluates the sum directly: out[i] = sum_u padded[i+u] k[u]
    return np.correlate(padded, k, mode="valid")


@lru_cache(maxsize=8)
def _kernel_spectra(n_fft, scales, spec):
    rows = []
    for s in scales:
        k, h = discrete_kernel(spec, s)
        circ = np.zeros(n_fft)
        circ[: h + 1] = k[h:]
        if h:
            circ[-h:] = k[:h]
        rows.append(np.conj(sp_fft.rfft(circ)))
    out = np.array(rows)
    out.setflags(write=False)
    return out


def _fft_size(n, spec, scales):
    h_max = int(np.floor(spec.half_width * max(scales)))
    return sp_fft.next_fast_len(n + h_max, real=True)


def cwt(series, grid=None, spec=None, method="auto", check_grid=True):
    """Wavelet coefficients of ``series`` on every scale of ``grid``.

    ``method`` is ``"auto"``, ``"fft"`` or ``"direct"``.  Under ``"auto"`` a
    row is convolved through the FFT when ``n * L * s`` exceeds
    ``FFT_WORK_THRESHOLD`` and summed directly otherwise.
    """
    x = _validate_series(series)
    n = x.size
    spec = spec or KernelSpec()
    grid = grid or ScaleGrid.default(n)
    if check_grid:
        grid.check_for_length(n)
    scales = tuple(float(s) for s in grid.scales)
    if method == "direct":
        use_fft = [False] * len(scales)
    elif method == "fft":
        use_fft = [True] * len(scales)
    elif method == "auto":
        use_fft = [n * spec.half_width * s > FFT_WORK_THRESHOLD for s in scales]
    else:
        raise ValueError(f"unknown method {method!r}")

    out = np.empty((len(scales), n))
    if any(use_fft):
        fft_scales = tuple(s for s, f in zip(scales, use_fft) if f)
        n_fft = _fft_size(n, spec, fft_scales)
        spectra = _kernel_spectra(n_fft, fft_scales, spec)
        xf = sp_fft.rfft(x, n_fft)
        j_fft = 0
    for j, s in enumerate(scales):
        if use_fft[j]:
            out[j] = sp_fft.irfft(xf * spectra[j_fft], n_fft)[:n]
            j_fft += 1
        else:
            out[j] = _direct_row(x, spec, s)
    return WaveletField(out, grid, spec)
