"""Synthetic test signals: binomial cascades and bivariate fractional Brownian motion."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import linalg

from .errors import ConstantInput, InfeasibleCorrelation, KTooLarge, ShapeMismatch

MAX_CASCADE_STEPS = 26
CHOLESKY_MAX_N = 2048
EIGEN_CLIP_TOL = -1e-9


@dataclass(frozen=True)
class BinomialSpec:
    p_z: float
    k: int

    def __post_init__(self):
        if not 0.0 < self.p_z < 1.0:
            raise ValueError(f"p_z must lie in (0, 1), got {self.p_z}")
        if int(self.k) != self.k or self.k < 1:
            raise ValueError(f"k must be a positive integer, got {self.k}")
        if self.k > MAX_CASCADE_STEPS:
            raise KTooLarge(f"k = {self.k} exceeds {MAX_CASCADE_STEPS}")


def gen_binomial(spec):
    """Deterministic p-model: each cell hands ``p_z`` of its mass to the left child."""
    z = np.ones(1)
    w = np.array([spec.p_z, 1.0 - spec.p_z])
    for _ in range(spec.k):
        z = np.outer(z, w).ravel()
    return z


@dataclass(frozen=True)
class BfbmSpec:
    H_xx: float
    H_yy: float
    rho: float
    n: int
    sigma_x: float = 1.0
    sigma_y: float = 1.0
    seed: int | None = None

    def __post_init__(self):
        for name in ("H_xx", "H_yy"):
            h = getattr(self, name)
            if not 0.0 < h < 1.0:
                raise ValueError(f"{name} must lie in (0, 1), got {h}")
        if not -1.0 < self.rho < 1.0:
            raise ValueError(f"rho must lie in (-1, 1), got {self.rho}")
        if self.n < 2:
            raise ValueError("n must be at least 2")
        if self.sigma_x <= 0 or self.sigma_y <= 0:
            raise ValueError("component scales must be positive")


def fgn_autocov(lag, H, sigma=1.0):
    k = np.abs(np.asarray(lag, dtype=float))
    return 0.5 * sigma**2 * (np.abs(k + 1) ** (2 * H) + np.abs(k - 1) ** (2 * H) - 2 * k ** (2 * H))


def bfgn_crosscov(lag, spec):
    """Time-reversible cross-covariance of the increments (symmetric in lag)."""
    k = np.abs(np.asarray(lag, dtype=float))
    h = spec.H_xx + spec.H_yy
    return 0.5 * spec.rho * spec.sigma_x * spec.sigma_y * (np.abs(k + 1) ** h + np.abs(k - 1) ** h - 2 * k**h)


def increment_covariance(spec, lags):
    """Target ``Cov(dX_a(t), dX_b(t + lag))`` as an array of shape (len(lags), 2, 2)."""
    lags = np.asarray(lags)
    out = np.empty((lags.size, 2, 2))
    out[:, 0, 0] = fgn_autocov(lags, spec.H_xx, spec.sigma_x)
    out[:, 1, 1] = fgn_autocov(lags, spec.H_yy, spec.sigma_y)
    out[:, 0, 1] = out[:, 1, 0] = bfgn_crosscov(lags, spec)
    return out


def _param_key(spec):
    return (spec.H_xx, spec.H_yy, spec.rho, spec.n, spec.sigma_x, spec.sigma_y)


@lru_cache(maxsize=4)
def _circulant_roots(key, m):
    H_xx, H_yy, rho, n, sx, sy = key
    spec = BfbmSpec(H_xx, H_yy, rho, n, sx, sy)
    k = np.arange(m)
    cov = increment_covariance(spec, np.minimum(k, m - k))
    # per-frequency 2x2 real symmetric spectral matrices
    lam_mat = np.fft.fft(cov, axis=0).real
    lam_mat = 0.5 * (lam_mat + np.swapaxes(lam_mat, 1, 2))
    evals, evecs = np.linalg.eigh(lam_mat)
    scale = max(1.0, float(np.max(evals)))
    if evals.min() < EIGEN_CLIP_TOL * scale:
        return None, float(evals.min())
    evals = np.clip(evals, 0.0, None)
    roots = (evecs * np.sqrt(evals)[:, None, :]) @ np.swapaxes(evecs, 1, 2)
    roots.setflags(write=False)
    return roots, float(evals.min())


def _bfgn_circulant(spec, rng, max_doublings=3):
    m = 2 * spec.n
    for _ in range(max_doublings + 1):
        roots, lam_min = _circulant_roots(_param_key(spec), m)
        if roots is not None:
            break
        m *= 2
    else:
        raise InfeasibleCorrelation(
            f"circulant embedding has negative eigenvalue {lam_min:.3g}; "
            "the (H_xx, H_yy, rho) combination is not a valid covariance"
        )
    w = rng.standard_normal((m, 2)) + 1j * rng.standard_normal((m, 2))
    x = np.sqrt(m) * np.fft.ifft(np.einsum("jab,jb->ja", roots, w), axis=0)
    return np.ascontiguousarray(x.real[: spec.n])


@lru_cache(maxsize=4)
def _cholesky_factor(key):
    H_xx, H_yy, rho, n, sx, sy = key
    spec = BfbmSpec(H_xx, H_yy, rho, n, sx, sy)
    lags = np.subtract.outer(np.arange(n), np.arange(n))
    cov = np.empty((2 * n, 2 * n))
    cov[:n, :n] = fgn_autocov(lags, H_xx, sx)
    cov[n:, n:] = fgn_autocov(lags, H_yy, sy)
    cov[:n, n:] = cov[n:, :n] = bfgn_crosscov(lags, spec)
    try:
        factor = linalg.cholesky(cov, lower=True)
    except linalg.LinAlgError as exc:
        raise InfeasibleCorrelation(f"increment covariance is not positive definite: {exc}") from None
    factor.setflags(write=False)
    return factor


def _bfgn_cholesky(spec, rng):
    z = rng.standard_normal(2 * spec.n)
    v = _cholesky_factor(_param_key(spec)) @ z
    return np.column_stack([v[: spec.n], v[spec.n :]])


def gen_bfgn(spec, method="auto", rng=None):
    """Increments of a bivariate fBm, shape ``(n, 2)``.

    ``method`` is ``"circulant"``, ``"cholesky"`` or ``"auto"`` (dense
    Cholesky up to ``CHOLESKY_MAX_N`` samples, circulant embedding above).
    """
    if rng is None:
        if spec.seed is None:
            raise ValueError("a seed (or an explicit Generator) is required")
        rng = np.random.default_rng(spec.seed)
    if method == "auto":
        method = "cholesky" if spec.n <= CHOLESKY_MAX_N else "circulant"
    if method == "cholesky":
        return _bfgn_cholesky(spec, rng)
    if method == "circulant":
        return _bfgn_circulant(spec, rng)
    raise ValueError(f"unknown method {method!r}")


def gen_bfbm(spec, method="auto", rng=None):
    """Paths ``(x, y)`` of a bivariate fBm as cumulative sums of the increments."""
    inc = gen_bfgn(spec, method=method, rng=rng)
    paths = np.cumsum(inc, axis=0)
    return paths[:, 0].copy(), paths[:, 1].copy()


def pearson(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ShapeMismatch("pearson needs two 1-d arrays of equal length")
    if x.size < 2:
        raise ConstantInput("need at least two samples")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = np.dot(dx, dx)
    syy = np.dot(dy, dy)
    if sxx == 0 or syy == 0:
        raise ConstantInput("correlation undefined for a constant series")
    r = np.dot(dx, dy) / np.sqrt(sxx * syy)
    return float(np.clip(r, -1.0, 1.0))


def bivariate_feasibility_bound(H_xx, H_yy):
    """Largest admissible ``rho**2`` for a time-reversible bFBM."""
    from scipy.special import gamma as G

    h = H_xx + H_yy
    num = G(2 * H_xx + 1) * G(2 * H_yy + 1) * np.sin(np.pi * H_xx) * np.sin(np.pi * H_yy)
    den = G(h + 1) ** 2 * np.sin(np.pi * h / 2) ** 2
    return num / den
