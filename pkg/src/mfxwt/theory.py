"""Closed forms for the p-model (binomial cascade) and its joint spectra.

All brackets of the form ``a**Q + b**Q`` are evaluated in log space so that
grid corners with large ``Q`` neither overflow nor underflow.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ZeroOrder

LN2 = np.log(2.0)


def _check_prob(p, name):
    if not 0.0 < p < 1.0:
        raise ValueError(f"{name} must lie in (0, 1), got {p}")


def H_zz(q, p_z):
    q = np.asarray(q, dtype=float)
    if np.any(q == 0):
        raise ZeroOrder("H_zz is undefined at q = 0")
    return 1.0 / q - np.logaddexp(q * np.log(p_z), q * np.log1p(-p_z)) / (LN2 * q)


def tau_zz(q, p_z):
    q = np.asarray(q, dtype=float)
    return -np.logaddexp(q * np.log(p_z), q * np.log1p(-p_z)) / LN2


@dataclass(frozen=True)
class BinomialTheory:
    p_x: float
    p_y: float

    def __post_init__(self):
        _check_prob(self.p_x, "p_x")
        _check_prob(self.p_y, "p_y")
        if self.p_y == 0.5 and self.p_x != 0.5:
            # beta has a vanishing denominator
            raise ValueError("p_y = 0.5 makes beta undefined unless p_x = 0.5")

    @property
    def beta(self):
        if self.p_x == self.p_y:
            return 1.0
        return (np.log(self.p_x) - np.log1p(-self.p_x)) / (np.log(self.p_y) - np.log1p(-self.p_y))

    @property
    def gamma(self):
        if self.p_x == self.p_y:
            return 0.0
        return self.beta * np.log1p(-self.p_y) - np.log1p(-self.p_x)

    @property
    def Z(self):
        return (1.0 - self.p_y) / self.p_y

    def Q(self, p, q):
        return self.beta * np.asarray(p, dtype=float) / 2 + np.asarray(q, dtype=float) / 2

    def _log_bracket(self, Q):
        return np.logaddexp(Q * np.log(self.p_y), Q * np.log1p(-self.p_y))

    def _weighted_log(self, Q):
        # [p^Q ln p + (1-p)^Q ln(1-p)] / [p^Q + (1-p)^Q], shared by both alphas
        a, b = np.log(self.p_y), np.log1p(-self.p_y)
        w = np.exp(Q * a - self._log_bracket(Q))
        return w * a + (1.0 - w) * b


def joint_tau_pf(p, q, theory):
    p = np.asarray(p, dtype=float)
    Q = theory.Q(p, q)
    return p * theory.gamma / (2 * LN2) - theory._log_bracket(Q) / LN2


def joint_alphas(p, q, theory):
    """Joint singularity strengths ``(alpha_x, alpha_y)``."""
    wl = theory._weighted_log(theory.Q(p, q))
    alpha_y = -wl / LN2
    alpha_x = theory.gamma / LN2 + theory.beta * alpha_y
    return alpha_x, alpha_y


def joint_f(p, q, theory):
    """Joint spectrum ``f_xy``; depends on ``(p, q)`` only through ``Q``.

    Uses ``f = [ln(1 + Z^Q) - Q ln Z * Z^Q / (1 + Z^Q)] / ln 2``, the form that
    satisfies ``f = p*alpha_x/2 + q*alpha_y/2 - tau_xy`` identically.
    """
    Q = theory.Q(p, q)
    lnZ = np.log(theory.Z)
    t = Q * lnZ
    frac = np.exp(t - np.logaddexp(0.0, t))  # Z^Q / (1 + Z^Q)
    return (np.logaddexp(0.0, t) - Q * lnZ * frac) / LN2


def map_pf_to_wt(tau, alpha_x, alpha_y, f, p, q):
    """Box-counting quantities to their wavelet counterparts ``(T, h_x, h_y, D)``."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    return tau - p / 2 - q / 2 + 1, alpha_x - 1, alpha_y - 1, f - 1


def wt_theory(p, q, theory):
    """Convenience: wavelet-side ``(T, h_x, h_y, D)`` for the binomial pair."""
    tau = joint_tau_pf(p, q, theory)
    ax, ay = joint_alphas(p, q, theory)
    return map_pf_to_wt(tau, ax, ay, joint_f(p, q, theory), p, q)
