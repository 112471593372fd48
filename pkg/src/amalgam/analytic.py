"""Pointwise closed forms of the classical kernels.

These are plain evaluations of the continuum formulas on point arrays; the
box-consistent (periodized) versions live in :mod:`amalgam.kernels`.

With d the space dimension, gamma_d = Gamma((d+1)/2) / pi^((d+1)/2):

    P_t(x)   = gamma_d * t / (t^2 + |x|^2)^((d+1)/2)        (Poisson)
    Q_t^j(x) = gamma_d * x_j / (t^2 + |x|^2)^((d+1)/2)      (conjugate Poisson)
    W_t(x)   = (4 pi t)^(-d/2) * exp(-|x|^2 / (4t))         (heat)
    K_j(x)   = gamma_d * x_j / |x|^(d+1)                    (Riesz kernel)
"""

from __future__ import annotations

import math

import numpy as np

__all__ = [
    "gamma_d",
    "poisson",
    "conjugate_poisson",
    "heat",
    "heat_dt",
    "riesz_kernel",
]


def gamma_d(d: int) -> float:
    """Normalizing constant Gamma((d+1)/2) / pi^((d+1)/2)."""
    return math.gamma((d + 1) / 2) / math.pi ** ((d + 1) / 2)


def _sqnorm(axes):
    axes = [np.asarray(a, dtype=float) for a in axes]
    out = axes[0] ** 2
    for a in axes[1:]:
        out = out + a**2
    return out


def poisson(axes, t: float) -> np.ndarray:
    """P_t at points given per-axis (broadcastable arrays)."""
    if t <= 0:
        raise ValueError(f"poisson kernel needs t > 0, got {t}")
    d = len(axes)
    r2 = _sqnorm(axes)
    return gamma_d(d) * t / (t**2 + r2) ** ((d + 1) / 2)


def conjugate_poisson(axes, t: float, j: int) -> np.ndarray:
    """Q_t^j at points given per-axis; j is 1-based."""
    if t <= 0:
        raise ValueError(f"conjugate poisson kernel needs t > 0, got {t}")
    d = len(axes)
    if not 1 <= j <= d:
        raise ValueError(f"axis j={j} out of range for d={d}")
    r2 = _sqnorm(axes)
    xj = np.asarray(axes[j - 1], dtype=float)
    return gamma_d(d) * xj / (t**2 + r2) ** ((d + 1) / 2)


def heat(axes, t: float) -> np.ndarray:
    """W_t at points given per-axis."""
    if t <= 0:
        raise ValueError(f"heat kernel needs t > 0, got {t}")
    d = len(axes)
    r2 = _sqnorm(axes)
    return np.exp(-r2 / (4.0 * t)) / (4.0 * math.pi * t) ** (d / 2)


def heat_dt(axes, t: float) -> np.ndarray:
    """Time derivative of W_t: W_t * (|x|^2/(4t^2) - d/(2t))."""
    d = len(axes)
    r2 = _sqnorm(axes)
    return heat(axes, t) * (r2 / (4.0 * t**2) - d / (2.0 * t))


def riesz_kernel(axes, j: int) -> np.ndarray:
    """K_j at points given per-axis, with the (odd-kernel) value 0 at the origin."""
    d = len(axes)
    if not 1 <= j <= d:
        raise ValueError(f"axis j={j} out of range for d={d}")
    r2 = _sqnorm(axes)
    xj = np.broadcast_to(np.asarray(axes[j - 1], dtype=float), r2.shape)
    out = np.zeros_like(r2)
    mask = r2 > 0
    out[mask] = gamma_d(d) * xj[mask] / r2[mask] ** ((d + 1) / 2)
    return out
