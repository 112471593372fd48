"""Slow, independent reference implementations.

These never call the spectral code path: convolution is a direct double sum
with periodic wrap, the Riesz transform is a truncated principal value built
from the near/far kernel split, and the half-derivative is adaptive
quadrature on the original (s - t)^(-1/2) form.  Size caps keep the direct
sums inside the acceptance-suite time budget.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.integrate import quad

from . import analytic
from .grid import GridFunction
from .kernels import riesz_kernel_split

__all__ = ["convolve_direct", "riesz_direct_pv", "weyl_direct"]

SIZE_CAP = 2**14


def _check_size(f: GridFunction):
    if f.spec.size > SIZE_CAP:
        raise ValueError(f"direct oracle limited to {SIZE_CAP} samples, got {f.spec.size}")


def _wrap_index_sum(f: GridFunction, kernel_values: np.ndarray) -> np.ndarray:
    """out[m] = h^d sum_j kernel(x_m - x_j) f(x_j), displacements wrapped into
    the box; kernel_values are samples on the standard nodes."""
    spec = f.spec
    n = spec.n
    out = np.zeros(spec.shape, dtype=complex)
    fv = f.values
    if spec.d == 1:
        for j in range(n):
            # x_m - x_j lands on node (m - j + n/2) mod n
            out += fv[j] * np.roll(kernel_values, j - n // 2)
    else:
        for j1 in range(n):
            for j2 in range(n):
                shifted = np.roll(np.roll(kernel_values, j1 - n // 2, axis=0),
                                  j2 - n // 2, axis=1)
                out += fv[j1, j2] * shifted
    return out * spec.h**spec.d


def convolve_direct(f: GridFunction, g: GridFunction) -> GridFunction:
    """Quadratic-time periodic convolution with h^d scaling."""
    if f.spec != g.spec:
        raise ValueError("grid mismatch")
    _check_size(f)
    return GridFunction(f.spec, _wrap_index_sum(f, np.asarray(g.values)))


def riesz_direct_pv(f: GridFunction, j: int, delta: float) -> GridFunction:
    """Truncated principal value of the Riesz transform.

    The kernel is the near/far split sampled pointwise, with nodes inside
    |x| < delta removed (delta in {h, 2h}) and the unpaired node at -L
    zeroed so the odd-pair cancellation of the principal value is exact on
    the remaining lattice.  In d=1 the far-part direct sum runs over all
    periodic images, folded in through the closed cotangent form of the
    lattice sum (no transform code involved); d=2 keeps the single-period
    kernel with wrapped displacements.
    """
    _check_size(f)
    spec = f.spec
    h = spec.h
    if not (abs(delta - h) < 1e-12 or abs(delta - 2 * h) < 1e-12):
        raise ValueError(f"truncation delta must be h or 2h, got {delta}")
    split = riesz_kernel_split(j, spec)
    K = split["near"].values.real + split["far"].values.real
    axes = spec.nodes()
    r = np.sqrt(sum(np.asarray(a, dtype=float) ** 2 for a in axes))
    K = np.where(r < delta - 1e-12, 0.0, K).copy()
    if spec.d == 1:
        x = axes[0]
        mask = np.abs(x) >= delta - 1e-12
        with np.errstate(divide="ignore", invalid="ignore"):
            images = np.where(
                mask,
                (0.5 / spec.L) / np.tan(np.pi * x / (2.0 * spec.L)) - 1.0 / (math.pi * x),
                0.0,
            )
        K = K + np.where(np.isfinite(images), images, 0.0)
        K[0] = 0.0  # node x = -L has no mirror partner on the lattice
    else:
        K[0, :] = 0.0
        K[:, 0] = 0.0
    return GridFunction(spec, _wrap_index_sum(f, K))


def weyl_direct(profile: str, t: float, lam: float = 1.0, x0: float = 0.0) -> complex:
    """High-accuracy half-derivative of a closed-form profile at t.

    profile 'exp_decay': g(s) = exp(-lam s); 'heat_peak': g(s) = W_s(x0), d=1.
    Adaptive quadrature of (e^{i pi/2}/sqrt(pi)) int_t^inf g'(s) (s-t)^(-1/2) ds
    split at s = t + 1 with an algebraic-weight rule near the endpoint.
    """
    if t <= 0:
        raise ValueError(f"evaluation time must be positive, got {t}")
    if profile == "exp_decay":
        if lam <= 0:
            raise ValueError(f"decay rate must be positive, got {lam}")
        gprime = lambda s: -lam * math.exp(-lam * s)
    elif profile == "heat_peak":
        gprime = lambda s: float(analytic.heat_dt([np.array([x0])], s)[0])
    else:
        raise ValueError(f"unsupported profile {profile!r}")

    # near part: integrand = g'(s) / sqrt(s - t) handled by weight='alg'
    near, _ = quad(gprime, t, t + 1.0, weight="alg", wvar=(-0.5, 0.0),
                   epsabs=1e-12, epsrel=1e-12, limit=200)
    far, _ = quad(lambda s: gprime(s) / math.sqrt(s - t), t + 1.0, np.inf,
                  epsabs=1e-12, epsrel=1e-12, limit=200)
    return 1j / math.sqrt(math.pi) * (near + far)
