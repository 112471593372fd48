"""Weyl half-derivative in t, in quadrature and spectral form.

The defining integral for a profile g on (0, infinity) is

    (d_t^(1/2) g)(t) = (e^{i pi/2} / sqrt(pi)) * integral_t^inf g'(s) (s-t)^(-1/2) ds.

Direct evaluation on g(t) = exp(-lambda t) gives -i sqrt(lambda) exp(-lambda t);
composing twice yields the full d/dt.  On heat-built stacks each spectral mode
is such an exponential with lambda = 4 pi^2 |xi|^2, so the half-derivative is
the per-slice multiplier -2 pi i |xi| (the fast path), and the quadrature form
is the semantic definition used to cross-check it.

The quadrature substitutes s = t + u^2:

    (d_t^(1/2) g)(t) = (2i / sqrt(pi)) * integral_0^inf g'(t + u^2) du,

with g' from a cubic spline of the profile and, when the profile carries an
exp_decay(lambda) tail tag, a closed erfc tail for u beyond sqrt(t_max - t).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import simpson
from scipy.interpolate import CubicSpline
from scipy.special import erfc

from .extension import ExtensionStack, TimeGrid
from .grid import SpectralFunction, forward, inverse

__all__ = [
    "TimeProfile",
    "half_derivative_quadrature",
    "half_derivative_stack_quadrature",
    "half_derivative_spectral",
    "time_derivative",
]

DEFAULT_TAIL_TOL = 1e-6
DEFAULT_QUAD_POINTS = 801


@dataclass(frozen=True)
class TimeProfile:
    """Scalar trace t -> u(x0, t) on a time grid, with an optional closed-form
    tail tag ('exp_decay', lambda) describing g beyond t_max."""

    tgrid: TimeGrid
    values: np.ndarray = field(repr=False)
    tail: tuple | None = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.shape != (self.tgrid.count,):
            raise ValueError(f"profile shape {v.shape} does not match grid count {self.tgrid.count}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        if self.tail is not None:
            kind, lam = self.tail
            if kind != "exp_decay" or lam <= 0:
                raise ValueError(f"unsupported tail tag {self.tail!r}")

    @staticmethod
    def from_stack(stack: ExtensionStack, index, tail=None) -> "TimeProfile":
        return TimeProfile(stack.tgrid, stack.values[(slice(None),) + tuple(np.atleast_1d(index))], tail)


def _prepare_quadrature(tgrid: TimeGrid, values: np.ndarray, tail, tail_tol):
    """Derivative spline for a (nt, ...) block of profiles, decay-checked."""
    ts = tgrid.values
    dg = CubicSpline(ts, values, axis=0).derivative()
    if tail is None:
        # the operator integrates g'; require it to have died out by t_max
        end = np.max(np.abs(dg(ts[-1])))
        peak = max(np.max(np.abs(dg(ts))), 1e-300)
        if end > tail_tol * peak:
            raise ValueError(
                "profile derivative has not decayed by t_max "
                f"(|g'(t_max)| = {end:.3e} > {tail_tol:g} * {peak:.3e}); supply a tail tag"
            )
    return dg


def _quad_eval(dg, tgrid: TimeGrid, last_values, t: float, tail, n_quad):
    ts = tgrid.values
    if not ts[0] <= t < ts[-1]:
        raise ValueError(f"evaluation point t={t} outside the grid interior [{ts[0]}, {ts[-1]})")
    u_max = math.sqrt(ts[-1] - t)
    u = np.linspace(0.0, u_max, n_quad)
    integrand = dg(t + u**2)
    val = (2j / math.sqrt(math.pi)) * simpson(integrand, x=u, axis=0)
    if tail is not None:
        _, lam = tail
        amp = last_values * math.exp(lam * ts[-1])
        val = val + (-1j) * math.sqrt(lam) * amp * np.exp(-lam * t) * erfc(math.sqrt(lam) * u_max)
    return val


def half_derivative_quadrature(prof: TimeProfile, t: float,
                               tail_tol: float = DEFAULT_TAIL_TOL,
                               n_quad: int = DEFAULT_QUAD_POINTS,
                               return_bound: bool = False):
    """Quadrature evaluation of the half-derivative of a profile at t.

    With return_bound the result comes with the truncation budget of the
    integral beyond u_max = sqrt(t_max - t): for tagged profiles the
    magnitude of the closed-form tail that was added (its own error is one
    model order smaller), otherwise the neglected mass if g' held its
    boundary value for another grid span.
    """
    dg = _prepare_quadrature(prof.tgrid, prof.values, prof.tail, tail_tol)
    ts = prof.tgrid.values
    val = complex(_quad_eval(dg, prof.tgrid, prof.values[-1], float(t), prof.tail, n_quad))
    if not return_bound:
        return val
    u_max = math.sqrt(ts[-1] - t)
    if prof.tail is not None:
        _, lam = prof.tail
        amp = prof.values[-1] * math.exp(lam * ts[-1])
        bound = abs(-1j * math.sqrt(lam) * amp * np.exp(-lam * t) * erfc(math.sqrt(lam) * u_max))
    else:
        bound = (2.0 / math.sqrt(math.pi)) * abs(complex(np.max(np.abs(dg(ts[-1]))))) * u_max
    return val, float(bound)


def half_derivative_stack_quadrature(stack: ExtensionStack, t,
                                     tail_tol: float = DEFAULT_TAIL_TOL,
                                     n_quad: int = DEFAULT_QUAD_POINTS,
                                     tail=None) -> np.ndarray:
    """Quadrature half-derivative of every node profile of a stack.

    t may be a scalar (returns one slice) or a sequence of evaluation times
    (returns a stacked array); the profile spline is built once either way.
    """
    flat = stack.values.reshape(stack.tgrid.count, -1)
    dg = _prepare_quadrature(stack.tgrid, flat, tail, tail_tol)
    times = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.stack([
        _quad_eval(dg, stack.tgrid, flat[-1], float(ti), tail, n_quad).reshape(stack.spec.shape)
        for ti in times
    ])
    return out[0] if np.isscalar(t) or getattr(t, "ndim", 0) == 0 else out


def half_derivative_spectral(stack: ExtensionStack) -> ExtensionStack:
    """Per-slice multiplier -2 pi i |xi|, valid on heat-built stacks.

    The output keeps the 'heat' tag: its slices still carry the exact heat
    time dependence per mode, so the operator may be applied again.
    """
    if stack.kernel != "heat":
        raise ValueError("spectral half-derivative needs a heat-built stack")
    sym = -2j * np.pi * stack.spec.freq_norm()
    return _apply_symbol(stack, sym)


def _apply_symbol(stack: ExtensionStack, sym: np.ndarray) -> ExtensionStack:
    out = np.empty_like(stack.values)
    for i in range(stack.tgrid.count):
        F = forward(stack.slice(i))
        out[i] = inverse(SpectralFunction(stack.spec, sym * F.coeffs)).values
    return ExtensionStack(stack.spec, stack.tgrid, out, stack.kernel)


def _log_grid_derivative(values: np.ndarray, ts: np.ndarray) -> np.ndarray:
    """Centered first differences on a nonuniform grid, one-sided at the ends."""
    out = np.empty_like(values)
    dp = ts[2:] - ts[1:-1]
    dm = ts[1:-1] - ts[:-2]
    shape = (-1,) + (1,) * (values.ndim - 1)
    dp, dm = dp.reshape(shape), dm.reshape(shape)
    out[1:-1] = (dm**2 * values[2:] - dp**2 * values[:-2] + (dp**2 - dm**2) * values[1:-1]) / (
        dp * dm * (dp + dm)
    )
    out[0] = (values[1] - values[0]) / (ts[1] - ts[0])
    out[-1] = (values[-1] - values[-2]) / (ts[-1] - ts[-2])
    return out


def time_derivative(stack: ExtensionStack) -> ExtensionStack:
    """d/dt of a stack: exact symbols for heat/poisson stacks
    (-4 pi^2 |xi|^2 and -2 pi |xi|), centered differences otherwise."""
    if stack.tgrid.count < 3:
        raise ValueError("time derivative needs at least 3 slices")
    xi = stack.spec.freq_norm()
    if stack.kernel == "heat":
        return _apply_symbol(stack, -4.0 * np.pi**2 * xi**2)
    if stack.kernel == "poisson":
        return _apply_symbol(stack, -2.0 * np.pi * xi)
    dv = _log_grid_derivative(stack.values, stack.times)
    return ExtensionStack(stack.spec, stack.tgrid, dv, "custom")
