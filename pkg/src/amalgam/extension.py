"""Harmonic/caloric extensions over a time grid and the maximal operators.

All continuum suprema over t > 0 are maxima over a log-spaced TimeGrid; the
grid travels with every stack so refinement studies are reproducible.  Cone
windows wrap periodically at the box boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import maximum_filter1d, uniform_filter1d

from .grid import GridFunction, GridSpec, SpectralFunction, forward, inverse
from .norms import Exponents, amalgam_norm
from .spectral import convolve

__all__ = [
    "TimeGrid",
    "ExtensionStack",
    "DilationFamily",
    "heat_profile",
    "poisson_profile",
    "extend",
    "extension_symbol",
    "radial_maximal",
    "nontangential_max",
    "hl_maximal",
    "AnnularWindow",
    "annular_window",
    "area_integral",
    "tpq_norm",
    "h1_certificate",
    "write_stack",
    "read_stack",
]

T_MIN_FLOOR = 1e-4


@dataclass(frozen=True)
class TimeGrid:
    """Log-spaced times in [t_min, t_max], strictly increasing."""

    t_min: float
    t_max: float
    count: int

    def __post_init__(self):
        if self.t_min < T_MIN_FLOOR:
            raise ValueError(f"t_min must be >= {T_MIN_FLOOR}, got {self.t_min}")
        if self.t_max <= self.t_min:
            raise ValueError(f"t_max must exceed t_min, got [{self.t_min}, {self.t_max}]")
        if self.count < 2:
            raise ValueError(f"need at least 2 time points, got {self.count}")

    @property
    def values(self) -> np.ndarray:
        return np.geomspace(self.t_min, self.t_max, self.count)

    def trapezoid_weights(self) -> np.ndarray:
        t = self.values
        w = np.empty_like(t)
        w[1:-1] = 0.5 * (t[2:] - t[:-2])
        w[0] = 0.5 * (t[1] - t[0])
        w[-1] = 0.5 * (t[-1] - t[-2])
        return w

    def refined(self, factor: int = 2) -> "TimeGrid":
        return TimeGrid(self.t_min, self.t_max, factor * (self.count - 1) + 1)

    def grid_id(self) -> str:
        return f"t{self.count}x{self.t_min:g}-{self.t_max:g}"


@dataclass(frozen=True)
class ExtensionStack:
    """Time-indexed family of slices u(., t), one GridFunction per t.

    kernel records how the slices were produced: 'poisson' and 'heat' stacks
    carry exact per-slice symbols (enabling exact time derivatives), anything
    else is 'custom'.
    """

    spec: GridSpec
    tgrid: TimeGrid
    values: np.ndarray = field(repr=False)
    kernel: str = "custom"

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        want = (self.tgrid.count,) + self.spec.shape
        if v.shape != want:
            raise ValueError(f"stack shape {v.shape} does not match {want}")
        if not np.all(np.isfinite(v)):
            raise ValueError("stack contains non-finite entries")
        v = np.ascontiguousarray(v)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        if self.kernel not in ("poisson", "heat", "custom"):
            raise ValueError(f"unknown stack kernel tag {self.kernel!r}")

    @property
    def times(self) -> np.ndarray:
        return self.tgrid.values

    def slice(self, i: int) -> GridFunction:
        return GridFunction(self.spec, self.values[i])

    def map_values(self, fn, kernel=None) -> "ExtensionStack":
        return ExtensionStack(self.spec, self.tgrid, fn(self.values),
                              self.kernel if kernel is None else kernel)


def extension_symbol(kernel: str, spec: GridSpec, t: float) -> np.ndarray:
    """Per-slice multiplier: exp(-2 pi t |xi|) or exp(-4 pi^2 t |xi|^2)."""
    xi = spec.freq_norm()
    if kernel == "poisson":
        return np.exp(-2.0 * np.pi * t * xi)
    if kernel == "heat":
        return np.exp(-4.0 * np.pi**2 * t * xi**2)
    raise ValueError(f"no extension symbol for kernel {kernel!r}")


def extend(f: GridFunction, kernel: str, tg: TimeGrid) -> ExtensionStack:
    """Extension stack with slice_t = f convolved with the t-kernel, one
    spectral pass per t."""
    F = forward(f)
    out = np.empty((tg.count,) + f.spec.shape, dtype=complex)
    for i, t in enumerate(tg.values):
        sym = extension_symbol(kernel, f.spec, float(t))
        out[i] = inverse(SpectralFunction(f.spec, sym * F.coeffs)).values
    return ExtensionStack(f.spec, tg, out, kernel)


# -- radial maximal function --------------------------------------------------


@dataclass(frozen=True)
class DilationFamily:
    """Dilation family phi_t(x) = t^-d phi(x/t), given through the exact
    transform relation phi_t^(xi) = phi^(t xi)."""

    name: str
    profile_hat: object  # callable: (spec, t) -> multiplier array
    mean: float  # integral of phi = phi^(0)

    def symbol(self, spec: GridSpec, t: float) -> np.ndarray:
        return self.profile_hat(spec, t)


def heat_profile() -> DilationFamily:
    """phi = W_1 (smooth, unit mass); dilation by t is the heat kernel at t^2."""
    return DilationFamily(
        "heat",
        lambda spec, t: np.exp(-4.0 * np.pi**2 * t**2 * spec.freq_norm() ** 2),
        1.0,
    )


def poisson_profile() -> DilationFamily:
    """phi = P_1 (unit mass); dilation by t is the Poisson kernel at t."""
    return DilationFamily(
        "poisson",
        lambda spec, t: np.exp(-2.0 * np.pi * t * spec.freq_norm()),
        1.0,
    )


def radial_maximal(f: GridFunction, family, tg: TimeGrid) -> GridFunction:
    """Pointwise max over the time grid of |f * phi_t|.

    family is a DilationFamily or a callable t -> GridFunction producing the
    dilated profile samples; zero-mean profiles are rejected.
    """
    acc = None
    if isinstance(family, DilationFamily):
        if abs(family.mean) < 1e-12:
            raise ValueError("radial maximal function needs a profile with nonzero mean")
        F = forward(f)
        for t in tg.values:
            sym = family.symbol(f.spec, float(t))
            cand = np.abs(inverse(SpectralFunction(f.spec, sym * F.coeffs)).values)
            acc = cand if acc is None else np.maximum(acc, cand)
    else:
        h = f.spec.h
        for i, t in enumerate(tg.values):
            phi_t = family(float(t))
            if i == 0:
                mass = abs(complex(h**f.spec.d * np.sum(phi_t.values)))
                if mass < 1e-12:
                    raise ValueError("radial maximal function needs a profile with nonzero mean")
            cand = np.abs(convolve(f, phi_t).values)
            acc = cand if acc is None else np.maximum(acc, cand)
    return GridFunction(f.spec, acc)


# -- window machinery ----------------------------------------------------------


def _strict_halfwidth(radius: float, h: float) -> int:
    """Largest w with w*h < radius (number of admissible offsets per side)."""
    return max(int(math.ceil(radius / h)) - 1, 0)


def _disc_offsets_maxfilter(absu: np.ndarray, rho_cells: float, n: int) -> np.ndarray:
    """Max over lattice offsets |delta| < rho_cells (Euclidean, strict) with wrap."""
    w = _strict_halfwidth(rho_cells, 1.0)
    cache = {}
    out = np.copy(absu)
    for d2 in range(-w, w + 1):
        rem = rho_cells * rho_cells - d2 * d2  # admissible delta1^2 < rem
        if rem <= 0:
            continue
        w1 = _strict_halfwidth(math.sqrt(rem), 1.0)
        if w1 not in cache:
            cache[w1] = maximum_filter1d(absu, size=min(2 * w1 + 1, n), axis=1, mode="wrap")
        shifted = np.roll(cache[w1], -d2, axis=0)
        out = np.maximum(out, shifted)
    return out


def nontangential_max(stack: ExtensionStack, aperture: float = 1.0) -> GridFunction:
    """u*(x) = max over slices t and nodes y with |x - y| < aperture * t of |u(y,t)|."""
    if aperture <= 0:
        raise ValueError(f"aperture must be positive, got {aperture}")
    spec = stack.spec
    n, h = spec.n, spec.h
    acc = None
    for i, t in enumerate(stack.times):
        absu = np.abs(stack.values[i])
        rho_cells = aperture * float(t) / h
        if spec.d == 1:
            w = _strict_halfwidth(aperture * float(t), h)
            cand = maximum_filter1d(absu, size=min(2 * w + 1, n), mode="wrap")
        else:
            if rho_cells > (n / 2) * math.sqrt(2.0) + 1:
                cand = np.full(spec.shape, absu.max())
            else:
                cand = _disc_offsets_maxfilter(absu, rho_cells, n)
        acc = cand if acc is None else np.maximum(acc, cand)
    return GridFunction(spec, acc)


def _disc_mask(n: int, rho_cells: float) -> np.ndarray:
    """0/1 mask over index offsets with wrap-distance strictly below rho_cells."""
    k = np.arange(n)
    dist = np.minimum(k, n - k)
    d2 = dist[:, None] ** 2 + dist[None, :] ** 2
    return (d2 < rho_cells * rho_cells).astype(float)


def hl_maximal(f: GridFunction, r: float) -> GridFunction:
    """Ball-average maximal function: max over dyadic radii rho in {h, 2h, ..., L}
    of the L^r node mean over the open lattice ball |y - x| < rho."""
    if r <= 0:
        raise ValueError(f"exponent r must be positive, got {r}")
    spec = f.spec
    n = spec.n
    dens = np.abs(f.values) ** r
    acc = None
    m = 1
    while m <= n // 2:  # rho = m*h, up to rho = L
        if spec.d == 1:
            mean = uniform_filter1d(dens, size=2 * m - 1, mode="wrap")
        else:
            mask = _disc_mask(n, m)
            conv = np.fft.ifftn(np.fft.fftn(dens) * np.fft.fftn(mask)).real
            mean = conv / mask.sum()
        acc = mean if acc is None else np.maximum(acc, mean)
        m *= 2
    return GridFunction(spec, acc ** (1.0 / r))


# -- area integral --------------------------------------------------------------


def _smoothstep(s):
    s = np.asarray(s, dtype=float)
    g = np.where(s > 0, np.exp(-1.0 / np.maximum(s, 1e-300)), 0.0)
    gm = np.where(1.0 - s > 0, np.exp(-1.0 / np.maximum(1.0 - s, 1e-300)), 0.0)
    return g / (g + gm)


@dataclass(frozen=True)
class AnnularWindow:
    """Smooth radial bump, 1 on 2 <= |xi| <= 4, supported in 1 <= |xi| <= 8."""

    def profile(self, rho) -> np.ndarray:
        rho = np.asarray(rho, dtype=float)
        return _smoothstep(rho - 1.0) * _smoothstep((8.0 - rho) / 4.0)

    def multiplier(self, spec: GridSpec, t: float) -> np.ndarray:
        return self.profile(t * spec.freq_norm())


def annular_window() -> AnnularWindow:
    return AnnularWindow()


def area_integral(f: GridFunction, window: AnnularWindow | None, tg: TimeGrid) -> GridFunction:
    """Discrete cone square function

        S(f)(x) = ( sum_t sum_{|y-x|<t} |(phi(.t) f^)^v(y)|^2 h^d dt / t^(d+1) )^(1/2)

    with trapezoidal dt weights on the log grid.
    """
    if window is None:
        window = annular_window()
    spec = f.spec
    n, h = spec.n, spec.h
    F = forward(f)
    weights = tg.trapezoid_weights()
    S2 = np.zeros(spec.shape)
    for t, dt in zip(tg.values, weights):
        sym = window.multiplier(spec, float(t))
        g = inverse(SpectralFunction(spec, sym * F.coeffs)).values
        sq = np.abs(g) ** 2
        w = _strict_halfwidth(float(t), h)
        if spec.d == 1:
            size = min(2 * w + 1, n)
            ball = uniform_filter1d(sq, size=size, mode="wrap") * size
        else:
            mask = _disc_mask(n, float(t) / h)
            ball = np.fft.ifftn(np.fft.fftn(sq) * np.fft.fftn(mask)).real
        S2 += ball * (h**spec.d) * dt / float(t) ** (spec.d + 1)
    return GridFunction(spec, np.sqrt(np.maximum(S2, 0.0)))


# -- stack-level norms -----------------------------------------------------------


def tpq_norm(stack: ExtensionStack, e) -> float:
    """max over slices of the (p, q) amalgam norm."""
    return max(amalgam_norm(stack.slice(i), e) for i in range(stack.tgrid.count))


@dataclass(frozen=True)
class H1Certificate:
    max_ratio: float
    per_t: np.ndarray = field(repr=False)
    tpq: float


def h1_certificate(stack: ExtensionStack, e) -> H1Certificate:
    """Observed constant in sup_x |u(x,t)| <= C t^(-d/(2 max{p,q})) ||u||_T^{p,q}."""
    if not isinstance(e, Exponents):
        e = Exponents(*e)
    d = stack.spec.d
    tpq = tpq_norm(stack, e)
    if tpq == 0:
        raise ValueError("zero stack has no certificate")
    ts = stack.times
    sups = np.array([np.max(np.abs(stack.values[i])) for i in range(len(ts))])
    per_t = ts ** (d / (2.0 * e.max_exp)) * sups / tpq
    return H1Certificate(float(per_t.max()), per_t, tpq)


# -- stack dump -------------------------------------------------------------------

_STACK_DTYPE = "complex-float64-little-endian"


def write_stack(stack: ExtensionStack, path) -> None:
    """Header + concatenated slice binaries, slices in ascending t."""
    header = (
        f"dim={stack.spec.d}\nL={stack.spec.L}\nn={stack.spec.n}\n"
        f"tmin={stack.tgrid.t_min!r}\ntmax={stack.tgrid.t_max!r}\ntcount={stack.tgrid.count}\n"
        f"kernel={stack.kernel}\nlayout=row-major\ndtype={_STACK_DTYPE}\n\n"
    )
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(np.ascontiguousarray(stack.values, dtype="<c16").tobytes())


def read_stack(path) -> ExtensionStack:
    with open(path, "rb") as fh:
        header = {}
        while True:
            line = fh.readline().decode("ascii")
            if line in ("\n", ""):
                break
            key, _, val = line.strip().partition("=")
            header[key] = val
        if header.get("dtype") != _STACK_DTYPE:
            raise ValueError(f"unsupported dtype {header.get('dtype')!r}")
        spec = GridSpec(int(header["dim"]), int(header["L"]), int(header["n"]))
        tg = TimeGrid(float(header["tmin"]), float(header["tmax"]), int(header["tcount"]))
        raw = fh.read(tg.count * spec.size * 16)
        values = np.frombuffer(raw, dtype="<c16").astype(complex)
        values = values.reshape((tg.count,) + spec.shape)
    return ExtensionStack(spec, tg, values, header.get("kernel", "custom"))
