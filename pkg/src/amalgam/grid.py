"""Periodic sampling grids, analytic-family sampling and the Fourier layer.

Everything downstream lives on the periodic box [-L, L)^d with n samples per
axis and spacing h = 2L/n, nodes at cell left edges x_k = -L + k*h.  The
divisibility constraint n % (2L) == 0 makes every unit cube anchored at an
integer lattice point a whole number of cells, which the discrete amalgam
norm relies on.

Fourier convention: the forward transform approximates

    F(xi) = integral f(x) exp(-2 pi i x.xi) dx

on the frequency lattice xi_k = k/(2L), k in {-n/2, ..., n/2-1}^d, so the
heat kernel at time t transforms to exp(-4 pi^2 t |xi|^2) and the Poisson
kernel to exp(-2 pi t |xi|).  The inverse is the matching Riemann sum of the
inversion integral; forward/inverse round-trip is exact to rounding.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import analytic

__all__ = [
    "GridSpec",
    "GridFunction",
    "SpectralFunction",
    "FunctionSpec",
    "make_grid",
    "sample",
    "fourier_transform",
    "forward",
    "inverse",
    "lp_norm",
    "sup_norm",
    "write_grid_function",
    "read_grid_function",
]


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic box [-L, L)^d with n samples per axis."""

    d: int
    L: int
    n: int

    def __post_init__(self):
        if self.d not in (1, 2):
            raise ValueError(f"dimension must be 1 or 2, got {self.d}")
        if not isinstance(self.L, (int, np.integer)) or self.L < 1:
            raise ValueError(f"half extent L must be a positive integer, got {self.L!r}")
        n = self.n
        if not isinstance(n, (int, np.integer)) or n < 2 or (n & (n - 1)) != 0:
            raise ValueError(f"points per axis n must be a power of two >= 2, got {n!r}")
        if n % (2 * self.L) != 0:
            raise ValueError(
                f"n={n} is not divisible by 2L={2 * self.L}: unit cubes would not "
                "contain a whole number of cells"
            )

    @property
    def h(self) -> float:
        return 2.0 * self.L / self.n

    @property
    def shape(self) -> tuple:
        return (self.n,) * self.d

    @property
    def size(self) -> int:
        return self.n**self.d

    def axis_nodes(self) -> np.ndarray:
        """Cell-left-edge nodes -L + k*h of one axis."""
        return -self.L + self.h * np.arange(self.n)

    def nodes(self) -> list:
        """Per-axis node arrays broadcast to the full grid shape ('ij' order)."""
        x = self.axis_nodes()
        if self.d == 1:
            return [x]
        return list(np.meshgrid(x, x, indexing="ij"))

    def axis_freqs(self) -> np.ndarray:
        """Frequencies k/(2L) of one axis in FFT order."""
        return np.fft.fftfreq(self.n, d=self.h)

    def freqs(self) -> list:
        """Per-axis frequency arrays broadcast to the full grid shape."""
        xi = self.axis_freqs()
        if self.d == 1:
            return [xi]
        return list(np.meshgrid(xi, xi, indexing="ij"))

    def freq_norm(self) -> np.ndarray:
        """|xi| on the frequency lattice."""
        fs = self.freqs()
        return np.sqrt(sum(f**2 for f in fs))

    def index_of(self, point) -> tuple:
        """Grid index of a point that lies exactly on a node."""
        pt = np.atleast_1d(np.asarray(point, dtype=float))
        idx = (pt + self.L) / self.h
        k = np.rint(idx).astype(int)
        if not np.allclose(idx, k, atol=1e-9):
            raise ValueError(f"point {point} is not a grid node")
        return tuple(k % self.n)

    def grid_id(self) -> str:
        return f"d{self.d}-L{self.L}-n{self.n}"


def _as_values(spec: GridSpec, values) -> np.ndarray:
    v = np.asarray(values, dtype=complex)
    if v.shape == (spec.size,):
        v = v.reshape(spec.shape)
    if v.shape != spec.shape:
        raise ValueError(f"values shape {v.shape} does not match grid shape {spec.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("values contain non-finite entries")
    v = np.ascontiguousarray(v)
    v.setflags(write=False)
    return v


@dataclass(frozen=True)
class GridFunction:
    """Complex samples on a grid, row-major over axes, immutable."""

    spec: GridSpec
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "values", _as_values(self.spec, self.values))

    def _binary(self, other, op):
        if not isinstance(other, GridFunction):
            return NotImplemented
        if other.spec != self.spec:
            raise ValueError("grid mismatch")
        return GridFunction(self.spec, op(self.values, other.values))

    def __add__(self, other):
        return self._binary(other, np.add)

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __mul__(self, c):
        if isinstance(c, (int, float, complex, np.number)):
            return GridFunction(self.spec, self.values * c)
        return NotImplemented

    __rmul__ = __mul__

    def __neg__(self):
        return GridFunction(self.spec, -self.values)

    def at(self, point) -> complex:
        """Value at a point lying exactly on a node."""
        return complex(self.values[self.spec.index_of(point)])


@dataclass(frozen=True)
class SpectralFunction:
    """Fourier coefficients on the frequency lattice k/(2L), FFT ordering."""

    spec: GridSpec
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _as_values(self.spec, self.coeffs))

    def energy(self) -> float:
        """Parseval energy (1/2L)^d * sum |coeffs|^2."""
        return float(np.sum(np.abs(self.coeffs) ** 2) / (2.0 * self.spec.L) ** self.spec.d)


def make_grid(d: int, L: int, n: int) -> GridSpec:
    """Validated grid: d in {1,2}, integer L >= 1, n a power of two, n % 2L == 0."""
    return GridSpec(d, L, n)


def _phase(spec: GridSpec) -> np.ndarray:
    # (-1)^k per axis: carries the node offset -L into the standard DFT.
    k = np.rint(np.fft.fftfreq(spec.n) * spec.n).astype(int)
    p = np.where(k % 2 == 0, 1.0, -1.0)
    if spec.d == 1:
        return p
    return np.multiply.outer(p, p)


def forward(f: GridFunction) -> SpectralFunction:
    """Forward transform: h^d-weighted Riemann sum of the Fourier integral."""
    c = f.spec.h**f.spec.d * _phase(f.spec) * np.fft.fftn(f.values)
    return SpectralFunction(f.spec, c)


def inverse(F: SpectralFunction) -> GridFunction:
    """Inverse transform; forward(inverse(F)) == F to rounding."""
    v = np.fft.ifftn(_phase(F.spec) * F.coeffs) / F.spec.h**F.spec.d
    return GridFunction(F.spec, v)


def fourier_transform(obj, direction: str = "forward"):
    """Dispatching wrapper over forward/inverse."""
    if direction == "forward":
        if not isinstance(obj, GridFunction):
            raise TypeError("forward transform expects a GridFunction")
        return forward(obj)
    if direction == "inverse":
        if not isinstance(obj, SpectralFunction):
            raise TypeError("inverse transform expects a SpectralFunction")
        return inverse(obj)
    raise ValueError(f"unknown direction {direction!r}")


def lp_norm(f: GridFunction, p: float) -> float:
    """(h^d sum |f|^p)^(1/p); a quasi-norm for p < 1."""
    if p <= 0:
        raise ValueError(f"exponent p must be positive, got {p}")
    h = f.spec.h
    return float((h**f.spec.d * np.sum(np.abs(f.values) ** p)) ** (1.0 / p))


def sup_norm(f: GridFunction) -> float:
    return float(np.max(np.abs(f.values)))


# ---------------------------------------------------------------------------
# Analytic family sampling
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FunctionSpec:
    """Named analytic family with parameters, e.g. FunctionSpec('gaussian', {'width': 1})."""

    family: str
    params: dict = field(default_factory=dict)

    @staticmethod
    def parse(text: str) -> "FunctionSpec":
        """Parse 'name' or 'name:key=val,key=val' (values float unless key is path/seed)."""
        name, _, rest = text.partition(":")
        params = {}
        if rest:
            for item in rest.split(","):
                key, _, val = item.partition("=")
                if not _:
                    raise ValueError(f"malformed function parameter {item!r}")
                if key == "path":
                    params[key] = val
                elif key in ("seed",):
                    params[key] = int(val)
                else:
                    params[key] = float(val)
        return FunctionSpec(name.strip(), params)


def _centers(spec: GridSpec, params, key="center"):
    c = params.get(key, 0.0)
    if np.isscalar(c):
        return (float(c),) * spec.d
    return tuple(float(v) for v in c)


def bandlimited_random(spec: GridSpec, seed: int, lo: float, hi: float) -> GridFunction:
    """Real mean-zero sample with spectrum supported on lo <= |xi| <= hi."""
    if not 0 < lo < hi:
        raise ValueError(f"band must satisfy 0 < lo < hi, got [{lo}, {hi}]")
    rng = np.random.Generator(np.random.PCG64(seed))
    noise = rng.standard_normal(spec.shape)
    xi = spec.freq_norm()
    mask = (xi >= lo) & (xi <= hi)
    # drop unpaired Nyquist bins so the spectrum stays Hermitian
    nyq = spec.n // 2
    if spec.d == 1:
        mask[nyq] = False
    else:
        mask[nyq, :] = False
        mask[:, nyq] = False
    coeffs = np.fft.fftn(noise) * mask
    v = np.fft.ifftn(coeffs).real
    scale = np.sqrt(spec.h**spec.d * np.sum(v**2))
    if scale == 0:
        raise ValueError(f"band [{lo}, {hi}] contains no frequency lattice points")
    return GridFunction(spec, v / scale)


def sample(family, spec: GridSpec) -> GridFunction:
    """Pointwise samples of an analytic family at the grid nodes.

    Families: gaussian{center,width}, poisson_kernel{t}, heat_kernel{t},
    indicator{lo,hi}, haar{corner,side}, bandlimited_random{seed,lo,hi},
    from_file{path}.  Kernel families are plain pointwise evaluations; the
    box-consistent kernels live in amalgam.kernels.
    """
    if isinstance(family, str):
        family = FunctionSpec.parse(family)
    name, params = family.family, family.params
    axes = spec.nodes()

    if name == "gaussian":
        c = _centers(spec, params)
        w = float(params.get("width", 1.0))
        if w <= 0:
            raise ValueError(f"gaussian width must be positive, got {w}")
        r2 = sum((a - ci) ** 2 for a, ci in zip(axes, c))
        return GridFunction(spec, np.exp(-r2 / w**2))

    if name == "poisson_kernel":
        t = float(params.get("t", 1.0))
        return GridFunction(spec, analytic.poisson(axes, t))

    if name == "heat_kernel":
        t = float(params.get("t", 1.0))
        return GridFunction(spec, analytic.heat(axes, t))

    if name == "indicator":
        lo, hi = float(params.get("lo", 0.0)), float(params.get("hi", 1.0))
        v = np.ones(spec.shape)
        for a in axes:
            v = v * ((a >= lo) & (a < hi))
        return GridFunction(spec, v)

    if name == "haar":
        corner = _centers(spec, params, key="corner")
        side = float(params.get("side", 1.0))
        v = np.ones(spec.shape)
        for a, c0 in zip(axes, corner):
            inside = (a >= c0) & (a < c0 + side)
            sgn = np.where(a < c0 + side / 2, 1.0, -1.0)
            v = v * inside * sgn
        return GridFunction(spec, v)

    if name == "bandlimited_random":
        seed = int(params.get("seed", 0))
        lo = float(params.get("lo", 0.125))
        hi = float(params.get("hi", 0.5))
        return bandlimited_random(spec, seed, lo, hi)

    if name == "from_file":
        f = read_grid_function(params["path"])
        if f.spec != spec:
            raise ValueError(f"file grid {f.spec} does not match requested grid {spec}")
        return f

    raise ValueError(f"unknown function family {name!r}")


# ---------------------------------------------------------------------------
# File format: text header (key=value lines, blank line) + raw binary samples,
# or CSV with index columns then re, im.
# ---------------------------------------------------------------------------

_HEADER_DTYPE = "complex-float64-little-endian"


def write_grid_function(f: GridFunction, path) -> None:
    path = str(path)
    if path.endswith(".csv"):
        with open(path, "w") as fh:
            fh.write(f"# dim={f.spec.d},L={f.spec.L},n={f.spec.n}\n")
            idx_cols = ["i"] if f.spec.d == 1 else ["i", "j"]
            fh.write(",".join(idx_cols + ["re", "im"]) + "\n")
            flat = f.values.reshape(-1)
            for k, z in enumerate(flat):
                if f.spec.d == 1:
                    fh.write(f"{k},{float(z.real)!r},{float(z.imag)!r}\n")
                else:
                    i, j = divmod(k, f.spec.n)
                    fh.write(f"{i},{j},{float(z.real)!r},{float(z.imag)!r}\n")
        return
    header = (
        f"dim={f.spec.d}\nL={f.spec.L}\nn={f.spec.n}\n"
        f"layout=row-major\ndtype={_HEADER_DTYPE}\n\n"
    )
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(np.ascontiguousarray(f.values, dtype="<c16").tobytes())


def read_grid_function(path) -> GridFunction:
    path = str(path)
    if path.endswith(".csv"):
        with open(path) as fh:
            first = fh.readline().strip()
        if not first.startswith("#"):
            raise ValueError("CSV is missing its '# dim=..,L=..,n=..' header line")
        meta = dict(item.split("=") for item in first.lstrip("# ").split(","))
        spec = GridSpec(int(meta["dim"]), int(meta["L"]), int(meta["n"]))
        rows = np.loadtxt(path, delimiter=",", skiprows=2, ndmin=2)
        values = rows[:, -2] + 1j * rows[:, -1]
        return GridFunction(spec, values)
    with open(path, "rb") as fh:
        header = {}
        while True:
            line = fh.readline().decode("ascii")
            if line in ("\n", ""):
                break
            key, _, val = line.strip().partition("=")
            header[key] = val
        if header.get("dtype") != _HEADER_DTYPE:
            raise ValueError(f"unsupported dtype {header.get('dtype')!r}")
        if header.get("layout") != "row-major":
            raise ValueError(f"unsupported layout {header.get('layout')!r}")
        spec = GridSpec(int(header["dim"]), int(header["L"]), int(header["n"]))
        raw = fh.read(spec.size * 16)
        values = np.frombuffer(raw, dtype="<c16").astype(complex)
    return GridFunction(spec, values)
