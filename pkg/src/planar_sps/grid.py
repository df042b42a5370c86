"""Uniform square grids, sampled fields and the function-space norms on them.

The plane is truncated to the periodic box ``[-L, L)^2`` sampled at ``n``
points per axis. Integrals are ``h^2`` times plain sums and derivatives are
spectral.
"""

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.fft as sfft

__all__ = [
    "Grid2D",
    "Field",
    "build_grid",
    "gaussian_field",
    "mass",
    "dirichlet_energy",
    "lp_norm",
    "star_norm_sq",
    "x_norm_sq",
    "dilate",
    "dilate_report",
    "normalize_mass",
    "laplacian",
    "shift",
]


@dataclass(frozen=True)
class Grid2D:
    """Square grid on ``[-L, L)^2`` with ``n`` points per axis."""

    L: float
    n: int

    def __post_init__(self):
        if not self.L > 0:
            raise ValueError(f"half-width must be positive, got L={self.L}")
        n = int(self.n)
        if n != self.n or n < 8 or n & (n - 1):
            raise ValueError(
                f"resolution must be a power of two >= 8, got n={self.n}")

    @property
    def h(self):
        return 2.0 * self.L / self.n

    @property
    def shape(self):
        return (self.n, self.n)

    @cached_property
    def axis(self):
        return -self.L + self.h * np.arange(self.n)

    @cached_property
    def coords(self):
        """``(X, Y)`` with ``X[j, k] = -L + j h`` and ``Y[j, k] = -L + k h``."""
        return np.meshgrid(self.axis, self.axis, indexing="ij")

    @cached_property
    def radius(self):
        X, Y = self.coords
        return np.hypot(X, Y)

    @cached_property
    def wavenumbers(self):
        k = 2.0 * np.pi * sfft.fftfreq(self.n, d=self.h)
        return np.meshgrid(k, k, indexing="ij")

    @cached_property
    def k2(self):
        KX, KY = self.wavenumbers
        return KX**2 + KY**2

    def integrate(self, q):
        return self.h**2 * np.sum(q)

    def inner(self, a, b):
        """Real L^2 inner product ``Re <a, b>`` of two sample arrays."""
        return self.h**2 * np.real(np.vdot(a, b))

    def to_dict(self):
        return {"L": float(self.L), "n": int(self.n)}


def build_grid(L, n):
    return Grid2D(float(L), int(n))


@dataclass(frozen=True, eq=False)
class Field:
    """Samples of a scalar function on a :class:`Grid2D`.

    ``values[j, k]`` is the value at ``(-L + j h, -L + k h)``. Fields support
    the vector-space operations so that ``u + 0.1 * v`` does what it reads.
    """

    grid: Grid2D
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.asarray(self.values)
        if values.shape != self.grid.shape:
            raise ValueError(
                f"values of shape {values.shape} do not match grid {self.grid.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("field values must be finite")
        if not np.iscomplexobj(values):
            values = values.astype(np.float64, copy=False)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def is_complex(self):
        return np.iscomplexobj(self.values)

    def with_values(self, values):
        return Field(self.grid, values)

    def _check(self, other):
        if isinstance(other, Field):
            if other.grid != self.grid:
                raise ValueError("fields live on different grids")
            return other.values
        return other

    def __add__(self, other):
        return Field(self.grid, self.values + self._check(other))

    __radd__ = __add__

    def __sub__(self, other):
        return Field(self.grid, self.values - self._check(other))

    def __rsub__(self, other):
        return Field(self.grid, self._check(other) - self.values)

    def __mul__(self, other):
        return Field(self.grid, self.values * self._check(other))

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return Field(self.grid, self.values / scalar)

    def __neg__(self):
        return Field(self.grid, -self.values)

    @classmethod
    def zeros(cls, grid, complex=False):
        return cls(grid, np.zeros(grid.shape, dtype=np.complex128 if complex else np.float64))


def gaussian_field(grid, amplitude=1.0, width=1.0, center=(0.0, 0.0)):
    """``amplitude * exp(-|x - center|^2 / (2 width^2))`` sampled on ``grid``."""
    if not width > 0:
        raise ValueError(f"width must be positive, got {width}")
    X, Y = grid.coords
    r2 = (X - center[0]) ** 2 + (Y - center[1]) ** 2
    return Field(grid, amplitude * np.exp(-r2 / (2.0 * width**2)))


def mass(u):
    return float(u.grid.integrate(np.abs(u.values) ** 2))


def dirichlet_energy(u):
    """``A(u) = int |grad u|^2`` evaluated on the Fourier side."""
    g = u.grid
    uh = sfft.fft2(u.values)
    return float(np.sum(g.k2 * np.abs(uh) ** 2) * g.h**2 / g.n**2)


def laplacian(values, grid):
    """Spectral Laplacian of a sample array."""
    return sfft.ifft2(-grid.k2 * sfft.fft2(values)) if np.iscomplexobj(values) \
        else sfft.ifft2(-grid.k2 * sfft.fft2(values)).real


def lp_norm(u, r):
    if r < 1:
        raise ValueError(f"exponent must be >= 1, got r={r}")
    return float(u.grid.integrate(np.abs(u.values) ** r) ** (1.0 / r))


def star_norm_sq(u):
    """Log-weighted norm ``int ln(1 + |x|) |u|^2``."""
    return float(u.grid.integrate(np.log1p(u.grid.radius) * np.abs(u.values) ** 2))


def x_norm_sq(u):
    return mass(u) + dirichlet_energy(u) + star_norm_sq(u)


def _interp_matrix(grid, t):
    """Trigonometric interpolation weights for sampling at ``t * axis``.

    Row ``j`` holds the weights that evaluate the band-limited interpolant of
    a periodic sequence at ``t * x_j``. Targets outside ``[-L, L)`` get a zero
    row.
    """
    n, h = grid.n, grid.h
    target = t * grid.axis
    # offset in units of h from each source node
    s = (target[:, None] - grid.axis[None, :]) / h
    # periodic Dirichlet kernel for even n with a symmetric Nyquist term
    with np.errstate(invalid="ignore", divide="ignore"):
        w = np.sin(np.pi * s) / (n * np.tan(np.pi * s / n))
    r = np.mod(s, n)
    w[(r < 1e-13) | (n - r < 1e-13)] = 1.0
    outside = (target < -grid.L) | (target >= grid.L)
    w[outside] = 0.0
    return w, outside


def _bilinear(values, grid, t):
    from scipy.ndimage import map_coordinates

    idx = (t * grid.axis + grid.L) / grid.h
    J, K = np.meshgrid(idx, idx, indexing="ij")
    kw = dict(order=1, mode="constant", cval=0.0, prefilter=False)
    if np.iscomplexobj(values):
        return (map_coordinates(values.real, [J, K], **kw)
                + 1j * map_coordinates(values.imag, [J, K], **kw))
    return map_coordinates(values, [J, K], **kw)


def dilate_report(u, t, method="spectral"):
    """Mass-preserving dilation ``u_t(x) = t u(t x)`` with a truncation check.

    Returns ``(u_t, truncated, lost_mass)``. For ``t < 1`` the samples of ``u``
    that would map outside the box are dropped; ``lost_mass`` is their share
    of ``mass(u)`` and ``truncated`` flags a share above ``1e-12``.
    """
    if not t > 0:
        raise ValueError(f"dilation factor must be positive, got t={t}")
    g = u.grid
    if t == 1:
        return u, False, 0.0
    if method == "spectral":
        M, _ = _interp_matrix(g, t)
        vals = t * (M @ u.values @ M.T)
    elif method == "bilinear":
        vals = t * _bilinear(u.values, g, t)
    else:
        raise ValueError(f"unknown interpolation method {method!r}")
    # for t < 1 only the part of u inside [-tL, tL)^2 is ever sampled
    lost = 0.0
    if t < 1:
        X, Y = g.coords
        lo, hi = -t * g.L, t * g.L
        outside = (X < lo) | (X >= hi) | (Y < lo) | (Y >= hi)
        total = mass(u)
        if total > 0:
            lost = float(g.integrate(np.abs(u.values[outside]) ** 2) / total)
    return Field(g, vals), lost > 1e-12, lost


def dilate(u, t, method="spectral"):
    return dilate_report(u, t, method)[0]


def normalize_mass(u, c):
    if not c > 0:
        raise ValueError(f"target mass must be positive, got c={c}")
    m = mass(u)
    if m == 0:
        raise ValueError("cannot normalize the zero field")
    return Field(u.grid, u.values * np.sqrt(c / m))


def shift(u, dj, dk):
    """Periodic shift by a grid vector: ``result(x) = u(x - (dj, dk) h)``."""
    return Field(u.grid, np.roll(u.values, (dj, dk), axis=(0, 1)))
