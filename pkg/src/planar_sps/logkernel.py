"""Logarithmic interaction kernels and the quadratic forms built on them.

Three kernels are sampled on the zero-padded ``2n x 2n`` displacement grid:

* ``ln|x|``            (the full Newtonian kernel, forms ``B0`` and ``V``)
* ``ln(1 + |x|)``      (``B1`` and ``V1``)
* ``ln(1 + 1/|x|)``    (``B2`` and ``V2``)

so that ``full = plus - minus`` node by node. At the singular node of
``ln|x|`` the sample is replaced by a correction weight. Two rules exist:

``"lattice"`` (default)
    ``ln h + Z'(0)/2`` with ``Z`` the Epstein zeta function of the square
    lattice. This is the weight that cancels the ``h^2`` term of the punctured
    trapezoidal rule, leaving an ``O(h^4)`` error for smooth densities.
``"cell_average"``
    The exact mean of ``ln|x|`` over one cell. Simpler, but second order only.

``ln(1 + |x|)`` is finite at the origin and always uses its cell average.
"""

from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft
from scipy import integrate
from scipy.special import gammaln

from .grid import Field

__all__ = [
    "LogKernel",
    "build_kernel",
    "cell_average_log",
    "cell_average_log1p",
    "singular_log_weight",
    "newtonian_potential",
    "convolve",
    "V",
    "V1",
    "V2",
    "B_form",
    "direct_sum_potential",
    "radial_log_oracle",
]

# int_{[-1/2, 1/2]^2} ln|x| dx, from the closed form of int_{[0,a]^2} ln(x^2 + y^2)
UNIT_CELL_LOG = 0.5 * (np.log(0.5) - 3.0 + 0.5 * np.pi)

# Z'(0)/2 for Z(s) = sum' |k|^(-2s) = 4 zeta(s) beta(s) over Z^2 \ {0}
LATTICE_LOG = 0.5 * np.log(2.0 * np.pi) + 0.5 * np.log(2.0) - 2.0 * gammaln(0.25)

SINGULAR_RULES = ("lattice", "cell_average")


def singular_log_weight(h, rule="lattice"):
    if rule == "lattice":
        return np.log(h) + LATTICE_LOG
    if rule == "cell_average":
        return cell_average_log(h)
    raise ValueError(f"unknown singular rule {rule!r}; use one of {SINGULAR_RULES}")


def cell_average_log(h):
    """Average of ``ln|x|`` over the square ``[-h/2, h/2]^2``."""
    return np.log(h) + UNIT_CELL_LOG


def cell_average_log1p(h):
    """Average of ``ln(1 + |x|)`` over ``[-h/2, h/2]^2``.

    Integrated in polar coordinates over one eighth of the cell; the radial
    integral is done in closed form.
    """
    a = 0.5 * h

    def radial(theta):
        R = a / np.cos(theta)
        return 0.5 * (R * R - 1.0) * np.log1p(R) - 0.25 * R * R + 0.5 * R

    val, _ = integrate.quad(radial, 0.0, 0.25 * np.pi, epsabs=1e-15, epsrel=1e-14)
    return 8.0 * val / h**2


@dataclass(frozen=True, eq=False)
class LogKernel:
    grid: object
    sampled_full: np.ndarray
    sampled_plus: np.ndarray
    sampled_minus: np.ndarray
    spectral_full: np.ndarray
    spectral_plus: np.ndarray
    spectral_minus: np.ndarray
    singular_cell_value: float
    singular_rule: str = "lattice"

    def spectral(self, kind):
        try:
            return {"B0": self.spectral_full, "B1": self.spectral_plus,
                    "B2": self.spectral_minus}[kind]
        except KeyError:
            raise ValueError(f"unknown kernel kind {kind!r}; use B0, B1 or B2") from None

    def sampled(self, kind):
        try:
            return {"B0": self.sampled_full, "B1": self.sampled_plus,
                    "B2": self.sampled_minus}[kind]
        except KeyError:
            raise ValueError(f"unknown kernel kind {kind!r}; use B0, B1 or B2") from None


def _displacements(grid):
    n, h = grid.n, grid.h
    m = np.arange(2 * n)
    d = np.where(m < n, m, m - 2 * n) * h
    DX, DY = np.meshgrid(d, d, indexing="ij")
    return np.hypot(DX, DY)


_KERNEL_CACHE = {}


def build_kernel(grid, singular_rule="lattice"):
    """Sample and transform the three kernels for ``grid`` (cached per grid)."""
    key = (grid, singular_rule)
    cached = _KERNEL_CACHE.get(key)
    if cached is not None:
        return cached
    w0 = singular_log_weight(grid.h, singular_rule)
    r = _displacements(grid)
    r[0, 0] = 1.0  # placeholder, overwritten below
    full = np.log(r)
    plus = np.log1p(r)
    minus = np.log1p(1.0 / r)
    full[0, 0] = w0
    plus[0, 0] = cell_average_log1p(grid.h)
    minus[0, 0] = plus[0, 0] - full[0, 0]
    for a in (full, plus, minus):
        a.setflags(write=False)
    kernel = LogKernel(
        grid=grid,
        sampled_full=full,
        sampled_plus=plus,
        sampled_minus=minus,
        spectral_full=sfft.rfft2(full),
        spectral_plus=sfft.rfft2(plus),
        spectral_minus=sfft.rfft2(minus),
        singular_cell_value=float(full[0, 0]),
        singular_rule=singular_rule,
    )
    if len(_KERNEL_CACHE) > 8:
        _KERNEL_CACHE.clear()
    _KERNEL_CACHE[key] = kernel
    return kernel


def _check_grid(kernel, u):
    if u.grid != kernel.grid:
        raise ValueError(f"field grid {u.grid} does not match kernel grid {kernel.grid}")


def convolve(kernel, values, kind="B0"):
    """Linear convolution ``h^2 sum_k K(x_j - x_k) values_k`` of a real array."""
    n = kernel.grid.n
    spec = kernel.spectral(kind)
    rh = sfft.rfft2(values, s=(2 * n, 2 * n))
    out = sfft.irfft2(spec * rh, s=(2 * n, 2 * n))[:n, :n]
    return kernel.grid.h**2 * out


def newtonian_potential(kernel, rho):
    """``(ln|.| * rho)`` on the grid, without the ``-1/(2 pi)`` prefactor."""
    _check_grid(kernel, rho)
    if rho.is_complex:
        raise ValueError("density must be real")
    return Field(kernel.grid, convolve(kernel, rho.values, "B0"))


def B_form(kernel, kind, a, b):
    """``int int k(x - y) a(x) b(y) dx dy`` for ``kind`` in ``B0, B1, B2``."""
    _check_grid(kernel, a)
    _check_grid(kernel, b)
    return float(kernel.grid.integrate(a.values * convolve(kernel, b.values, kind)))


def _quartic(kernel, u, kind):
    _check_grid(kernel, u)
    rho = np.abs(u.values) ** 2
    return float(kernel.grid.integrate(rho * convolve(kernel, rho, kind)))


def V(kernel, u):
    return _quartic(kernel, u, "B0")


def V1(kernel, u):
    return _quartic(kernel, u, "B1")


def V2(kernel, u):
    return _quartic(kernel, u, "B2")


def direct_sum_potential(grid, rho, kind="B0", singular_rule="lattice"):
    """O(n^4) direct evaluation of ``h^2 sum_k K(x_j - x_k) rho_k``.

    Uses the same singular-cell rule as :func:`build_kernel`. Meant for small
    grids only; it is the brute-force oracle for :func:`convolve`.
    """
    X, Y = grid.coords
    x = X.ravel()
    y = Y.ravel()
    r = np.hypot(x[:, None] - x[None, :], y[:, None] - y[None, :])
    diag = r == 0
    r[diag] = 1.0
    w0 = singular_log_weight(grid.h, singular_rule)
    if kind == "B0":
        K = np.log(r)
        K[diag] = w0
    elif kind == "B1":
        K = np.log1p(r)
        K[diag] = cell_average_log1p(grid.h)
    elif kind == "B2":
        K = np.log1p(1.0 / r)
        K[diag] = cell_average_log1p(grid.h) - w0
    else:
        raise ValueError(f"unknown kernel kind {kind!r}")
    values = rho.values if isinstance(rho, Field) else np.asarray(rho)
    return grid.h**2 * (K @ values.ravel()).reshape(grid.shape)


def radial_log_oracle(density, r_eval, r_max, tol=1e-9):
    """Log potential ``(ln|.| * rho)(r)`` of a radial density by 1-D quadrature.

    Parameters
    ----------
    density : callable or (s, rho) pair of arrays
        Radial profile ``rho(s)``. Sample pairs are interpolated with a cubic
        spline.
    r_eval : sequence of float
        Radii at which to evaluate the potential.
    r_max : float
        Upper end of the radial integrals. The density must have decayed
        below ``1e-12`` (relative to its maximum) there.

    Returns
    -------
    list of float
        ``w(r) = ln r * M(r) + int_r^inf ln(s) rho(s) 2 pi s ds`` where
        ``M(r)`` is the mass inside radius ``r``.
    """
    if callable(density):
        rho = density
        peak = max(abs(rho(s)) for s in np.linspace(0.0, r_max, 257))
    else:
        from scipy.interpolate import CubicSpline

        s, vals = (np.asarray(a, dtype=float) for a in density)
        rho = CubicSpline(s, vals)
        r_max = min(r_max, float(s[-1]))
        peak = float(np.max(np.abs(vals)))
    if abs(rho(r_max)) > 1e-12 * max(peak, 1e-300):
        raise ValueError("density does not decay by r_max; extend the radial range")

    def quad(fn, a, b):
        if b <= a:
            return 0.0
        val, _ = integrate.quad(fn, a, b, epsabs=tol, epsrel=1e-12, limit=400)
        return val

    out = []
    for r in r_eval:
        r = float(r)
        outer = quad(lambda s: np.log(s) * rho(s) * 2.0 * np.pi * s if s > 0 else 0.0, r, r_max)
        if r > 0:
            inner = np.log(r) * quad(lambda s: rho(s) * 2.0 * np.pi * s, 0.0, r)
        else:
            inner = 0.0
        out.append(float(inner + outer))
    return out
