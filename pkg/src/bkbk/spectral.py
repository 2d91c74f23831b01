"""Periodic-domain Fourier machinery.

All transforms use the real-to-complex (``rfft``) layout: for a 1D field of
``n`` samples the spectrum holds modes ``j = 0 .. n/2``; in 2D the last
axis (x) is halved and the first axis (y) carries signed modes. The forward
transform carries the ``1/n`` factor so a round trip is the identity and
coefficient magnitudes do not depend on resolution.

Arrays in 2D are indexed ``[iy, ix]`` (row-major, x fastest).
"""

import os
from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft

from .errors import NonFiniteFieldError, SingularModeError

__all__ = [
    "Grid1D", "Grid2D", "forward", "inverse", "spectral_derivative",
    "derivative_hat", "dealias_23", "dealias_mask", "mode_solve", "mode_solve_1d",
    "ModeSolver", "integrate",
]

MAX_COND = 1e12


def _workers():
    try:
        return max(1, int(os.environ.get("BKBK_THREADS", "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class Grid1D:
    """Uniform periodic grid on ``[0, length)``."""

    length: float
    n: int
    k: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.n < 8 or self.n % 2:
            raise ValueError(f"n must be even and >= 8, got {self.n}")
        if not self.length > 0:
            raise ValueError("length must be positive")
        k = 2 * np.pi / self.length * np.arange(self.n // 2 + 1)
        k.setflags(write=False)
        object.__setattr__(self, "k", k)

    @property
    def dx(self):
        return self.length / self.n

    @property
    def x(self):
        return np.arange(self.n) * self.dx

    @property
    def k_signed(self):
        """Wavenumbers of the full complex layout, ``fftfreq`` ordering."""
        return 2 * np.pi / self.length * np.fft.fftfreq(self.n, 1.0 / self.n)

    @property
    def shape(self):
        return (self.n,)

    @property
    def spectral_shape(self):
        return (self.n // 2 + 1,)

    @property
    def cell_area(self):
        return self.dx


@dataclass(frozen=True)
class Grid2D:
    """Uniform periodic grid, ``x`` in ``[0, lx)`` and ``y`` in ``[-ly/2, ly/2)``.

    The y origin sits on the domain mid-line so that features placed "at
    y = 0" are centred in the box.
    """

    lx: float
    ly: float
    nx: int
    ny: int
    kx: np.ndarray = field(init=False, repr=False, compare=False)
    ky: np.ndarray = field(init=False, repr=False, compare=False)
    k2: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        for name, n in (("nx", self.nx), ("ny", self.ny)):
            if n < 8 or n % 2:
                raise ValueError(f"{name} must be even and >= 8, got {n}")
        if not (self.lx > 0 and self.ly > 0):
            raise ValueError("domain lengths must be positive")
        kx = (2 * np.pi / self.lx * np.arange(self.nx // 2 + 1))[None, :]
        ky = (2 * np.pi / self.ly * np.fft.fftfreq(self.ny, 1.0 / self.ny))[:, None]
        k2 = kx**2 + ky**2
        for a in (kx, ky, k2):
            a.setflags(write=False)
        object.__setattr__(self, "kx", kx)
        object.__setattr__(self, "ky", ky)
        object.__setattr__(self, "k2", k2)

    @property
    def dx(self):
        return self.lx / self.nx

    @property
    def dy(self):
        return self.ly / self.ny

    @property
    def x(self):
        return np.arange(self.nx) * self.dx

    @property
    def y(self):
        return -0.5 * self.ly + np.arange(self.ny) * self.dy

    def mesh(self):
        """Coordinate arrays ``X, Y`` of shape ``(ny, nx)``."""
        return np.meshgrid(self.x, self.y)

    @property
    def centre(self):
        return (0.5 * self.lx, 0.0)

    @property
    def shape(self):
        return (self.ny, self.nx)

    @property
    def spectral_shape(self):
        return (self.ny, self.nx // 2 + 1)

    @property
    def cell_area(self):
        return self.dx * self.dy


def _check_finite(f):
    if not np.all(np.isfinite(f)):
        raise NonFiniteFieldError()


def forward(f):
    """Real field -> rfft coefficients (1D or 2D), scaled by ``1/n``."""
    f = np.asarray(f, dtype=float)
    if f.ndim == 1:
        return sfft.rfft(f, norm="forward", workers=_workers())
    return sfft.rfft2(f, norm="forward", workers=_workers())


def inverse(f_hat, shape):
    if len(shape) == 1:
        return sfft.irfft(f_hat, n=shape[0], norm="forward", workers=_workers())
    return sfft.irfft2(f_hat, s=shape, norm="forward", workers=_workers())


def _nyquist_zero(f_hat, grid, axis):
    if isinstance(grid, Grid1D):
        f_hat[..., -1] = 0.0
    elif axis == "x":
        f_hat[..., :, -1] = 0.0
    else:
        f_hat[..., grid.ny // 2, :] = 0.0
    return f_hat


def derivative_hat(f_hat, grid, axis="x", order=1):
    """Differentiate in coefficient space; returns a new array."""
    if isinstance(grid, Grid1D):
        k = grid.k
    else:
        k = grid.kx if axis == "x" else grid.ky
    out = f_hat * (1j * k) ** order
    if order % 2:
        _nyquist_zero(out, grid, axis)
    return out


def spectral_derivative(f, grid, axis="x", order=1):
    """Fourier-collocation derivative of a real periodic field.

    Parameters
    ----------
    f : ndarray
        Samples on ``grid``.
    axis : {"x", "y"}
    order : int
        1 to 4. The Nyquist mode is dropped for odd orders so the result
        stays real.
    """
    if not 1 <= order <= 4:
        raise ValueError("order must be between 1 and 4")
    if axis not in ("x", "y") or (axis == "y" and isinstance(grid, Grid1D)):
        raise ValueError(f"bad axis {axis!r} for {type(grid).__name__}")
    f = np.asarray(f, dtype=float)
    if f.shape != grid.shape:
        raise ValueError(f"field shape {f.shape} does not match grid {grid.shape}")
    _check_finite(f)
    return inverse(derivative_hat(forward(f), grid, axis, order), grid.shape)


def _signed_modes(m):
    return np.fft.fftfreq(m, 1.0 / m)


def dealias_mask(spectral_shape):
    """Boolean mask of modes kept by the 2/3 rule for an rfft layout."""
    if len(spectral_shape) == 1:
        n = 2 * (spectral_shape[0] - 1)
        return np.arange(spectral_shape[0]) <= n // 3
    ny, mx = spectral_shape
    nx = 2 * (mx - 1)
    keep_x = np.arange(mx) <= nx // 3
    keep_y = np.abs(_signed_modes(ny)) <= ny // 3
    return keep_y[:, None] & keep_x[None, :]


def dealias_23(f_hat, ndim=None):
    """Zero every mode with ``|j| > floor(n/3)`` along each axis.

    ``f_hat`` is in rfft layout; the point counts are recovered from its
    shape (grids always have even ``n``). Leading axes beyond the spatial
    ones are treated as a stack of fields; pass ``ndim`` to disambiguate
    a stack of 1D spectra.
    """
    f_hat = np.asarray(f_hat)
    if ndim is None:
        ndim = 1 if f_hat.ndim == 1 else 2
    mask = dealias_mask(f_hat.shape[-ndim:])
    return np.where(mask, f_hat, 0)


def integrate(f, grid):
    """Periodic quadrature ``dx * sum(f)``; spectrally exact for smooth data."""
    return float(np.sum(f) * grid.cell_area)


def _cond(a):
    # np.linalg.cond on a stack of small matrices
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.linalg.svd(a, compute_uv=False)
        c = s[..., 0] / s[..., -1]
    return np.where(np.isfinite(c), c, np.inf)


def _check_conditioning(a, wavenumbers, max_cond):
    cond = _cond(a)
    bad = np.argwhere(~(cond <= max_cond))
    if bad.size:
        idx = tuple(int(i) for i in bad[0])
        k = None if wavenumbers is None else np.asarray(wavenumbers)[idx]
        raise SingularModeError(idx, k, cond[idx])


def mode_solve(a, rhs, wavenumbers=None, max_cond=MAX_COND):
    """Solve ``a[i] @ x[i] = rhs[i]`` for every mode ``i``.

    ``a`` has shape ``(..., m, m)`` and ``rhs`` shape ``(..., m)``. Raises
    :class:`SingularModeError` naming the first mode whose condition number
    exceeds ``max_cond``.
    """
    a = np.asarray(a, dtype=complex)
    rhs = np.asarray(rhs, dtype=complex)
    _check_conditioning(a, wavenumbers, max_cond)
    return np.linalg.solve(a, rhs[..., None])[..., 0]


def mode_solve_1d(a, rhs, wavenumbers=None):
    """Per-wavenumber 2x2 solve used by the 1D implicit stage."""
    a = np.asarray(a)
    if a.shape[-2:] != (2, 2):
        raise ValueError("expected 2x2 mode matrices")
    return mode_solve(a, rhs, wavenumbers)


class ModeSolver:
    """Pre-factorised per-mode inverse for repeated implicit solves.

    ``matrices`` has shape ``(*modes, m, m)``; :meth:`solve` takes and
    returns field stacks of shape ``(m, *modes)``, the layout used by the
    time steppers.
    """

    def __init__(self, matrices, wavenumbers=None, max_cond=MAX_COND):
        matrices = np.asarray(matrices, dtype=complex)
        m = matrices.shape[-1]
        _check_conditioning(matrices, wavenumbers, max_cond)
        inv = np.linalg.inv(matrices)
        nd = matrices.ndim - 2
        # (*modes, m, m) -> (m, m, *modes)
        self.inv = np.ascontiguousarray(np.moveaxis(inv, (nd, nd + 1), (0, 1)))
        self.m = m

    def solve(self, rhs):
        return np.einsum("ij...,j...->i...", self.inv, rhs)
