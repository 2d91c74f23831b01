"""Initial-condition builders, addressable by name."""

import math
from dataclasses import dataclass

import numpy as np

from . import spectral as sp
from .errors import DegenerateWaveError
from .model1d import State1D, TravellingWaveParams, travelling_wave_periodic
from .model2d import State2D

__all__ = [
    "Window", "ic_travelling_wave", "ic_gaussian_1d", "ic_gaussian_ridges_2d",
    "ic_geostrophic", "ic_tanh_segment_2d", "ic_radial_star_2d", "ic_perturbed_plane_wave",
    "SCENARIOS", "build_scenario", "RidgeLayout",
]

SEAM_TOL = 1e-6


@dataclass(frozen=True)
class Window:
    """Smoothed indicator ``1/2 [tanh((z - a)/delta) - tanh((z - b)/delta)]``."""

    a: float
    b: float
    delta: float

    def __post_init__(self):
        if not self.a < self.b:
            raise ValueError("window needs a < b")
        if not self.delta > 0:
            raise ValueError("window smoothing width must be positive")

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        return 0.5 * (np.tanh((z - self.a) / self.delta) - np.tanh((z - self.b) / self.delta))


# --- 1D ---------------------------------------------------------------------


def ic_travelling_wave(grid, tw, g=1.0, x0=None):
    """Periodicised travelling wave with its crest at ``x0`` (default mid-domain).

    The domain must be long enough that the exact profile's tails have
    decayed below ``1e-6`` at the periodic seam, ``exp(-lam L / 4) < 1e-6``.
    """
    if tw.kappa <= 0:
        raise DegenerateWaveError(f"kappa = {tw.kappa} gives a zero-depth travelling wave")
    if math.exp(-tw.lam * grid.length / 4) >= SEAM_TOL:
        need = 4 * math.log(1 / SEAM_TOL) / tw.lam
        raise ValueError(f"domain too short for the travelling wave: need L > {need:.4g}, "
                         f"got {grid.length:g}")
    x0 = 0.5 * grid.length if x0 is None else x0
    placed = TravellingWaveParams(tw.kappa, tw.lam, tw.c, tw.phi - x0)
    return travelling_wave_periodic(grid, 0.0, placed, g=g)


def ic_gaussian_1d(grid, x0, amplitude=1.0, width2=8.0, eta0=1.0):
    """Rest velocity over ``eta0 + A exp(-(x - x0)^2 / w^2)``."""
    x = grid.x
    eta = eta0 + amplitude * np.exp(-((x - x0) ** 2) / width2)
    return State1D(np.zeros_like(x), eta)


def ic_perturbed_plane_wave(grid, amplitude=1.0, mode=1, eps=0.1, pmode=1):
    """``A (1 + eps cos(k_p x)) exp(i k x)``, a nowhere-vanishing NLS state."""
    x = grid.x
    k = 2 * np.pi * mode / grid.length
    kp = 2 * np.pi * pmode / grid.length
    return amplitude * (1 + eps * np.cos(kp * x)) * np.exp(1j * k * x)


# --- 2D ---------------------------------------------------------------------


def ic_geostrophic(eta, grid, f0=50.0, g=1.0):
    """Velocity in geostrophic balance, ``u = -(g/f0) z x grad eta``.

    With ``z x (a, b) = (-b, a)`` this is ``(u_x, u_y) = (g/f0)(eta_y, -eta_x)``,
    divergence-free by construction.
    """
    ex = sp.spectral_derivative(eta, grid, "x")
    ey = sp.spectral_derivative(eta, grid, "y")
    return (g / f0) * ey, -(g / f0) * ex


@dataclass(frozen=True)
class RidgeLayout:
    """Two positive Gaussian ridges flanked by two weak negative anomalies.

    Each Gaussian is ``A exp(-r^2 / (2 sigma^2))``. The anomalies reuse
    ``sigma`` unless ``anomaly_sigma`` is given.
    """

    h0: float = 4.0
    sigma: float = 0.7
    dx_factor: float = 1.1
    dy_factor: float = 1.7
    anomaly_factor: float = -0.01
    anomaly_sigma: float | None = None

    def centres(self, grid):
        xc, yc = grid.centre
        dx, dy = self.dx_factor * self.sigma, self.dy_factor * self.sigma
        ridges = [(xc - dx, yc), (xc + dx, yc)]
        anomalies = [(xc, yc - dy), (xc, yc + dy)]
        return ridges, anomalies

    def elevation(self, X, Y, grid):
        ridges, anomalies = self.centres(grid)
        sa = self.sigma if self.anomaly_sigma is None else self.anomaly_sigma
        out = np.zeros_like(X)
        for (cx, cy) in ridges:
            out += self.h0 * np.exp(-((X - cx) ** 2 + (Y - cy) ** 2) / (2 * self.sigma**2))
        for (cx, cy) in anomalies:
            out += self.anomaly_factor * self.h0 * np.exp(-((X - cx) ** 2 + (Y - cy) ** 2) / (2 * sa**2))
        return out


def ic_gaussian_ridges_2d(grid, params, f0=50.0, layout=None):
    """Twin-ridge state on the background ``params.eta0`` with geostrophic velocity."""
    layout = layout or RidgeLayout()
    X, Y = grid.mesh()
    eta = params.eta0 + layout.elevation(X, Y, grid)
    ux, uy = ic_geostrophic(eta, grid, f0=f0, g=params.g)
    return State2D(ux, uy, eta)


def ic_tanh_segment_2d(grid, params, speed=1.0, x_window=(10.0, 11.0),
                       y_window=(-8.0 / 3.0, 8.0 / 3.0), delta=0.5):
    """Zonal jet segment ``u_x = W(y) W(x)`` over a flat surface ``eta0``."""
    X, Y = grid.mesh()
    wx = Window(*x_window, delta)
    wy = Window(*y_window, delta)
    ux = speed * wy(Y) * wx(X)
    return State2D(ux, np.zeros_like(ux), np.full_like(ux, params.eta0))


def ic_radial_star_2d(grid, params, arms=5, r1=2.0, r2=5.0, delta=0.5,
                      half_width=0.2, angular_delta=0.05, speed=1.0, eta=4.0):
    """Radial spokes carrying counter-clockwise tangential flow over flat ``eta``.

    Spoke ``j`` points at angle ``2 pi j / arms`` from the domain centre. The
    speed profile is ``W(r1, r2; delta; r)`` radially times a smoothed
    indicator of half-width ``half_width`` (radians) in angle.
    """
    X, Y = grid.mesh()
    xc, yc = grid.centre
    dx, dy = X - xc, Y - yc
    r = np.hypot(dx, dy)
    theta = np.arctan2(dy, dx)
    radial = Window(r1, r2, delta)(r)
    ang = Window(-half_width, half_width, angular_delta)
    angular = np.zeros_like(r)
    for j in range(arms):
        d = (theta - 2 * np.pi * j / arms + np.pi) % (2 * np.pi) - np.pi
        angular += ang(d)
    s = speed * radial * angular
    with np.errstate(invalid="ignore", divide="ignore"):
        ex = np.where(r > 0, -dy / r, 0.0)
        ey = np.where(r > 0, dx / r, 0.0)
    return State2D(s * ex, s * ey, np.full_like(r, eta))


# --- registry ---------------------------------------------------------------


def _tw(grid, params, lam=2.0, c=2.0, phi=0.0, x0=None):
    return ic_travelling_wave(grid, TravellingWaveParams(params.kappa, lam, c, phi),
                              g=params.g, x0=x0)


def _gauss(grid, params, x0=None, amplitude=1.0, width2=8.0):
    x0 = 0.5 * grid.length if x0 is None else x0
    return ic_gaussian_1d(grid, x0, amplitude, width2, params.eta0)


def _ridges(grid, params, f0=50.0, **layout):
    return ic_gaussian_ridges_2d(grid, params, f0=f0, layout=RidgeLayout(**layout))


SCENARIOS = {
    "travelling_wave": (1, _tw),
    "gaussian_1d": (1, _gauss),
    "gaussian_ridges": (2, _ridges),
    "tanh_segment": (2, ic_tanh_segment_2d),
    "radial_star": (2, ic_radial_star_2d),
    "perturbed_plane_wave": (1, ic_perturbed_plane_wave),
}


def build_scenario(name, grid, params, **kwargs):
    """Build a registered initial condition; ``kwargs`` are scenario parameters."""
    try:
        ndim, fn = SCENARIOS[name]
    except KeyError:
        raise ValueError(f"unknown scenario {name!r}") from None
    want = 1 if isinstance(grid, sp.Grid1D) else 2
    if ndim != want:
        raise ValueError(f"scenario {name!r} needs a {ndim}D grid")
    if name == "perturbed_plane_wave":
        return fn(grid, **kwargs)
    return fn(grid, params, **kwargs)
