"""Regularised two-dimensional BKBK system.

State ``(u_x, u_y, eta)`` on a periodic :class:`~bkbk.spectral.Grid2D`.
The dynamics are

    u_t + (v . grad) u + u_j grad v^j = grad B
    eta_t + div(eta v) = 0

with transport velocity ``v = u - kappa grad ln eta`` and Bernoulli function

    B = |m|^2 / (2 eta^2) - (kappa/eta) div m - g (1 - alpha^2 Lap) eta,   m = eta u.

``alpha`` is the slope-penalty length; it enters only through ``B``.
"""

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import spectral as sp
from .model1d import check_depth

__all__ = [
    "Params2D", "State2D", "CasimirFn", "CASIMIR_MASS", "CASIMIR_Q", "CASIMIR_Q2",
    "casimir_from_name", "variational_derivatives_2d", "rhs_2d",
    "potential_vorticity", "casimir_2d", "hamiltonian_2d", "stability_symbol_2d",
    "SymbolResult", "equilibrium_residual_2d", "BKBK2DModel",
]


@dataclass(frozen=True)
class Params2D:
    kappa: float = 0.0
    g: float = 1.0
    alpha: float = 0.0
    eta_floor: float | None = 1e-8
    eta0: float = 4.0

    def __post_init__(self):
        if not self.eta0 > 0:
            raise ValueError("eta0 must be positive")
        if self.alpha < 0:
            raise ValueError("alpha must be non-negative")
        if not self.g > 0:
            raise ValueError("g must be positive")


@dataclass
class State2D:
    ux: np.ndarray
    uy: np.ndarray
    eta: np.ndarray


@dataclass(frozen=True)
class CasimirFn:
    """A PV weighting ``Phi`` with its analytic derivatives."""

    name: str
    phi: Callable[[np.ndarray], np.ndarray]
    dphi: Callable[[np.ndarray], np.ndarray]
    ddphi: Optional[Callable[[np.ndarray], np.ndarray]] = None

    @classmethod
    def constant(cls, c, name=None):
        return cls(name or f"const({c:g})", lambda q: np.full_like(q, c),
                   np.zeros_like, np.zeros_like)


CASIMIR_MASS = CasimirFn("mass", np.ones_like, np.zeros_like, np.zeros_like)
CASIMIR_Q = CasimirFn("q", lambda q: q, np.ones_like, np.zeros_like)
CASIMIR_Q2 = CasimirFn("q2", lambda q: q * q, lambda q: 2 * q, lambda q: np.full_like(q, 2.0))

_BUILTIN = {c.name: c for c in (CASIMIR_MASS, CASIMIR_Q, CASIMIR_Q2)}


def casimir_from_name(name):
    try:
        return _BUILTIN[name]
    except KeyError:
        raise ValueError(f"unknown Casimir {name!r}; builtins are {sorted(_BUILTIN)}") from None


class _Symbols:
    """Derivative symbols for one grid, Nyquist rows/columns of odd orders dropped."""

    def __init__(self, grid):
        dx = np.broadcast_to(1j * grid.kx, grid.spectral_shape).copy()
        dx[:, -1] = 0
        dy = np.broadcast_to(1j * grid.ky, grid.spectral_shape).copy()
        dy[grid.ny // 2, :] = 0
        self.dx, self.dy = dx, dy
        self.k2 = np.asarray(grid.k2)
        self.mask = sp.dealias_mask(grid.spectral_shape)


_SYMBOL_CACHE = {}


def _symbols(grid):
    key = (grid.lx, grid.ly, grid.nx, grid.ny)
    sym = _SYMBOL_CACHE.get(key)
    if sym is None:
        sym = _SYMBOL_CACHE[key] = _Symbols(grid)
    return sym


def _dealias_fwd(f, mask):
    return np.where(mask, sp.forward(f), 0)


def _bernoulli_and_transport(S, grid, p):
    """Evaluate the pieces shared by the tendency and the variational derivatives."""
    sym = _symbols(grid)
    shape = grid.shape
    inv = sp.inverse
    uxh, uyh, eh = S
    ux, uy, eta = inv(uxh, shape), inv(uyh, shape), inv(eh, shape)
    check_depth(eta, p.eta_floor, grid)
    k = p.kappa
    lh = sp.forward(np.log(eta))
    gx, gy = inv(sym.dx * lh, shape), inv(sym.dy * lh, shape)
    vx, vy = ux - k * gx, uy - k * gy
    # momentum flux m = eta u, dealiased before differentiation
    mxh, myh = _dealias_fwd(eta * ux, sym.mask), _dealias_fwd(eta * uy, sym.mask)
    div_m_h = sym.dx * mxh + sym.dy * myh
    div_m = inv(div_m_h, shape)
    b_nl = 0.5 * (ux * ux + uy * uy) - k * div_m / eta
    bh = _dealias_fwd(b_nl, sym.mask) - p.g * (1 + p.alpha**2 * sym.k2) * eh
    return dict(ux=ux, uy=uy, eta=eta, gx=gx, gy=gy, vx=vx, vy=vy, lh=lh,
                div_m_h=div_m_h, bh=bh)


def _rhs_hat(S, grid, p):
    # same algebra as _bernoulli_and_transport, with the transforms batched
    sym = _symbols(grid)
    shape = grid.shape
    inv = sp.inverse
    mask = sym.mask
    dx, dy = sym.dx, sym.dy
    uxh, uyh, eh = S
    ux, uy, eta = inv(S, shape)
    check_depth(eta, p.eta_floor, grid)
    k = p.kappa
    lh = sp.forward(np.log(eta))
    (gx, gy, ux_x, ux_y, uy_x, uy_y, hxx, hxy, hyy) = inv(np.stack((
        dx * lh, dy * lh, dx * uxh, dy * uxh, dx * uyh, dy * uyh,
        dx * dx * lh, dx * dy * lh, dy * dy * lh)), shape)
    vx, vy = ux - k * gx, uy - k * gy
    mh = np.where(mask, sp.forward(np.stack((eta * ux, eta * uy))), 0)
    div_m_h = dx * mh[0] + dy * mh[1]
    div_m = inv(div_m_h, shape)
    b_nl = 0.5 * (ux * ux + uy * uy) - k * div_m / eta
    vx_x, vx_y = ux_x - k * hxx, ux_y - k * hxy
    vy_x, vy_y = uy_x - k * hxy, uy_y - k * hyy
    tx = vx * ux_x + vy * ux_y + ux * vx_x + uy * vy_x
    ty = vx * uy_x + vy * uy_y + ux * vx_y + uy * vy_y
    bh_nl, txh, tyh = np.where(mask, sp.forward(np.stack((b_nl, tx, ty))), 0)
    bh = bh_nl - p.g * (1 + p.alpha**2 * sym.k2) * eh
    return np.stack((-txh + dx * bh, -tyh + dy * bh, -div_m_h - k * sym.k2 * eh))


def _pack(state):
    return np.stack((sp.forward(state.ux), sp.forward(state.uy), sp.forward(state.eta)))


def _unpack(S, grid):
    return State2D(*(sp.inverse(s, grid.shape) for s in S))


def rhs_2d(state, grid, params):
    """Tendency ``(u_x_t, u_y_t, eta_t)``; the depth tendency has zero mean."""
    return _unpack(_rhs_hat(_pack(state), grid, params), grid)


def variational_derivatives_2d(state, grid, params):
    """Return ``((v_x, v_y), B)`` with ``B = -dh/deta``."""
    f = _bernoulli_and_transport(_pack(state), grid, params)
    return (f["vx"], f["vy"]), sp.inverse(f["bh"], grid.shape)


def potential_vorticity(state, grid, eta_floor=1e-8):
    """``q = (d_x u_y - d_y u_x) / eta``."""
    check_depth(state.eta, eta_floor, grid)
    curl = (sp.spectral_derivative(state.uy, grid, "x")
            - sp.spectral_derivative(state.ux, grid, "y"))
    return curl / state.eta


def casimir_2d(state, grid, phi, eta_floor=1e-8):
    """``C_Phi = int eta Phi(q) d^2x``."""
    q = potential_vorticity(state, grid, eta_floor)
    return sp.integrate(state.eta * phi.phi(q), grid)


def hamiltonian_2d(state, grid, params, chart="m"):
    """Regularised energy.

    ``chart="m"`` evaluates ``|m|^2/(2 eta) - kappa m . grad ln eta`` plus the
    potential and slope-penalty terms; ``chart="u"`` uses the fluid-chart
    density ``eta |u|^2 / 2 - kappa u . grad eta``. They are the same
    functional.
    """
    check_depth(state.eta, params.eta_floor, grid)
    eta, ux, uy = state.eta, state.ux, state.uy
    ex = sp.spectral_derivative(eta, grid, "x")
    ey = sp.spectral_derivative(eta, grid, "y")
    pot = 0.5 * params.g * (eta**2 + params.alpha**2 * (ex**2 + ey**2))
    if chart == "m":
        mx, my = eta * ux, eta * uy
        lne = np.log(eta)
        lx = sp.spectral_derivative(lne, grid, "x")
        ly = sp.spectral_derivative(lne, grid, "y")
        dens = (mx**2 + my**2) / (2 * eta) - params.kappa * (mx * lx + my * ly) + pot
    elif chart == "u":
        dens = 0.5 * eta * (ux**2 + uy**2) - params.kappa * (ux * ex + uy * ey) + pot
    else:
        raise ValueError(f"unknown chart {chart!r}")
    return sp.integrate(dens, grid)


@dataclass(frozen=True)
class SymbolResult:
    sigma: np.ndarray
    cutoff: Optional[float]


def stability_symbol_2d(u_e, eta_e, kappa, kmag):
    """Second-variation symbol ``eta_e - |u_e|^2 - kappa^2 |k|^2``.

    ``cutoff`` is the wavenumber magnitude where the symbol changes sign:
    ``inf`` when ``kappa == 0`` and the symbol is positive, ``None`` when
    it is non-positive at every wavenumber.
    """
    u_e = np.atleast_1d(np.asarray(u_e, dtype=float))
    base = eta_e - float(np.dot(u_e, u_e))
    sigma = base - kappa**2 * np.asarray(kmag, dtype=float) ** 2
    if base <= 0:
        cutoff = None
    elif kappa == 0:
        cutoff = math.inf
    else:
        cutoff = math.sqrt(base) / abs(kappa)
    return SymbolResult(sigma, cutoff)


def equilibrium_residual_2d(state, grid, phi, params):
    """L2 norms of the two first-variation conditions of ``h + C_Phi``.

    ``r1 = || eta v - z x grad Phi'(q) ||`` and
    ``r2 = || |u|^2/2 + kappa div u + g (1 - alpha^2 Lap) eta + Phi(q) - q Phi'(q) ||``.
    """
    q = potential_vorticity(state, grid, params.eta_floor)
    eta, ux, uy = state.eta, state.ux, state.uy
    k = params.kappa
    ex = sp.spectral_derivative(eta, grid, "x")
    ey = sp.spectral_derivative(eta, grid, "y")
    dphi = phi.dphi(q)
    px = sp.spectral_derivative(dphi, grid, "x")
    py = sp.spectral_derivative(dphi, grid, "y")
    # z x (a, b) = (-b, a)
    r1x = eta * ux - k * ex + py
    r1y = eta * uy - k * ey - px
    div_u = sp.spectral_derivative(ux, grid, "x") + sp.spectral_derivative(uy, grid, "y")
    lap = sp.spectral_derivative(eta, grid, "x", 2) + sp.spectral_derivative(eta, grid, "y", 2)
    r2 = (0.5 * (ux**2 + uy**2) + k * div_u + params.g * (eta - params.alpha**2 * lap)
          + phi.phi(q) - q * dphi)
    r1 = math.sqrt(sp.integrate(r1x**2 + r1y**2, grid))
    return r1, math.sqrt(sp.integrate(r2**2, grid))


class BKBK2DModel:
    """Spectral-space interface for the steppers, ``S = (ux_hat, uy_hat, eta_hat)``.

    The implicit operator is the full linearisation about ``(0, eta0)``: the
    ``kappa grad div`` and ``-kappa Lap`` terms plus gravity with the
    ``(1 + alpha^2 |k|^2)`` slope penalty. The explicit remainder is
    ``rhs - L S``.
    """

    fields = ("ux", "uy", "eta")

    def __init__(self, grid, params):
        self.grid = grid
        self.params = params
        self.mask = sp.dealias_mask(grid.spectral_shape)
        self.wavenumbers = np.sqrt(np.broadcast_to(grid.k2, grid.spectral_shape))

    def linear_operator(self):
        p, sym = self.params, _symbols(self.grid)
        d = (sym.dx, sym.dy)
        grav = p.g * (1 + p.alpha**2 * sym.k2)
        L = np.zeros(self.grid.spectral_shape + (3, 3), dtype=complex)
        for i in range(2):
            for j in range(2):
                L[..., i, j] = -p.kappa * d[i] * d[j]
            L[..., i, 2] = -grav * d[i]
            L[..., 2, i] = -p.eta0 * d[i]
        L[..., 2, 2] = -p.kappa * sym.k2
        return L

    def rhs_hat(self, S):
        return _rhs_hat(S, self.grid, self.params)

    nonlinear_hat = None

    def pack(self, state):
        return _pack(state)

    def unpack(self, S):
        return _unpack(S, self.grid)

    def depth(self, S):
        return sp.inverse(S[2], self.grid.shape)
