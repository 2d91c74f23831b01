"""One-dimensional BKBK family: tendencies, linear theory, exact waves and energies.

Two charts are supported. The fluid chart ``(u, eta)`` evolves

    u_t   = -(u^2/2 + g eta + kappa u_x + nu u_xxx)_x
    eta_t = -(u eta - kappa eta_x + nu eta_xxx)_x

and the transport chart ``(v, eta)`` with ``v = u - kappa (ln eta)_x``
evolves

    v_t   = -(v^2/2 - (kappa2/2)(eta_x/eta)^2 + kappa2 eta_xx/eta + g eta)_x - nu v_xxxx
    eta_t = -(eta v)_x - nu eta_xxxx

where ``kappa2`` is a free real number so that the imaginary-kappa
(Schroedinger) case ``kappa2 = -1/4`` is reachable.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import spectral as sp
from .errors import DegenerateWaveError, DepthUnderflowError

__all__ = [
    "Params1D", "State1D", "VState1D", "TravellingWaveParams",
    "check_depth", "rhs_1d", "rhs_1d_vform", "chart_u_to_v", "chart_v_to_u",
    "chart_u_to_m", "chart_m_to_u", "dispersion_omega", "critical_wavenumber",
    "critical_nu", "max_growth_rate", "travelling_wave", "hamiltonian_1d",
    "hamiltonian_1d_vform", "variational_derivatives_1d",
    "second_variation_symbol_1d", "BKBK1DModel", "VForm1DModel",
]


@dataclass(frozen=True)
class Params1D:
    kappa: float = 0.0
    g: float = 1.0
    nu: float = 0.0
    eta0: float = 1.0
    eta_floor: float | None = 1e-8

    def __post_init__(self):
        if not self.eta0 > 0:
            raise ValueError("eta0 must be positive")
        if self.nu < 0:
            raise ValueError("nu must be non-negative")
        if not self.g > 0:
            raise ValueError("g must be positive")
        if not np.isfinite(self.kappa):
            raise ValueError("kappa must be a finite real number")

    @property
    def c0_squared(self):
        """Long-wave speed squared, ``g * eta0``."""
        return self.g * self.eta0


@dataclass
class State1D:
    u: np.ndarray
    eta: np.ndarray


@dataclass
class VState1D:
    v: np.ndarray
    eta: np.ndarray


@dataclass(frozen=True)
class TravellingWaveParams:
    kappa: float
    lam: float
    c: float
    phi: float = 0.0

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError("lam must be positive")


def check_depth(eta, floor, grid=None):
    """Raise :class:`DepthUnderflowError` if ``eta`` dips below ``floor``.

    ``floor=None`` disables the check.
    """
    if floor is None:
        return
    i = int(np.argmin(eta))
    m = eta.flat[i]
    if not m >= floor:
        if grid is None:
            loc = f"index {i}"
        elif isinstance(grid, sp.Grid1D):
            loc = f"x={grid.x[i]:.6g}"
        else:
            iy, ix = np.unravel_index(i, grid.shape)
            loc = f"(x={grid.x[ix]:.6g}, y={grid.y[iy]:.6g})"
        raise DepthUnderflowError(m, loc, floor)


def _ops(grid):
    """First and third derivative symbols with the Nyquist mode dropped."""
    d1 = 1j * grid.k
    d1[-1] = 0.0
    d3 = d1**3
    return d1, d3


# --- fluid chart ------------------------------------------------------------


def _rhs_hat(uh, eh, grid, p, mask):
    u = sp.inverse(uh, grid.shape)
    eta = sp.inverse(eh, grid.shape)
    check_depth(eta, p.eta_floor, grid)
    d1, d3 = _ops(grid)
    fu = np.where(mask, sp.forward(0.5 * u * u), 0) + p.g * eh + p.kappa * d1 * uh + p.nu * d3 * uh
    fe = np.where(mask, sp.forward(u * eta), 0) - p.kappa * d1 * eh + p.nu * d3 * eh
    return -d1 * fu, -d1 * fe


def rhs_1d(state, grid, params):
    """Tendency ``(u_t, eta_t)`` of the regularised 1D system.

    Quadratic products are dealiased with the 2/3 rule. Both tendencies
    are exact derivatives, so their spatial means vanish identically.
    """
    mask = sp.dealias_mask(grid.spectral_shape)
    du, de = _rhs_hat(sp.forward(state.u), sp.forward(state.eta), grid, params, mask)
    return State1D(sp.inverse(du, grid.shape), sp.inverse(de, grid.shape))


# --- transport chart --------------------------------------------------------


def _vform_pressure(v, eta, eh, grid, kappa2):
    eta_x = sp.inverse(sp.derivative_hat(eh, grid), grid.shape)
    eta_xx = sp.inverse(sp.derivative_hat(eh, grid, order=2), grid.shape)
    r = eta_x / eta
    return 0.5 * v * v - 0.5 * kappa2 * r * r + kappa2 * eta_xx / eta


def _rhs_vform_hat(vh, eh, grid, p, kappa2, mask):
    v = sp.inverse(vh, grid.shape)
    eta = sp.inverse(eh, grid.shape)
    check_depth(eta, p.eta_floor, grid)
    d1, d3 = _ops(grid)
    fv = np.where(mask, sp.forward(_vform_pressure(v, eta, eh, grid, kappa2)), 0) + p.g * eh
    fe = np.where(mask, sp.forward(eta * v), 0)
    return -d1 * (fv + p.nu * d3 * vh), -d1 * (fe + p.nu * d3 * eh)


def rhs_1d_vform(state, grid, params, kappa2=None):
    """Tendency ``(v_t, eta_t)`` in the transport-velocity chart.

    ``kappa2`` defaults to ``params.kappa**2``; pass ``-0.25`` for the
    Madelung/Schroedinger case.
    """
    if kappa2 is None:
        kappa2 = params.kappa**2
    mask = sp.dealias_mask(grid.spectral_shape)
    dv, de = _rhs_vform_hat(sp.forward(state.v), sp.forward(state.eta), grid, params, kappa2, mask)
    return VState1D(sp.inverse(dv, grid.shape), sp.inverse(de, grid.shape))


# --- chart changes ----------------------------------------------------------


def chart_u_to_v(state, grid, kappa, eta_floor=1e-8):
    check_depth(state.eta, eta_floor, grid)
    dlog = sp.spectral_derivative(np.log(state.eta), grid)
    return VState1D(state.u - kappa * dlog, state.eta.copy())


def chart_v_to_u(state, grid, kappa, eta_floor=1e-8):
    check_depth(state.eta, eta_floor, grid)
    dlog = sp.spectral_derivative(np.log(state.eta), grid)
    return State1D(state.v + kappa * dlog, state.eta.copy())


def chart_u_to_m(state):
    """``(u, eta) -> (m, eta)`` with momentum density ``m = eta u``."""
    return state.eta * state.u, state.eta.copy()


def chart_m_to_u(m, eta, eta_floor=1e-8):
    check_depth(eta, eta_floor)
    return State1D(m / eta, eta.copy())


# --- linear theory ----------------------------------------------------------


def dispersion_omega(k, params):
    """Complex frequencies ``(omega_plus, omega_minus)`` about ``(0, eta0)``.

    ``omega = -i nu k^4 +/- k sqrt(g eta0 - kappa^2 k^2)``. In the ill-posed
    band the square root is imaginary and ``omega_plus`` is the root with
    the larger imaginary part (the growing one).
    """
    k = np.asarray(k, dtype=float)
    root = k * np.sqrt((params.c0_squared - params.kappa**2 * k**2).astype(complex))
    root = np.where(root.imag < 0, -root, root)
    damp = -1j * params.nu * k**4
    return damp + root, damp - root


def critical_wavenumber(params):
    if params.kappa == 0:
        raise ValueError("dispersionless: no finite cutoff")
    return math.sqrt(params.c0_squared) / abs(params.kappa)


def critical_nu(params):
    """Smallest fourth-order dissipation that removes every growing mode."""
    return 2 * abs(params.kappa) ** 3 / (3 * math.sqrt(3) * params.c0_squared)


def max_growth_rate(params, kmax, samples=100_000):
    """Largest ``Im omega_plus`` on a uniform scan of ``(0, kmax]``."""
    k = np.linspace(kmax / samples, kmax, samples)
    growth = dispersion_omega(k, params)[0].imag
    i = int(np.argmax(growth))
    return float(growth[i]), float(k[i])


def second_variation_symbol_1d(u_e, eta_e, kappa, k):
    return eta_e - u_e**2 - kappa**2 * np.asarray(k) ** 2


# --- exact travelling wave --------------------------------------------------


def travelling_wave(x, t, tw, g=1.0):
    """Exact nonsingular travelling wave of the unregularised system.

    For ``kappa <= 0`` the depth amplitude ``|kappa|(|kappa| + kappa)``
    vanishes; the profile is returned with ``eta = 0`` and a
    :class:`UserWarning` flags it as degenerate.
    """
    xi = 0.5 * tw.lam * (np.asarray(x, dtype=float) - tw.c * t + tw.phi)
    ak = abs(tw.kappa)
    u = tw.c - tw.lam * ak * np.tanh(xi)
    e = np.exp(-2 * np.abs(xi))
    eta = 0.5 * tw.lam**2 * ak * (ak + tw.kappa) / g * 4 * e / (1 + e) ** 2
    if tw.kappa <= 0:
        warnings.warn("degenerate travelling wave: kappa <= 0 gives zero depth",
                      stacklevel=2)
    return State1D(u, eta)


def travelling_wave_periodic(grid, t, tw, g=1.0, images=3):
    """Periodic version of :func:`travelling_wave` on ``grid``.

    The depth is the sum of periodic images of the sech^2 crest. The
    velocity pairs the exact kink at the crest with the exact zero-depth
    antikink ``c + lam kappa tanh(lam (x - x_a)/2)`` half a period away, so
    both fronts solve the equations up to ``exp(-lam L / 4)``.
    """
    if tw.kappa <= 0:
        raise DegenerateWaveError("travelling wave needs kappa > 0 for nonzero depth")
    a = 0.5 * tw.lam
    amp = 0.5 * tw.lam**2 * tw.kappa * (2 * tw.kappa) / g
    L = grid.length
    y = grid.x - (tw.c * t - tw.phi)
    den = np.zeros_like(y)
    pair = np.zeros_like(y)
    for j in range(-images, images + 1):
        xi = a * (y - j * L)
        # sech^2 via exp(-2|xi|) to avoid overflow in cosh
        e = np.exp(-2 * np.abs(xi))
        den += 4 * e / (1 + e) ** 2
        pair += -np.tanh(xi) + np.tanh(xi - a * L / 2)
    eta = amp * den
    u = tw.c + tw.lam * tw.kappa * (1 + pair)
    return State1D(u, eta)


# --- energies ---------------------------------------------------------------


def hamiltonian_1d(state, grid, params):
    """``H = int 1/2 eta u^2 - kappa u eta_x + 1/2 g eta^2 dx``."""
    eta_x = sp.spectral_derivative(state.eta, grid)
    dens = 0.5 * state.eta * state.u**2 - params.kappa * state.u * eta_x + 0.5 * params.g * state.eta**2
    return sp.integrate(dens, grid)


def variational_derivatives_1d(state, grid, params):
    """``(dH/du, dH/deta) = (eta v, u^2/2 + g eta + kappa u_x)``."""
    eta_x = sp.spectral_derivative(state.eta, grid)
    u_x = sp.spectral_derivative(state.u, grid)
    return (state.eta * state.u - params.kappa * eta_x,
            0.5 * state.u**2 + params.g * state.eta + params.kappa * u_x)


def hamiltonian_1d_vform(state, grid, params, kappa2=None, form="A"):
    """Energy of the transport chart.

    Form ``"A"`` integrates ``1/2 eta v^2 - kappa2 eta_x^2 / (2 eta) + 1/2 g eta^2``;
    form ``"B"`` writes the middle term as ``2 kappa2 (d_x sqrt(eta))^2``.
    The two agree pointwise for smooth positive ``eta``.
    """
    if kappa2 is None:
        kappa2 = params.kappa**2
    check_depth(state.eta, params.eta_floor, grid)
    if form == "A":
        eta_x = sp.spectral_derivative(state.eta, grid)
        grad = eta_x**2 / (2 * state.eta)
    elif form == "B":
        grad = 2 * sp.spectral_derivative(np.sqrt(state.eta), grid) ** 2
    else:
        raise ValueError(f"unknown form {form!r}")
    dens = 0.5 * state.eta * state.v**2 - kappa2 * grad + 0.5 * params.g * state.eta**2
    return sp.integrate(dens, grid)


# --- stepping models --------------------------------------------------------


class BKBK1DModel:
    """Spectral-space interface of the fluid chart for the time steppers.

    The state stack is ``S[0] = u_hat``, ``S[1] = eta_hat``. The linear
    operator is the discrete linearisation about ``(0, eta0)``.
    """

    fields = ("u", "eta")

    def __init__(self, grid, params):
        self.grid = grid
        self.params = params
        self.mask = sp.dealias_mask(grid.spectral_shape)
        self.wavenumbers = grid.k

    def linear_operator(self):
        p = self.params
        d1, d3 = _ops(self.grid)
        L = np.zeros(self.grid.spectral_shape + (2, 2), dtype=complex)
        L[:, 0, 0] = -d1 * (p.kappa * d1 + p.nu * d3)
        L[:, 0, 1] = -d1 * p.g
        L[:, 1, 0] = -d1 * p.eta0
        L[:, 1, 1] = -d1 * (-p.kappa * d1 + p.nu * d3)
        return L

    def rhs_hat(self, S):
        return np.stack(_rhs_hat(S[0], S[1], self.grid, self.params, self.mask))

    def nonlinear_hat(self, S):
        u = sp.inverse(S[0], self.grid.shape)
        eta = sp.inverse(S[1], self.grid.shape)
        check_depth(eta, self.params.eta_floor, self.grid)
        d1, _ = _ops(self.grid)
        nu_ = -d1 * np.where(self.mask, sp.forward(0.5 * u * u), 0)
        ne = -d1 * np.where(self.mask, sp.forward(u * (eta - self.params.eta0)), 0)
        return np.stack((nu_, ne))

    def pack(self, state):
        return np.stack((sp.forward(state.u), sp.forward(state.eta)))

    def unpack(self, S):
        return State1D(sp.inverse(S[0], self.grid.shape), sp.inverse(S[1], self.grid.shape))

    def depth(self, S):
        return sp.inverse(S[1], self.grid.shape)


class VForm1DModel(BKBK1DModel):
    """Transport chart ``S = (v_hat, eta_hat)`` with a free ``kappa2``."""

    fields = ("v", "eta")

    def __init__(self, grid, params, kappa2=None):
        super().__init__(grid, params)
        self.kappa2 = params.kappa**2 if kappa2 is None else kappa2

    def linear_operator(self):
        p = self.params
        d1, d3 = _ops(self.grid)
        d2 = -self.grid.k**2
        L = np.zeros(self.grid.spectral_shape + (2, 2), dtype=complex)
        L[:, 0, 0] = -d1 * p.nu * d3
        L[:, 0, 1] = -d1 * (self.kappa2 / p.eta0 * d2 + p.g)
        L[:, 1, 0] = -d1 * p.eta0
        L[:, 1, 1] = -d1 * p.nu * d3
        return L

    def rhs_hat(self, S):
        return np.stack(_rhs_vform_hat(S[0], S[1], self.grid, self.params, self.kappa2, self.mask))

    def nonlinear_hat(self, S):
        g = self.grid
        v = sp.inverse(S[0], g.shape)
        eta = sp.inverse(S[1], g.shape)
        check_depth(eta, self.params.eta_floor, g)
        d1, _ = _ops(g)
        eta_x = sp.inverse(sp.derivative_hat(S[1], g), g.shape)
        eta_xx = sp.inverse(sp.derivative_hat(S[1], g, order=2), g.shape)
        k2 = self.kappa2
        pv = 0.5 * v * v - 0.5 * k2 * (eta_x / eta) ** 2 + k2 * eta_xx * (1 / eta - 1 / self.params.eta0)
        nv = -d1 * np.where(self.mask, sp.forward(pv), 0)
        ne = -d1 * np.where(self.mask, sp.forward(v * (eta - self.params.eta0)), 0)
        return np.stack((nv, ne))

    def pack(self, state):
        return np.stack((sp.forward(state.v), sp.forward(state.eta)))

    def unpack(self, S):
        return VState1D(sp.inverse(S[0], self.grid.shape), sp.inverse(S[1], self.grid.shape))
