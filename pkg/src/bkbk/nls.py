"""Cubic Schrodinger solver and its hydrodynamic (Madelung) form.

The equation is

    i psi_t = -1/2 psi_xx + s g |psi|^2 psi,      s in {+1, -1},

integrated with Strang splitting. The split-step solver shares no code
with the BKBK right-hand sides, so comparing the two is a genuine check:
with ``eta = |psi|^2`` and ``eta v = Im(conj(psi) psi_x)`` the flow should
satisfy the transport-chart BKBK system with ``kappa^2 = -1/4``.
"""

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft

from . import spectral as sp
from .errors import VacuumError
from .model1d import Params1D, VState1D, rhs_1d_vform

__all__ = [
    "NlsParams", "NlsTrajectory", "split_step_nls", "madelung", "vform_residual",
    "ResidualSeries", "nls_energy", "nls_norm", "bogoliubov_omega", "plane_wave",
]

MADELUNG_KAPPA2 = -0.25


@dataclass(frozen=True)
class NlsParams:
    sign: int = 1
    g_nls: float = 1.0

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")

    def flipped(self):
        return NlsParams(-self.sign, self.g_nls)


@dataclass
class NlsTrajectory:
    times: list = field(default_factory=list)
    psis: list = field(default_factory=list)
    dt: float = math.nan


def _k_full(grid):
    return grid.k_signed


def split_step_nls(psi0, grid, params, schedule):
    """Strang split-step integration.

    Half a nonlinear phase rotation, a full kinetic step ``exp(-i k^2 dt/2)``
    in Fourier space, then the second nonlinear half. Both stages are
    unitary, so ``int |psi|^2`` is conserved to round-off. Snapshots are
    stored every ``schedule.snapshot_stride`` steps.
    """
    psi = np.array(psi0, dtype=complex)
    if psi.shape != grid.shape:
        raise ValueError("psi0 does not match the grid")
    if not np.all(np.isfinite(psi)):
        raise ValueError("non-finite psi0")
    dt = schedule.dt
    kin = np.exp(-0.5j * _k_full(grid) ** 2 * dt)
    sg = params.sign * params.g_nls
    workers = sp._workers()
    traj = NlsTrajectory(dt=dt * schedule.snapshot_stride)
    traj.times.append(schedule.t0)
    traj.psis.append(psi.copy())
    for step in range(1, schedule.n_steps + 1):
        psi *= np.exp(-0.5j * dt * sg * (psi.real**2 + psi.imag**2))
        psi = sfft.ifft(kin * sfft.fft(psi, workers=workers), workers=workers)
        psi *= np.exp(-0.5j * dt * sg * (psi.real**2 + psi.imag**2))
        if step % schedule.snapshot_stride == 0:
            traj.times.append(schedule.time(step))
            traj.psis.append(psi.copy())
    return traj


def _dx_complex(psi, grid):
    k = _k_full(grid).copy()
    k[grid.n // 2] = 0.0
    return sfft.ifft(1j * k * sfft.fft(psi))


def madelung(psi, grid, eta_floor=1e-8):
    """``eta = |psi|^2``, ``v = Im(conj(psi) psi_x) / |psi|^2``."""
    psi = np.asarray(psi, dtype=complex)
    eta = psi.real**2 + psi.imag**2
    i = int(np.argmin(eta))
    if eta[i] <= eta_floor:
        raise VacuumError(eta[i], f"x={grid.x[i]:.6g}")
    v = np.imag(np.conj(psi) * _dx_complex(psi, grid)) / eta
    return VState1D(v, eta)


def nls_norm(psi, grid):
    return sp.integrate(np.abs(psi) ** 2, grid)


def nls_energy(psi, grid, params):
    """``int 1/2 |psi_x|^2 + s g/2 |psi|^4 dx``."""
    px = _dx_complex(psi, grid)
    rho = np.abs(psi) ** 2
    return sp.integrate(0.5 * np.abs(px) ** 2 + 0.5 * params.sign * params.g_nls * rho**2, grid)


def bogoliubov_omega(k, g, eta0):
    """Frequency of small oscillations about a uniform condensate."""
    k = np.asarray(k, dtype=float)
    return np.abs(k) * np.sqrt(g * eta0 + 0.25 * k**2)


def plane_wave(grid, amplitude, mode, t=0.0, params=None):
    """Exact travelling plane wave ``A exp(i(k x - omega t))`` of mode number ``mode``."""
    params = params or NlsParams()
    k = 2 * np.pi * mode / grid.length
    omega = 0.5 * k**2 + params.sign * params.g_nls * abs(amplitude) ** 2
    return amplitude * np.exp(1j * (k * grid.x - omega * t))


@dataclass(frozen=True)
class ResidualSeries:
    """Relative L2 residuals of the transport-chart equations along a trajectory.

    ``degenerate`` is set when the tendency itself vanishes (uniform
    states), in which case the residuals are absolute.
    """

    times: np.ndarray
    r_v: np.ndarray
    r_eta: np.ndarray
    degenerate: bool

    @property
    def max(self):
        return float(max(self.r_v.max(), self.r_eta.max()))


def vform_residual(traj, grid, g, eta_floor=1e-8, scale_floor=1e-9):
    """Check Madelung fields of an NLS trajectory against the transport chart.

    At every interior snapshot the time derivative of ``(v, eta)`` is taken by
    centred differences and compared with ``rhs_1d_vform`` at
    ``kappa^2 = -1/4``, ``nu = 0`` and gravity ``g``.

    A tendency smaller than ``scale_floor`` times the norm of its field
    marks the snapshot as degenerate; its residual is then taken relative
    to the field norm (at least 1) instead of the tendency norm.
    """
    if len(traj.psis) < 3:
        raise ValueError("need at least 3 snapshots for centred differences")
    if not g > 0:
        raise ValueError("the pressure term needs g > 0")
    h = traj.dt
    params = Params1D(kappa=0.5, g=g, nu=0.0, eta_floor=eta_floor)
    fields = [madelung(p, grid, eta_floor) for p in traj.psis]
    rv, re, times = [], [], []
    degenerate = False
    for i in range(1, len(fields) - 1):
        dv = (fields[i + 1].v - fields[i - 1].v) / (2 * h)
        de = (fields[i + 1].eta - fields[i - 1].eta) / (2 * h)
        rhs = rhs_1d_vform(fields[i], grid, params, kappa2=MADELUNG_KAPPA2)
        sv, se = np.linalg.norm(rhs.v), np.linalg.norm(rhs.eta)
        nv = max(np.linalg.norm(fields[i].v), 1.0)
        ne = max(np.linalg.norm(fields[i].eta), 1.0)
        flat_v = sv < scale_floor * nv
        flat_e = se < scale_floor * ne
        degenerate |= flat_v or flat_e
        rv.append(np.linalg.norm(dv - rhs.v) / (nv if flat_v else sv))
        re.append(np.linalg.norm(de - rhs.eta) / (ne if flat_e else se))
        times.append(traj.times[i])
    return ResidualSeries(np.array(times), np.array(rv), np.array(re), degenerate)
