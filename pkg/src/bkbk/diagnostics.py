"""Conserved-quantity records, linear-mode fits and crest tracking."""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import spectral as sp
from .errors import ModeVanishedError
from .model1d import State1D, VState1D, hamiltonian_1d, hamiltonian_1d_vform
from .model2d import (CASIMIR_Q, CASIMIR_Q2, State2D, hamiltonian_2d,
                      potential_vorticity)

__all__ = [
    "DiagnosticsRow", "record", "record_1d", "record_2d", "ModeFit", "fit_mode",
    "Crest", "track_crests", "count_crests_2d", "default_crest_level",
    "link_crests", "relative_drift", "mode_amplitude",
]


@dataclass
class DiagnosticsRow:
    t: float
    mass: float
    momentum: tuple
    hamiltonian: float
    min_eta: float
    max_speed: float
    casimir_q: Optional[float] = None
    casimir_q2: Optional[float] = None
    max_abs_q: Optional[float] = None
    crest_count: int = 0
    crests: list = field(default_factory=list, repr=False)
    # int eta |q|, the natural size of C_q when checking its drift
    q_scale: Optional[float] = None

    def __post_init__(self):
        vals = [self.t, self.mass, *self.momentum, self.hamiltonian, self.min_eta, self.max_speed]
        vals += [v for v in (self.casimir_q, self.casimir_q2, self.max_abs_q) if v is not None]
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("non-finite diagnostics")

    @property
    def ndim(self):
        return len(self.momentum)


def default_crest_level(eta_initial, eta0):
    """``eta0 + 0.05 (max eta(0) - eta0)``."""
    return eta0 + 0.05 * (float(np.max(eta_initial)) - eta0)


def record_1d(state, grid, params, t, crest_level=None, kappa2=None):
    """Diagnostics of a fluid-chart or transport-chart 1D state.

    Total momentum ``int eta u`` equals ``int eta v`` on a periodic domain,
    so both charts report the same value.
    """
    if isinstance(state, VState1D):
        vel = state.v
        ham = hamiltonian_1d_vform(state, grid, params, kappa2=kappa2, form="B")
    else:
        vel = state.u
        ham = hamiltonian_1d(state, grid, params)
    eta = state.eta
    crests = track_crests(eta, grid, crest_level) if crest_level is not None else []
    return DiagnosticsRow(
        t=float(t),
        mass=sp.integrate(eta, grid),
        momentum=(sp.integrate(eta * vel, grid),),
        hamiltonian=ham,
        min_eta=float(eta.min()),
        max_speed=float(np.abs(vel).max()),
        crest_count=len(crests),
        crests=crests,
    )


def record_2d(state, grid, params, t, crest_level=None):
    eta = state.eta
    q = potential_vorticity(state, grid, params.eta_floor)
    crests = count_crests_2d(eta, grid, crest_level)[1] if crest_level is not None else []
    return DiagnosticsRow(
        t=float(t),
        mass=sp.integrate(eta, grid),
        momentum=(sp.integrate(eta * state.ux, grid), sp.integrate(eta * state.uy, grid)),
        hamiltonian=hamiltonian_2d(state, grid, params),
        min_eta=float(eta.min()),
        max_speed=float(np.sqrt(state.ux**2 + state.uy**2).max()),
        casimir_q=sp.integrate(eta * CASIMIR_Q.phi(q), grid),
        casimir_q2=sp.integrate(eta * CASIMIR_Q2.phi(q), grid),
        max_abs_q=float(np.abs(q).max()),
        crest_count=len(crests),
        crests=crests,
        q_scale=sp.integrate(eta * np.abs(q), grid),
    )


def record(state, grid, params, t, crest_level=None, kappa2=None):
    """One :class:`DiagnosticsRow`, dispatching on the state type."""
    if isinstance(state, State2D):
        return record_2d(state, grid, params, t, crest_level)
    if isinstance(state, (State1D, VState1D)):
        return record_1d(state, grid, params, t, crest_level, kappa2)
    raise TypeError(f"cannot record {type(state).__name__}")


def relative_drift(values, scale=None):
    """``max |X(t) - X(0)| / scale``; ``scale`` defaults to ``|X(0)|``."""
    values = np.asarray(values, dtype=float)
    scale = abs(values[0]) if scale is None else scale
    return float(np.max(np.abs(values - values[0])) / scale)


# --- linear modes -----------------------------------------------------------


@dataclass(frozen=True)
class ModeFit:
    k: Optional[float]
    omega: float
    gamma: float
    residual: float


def mode_amplitude(field_, grid, mode):
    """Complex rfft coefficient of mode number ``mode``."""
    return complex(sp.forward(field_)[mode])


def fit_mode(times, amplitudes, k=None, floor=1e-14):
    """Least-squares fit of ``ln a(t)`` to ``(gamma - i omega) t + c``.

    The phase is unwrapped before fitting. ``residual`` is the RMS misfit of
    the complex logarithm.
    """
    t = np.asarray(times, dtype=float)
    a = np.asarray(amplitudes, dtype=complex)
    if t.size < 16 or t.size != a.size:
        raise ValueError("need at least 16 samples with matching times")
    steps = np.diff(t)
    if not np.allclose(steps, steps[0], rtol=1e-8, atol=0):
        raise ValueError("samples must be uniformly spaced")
    mag = np.abs(a)
    if mag.min() < floor:
        raise ModeVanishedError()
    log_a = np.log(mag) + 1j * np.unwrap(np.angle(a))
    A = np.column_stack((t, np.ones_like(t)))
    coef_re, *_ = np.linalg.lstsq(A, log_a.real, rcond=None)
    coef_im, *_ = np.linalg.lstsq(A, log_a.imag, rcond=None)
    fit = A @ coef_re + 1j * (A @ coef_im)
    resid = math.sqrt(float(np.mean(np.abs(log_a - fit) ** 2)))
    return ModeFit(k=k, omega=float(-coef_im[0]), gamma=float(coef_re[0]), residual=resid)


# --- crests -----------------------------------------------------------------


@dataclass(frozen=True)
class Crest:
    position: float
    height: float


def track_crests(eta, grid, level):
    """Strict local maxima of a periodic 1D field above ``level``.

    Positions and heights are refined with the parabola through the
    three-point stencil.
    """
    eta = np.asarray(eta, dtype=float)
    left, right = np.roll(eta, 1), np.roll(eta, -1)
    idx = np.flatnonzero((eta > left) & (eta > right) & (eta > level))
    out = []
    for i in idx:
        fm, f0, fp = left[i], eta[i], right[i]
        curv = fm - 2 * f0 + fp
        off = 0.5 * (fm - fp) / curv if curv < 0 else 0.0
        pos = (grid.x[i] + off * grid.dx) % grid.length
        out.append(Crest(float(pos), float(f0 - 0.25 * (fm - fp) * off)))
    return out


def count_crests_2d(eta, grid, level):
    """Strict 8-neighbour maxima above ``level``; returns ``(count, [(x, y, height)])``."""
    eta = np.asarray(eta, dtype=float)
    peak = eta > level
    for dy in (-1, 0, 1):
        for dx in (-1, 0, 1):
            if dx or dy:
                peak &= eta > np.roll(eta, (dy, dx), axis=(0, 1))
    iy, ix = np.nonzero(peak)
    maxima = [(float(grid.x[j]), float(grid.y[i]), float(eta[i, j])) for i, j in zip(iy, ix)]
    maxima.sort(key=lambda m: -m[2])
    return len(maxima), maxima


def link_crests(times, crest_lists, length, max_jump=None):
    """Chain crests between consecutive snapshots by nearest periodic distance.

    Returns a list of tracks, each a pair ``(times, unwrapped positions)``.
    Tracks that lose their crest end; new crests start new tracks.
    """
    max_jump = length / 8 if max_jump is None else max_jump
    open_tracks, done = [], []
    for t, crests in zip(times, crest_lists):
        taken = set()
        still_open = []
        for tr in open_tracks:
            last = tr[1][-1]
            best, best_d = None, max_jump
            for j, c in enumerate(crests):
                if j in taken:
                    continue
                d = (c.position - last + 0.5 * length) % length - 0.5 * length
                if abs(d) <= best_d:
                    best, best_d = j, abs(d)
            if best is None:
                done.append(tr)
                continue
            taken.add(best)
            d = (crests[best].position - last + 0.5 * length) % length - 0.5 * length
            tr[0].append(t)
            tr[1].append(last + d)
            still_open.append(tr)
        for j, c in enumerate(crests):
            if j not in taken:
                still_open.append(([t], [c.position]))
        open_tracks = still_open
    done.extend(open_tracks)
    return [(np.array(a), np.array(b)) for a, b in done]
