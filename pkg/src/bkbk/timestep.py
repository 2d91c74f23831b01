"""Time integration in coefficient space.

Steppers work with any *model* object exposing

* ``pack(state) -> S`` and ``unpack(S) -> state``, ``S`` a stack of spectra
  of shape ``(m, *modes)``;
* ``rhs_hat(S)``, the full tendency;
* ``linear_operator()`` of shape ``(*modes, m, m)`` (SBDF2 only);
* optionally ``nonlinear_hat(S)``, an independent evaluation of the
  explicit remainder, and ``mask``, the set of resolved modes.

The initial state is projected onto ``mask`` so unresolved modes stay
exactly zero for the whole run.
"""

import math
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

from . import spectral as sp
from .errors import BlowUpError, DepthUnderflowError

__all__ = ["Schedule", "ImexSplit", "Trajectory", "sbdf2_run", "rk4_run", "apply_operator"]


@dataclass(frozen=True)
class Schedule:
    dt: float
    t_end: float
    snapshot_stride: int = 1
    diagnostics_stride: int = 1
    t0: float = 0.0

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.snapshot_stride < 1 or self.diagnostics_stride < 1:
            raise ValueError("strides must be >= 1")
        if self.t_end < self.t0:
            raise ValueError("t_end precedes t0")

    @property
    def n_steps(self):
        n = (self.t_end - self.t0) / self.dt
        steps = int(round(n))
        if abs(n - steps) > 1e-6 * max(1.0, n):
            raise ValueError(f"(t_end - t0)/dt = {n:.9g} is not an integer step count")
        return steps

    def time(self, step):
        return self.t0 + step * self.dt


@dataclass
class Trajectory:
    """Snapshots kept in memory plus the final state.

    ``error`` holds the exception that halted the run, if any; the arrays
    recorded up to that point are kept.
    """

    times: list = field(default_factory=list)
    states: list = field(default_factory=list)
    steps: list = field(default_factory=list)
    final: Any = None
    final_t: float = math.nan
    n_steps: int = 0
    error: Optional[BaseException] = None

    def __len__(self):
        return len(self.times)


def apply_operator(L, S):
    """``(L S)`` for ``L`` of shape ``(*modes, m, m)`` and ``S`` of ``(m, *modes)``."""
    return np.einsum("...ij,j...->i...", L, S)


def _random_band_limited(model, rng):
    """A smooth random state near the linearisation point of ``model``."""
    shape = model.grid.shape
    spec = model.grid.spectral_shape
    m = len(model.fields)
    keep = sp.dealias_mask(spec)
    eta0 = getattr(model.params, "eta0", 1.0)
    floor = getattr(model.params, "eta_floor", None) or 0.0
    # stay well above any configured depth floor
    amp = min(0.1, 0.5 * max(1.0 - floor / eta0, 0.0))
    out = []
    for i in range(m):
        c = rng.standard_normal(spec) + 1j * rng.standard_normal(spec)
        c = np.where(keep, c, 0) / (1 + np.arange(spec[-1])) ** 2
        f = sp.inverse(c, shape)
        f *= amp / max(np.max(np.abs(f)), 1e-300)
        out.append(f)
    out[-1] = eta0 * (1 + out[-1])
    return np.stack([sp.forward(f) for f in out])


class ImexSplit:
    """Linear/nonlinear splitting ``rhs(S) = L S + N(S)``.

    When the model supplies its own ``nonlinear_hat`` the split is checked
    on ``n_checks`` random band-limited states at construction and a
    :class:`ValueError` is raised if the two parts fail to reproduce the
    tendency to ``tol`` relative. Otherwise ``N`` is formed as
    ``rhs - L S``, which is consistent by construction.
    """

    def __init__(self, model, check=True, n_checks=10, tol=1e-10, seed=0):
        self.model = model
        self.L = np.asarray(model.linear_operator(), dtype=complex)
        self._nl = getattr(model, "nonlinear_hat", None)
        self.max_mismatch = 0.0
        if check and self._nl is not None and hasattr(model, "grid"):
            rng = np.random.default_rng(seed)
            for _ in range(n_checks):
                S = _random_band_limited(model, rng)
                full = model.rhs_hat(S)
                split = apply_operator(self.L, S) + self._nl(S)
                rel = np.linalg.norm(split - full) / max(np.linalg.norm(full), 1e-300)
                self.max_mismatch = max(self.max_mismatch, rel)
            if self.max_mismatch > tol:
                raise ValueError(f"inconsistent IMEX split: relative mismatch "
                                 f"{self.max_mismatch:.3g} > {tol:g}")

    def nonlinear(self, S):
        if self._nl is not None:
            return self._nl(S)
        return self.model.rhs_hat(S) - apply_operator(self.L, S)


class _Runner:
    """Shared bookkeeping: sinks, snapshots, failure handling."""

    def __init__(self, model, schedule, on_snapshot, on_diagnostics, keep):
        self.model = model
        self.sch = schedule
        self.on_snapshot = on_snapshot
        self.on_diagnostics = on_diagnostics
        self.keep = keep
        self.traj = Trajectory(n_steps=schedule.n_steps)
        self.last_snap = self.last_diag = None
        mask = getattr(model, "mask", None)
        self.mask = None if mask is None else np.asarray(mask, dtype=bool)

    def project(self, S):
        S = np.asarray(S, dtype=complex)
        if self.mask is not None:
            S = np.where(self.mask, S, 0)
        return S

    def emit(self, step, S, force=False):
        t = self.sch.time(step)
        snap = (force or step % self.sch.snapshot_stride == 0) and self.last_snap != step
        diag = (force or step % self.sch.diagnostics_stride == 0) and self.last_diag != step
        if not (snap or diag):
            return
        state = self.model.unpack(S)
        if snap:
            self.last_snap = step
            if self.keep:
                self.traj.times.append(t)
                self.traj.states.append(state)
                self.traj.steps.append(step)
            if self.on_snapshot is not None:
                self.on_snapshot(step, t, state)
        if diag:
            self.last_diag = step
        if diag and self.on_diagnostics is not None:
            self.on_diagnostics(step, t, state)

    def check_finite(self, S, step):
        if not np.all(np.isfinite(S)):
            raise BlowUpError(step, self.sch.time(step))

    def finish(self, S, step):
        self.emit(step, S, force=True)
        self.traj.final = self.model.unpack(S)
        self.traj.final_t = self.sch.time(step)
        return self.traj

    def fail(self, err, step):
        if isinstance(err, DepthUnderflowError):
            err.at(step, self.sch.time(step))
        self.traj.error = err
        if self.traj.times:
            self.traj.final_t = self.traj.times[-1]
        err.trajectory = self.traj
        return err


def sbdf2_run(state0, model, schedule, split=None, on_snapshot=None,
              on_diagnostics=None, keep=True):
    """Semi-implicit second-order backward differentiation.

    Each step solves, mode by mode,

        (3 I - 2 dt L) S^{n+1} = 4 S^n - S^{n-1} + 2 dt (2 N^n - N^{n-1}),

    after a single IMEX-Euler start ``(I - dt L) S^1 = S^0 + dt N^0``.

    Sinks are called as ``sink(step, t, state)`` every ``snapshot_stride``
    or ``diagnostics_stride`` steps, at step 0 and at the final step. On
    depth underflow or a non-finite state the run stops; the raised
    exception carries the partial :class:`Trajectory` as ``.trajectory``.
    """
    split = split or ImexSplit(model)
    run = _Runner(model, schedule, on_snapshot, on_diagnostics, keep)
    dt = schedule.dt
    L = split.L
    m = L.shape[-1]
    eye = np.eye(m)
    wn = getattr(model, "wavenumbers", None)
    euler = sp.ModeSolver(eye - dt * L, wn)
    bdf = sp.ModeSolver(3 * eye - 2 * dt * L, wn)
    nsteps = schedule.n_steps

    S = run.project(model.pack(state0))
    step = 0
    # overflow surfaces as BlowUpError through check_finite
    with np.errstate(over="ignore", invalid="ignore"):
        try:
            run.emit(0, S)
            if nsteps == 0:
                return run.finish(S, 0)
            N_prev = split.nonlinear(S)
            S_prev = S
            S = euler.solve(S + dt * N_prev)
            step = 1
            run.check_finite(S, step)
            run.emit(step, S)
            while step < nsteps:
                N = split.nonlinear(S)
                rhs = 4 * S - S_prev + 2 * dt * (2 * N - N_prev)
                S_prev, N_prev = S, N
                S = bdf.solve(rhs)
                step += 1
                run.check_finite(S, step)
                run.emit(step, S)
        except (DepthUnderflowError, BlowUpError) as err:
            raise run.fail(err, step)
        return run.finish(S, step)


def rk4_run(state0, model, schedule, on_snapshot=None, on_diagnostics=None, keep=True):
    """Classical fourth-order Runge-Kutta on ``model.rhs_hat``; same sink contract."""
    run = _Runner(model, schedule, on_snapshot, on_diagnostics, keep)
    dt = schedule.dt
    f = model.rhs_hat
    S = run.project(model.pack(state0))
    step = 0
    nsteps = schedule.n_steps
    # overflow surfaces as BlowUpError through check_finite
    with np.errstate(over="ignore", invalid="ignore"):
        try:
            run.emit(0, S)
            while step < nsteps:
                k1 = f(S)
                k2 = f(S + 0.5 * dt * k1)
                k3 = f(S + 0.5 * dt * k2)
                k4 = f(S + dt * k3)
                S = S + (dt / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
                step += 1
                run.check_finite(S, step)
                run.emit(step, S)
        except (DepthUnderflowError, BlowUpError) as err:
            raise run.fail(err, step)
        return run.finish(S, step)
