"""Run orchestration: config -> initial state -> integration -> files on disk."""

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import io
from .config import RunConfig, dump_config
from .diagnostics import DiagnosticsRow, default_crest_level, record, track_crests
from .errors import BlowUpError, DepthUnderflowError, VacuumError
from .model1d import BKBK1DModel, State1D, VForm1DModel, chart_u_to_v
from .model2d import BKBK2DModel
from .nls import madelung, nls_energy, nls_norm, split_step_nls
from .scenarios import build_scenario
from .timestep import rk4_run, sbdf2_run

__all__ = ["RunResult", "run", "make_model", "initial_state", "EXIT_OK", "EXIT_CONFIG",
           "EXIT_NUMERICAL"]

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2


@dataclass
class RunResult:
    exit_code: int
    out_dir: Path
    rows: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)
    error: BaseException | None = None


def make_model(cfg):
    if cfg.model == "bkbk1d":
        return BKBK1DModel(cfg.grid, cfg.params)
    if cfg.model == "bkbk1d-vform":
        return VForm1DModel(cfg.grid, cfg.params, kappa2=cfg.kappa2)
    if cfg.model == "bkbk2d":
        return BKBK2DModel(cfg.grid, cfg.params)
    raise ValueError(f"model {cfg.model!r} has no spectral stepper")


def initial_state(cfg):
    s = build_scenario(cfg.scenario, cfg.grid, cfg.params, **cfg.scenario_params)
    if cfg.model == "bkbk1d-vform" and isinstance(s, State1D):
        s = chart_u_to_v(s, cfg.grid, cfg.params.kappa, cfg.params.eta_floor)
    return s


def _header_meta(cfg, t):
    p = cfg.params
    g = cfg.grid
    meta = dict(time=t, kappa=getattr(p, "kappa", 0.0), g=getattr(p, "g", getattr(p, "g_nls", 1.0)),
                nu=getattr(p, "nu", 0.0), alpha=getattr(p, "alpha", 0.0))
    if cfg.ndim == 1:
        meta.update(lx=g.length, ly=0.0)
    else:
        meta.update(lx=g.lx, ly=g.ly)
    return meta


def _state_fields(state):
    return {k: v for k, v in vars(state).items()}


def _mask_casimirs(row, cfg):
    if cfg.ndim == 2:
        if "q" not in cfg.casimirs:
            row.casimir_q = math.nan
        if "q2" not in cfg.casimirs:
            row.casimir_q2 = math.nan
    return row


def _nls_row(psi, cfg, t, level):
    st = madelung(psi, cfg.grid)
    crests = track_crests(st.eta, cfg.grid, level) if level is not None else []
    return DiagnosticsRow(
        t=float(t), mass=nls_norm(psi, cfg.grid),
        momentum=(float(np.sum(st.eta * st.v) * cfg.grid.dx),),
        hamiltonian=nls_energy(psi, cfg.grid, cfg.params),
        min_eta=float(st.eta.min()), max_speed=float(np.abs(st.v).max()),
        crest_count=len(crests), crests=crests)


def run(cfg: RunConfig, out_dir=None):
    """Execute one configured run and write its outputs.

    The output directory receives ``config.json``, ``diagnostics.csv`` and
    ``snap_<step>.bin`` files. Depth underflow, vacuum or blow-up stop the
    run with exit code 2; everything written up to then is kept.
    """
    out = Path(out_dir or cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.json").write_text(dump_config(cfg) + "\n")
    result = RunResult(EXIT_OK, out)
    writer = io.DiagnosticsWriter(out / "diagnostics.csv", cfg.ndim)

    def snap(step, t, fields_):
        path = out / f"snap_{step:09d}.bin"
        io.write_snapshot(path, fields_, **_header_meta(cfg, t))
        result.snapshots.append(path)

    try:
        if cfg.model == "nls":
            _run_nls(cfg, result, writer, snap)
        else:
            _run_fields(cfg, result, writer, snap)
    except (DepthUnderflowError, BlowUpError, VacuumError) as err:
        result.exit_code = EXIT_NUMERICAL
        result.error = err
        (out / "error.txt").write_text(f"{type(err).__name__}: {err}\n")
    finally:
        writer.close()
    return result


def _run_fields(cfg, result, writer, snap):
    model = make_model(cfg)
    s0 = initial_state(cfg)
    eta0 = cfg.params.eta0
    level = cfg.crest_level if cfg.crest_level is not None else default_crest_level(s0.eta, eta0)
    if cfg.crest_level is None and not level > eta0:
        level = None

    def on_diag(step, t, state):
        row = record(state, cfg.grid, cfg.params, t, crest_level=level, kappa2=cfg.kappa2)
        row = _mask_casimirs(row, cfg)
        result.rows.append(row)
        writer.write(row)

    def on_snap(step, t, state):
        snap(step, t, _state_fields(state))

    if cfg.integrator == "rk4":
        rk4_run(s0, model, cfg.schedule, on_snapshot=on_snap, on_diagnostics=on_diag, keep=False)
    else:
        sbdf2_run(s0, model, cfg.schedule, on_snapshot=on_snap, on_diagnostics=on_diag, keep=False)


def _run_nls(cfg, result, writer, snap):
    psi0 = build_scenario(cfg.scenario, cfg.grid, cfg.params, **cfg.scenario_params)
    traj = split_step_nls(psi0, cfg.grid, cfg.params, cfg.schedule)
    level = cfg.crest_level
    stride = cfg.schedule.snapshot_stride
    for i, (t, psi) in enumerate(zip(traj.times, traj.psis)):
        row = _nls_row(psi, cfg, t, level)
        result.rows.append(row)
        writer.write(row)
        snap(i * stride, t, {"psi_re": psi.real, "psi_im": psi.imag})
