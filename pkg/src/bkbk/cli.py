"""Command-line entry point ``bkbk``.

Subcommands: ``run``, ``sweep``, ``dispersion``, ``stability``,
``nls-check`` and ``info``. Exit codes: 0 success, 1 configuration error,
2 depth underflow, vacuum or blow-up.
"""

import argparse
import copy
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import io
from .config import load_config, parse_config
from .errors import ConfigError, SnapshotError, VacuumError
from .model1d import Params1D, critical_nu, critical_wavenumber, dispersion_omega
from .model2d import stability_symbol_2d
from .nls import split_step_nls, vform_residual
from .runner import EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK, run
from .scenarios import build_scenario
from .timestep import Schedule

__all__ = ["main", "build_parser"]


def _fmt(x):
    return "%.17g" % x


def cmd_run(args):
    cfg = load_config(args.config)
    res = run(cfg, args.out)
    if res.error is not None:
        print(f"error: {res.error}", file=sys.stderr)
    else:
        print(f"wrote {len(res.snapshots)} snapshot(s) and {len(res.rows)} diagnostics row(s) "
              f"to {res.out_dir}")
    return res.exit_code


def _set_path(obj, dotted, value):
    keys = dotted.split(".")
    for k in keys[:-1]:
        obj = obj.setdefault(k, {})
    obj[keys[-1]] = value


def _sweep_one(job):
    raw, out = job
    try:
        return run(parse_config(raw), out).exit_code
    except ConfigError as err:
        print(f"config error in {out}: {err}", file=sys.stderr)
        return EXIT_CONFIG


def cmd_sweep(args):
    base = json.loads(Path(args.config).read_text())
    root = Path(args.out or base.get("output_dir", "sweep"))
    jobs = []
    for text in args.values.split(","):
        value = json.loads(text)
        raw = copy.deepcopy(base)
        _set_path(raw, args.param, value)
        out = root / f"{args.param}={text.strip()}"
        raw["output_dir"] = str(out)
        parse_config(raw)  # fail fast before launching anything
        jobs.append((raw, out))
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            codes = list(pool.map(_sweep_one, jobs))
    else:
        codes = [_sweep_one(j) for j in jobs]
    for (_, out), code in zip(jobs, codes):
        print(f"{out}: exit {code}")
    return max(codes)


def cmd_dispersion(args):
    if args.samples < 2:
        raise ConfigError("--samples must be at least 2")
    p = Params1D(kappa=args.kappa, g=args.g, nu=args.nu, eta0=args.eta0)
    k = np.linspace(0.0, args.kmax, args.samples)
    wp, wm = dispersion_omega(k, p)
    # both roots solve (omega + i nu k^4)^2 = k^2 (g eta0 - kappa^2 k^2)
    rhs = k**2 * (p.c0_squared - p.kappa**2 * k**2)
    scale = np.maximum(1.0, np.abs(rhs))
    check = np.maximum(np.abs((wp + 1j * p.nu * k**4) ** 2 - rhs),
                       np.abs((wm + 1j * p.nu * k**4) ** 2 - rhs)) / scale
    out = sys.stdout
    out.write("k,re_omega_plus,im_omega_plus,re_omega_minus,im_omega_minus,identity_residual\n")
    for row in zip(k, wp.real, wp.imag, wm.real, wm.imag, check):
        out.write(",".join(_fmt(v) for v in row) + "\n")
    kc = critical_wavenumber(p) if p.kappa != 0 else math.inf
    out.write(f"# k_c={_fmt(kc)} nu_cr={_fmt(critical_nu(p))}\n")
    return EXIT_OK


def cmd_stability(args):
    if not args.etae > 0:
        raise ConfigError("--etae must be positive")
    k = np.linspace(0.0, args.kmax, args.samples)
    res = stability_symbol_2d(args.ue, args.etae, args.kappa, k)
    print("k,sigma")
    for kk, s in zip(k, res.sigma):
        print(f"{_fmt(kk)},{_fmt(s)}")
    print(f"# cutoff={'none' if res.cutoff is None else _fmt(res.cutoff)}")
    return EXIT_OK


def nls_check(cfg, levels=3):
    """Run the NLS oracle at ``dt, dt/2, ...`` for both nonlinearity signs.

    Returns a dict with the per-sign residual maxima, convergence slopes,
    the degenerate flag and the matching sign (``None`` when degenerate).
    """
    if cfg.model != "nls":
        raise ConfigError("nls-check needs a config with model 'nls'")
    psi0 = build_scenario(cfg.scenario, cfg.grid, cfg.params, **cfg.scenario_params)
    dts = [cfg.schedule.dt / 2**i for i in range(levels)]
    report = {"dts": dts, "residual": {}, "slope": {}, "degenerate": False}
    for params in (cfg.params, cfg.params.flipped()):
        res = []
        for dt in dts:
            sch = Schedule(dt, cfg.schedule.t_end)
            traj = split_step_nls(psi0, cfg.grid, params, sch)
            r = vform_residual(traj, cfg.grid, cfg.params.g_nls)
            report["degenerate"] |= r.degenerate
            res.append(r.max)
        slope = float(np.polyfit(np.log(dts), np.log(np.maximum(res, 1e-300)), 1)[0])
        report["residual"][params.sign] = res
        report["slope"][params.sign] = slope
    finest = {s: r[-1] for s, r in report["residual"].items()}
    report["matching_sign"] = None if report["degenerate"] else min(finest, key=finest.get)
    return report


def cmd_nls_check(args):
    cfg = load_config(args.config)
    try:
        rep = nls_check(cfg)
    except VacuumError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_NUMERICAL
    print("sign,dt,residual")
    for sign, res in rep["residual"].items():
        for dt, r in zip(rep["dts"], res):
            print(f"{sign:+d},{_fmt(dt)},{_fmt(r)}")
    for sign, slope in rep["slope"].items():
        print(f"# slope[{sign:+d}]={slope:.4f}")
    if rep["degenerate"]:
        print("# degenerate: uniform state, both signs satisfy the equations trivially")
    else:
        print(f"# matching sign: {rep['matching_sign']:+d}")
    return EXIT_OK


def cmd_info(args):
    h = io.read_header(args.snapshot)
    print(f"version  {h.version}")
    print(f"ndim     {h.ndim}")
    print(f"nx, ny   {h.nx}, {h.ny}")
    print(f"fields   {h.nfields}")
    for name in ("time", "kappa", "g", "nu", "alpha", "lx", "ly"):
        print(f"{name:<8} {_fmt(getattr(h, name))}")
    snap = io.read_snapshot(args.snapshot)
    print("names    " + " ".join(snap.fields))
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="bkbk", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="execute a configured simulation")
    r.add_argument("config")
    r.add_argument("--out", help="override the output directory")
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("sweep", help="repeat a run over values of one parameter")
    s.add_argument("config")
    s.add_argument("--param", required=True, help="dotted key, e.g. params.kappa")
    s.add_argument("--values", required=True, help="comma-separated JSON values")
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--out")
    s.set_defaults(func=cmd_sweep)

    d = sub.add_parser("dispersion", help="tabulate the linear dispersion relation")
    d.add_argument("--kappa", type=float, required=True)
    d.add_argument("--g", type=float, default=1.0)
    d.add_argument("--eta0", type=float, default=1.0)
    d.add_argument("--nu", type=float, default=0.0)
    d.add_argument("--kmax", type=float, default=8.0)
    d.add_argument("--samples", type=int, default=161)
    d.set_defaults(func=cmd_dispersion)

    st = sub.add_parser("stability", help="tabulate the second-variation symbol")
    st.add_argument("--ue", type=float, nargs="+", default=[0.0])
    st.add_argument("--etae", type=float, required=True)
    st.add_argument("--kappa", type=float, required=True)
    st.add_argument("--kmax", type=float, default=8.0)
    st.add_argument("--samples", type=int, default=81)
    st.set_defaults(func=cmd_stability)

    n = sub.add_parser("nls-check", help="compare NLS hydrodynamics with the transport chart")
    n.add_argument("--config", required=True)
    n.set_defaults(func=cmd_nls_check)

    i = sub.add_parser("info", help="print a snapshot header")
    i.add_argument("snapshot")
    i.set_defaults(func=cmd_info)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except (SnapshotError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
