"""Strict JSON run configuration.

Example::

    {
      "schema_version": 1,
      "model": "bkbk1d",
      "scenario": {"name": "gaussian_1d", "params": {"x0": 24.0}},
      "params": {"kappa": -0.1, "nu": 0.01, "eta0": 1.0},
      "grid": {"length": 48.0, "n": 512},
      "schedule": {"dt": 1e-3, "t_end": 5.0, "snapshot_stride": 500,
                   "diagnostics_stride": 100},
      "integrator": "sbdf2",
      "output_dir": "runs/gauss"
    }

Unknown keys anywhere are rejected, and everything is validated before any
array is allocated.
"""

import copy
import inspect
import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from .errors import ConfigError
from .model1d import Params1D
from .model2d import Params2D, casimir_from_name
from .nls import NlsParams
from .scenarios import SCENARIOS, RidgeLayout
from .spectral import Grid1D, Grid2D
from .timestep import Schedule

__all__ = ["SCHEMA_VERSION", "MODELS", "INTEGRATORS", "RunConfig", "load_config",
           "parse_config", "dump_config"]

SCHEMA_VERSION = 1
MODELS = ("bkbk1d", "bkbk1d-vform", "bkbk2d", "nls")
INTEGRATORS = ("sbdf2", "rk4")
_TOP_KEYS = {"schema_version", "model", "scenario", "params", "grid", "schedule",
             "integrator", "output_dir", "casimirs", "crest_level"}


@dataclass
class RunConfig:
    model: str
    scenario: str
    scenario_params: dict
    params: object
    grid: object
    schedule: Schedule
    integrator: str = "sbdf2"
    output_dir: str = "run"
    casimirs: list = field(default_factory=lambda: ["q", "q2"])
    crest_level: float | None = None
    kappa2: float | None = None

    @property
    def ndim(self):
        return 2 if self.model == "bkbk2d" else 1

    def to_dict(self):
        params = asdict(self.params)
        if self.kappa2 is not None:
            params["kappa2"] = self.kappa2
        if isinstance(self.grid, Grid1D):
            grid = {"length": self.grid.length, "n": self.grid.n}
        else:
            grid = {"lx": self.grid.lx, "ly": self.grid.ly, "nx": self.grid.nx, "ny": self.grid.ny}
        d = {
            "schema_version": SCHEMA_VERSION,
            "model": self.model,
            "scenario": {"name": self.scenario, "params": copy.deepcopy(self.scenario_params)},
            "params": params,
            "grid": grid,
            "schedule": asdict(self.schedule),
            "integrator": self.integrator,
            "output_dir": self.output_dir,
        }
        if self.model == "bkbk2d":
            d["casimirs"] = list(self.casimirs)
        if self.crest_level is not None:
            d["crest_level"] = self.crest_level
        return d


def _require(obj, key, where):
    if key not in obj:
        raise ConfigError(f"missing key {where}.{key}")
    return obj[key]


def _check_keys(obj, allowed, where):
    if not isinstance(obj, dict):
        raise ConfigError(f"{where} must be an object")
    extra = sorted(set(obj) - set(allowed))
    if extra:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(extra)}")


def _build(cls, raw, where, drop=()):
    allowed = [f.name for f in fields(cls)]
    _check_keys(raw, allowed + list(drop), where)
    kwargs = {k: v for k, v in raw.items() if k not in drop}
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as err:
        raise ConfigError(f"invalid {where}: {err}") from None


def _grid(raw, ndim):
    if ndim == 1:
        _check_keys(raw, ("length", "n"), "grid")
        make = lambda: Grid1D(float(_require(raw, "length", "grid")), int(_require(raw, "n", "grid")))
    else:
        _check_keys(raw, ("lx", "ly", "nx", "ny"), "grid")
        make = lambda: Grid2D(*(float(_require(raw, k, "grid")) for k in ("lx", "ly")),
                              *(int(_require(raw, k, "grid")) for k in ("nx", "ny")))
    try:
        return make()
    except (TypeError, ValueError) as err:
        raise ConfigError(f"invalid grid: {err}") from None


def _scenario_keywords(name):
    _, fn = SCENARIOS[name]
    sig = inspect.signature(fn)
    skip = 1 if name == "perturbed_plane_wave" else 2
    names = list(sig.parameters)[skip:]
    keep = {n for n in names if sig.parameters[n].kind is not inspect.Parameter.VAR_KEYWORD}
    if len(keep) < len(names):
        keep |= {f.name for f in fields(RidgeLayout)}
    return keep


def parse_config(obj):
    """Validate a decoded JSON object and return a :class:`RunConfig`."""
    _check_keys(obj, _TOP_KEYS, "config")
    version = _require(obj, "schema_version", "config")
    if version != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema_version {version!r}; expected {SCHEMA_VERSION}")
    model = _require(obj, "model", "config")
    if model not in MODELS:
        raise ConfigError(f"unknown model {model!r}; choose from {', '.join(MODELS)}")
    ndim = 2 if model == "bkbk2d" else 1

    scen = _require(obj, "scenario", "config")
    _check_keys(scen, ("name", "params"), "scenario")
    name = _require(scen, "name", "scenario")
    if name not in SCENARIOS:
        raise ConfigError(f"unknown scenario {name!r}")
    if SCENARIOS[name][0] != ndim:
        raise ConfigError(f"scenario {name!r} is {SCENARIOS[name][0]}D but model {model!r} is {ndim}D")
    if (model == "nls") != (name == "perturbed_plane_wave"):
        raise ConfigError(f"scenario {name!r} cannot initialise model {model!r}")
    sparams = scen.get("params", {})
    _check_keys(sparams, _scenario_keywords(name), "scenario.params")

    raw_params = obj.get("params", {})
    kappa2 = None
    if model == "nls":
        params = _build(NlsParams, raw_params, "params")
        if not params.g_nls > 0:
            raise ConfigError("g_nls must be positive: the matching pressure term needs g > 0")
    elif model == "bkbk2d":
        params = _build(Params2D, raw_params, "params")
    else:
        drop = ("kappa2",) if model == "bkbk1d-vform" else ()
        params = _build(Params1D, raw_params, "params", drop=drop)
        kappa2 = raw_params.get("kappa2")

    grid = _grid(_require(obj, "grid", "config"), ndim)
    schedule = _build(Schedule, _require(obj, "schedule", "config"), "schedule")
    try:
        schedule.n_steps
    except ValueError as err:
        raise ConfigError(f"invalid schedule: {err}") from None

    integrator = obj.get("integrator", "sbdf2")
    if integrator not in INTEGRATORS:
        raise ConfigError(f"unknown integrator {integrator!r}")
    casimirs = obj.get("casimirs", ["q", "q2"])
    if model != "bkbk2d" and "casimirs" in obj:
        raise ConfigError("casimirs apply to the 2D model only")
    for c in casimirs:
        try:
            casimir_from_name(c)
        except ValueError as err:
            raise ConfigError(str(err)) from None
    crest = obj.get("crest_level")
    if crest is not None and not isinstance(crest, (int, float)):
        raise ConfigError("crest_level must be a number")
    return RunConfig(model=model, scenario=name, scenario_params=dict(sparams), params=params,
                     grid=grid, schedule=schedule, integrator=integrator,
                     output_dir=str(obj.get("output_dir", "run")), casimirs=list(casimirs),
                     crest_level=crest, kappa2=kappa2)


def load_config(source):
    """Parse a config from a path or a JSON string."""
    text = source
    if isinstance(source, Path) or (isinstance(source, str) and not source.lstrip().startswith("{")):
        try:
            text = Path(source).read_text()
        except OSError as err:
            raise ConfigError(f"cannot read config: {err}") from None
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as err:
        raise ConfigError(f"config is not valid JSON: {err}") from None
    return parse_config(obj)


def dump_config(cfg):
    return json.dumps(cfg.to_dict(), indent=2, sort_keys=True)
