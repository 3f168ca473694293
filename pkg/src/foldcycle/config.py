"""TOML run configuration. Unknown keys are rejected by their dotted path.

Schema (every table optional; defaults give the unit system, α = 2, ε = 0.01)::

    [coefficients.a]            # same for .b and .c
    mean = 1.0
    harmonics = [[1, 0.0, 0.5]] # [k, cos coefficient, sin coefficient]

    [regime]
    alpha = 2
    eps = 0.01

    [sections]
    R = 0.1
    beta_minus = -0.2
    beta_plus = -0.05
    y0 = 0.05

    [[remainders.fast]]         # also [[remainders.slow]]
    p = 3
    q = 0
    s = 0.0
    mean = 0.1
    harmonics = []

    [integrator]
    rtol = 1e-10
    atol = 1e-12
    h_min = 1e-13
    max_steps = 50000000

    [scan]
    eps = [0.01, 0.02]          # or eps_grid = "0.005:0.04:7"
    entry_r = -0.125
    theta0 = 0.0

    [lienard]
    f = [-1.0, 0.0, 1.0]        # ascending polynomial coefficients
    g = [0.0, 1.0]
    vartheta = 1.0
    [lienard.A]
    mean = 0.0
    harmonics = [[1, 0.0, 0.5]]

    [tipping]
    amplitude = 0.5
    nu = 1.0
    R = 0.3
    rho = 0.5
    theta0 = [0.55, 0.65, 0.75, 0.85, 0.95]
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, FoldCycleError
from .integrator import IntegratorConfig
from .model import (FAST, SLOW, Monomial, PrototypicalSystem, RemainderSpec, ScalingRegime,
                    SectionSpec)
from .periodic import PeriodicFn

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

_FN_KEYS = {"mean", "harmonics"}
_SCHEMA = {
    "coefficients": {"a": _FN_KEYS, "b": _FN_KEYS, "c": _FN_KEYS},
    "regime": {"alpha", "eps"},
    "sections": {"R", "beta_minus", "beta_plus", "y0"},
    "remainders": {"fast": {"p", "q", "s", "mean", "harmonics"},
                   "slow": {"p", "q", "s", "mean", "harmonics"}},
    "integrator": {"rtol", "atol", "h_min", "h_max", "max_steps"},
    "scan": {"eps", "eps_grid", "entry_r", "theta0"},
    "lienard": {"f": None, "g": None, "vartheta": None, "A": _FN_KEYS},
    "tipping": {"amplitude", "nu", "R", "rho", "theta0"},
}


@dataclass
class RunConfig:
    system: PrototypicalSystem = field(default_factory=PrototypicalSystem.unit)
    section: SectionSpec = field(default_factory=SectionSpec)
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    scan_eps: list[float] = field(default_factory=list)
    entry_r: float | None = None
    theta0: float = 0.0
    lienard: dict = field(default_factory=dict)
    tipping: dict = field(default_factory=dict)
    path: str | None = None


def _check_keys(data, schema, prefix=""):
    if isinstance(schema, set):
        allowed = {k: None for k in schema}
    else:
        allowed = schema
    for key, val in data.items():
        path = f"{prefix}{key}"
        if key not in allowed:
            raise ConfigError(f"unknown key '{path}'")
        sub = allowed[key]
        if sub is None:
            continue
        if isinstance(val, list):
            for i, item in enumerate(val):
                if not isinstance(item, dict):
                    raise ConfigError(f"'{path}[{i}]' must be a table")
                _check_keys(item, sub, f"{path}[{i}].")
        elif isinstance(val, dict):
            _check_keys(val, sub, f"{path}.")
        else:
            raise ConfigError(f"'{path}' must be a table")


def _num(tbl, key, path, default=None, kind=float):
    if key not in tbl:
        if default is None:
            raise ConfigError(f"missing key '{path}{key}'")
        return default
    v = tbl[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"'{path}{key}' must be a number")
    if kind is int:
        if int(v) != v:
            raise ConfigError(f"'{path}{key}' must be an integer")
        return int(v)
    return float(v)


def periodic_from_table(tbl: dict, path: str) -> PeriodicFn:
    mean = _num(tbl, "mean", path, 0.0)
    harm = tbl.get("harmonics", [])
    if not isinstance(harm, list):
        raise ConfigError(f"'{path}harmonics' must be a list of [k, cos, sin]")
    rows = []
    for i, h in enumerate(harm):
        if not isinstance(h, list) or len(h) != 3:
            raise ConfigError(f"'{path}harmonics[{i}]' must be [k, cos, sin]")
        rows.append((h[0], h[1], h[2]))
    try:
        return PeriodicFn(mean, tuple(rows))
    except ValueError as exc:
        raise ConfigError(f"'{path}harmonics': {exc}") from exc


def parse_eps_grid(text: str) -> list[float]:
    """'a:b:n' gives n log-spaced values from a to b inclusive."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError(f"eps grid '{text}' must look like a:b:n")
    try:
        a, b, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise ConfigError(f"eps grid '{text}': {exc}") from exc
    if not (a > 0 and b > 0 and n >= 1):
        raise ConfigError(f"eps grid '{text}' needs positive bounds and n >= 1")
    if n == 1:
        return [a]
    return [float(v) for v in np.logspace(math.log10(a), math.log10(b), n)]


def config_from_dict(data: dict, path: str | None = None) -> RunConfig:
    _check_keys(data, _SCHEMA)
    cfg = RunConfig(path=path)
    coeff = data.get("coefficients", {})
    fns = {}
    for name in ("a", "b", "c"):
        fns[name] = (periodic_from_table(coeff[name], f"coefficients.{name}.")
                     if name in coeff else PeriodicFn.constant(1.0))
    reg = data.get("regime", {})
    try:
        regime = ScalingRegime(_num(reg, "alpha", "regime.", 2, int), _num(reg, "eps", "regime.", 0.01))
    except FoldCycleError as exc:
        raise ConfigError(f"[regime]: {exc}") from exc
    rems = data.get("remainders", {})
    specs = {}
    for target in (FAST, SLOW):
        terms = []
        for i, t in enumerate(rems.get(target, [])):
            p = f"remainders.{target}[{i}]."
            try:
                terms.append(Monomial(periodic_from_table(t, p), _num(t, "p", p, 0, int),
                                      _num(t, "q", p, 0, int), _num(t, "s", p, 0.0)))
            except FoldCycleError as exc:
                raise ConfigError(f"'{p[:-1]}': {exc}") from exc
        specs[target] = RemainderSpec(tuple(terms), target)
    try:
        cfg.system = PrototypicalSystem(fns["a"], fns["b"], fns["c"], regime, specs[FAST], specs[SLOW])
    except FoldCycleError as exc:
        raise ConfigError(f"system definition: {exc}") from exc
    sec = data.get("sections", {})
    d = SectionSpec()
    try:
        cfg.section = SectionSpec(_num(sec, "R", "sections.", d.R),
                                  _num(sec, "beta_minus", "sections.", d.beta_minus),
                                  _num(sec, "beta_plus", "sections.", d.beta_plus),
                                  _num(sec, "y0", "sections.", d.y0))
    except FoldCycleError as exc:
        raise ConfigError(f"[sections]: {exc}") from exc
    it = data.get("integrator", {})
    di = IntegratorConfig()
    cfg.integrator = IntegratorConfig(_num(it, "rtol", "integrator.", di.rtol),
                                      _num(it, "atol", "integrator.", di.atol),
                                      None,
                                      _num(it, "h_min", "integrator.", di.h_min),
                                      _num(it, "h_max", "integrator.", di.h_max),
                                      _num(it, "max_steps", "integrator.", di.max_steps, int))
    sc = data.get("scan", {})
    if "eps" in sc and "eps_grid" in sc:
        raise ConfigError("give either 'scan.eps' or 'scan.eps_grid', not both")
    if "eps" in sc:
        if not isinstance(sc["eps"], list) or not sc["eps"]:
            raise ConfigError("'scan.eps' must be a non-empty list")
        cfg.scan_eps = [float(v) for v in sc["eps"]]
    elif "eps_grid" in sc:
        cfg.scan_eps = parse_eps_grid(str(sc["eps_grid"]))
    if "entry_r" in sc:
        cfg.entry_r = _num(sc, "entry_r", "scan.")
    cfg.theta0 = _num(sc, "theta0", "scan.", 0.0)
    if "lienard" in data:
        li = dict(data["lienard"])
        if "A" in li:
            li["A"] = periodic_from_table(li["A"], "lienard.A.")
        cfg.lienard = li
    if "tipping" in data:
        cfg.tipping = dict(data["tipping"])
    return cfg


def load_config(path: str | None) -> RunConfig:
    if path is None:
        return RunConfig()
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return config_from_dict(data, path)
