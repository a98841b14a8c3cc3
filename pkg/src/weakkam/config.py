"""INI experiment configuration.

Sections and keys (unknown sections or keys are errors)::

    [model]
    family = linear | nonlinear | state_weighted
    potential = cosine_well | two_well | zero | fourier
    potential_cos = -1, 1          ; fourier only
    potential_sin =                ; fourier only
    weight_cos = 2                 ; state_weighted only: a(x) coefficients
    weight_sin = 0, 1
    g_coeffs = 1, 0, 1             ; nonlinear only: g(u) = sum c_i u^(i+1)
    r0 = 10

    [scheme]
    N = 200
    tau =                          ; default 1/N
    W = 8

    [run]
    lambdas = 0.4, 0.2, 0.1, 0.05, 0.025
    tol = 1e-9
    ...

    [expect]                       ; optional golden values
    c = 0
    aubry_size = 1
    n_measures = 1
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError
from .model import Family, FourierSeries, HamiltonianModel
from .scheme import DiscreteScheme

MODEL_KEYS = {"family", "potential", "potential_cos", "potential_sin", "weight_cos", "weight_sin",
              "g_coeffs", "r0"}
SCHEME_KEYS = {"n", "tau", "w"}
RUN_KEYS = {"lambdas", "tol", "eps_conv", "gap_tol", "tv_tol", "eps_tail", "cycle_cap", "diagnostic_node",
            "subsolution_nodes", "route_tol", "selection_tol", "lp_tol", "output", "oracle", "oracle_n"}
EXPECT_KEYS = {"c", "c_tol", "aubry_size", "n_measures"}
SECTIONS = {"model": MODEL_KEYS, "scheme": SCHEME_KEYS, "run": RUN_KEYS, "expect": EXPECT_KEYS}


@dataclass
class RunSettings:
    lambdas: list[float] = field(default_factory=lambda: [0.4, 0.2, 0.1, 0.05, 0.025])
    tol: float = 1e-9
    eps_conv: float = 0.05
    gap_tol: float = 0.05
    tv_tol: float = 0.1
    eps_tail: float = 1e-12
    cycle_cap: int = 10_000
    diagnostic_node: int | None = None  # default N/2
    subsolution_nodes: str = "sample"  # all | sample | none | comma list
    route_tol: float = 1e-6
    selection_tol: float = 1e-8
    lp_tol: float = 1e-9
    output: str = "out"
    oracle: bool = False
    oracle_n: int = 16


@dataclass
class Expectations:
    c: float | None = None
    c_tol: float = 1e-9
    aubry_size: int | None = None
    n_measures: int | None = None


@dataclass
class ExperimentConfig:
    model: HamiltonianModel
    scheme: DiscreteScheme
    run: RunSettings
    expect: Expectations
    source: str = "<memory>"
    name: str = "experiment"


def _floats(text: str) -> tuple[float, ...]:
    text = text.strip()
    if not text:
        return ()
    try:
        return tuple(float(t) for t in text.split(","))
    except ValueError as exc:
        raise ConfigError(f"expected comma-separated numbers, got {text!r}") from exc


def _number(section, key, kind, default=None):
    if key not in section or not section[key].strip():
        return default
    try:
        return kind(section[key])
    except ValueError as exc:
        raise ConfigError(f"[{section.name}] {key}: cannot parse {section[key]!r}") from exc


def _bool(section, key, default=False):
    if key not in section:
        return default
    try:
        return section.getboolean(key)
    except ValueError as exc:
        raise ConfigError(f"[{section.name}] {key}: not a boolean") from exc


def _potential(sec) -> FourierSeries:
    kind = sec.get("potential", "cosine_well").strip()
    if kind == "cosine_well":
        return FourierSeries.cosine_well()
    if kind == "two_well":
        return FourierSeries.two_well()
    if kind == "zero":
        return FourierSeries.constant(0.0)
    if kind == "fourier":
        cos = _floats(sec.get("potential_cos", "0")) or (0.0,)
        sin = _floats(sec.get("potential_sin", ""))
        return FourierSeries(cos=cos, sin=sin)
    raise ConfigError(f"[model] potential: unknown kind {kind!r}")


def _model(sec) -> HamiltonianModel:
    try:
        family = Family(sec.get("family", "linear").strip())
    except ValueError as exc:
        raise ConfigError(f"[model] family: {exc}") from exc
    weight = None
    if family is Family.STATE_WEIGHTED:
        cos = _floats(sec.get("weight_cos", "1")) or (0.0,)
        weight = FourierSeries(cos=cos, sin=_floats(sec.get("weight_sin", "")))
    elif "weight_cos" in sec or "weight_sin" in sec:
        raise ConfigError("[model] weight_* only applies to family state_weighted")
    g_coeffs = (1.0,)
    if family is Family.NONLINEAR:
        g_coeffs = _floats(sec.get("g_coeffs", "1"))
    elif "g_coeffs" in sec:
        raise ConfigError("[model] g_coeffs only applies to family nonlinear")
    try:
        return HamiltonianModel(family, _potential(sec), weight=weight, g_coeffs=g_coeffs,
                                r0=_number(sec, "r0", float, 10.0))
    except ValueError as exc:
        raise ConfigError(f"[model] {exc}") from exc


def parse_config(text: str, source: str = "<memory>") -> ExperimentConfig:
    cp = configparser.ConfigParser(interpolation=None)
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from exc
    for name in cp.sections():
        if name not in SECTIONS:
            raise ConfigError(f"unknown section [{name}]")
        unknown = set(cp[name]) - SECTIONS[name]
        if unknown:
            raise ConfigError(f"[{name}] unknown keys: {sorted(unknown)}")
    for required in ("model", "scheme"):
        if required not in cp:
            raise ConfigError(f"missing section [{required}]")

    model = _model(cp["model"])
    sch = cp["scheme"]
    try:
        scheme = DiscreteScheme(_number(sch, "n", int, 200), _number(sch, "tau", float, None),
                                _number(sch, "w", int, 8))
    except ValueError as exc:
        raise ConfigError(f"[scheme] {exc}") from exc

    run = RunSettings()
    if "run" in cp:
        r = cp["run"]
        if "lambdas" in r:
            run.lambdas = list(_floats(r["lambdas"]))
        for key, kind in (("tol", float), ("eps_conv", float), ("gap_tol", float), ("tv_tol", float),
                          ("eps_tail", float), ("cycle_cap", int),
                          ("diagnostic_node", int), ("route_tol", float), ("selection_tol", float),
                          ("lp_tol", float), ("oracle_n", int)):
            setattr(run, key, _number(r, key, kind, getattr(run, key)))
        run.subsolution_nodes = r.get("subsolution_nodes", run.subsolution_nodes).strip()
        run.output = r.get("output", run.output).strip()
        run.oracle = _bool(r, "oracle", run.oracle)
    if not run.lambdas:
        raise ConfigError("[run] lambdas must not be empty")
    if any(l <= 0 for l in run.lambdas):
        raise ConfigError("[run] lambdas must be positive")
    if any(b >= a for a, b in zip(run.lambdas, run.lambdas[1:])):
        raise ConfigError("[run] lambdas must be strictly decreasing")
    if run.tol <= 0 or run.eps_tail <= 0:
        raise ConfigError("[run] tolerances must be positive")

    exp = Expectations()
    if "expect" in cp:
        e = cp["expect"]
        exp.c = _number(e, "c", float, None)
        exp.c_tol = _number(e, "c_tol", float, exp.c_tol)
        exp.aubry_size = _number(e, "aubry_size", int, None)
        exp.n_measures = _number(e, "n_measures", int, None)
    name = Path(source).stem if source != "<memory>" else "experiment"
    return ExperimentConfig(model, scheme, run, exp, source, name)


def load_config(path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text, str(path))


def bundled_config(name: str) -> Path:
    """Path of a config shipped with the package (``pendulum``, ``two_well_weighted``, ...)."""
    path = Path(__file__).parent / "configs" / f"{name}.ini"
    if not path.exists():
        raise ConfigError(f"no bundled config named {name!r}")
    return path
