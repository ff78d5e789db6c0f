"""Sectioned ``key = value`` run configuration.

Every key has a default, so an empty file is a valid configuration. Optional
numbers are written as empty values. ``dumps(loads(text))`` reproduces the
parsed configuration exactly (floats are written with ``repr``).
"""
from __future__ import annotations

import configparser
import io
import typing
from dataclasses import dataclass, field, fields, replace
from typing import Optional, Tuple

from .errors import InvalidParameterError

INITIAL_KINDS = ("constant", "toy_subsolution", "file")
SCAN_MODES = ("theory", "simulate", "both")


@dataclass(frozen=True)
class ModelSection:
    n: int = 3
    R: float = 1.0
    m1: float = 1.1
    m2: float = 1.1
    k1: float = 1.0
    k2: float = 1.0
    diffusion_reg: float = 1.0
    mu1: float = 1.0
    mu2: float = 1.0


@dataclass(frozen=True)
class ExponentsSection:
    """Manual exponents; all empty means automatic selection."""

    alpha: Optional[float] = None
    beta: Optional[float] = None
    delta: Optional[float] = None


@dataclass(frozen=True)
class InitialSection:
    kind: str = "toy_subsolution"
    y0_override: Optional[float] = None
    theta_override: Optional[float] = None
    amplitude: float = 1.0
    path: str = ""


@dataclass(frozen=True)
class SolverSection:
    N: int = 256
    gamma: float = 2.0
    cfl: float = 0.8
    t_end: float = 1.0
    rho_max: Optional[float] = None
    dt_min: Optional[float] = None
    enforce_monotone: bool = False


@dataclass(frozen=True)
class VerifySection:
    samples_per_region: int = 10000
    time_samples: int = 100


@dataclass(frozen=True)
class ScanSection:
    m1_range: Tuple[float, float] = (1.05, 2.0)
    m2_range: Tuple[float, float] = (1.05, 2.0)
    steps: int = 4
    mode: str = "theory"


@dataclass(frozen=True)
class CompareSection:
    pairs: int = 20
    seed: int = 0
    N: int = 64
    t_end: float = 0.02


@dataclass(frozen=True)
class OutputSection:
    directory: str = "out"
    cadence: Optional[float] = None


@dataclass(frozen=True)
class RunConfig:
    model: ModelSection = field(default_factory=ModelSection)
    exponents: ExponentsSection = field(default_factory=ExponentsSection)
    initial: InitialSection = field(default_factory=InitialSection)
    solver: SolverSection = field(default_factory=SolverSection)
    verify: VerifySection = field(default_factory=VerifySection)
    scan: ScanSection = field(default_factory=ScanSection)
    compare: CompareSection = field(default_factory=CompareSection)
    output: OutputSection = field(default_factory=OutputSection)

    def __post_init__(self):
        validate(self)

    def with_overrides(self, m1=None, m2=None, n=None, out=None) -> "RunConfig":
        model = self.model
        if m1 is not None:
            model = replace(model, m1=float(m1))
        if m2 is not None:
            model = replace(model, m2=float(m2))
        if n is not None:
            model = replace(model, n=int(n))
        output = self.output if out is None else replace(self.output, directory=str(out))
        return replace(self, model=model, output=output)


SECTIONS = tuple(f.name for f in fields(RunConfig))


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, tuple):
        return ", ".join(_fmt(x) for x in v)
    return str(v)


def _parse(raw: str, proto, section: str, key: str):
    raw = raw.strip()
    try:
        if proto is bool:
            low = raw.lower()
            if low not in ("true", "false", "yes", "no", "on", "off", "1", "0"):
                raise ValueError(raw)
            return low in ("true", "yes", "on", "1")
        if proto == Optional[float]:
            return None if raw == "" else float(raw)
        if proto is int:
            return int(raw)
        if proto is float:
            return float(raw)
        if proto == Tuple[float, float]:
            parts = [p for p in raw.replace(",", " ").split() if p]
            if len(parts) != 2:
                raise ValueError(raw)
            return (float(parts[0]), float(parts[1]))
        return raw
    except ValueError:
        raise InvalidParameterError(f"[{section}] {key} = {raw!r} is not valid") from None


def loads(text: str) -> RunConfig:
    """Parse configuration text; unknown sections or keys are rejected."""
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise InvalidParameterError(f"unparseable configuration: {exc}") from None
    kwargs = {}
    for sec_field in fields(RunConfig):
        cls = sec_field.default_factory
        name = sec_field.name
        if not cp.has_section(name):
            kwargs[name] = cls()
            continue
        known = {f.name: f for f in fields(cls)}
        vals = {}
        for key, raw in cp.items(name):
            if key not in known:
                raise InvalidParameterError(f"unknown key [{name}] {key}")
            vals[key] = _parse(raw, _type_of(cls, key), name, key)
        kwargs[name] = cls(**vals)
    extra = set(cp.sections()) - set(SECTIONS)
    if extra:
        raise InvalidParameterError(f"unknown sections: {sorted(extra)}")
    return RunConfig(**kwargs)


def _type_of(cls, key):
    return typing.get_type_hints(cls)[key]


def load(path) -> RunConfig:
    try:
        with open(path) as fh:
            return loads(fh.read())
    except OSError as exc:
        raise InvalidParameterError(f"cannot read configuration {path}: {exc}") from None


def dumps(cfg: RunConfig) -> str:
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    for name in SECTIONS:
        sec = getattr(cfg, name)
        cp[name] = {f.name: _fmt(getattr(sec, f.name)) for f in fields(sec)}
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()


def _need(cond, msg):
    if not cond:
        raise InvalidParameterError(msg)


def validate(cfg: RunConfig) -> None:
    m, ini, so, ve, sc, co, out = (cfg.model, cfg.initial, cfg.solver, cfg.verify,
                                   cfg.scan, cfg.compare, cfg.output)
    _need(m.n >= 3, "[model] n must be >= 3")
    _need(m.R > 0, "[model] R must be positive")
    _need(m.m1 > 1 and m.m2 > 1, "[model] m1, m2 must exceed 1")
    _need(m.k1 > 0 and m.k2 > 0, "[model] k1, k2 must be positive")
    _need(m.diffusion_reg > 0, "[model] diffusion_reg must be positive")
    _need(m.mu1 > 0 and m.mu2 > 0, "[model] mu1, mu2 must be positive")
    ex = (cfg.exponents.alpha, cfg.exponents.beta, cfg.exponents.delta)
    _need(all(v is None for v in ex) or all(v is not None and 0 < v < 1 for v in ex),
          "[exponents] alpha, beta, delta must be all empty or all in (0, 1)")
    _need(ini.kind in INITIAL_KINDS, f"[initial] kind must be one of {INITIAL_KINDS}")
    _need(ini.y0_override is None or ini.y0_override > 0, "[initial] y0_override must be positive")
    _need(ini.theta_override is None or ini.theta_override >= 0,
          "[initial] theta_override must be nonnegative")
    _need(ini.amplitude > 0, "[initial] amplitude must be positive")
    _need(ini.kind != "file" or ini.path, "[initial] path is required for kind = file")
    _need(so.N >= 16, "[solver] N must be >= 16")
    _need(so.gamma >= 1, "[solver] gamma must be >= 1")
    _need(0 < so.cfl <= 1, "[solver] cfl must lie in (0, 1]")
    _need(so.t_end > 0, "[solver] t_end must be positive")
    _need(so.rho_max is None or so.rho_max > 0, "[solver] rho_max must be positive")
    _need(so.dt_min is None or so.dt_min > 0, "[solver] dt_min must be positive")
    _need(ve.samples_per_region >= 1 and ve.time_samples >= 1,
          "[verify] sample counts must be positive")
    for name, (lo, hi) in (("m1_range", sc.m1_range), ("m2_range", sc.m2_range)):
        _need(1 < lo <= hi, f"[scan] {name} must satisfy 1 < lo <= hi")
    _need(sc.steps >= 1, "[scan] steps must be >= 1")
    _need(sc.mode in SCAN_MODES, f"[scan] mode must be one of {SCAN_MODES}")
    _need(co.pairs >= 1 and co.N >= 16 and co.t_end > 0, "[compare] pairs, N, t_end out of range")
    _need(out.cadence is None or out.cadence > 0, "[output] cadence must be positive")
