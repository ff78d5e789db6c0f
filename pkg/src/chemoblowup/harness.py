"""Command implementations behind the CLI, and the phase-plane scan.

Every ``cmd_*`` function takes a ``RunConfig`` and returns ``(exit_code,
text)``; files go under ``cfg.output.directory``. Exit codes: 0 success,
1 analytic or verification failure, 2 invalid input (raised as
``InvalidParameterError`` and mapped by the CLI).
"""
from __future__ import annotations

import csv
import io
import math
import os
import platform
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from . import __version__
from .config import RunConfig, dumps
from .errors import InfeasibleError, InvalidParameterError, PreconditionError
from .exponents import (Exponents, blowup_condition, bounded_condition, classify_point,
                        classify_region, select_exponents)
from .model import MassState, ModelParams, RadialProfile, make_params
from .operators import Sampling, verify_subsolution
from .solver import (SimConfig, dominance_experiment, graded_grid, ordering_experiment, run,
                     subsolution_mass_state, write_series, write_snapshots)
from .subsolution import SubsolutionParams, derive_constants

# standardized toy data shared by every simulated scan point
REFERENCE_EXPONENTS = Exponents(0.1, 0.1, 0.45, "reference")
TOY_Y0 = 1e3
TOY_THETA = 1.0
TOY_AMPLITUDE = 16.0
SCAN_N = 256
SCAN_GAMMA = 2.0

NOT_REPRODUCIBLE = ("theory-grade data (y0 of order 1e139 for the reference set) cannot be "
                    "simulated; simulations use toy parameters and are empirical companions "
                    "to the analytic verifier")


def model_params(cfg: RunConfig, m1=None, m2=None) -> ModelParams:
    m = cfg.model
    return make_params(m.n, m.R, m.m1 if m1 is None else m1, m.m2 if m2 is None else m2,
                       m.k1, m.k2, m.mu1, m.mu2, reg=m.diffusion_reg)


def exponents_for(cfg: RunConfig, params: ModelParams) -> Exponents:
    e = cfg.exponents
    if e.alpha is not None:
        exp = Exponents(e.alpha, e.beta, e.delta, "manual")
        if not exp.satisfies(params.m1, params.m2, params.n):
            raise InfeasibleError(f"manual exponents violate the defining inequalities: "
                                  f"{exp.residuals(params.m1, params.m2, params.n)}")
        return exp
    return select_exponents(params.m1, params.m2, params.n)


def constants_for(cfg: RunConfig, params: ModelParams, exp: Exponents,
                  toy_defaults: bool = False) -> SubsolutionParams:
    ini = cfg.initial
    y0, theta = ini.y0_override, ini.theta_override
    if toy_defaults:
        y0 = TOY_Y0 if y0 is None else y0
        theta = TOY_THETA if theta is None else theta
    return derive_constants(params, exp, y0=y0, theta=theta)


def _require_blowup(params: ModelParams):
    if not blowup_condition(params.m1, params.m2, params.n):
        raise PreconditionError(
            f"blow-up condition fails at (m1, m2, n) = ({params.m1}, {params.m2}, {params.n})")


def _outdir(cfg: RunConfig) -> str:
    d = cfg.output.directory
    os.makedirs(d, exist_ok=True)
    return d


def _kv(pairs) -> str:
    return "".join(f"{k}={v}\n" for k, v in pairs)


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


# ---------------------------------------------------------------------------


def cmd_classify(m1: float, m2: float, n: int):
    if not (m1 > 1 and m2 > 1) or int(n) != n or n < 3:
        raise InvalidParameterError("need m1 > 1, m2 > 1 and an integer n >= 3")
    text = _kv([("m1", _fmt(float(m1))), ("m2", _fmt(float(m2))), ("n", int(n)),
                ("region", classify_region(m1, m2, n).value),
                ("blowup", _fmt(blowup_condition(m1, m2, n))),
                ("bounded", _fmt(bounded_condition(m1, m2, n))),
                ("class", classify_point(m1, m2, n))])
    return 0, text


def params_report(sp: SubsolutionParams, exp: Exponents) -> str:
    lines = [("mode", sp.mode), ("alpha", _fmt(exp.alpha)), ("beta", _fmt(exp.beta)),
             ("delta", _fmt(exp.delta)), ("exponents", exp.provenance)]
    if exp.star_pair is not None:
        lines.append(("star_pair", f"{_fmt(exp.star_pair[0])},{_fmt(exp.star_pair[1])}"))
    out = _kv(lines)
    out += "name,linear,log,representable\n"
    for name, lin, lg, ok in sp.as_records():
        out += f"{name},{_fmt(lin) if ok else 'not-representable'},{_fmt(lg)},{_fmt(ok)}\n"
    out += _kv((f"feasible_{k}", _fmt(v)) for k, v in sp.feasibility.items())
    return out


def cmd_params(cfg: RunConfig):
    params = model_params(cfg)
    _require_blowup(params)
    exp = exponents_for(cfg, params)
    sp = constants_for(cfg, params, exp)
    text = params_report(sp, exp)
    with open(os.path.join(_outdir(cfg), "params.txt"), "w") as fh:
        fh.write(text)
    return (0 if all(sp.feasibility.values()) or sp.mode != "theory-grade" else 1), text


def cmd_verify(cfg: RunConfig):
    params = model_params(cfg)
    _require_blowup(params)
    exp = exponents_for(cfg, params)
    sp = constants_for(cfg, params, exp)
    v = cfg.verify
    per_time = max(1, math.ceil(v.samples_per_region / v.time_samples))
    report = verify_subsolution(sp, params, Sampling(v.time_samples, per_time))
    text = report.to_text()
    with open(os.path.join(_outdir(cfg), "verify.txt"), "w") as fh:
        fh.write(text)
    return (0 if report.verdict == "pass" else 1), text


# ---------------------------------------------------------------------------
# simulation


def _load_profiles(path: str):
    try:
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    except (OSError, ValueError) as exc:
        raise InvalidParameterError(f"cannot read initial data {path}: {exc}") from None
    if data.shape[1] != 3:
        raise InvalidParameterError("initial data file needs columns r,u,w")
    return RadialProfile(data[:, 0], data[:, 1]), RadialProfile(data[:, 0], data[:, 2])


def initial_state(cfg: RunConfig, params: ModelParams, s: np.ndarray):
    """Initial mass state on ``s`` and, for toy data, the constants used."""
    ini = cfg.initial
    n = params.n
    A = ini.amplitude
    if ini.kind == "constant":
        return MassState(s, A * s / n, A * s / n), None
    if ini.kind == "file":
        from .model import mass_from_profile

        u0, w0 = _load_profiles(ini.path)
        if abs(u0.R - params.R) > 1e-12 * params.R:
            raise InvalidParameterError("initial data radius does not match [model] R")
        return MassState(s, A * mass_from_profile(u0, s, n), A * mass_from_profile(w0, s, n)), None
    if blowup_condition(params.m1, params.m2, params.n) or cfg.exponents.alpha is not None:
        exp = exponents_for(cfg, params)
    else:
        exp = REFERENCE_EXPONENTS
    sp = constants_for(cfg, params, exp, toy_defaults=True)
    base = subsolution_mass_state(sp, s)
    return MassState(s, A * base.U, A * base.W), sp


def sim_config(cfg: RunConfig, params: ModelParams, init, T_ref=None) -> SimConfig:
    so = cfg.solver
    return SimConfig(params, init, so.N, so.gamma, so.t_end, so.cfl, so.dt_min,
                     cfg.output.cadence, so.rho_max, enforce_monotone=so.enforce_monotone,
                     subsolution_T=T_ref)


def cmd_simulate(cfg: RunConfig):
    params = model_params(cfg)
    so = cfg.solver
    s = graded_grid(params.Rn, so.N, so.gamma)
    init, sp = initial_state(cfg, params, s)
    res = run(sim_config(cfg, params, init, sp.T if sp is not None else None))
    d = _outdir(cfg)
    write_series(res, os.path.join(d, "series.csv"))
    write_snapshots(res, os.path.join(d, "snapshots.csv"))
    b = res.blowup
    meta = [("package_version", __version__), ("numpy_version", np.__version__),
            ("python_version", platform.python_version()), ("seed", cfg.compare.seed),
            ("data_mode", "toy" if sp is not None else cfg.initial.kind),
            ("mu1", _fmt(res.mu[0])), ("mu2", _fmt(res.mu[1])), ("steps", res.steps),
            ("blowup_fired", _fmt(b.fired)), ("blowup_trigger", b.trigger),
            ("blowup_detail", b.detail), ("t_detect", _fmt(b.t_detect)),
            ("T_subsolution", _fmt(b.T_ref)), ("t_detect_over_T", _fmt(b.ratio_to_T)),
            ("t_final", _fmt(float(res.t[-1]))), ("note", NOT_REPRODUCIBLE)]
    text = _kv(meta)
    with open(os.path.join(d, "metadata.txt"), "w") as fh:
        fh.write(text)
        fh.write("\n# configuration\n")
        fh.write(dumps(cfg))
    return 0, text


# ---------------------------------------------------------------------------
# scan


@dataclass(frozen=True)
class ScanRecord:
    i: int
    j: int
    m1: float
    m2: float
    theory_class: str
    region_tag: str
    sim_class: str = "skipped"
    t_detect: Optional[float] = None
    note: str = ""


SCAN_COLUMNS = ("i", "j", "m1", "m2", "theory_class", "region_tag", "sim_class",
                "t_detect", "note")


def standard_toy_sim(cfg: RunConfig, m1: float, m2: float):
    """The fixed toy run used at every simulated scan point."""
    base = model_params(cfg)
    params = model_params(cfg, m1, m2)
    sp = derive_constants(base.with_exponents(1.1, 1.1), REFERENCE_EXPONENTS,
                          y0=TOY_Y0, theta=TOY_THETA)
    s = graded_grid(params.Rn, SCAN_N, SCAN_GAMMA)
    ref = subsolution_mass_state(sp, s)
    init = MassState(s, TOY_AMPLITUDE * ref.U, TOY_AMPLITUDE * ref.W)
    t_end = min(1.0, 0.99 * sp.T)
    return run(SimConfig(params, init, SCAN_N, SCAN_GAMMA, t_end, subsolution_T=sp.T))


def scan_point(cfg: RunConfig, i: int, j: int, m1: float, m2: float, simulate: bool) -> ScanRecord:
    n = cfg.model.n
    rec = dict(i=i, j=j, m1=m1, m2=m2, theory_class=classify_point(m1, m2, n),
               region_tag=classify_region(m1, m2, n).value)
    if not simulate:
        return ScanRecord(**rec, note="simulation not requested")
    try:
        res = standard_toy_sim(cfg, m1, m2)
    except Exception as exc:  # per-point failures never abort the scan
        return ScanRecord(**rec, note=f"{type(exc).__name__}: {exc}".replace("\n", " "))
    b = res.blowup
    if b.fired:
        return ScanRecord(**rec, sim_class="blowup", t_detect=b.t_detect, note=b.trigger)
    return ScanRecord(**rec, sim_class="no-blowup", note=f"horizon t={res.t[-1]!r}")


def scan(cfg: RunConfig) -> List[ScanRecord]:
    sc = cfg.scan
    m1s = np.linspace(*sc.m1_range, sc.steps)
    m2s = np.linspace(*sc.m2_range, sc.steps)
    simulate = sc.mode in ("simulate", "both")
    return [scan_point(cfg, i, j, float(a), float(b), simulate)
            for i, a in enumerate(m1s) for j, b in enumerate(m2s)]


def scan_table(records: List[ScanRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SCAN_COLUMNS)
    for r in records:
        w.writerow([_fmt(getattr(r, c)) for c in SCAN_COLUMNS])
    return buf.getvalue()


def cmd_scan(cfg: RunConfig):
    text = scan_table(scan(cfg))
    with open(os.path.join(_outdir(cfg), "scan.csv"), "w", newline="") as fh:
        fh.write(text)
    return 0, text


# ---------------------------------------------------------------------------
# comparison experiments


def random_ordered_pairs(base: MassState, count: int, seed: int):
    """Ordered pairs ``lo <= hi`` built from ``base`` with random smooth bumps.

    Each pair scales the base data, then adds ``eps s^a (R^n - s)^b`` (zero at
    both ends) to one or both components of the upper state.
    """
    rng = np.random.default_rng(seed)
    s = base.s_grid
    Rn = s[-1]
    pairs = []
    for _ in range(count):
        scale = rng.uniform(0.5, 2.0)
        U, W = scale * base.U, scale * base.W
        a, b = rng.uniform(1.0, 3.0, 2)
        # keep the upper state nondecreasing: bump slope stays below the data's
        eps = rng.uniform(1e-4, 1e-2) * scale * U[-1] / Rn
        bump = eps * (s / Rn) ** a * (1 - s / Rn) ** b * Rn
        lo = MassState(s, U, W)
        hi = MassState(s, U + bump, W + rng.uniform(0.0, 1.0) * bump)
        pairs.append((lo, hi))
    return pairs


def cmd_compare(cfg: RunConfig):
    params = model_params(cfg)
    co = cfg.compare
    s = graded_grid(params.Rn, co.N, cfg.solver.gamma)
    base, _ = initial_state(cfg, params, s)
    small = SimConfig(params, base, co.N, cfg.solver.gamma, co.t_end, cfg.solver.cfl,
                      cadence=co.t_end / 10)
    lines = [("seed", co.seed), ("pairs", co.pairs)]
    violations = 0
    for k, pair in enumerate(random_ordered_pairs(base, co.pairs, co.seed)):
        rep = ordering_experiment(small, pair)
        violations += not rep.ok
        lines.append((f"pair_{k}", f"ok={_fmt(rep.ok)} min_gap_U={_fmt(rep.min_gap_U)} "
                      f"min_gap_W={_fmt(rep.min_gap_W)} tol={_fmt(rep.tol)} "
                      f"first_violation={rep.first_violation}"))
    lines.append(("ordering_violations", violations))
    if blowup_condition(params.m1, params.m2, params.n):
        exp = exponents_for(cfg, params)
        sp = constants_for(cfg, params, exp, toy_defaults=True)
        dom = dominance_experiment(sim_config(cfg, params, None), sp, exp)
        lines += [("dominance_label", dom.label), ("dominance_horizon", _fmt(dom.horizon)),
                  ("dominance_min_diff", _fmt(dom.min_diff)),
                  ("dominance_scale", _fmt(dom.scale)),
                  ("dominance_within_tolerance", _fmt(dom.dominated))]
        lines += [("dominance_note", note) for note in dom.notes]
    else:
        lines.append(("dominance_note", "skipped: blow-up condition fails"))
    text = _kv(lines)
    with open(os.path.join(_outdir(cfg), "compare.txt"), "w") as fh:
        fh.write(text)
    return (0 if violations == 0 else 1), text
