"""Command-line entry point.

Every subcommand reads an optional flat config file (``--config``), takes
each schema key as a flag as well, validates everything before computing,
and writes its CSV, SVG and ``report.json`` files only once the run has
finished.  Exit codes: 0 success, 1 a failed acceptance suite or bisection,
2 configuration or usage error, 3 internal invariant violation.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import re
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .config import GLOBAL_KEYS, SCHEMAS, ConfigError, RunConfig, read_config_file, resolve

EXIT_OK, EXIT_FAILED, EXIT_CONFIG, EXIT_INVARIANT = 0, 1, 2, 3


@dataclass
class Table:
    header: list[str]
    rows: list[tuple] = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.header)
        for row in self.rows:
            w.writerow([_cell(v) for v in row])
        return buf.getvalue()


def _cell(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, np.integer):
        return int(v)
    return v


@dataclass
class RunReport:
    metadata: dict
    tables: dict = field(default_factory=dict)  # file name -> Table
    figures: dict = field(default_factory=dict)  # file name -> SVG text
    summary: list = field(default_factory=list)  # (check, passed, detail)
    exit_code: int = EXIT_OK

    def write(self, out_dir: Path) -> list[Path]:
        out_dir.mkdir(parents=True, exist_ok=True)
        written = []
        for name, table in self.tables.items():
            (out_dir / name).write_text(table.to_csv())
            written.append(out_dir / name)
        for name, svg in self.figures.items():
            (out_dir / name).write_text(svg)
            written.append(out_dir / name)
        doc = {"metadata": self.metadata, "tables": sorted(self.tables), "figures": sorted(self.figures),
               "summary": [{"check": c, "passed": p, "detail": d} for c, p, d in self.summary],
               "exit_code": self.exit_code}
        (out_dir / "report.json").write_text(json.dumps(doc, indent=2, default=str) + "\n")
        written.append(out_dir / "report.json")
        return written


def _versions() -> dict:
    import numba
    import scipy
    return {"dioecious": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
            "numba": numba.__version__, "python": sys.version.split()[0]}


# -- plans: validated inputs, built before any computation --------------------------------

def _coefficient(coeff: str | None, d: int) -> float | None:
    if coeff is None:
        return None
    named = {"g-i": 2.0 * d, "g-tilde-i": 2.0 * d * (2 * d + 1)}
    if coeff.lower() in named:
        return named[coeff.lower()]
    try:
        return float(coeff)
    except ValueError:
        raise ConfigError(f"coeff must be g-i, g-tilde-i or a number (got {coeff!r})") from None


def _spec(cfg: RunConfig, lam: float):
    from .pde.systems import ReactionSpec, System
    d = cfg["d"]
    if d < 1:
        raise ConfigError("d must be positive")
    return ReactionSpec(System(cfg["system"]), lam, dim_d=d, coefficient=_coefficient(cfg["coeff"], d),
                        variant=cfg["variant"])


_INIT = re.compile(r"^\s*(constant|bump)\s*\(([^)]*)\)\s*$")


def parse_init(text: str) -> tuple[str, list[float]]:
    """``constant(a[,b])`` or ``bump(L,l[,a,b])``."""
    m = _INIT.match(text)
    if not m:
        raise ConfigError(f"init must look like constant(a[,b]) or bump(L,l[,a,b]) (got {text!r})")
    try:
        args = [float(a) for a in m.group(2).split(",") if a.strip()]
    except ValueError:
        raise ConfigError(f"init arguments must be numbers (got {text!r})") from None
    kind = m.group(1)
    if kind == "constant" and len(args) not in (1, 2):
        raise ConfigError("constant takes one or two arguments")
    if kind == "bump" and len(args) not in (2, 4):
        raise ConfigError("bump takes two or four arguments")
    if kind == "bump" and not args[0] > args[1] > 0:
        raise ConfigError("bump(L, l) needs L > l > 0")
    return kind, args


def _amplitudes(spec, a: float | None, b: float | None) -> np.ndarray:
    """Component amplitudes from occupied density ``a`` and doubly occupied density ``b``."""
    from .critical import plateau_state
    from .pde.systems import System
    if a is None:
        return plateau_state(spec)[0]
    b = a if b is None else b
    s = spec.system
    if s in (System.SYS9, System.SYS12):
        if not 0 <= b <= a <= 1:
            raise ConfigError("four-state systems need 0 <= b <= a <= 1")
        return np.array([1.0 - a, (a - b) / 2, (a - b) / 2, b])
    if s in (System.SYS10, System.INDIVIDUAL):
        return np.array([a, b])
    return np.array([a])


def _plan_simulate_ips(cfg):
    from .ips.torus import IpsParams, Model, Stirring
    params = IpsParams(cfg["lambda"], model=Model(cfg["model"]), stirring=Stirring(cfg["stirring"]),
                       eps=cfg["eps"], torus_side=cfg["torus_side"], dim=cfg["dim"])
    if cfg["replicas"] < 1 or cfg["n_samples"] < 1 or cfg["t_end"] < 0:
        raise ConfigError("replicas and n_samples must be positive and t_end nonnegative")
    if not 0 <= cfg["density"] <= 1:
        raise ConfigError("density must lie in [0, 1]")
    return params


def _plan_solve_pde(cfg):
    from .pde.solver import PdeField
    from .pde.systems import COMPONENTS, System
    spec = _spec(cfg, cfg["lambda"])
    kind, args = parse_init(cfg["init"])
    dx, length, bc = cfg["dx"], cfg["length"], cfg["bc"]
    if dx <= 0 or length <= 2 * dx:
        raise ConfigError("need dx > 0 and length > 2 dx")
    if bc == "periodic":
        n = int(round(length / dx))
        x = -length / 2 + dx * np.arange(n)
    else:
        x = np.arange(0.0, length + dx / 2, dx)
    if kind == "constant":
        prof = np.ones_like(x)
        amp = _amplitudes(spec, args[0], args[1] if len(args) > 1 else None)
    else:
        from .pde.profiles import bump_f0
        prof = bump_f0(x, args[0], args[1])
        amp = _amplitudes(spec, *(args[2:4] if len(args) == 4 else (None, None)))
    names = COMPONENTS[spec.system]
    if len(amp) != len(names):
        amp = np.resize(amp, len(names))
    data = amp[:, None] * prof[None, :]
    if spec.system in (System.SYS9, System.SYS12):
        data[0] = 1.0 - data[1:].sum(axis=0)
    fld = PdeField(names, data, dx, bc, float(x[0]))
    times = [cfg["t_end"]] if cfg["output_times"] is None else sorted(
        float(t) for t in cfg["output_times"].split(",") if t.strip())
    if not times or times[0] < 0:
        raise ConfigError("output_times must be nonnegative")
    if cfg["dt"] is not None:
        from .pde.solver import stability_limit
        limit = stability_limit(dx, fld.dim, spec)
        if not 0 < cfg["dt"] <= limit:
            raise ConfigError(f"dt must lie in (0, {limit:.6g}], the explicit stability limit")
    return spec, fld, times


_DEFAULT_RANGES = {"sys11": (4.2, 5.0), "individual": (4.2, 5.0), "contact": (0.5, 2.0)}


def _plan_find_lambda_c(cfg):
    from .pde.systems import System
    spec = _spec(cfg, 1.0)
    lo, hi = cfg["lo"], cfg["hi"]
    if lo is None or hi is None:
        s, d = cfg["system"], cfg["d"]
        if s in _DEFAULT_RANGES:
            b_lo, b_hi = _DEFAULT_RANGES[s]
            k = spec.beta  # beta at lam = 1
            dlo, dhi = b_lo / k, b_hi / k
        elif s in ("sys9", "sys10"):
            dlo, dhi = 2.0 / d, 2.4 / d
        elif s == "sys12" and d == 2:
            dlo, dhi = 0.2, 0.35
        else:
            raise ConfigError(f"no default bracket for {s} at d = {d}; give lo and hi")
        lo = dlo if lo is None else lo
        hi = dhi if hi is None else hi
    if spec.system is System.HEAT:
        raise ConfigError("the heat equation has no critical rate")
    if not 0 <= lo < hi or cfg["width"] <= 0:
        raise ConfigError("need 0 <= lo < hi and width > 0")
    return spec, lo, hi


def _plan_verify(cfg):
    if cfg["c"] < 1:
        raise ConfigError("c must be at least 1")
    if cfg["grid"] < 100:
        raise ConfigError("grid must be at least 100")
    if cfg["samples"] < 2:
        raise ConfigError("samples must be at least 2")
    return None


def _plan_op(cfg):
    from .percolation import OpConfig
    if cfg["replicas"] < 1:
        raise ConfigError("replicas must be positive")
    return OpConfig(cfg["gamma"], p=cfg["p"], n_levels=cfg["n_levels"], M=cfg["M"])


def _plan_good_event(cfg):
    if cfg["lambda"] < 0 or cfg["T"] < 0 or cfg["replicas"] < 1:
        raise ConfigError("lambda and T must be nonnegative, replicas positive")
    return None


PLANS = {"simulate-ips": _plan_simulate_ips, "solve-pde": _plan_solve_pde,
         "find-lambda-c": _plan_find_lambda_c, "verify-condition-star": _plan_verify,
         "simulate-op": _plan_op, "good-event": _plan_good_event, "accept": lambda cfg: None}


# -- runners ---------------------------------------------------------------------------------

def _run_simulate_ips(cfg, params, report):
    from .ips.engine import simulate_replicas
    from .ips.torus import full_config, random_config
    from .svg import series_svg
    init = full_config(params) if cfg["init"] == "full" else (
        lambda rng: random_config(params, rng, cfg["density"]))
    batch = simulate_replicas(params, init, cfg["t_end"], cfg["replicas"], cfg.seed, cfg["n_samples"])
    t = Table(["time", "density_any", "density_both", "replica"])
    for r in range(cfg["replicas"]):
        for i, ti in enumerate(batch.times):
            t.rows.append((ti, batch.densities[r, i, 0], batch.densities[r, i, 1], r))
    report.tables["ips_densities.csv"] = t
    mean = batch.densities.mean(axis=0)
    report.figures["ips_densities.svg"] = series_svg(
        {"occupied": (batch.times, mean[:, 0]), "doubly occupied": (batch.times, mean[:, 1])},
        title=f"{params.model.value}, lambda = {params.lam:g}", ylabel="mean site density")
    ext = int(np.isfinite(batch.extinction_times).sum())
    report.summary.append(("extinct replicas", None, f"{ext}/{cfg['replicas']} by t = {cfg['t_end']:g}"))
    report.summary.append(("final density_any", None, f"{mean[-1, 0]:.4f}"))


def _run_solve_pde(cfg, plan, report):
    from .pde.solver import evolve
    from .svg import field_svg
    spec, fld, times = plan
    t = Table(["time", "x"] + list(fld.names))
    x = fld.x
    for tt in times:
        evolve(fld, spec, tt, dt=cfg["dt"])
        for i in range(x.size):
            t.rows.append((fld.time, x[i]) + tuple(fld.data[:, i]))
    report.tables["pde_fields.csv"] = t
    report.figures["pde_fields.svg"] = field_svg(x, dict(zip(fld.names, fld.data)),
                                                 title=f"{spec.system.value} at t = {fld.time:g}")
    report.summary.append(("final sup", None, ", ".join(f"{n} {d.max():.6f}" for n, d in zip(fld.names, fld.data))))


def _run_find_lambda_c(cfg, plan, report):
    from .critical import bisect_lambda_c
    from .svg import series_svg
    spec, lo, hi = plan
    b = bisect_lambda_c(spec, lo, hi, cfg["width"], dx=cfg["dx"], horizon=cfg["horizon"],
                        half_width=cfg["half_width"], geometry=cfg["geometry"])
    t = Table(["iteration", "lo", "hi", "probe", "verdict"])
    for rec in b.transcript:
        t.rows.append((rec.iteration, rec.lo, rec.hi, rec.probe, rec.verdict.value))
    t.rows.append(("final", b.lo, b.hi, b.midpoint, "bracket"))
    report.tables["bisection.csv"] = t
    report.figures["fronts.svg"] = series_svg(
        {f"lambda = {lam:.6g} ({v.verdict.value})": (v.times[np.isfinite(v.front_positions)],
                                                     v.front_positions[np.isfinite(v.front_positions)])
         for lam, v in sorted(b.probes.items())},
        title=f"{spec.system.value}: front position per probe", ylabel="front position")
    report.summary.append(("bracket", True, f"lambda_c in [{b.lo:.6f}, {b.hi:.6f}], midpoint {b.midpoint:.6f}"))


def _run_verify(cfg, plan, report):
    from .star import (FlowGeometry, check_assumption41, condition_star_check, default_samples,
                       rate_condition, ratio_condition_exact, verify_domination)
    from .svg import phase_portrait_svg
    c = cfg["c"]
    geom = FlowGeometry(c=c)
    dom = verify_domination(c, cfg["grid"], geom)
    t = Table(["region", "min_eta1_minus_xi1", "min_eta2_minus_xi2"])
    for name, (a, b) in dom.region_margins.items():
        t.rows.append((name, a, b))
    report.tables["margins.csv"] = t
    th, al, ss, fr = default_samples(cfg["samples"], geom)
    a41 = check_assumption41(th, al, ss, geom, fr, flow=cfg["flow"])
    star = condition_star_check(c)
    ok20, lhs, rhs = ratio_condition_exact(int(geom.K1), int(geom.K2))
    ok27, m27 = rate_condition(geom.F1, geom.F2, geom.K1)
    report.summary += [
        ("K1/K2 ratio", ok20, f"{lhs} > {rhs}"),
        ("rate bound", ok27, f"margin {m27:.6f}"),
        ("xi <= eta", dom.passed, f"worst margin {dom.worst_margin:.3e} at {dom.witness} in {dom.witness_region}"),
        ("curve-flow assumption", a41.passed,
         f"{cfg['flow']} flow, {a41.n_checks} checks, worst margin {a41.worst_margin:.3e}"),
        ("interval expansion", star.passed, f"{star.status}; T = {star.T:.4g}, min v = {star.min_v_lower:.4f}"),
    ]
    s = Table(["check", "passed", "detail"])
    s.rows = [(a, b, d) for a, b, d in report.summary]
    report.tables["certificate.csv"] = s
    report.figures["phase_portrait.svg"] = phase_portrait_svg(c, geom)


def _run_op(cfg, op, report):
    from .percolation import binomial_frequency, simulate_op
    from .svg import series_svg
    run = simulate_op(op, cfg.seed, cfg["replicas"])
    t = Table(["level", "wet_count", "replica"])
    for r in range(cfg["replicas"]):
        for k in range(run.wet_counts.shape[1]):
            t.rows.append((k, run.wet_counts[r, k], r))
    report.tables["op_levels.csv"] = t
    levels = np.arange(run.wet_counts.shape[1])
    report.figures["op_levels.svg"] = series_svg({"mean wet count": (levels, run.wet_counts.mean(axis=0))},
                                                 title=f"gamma = {op.gamma:g}, p = {op.p:g}", xlabel="level")
    f = binomial_frequency(int(run.origin_wet.sum()), cfg["replicas"])
    report.summary.append(("origin wet at level 2n", None,
                           f"{f.estimate:.4f} (95% CI [{f.lo:.4f}, {f.hi:.4f}])"))


def _run_good_event(cfg, plan, report):
    from .percolation import good_event_bound, mc_good_event
    lam, T = cfg["lambda"], cfg["T"]
    bound = good_event_bound(lam, T)
    f = mc_good_event(lam, T, cfg["replicas"], cfg.seed)
    t = Table(["lambda", "T", "bound", "mc_estimate", "ci_low", "ci_high"])
    t.rows.append((lam, T, bound, f.estimate, f.lo, f.hi))
    report.tables["good_event.csv"] = t
    sigma = np.sqrt(max(bound * (1 - bound), 1e-300) / cfg["replicas"])
    ok = abs(f.estimate - bound) <= 3 * sigma or bound in (0.0, 1.0) and f.estimate == bound
    report.summary.append(("Monte Carlo within 3 sigma", bool(ok),
                           f"bound {bound:.6g}, estimate {f.estimate:.6g}, sigma {sigma:.2g}"))


def _run_accept(cfg, plan, report):
    from .acceptance import run_suite, suite_passed
    lines = run_suite(echo=lambda s: print(s, flush=True))
    t = Table(["line", "status", "title", "detail", "seconds"])
    for ln in lines:
        t.rows.append((ln.line_id, ln.tag, ln.title, ln.detail, round(ln.seconds, 1)))
        report.summary.append((ln.line_id, ln.passed, ln.detail))
    report.tables["acceptance.csv"] = t
    if not suite_passed(lines):
        report.exit_code = EXIT_FAILED


RUNNERS = {"simulate-ips": _run_simulate_ips, "solve-pde": _run_solve_pde,
           "find-lambda-c": _run_find_lambda_c, "verify-condition-star": _run_verify,
           "simulate-op": _run_op, "good-event": _run_good_event, "accept": _run_accept}


# -- argument parsing ------------------------------------------------------------------------

HELP = {
    "simulate-ips": "replica runs of the particle system; CSV of densities",
    "solve-pde": "finite-difference solution of a mean-field system",
    "find-lambda-c": "bisection for the critical birth rate of a mean-field system",
    "verify-condition-star": "certificates for the interval-expansion argument",
    "simulate-op": "oriented percolation survival",
    "good-event": "good-event probability, closed form and Monte Carlo",
    "accept": "run the acceptance suite",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dioecious", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, schema in SCHEMAS.items():
        sp = sub.add_parser(name, help=HELP[name])
        sp.add_argument("--config", help="flat key = value file")
        sp.add_argument("--dry-run", action="store_true", help="validate the configuration and stop")
        for key, spec in {**schema, **GLOBAL_KEYS}.items():
            choices = f" ({'|'.join(spec.kind)})" if isinstance(spec.kind, tuple) else ""
            default = "" if spec.required else f" [default: {spec.default}]"
            sp.add_argument("--" + key.replace("_", "-"), dest=f"key_{key}", default=None,
                            metavar=key.upper(), help=(spec.help + choices + default).strip())
    return parser


def dispatch(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    overrides = {k[4:]: v for k, v in vars(args).items() if k.startswith("key_") and v is not None}
    try:
        file_values = read_config_file(args.config) if args.config else {}
        cfg = resolve(args.command, file_values, overrides)
        plan = PLANS[args.command](cfg)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"dioecious {args.command}: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.dry_run:
        print(f"configuration ok ({cfg.digest()[:12]})")
        return EXIT_OK

    if cfg.threads > 1:
        import numba
        numba.set_num_threads(min(cfg.threads, numba.config.NUMBA_NUM_THREADS))
    from .critical import BracketInvalid
    from .ips.engine import CouplingViolation
    from .pde.solver import InstabilityError

    report = RunReport({"subcommand": cfg.subcommand, "config": cfg.values, "config_hash": cfg.digest(),
                        "versions": _versions()})
    t0 = time.perf_counter()
    try:
        RUNNERS[args.command](cfg, plan, report)
    except (CouplingViolation, InstabilityError) as exc:
        print(f"dioecious {args.command}: invariant violated: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except BracketInvalid as exc:
        print(f"dioecious {args.command}: {exc}", file=sys.stderr)
        return EXIT_FAILED
    report.metadata["wall_time_s"] = round(time.perf_counter() - t0, 3)
    report.write(cfg.output_dir)
    if args.command == "accept":
        return report.exit_code  # lines were echoed as they completed
    for check, passed, detail in report.summary:
        tag = {True: "PASS", False: "FAIL", None: "INFO"}[passed]
        print(f"[{tag}] {check}: {detail}")
    return report.exit_code


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
