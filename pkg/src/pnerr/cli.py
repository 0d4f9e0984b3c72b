"""Command-line front end.

Every command builds an in-memory result (a table or a record), writes it
as CSV or JSON, and drops a run manifest next to each written file.
Exit codes: 0 success, 1 computation error, 2 usage error.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import hashlib
import io
import json
import math
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np

from . import __version__
from . import coeffs, constants, explicit, mengcheck, random_model, sieve, zeta
from ._numeric import format_number, set_threads
from .errors import DependencyError, PnerrError


class UsageError(Exception):
    """Bad invocation; maps to exit status 2."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


@dataclass
class Result:
    name: str
    columns: list[str] | None = None
    rows: list[Sequence[Any]] = field(default_factory=list)
    record: dict | None = None
    text: str | None = None  # preformatted CSV, used verbatim
    inputs: list[str] = field(default_factory=list)


# --------------------------------------------------------------------------
# Emission
# --------------------------------------------------------------------------

def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        f = float(v)
        return f if math.isfinite(f) else str(f)
    if isinstance(v, complex):
        return [v.real, v.imag]
    return v


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, float, np.integer, np.floating)):
        return format_number(v)
    return "" if v is None else str(v)


def render(result: Result, fmt: str) -> str:
    if result.text is not None and fmt == "csv":
        return result.text
    if result.record is not None:
        if fmt == "json":
            return json.dumps(_jsonable(result.record), indent=2, sort_keys=True) + "\n"
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["key", "value"])
        for k, v in result.record.items():
            w.writerow([k, json.dumps(_jsonable(v)) if isinstance(v, (dict, list, tuple)) else _cell(v)])
        return buf.getvalue()
    if fmt == "json":
        recs = [dict(zip(result.columns, (_jsonable(c) for c in row))) for row in result.rows]
        return json.dumps(recs, indent=2) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(result.columns)
    for row in result.rows:
        w.writerow([_cell(c) for c in row])
    return buf.getvalue()


def _digest(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def write_manifest(out: Path, argv: Sequence[str], config: dict, inputs: Sequence[str], wall: float) -> Path:
    manifest = {
        "command": list(argv),
        "config": _jsonable({k: v for k, v in config.items() if not callable(v)}),
        "tool_version": __version__,
        "inputs": {p: _digest(p) for p in inputs},
        "wall_time_seconds": wall,
        "outputs": [str(out)],
    }
    path = out.with_name(out.name + ".manifest.json")
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def _target(out: str | None, name: str, fmt: str) -> Path | None:
    if out is None:
        return None
    p = Path(out)
    if p.is_dir():
        return p / f"{name}.{fmt}"
    return p


# --------------------------------------------------------------------------
# Shared helpers
# --------------------------------------------------------------------------

def _floats(text: str | None) -> list[float]:
    if not text:
        return []
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"not a comma-separated list of numbers: {text!r}") from None


def _load_zeros(args) -> tuple[zeta.ZeroTable, list[str]]:
    if getattr(args, "zeros", None):
        table = zeta.import_zeros(args.zeros)
        if table.kind == "zeta" and not (table.has_zeta_prime and table.has_zeta_2rho):
            table = table.with_companions()
        return table, [args.zeros]
    return zeta.cached_zeros(args.count), []


def _sequence(args) -> tuple[coeffs.CoefficientSequence, zeta.ZeroTable | None, list[str]]:
    prebuilt = getattr(args, "sequence", None)
    if prebuilt is not None:
        return prebuilt, None, []
    table, inputs = _load_zeros(args)
    return coeffs.build_sequence(args.kind, table), table, inputs


def _default_grid(top: float, points: int = 16) -> list[float]:
    return [float(t) for t in np.geomspace(100.0, top, points)]


# --------------------------------------------------------------------------
# Commands
# --------------------------------------------------------------------------

def cmd_zeros(args) -> Result:
    if args.action == "compute":
        table = zeta.compute_zeros(args.count, args.tol, companions=not args.no_companions)
        inputs: list[str] = []
    elif args.action == "import":
        if not args.path:
            raise UsageError("zeros import needs --path")
        table = zeta.import_zeros(args.path, args.kind)
        inputs = [args.path]
    else:
        table, inputs = zeta.cached_zeros(args.count, args.tol), []
    res = Result("zeros", inputs=inputs, text=zeta.zeros_text(table))
    res.columns = ["n", "gamma", "re_zeta_prime", "im_zeta_prime", "re_zeta_2rho", "im_zeta_2rho"]
    for i in range(len(table)):
        zp, z2 = table.zeta_prime[i], table.zeta_2rho[i]
        res.rows.append([i + 1, float(table.gammas[i])] + [None if math.isnan(v) else float(v)
                                                            for v in (zp.real, zp.imag, z2.real, z2.imag)])
    return res


def cmd_sieve(args) -> Result:
    points = _floats(args.points)
    if args.no_grid:
        xs = np.unique(np.asarray(points, dtype=float))
    else:
        xs = sieve.geometric_grid(2.0, float(args.limit), args.grid_ratio, points)
    xs = xs[xs <= args.limit]
    table = sieve.summatory(args.kind, args.limit, xs, q=args.q, a=args.a, segment=args.segment)
    res = Result("sieve", ["x", "raw", "normalized"])
    res.rows = [[x, r, e] for x, r, e in zip(table.xs, table.raw, table.normalized)]
    return res


def _residual_result(seq, table_inputs, xmax: float, step: float, X: float | None, c: float) -> Result:
    kind = {"psi": "psi", "mertens": "mertens_M", "liouville": "liouville_L"}[seq.kind]
    xs = np.arange(2.0 + step / 2, xmax, step)
    tab = sieve.summatory(kind, int(math.floor(xmax)) + 1, xs)
    es = explicit.ExplicitSum(seq, X if X is not None else seq.coverage, c)
    phi2 = 2.0 * seq.sign * np.asarray(explicit.phi_sum(es, xs))
    resid = explicit.residual(es, tab)
    res = Result("residual", ["x", "E", "phi2", "residual"], inputs=list(table_inputs))
    res.rows = [list(r) for r in zip(xs, tab.normalized, phi2, resid)]
    return res


def cmd_explicit(args) -> Result:
    seq, table, inputs = _sequence(args)
    if args.action == "compare":
        return _residual_result(seq, inputs, args.xmax, args.step, args.X, args.c)
    T = args.T if args.T is not None else seq.coverage
    if args.action == "scan":
        step = args.step or explicit.default_step(T)
        scan = explicit.scan_extremes(seq, T, (args.tmin, args.tmax), step)
        thresholds = _floats(args.thresholds)
        rec = {
            "kind": seq.kind, "T": T, "t_min": scan.t_min, "t_max": scan.t_max, "step": scan.step,
            "n_points": scan.n_points, "max_value": scan.max_value, "argmax": scan.argmax,
            "min_value": scan.min_value, "argmin": scan.argmin,
            "resolution_warning": scan.resolution_warning,
            "measure_above": {format_number(v): scan.measure_above(v) for v in thresholds},
            "S0": coeffs.partial_sums(seq, T).S0,
        }
        return Result("scan", record=rec, inputs=inputs)
    if args.action == "laplace":
        est = explicit.empirical_laplace(seq, args.s, T, args.tmax)
        mgf = random_model.mgf_product(seq, args.s, T)
        rec = {"kind": seq.kind, "s": args.s, "T": T, "t_max": args.tmax, "time_average": est.value,
               "mgf_product": mgf, "relative_deviation": est.value / mgf - 1, "mean_F": est.mean_F,
               "step": est.step}
        return Result("laplace", record=rec, inputs=inputs)
    Y = args.Y if args.Y is not None else T
    sm = explicit.fejer_smooth(seq, args.t, T, args.Z, Y)
    rec = {"kind": seq.kind, "t": args.t, "T": T, "Z": args.Z, "Y": Y, "smoothed": sm.value,
           "quadrature_error": sm.error, "F": explicit.F_value(seq, args.t, T),
           "kernel_mass": explicit.kernel_mass(T, args.Z)}
    return Result("smooth", record=rec, inputs=inputs)


def cmd_assumptions(args) -> Result:
    seq, table, inputs = _sequence(args)
    grid = _floats(args.grid) or _default_grid(seq.coverage)
    rep = coeffs.fit_assumptions(seq, grid)
    return Result("assumptions", record=rep.to_dict(), inputs=inputs)


def cmd_random(args) -> Result:
    seq, table, inputs = _sequence(args)
    terms = args.terms or len(seq)
    if args.action == "tail":
        rep = coeffs.fit_assumptions(seq, _default_grid(seq.coverage))
        est = random_model.tail_probability(seq, args.V, terms, args.samples, args.seed,
                                            alpha=rep.alpha, A=rep.A, eps=args.eps)
        rec = dict(est.__dict__)
        rec.update(seed=args.seed, terms=terms, alpha=rep.alpha, A=rep.A, eps=args.eps,
                   rng=random_model.RNG_ALGORITHM)
        return Result("tail", record=rec, inputs=inputs)
    if args.action == "sample":
        dist = random_model.sample_Xr(seq, terms, args.samples, args.seed)
        v = np.linspace(dist.support[0], dist.support[-1], args.bins)
        res = Result("samples", ["v", "cdf"], inputs=inputs)
        res.rows = [[a, b] for a, b in zip(v, dist(v))]
        return res
    T = float(seq.lambdas[terms - 1])
    ta = explicit.time_average_distribution(seq, T, 1.0, args.tmax, args.points)
    mc = random_model.sample_Xr(seq, terms, args.samples, args.seed)
    rec = {"kind": seq.kind, "terms": terms, "T": T, "t_max": args.tmax, "time_points": args.points,
           "samples": args.samples, "seed": args.seed, "rng": random_model.RNG_ALGORITHM,
           "ks": random_model.compare_distributions(ta, mc)}
    return Result("dist_compare", record=rec, inputs=inputs)


def cmd_constants(args) -> Result:
    if args.which == "a":
        est = constants.constant_a(args.prime_limit)
        rec = {"a": est.value, "tail_bound": est.tail_bound, "prime_limit": est.prime_limit,
               "a_via_barnes": constants.constant_a_barnes(args.prime_limit), **est.details}
    elif args.which == "b":
        est = constants.constant_b(args.prime_limit, args.n_limit)
        rec = {"b": est.value, "tail_bound": est.tail_bound, "prime_limit": est.prime_limit,
               "n_limit": args.n_limit, **est.details}
    else:
        rec = {"zeta_prime_minus_one": constants.zeta_prime_minus_one(),
               "log_glaisher": constants.log_glaisher()}
    return Result(f"constant_{args.which.replace('-', '_')}", record=rec)


def cmd_moments(args) -> Result:
    table, inputs = _load_zeros(args)
    grid = _floats(args.grid) or _default_grid(table.coverage, 12)
    if args.kind == "Jk":
        ms = constants.moment_sum("J", table, grid, args.k, args.prime_limit)
    else:
        ms = constants.moment_sum("K", table, grid, args.s, args.prime_limit)
    res = Result("moments", ["T", "value", "predicted", "ratio"], inputs=inputs)
    res.rows = [list(r) for r in zip(ms.T_grid, ms.values, ms.predicted, ms.ratio)]
    return res


def cmd_meng(args) -> Result:
    seq, table, inputs = _sequence(args)
    X = args.X if args.X is not None else seq.coverage
    theta = args.theta
    if theta is None:
        theta = coeffs.fit_assumptions(seq, _default_grid(seq.coverage)).theta
    rep = mengcheck.double_sum_report(seq, _floats(args.T_grid), X, args.V, theta)
    res = Result("meng", ["T", "double_sum", "window_integral", "predicted_exponent"], inputs=inputs)
    res.rows = [[T, d, w, rep.predicted_exponent]
                for T, d, w in zip(rep.T_grid, rep.double_sums, rep.window_integrals)]
    return res


# --------------------------------------------------------------------------
# Pipeline
# --------------------------------------------------------------------------

STAGES = ("zeros", "sequence", "residual", "assumptions", "tail", "distribution",
          "constants", "moments", "meng")
_NEEDS = {"sequence": "zeros", "residual": "sequence", "assumptions": "sequence", "tail": "sequence",
          "distribution": "sequence", "moments": "zeros", "meng": "sequence"}


def run_pipeline(config_path: str, fmt: str | None, seed: int, argv: Sequence[str]) -> list[Path]:
    cp = configparser.ConfigParser()
    try:
        read = cp.read(config_path, encoding="utf-8")
    except configparser.Error as exc:
        raise UsageError(f"bad config: {exc}") from None
    if not read:
        raise UsageError(f"cannot read config {config_path}")
    if not cp.has_section("pipeline") or not cp.get("pipeline", "stages", fallback="").strip():
        raise UsageError("config needs a [pipeline] section with a 'stages' key")
    stages = [s.strip() for s in cp.get("pipeline", "stages").split(",") if s.strip()]
    unknown = [s for s in stages if s not in STAGES]
    if unknown:
        raise UsageError(f"unknown stages: {', '.join(unknown)}")
    for s in stages:
        need = _NEEDS.get(s)
        if need and need not in stages:
            raise DependencyError(f"stage '{s}' needs stage '{need}'")
    out_dir = Path(cp.get("pipeline", "out_dir", fallback="pipeline_out"))
    out_dir.mkdir(parents=True, exist_ok=True)
    seed = cp.getint("pipeline", "seed", fallback=seed)

    def opt(section, key, default, conv=str):
        if not cp.has_section(section) or not cp.has_option(section, key):
            return default
        return conv(cp.get(section, key))

    written: list[Path] = []
    state: dict[str, Any] = {}
    manifests: dict[str, Path] = {}

    def upstream(stage: str) -> list[str]:
        chain, need = [], _NEEDS.get(stage)
        while need:
            chain.append(str(manifests[need]))
            need = _NEEDS.get(need)
        return chain

    def emit(stage: str, res: Result, started: float, config: dict):
        kind = fmt or ("json" if res.record is not None else "csv")
        if res.text is not None:
            kind = "csv"
        path = out_dir / f"{res.name}.{kind}"
        path.write_text(render(res, kind), encoding="utf-8")
        config = {**config, "upstream_manifests": upstream(stage)}
        manifests[stage] = write_manifest(path, argv, config, res.inputs, time.perf_counter() - started)
        written.extend([path, manifests[stage]])

    for stage in stages:
        started = time.perf_counter()
        sect = dict(cp[stage]) if cp.has_section(stage) else {}
        ns = argparse.Namespace(seed=seed, **sect)
        if stage == "zeros":
            count = opt("zeros", "count", 2000, int)
            path = opt("zeros", "path", None)
            if path:
                table, inputs = _load_zeros(argparse.Namespace(zeros=path, count=count))
            else:
                table = zeta.cached_zeros(count, opt("zeros", "tolerance", 1e-10, float))
                inputs = []
            state["table"] = table
            res = Result("zeros", text=zeta.zeros_text(table), inputs=inputs)
            emit(stage, res, started, {"stage": stage, **vars(ns)})
            continue
        if stage == "sequence":
            state["seq"] = coeffs.build_sequence(opt("sequence", "kind", "mertens"), state["table"])
            seq = state["seq"]
            res = Result("sequence", ["n", "lambda", "modulus", "phase"])
            res.rows = [[i + 1, l, m, b] for i, (l, m, b) in enumerate(zip(seq.lambdas, seq.moduli, seq.phases))]
        elif stage == "residual":
            res = _residual_result(state["seq"], [], opt(stage, "xmax", 50.0, float),
                                   opt(stage, "step", 0.1, float), opt(stage, "x", None, float),
                                   opt(stage, "c", 0.0, float))
        elif stage == "assumptions":
            seq = state["seq"]
            grid = _floats(opt(stage, "grid", "")) or _default_grid(seq.coverage)
            res = Result("assumptions", record=coeffs.fit_assumptions(seq, grid).to_dict())
        elif stage == "tail":
            seq = state["seq"]
            args = argparse.Namespace(action="tail", V=opt(stage, "v", 1.0, float),
                                      terms=opt(stage, "terms", 0, int), samples=opt(stage, "samples", 100_000, int),
                                      seed=seed, eps=opt(stage, "eps", 0.1, float))
            res = _with_sequence(cmd_random, args, seq)
        elif stage == "distribution":
            seq = state["seq"]
            args = argparse.Namespace(action="dist-compare", terms=opt(stage, "terms", 30, int),
                                      samples=opt(stage, "samples", 100_000, int), seed=seed,
                                      tmax=opt(stage, "tmax", 1e5, float), points=opt(stage, "points", 200_001, int))
            res = _with_sequence(cmd_random, args, seq)
        elif stage == "constants":
            args = argparse.Namespace(which=opt(stage, "which", "a"), prime_limit=opt(stage, "prime_limit", 100_000, int),
                                      n_limit=opt(stage, "n_limit", 1_000_000, int))
            res = cmd_constants(args)
        elif stage == "moments":
            table = state["table"]
            grid = _floats(opt(stage, "grid", "")) or _default_grid(table.coverage, 12)
            ms = constants.moment_sum(opt(stage, "kind", "J"), table, grid, opt(stage, "parameter", -0.5, float))
            res = Result("moments", ["T", "value", "predicted", "ratio"])
            res.rows = [list(r) for r in zip(ms.T_grid, ms.values, ms.predicted, ms.ratio)]
        else:
            seq = state["seq"]
            args = argparse.Namespace(X=opt(stage, "x", None, float), theta=opt(stage, "theta", None, float),
                                      T_grid=opt(stage, "t_grid", "50,100,200,400"), V=opt(stage, "v", 0.0, float))
            res = _with_sequence(cmd_meng, args, seq)
        emit(stage, res, started, {"stage": stage, **vars(ns)})
    return written


def _with_sequence(fn: Callable[[argparse.Namespace], Result], args, seq) -> Result:
    args.sequence = seq
    return fn(args)


# --------------------------------------------------------------------------
# Parser
# --------------------------------------------------------------------------

def _zero_source(p: argparse.ArgumentParser, kind_choices=coeffs.SEQUENCE_KINDS, default_kind="mertens"):
    p.add_argument("--kind", choices=kind_choices, default=default_kind)
    p.add_argument("--zeros", metavar="PATH", help="zero-table file; computed and cached if omitted")
    p.add_argument("--count", type=int, default=2000, help="zeros to compute when --zeros is absent")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--out", default=argparse.SUPPRESS, help="output file or directory")
    common.add_argument("--threads", type=int, default=argparse.SUPPRESS)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    common.add_argument("--format", choices=("csv", "json"), default=argparse.SUPPRESS)

    p = _Parser(prog="pnerr", description="Prime number error terms and zeta-zero sums.")
    p.add_argument("--out", default=None, help="output file or directory (default: stdout)")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=("csv", "json"), default=None)
    p.add_argument("--version", action="version", version=f"pnerr {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    z = sub.add_parser("zeros", parents=[common], help="compute, import or export zeta zeros")
    z.add_argument("action", choices=("compute", "import", "export"))
    z.add_argument("--count", type=int, default=100)
    z.add_argument("--tol", type=float, default=1e-10)
    z.add_argument("--path")
    z.add_argument("--kind")
    z.add_argument("--no-companions", action="store_true")
    z.set_defaults(func=cmd_zeros)

    s = sub.add_parser("sieve", parents=[common], help="sieved summatory functions")
    s.add_argument("--kind", choices=sieve.KINDS, required=True)
    s.add_argument("--limit", type=int, required=True)
    s.add_argument("--grid-ratio", type=float, default=1.01)
    s.add_argument("--points")
    s.add_argument("--no-grid", action="store_true", help="evaluate only at --points")
    s.add_argument("--q", type=int)
    s.add_argument("--a", type=int)
    s.add_argument("--segment", type=int, default=sieve.SEGMENT_SIZE)
    s.set_defaults(func=cmd_sieve)

    e = sub.add_parser("explicit", parents=[common], help="explicit-formula sums")
    e.add_argument("action", choices=("compare", "scan", "laplace", "smooth"))
    _zero_source(e)
    e.add_argument("--xmax", type=float, default=50.0)
    e.add_argument("--step", type=float)
    e.add_argument("--X", type=float, help="truncation height (default: all zeros)")
    e.add_argument("--c", type=float, default=0.0)
    e.add_argument("--T", type=float)
    e.add_argument("--tmin", type=float, default=1.0)
    e.add_argument("--tmax", type=float, default=1e4)
    e.add_argument("--thresholds")
    e.add_argument("--s", type=float, default=1.0)
    e.add_argument("--t", type=float, default=0.0)
    e.add_argument("--Z", type=float, default=100.0)
    e.add_argument("--Y", type=float)
    e.set_defaults(func=cmd_explicit)

    a = sub.add_parser("assumptions", parents=[common], help="growth fits of coefficient sums")
    _zero_source(a)
    a.add_argument("--grid")
    a.set_defaults(func=cmd_assumptions)

    r = sub.add_parser("random", parents=[common], help="random model")
    r.add_argument("action", choices=("tail", "sample", "dist-compare"))
    _zero_source(r)
    r.add_argument("--V", type=float, default=1.0)
    r.add_argument("--terms", type=int)
    r.add_argument("--samples", type=int, default=100_000)
    r.add_argument("--eps", type=float, default=0.1)
    r.add_argument("--bins", type=int, default=1001)
    r.add_argument("--tmax", type=float, default=1e6)
    r.add_argument("--points", type=int, default=2_000_001)
    r.set_defaults(func=cmd_random)

    c = sub.add_parser("constants", parents=[common], help="arithmetic constants")
    c.add_argument("which", choices=("a", "b", "zeta-prime-neg1"))
    c.add_argument("--prime-limit", type=int, default=100_000)
    c.add_argument("--n-limit", type=int, default=1_000_000)
    c.set_defaults(func=cmd_constants)

    m = sub.add_parser("moments", parents=[common], help="discrete moments of zeta'(rho)")
    m.add_argument("--kind", choices=("Jk", "Ks"), default="Jk")
    m.add_argument("--k", type=float, default=-0.5)
    m.add_argument("--s", type=float, default=1.0)
    m.add_argument("--zeros", metavar="PATH")
    m.add_argument("--count", type=int, default=2000)
    m.add_argument("--grid")
    m.add_argument("--prime-limit", type=int, default=100_000)
    m.set_defaults(func=cmd_moments)

    g = sub.add_parser("meng", parents=[common], help="double-sum and window-integral checks")
    _zero_source(g)
    g.add_argument("--T-grid", dest="T_grid", default="50,100,200,400")
    g.add_argument("--X", type=float)
    g.add_argument("--V", type=float, default=0.0)
    g.add_argument("--theta", type=float)
    g.set_defaults(func=cmd_meng)

    pl = sub.add_parser("pipeline", parents=[common], help="run a configured experiment")
    pl.add_argument("config")
    pl.set_defaults(func=None)
    return p


def run(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"error: code=usage {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    set_threads(args.threads)
    try:
        if args.command == "pipeline":
            run_pipeline(args.config, args.format, args.seed, argv)
            return 0
        started = time.perf_counter()
        res: Result = args.func(args)
        fmt = args.format or ("json" if res.record is not None else "csv")
        text = render(res, fmt)
        target = _target(args.out, res.name, fmt)
        if target is None:
            sys.stdout.write(text)
        else:
            target.write_text(text, encoding="utf-8")
            write_manifest(target, argv, {k: v for k, v in vars(args).items() if k != "func"},
                           res.inputs, time.perf_counter() - started)
        return 0
    except UsageError as exc:
        print(f"error: code=usage {exc}", file=sys.stderr)
        return 2
    except PnerrError as exc:
        print(f"error: code={exc.code} {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: code=io {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())
