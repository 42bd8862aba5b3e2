"""Command-line front end: single solves, convergence sweeps, the built-in
example registry, and CSV/JSON table output.

Config files are INI-style ([section] headers, key = value lines) with
expressions in quoted strings; see load_config for the key set.
"""

from __future__ import annotations

import argparse
import ast
import configparser
import json
import math
import sys
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .basis import BasisSpec, Interval
from .expr import Expr, ParseError, parse
from .oracle import uniform_grid
from .registry import EXAMPLES, ExampleEntry
from .solver import (
    CollocationStrategy,
    Derivative,
    General,
    Invertible,
    Nonlinearity,
    Polynomial,
    Problem,
    SolveOptions,
    TaylorStrategy,
    solve,
)

CSV_COLUMNS = ("N", "M", "L", "E_inf", "residual_linf", "newton_iters",
               "condition_estimate", "wall_ms")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    kernel: Expr
    f: Expr
    nonlinearity: Nonlinearity
    interval: tuple[float, float]
    bases: tuple[tuple[int, int], ...]
    exact: Expr | None = None
    exact_fn: object = None  # callable override (piecewise registry entries)
    options: SolveOptions = SolveOptions()
    out_format: str = "csv"
    out_path: str | None = None
    grid_size: int = 1000
    timing: bool = True
    check: dict[tuple[int, int], float] = field(default_factory=dict)


def _literal(raw: str, where: str):
    try:
        return ast.literal_eval(raw)
    except (ValueError, SyntaxError) as exc:
        raise ConfigError(f"{where}: cannot parse value {raw!r}: {exc}") from None


def _unquote(raw: str) -> str:
    raw = raw.strip()
    if len(raw) >= 2 and raw[0] == raw[-1] and raw[0] in "'\"":
        return raw[1:-1]
    return raw


def _parse_expr(raw: str, where: str) -> Expr:
    try:
        return parse(_unquote(raw))
    except ParseError as exc:
        raise ConfigError(f"{where}: {exc}") from None


def _pair_list(raw: str, where: str) -> tuple[tuple[int, int], ...]:
    value = _literal(f"[{raw}]", where)
    pairs = []
    for item in value:
        if (not isinstance(item, tuple) or len(item) != 2
                or not all(isinstance(v, int) and v >= 1 for v in item)):
            raise ConfigError(f"{where}: expected (N, M) pairs of positive integers")
        pairs.append((item[0], item[1]))
    if not pairs:
        raise ConfigError(f"{where}: empty sweep")
    return tuple(pairs)


def _nonlinearity(cfg: configparser.ConfigParser) -> Nonlinearity:
    if not cfg.has_section("nonlinearity"):
        raise ConfigError("missing [nonlinearity] section")
    sec = cfg["nonlinearity"]
    kind = sec.get("kind", "").strip().lower()
    where = "nonlinearity.kind"

    def expr_of(key: str, required: bool = True) -> Expr | None:
        if key not in sec:
            if required:
                raise ConfigError(f"nonlinearity.{key}: required for kind {kind!r}")
            return None
        return _parse_expr(sec[key], f"nonlinearity.{key}")

    def bracket_of(required: bool) -> tuple[float, float] | None:
        if "bracket" not in sec:
            if required:
                raise ConfigError(f"nonlinearity.bracket: required for kind {kind!r}")
            return None
        val = _literal(sec["bracket"], "nonlinearity.bracket")
        if not isinstance(val, tuple) or len(val) != 2:
            raise ConfigError("nonlinearity.bracket: expected 'lo, hi'")
        return (float(val[0]), float(val[1]))

    if kind == "invertible":
        return Invertible(G=expr_of("g"), Ginv=expr_of("ginv", required=False),
                          bracket=bracket_of(required=False))
    if kind == "derivative":
        try:
            return Derivative(order=sec.getint("order"))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"nonlinearity.order: {exc}") from None
    if kind == "polynomial":
        val = _literal(f"[{sec.get('alpha', '')}]", "nonlinearity.alpha")
        try:
            return Polynomial(alpha=tuple(float(v) for v in val))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"nonlinearity.alpha: {exc}") from None
    if kind == "taylor":
        return General(G=expr_of("g"), strategy=TaylorStrategy(
            degree=sec.getint("degree", fallback=8),
            center=sec.getfloat("center", fallback=0.0)))
    if kind == "collocation":
        return General(G=expr_of("g"), strategy=CollocationStrategy(
            bracket=bracket_of(required=True)))
    raise ConfigError(f"{where}: unknown nonlinearity kind {kind!r}")


def load_config(path: str) -> RunConfig:
    """Read and validate a run configuration; expressions are parsed eagerly
    and defaults filled (grid 1000, csv output, Newton tolerance 1e-12)."""
    cfg = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    try:
        with open(path, encoding="utf-8") as handle:
            cfg.read_file(handle, source=path)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from None
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None

    if not cfg.has_section("problem"):
        raise ConfigError("missing [problem] section")
    prob = cfg["problem"]
    for key in ("kernel", "f", "interval"):
        if key not in prob:
            raise ConfigError(f"problem.{key}: required")
    kernel = _parse_expr(prob["kernel"], "problem.kernel")
    f_expr = _parse_expr(prob["f"], "problem.f")
    interval = _literal(prob["interval"], "problem.interval")
    if not isinstance(interval, tuple) or len(interval) != 2:
        raise ConfigError("problem.interval: expected 't0, tf'")
    interval = (float(interval[0]), float(interval[1]))
    if not interval[1] > interval[0]:
        raise ConfigError("problem.interval: tf must exceed t0")
    exact = None
    if "exact_solution" in prob:
        exact = _parse_expr(prob["exact_solution"], "problem.exact_solution")

    nonlinearity = _nonlinearity(cfg)

    basis = cfg["basis"] if cfg.has_section("basis") else {}
    has_single = "m" in basis
    has_sweep = "sweep" in basis
    if has_single == has_sweep:
        raise ConfigError("basis: exactly one of 'M' (single run) or 'sweep' is required")
    if has_single:
        n = int(basis.get("n", 1))
        m = int(basis["m"])
        if n < 1 or m < 1:
            raise ConfigError("basis.N/basis.M: must be positive")
        bases = ((n, m),)
    else:
        bases = _pair_list(basis["sweep"], "basis.sweep")

    opts = SolveOptions()
    if cfg.has_section("solver"):
        sol = cfg["solver"]
        kwargs = {}
        if "newton_tol" in sol:
            kwargs["newton_tol"] = sol.getfloat("newton_tol")
        if "max_iter" in sol:
            kwargs["newton_max_iter"] = sol.getint("max_iter")
        if "scan_range" in sol:
            val = _literal(sol["scan_range"], "solver.scan_range")
            kwargs["scan_range"] = (float(val[0]), float(val[1]))
        if "residual_grid" in sol:
            kwargs["residual_grid"] = sol.getint("residual_grid")
        opts = replace(opts, **kwargs)

    out_format, out_path, grid_size = "csv", None, 1000
    if cfg.has_section("output"):
        out = cfg["output"]
        out_format = out.get("format", "csv").strip().lower()
        if out_format not in ("csv", "json"):
            raise ConfigError(f"output.format: expected csv or json, got {out_format!r}")
        out_path = out.get("path", fallback=None)
        grid_size = out.getint("grid", fallback=1000)

    return RunConfig(kernel=kernel, f=f_expr, nonlinearity=nonlinearity,
                     interval=interval, bases=bases, exact=exact,
                     options=opts, out_format=out_format, out_path=out_path,
                     grid_size=grid_size)


def config_from_example(entry: ExampleEntry, N: int | None = None,
                        M: int | None = None, check: bool = False) -> RunConfig:
    n, m = entry.recommended
    exact = parse(entry.exact) if isinstance(entry.exact, str) else None
    return RunConfig(
        kernel=parse(entry.kernel), f=parse(entry.f),
        nonlinearity=entry.nonlinearity, interval=entry.interval,
        bases=(((N if N is not None else n), (M if M is not None else m)),),
        exact=exact, exact_fn=entry.exact_fn(), options=entry.options,
        check=dict(entry.reference_errors) if check else {})


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, float) and math.isnan(value):
        return "nan"
    return format(float(value), ".17g")


def _run_single(config: RunConfig, n: int, m: int) -> dict:
    row = {"N": n, "M": m, "L": n * m, "E_inf": None, "residual_linf": math.nan,
           "newton_iters": 0, "condition_estimate": math.nan,
           "wall_ms": 0.0, "error": None, "converged": False}
    start = time.perf_counter()
    try:
        spec = BasisSpec(Interval(*config.interval), n, m)
        problem = Problem(config.kernel, config.f, config.nonlinearity, spec)
        solution = solve(problem, config.options)
        grid = uniform_grid(spec.interval, config.grid_size)
        exact_fn = config.exact_fn
        if exact_fn is None and config.exact is not None:
            from .expr import evaluate
            exact_fn = lambda t, _e=config.exact: evaluate(_e, {"t": t})
        if exact_fn is not None:
            from .oracle import max_error_fn
            row["E_inf"] = max_error_fn(solution, exact_fn, grid)
        d = solution.diagnostics
        row.update(residual_linf=d.residual_linf, newton_iters=d.newton_iters,
                   condition_estimate=d.condition_estimate, converged=d.converged)
    except Exception as exc:  # a failed row must not kill the sweep
        row["error"] = f"{type(exc).__name__}: {exc}"
    if config.timing:
        row["wall_ms"] = (time.perf_counter() - start) * 1e3
    return row


def _emit(rows: list[dict], config: RunConfig, out) -> None:
    if config.out_format == "json":
        payload = []
        for row in rows:
            item = {k: row[k] for k in CSV_COLUMNS}
            item["converged"] = row["converged"]
            if row["error"]:
                item["error"] = row["error"]
            for k, v in item.items():
                if isinstance(v, float) and math.isnan(v):
                    item[k] = None
            payload.append(item)
        out.write(json.dumps(payload, indent=2) + "\n")
    else:
        out.write(",".join(CSV_COLUMNS) + "\n")
        for row in rows:
            out.write(",".join(_fmt(row[k]) for k in CSV_COLUMNS) + "\n")


def run(config: RunConfig, out=None) -> int:
    """Solve every configured (N, M), emit the result table, and return the
    exit code: 0 all converged, 2 on any failure or non-convergence."""
    rows = [_run_single(config, n, m) for n, m in config.bases]
    sink = out or sys.stdout
    if config.out_path:
        with open(config.out_path, "w", encoding="utf-8") as handle:
            _emit(rows, config, handle)
    else:
        _emit(rows, config, sink)
    code = 0
    for row in rows:
        if row["error"] or not row["converged"]:
            code = 2
    if config.check:
        for row in rows:
            key = (row["N"], row["M"])
            expected = config.check.get(key)
            if expected is None or row["E_inf"] is None:
                continue
            ok = expected / 100.0 <= row["E_inf"] <= expected * 100.0
            sink.write(f"check N={key[0]} M={key[1]}: measured {row['E_inf']:.3g} "
                       f"vs reference {expected:.3g} -> {'PASS' if ok else 'FAIL'}\n")
            if not ok:
                code = 2
    return code


def list_examples(out=None) -> None:
    """Print the registry: identifier, one-line description, recommended basis."""
    sink = out or sys.stdout
    for key in sorted(EXAMPLES, key=lambda k: (len(k), k)):
        e = EXAMPLES[key]
        n, m = e.recommended
        sink.write(f"{key:6s} N={n} M={m:<3d} {e.description}\n")


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(
        prog="dov",
        description="Direct operational-vector solver for first-kind Volterra equations")
    sub = ap.add_subparsers(dest="command", required=True)

    def add_output_flags(p):
        p.add_argument("--format", choices=("csv", "json"), default=None)
        p.add_argument("--out", default=None, metavar="PATH")
        p.add_argument("--grid", type=int, default=None, metavar="N")
        p.add_argument("--no-timing", action="store_true",
                       help="report wall_ms as 0 for byte-reproducible output")

    p_solve = sub.add_parser("solve", help="single solve from a config file")
    p_solve.add_argument("config")
    add_output_flags(p_solve)

    p_sweep = sub.add_parser("sweep", help="convergence sweep from a config file")
    p_sweep.add_argument("config")
    add_output_flags(p_sweep)

    p_ex = sub.add_parser("examples", help="registry operations")
    p_ex.add_argument("action", choices=("list",))

    p_run = sub.add_parser("run-example", help="solve a built-in example")
    p_run.add_argument("key")
    p_run.add_argument("--N", type=int, default=None)
    p_run.add_argument("--M", type=int, default=None)
    p_run.add_argument("--check", action="store_true",
                       help="compare against the published reference errors")
    add_output_flags(p_run)

    args = ap.parse_args(argv)

    if args.command == "examples":
        list_examples()
        return 0

    try:
        if args.command == "run-example":
            try:
                entry = EXAMPLES[args.key]
            except KeyError:
                known = ", ".join(sorted(EXAMPLES))
                raise ConfigError(f"unknown example {args.key!r}; known: {known}")
            config = config_from_example(entry, args.N, args.M, check=args.check)
        else:
            config = load_config(args.config)
            single = len(config.bases) == 1
            if args.command == "solve" and not single:
                raise ConfigError("solve expects a single-basis config; use sweep")
            if args.command == "sweep" and single:
                raise ConfigError("sweep expects a config with a [basis] sweep list")
        overrides = {}
        if args.format:
            overrides["out_format"] = args.format
        if args.out:
            overrides["out_path"] = args.out
        if args.grid:
            overrides["grid_size"] = args.grid
        if args.no_timing:
            overrides["timing"] = False
        if overrides:
            config = replace(config, **overrides)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    return run(config)


def console_main() -> None:  # pragma: no cover
    sys.exit(main())
