"""Command-line front end: ``elastoball validate|solve|sweep|phase|oracle``.

Tables are comma separated with a header row and a leading ``# config:``
comment holding the resolved configuration as JSON.  Numbers are written
with 17 significant digits so that output files round-trip exactly.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .assumptions import certify
from .constitutive import BUILTIN_NAMES, LameParameters, load_model_file, make_builtin
from .errors import AssumptionError, ElastoballError
from .solver import SolveOptions, model_certificate, residual, solve_ball, sweep, verify_bounds

EXIT_OK, EXIT_DOMAIN, EXIT_USAGE = 0, 1, 2
ENV_RTOL, ENV_ATOL = "ELASTOBALL_TOL_REL", "ELASTOBALL_TOL_ABS"


class UsageError(Exception):
    """Invalid configuration detected before any computation."""


def fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    return f"{float(value):.16e}"


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return str(obj)


def _json_value(v):
    """Map non-finite floats to strings so the JSON stays standard."""
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    if isinstance(v, dict):
        return {k: _json_value(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_json_value(x) for x in v]
    return v


def dumps(obj) -> str:
    return json.dumps(_json_value(obj), sort_keys=True, default=_json_default)


@dataclass
class RunConfig:
    subcommand: str
    model: str
    lam: float | None = None
    mu: float | None = None
    kappa_ref: float = 1.0
    delta_c: float | None = None
    delta_c_range: tuple[float, float, int] | None = None
    rtol: float = 1e-10
    atol: float = 1e-12
    out: str | None = None
    experimental: bool = False
    extra: dict = field(default_factory=dict)


def parse_range(text: str) -> tuple[float, float, int]:
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("expected a:b:n")
    try:
        a, b, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad range {text!r}") from None
    if n < 1:
        raise argparse.ArgumentTypeError("n must be positive")
    return a, b, n


def _env_float(name: str, default: float) -> float:
    raw = os.environ.get(name)
    if raw is None:
        return default
    try:
        val = float(raw)
    except ValueError:
        raise UsageError(f"{name}={raw!r} is not a number") from None
    if not val > 0:
        raise UsageError(f"{name} must be positive")
    return val


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    src = common.add_mutually_exclusive_group()
    src.add_argument("--model", help="built-in name or path to a TOML model file")
    src.add_argument("--builtin", choices=BUILTIN_NAMES, help="built-in material")
    common.add_argument("--lambda", dest="lam", type=float, help="first Lame parameter")
    common.add_argument("--mu", type=float, help="shear modulus")
    common.add_argument("--kref", type=float, default=None, help="reference density K")
    common.add_argument("--tol", type=float, default=None, help="relative integration tolerance")
    common.add_argument("--out", help="output file (default: standard output)")
    common.add_argument("--experimental", action="store_true",
                        help="allow runs outside the proven range")

    parser = argparse.ArgumentParser(prog="elastoball", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="subcommand", required=True)
    sub.add_parser("validate", parents=[common], help="print the model certificate")
    p = sub.add_parser("solve", parents=[common], help="solve one ball")
    p.add_argument("--delta-c", type=float, required=True, help="central density over K")
    p.add_argument("--grid", type=int, default=2000, help="number of output radii")
    p = sub.add_parser("sweep", parents=[common], help="mass-radius table")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--delta-c-range", type=parse_range, help="linspace a:b:n of delta_c")
    g.add_argument("--delta-c", type=float, nargs="+", help="explicit delta_c values")
    p.add_argument("--workers", type=int, default=1)
    p = sub.add_parser("phase", parents=[common], help="boundary flow on x = 0")
    p.add_argument("--grid", type=int, default=4, help="initial conditions per axis")
    p.add_argument("--xc", type=float, default=None, help="also report the centre point (x_c, 1, 0)")
    p.add_argument("--xi-max", type=float, default=30.0)
    p.add_argument("--samples", type=int, default=200, help="records per trajectory")
    p = sub.add_parser("oracle", parents=[common], help="exact self-similar solution")
    p.add_argument("--grid", type=int, default=1000, help="number of radii")
    return parser


def resolve(args) -> tuple[RunConfig, object]:
    """Validate arguments and build the model; raises :class:`UsageError`."""
    source = args.builtin or args.model
    if source is None:
        raise UsageError("one of --model or --builtin is required")
    rtol = args.tol if args.tol is not None else _env_float(ENV_RTOL, 1e-10)
    atol = _env_float(ENV_ATOL, 1e-12)
    if not rtol > 0:
        raise UsageError("--tol must be positive")
    try:
        if source in BUILTIN_NAMES:
            if args.lam is None or args.mu is None:
                raise UsageError("--lambda and --mu are required with a built-in model")
            K = 1.0 if args.kref is None else args.kref
            model = make_builtin(source, LameParameters(args.lam, args.mu, K))
        else:
            path = Path(source)
            if not path.is_file():
                raise UsageError(f"{source!r} is neither a built-in ({', '.join(BUILTIN_NAMES)}) nor a file")
            overrides = {"lambda": args.lam, "mu": args.mu, "kappa_ref": args.kref}
            model = load_model_file(path, overrides)
            K = model.lame.kappa_ref
    except (ValueError, TypeError, KeyError, OSError) as exc:
        raise UsageError(str(exc)) from None
    cfg = RunConfig(
        subcommand=args.subcommand, model=source, lam=model.lame.lam, mu=model.lame.mu,
        kappa_ref=K, delta_c=getattr(args, "delta_c", None), rtol=rtol, atol=atol,
        out=args.out, experimental=args.experimental,
    )
    if args.subcommand == "sweep":
        cfg.delta_c = None
        if args.delta_c_range is not None:
            cfg.delta_c_range = args.delta_c_range
            a, b, n = args.delta_c_range
            cfg.extra["delta_c_list"] = np.linspace(a, b, n).tolist()
        else:
            cfg.extra["delta_c_list"] = list(args.delta_c)
        if args.workers < 1:
            raise UsageError("--workers must be positive")
        cfg.extra["workers"] = args.workers
    if args.subcommand == "solve":
        if args.grid < 50:
            raise UsageError("--grid must be at least 50")
        if not args.delta_c > 0:
            raise UsageError("--delta-c must be positive")
        cfg.extra["grid"] = args.grid
    if args.subcommand == "phase":
        if args.grid < 1 or args.samples < 2:
            raise UsageError("--grid and --samples must be positive")
        cfg.extra.update(grid=args.grid, xc=args.xc, xi_max=args.xi_max, samples=args.samples)
    if args.subcommand == "oracle":
        if model.name not in ("seth", "john"):
            raise UsageError("oracle supports the seth and john models")
        if args.grid < 10:
            raise UsageError("--grid must be at least 10")
        cfg.extra["grid"] = args.grid
    return cfg, model


def _write_table(out, cfg: RunConfig, columns, rows, comments=()):
    out.write("# config: " + dumps(asdict(cfg)) + "\n")
    for c in comments:
        out.write(f"# {c}\n")
    out.write(",".join(columns) + "\n")
    for row in rows:
        out.write(",".join(fmt(v) for v in row) + "\n")


def _open_out(cfg: RunConfig):
    if cfg.out is None:
        return sys.stdout, False
    return open(cfg.out, "w", encoding="utf-8", newline="\n"), True


def _emit(cfg, columns, rows, comments=(), summary=None):
    out, close = _open_out(cfg)
    try:
        _write_table(out, cfg, columns, rows, comments)
    finally:
        if close:
            out.close()
    if summary is not None:
        text = dumps(summary)
        if cfg.out is not None:
            Path(cfg.out + ".summary.json").write_text(text + "\n", encoding="utf-8")
        else:
            print(text, file=sys.stderr)


def _options(cfg: RunConfig, **kw) -> SolveOptions:
    return SolveOptions(rtol=cfg.rtol, atol=cfg.atol, experimental=cfg.experimental, **kw)


def certificate_report(cert) -> str:
    """Human-readable certificate, one assumption per line."""
    e = cert.exponents
    lines = [f"model: {cert.model_name}",
             "exponents: " + ("unavailable" if e is None else f"a={e.a} b={e.b} c={e.c}"),
             f"X_flat: {fmt(cert.x_flat)}",
             f"X_sharp: {fmt(cert.x_sharp)} ({cert.x_sharp_method})",
             f"Delta: {fmt(cert.delta_max)}"]
    for r in cert.assumption_results:
        status = {True: "pass", False: "FAIL", None: "n/a"}[r.passed]
        lines.append(f"{r.label}: {status}  {r.detail}")
    return "\n".join(lines)


def cmd_validate(cfg, model) -> int:
    cert = certify(model)
    print(certificate_report(cert))
    if cfg.out is not None:
        Path(cfg.out).write_text(dumps({"config": asdict(cfg), "certificate": cert.summary()}) + "\n",
                                 encoding="utf-8")
    if not cert.all_passed and not cfg.experimental:
        print(f"model fails {', '.join(cert.failures)}", file=sys.stderr)
        return EXIT_DOMAIN
    return EXIT_OK


def _require_certified(cfg, model):
    """Any failed assumption stops ``solve`` and ``sweep`` unless ``--experimental``."""
    cert = model_certificate(model)
    if not cert.all_passed and not cfg.experimental:
        raise AssumptionError(f"model {cert.model_name!r} fails {', '.join(cert.failures)}; "
                              "rerun with --experimental")


def cmd_solve(cfg, model) -> int:
    _require_certified(cfg, model)
    opts = _options(cfg, n_grid=cfg.extra["grid"])
    sol = solve_ball(model, cfg.delta_c * cfg.kappa_ref, cfg.kappa_ref, opts)
    bounds = verify_bounds(sol, model)
    summary = {
        "R": sol.R, "M": sol.M, "rho_c": sol.rho_c, "p_rad_center": float(sol.p_rad[0]),
        "margins": asdict(bounds), "worst_margin": bounds.worst, "bounds_ok": bounds.ok,
        "residual": residual(model, sol), "metadata": sol.metadata,
    }
    _emit(cfg, sol.COLUMNS, sol.columns(), summary=summary)
    return EXIT_OK


def cmd_sweep(cfg, model) -> int:
    _require_certified(cfg, model)
    recs = sweep(model, cfg.extra["delta_c_list"], cfg.kappa_ref, _options(cfg),
                 workers=cfg.extra["workers"])
    cols = ("delta_c", "R", "M", "p_rad_center", "worst_margin", "error")
    rows = [(r.delta_c, r.R, r.M, r.p_rad_center, r.worst_margin, r.error or "") for r in recs]
    _emit(cfg, cols, rows)
    for r in recs:
        if r.error:
            print(f"delta_c={r.delta_c}: {r.error}", file=sys.stderr)
    return EXIT_OK


def cmd_phase(cfg, model) -> int:
    from .dynsys import fixed_points_2d, line_fixed_point_report, sample_boundary_orbit, terminal_point

    reports = fixed_points_2d(model)
    if cfg.extra["xc"] is not None:
        reports.append(line_fixed_point_report(model, cfg.extra["xc"]))
    comments = ["fixed_point: " + dumps(asdict(r)) for r in reports]
    _, v_star = terminal_point(model)
    n = cfg.extra["grid"]
    ys = (np.arange(n) + 0.5) / n
    vs = 2.0 * v_star * (np.arange(n) + 0.5) / n
    rows = []
    k = 0
    for y0 in ys:
        for v0 in vs:
            xi, y, v = sample_boundary_orbit(model, y0, v0, cfg.extra["xi_max"], cfg.extra["samples"],
                                             rtol=cfg.rtol, atol=cfg.atol)
            rows.extend((str(k), a, b, c) for a, b, c in zip(xi, y, v))
            k += 1
    _emit(cfg, ("orbit", "xi", "y", "v"), rows, comments)
    return EXIT_OK


def cmd_oracle(cfg, model) -> int:
    from .oracles import exact_residuals, john_exact, seth_exact

    exact = (seth_exact if model.name == "seth" else john_exact)(model.lame, cfg.kappa_ref)
    r = np.geomspace(0.01 * min(exact.radii), 10.0 * max(exact.radii), cfg.extra["grid"])
    res = exact_residuals(model, exact, r)
    worst = np.maximum(res["momentum"], res["eta"])
    rows = zip(r, exact.delta(r), exact.eta(r), exact.p_rad(r), exact.p_tan(r), worst)
    summary = {"d": exact.d, "radii": list(exact.radii), "max_residual": float(np.max(worst))}
    _emit(cfg, ("r", "delta", "eta", "p_rad", "p_tan", "residual"), rows, summary=summary)
    return EXIT_OK


COMMANDS = {"validate": cmd_validate, "solve": cmd_solve, "sweep": cmd_sweep,
            "phase": cmd_phase, "oracle": cmd_oracle}


def run(argv=None) -> int:
    """Execute one subcommand; returns 0, 1 (domain error) or 2 (usage error)."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        cfg, model = resolve(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"elastoball: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return COMMANDS[cfg.subcommand](cfg, model)
    except ElastoballError as exc:
        print(f"elastoball: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
