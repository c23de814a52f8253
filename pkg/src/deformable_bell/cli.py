"""Command-line entry point: ``deformable-bell <subcommand> [flags]``.

Exit codes: 0 success, 1 internal error, 2 validation error (density,
quadruple, design), 3 configuration / file error.  Flags override values
from ``--config``; the config file overrides built-in defaults.
"""

from __future__ import annotations

import argparse
import io
import json
import re
import sys

import numpy as np

from . import analytic, density, montecarlo
from .analytic import DesignError, DetectorQuadruple, InconsistentQuadrupleError
from .density import DensityFileError, DensityValidationError
from .gamma import MapConstructionError, build as build_map
from .montecarlo import ConfigError, ExperimentConfig

EXIT_OK, EXIT_INTERNAL, EXIT_VALIDATION, EXIT_CONFIG = 0, 1, 2, 3

SWEEP_COLUMNS = ("theta", "e_analytic", "e_hat", "stderr", "n_same", "n_diff", "n")

_VALIDATION_ERRORS = (DensityValidationError, InconsistentQuadrupleError, DesignError,
                      MapConstructionError)
_CONFIG_ERRORS = (ConfigError, DensityFileError, json.JSONDecodeError)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    return str(v)


def emit(results, fmt: str, out=None) -> None:
    """Write ``results`` as CSV or JSON to ``out`` (a path) or stdout.

    CSV input is ``(header, rows)``; JSON input is any JSON-compatible object.
    """
    buf = io.StringIO()
    if fmt == "csv":
        header, rows = results
        buf.write(",".join(header) + "\n")
        for row in rows:
            buf.write(",".join(_fmt(v) for v in row) + "\n")
    elif fmt == "json":
        json.dump(results, buf, indent=2, allow_nan=False)
        buf.write("\n")
    else:
        raise ConfigError(f"unknown format {fmt!r}")
    if out is None or out == "-":
        sys.stdout.write(buf.getvalue())
        return
    try:
        with open(out, "w", newline="") as fh:
            fh.write(buf.getvalue())
    except OSError as exc:
        raise ConfigError(f"cannot write {out}: {exc.strerror}") from exc


def _angles(text):
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise UsageError(f"bad angle list {text!r}") from exc


def _load_config(args) -> dict:
    if not args.config:
        return {}
    try:
        with open(args.config) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {args.config}: {exc.strerror}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    return data


def _experiment(args, *, need_theta=False, need_quadruple=False) -> ExperimentConfig:
    cfg = _load_config(args)
    for key in ("model", "density", "rounds", "seed", "policy", "grid_size"):
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    theta = getattr(args, "theta", None)
    if theta is not None:
        vals = _angles(theta)
        if len(vals) != 1:
            raise UsageError("--theta takes exactly one angle here")
        cfg["theta"] = vals[0]
    angles = getattr(args, "angles", None)
    if angles is not None:
        cfg["quadruple"] = _angles(angles)
    if need_quadruple and cfg.get("quadruple") is None:
        cfg["quadruple"] = list(DetectorQuadruple.canonical().as_tuple())
    if need_theta and cfg.get("theta") is None:
        raise UsageError("--theta is required")
    if cfg.get("quadruple") is not None and len(cfg["quadruple"]) != 4:
        raise UsageError("--angles takes four comma-separated angles")
    return ExperimentConfig.from_dict(cfg)


def _map(spec, grid_size):
    return build_map(density.resolve(spec, grid_size))


def _correlator(model, spec, grid_size):
    if model == "flat":
        return analytic.corr_flat
    m = _map(spec, grid_size)
    return lambda t: analytic.corr_deform(m, t)


def cmd_analytic(args):
    model = args.model or "flat"
    spec = args.density or ("uniform" if model == "flat" else "quantum")
    corr = _correlator(model, spec, args.grid_size or density.DEFAULT_GRID_SIZE)
    if args.angles:
        q = DetectorQuadruple(*_angles(args.angles))
        terms = analytic.chsh_terms(corr, q)
        result = {"model": model, "density": spec, "angles": list(q.as_tuple()),
                  "correlations": list(terms), "statistic": analytic.chsh_value(corr, q)}
        emit(result, "json", args.out)
        return
    if args.theta is None:
        raise UsageError("analytic needs --theta or --angles")
    thetas = _angles(args.theta)
    rows = [(t, float(corr(t))) for t in thetas]
    if (args.format or "csv") == "json":
        emit({"model": model, "density": spec,
              "rows": [{"theta": t, "E": e} for t, e in rows]}, "json", args.out)
    else:
        emit((("theta", "E"), rows), "csv", args.out)


def cmd_sweep(args):
    model = args.model or "flat"
    spec = args.density or ("uniform" if model == "flat" else "quantum")
    if args.theta:
        thetas = _angles(args.theta)
    else:
        thetas = list(np.linspace(0.0, np.pi, args.points))
    if not thetas:
        raise UsageError("empty theta grid")
    est = montecarlo.run_sweep(model, thetas, args.rounds or 100_000, args.seed or 0,
                               density=spec, grid_size=args.grid_size or density.DEFAULT_GRID_SIZE,
                               workers=args.workers)
    rows = [(e.theta, e.e_analytic, e.e_hat, e.stderr, e.n_same, e.n_diff, e.n) for e in est]
    if (args.format or "csv") == "json":
        emit({"seed": args.seed or 0, "rows": [e.to_dict() for e in est]}, "json", args.out)
    else:
        emit((SWEEP_COLUMNS, rows), "csv", args.out)


def cmd_simulate(args):
    cfg = _experiment(args, need_theta=True)
    dens = density.resolve(cfg.density, cfg.grid_size) if cfg.model == "deform" else None
    est = montecarlo.run_correlation(cfg, workers=args.workers)
    zm = montecarlo.zero_mean_check(cfg, workers=args.workers)
    emit({"estimate": est.to_dict(), "zero_mean": zm.to_dict(), "seed": cfg.seed,
          "config_digest": cfg.digest(dens), "config": cfg.to_dict()}, "json", args.out)


def cmd_chsh(args):
    cfg = _experiment(args, need_quadruple=True)
    report = montecarlo.run_chsh(cfg, workers=args.workers)
    emit(report.to_dict(), "json", args.out)


def cmd_holonomy(args):
    q = DetectorQuadruple(*_angles(args.angles)) if args.angles else DetectorQuadruple.canonical()
    m = _map(args.density or "quantum", args.grid_size or density.DEFAULT_GRID_SIZE)
    rep = analytic.holonomy(m, q)
    if args.format == "csv":
        emit((("delta_raw", "delta_wrapped"), [(rep.delta_raw, rep.delta_wrapped)]), "csv", args.out)
    else:
        emit(rep.to_dict(), "json", args.out)


def cmd_design(args):
    if args.target in ("cos", "flat"):
        theta = np.linspace(0.0, np.pi, args.points)
        e = np.cos(theta) if args.target == "cos" else 1.0 - 2.0 * theta / np.pi
    else:
        theta, e = density.read_two_column_csv(args.target, ("theta", "E"))
    d = analytic.design_density(theta, e)
    buf = io.StringIO()
    density.write_csv(d, buf)
    if args.out in (None, "-"):
        sys.stdout.write(buf.getvalue())
    else:
        try:
            with open(args.out, "w", newline="") as fh:
                fh.write(buf.getvalue())
        except OSError as exc:
            raise ConfigError(f"cannot write {args.out}: {exc.strerror}") from exc


def cmd_validate_density(args):
    spec = args.density or "quantum"
    try:
        d = density.resolve(spec, args.grid_size or density.DEFAULT_GRID_SIZE)
    except DensityValidationError as exc:
        if exc.report is not None:
            emit(exc.report.to_dict(), "json", args.out)
        raise
    rep = density.validate(d)
    emit(rep.to_dict(), "json", args.out)
    if not rep.ok:
        raise DensityValidationError(rep.failures[0], "density failed validation", rep)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="deformable-bell",
                description="Two-party sign games on the circle: correlations, CHSH, holonomy.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, mc=False):
        sp.add_argument("--out", help="output path (default: stdout)")
        sp.add_argument("--format", choices=("csv", "json"))
        sp.add_argument("--grid-size", dest="grid_size", type=int)
        if mc:
            sp.add_argument("--rounds", type=int)
            sp.add_argument("--seed", type=int)
            sp.add_argument("--workers", type=int, default=1)

    sp = sub.add_parser("analytic", help="closed-form correlations / CHSH value")
    sp.add_argument("--model", choices=montecarlo.MODELS)
    sp.add_argument("--density")
    sp.add_argument("--theta", help="angle or comma-separated angles (radians)")
    sp.add_argument("--angles", help="theta11,theta12,theta21,theta22")
    common(sp)
    sp.set_defaults(func=cmd_analytic)

    sp = sub.add_parser("sweep", help="Monte Carlo correlation curve")
    sp.add_argument("--model", choices=montecarlo.MODELS)
    sp.add_argument("--density")
    sp.add_argument("--theta", help="comma-separated grid (radians)")
    sp.add_argument("--points", type=int, default=9, help="uniform grid on [0, pi] if --theta absent")
    common(sp, mc=True)
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("simulate", help="Monte Carlo estimate at one angle")
    sp.add_argument("--config")
    sp.add_argument("--model", choices=montecarlo.MODELS)
    sp.add_argument("--density")
    sp.add_argument("--theta")
    common(sp, mc=True)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("chsh", help="Monte Carlo CHSH game")
    sp.add_argument("--config")
    sp.add_argument("--model", choices=montecarlo.MODELS)
    sp.add_argument("--density")
    sp.add_argument("--angles")
    sp.add_argument("--policy", choices=montecarlo.POLICIES)
    common(sp, mc=True)
    sp.set_defaults(func=cmd_chsh)

    sp = sub.add_parser("holonomy", help="geometric phase around the setting cycle")
    sp.add_argument("--density")
    sp.add_argument("--angles")
    common(sp)
    sp.set_defaults(func=cmd_holonomy)

    sp = sub.add_parser("design", help="density reproducing a target correlation")
    sp.add_argument("--target", required=True, help="CSV theta,E on [0, pi], or 'cos' / 'flat'")
    sp.add_argument("--points", type=int, default=2049)
    common(sp)
    sp.set_defaults(func=cmd_design)

    sp = sub.add_parser("validate-density", help="check density constraints")
    sp.add_argument("--density")
    common(sp)
    sp.set_defaults(func=cmd_validate_density)
    return p


_NEGATIVE_VALUE = re.compile(r"^-[\d.]")


def _glue_negative_values(argv):
    # argparse mistakes "-0.78,0.78" for an option; bind it to its flag instead
    out = []
    it = iter(argv)
    for tok in it:
        if tok.startswith("--") and "=" not in tok:
            nxt = next(it, None)
            if nxt is not None and _NEGATIVE_VALUE.match(nxt):
                out.append(f"{tok}={nxt}")
                continue
            out.append(tok)
            if nxt is not None:
                out.append(nxt)
        else:
            out.append(tok)
    return out


def main(argv=None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    try:
        args = build_parser().parse_args(_glue_negative_values(list(argv)))
        args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except _VALIDATION_ERRORS as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except _CONFIG_ERRORS as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
