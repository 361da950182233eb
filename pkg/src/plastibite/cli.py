"""Command-line front end.

    plastibite spectral --config run.ini --out out/
    plastibite simulate --config run.ini --out out/ [--grid NX NA]
    plastibite steady   --config run.ini --out out/ [--criticalize]
    plastibite sweep    --config sweep.ini --out out/
    plastibite render   out/snapshots/snapshot_000000.csv --out field.svg [--a-max A]

Exit codes: 0 success, 1 invalid configuration, 2 numerical failure.
``PLASTIBITE_THREADS`` caps the number of concurrent sweep points.
"""

from __future__ import annotations

import argparse
import itertools
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path

from . import io
from .config import ConfigError, RunConfig, parse_config
from .errors import DomainError, NumericalError, ValidationError
from .simulate import run
from .spectral import find_lambda0
from .steady import RegimeKind, build_steady, classify, criticalize, verify_steady

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 1, 2


def _prepare(args) -> RunConfig:
    cfg = parse_config(args.config)
    if args.grid is not None:
        cfg = cfg.with_grid(*args.grid)
    if args.tol_zero is not None:
        if not args.tol_zero > 0:
            raise ValidationError("--tol-zero must be positive", assumption="params")
        cfg = replace(cfg, tolerances=replace(cfg.tolerances, zero_tol=args.tol_zero))
    return cfg


def _maybe_criticalize(cfg, enabled):
    """Return ``(rates, fertility_scale, spectral_or_None)``."""
    if not enabled:
        return cfg.rates, 1.0, None
    crit = criticalize(cfg.params, cfg.rates, cfg.grid)
    return crit.rates, crit.scale, crit.spectral


def spectral_record(cfg, rates, spec, fertility_scale=1.0):
    regime = classify(spec.lambda0, cfg.tolerances.zero_tol)
    rec = spec.to_dict()
    rec.update(regime=regime.kind.value, zero_tol=regime.zero_tol,
               fertility_scale=fertility_scale)
    return rec


def cmd_spectral(cfg, out, criticalize_rates=False):
    rates, scale, spec = _maybe_criticalize(cfg, criticalize_rates)
    spec = spec or find_lambda0(cfg.params, rates, cfg.grid)
    rec = spectral_record(cfg, rates, spec, scale)
    io.write_json(out / "spectral.json", rec)
    print(f"lambda0 = {spec.lambda0:.12g} ({rec['regime']}, zero_tol {rec['zero_tol']:g})")
    return EXIT_OK


def cmd_simulate(cfg, out, criticalize_rates=False):
    rates, _, _ = _maybe_criticalize(cfg, criticalize_rates)
    traj = run(cfg.initial_field(), cfg.sim, rates, cfg.params)
    io.write_trajectory_csv(out / "trajectory.csv", traj)
    names = io.write_snapshots(out / "snapshots", traj)
    print(f"{traj.times.size - 1} steps to t = {traj.times[-1]:.6g}; "
          f"{len(names)} snapshots; final l2 norm {traj.l2_norm[-1]:.6g}")
    return EXIT_OK


def cmd_steady(cfg, out, criticalize_rates=False):
    rates, scale, spec = _maybe_criticalize(cfg, criticalize_rates)
    spec = spec or find_lambda0(cfg.params, rates, cfg.grid)
    regime = classify(spec.lambda0, cfg.tolerances.zero_tol)
    if regime.kind is not RegimeKind.CRITICAL:
        rec = regime.to_dict()
        rec.update(fertility_scale=scale, steady_state=None)
        io.write_json(out / "certificate.json", rec)
        print(f"{regime.kind.value}: {regime.kind.description} (lambda0 = {spec.lambda0:.6g})")
        return EXIT_OK
    state = build_steady(spec, rates, cfg.params, 1.0, zero_tol=cfg.tolerances.zero_tol)
    report = verify_steady(state, cfg.sim, rates, cfg.params,
                           residual_tol=cfg.tolerances.residual, drift_tol=cfg.tolerances.drift)
    grid = spec.grid
    io.write_snapshot_csv(out / "steady.csv", grid.circle.x, grid.ages.centers, state.profile)
    rec = state.certificate(report.residual)
    rec.update(drift=report.drift, horizon=report.horizon, stationary=report.stationary,
               regime=regime.kind.value, zero_tol=regime.zero_tol, fertility_scale=scale)
    io.write_json(out / "certificate.json", rec)
    print(f"critical: rho0 = {state.rho0:.6g} on a <= {state.a1:g}, "
          f"residual {report.residual:.3e}, drift {report.drift:.3e}")
    if not report.stationary:
        print("error: steady profile failed the stationarity tolerances", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def _apply_axis(cfg, name, value):
    if name == "eta":
        return replace(cfg, params=replace(cfg.params, eta=value))
    if name == "delta":
        return replace(cfg, params=replace(cfg.params, delta=value))
    if name == "beta_scale":
        return replace(cfg, rates=cfg.rates.scaled(value))
    if name == "mu_shift":
        return replace(cfg, rates=cfg.rates.shifted(value))
    raise ConfigError(f"unknown sweep axis {name!r}")


def _thread_count():
    raw = os.environ.get("PLASTIBITE_THREADS")
    if raw is None:
        return min(8, os.cpu_count() or 1)
    try:
        n = int(raw)
    except ValueError:
        raise ValidationError(f"PLASTIBITE_THREADS={raw!r} is not an integer") from None
    if n < 1:
        raise ValidationError("PLASTIBITE_THREADS must be >= 1")
    return n


def cmd_sweep(cfg, out):
    sweep = cfg.sweep
    if sweep is None:
        raise ConfigError("config has no [sweep] section")
    names = [a.name for a in sweep.axes]
    points = list(itertools.product(*(a.values for a in sweep.axes)))
    (out / "points").mkdir(parents=True, exist_ok=True)

    def one(index_point):
        index, point = index_point
        local = cfg
        try:
            for name, value in zip(names, point):
                local = _apply_axis(local, name, value)
            spec = find_lambda0(local.params, local.rates, local.grid)
        except (NumericalError, DomainError) as exc:
            return index, point, None, str(exc)
        rec = spectral_record(local, local.rates, spec)
        io.write_json(out / "points" / f"point_{index:05d}.json", rec)
        return index, point, rec, None

    with ThreadPoolExecutor(max_workers=_thread_count()) as pool:
        results = sorted(pool.map(one, enumerate(points)), key=lambda r: r[0])

    lines = [",".join(["index", *names, "lambda0", "regime"])]
    failed = 0
    for index, point, rec, err in results:
        vals = [io.FLOAT_FMT % v for v in point]
        if rec is None:
            failed += 1
            print(f"error: point {index} {dict(zip(names, point))}: {err}", file=sys.stderr)
            lines.append(",".join([str(index), *vals, "nan", "failed"]))
        else:
            lines.append(",".join([str(index), *vals, io.FLOAT_FMT % rec["lambda0"],
                                   rec["regime"]]))
    # index file last: its presence marks a finished sweep
    (out / "sweep.csv").write_text("\n".join(lines) + "\n")
    print(f"{len(points)} points, {failed} failed")
    return EXIT_NUMERICAL if failed else EXIT_OK


def cmd_render(snapshot, target, a_max=None):
    x, ages, values = io.read_snapshot_csv(snapshot)
    svg = io.heatmap_svg(x, ages, values, a_max=a_max)
    target = Path(target)
    if target.is_dir():
        target = target / (Path(snapshot).stem + ".svg")
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(svg)
    print(f"wrote {target}")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="plastibite", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("spectral", "simulate", "steady", "sweep"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, type=Path)
        p.add_argument("--out", type=Path, default=Path("."))
        p.add_argument("--tol-zero", type=float, default=None)
        p.add_argument("--grid", type=int, nargs=2, metavar=("NX", "NA"), default=None)
        if name != "sweep":
            p.add_argument("--criticalize", action="store_true",
                           help="rescale fertility so that lambda0 = 0 first")
    p = sub.add_parser("render")
    p.add_argument("snapshot", type=Path)
    p.add_argument("--out", type=Path, default=Path("."))
    p.add_argument("--a-max", type=float, default=None)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "render":
            return cmd_render(args.snapshot, args.out, args.a_max)
        cfg = _prepare(args)
        args.out.mkdir(parents=True, exist_ok=True)
        if args.command == "sweep":
            return cmd_sweep(cfg, args.out)
        cmd = {"spectral": cmd_spectral, "simulate": cmd_simulate, "steady": cmd_steady}
        return cmd[args.command](cfg, args.out, args.criticalize)
    except (ConfigError, ValidationError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
