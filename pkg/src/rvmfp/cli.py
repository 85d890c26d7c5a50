"""Command-line entry point: ``rvmfp run|verify|converge|picard|bench``.

Exit codes: 0 success, 1 runtime failure, 2 invalid configuration,
3 run completed but a monitor failed (or Picard did not contract).
"""
from __future__ import annotations

import argparse
import csv
import math
import sys
import time
from pathlib import Path

from . import config as cfgmod
from .config import ConfigError, SimConfig
from .io import DIAGNOSTICS_SCHEMA_VERSION, write_diagnostics, write_snapshot

EXIT_OK, EXIT_RUNTIME, EXIT_CONFIG, EXIT_MONITOR = 0, 1, 2, 3


def _load(path) -> SimConfig:
    try:
        return cfgmod.load(path)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc


def _out_dir(cfg: SimConfig, override):
    d = Path(override or cfg.output.directory or ".")
    d.mkdir(parents=True, exist_ok=True)
    return d


def cmd_run(args):
    from .solver import run

    cfg = _load(args.config)
    validated = cfgmod.validate(cfg)
    out = _out_dir(cfg, args.out)
    every = cfg.output.snapshot_every
    n_end = int(round(cfg.time.T / cfg.dt))

    def snap(state):
        if (every and state.step_index % every == 0) or state.step_index == n_end:
            write_snapshot(out / f"snap_{state.step_index:06d}.bin", state.f, state.fields, state.t)

    result = run(cfg, on_step=snap, validated=validated)
    write_diagnostics(out / "diagnostics.csv", result.records)
    lines = [f"diagnostics schema {DIAGNOSTICS_SCHEMA_VERSION}",
             f"steps {len(result.records) - 1}", *result.collector.summary_lines(),
             f"overall: {'PASS' if result.passed else 'FAIL'}"]
    (out / "summary.txt").write_text("\n".join(lines) + "\n")
    print("\n".join(lines))
    return EXIT_OK if result.passed else EXIT_MONITOR


def cmd_verify(args):
    from .verify import run_suites

    try:
        rows, timing = run_suites(args.filter)
    except KeyError as exc:
        print(exc.args[0], file=sys.stderr)
        return EXIT_CONFIG
    width = max(len(r.name) for r in rows)
    for r in rows:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.suite:<10} {r.name:<{width}}  {r.property}  [{r.detail}]")
    for name, sec in timing.items():
        print(f"# {name}: {sec:.2f} s")
    failed = [r for r in rows if not r.passed]
    if failed:
        print("failing: " + ", ".join(f"{r.suite}/{r.name}" for r in failed), file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def _write_rows(rows, fields, path):
    fh = open(path, "w", newline="") if path else sys.stdout
    try:
        w = csv.DictWriter(fh, fieldnames=fields, extrasaction="ignore")
        w.writeheader()
        w.writerows(rows)
    finally:
        if path:
            fh.close()


def cmd_converge(args):
    from .studies import convergence_study

    cfg = _load(args.config)
    cfgmod.validate(cfg)
    if args.levels < 2:
        raise ConfigError("--levels must be at least 2")
    rows = convergence_study(cfg, args.levels, refine_v=not args.x_only)
    for r in rows:
        r["order"] = "exact" if math.isinf(r["order"]) else r["order"]
    _write_rows(rows, ["level", "nx", "nv", "metric", "value", "order", "monotone"], args.out)
    if any(not r["monotone"] for r in rows):
        print("non-monotone residuals: " + ", ".join(sorted({r["metric"] for r in rows if not r["monotone"]})),
              file=sys.stderr)
    return EXIT_OK


def cmd_picard(args):
    from .studies import picard_sweep

    cfg = _load(args.config)
    horizons = args.T or [cfg.time.T]
    for T in horizons:
        cfgmod.validate(cfg.with_(time={"T": T}))
    traces, best = picard_sweep(cfg, horizons, args.tol, args.max_iters)
    rows = []
    for T, tr in traces.items():
        for n, (d, fd) in enumerate(zip(tr.sup_diff, tr.field_diff)):
            prev = tr.sup_diff[n - 1] if n else math.nan
            ratio = d / prev if n and prev > 0 else math.nan
            rows.append(dict(T=T, iterate=n + 1, sup_diff=f"{d:.17g}", field_diff=f"{fd:.17g}",
                             ratio=f"{ratio:.4g}"))
    _write_rows(rows, ["T", "iterate", "sup_diff", "field_diff", "ratio"], args.out)
    for T, tr in traces.items():
        status = "converged" if tr.converged else ("not contracting" if not tr.contracting else "max_iters")
        print(f"# T={T:g}: {tr.iterations} iterates, {status}", file=sys.stderr)
    print(f"# largest contracting horizon: {best if best is not None else 'none'}", file=sys.stderr)
    return EXIT_OK if all(tr.contracting for tr in traces.values()) else EXIT_MONITOR


def cmd_bench(args):
    from .solver import Stepper

    cfg = _load(args.config) if args.config else SimConfig()
    stepper = Stepper(cfg)
    try:
        state = stepper.initial_state()
        state = stepper.step(state)  # compile and warm caches
        t0 = time.perf_counter()
        for _ in range(args.steps):
            state = stepper.step(state)
        sec = (time.perf_counter() - t0) / args.steps
    finally:
        stepper.close()
    g = stepper.grid
    print(f"grid {g.nx} x {g.nv}^2, workers {stepper.pool.workers}: {sec * 1e3:.1f} ms/step, "
          f"{g.nx * g.nv ** 2 / sec / 1e6:.2f} Mcell/s, projected T={cfg.time.T:g}: "
          f"{sec * stepper.n_steps():.1f} s")
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="rvmfp", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run one configuration")
    r.add_argument("config")
    r.add_argument("--out", help="output directory (overrides [output] directory)")
    r.set_defaults(func=cmd_run)
    v = sub.add_parser("verify", help="operator and short-run property suites")
    v.add_argument("--filter", action="append", help="suite name; repeatable")
    v.set_defaults(func=cmd_verify)
    c = sub.add_parser("converge", help="observed orders under mesh halving")
    c.add_argument("config")
    c.add_argument("--levels", type=int, default=2)
    c.add_argument("--x-only", action="store_true", help="refine x and t only")
    c.add_argument("--out", help="CSV path (default stdout)")
    c.set_defaults(func=cmd_converge)
    q = sub.add_parser("picard", help="successive-approximation trace")
    q.add_argument("config")
    q.add_argument("--T", type=float, action="append", help="horizon; repeat to sweep")
    q.add_argument("--tol", type=float, default=1e-10)
    q.add_argument("--max-iters", type=int, default=30)
    q.add_argument("--out", help="CSV path (default stdout)")
    q.set_defaults(func=cmd_picard)
    b = sub.add_parser("bench", help="time coupled steps")
    b.add_argument("config", nargs="?")
    b.add_argument("--steps", type=int, default=5)
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # any failure during a run maps to exit 1
        print(f"runtime failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
