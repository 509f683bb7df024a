"""Command line entry point: ``exactsplit {plan,run,verify}``.

Exit codes: 0 success, 2 configuration error, 3 step beyond the splitting
radius, 4 verification failure.
"""
from __future__ import annotations

import argparse
import sys

from .config import ConfigError, parse_config, preset_config, with_overrides
from .experiment import VerificationGateError, plan_report, run, verify
from .plans import ConsistencyError
from .presets import PRESETS
from .symplectic import SplittingRadiusError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RADIUS = 3
EXIT_GATE = 4


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="exactsplit", description="Exact splitting experiments.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--preset", choices=sorted(PRESETS))
        sp.add_argument("--config", help="experiment config file (INI)")
        sp.add_argument("--dt", type=float)

    sp = sub.add_parser("plan", help="print splitting coefficients for one step")
    common(sp)
    sp.add_argument("--pivot", type=int, help="pivot axis (0-based) for shear factorizations")

    sp = sub.add_parser("run", help="integrate an experiment and write diagnostics")
    common(sp)
    sp.add_argument("--steps", type=int)
    sp.add_argument("--out", help="output directory")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--scheme")

    sp = sub.add_parser("verify", help="check plan identities and coefficient tables")
    common(sp)
    return p


def _load(args):
    if args.config and args.preset:
        raise ConfigError("give either --preset or --config, not both")
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        return parse_config(text)
    if args.preset:
        return preset_config(args.preset)
    return None


def _cmd_plan(args) -> int:
    cfg = _load(args)
    if cfg is None or cfg.preset is None:
        raise ConfigError("plan needs a preset (via --preset or the config)")
    dt = args.dt if args.dt is not None else cfg.dt
    pivot = args.pivot if args.pivot is not None else cfg.pivot
    sys.stdout.write(plan_report(cfg.preset, dt, pivot, **cfg.params))
    return EXIT_OK


def _cmd_run(args) -> int:
    cfg = _load(args)
    if cfg is None:
        raise ConfigError("run needs --preset or --config")
    cfg = with_overrides(cfg, dt=args.dt, steps=args.steps, scheme=args.scheme,
                         seed=args.seed, output=args.out)
    res = run(cfg)
    print(f"{cfg.preset or cfg.family}  scheme={cfg.scheme}  dt={cfg.dt!r}  steps={cfg.steps}  "
          f"transforms/step={res.transforms_per_step}")
    if res.gate_residual is not None:
        print(f"plan identity residual {res.gate_residual:.3e}")
    last = {n: res.series.columns[n][-1] for n in res.series.names}
    for n, v in last.items():
        print(f"  {n:<10s} {v: .17g}")
    if cfg.output:
        print(f"wrote {cfg.output}")
    return EXIT_OK


def _cmd_verify(args) -> int:
    cfg = _load(args)
    if cfg is not None and cfg.preset is None:
        raise ConfigError("verify needs a preset")
    names = [cfg.preset] if cfg is not None else sorted(PRESETS)
    ok = True
    for name in names:
        params = cfg.params if cfg is not None else {}
        dt = args.dt if args.dt is not None else (cfg.dt if cfg is not None else None)
        print(f"== {name}")
        try:
            checks = verify(name, dt, **params)
        except SplittingRadiusError as exc:
            print(f"FAIL  {exc}")
            ok = False
            continue
        for c in checks:
            print(c.line())
            ok &= c.passed
    return EXIT_OK if ok else EXIT_GATE


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    handlers = {"plan": _cmd_plan, "run": _cmd_run, "verify": _cmd_verify}
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SplittingRadiusError as exc:
        print(f"splitting radius: {exc}", file=sys.stderr)
        return EXIT_RADIUS
    except (VerificationGateError, ConsistencyError) as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return EXIT_GATE


if __name__ == "__main__":
    sys.exit(main())
