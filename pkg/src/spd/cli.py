"""Command-line entry point: ``spd {run,sweep,validate,resume}``.

Exit codes: 0 success, 2 invalid configuration, 3 resource limit reached
(partial artifacts kept), 4 internal invariant failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from . import kernels, runner
from .config import ConfigError, apply_overrides, load, validate
from .io import CheckpointError
from .runner import EXIT_CONFIG, EXIT_INVARIANT, EXIT_OK, EXIT_RESOURCE


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                   help="override a config field by dotted path, e.g. evolution.delta=2^-13")
    p.add_argument("--threads", type=int, help="worker threads for the rotation kernel")
    p.add_argument("--output-dir", help="directory for series.csv, summary.json, ...")
    p.add_argument("--max-terms", type=int, help="abort with exit 3 once the sum exceeds this many terms")
    p.add_argument("--checkpoint-every", type=int, help="write checkpoint.bin every this many steps")
    p.add_argument("-v", "--verbose", action="store_true", help="log one line per recorded step")


def _flag_overrides(args) -> list[str]:
    out = list(args.overrides)
    if args.threads is not None:
        out.append(f"threads={args.threads}")
    if args.output_dir is not None:
        out.append(f"output_dir={json.dumps(args.output_dir)}")
    if args.max_terms is not None:
        out.append(f"resources.max_terms={args.max_terms}")
    if args.checkpoint_every is not None:
        out.append(f"resources.checkpoint_every={args.checkpoint_every}")
    return out


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="spd", description="Sparse Pauli dynamics runner")
    sub = ap.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("run", help="execute one configuration")
    p.add_argument("--config", required=True, help="JSON run configuration")
    _common(p)

    p = sub.add_parser("sweep", help="run a threshold / time-step sweep and extrapolate")
    p.add_argument("--config", required=True, nargs="+",
                   help="one base config (with --delta/--dt) or several complete configs")
    p.add_argument("--delta", action="append", default=[], help="threshold value, repeatable (e.g. 2^-12)")
    p.add_argument("--dt", action="append", type=float, default=[], help="time step, repeatable")
    p.add_argument("--summary", help="combined summary path (default <output_dir>/sweep.json)")
    _common(p)

    p = sub.add_parser("validate", help="run the built-in oracle checks")
    p.add_argument("-v", "--verbose", action="store_true")

    p = sub.add_parser("resume", help="continue a run from <output-dir>/checkpoint.bin")
    _common(p)
    return ap


def _run(args) -> int:
    raw = apply_overrides(load(args.config), _flag_overrides(args))
    return runner.run(validate(raw))


def _sweep(args) -> int:
    flags = _flag_overrides(args)
    if len(args.config) == 1:
        base = apply_overrides(load(args.config[0]), flags)
        if not args.delta:
            raise ConfigError("sweep: give --delta values or several --config files")
        raws = runner.sweep_configs(base, args.delta, args.dt or None)
        root = base.get("output_dir", "spd-sweep")
    else:
        if args.delta or args.dt:
            raise ConfigError("sweep: --delta/--dt only apply to a single base config")
        raws = [apply_overrides(load(path), flags) for path in args.config]
        root = raws[0].get("output_dir", "spd-sweep")
    cfgs = []
    for i, raw in enumerate(raws):
        try:
            cfgs.append(validate(raw))
        except ConfigError as exc:
            raise ConfigError(f"sweep[{i}].{exc}") from None
    summary = args.summary or f"{root}/sweep.json"
    code = runner.sweep(cfgs, summary)
    print(f"wrote {summary}")
    return code


def _validate(args) -> int:
    from .validation import run_all

    print(f"backend: {kernels.backend_name()}")
    results = run_all()
    for r in results:
        print(r.line())
    ok = all(r.passed for r in results)
    print("all checks passed" if ok else "validation FAILED")
    return EXIT_OK if ok else EXIT_INVARIANT


def _resume(args) -> int:
    if args.output_dir is None:
        raise ConfigError("output_dir: resume needs --output-dir")
    over = apply_overrides({}, [f for f in _flag_overrides(args) if not f.startswith("output_dir=")])
    return runner.resume(args.output_dir, over)


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    handler = {"run": _run, "sweep": _sweep, "validate": _validate, "resume": _resume}[args.verb]
    try:
        return handler(args)
    except (ConfigError, CheckpointError) as exc:
        print(f"spd: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except MemoryError:
        print("spd: resource limit: out of memory", file=sys.stderr)
        return EXIT_RESOURCE
    except (AssertionError, ArithmeticError) as exc:
        print(f"spd: internal invariant failure: {exc!r}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
