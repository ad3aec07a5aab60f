"""Command line entry point: ``jetvanish run|batch|verify|export-system``."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import List, Optional

from . import __version__
from .errors import InvariantViolation, UsageError
from .runner import (EXIT_CODES, EXIT_INTERNAL, EXIT_USAGE, CaseConfig, Witness, build_pipeline,
                     presets, run_batch, run_case, verify_witness)


def _load_config(args) -> CaseConfig:
    cfg = CaseConfig.load(args.config)
    if getattr(args, "prime", None):
        cfg.primes = list(args.prime)
        cfg.validate()
    return cfg


def _cmd_run(args) -> int:
    cfg = _load_config(args)
    report = run_case(cfg, args.threads, report_path=args.report)
    sys.stdout.write(report.to_json())
    return report.exit_code


def _cmd_batch(args) -> int:
    table = presets()
    if args.preset:
        if args.preset not in table:
            raise UsageError(f"unknown preset {args.preset!r}; known: {', '.join(sorted(table))}")
        configs = table[args.preset]
    elif args.config:
        data = json.loads(Path(args.config).read_text())
        configs = [CaseConfig.from_dict(item) for item in data.get("cases", [])]
    else:
        raise UsageError("batch needs --preset or --config")
    if args.m_max is not None:
        configs = [c for c in configs if c.m <= args.m_max]
    if args.prime:
        for c in configs:
            c.primes = list(args.prime)
            c.validate()
    rows = run_batch(configs, args.out, args.threads, resume=not args.no_resume)
    text = json.dumps({"batch": args.preset or args.config, "cases": rows}, indent=2, sort_keys=True) + "\n"
    if args.report:
        Path(args.report).parent.mkdir(parents=True, exist_ok=True)
        Path(args.report).write_text(text)
    sys.stdout.write(text)
    if any(r["verdict"] == "ERROR" for r in rows):
        return EXIT_INTERNAL
    codes = [EXIT_CODES[r["verdict"]] for r in rows]
    return max(codes, default=0)


def _cmd_verify(args) -> int:
    cfg = _load_config(args)
    witness = Witness.load(args.witness)
    check = verify_witness(witness, cfg)
    out = {"status": check.status, "vectors": len(witness.vectors), "transcript": check.transcript}
    text = json.dumps(out, indent=2) + "\n"
    if args.report:
        Path(args.report).write_text(text)
    sys.stdout.write(text)
    if not check.ok:
        return EXIT_INTERNAL
    return EXIT_CODES["NONTRIVIAL_MOD_ALL"] if check.degenerate else EXIT_CODES["NONVANISHING_OVER_Q"]


def _cmd_export(args) -> int:
    cfg = _load_config(args)
    pipe = build_pipeline(cfg)
    prime = args.prime[0] if args.prime else None
    with open(args.out, "w") as fh:
        pipe.system.export(fh, prime)
    sys.stdout.write(json.dumps({"out": args.out, "unknowns": pipe.system.num_unknowns,
                                 "rows": pipe.system.total_rows,
                                 "system_hash": pipe.system.system_hash()}, indent=2) + "\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="jetvanish", description=__doc__)
    parser.add_argument("--version", action="version", version=f"jetvanish {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required=True):
        p.add_argument("--config", required=config_required, help="case config JSON")
        p.add_argument("--prime", type=int, action="append", help="prime modulus (repeatable)")
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--report", help="write the JSON report here")

    p = sub.add_parser("run", help="solve one case")
    common(p)
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("batch", help="solve a preset table or a batch file")
    common(p, config_required=False)
    p.add_argument("--preset", help=f"one of: {', '.join(sorted(presets()))}")
    p.add_argument("--out", help="directory for per-case reports and completion markers")
    p.add_argument("--m-max", type=int, help="skip cases with larger m")
    p.add_argument("--no-resume", action="store_true")
    p.set_defaults(func=_cmd_batch)

    p = sub.add_parser("verify", help="re-check a witness exactly")
    common(p)
    p.add_argument("--witness", required=True)
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("export-system", help="write the sparse constraint system")
    common(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_export)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse reports bad usage with status 2
        return 0 if exc.code in (0, None) else EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        sys.stderr.write(f"jetvanish: error: {exc}\n")
        return EXIT_USAGE
    except (InvariantViolation, OSError) as exc:
        sys.stderr.write(f"jetvanish: internal error: {exc}\n")
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
