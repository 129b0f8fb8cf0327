"""Command line experiment runner.

Exit status: 0 when every check passes, 1 when a check fails, 2 for a malformed
config or a violated theorem hypothesis.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .averaging_verifier import CaseError
from .config import ConfigError, load
from .experiments import SUITES, Runner, prepare_cases

DEFAULT_CONFIG = "configs/default.ini"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kinavg", description="Velocity averaging experiments.")
    parser.add_argument("command", choices=[*SUITES, "all"], help="suite to run, or 'all'")
    parser.add_argument("--config", default=DEFAULT_CONFIG, help=f"INI config (default: {DEFAULT_CONFIG})")
    parser.add_argument("--out", default=None, help="report directory (overrides [run] out)")
    parser.add_argument("--threads", type=int, default=None, help="worker threads (overrides [run] threads)")
    parser.add_argument("--seed", type=int, default=None, help="base seed (overrides [run] seed)")
    return parser


def write_report(report, out_dir: Path) -> list[Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = report.suite.replace("-", "_")
    written = [out_dir / f"{stem}.json"]
    written[0].write_text(report.to_json())
    for name in sorted(report.tables):
        path = out_dir / f"{stem}_{name}.csv"
        path.write_text(report.table_csv(name))
        written.append(path)
    return written


def run(command: str, config_path: str, out: str | None = None, threads: int | None = None,
        seed: int | None = None, stream=None) -> int:
    stream = sys.stdout if stream is None else stream
    try:
        config = load(config_path).with_overrides(seed=seed, threads=threads, out=out)
        if config.section("run")["threads"] < 1:
            raise ConfigError(f"{config.where('run', 'threads')}: threads must be >= 1")
        runner = Runner(config)
        prepare_cases(runner)  # hypotheses are checked before any suite runs
        names = list(SUITES) if command == "all" else [command]
        status = 0
        for name in names:
            report = SUITES[name](runner)
            write_report(report, Path(config.section("run")["out"]))
            failed = [c.name for c in report.checks if not c.passed]
            print(f"{name}: {'PASS' if not failed else 'FAIL'} ({len(report.checks)} checks"
                  + (f", failed: {', '.join(failed)}" if failed else "") + ")", file=stream)
            status = status or (1 if failed else 0)
        return status
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except CaseError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return run(args.command, args.config, args.out, args.threads, args.seed)


if __name__ == "__main__":
    sys.exit(main())
