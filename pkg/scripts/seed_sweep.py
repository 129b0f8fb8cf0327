"""Run one suite under several base seeds and tabulate which checks fail.

    python3 scripts/seed_sweep.py verify --seeds 0 1 2 3
"""
import argparse
import sys

from kinavg.config import load
from kinavg.experiments import SUITES, Runner, prepare_cases


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("suite", choices=list(SUITES))
    ap.add_argument("--config", default="configs/default.ini")
    ap.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2])
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args(argv)

    base = load(args.config)
    print("seed,checks,failed,failed_names")
    worst = 0
    for seed in args.seeds:
        runner = Runner(base.with_overrides(seed=seed, threads=args.threads))
        prepare_cases(runner)
        report = SUITES[args.suite](runner)
        failed = [c.name for c in report.checks if not c.passed]
        print(f"{seed},{len(report.checks)},{len(failed)},\"{';'.join(failed)}\"")
        worst = max(worst, len(failed))
    return 1 if worst else 0


if __name__ == "__main__":
    sys.exit(main())
