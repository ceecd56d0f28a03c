"""Solve the bundled theories and print policies, stats and the oracle value."""

import argparse
import time
from pathlib import Path

from icldt.cli import render_policy
from icldt.oracle import optimal_strategy, strategy_count
from icldt.parser import parse_file
from icldt.solver import solve

ROOT = Path(__file__).resolve().parent.parent


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("theories", nargs="*", default=[ROOT / "theories" / "full_obs.icl", ROOT / "theories" / "test_treat.icl"])
    ap.add_argument("--no-oracle", action="store_true", help="skip brute-force confirmation")
    args = ap.parse_args()
    for path in args.theories:
        theory = parse_file(path)
        t0 = time.perf_counter()
        result = solve(theory)
        solve_s = time.perf_counter() - t0
        print(f"== {Path(path).name}  (solved in {solve_s * 1e3:.1f} ms)")
        print(render_policy(result, "text"), end="")
        for p in result.policies:
            print(f"  stats[{p.decision}]: {p.stats}")
        if not args.no_oracle:
            t0 = time.perf_counter()
            _, best = optimal_strategy(theory)
            print(f"  oracle: {best!r} over {strategy_count(theory)} strategies ({time.perf_counter() - t0:.2f} s)")
            print(f"  |solver - oracle| = {abs(result.value - best):.3e}")
        print()


if __name__ == "__main__":
    main()
