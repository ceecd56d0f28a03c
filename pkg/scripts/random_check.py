"""Compare the solver against the brute-force oracle on random theories."""

import argparse
import time
import warnings

import numpy as np

from icldt.generate import GeneratorConfig, random_theory
from icldt.oracle import optimal_strategy, strategy_count
from icldt.parser import pretty_print
from icldt.solver import solve


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("-n", type=int, default=500)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--tolerance", type=float, default=1e-9)
    ap.add_argument("--max-strategies", type=int, default=GeneratorConfig.max_strategies)
    args = ap.parse_args()

    warnings.simplefilter("ignore")
    cfg = GeneratorConfig(max_strategies=args.max_strategies)
    rng = np.random.default_rng(args.seed)
    solve_s = oracle_s = 0.0
    worst, failures, strategies = 0.0, 0, 0
    for i in range(args.n):
        theory = random_theory(rng, cfg)
        t0 = time.perf_counter()
        value = solve(theory).value
        t1 = time.perf_counter()
        _, best = optimal_strategy(theory, max_strategies=args.max_strategies)
        t2 = time.perf_counter()
        solve_s += t1 - t0
        oracle_s += t2 - t1
        strategies += strategy_count(theory)
        diff = abs(value - best)
        worst = max(worst, diff)
        if diff > args.tolerance:
            failures += 1
            print(f"theory {i}: solver {value!r} oracle {best!r}\n{pretty_print(theory)}")
    print(f"{args.n} theories, {failures} mismatches, max |diff| {worst:.3e}")
    print(f"solver {solve_s:.2f} s total, oracle {oracle_s:.2f} s over {strategies} strategies")
    raise SystemExit(1 if failures else 0)


if __name__ == "__main__":
    main()
