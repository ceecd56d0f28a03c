"""How many (action, condition) groups reach optimize versus one per information state.

The naive count is |actions| x |information states| for the last decision.
"""

import argparse
import warnings

import numpy as np

from icldt.generate import random_theory
from icldt.parser import parse_file
from icldt.solver import solve


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("theories", nargs="*", help="theory files (default: a random corpus)")
    ap.add_argument("-n", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    warnings.simplefilter("ignore")

    if args.theories:
        for path in args.theories:
            for p in solve(parse_file(path)).policies:
                s = p.stats
                print(f"{path} [{p.decision}]: groups {s['groups']} / naive {s['naive_groups']}, entries {s['entries']}")
        return

    rng = np.random.default_rng(args.seed)
    ratios, smaller = [], 0
    for _ in range(args.n):
        s = solve(random_theory(rng)).policies[0].stats
        ratios.append(s["groups"] / s["naive_groups"])
        smaller += s["groups"] < s["naive_groups"]
    r = np.array(ratios)
    print(f"{args.n} random theories, last decision only")
    print(f"groups / naive: median {np.median(r):.2f}, mean {r.mean():.2f}, max {r.max():.2f}")
    print(f"strictly fewer groups than naive in {smaller}/{args.n}")


if __name__ == "__main__":
    main()
