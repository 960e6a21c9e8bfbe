"""Run every claim grid and print one summary line per claim."""

import argparse
import sys

from treepack import oracle


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--claims", nargs="*", default=list(oracle.CLAIMS), choices=oracle.CLAIMS)
    args = p.parse_args(argv)
    bad = 0
    for claim in args.claims:
        rep = oracle.claim_grid(claim, trials=args.trials, seed=args.seed)
        print(rep.line(), flush=True)
        for d in rep.discrepancies[:10]:
            print(f"  {d}")
        bad += not rep.ok
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main())
