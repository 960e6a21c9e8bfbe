"""Success rate and stage timings of the packer over a grid of sizes and t."""

import argparse
import csv
import logging
import sys
import time

from treepack.generate import generate
from treepack.pipeline import make_profile, pack, pack_prop


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("sizes", nargs="+", type=int)
    p.add_argument("--ts", nargs="+", type=int, default=[2, 3])
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--variant", choices=["kn", "kn1"], default="kn1")
    p.add_argument("--kind", default="mixed")
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args(argv)
    logging.disable(logging.WARNING)
    runner = pack if args.variant == "kn1" else pack_prop
    out = csv.writer(sys.stdout)
    out.writerow(["n", "t", "seed", "outcome", "attempts", "seconds", "extra_vertex_edges", "forests_s", "complete_s"])
    for n in args.sizes:
        for t in args.ts:
            prof = make_profile(n, "thm2", t=t, extra_vertex=args.variant == "kn1")
            for seed in range(args.seed, args.seed + args.trials):
                inst = generate(args.kind, n, t, args.variant, seed)
                t0 = time.perf_counter()
                rep = runner(inst, prof)
                out.writerow([n, t, seed, rep.outcome, rep.attempts, f"{time.perf_counter() - t0:.3f}",
                              rep.extra_vertex_edges, f"{rep.timings.get('forests', 0):.3f}",
                              f"{rep.timings.get('complete', 0):.3f}"])
    return 0


if __name__ == "__main__":
    sys.exit(main())
