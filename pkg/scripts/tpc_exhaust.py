"""Exact search over every shape sequence T_n, ..., T_2 for small n."""

import argparse
import sys
import time

from treepack import oracle


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--max-n", type=int, default=7)
    p.add_argument("--time-limit", type=float, default=60.0)
    args = p.parse_args(argv)
    failed = 0
    for n in range(2, args.max_n + 1):
        t0 = time.perf_counter()
        count = nodes = 0
        for seq in oracle.tpc_sequences(n):
            count += 1
            _, st = oracle.exact_pack(list(seq), n, args.time_limit)
            nodes += st.nodes
            if st.outcome != oracle.PACKED:
                failed += 1
                print(f"n={n} sequence={count} {st.line()}")
        print(f"n={n} sequences={count} nodes={nodes} seconds={time.perf_counter() - t0:.2f}", flush=True)
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
