"""Command-line front end.

Exit codes: 0 packed / verified, 1 rejected or unsat, 2 budget or timeout,
64 usage error. Log records are ``key=value`` lines on stdout.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

EXIT_OK = 0
EXIT_REJECTED = 1
EXIT_BUDGET = 2
EXIT_USAGE = 64


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    inputs: list[str] = field(default_factory=list)
    out: str | None = None
    seed: int = 0
    mode: str = "thm2"
    variant: str = "kn1"
    n: int | None = None
    t: int | None = None
    strict: bool = False
    restarts: int = 5
    repair_depth: int = 64
    time_limit: float | None = None
    trials: int = 10
    kind: str = "mixed"
    claim: str | None = None
    tpc: int | None = None
    colors: list[int] = field(default_factory=list)
    workers: int = 1

    @classmethod
    def from_args(cls, ns: argparse.Namespace) -> "RunConfig":
        known = {k: v for k, v in vars(ns).items() if k in cls.__dataclass_fields__ and v is not None}
        return cls(**known)


def _emit(**kv) -> None:
    print(" ".join(f"{k}={v}" for k, v in kv.items()))


def _profile_for(cfg: RunConfig, n: int, t: int, variant: str):
    from treepack.pipeline import make_profile

    mode = "thm2" if cfg.mode == "prop" else cfg.mode
    extra = variant == "kn1"
    if cfg.strict:
        return make_profile(n, mode, strict=True, extra_vertex=extra)
    return make_profile(n, mode, extra_vertex=extra, t=cfg.t or t)


def _run_pack(inst, cfg: RunConfig):
    from treepack.forest_embed import EmbedBudget
    from treepack.pipeline import pack, pack_prop

    prof = _profile_for(cfg, inst.n, inst.t, inst.variant)
    budget = EmbedBudget(max_repair_depth=cfg.repair_depth, rng_seed=cfg.seed)
    runner = pack_prop if cfg.mode == "prop" else pack
    return runner(inst, prof, budget, retries=cfg.restarts)


def cmd_gen(cfg: RunConfig) -> int:
    from treepack.generate import generate
    from treepack.instance import dumps_instance

    if cfg.n is None or cfg.t is None:
        raise UsageError("gen needs --n and --t")
    try:
        inst = generate(cfg.kind, cfg.n, cfg.t, cfg.variant, cfg.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    text = dumps_instance(inst)
    if cfg.out:
        Path(cfg.out).write_text(text)
        _emit(cmd="gen", kind=cfg.kind, n=cfg.n, t=cfg.t, variant=cfg.variant, seed=cfg.seed, out=cfg.out)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_pack(cfg: RunConfig) -> int:
    from treepack.instance import dumps_coloring, read_instance
    from treepack.pipeline import EMBED_FAILED, PreconditionError, ProfileError

    if len(cfg.inputs) != 1:
        raise UsageError("pack takes one instance file")
    inst = read_instance(cfg.inputs[0])
    t0 = time.perf_counter()
    try:
        rep = _run_pack(inst, cfg)
    except (PreconditionError, ProfileError) as exc:
        _emit(cmd="pack", outcome="rejected", reason=f'"{exc}"')
        return EXIT_REJECTED
    for line in rep.log:
        print(line)
    _emit(cmd="pack", outcome=rep.outcome, attempts=rep.attempts, seconds=f"{time.perf_counter() - t0:.3f}")
    if rep.packed:
        text = dumps_coloring(rep.coloring, inst.t)
        if cfg.out:
            Path(cfg.out).write_text(text)
        return EXIT_OK
    _emit(stage=rep.stage, diagnostic=f'"{rep.diagnostic}"')
    return EXIT_BUDGET if rep.outcome == EMBED_FAILED else EXIT_REJECTED


def cmd_verify(cfg: RunConfig) -> int:
    from treepack.graph import ColoringError
    from treepack.instance import read_coloring, read_instance
    from treepack.verify import verify

    if len(cfg.inputs) != 2:
        raise UsageError("verify takes an instance file and a coloring file")
    inst = read_instance(cfg.inputs[0])
    try:
        col, _ = read_coloring(cfg.inputs[1])
        verdict = verify(inst, col)
    except (ColoringError, ValueError) as exc:
        _emit(cmd="verify", ok=False, reason=f'"{exc}"')
        return EXIT_REJECTED
    for line in verdict.lines():
        print(line)
    _emit(cmd="verify", ok=verdict.ok, failures=len(verdict.failures))
    return EXIT_OK if verdict.ok else EXIT_REJECTED


def cmd_oracle(cfg: RunConfig) -> int:
    from treepack import oracle
    from treepack.instance import dumps_coloring, read_instance

    if cfg.claim:
        rep = oracle.claim_grid(cfg.claim, trials=cfg.trials, seed=cfg.seed)
        print(rep.line())
        for d in rep.discrepancies:
            print(f"discrepancy {d}")
        return EXIT_OK if rep.ok else EXIT_REJECTED
    if cfg.tpc:
        worst = EXIT_OK
        count = 0
        for seq in oracle.tpc_sequences(cfg.tpc):
            count += 1
            _, st = oracle.exact_pack(seq, cfg.tpc, cfg.time_limit)
            if st.outcome != oracle.PACKED:
                print(f"sequence={count} {st.line()}")
                worst = max(worst, EXIT_BUDGET if st.outcome == oracle.TIMEOUT else EXIT_REJECTED)
        _emit(cmd="oracle", tpc=cfg.tpc, sequences=count, status="ok" if worst == EXIT_OK else "failed")
        return worst
    if len(cfg.inputs) != 1:
        raise UsageError("oracle needs an instance file, --claim or --tpc")
    inst = read_instance(cfg.inputs[0])
    col, st = oracle.exact_pack(inst.trees, inst.N, cfg.time_limit)
    print(st.line())
    if col is not None:
        if cfg.out:
            Path(cfg.out).write_text(dumps_coloring(col, inst.t))
        return EXIT_OK
    return EXIT_BUDGET if st.outcome == oracle.TIMEOUT else EXIT_REJECTED


def _bench_one(args):
    cfg, n, seed = args
    from treepack.generate import generate

    logging.disable(logging.WARNING)
    variant = "kn" if cfg.mode in ("prop", "thm1") else cfg.variant
    t = cfg.t or 2
    inst = generate(cfg.kind, n, t, variant, seed)
    t0 = time.perf_counter()
    rep = _run_pack(inst, RunConfig(**{**cfg.__dict__, "seed": seed}))
    return rep.packed, time.perf_counter() - t0, rep.timings


def cmd_bench(cfg: RunConfig) -> int:
    sizes = [int(x) for x in cfg.inputs] or ([cfg.n] if cfg.n else [])
    if not sizes:
        raise UsageError("bench needs sizes (positional) or --n")
    print("n,t,trials,success_rate,mean_s,p95_s,forests_s,hubs_s,stars_paths_s,complete_s")
    for n in sizes:
        jobs = [(cfg, n, cfg.seed + k) for k in range(cfg.trials)]
        if cfg.workers > 1:
            with ProcessPoolExecutor(cfg.workers) as pool:
                results = list(pool.map(_bench_one, jobs))
        else:
            results = [_bench_one(j) for j in jobs]
        secs = np.array([r[1] for r in results])
        stage = {k: np.mean([r[2].get(k, 0.0) for r in results]) for k in ("forests", "hubs", "stars_paths", "complete")}
        rate = sum(r[0] for r in results) / len(results)
        print(f"{n},{cfg.t or 2},{cfg.trials},{rate:.3f},{secs.mean():.3f},{np.percentile(secs, 95):.3f},"
              + ",".join(f"{stage[k]:.3f}" for k in ("forests", "hubs", "stars_paths", "complete")))
    return EXIT_OK


def cmd_dot(cfg: RunConfig) -> int:
    from treepack.instance import read_coloring

    if len(cfg.inputs) != 1:
        raise UsageError("dot takes one coloring file")
    col, _ = read_coloring(cfg.inputs[0])
    us, vs, cs = col.colored_edges()
    keep = set(cfg.colors)
    lines = ["graph packing {"]
    for u, v, c in zip(us.tolist(), vs.tolist(), cs.tolist()):
        if not keep or c in keep:
            lines.append(f'  {u} -- {v} [color="/set19/{(c - 1) % 9 + 1}", label="{c}"];')
    lines.append("}")
    text = "\n".join(lines) + "\n"
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


COMMANDS = {"gen": cmd_gen, "pack": cmd_pack, "verify": cmd_verify, "oracle": cmd_oracle,
            "bench": cmd_bench, "dot": cmd_dot}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="treepack", description="Pack tree sequences into complete graphs.")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("inputs", nargs="*", help="instance / coloring files, or sizes for bench")
    p.add_argument("--n", type=int)
    p.add_argument("--t", type=int)
    p.add_argument("--mode", choices=["thm1", "thm2", "prop"])
    p.add_argument("--variant", choices=["kn", "kn1"])
    p.add_argument("--kind")
    p.add_argument("--strict", action="store_true", default=None)
    p.add_argument("--seed", type=int)
    p.add_argument("--restarts", type=int)
    p.add_argument("--repair-depth", dest="repair_depth", type=int)
    p.add_argument("--time-limit", dest="time_limit", type=float)
    p.add_argument("--trials", type=int)
    p.add_argument("--claim")
    p.add_argument("--tpc", type=int)
    p.add_argument("--colors", type=lambda s: [int(x) for x in s.split(",") if x])
    p.add_argument("--workers", type=int)
    p.add_argument("--out")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.ERROR, format="%(levelname)s %(message)s")
    cfg = RunConfig.from_args(ns)
    try:
        return COMMANDS[cfg.command](cfg)
    except UsageError as exc:
        print(f"treepack: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
