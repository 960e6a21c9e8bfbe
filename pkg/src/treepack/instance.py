"""Packing instances and their plain-text file formats.

Instance file::

    n t variant          # variant is kn or kn1
    <pruefer seq of T_1> # space separated, '-' when empty
    ...

Coloring file::

    N t
    u v c                # one colored edge per line, lexicographic in (u, v)
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from treepack.graph import EdgeColoring, Tree, prufer_decode, prufer_encode

VARIANTS = ("kn", "kn1")


class FormatError(ValueError):
    pass


@dataclass
class TreeFamily:
    n: int
    variant: str
    trees: list[Tree]

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise FormatError(f"unknown variant {self.variant!r}")
        for i, tree in enumerate(self.trees, start=1):
            if tree.m != self.n - i + 1:
                raise FormatError(f"T_{i} has {tree.m} vertices, expected {self.n - i + 1}")

    @property
    def t(self) -> int:
        return len(self.trees)

    @property
    def N(self) -> int:
        return self.n + (self.variant == "kn1")


def dumps_instance(fam: TreeFamily) -> str:
    lines = [f"{fam.n} {fam.t} {fam.variant}"]
    for tree in fam.trees:
        seq = prufer_encode(tree)
        lines.append(" ".join(map(str, seq)) if seq else "-")
    return "\n".join(lines) + "\n"


def loads_instance(text: str) -> TreeFamily:
    lines = text.strip("\n").split("\n")
    try:
        n_s, t_s, variant = lines[0].split()
        n, t = int(n_s), int(t_s)
    except ValueError as exc:
        raise FormatError(f"bad header line {lines[0]!r}") from exc
    if len(lines) != t + 1:
        raise FormatError(f"expected {t} tree lines, found {len(lines) - 1}")
    trees = []
    for i, line in enumerate(lines[1:], start=1):
        line = line.strip()
        seq = [] if line == "-" else [int(x) for x in line.split()]
        trees.append(prufer_decode(seq, n - i + 1))
    return TreeFamily(n, variant, trees)


def write_instance(fam: TreeFamily, path) -> None:
    Path(path).write_text(dumps_instance(fam))


def read_instance(path) -> TreeFamily:
    return loads_instance(Path(path).read_text())


def dumps_coloring(c: EdgeColoring, t: int) -> str:
    u, v, col = c.colored_edges()
    body = np.column_stack([u, v, col])
    out = [f"{c.N} {t}\n"]
    if body.size:
        out.append("\n".join(f"{a} {b} {k}" for a, b, k in body.tolist()))
        out.append("\n")
    return "".join(out)


def loads_coloring(text: str) -> tuple[EdgeColoring, int]:
    """Parse a coloring file; a repeated edge raises ColoringError (write-once)."""
    lines = text.strip("\n").split("\n")
    try:
        N, t = map(int, lines[0].split())
    except ValueError as exc:
        raise FormatError(f"bad header line {lines[0]!r}") from exc
    c = EdgeColoring(N, max(t, 1))
    for line in lines[1:]:
        if not line.strip():
            continue
        u, v, k = map(int, line.split())
        c.color_edge(u, v, k)
    return c, t


def write_coloring(c: EdgeColoring, t: int, path) -> None:
    Path(path).write_text(dumps_coloring(c, t))


def read_coloring(path) -> tuple[EdgeColoring, int]:
    return loads_coloring(Path(path).read_text())
