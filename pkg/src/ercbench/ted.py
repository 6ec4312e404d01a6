"""Ordered tree edit distance (Zhang-Shasha) over labelled trees."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional

import numpy as np

from ercbench.expr import Node


class LabeledTree(NamedTuple):
    label: str
    children: tuple = ()


def as_labeled(tree: Node) -> LabeledTree:
    """Value-blind labels: constants and ERC slots are ``c``, the variable is ``x``."""
    if tree.op in ("const", "erc"):
        return LabeledTree("c")
    return LabeledTree(tree.op, tuple(as_labeled(c) for c in tree.children))


def _unit_relabel(a, b) -> float:
    return 0.0 if a == b else 1.0


@dataclass(frozen=True)
class EditCost:
    insert: float = 1.0
    delete: float = 1.0
    relabel: Callable = _unit_relabel

    def __post_init__(self):
        if self.insert < 0 or self.delete < 0:
            raise ValueError("edit costs must be non-negative")


UNIT = EditCost()


def postorder_info(tree: LabeledTree):
    """Postorder labels, leftmost-leaf indices and keyroots of ``tree``."""
    labels: list = []
    lmd: list[int] = []

    def walk(node) -> int:
        first = None
        for c in node.children:
            leftmost = walk(c)
            if first is None:
                first = leftmost
        idx = len(labels)
        labels.append(node.label)
        lmd.append(idx if first is None else first)
        return lmd[idx]

    walk(tree)
    seen = {}
    for i, l in enumerate(lmd):
        seen[l] = i  # highest postorder index with that leftmost leaf
    keyroots = sorted(seen.values())
    return labels, lmd, keyroots


def _min3_scalar(a, b, c):
    return min(a, b, c)


def _min3_array(a, b, c):
    return np.minimum(np.minimum(a, b), c)


def zhang_shasha(info1, info2, relabel, insert=1.0, delete=1.0):
    """Core dynamic program over keyroot pairs.

    ``relabel[i][j]`` is the cost of matching postorder node ``i`` of the
    first tree with node ``j`` of the second.  Entries may be numpy arrays, in
    which case the distance is computed element-wise for a whole batch of
    labellings sharing the same two tree shapes.
    """
    _, lmd1, kr1 = info1
    _, lmd2, kr2 = info2
    n, m = len(lmd1), len(lmd2)
    arrays = isinstance(relabel[0][0], np.ndarray)
    min3 = _min3_array if arrays else _min3_scalar
    td = [[None] * m for _ in range(n)]
    for i in kr1:
        li = lmd1[i]
        for j in kr2:
            lj = lmd2[j]
            rows, cols = i - li + 2, j - lj + 2
            fd = [[0.0] * cols for _ in range(rows)]
            for x in range(1, rows):
                fd[x][0] = fd[x - 1][0] + delete
            for y in range(1, cols):
                fd[0][y] = fd[0][y - 1] + insert
            for x in range(li, i + 1):
                xi = x - li + 1
                lx = lmd1[x]
                row, prev = fd[xi], fd[xi - 1]
                for y in range(lj, j + 1):
                    yj = y - lj + 1
                    if lx == li and lmd2[y] == lj:
                        v = min3(prev[yj] + delete, row[yj - 1] + insert,
                                 prev[yj - 1] + relabel[x][y])
                        row[yj] = v
                        td[x][y] = v
                    else:
                        p, q = lx - li, lmd2[y] - lj
                        row[yj] = min3(prev[yj] + delete, row[yj - 1] + insert,
                                       fd[p][q] + td[x][y])
    return td[n - 1][m - 1]


def ted(t1: LabeledTree, t2: LabeledTree, cost: Optional[EditCost] = None) -> float:
    """Minimum-cost edit script distance between two ordered labelled trees."""
    cost = cost or UNIT
    if isinstance(t1, Node):
        t1 = as_labeled(t1)
    if isinstance(t2, Node):
        t2 = as_labeled(t2)
    info1, info2 = postorder_info(t1), postorder_info(t2)
    l1, l2 = info1[0], info2[0]
    relabel = [[cost.relabel(a, b) for b in l2] for a in l1]
    d = zhang_shasha(info1, info2, relabel, cost.insert, cost.delete)
    return float(d)


def ted_canonical(pred: Node, target: Node, cfg=None) -> int:
    """Unit-cost TED between the canonical forms of two concrete expressions."""
    from ercbench.canon import canonicalize

    a = canonicalize(pred, cfg).tree
    b = canonicalize(target, cfg).tree
    return int(ted(as_labeled(a), as_labeled(b)))
