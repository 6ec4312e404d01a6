"""Expression trees: representation, evaluation, ERC handling and random generation.

Trees are immutable ``Node`` tuples.  Leaves are the variable ``x``, concrete
constants (``const``) and ephemeral random constant slots (``erc``) whose values
live in a separate parameter vector.

The textual form is prefix notation, e.g. ``(add (mul 24.3 x) 1.57)``; ERC
slots print as ``c0``, ``c1``, ...
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Iterator, NamedTuple, Optional, Sequence

import numpy as np

BINARY_OPS = ("add", "sub", "mul", "div")
UNARY_OPS = (
    "square", "cube", "sqrt", "sin", "cos", "tan", "tanh", "abs", "ln", "exp", "expneg",
)
LEAF_OPS = ("x", "const", "erc")

ARITY = {op: 2 for op in BINARY_OPS}
ARITY.update({op: 1 for op in UNARY_OPS})
ARITY.update({op: 0 for op in LEAF_OPS})

STANDARD_OPERATORS = frozenset(BINARY_OPS + UNARY_OPS)
ARITHMETIC = frozenset(BINARY_OPS)


class Node(NamedTuple):
    op: str
    children: tuple = ()
    value: float | int | None = None

    def __str__(self) -> str:
        return to_prefix(self)


def var() -> Node:
    return Node("x")


def const(value: float) -> Node:
    return Node("const", (), float(value))


def erc(index: int) -> Node:
    return Node("erc", (), int(index))


def make(op: str, *children: Node) -> Node:
    if ARITY.get(op) != len(children):
        raise ValueError(f"{op!r} takes {ARITY.get(op)} children, got {len(children)}")
    return Node(op, tuple(children))


@dataclass(frozen=True)
class BasisSet:
    """Operators the generator may sample; the four arithmetic ops are mandatory."""

    operators: frozenset
    include_variable: bool = True
    include_constants: bool = True

    def __post_init__(self):
        ops = frozenset(self.operators)
        object.__setattr__(self, "operators", ops)
        unknown = ops - STANDARD_OPERATORS
        if unknown:
            raise ValueError(f"unknown operators: {sorted(unknown)}")
        if not ARITHMETIC <= ops:
            raise ValueError("basis must contain add, sub, mul and div")

    @classmethod
    def standard(cls) -> "BasisSet":
        return cls(STANDARD_OPERATORS)

    @classmethod
    def specific(cls, extra) -> "BasisSet":
        return cls(ARITHMETIC | frozenset(extra))

    def sorted_ops(self) -> list[str]:
        # fixed ordering keeps sampling reproducible regardless of set iteration
        order = BINARY_OPS + UNARY_OPS
        return [op for op in order if op in self.operators]


# -- traversal / measurement -------------------------------------------------

def preorder(tree: Node) -> Iterator[Node]:
    stack = [tree]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(node.children))


def size(tree: Node) -> int:
    """Total number of nodes."""
    return 1 + sum(size(c) for c in tree.children)


def depth(tree: Node) -> int:
    """Depth counted in nodes; a single leaf has depth 1."""
    if not tree.children:
        return 1
    return 1 + max(depth(c) for c in tree.children)


def operators(tree: Node) -> set[str]:
    return {n.op for n in preorder(tree) if ARITY[n.op] > 0}


def erc_count(tree: Node) -> int:
    idx = [n.value for n in preorder(tree) if n.op == "erc"]
    return max(idx) + 1 if idx else 0


def has_op(tree: Node, op: str) -> bool:
    return any(n.op == op for n in preorder(tree))


# -- ERC extraction ----------------------------------------------------------

def extract_ercs(tree: Node) -> tuple[Node, np.ndarray]:
    """Replace every const leaf by a fresh ERC slot, numbered in preorder.

    Returns the slotted tree and the parameter vector holding the original
    values. Duplicate values get distinct slots.
    """
    values: list[float] = []

    def walk(node: Node) -> Node:
        if node.op == "const":
            values.append(node.value)
            return erc(len(values) - 1)
        if not node.children:
            return node
        return Node(node.op, tuple(walk(c) for c in node.children))

    out = walk(tree)
    return out, np.array(values, dtype=float)


def substitute_params(tree: Node, params: Sequence[float]) -> Node:
    """Bind ERC slots to concrete constants. Inverse of :func:`extract_ercs`."""
    params = np.asarray(params, dtype=float)
    k = erc_count(tree)
    if len(params) != k:
        raise ValueError(f"tree has {k} ERC slots but {len(params)} params were given")

    def walk(node: Node) -> Node:
        if node.op == "erc":
            return const(params[node.value])
        if not node.children:
            return node
        return Node(node.op, tuple(walk(c) for c in node.children))

    return walk(tree)


# -- evaluation --------------------------------------------------------------

# exp, tanh and division can turn an infinite input into a finite output
# (exp(-inf) = 0, 1/inf = 0); adding 0*a turns those cases into nan so any
# non-finite intermediate value makes the whole point nonviable.

def _exp(a):
    return np.exp(a) + 0.0 * a


def _expneg(a):
    return _exp(-a)


def _tanh(a):
    return np.tanh(a) + 0.0 * a


def _div(a, b):
    return a / b + 0.0 * b


_UNARY_FUNCS: dict[str, Callable] = {
    "square": np.square,
    "cube": lambda a: a * a * a,
    "sqrt": np.sqrt,
    "sin": np.sin,
    "cos": np.cos,
    "tan": np.tan,
    "tanh": _tanh,
    "abs": np.abs,
    "ln": np.log,
    "exp": _exp,
    "expneg": _expneg,
}
_BINARY_FUNCS: dict[str, Callable] = {
    "add": np.add,
    "sub": np.subtract,
    "mul": np.multiply,
    "div": _div,
}


def apply_op(op: str, *args):
    """Apply one operator with IEEE semantics (no protection).

    Non-finite inputs never produce a finite result.
    """
    if op in _BINARY_FUNCS:
        return _BINARY_FUNCS[op](*args)
    return _UNARY_FUNCS[op](*args)


def evaluate(tree: Node, params: Sequence[float], xs) -> Optional[np.ndarray]:
    """Evaluate ``tree`` at every point of ``xs`` with ERC slots bound to ``params``.

    Returns ``None`` when any output is non-finite (the individual is
    nonviable). A non-finite intermediate value always reaches the output, so
    e.g. ``exp(-1/0)`` is nonviable rather than 0. A parameter count that does not match the tree raises.
    """
    params = np.asarray(params, dtype=float)
    if len(params) != erc_count(tree):
        raise ValueError("parameter vector length does not match the tree's ERC count")
    xs = np.asarray(xs, dtype=float)

    def rec(node: Node):
        op = node.op
        if op == "x":
            return xs
        if op == "const":
            return np.float64(node.value)
        if op == "erc":
            return params[node.value]
        return apply_op(op, *(rec(c) for c in node.children))

    with np.errstate(all="ignore"):
        ys = np.broadcast_to(rec(tree), xs.shape).astype(float)
    if not np.all(np.isfinite(ys)):
        return None
    return ys


_CODE_TEMPLATES = {
    "add": "({} + {})",
    "sub": "({} - {})",
    "mul": "({} * {})",
    "div": "_div({}, {})",
    "square": "_sq({})",
    "cube": "_cube({})",
    "sqrt": "_sqrt({})",
    "sin": "_sin({})",
    "cos": "_cos({})",
    "tan": "_tan({})",
    "tanh": "_tanh({})",
    "abs": "_abs({})",
    "ln": "_log({})",
    "exp": "_exp({})",
    "expneg": "_exp(-{})",
}
_CODE_NS = {
    "_sq": np.square, "_cube": lambda a: a * a * a, "_sqrt": np.sqrt, "_sin": np.sin,
    "_cos": np.cos, "_tan": np.tan, "_tanh": _tanh, "_abs": np.abs, "_log": np.log,
    "_exp": _exp, "_div": _div, "nan": math.nan, "inf": math.inf,
}


def _code(node: Node) -> str:
    op = node.op
    if op == "x":
        return "x"
    if op == "const":
        return f"({node.value!r})"
    if op == "erc":
        return f"p[{node.value}]"
    return _CODE_TEMPLATES[op].format(*(_code(c) for c in node.children))


def compile_tree(tree: Node) -> Callable:
    """Compile a tree into a fast numpy function ``f(x, p)``.

    ``p`` is indexed as ``p[i]`` so a batch of parameter vectors can be passed
    as an array of shape ``(k, P, 1)`` to get a ``(P, n)`` result.  Errors are
    not suppressed here; callers wrap in ``np.errstate``.
    """
    src = f"lambda x, p: {_code(tree)}"
    return eval(src, dict(_CODE_NS))  # noqa: S307 - source is generated from a closed grammar


# -- random generation -------------------------------------------------------

def random_leaf(basis: BasisSet, rng: np.random.Generator) -> Node:
    if basis.include_constants and (not basis.include_variable or rng.random() < 0.5):
        return const(rng.standard_normal())
    return var()


def random_tree(basis: BasisSet, max_depth: int, rng: np.random.Generator,
                method: str | None = None) -> Node:
    """Ramped half-and-half generation.

    A target depth is drawn uniformly from ``1..max_depth`` and the tree is built
    with either the *full* or the *grow* method (coin flip unless ``method`` is
    given). Constant leaves are drawn from N(0, 1).
    """
    if max_depth < 1:
        raise ValueError("max_depth must be >= 1")
    ops = basis.sorted_ops()
    target = int(rng.integers(1, max_depth + 1))
    if method is None:
        method = "full" if rng.random() < 0.5 else "grow"
    n_leaves = int(basis.include_variable) + int(basis.include_constants)

    def build(d: int) -> Node:
        if d >= target:
            return random_leaf(basis, rng)
        if method == "grow" and rng.random() < n_leaves / (n_leaves + len(ops)):
            return random_leaf(basis, rng)
        op = ops[int(rng.integers(len(ops)))]
        return Node(op, tuple(build(d + 1) for _ in range(ARITY[op])))

    return build(1)


# -- serialization -----------------------------------------------------------

def format_number(value: float) -> str:
    """Shortest round-trip decimal; integral values keep a trailing ``.0``."""
    return repr(float(value))


def to_prefix(tree: Node) -> str:
    op = tree.op
    if op == "x":
        return "x"
    if op == "const":
        return format_number(tree.value)
    if op == "erc":
        return f"c{tree.value}"
    return "(" + " ".join([op] + [to_prefix(c) for c in tree.children]) + ")"


_TOKEN = re.compile(r"\(|\)|[^\s()]+")
_ERC = re.compile(r"c(\d+)$")


def parse(text: str) -> Node:
    """Parse the prefix notation produced by :func:`to_prefix`."""
    tokens = _TOKEN.findall(text)
    if not tokens:
        raise ValueError("empty expression")
    pos = 0

    def atom(tok: str) -> Node:
        if tok == "x":
            return var()
        m = _ERC.match(tok)
        if m:
            return erc(int(m.group(1)))
        try:
            return const(float(tok))
        except ValueError:
            raise ValueError(f"unknown token {tok!r}") from None

    def expr() -> Node:
        nonlocal pos
        if pos >= len(tokens):
            raise ValueError("unexpected end of expression")
        tok = tokens[pos]
        pos += 1
        if tok == ")":
            raise ValueError("unexpected ')'")
        if tok != "(":
            return atom(tok)
        if pos >= len(tokens):
            raise ValueError("unexpected end of expression")
        op = tokens[pos]
        pos += 1
        if op not in ARITY or ARITY[op] == 0:
            raise ValueError(f"unknown operator {op!r}")
        children = tuple(expr() for _ in range(ARITY[op]))
        if pos >= len(tokens) or tokens[pos] != ")":
            raise ValueError(f"expected ')' after {op} arguments")
        pos += 1
        return Node(op, children)

    tree = expr()
    if pos != len(tokens):
        raise ValueError("trailing tokens after expression")
    return tree
