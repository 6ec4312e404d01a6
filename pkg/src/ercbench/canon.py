"""Canonicalization of expression trees before symbolic comparison.

Pipeline: algebraic simplification, constant rationalization, bottom-up
recursive simplification, then replacement of every constant by an abstract
ERC slot.  Two expressions that differ only in constant values, or that are
equal up to the rewrite rules below, end up with the same canonical tree.

The simplifier normalizes a tree into an internal algebraic form and emits it
back as a binary tree:

* sums are flattened, like terms collected, the constant term emitted first
  and the remaining terms sorted (powers of ``x`` before function terms before
  nested sums; ties by structure, constants compared value-blind);
* products carry one coefficient and integer powers of their factors, so
  ``x*x`` becomes ``square(x)`` and ``a/b`` is ``a * b^-1`` internally; negative
  powers are emitted under a single ``div``;
* ``sub`` and unary minus become a ``-1`` coefficient, ``expneg(u)`` becomes
  ``exp(-u)``, products of exponentials merge and constant offsets move out of
  ``exp``;
* a constant coefficient distributes over a sum; a sum that is a factor of a
  larger product is scaled so its leading term has coefficient one;
* ``sqrt(square(u))`` becomes ``abs(u)``; odd/even functions absorb negative
  leading coefficients.

ERC slots are treated as constants of unknown value: any operation combining
only constants folds into a fresh slot.  Rules that need a domain assumption
(``sqrt(u)^2 -> u``, ``ln(exp(u)) -> u``) are not applied.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ercbench.expr import Node, apply_op, const, erc, make, preorder, to_prefix, var

ODD_FUNCS = {"sin", "tan", "tanh"}
EVEN_FUNCS = {"cos", "abs"}


@dataclass(frozen=True)
class CanonConfig:
    precision: int = 15
    max_rewrite_passes: int = 10
    max_denominator: int = 100

    def __post_init__(self):
        if self.precision < 1:
            raise ValueError("precision must be >= 1")
        if self.max_rewrite_passes < 1:
            raise ValueError("max_rewrite_passes must be >= 1")


DEFAULT = CanonConfig()


@dataclass(frozen=True)
class CanonicalExpr:
    tree: Node

    def __str__(self) -> str:
        return to_prefix(self.tree)


# -- internal normal form ----------------------------------------------------
# ('k', float)            concrete constant
# ('a', m, ((id, e), ...)) abstract constant m * prod(slot_id ** e)
# ('x',)                  the variable
# ('f', name, arg)        unary function
# ('s', const, terms)     sum; terms = ((monomial, coef), ...) sorted
# ('p', coef, factors)    product; factors = ((base, exponent), ...) sorted

def _slot(i: int):
    return ("a", 1.0, ((i, 1),))


def _abstract(m: float, powers):
    """Normalize an abstract constant; no slots left means it is concrete."""
    powers = tuple((i, e) for i, e in powers if e != 0)
    if not powers or m == 0.0:
        return ("k", float(m) if powers == () else 0.0)
    return ("a", float(m), powers)


X = ("x",)
ZERO = ("k", 0.0)
ONE = ("k", 1.0)
MINUS_ONE = ("k", -1.0)


def _is_const(nf) -> bool:
    return nf[0] in ("k", "a")


def _is_zero(c) -> bool:
    return c[0] == "k" and c[1] == 0.0


def _is_one(c) -> bool:
    return c[0] == "k" and c[1] == 1.0


def _bare_reciprocal(mono) -> bool:
    return mono[0] == "p" and all(e < 0 for _, e in mono[2])


def _blind_key(nf):
    tag = nf[0]
    if tag in ("k", "a"):
        return ("c",)
    if tag == "x":
        return ("x",)
    if tag == "f":
        return ("f", nf[1], _blind_key(nf[2]))
    if tag == "s":
        c = () if _is_zero(nf[1]) else ("c",)
        return ("s", c, tuple((_blind_key(m), ("c",) if not _is_one(k) else ()) for m, k in nf[2]))
    return ("p", () if _is_one(nf[1]) else ("c",), tuple((_blind_key(b), e) for b, e in nf[2]))


def _full_key(nf):
    tag = nf[0]
    if tag == "k":
        return ("c", "k", repr(nf[1]))
    if tag == "a":
        return ("c", "a", (repr(nf[1]), nf[2]))
    if tag == "x":
        return ("x",)
    if tag == "f":
        return ("f", nf[1], _full_key(nf[2]))
    if tag == "s":
        return ("s", _full_key(nf[1]), tuple((_full_key(m), _full_key(k)) for m, k in nf[2]))
    return ("p", _full_key(nf[1]), tuple((_full_key(b), e) for b, e in nf[2]))


def _rank(nf) -> int:
    tag = nf[0]
    if tag in ("k", "a"):
        return 0
    if tag == "x":
        return 1
    if tag == "p" and all(b == X for b, _ in nf[2]):
        return 1
    if tag == "s":
        return 3
    return 2


def order_key(nf):
    return (_rank(nf), _blind_key(nf), _full_key(nf))


class _Algebra:
    """Constructors that keep the normal-form invariants. One instance per call."""

    def __init__(self, next_abstract: int = 0):
        self.next_abstract = next_abstract
        self._keys = {}

    def key(self, nf):
        try:
            return self._keys[nf]
        except (KeyError, TypeError):
            k = order_key(nf)
            try:
                self._keys[nf] = k
            except TypeError:
                pass
            return k

    def fresh(self):
        self.next_abstract += 1
        return _slot(self.next_abstract - 1)

    # constants ---------------------------------------------------------
    def cadd(self, a, b):
        if _is_zero(a):
            return b
        if _is_zero(b):
            return a
        if a[0] == "k" and b[0] == "k":
            with np.errstate(all="ignore"):
                return ("k", float(np.float64(a[1]) + np.float64(b[1])))
        if a[0] == "a" and b[0] == "a" and a[2] == b[2]:
            return _abstract(a[1] + b[1], a[2])
        return self.fresh()

    def cmul(self, a, b):
        if _is_one(a):
            return b
        if _is_one(b):
            return a
        if a[0] == "k" and b[0] == "k":
            with np.errstate(all="ignore"):
                return ("k", float(np.float64(a[1]) * np.float64(b[1])))
        if _is_zero(a) or _is_zero(b):
            return ZERO
        if a[0] == "k":
            a, b = b, a
        if b[0] == "k":
            return _abstract(a[1] * b[1], a[2])
        powers = dict(a[2])
        for i, e in b[2]:
            powers[i] = powers.get(i, 0) + e
        return _abstract(a[1] * b[1], tuple(sorted(powers.items())))

    def cpow(self, a, n: int):
        if a[0] == "a":
            return _abstract(float(np.power(np.float64(a[1]), np.float64(n))),
                             tuple((i, e * n) for i, e in a[2]))
        v = np.float64(a[1])
        with np.errstate(all="ignore"):
            if n == 2:
                r = v * v
            elif n == 3:
                r = v * v * v
            elif n == -1:
                r = np.float64(1.0) / v
            else:
                r = np.power(v, np.float64(n))
        return ("k", float(r))

    def cfn(self, name, a):
        if a[0] == "a":
            return self.fresh()
        with np.errstate(all="ignore"):
            return ("k", float(apply_op(name, np.float64(a[1]))))

    # sums ----------------------------------------------------------------
    def _split(self, nf):
        """Yield (coef, monomial) pairs; monomial None marks the constant part."""
        tag = nf[0]
        if tag in ("k", "a"):
            yield nf, None
        elif tag == "s":
            yield nf[1], None
            for m, k in nf[2]:
                yield k, m
        elif tag == "p" and not _is_one(nf[1]):
            yield nf[1], self._product(ONE, nf[2])
        else:
            yield ONE, nf

    def add(self, *operands):
        constant = ZERO
        terms: dict = {}
        for op in operands:
            for coef, mono in self._split(op):
                if mono is None:
                    constant = self.cadd(constant, coef)
                elif mono in terms:
                    terms[mono] = self.cadd(terms[mono], coef)
                else:
                    terms[mono] = coef
        kept = [(m, k) for m, k in terms.items() if not _is_zero(k)]
        return self._sum(constant, kept)

    def _sum(self, constant, kept):
        if not kept:
            return constant
        kept.sort(key=lambda mk: self.key(mk[0]))
        if _is_zero(constant) and len(kept) == 1:
            m, k = kept[0]
            return self.mul(k, m) if not _is_one(k) else m
        return ("s", constant, tuple(kept))

    def scale(self, s, k):
        """k * (sum), distributing over the constant and every term."""
        if _is_zero(k):
            return ZERO
        if _is_one(k):
            return s
        constant = self.cmul(s[1], k) if not _is_zero(s[1]) else ZERO
        kept = [(m, self.cmul(c, k)) for m, c in s[2]]
        kept = [(m, c) for m, c in kept if not _is_zero(c)]
        return self._sum(constant, kept)

    def primitive(self, s):
        """Split a sum into (k, s') with s = k * s' and s' having a unit leading coefficient.

        The leading term is the first one whose emitted form shows no
        coefficient when it is 1; terms like ``1/x`` print a literal ``1``
        that would turn into an ERC slot.  Without such a term the sum is
        left alone.
        """
        lead_at = next((i for i, (m, _) in enumerate(s[2]) if not _bare_reciprocal(m)), None)
        if lead_at is None:
            return ONE, s
        lead = s[2][lead_at][1]
        if _is_one(lead):
            return ONE, s
        inv = self.cpow(lead, -1)
        constant = ZERO if _is_zero(s[1]) else self.cmul(s[1], inv)
        kept = [(m, ONE if i == lead_at else self.cmul(c, inv)) for i, (m, c) in enumerate(s[2])]
        kept = [(m, c) for m, c in kept if not _is_zero(c)]
        rest = self._sum(constant, kept)
        return lead, rest

    # products ------------------------------------------------------------
    def mul(self, *operands):
        consts = [o for o in operands if _is_const(o)]
        others = [o for o in operands if not _is_const(o)]
        if len(others) == 1 and others[0][0] == "s":
            k = ONE
            for c in consts:
                k = self.cmul(k, c)
            return self.scale(others[0], k)
        coef = ONE
        factors: dict = {}
        for op in operands:
            tag = op[0]
            if tag in ("k", "a"):
                coef = self.cmul(coef, op)
            elif tag == "p":
                coef = self.cmul(coef, op[1])
                for b, e in op[2]:
                    factors[b] = factors.get(b, 0) + e
            elif tag == "s":
                lead, prim = self.primitive(op)
                coef = self.cmul(coef, lead)
                if prim[0] == "s":
                    factors[prim] = factors.get(prim, 0) + 1
                else:
                    # a primitive sum cannot collapse, but be safe
                    return self.mul(("k", 1.0) if coef == ONE else coef, prim,
                                    *[self._power_base(b, e) for b, e in factors.items()])
            else:
                factors[op] = factors.get(op, 0) + 1
        if _is_zero(coef):
            return ZERO
        return self._product(coef, list(factors.items()))

    def _power_base(self, b, e):
        return ("p", ONE, ((b, e),))

    def _product(self, coef, items):
        items = [(b, e) for b, e in items if e != 0]
        exps = [(b, e) for b, e in items if b[0] == "f" and b[1] == "exp"]
        if exps:
            items = [(b, e) for b, e in items if not (b[0] == "f" and b[1] == "exp")]
            arg = self.add(*[self.mul(("k", float(e)), b[2]) for b, e in exps])
            merged = self.fn("exp", arg)
            if _is_const(merged):
                coef = self.cmul(coef, merged)
            elif merged[0] == "p":
                coef = self.cmul(coef, merged[1])
                items.extend(merged[2])
            else:
                items.append((merged, 1))
            if _is_zero(coef):
                return ZERO
        if not items:
            return coef
        if len(items) == 1 and items[0][1] == 1:
            base = items[0][0]
            if _is_one(coef):
                return base
            if base[0] == "s":
                return self.scale(base, coef)
        items.sort(key=lambda be: self.key(be[0]))
        return ("p", coef, tuple(items))

    def pow(self, nf, n: int):
        tag = nf[0]
        if n == 1:
            return nf
        if tag in ("k", "a"):
            return self.cpow(nf, n)
        if tag == "x":
            return ("p", ONE, ((X, n),))
        if tag == "f":
            if nf[1] == "exp":
                return self.fn("exp", self.mul(("k", float(n)), nf[2]))
            return ("p", ONE, ((nf, n),))
        if tag == "p":
            parts = [self.cpow(nf[1], n)] if not _is_one(nf[1]) else []
            parts += [self._product(ONE, [(b, e * n)]) for b, e in nf[2]]
            return self.mul(*parts)
        lead, prim = self.primitive(nf)
        if prim[0] != "s":
            return self.mul(self.cpow(lead, n), self.pow(prim, n))
        return self.mul(self.cpow(lead, n), ("p", ONE, ((prim, n),)))

    # functions -----------------------------------------------------------
    def leading_coef(self, nf):
        tag = nf[0]
        if tag in ("k", "a"):
            return nf
        if tag == "p":
            return nf[1]
        if tag == "s":
            return nf[2][0][1]
        return ONE

    def fn(self, name: str, arg):
        if _is_const(arg):
            return self.cfn(name, arg)
        if name == "exp":
            if arg[0] == "s" and not _is_zero(arg[1]):
                rest = self._sum(ZERO, list(arg[2]))
                return self.mul(self.cfn("exp", arg[1]), self.fn("exp", rest))
            return ("f", "exp", arg)
        lead = self.leading_coef(arg)
        negative = lead[0] == "k" and lead[1] < 0
        if negative and name in ODD_FUNCS:
            return self.mul(MINUS_ONE, self.fn(name, self.mul(MINUS_ONE, arg)))
        if negative and name in EVEN_FUNCS:
            return self.fn(name, self.mul(MINUS_ONE, arg))
        if name == "sqrt" and arg[0] == "p" and _is_one(arg[1]) and len(arg[2]) == 1 \
                and arg[2][0][1] == 2:
            return self.fn("abs", arg[2][0][0])
        if name == "abs":
            if arg[0] == "f" and arg[1] == "abs":
                return arg
            if arg[0] == "p":
                if arg[1][0] == "k" and not _is_one(arg[1]):
                    return self.mul(("k", abs(arg[1][1])), self.fn("abs", self._product(ONE, list(arg[2]))))
                if _is_one(arg[1]) and all(e % 2 == 0 for _, e in arg[2]):
                    return arg
        return ("f", name, arg)

    # tree conversion -----------------------------------------------------
    def from_tree(self, tree: Node, memo: dict):
        try:
            return memo[tree]
        except KeyError:
            pass
        op = tree.op
        if op == "x":
            nf = X
        elif op == "const":
            nf = ("k", float(tree.value))
        elif op == "erc":
            nf = _slot(int(tree.value)) if tree.value >= 0 else self.fresh()
        else:
            args = [self.from_tree(c, memo) for c in tree.children]
            if op == "add":
                nf = self.add(*args)
            elif op == "sub":
                nf = self.add(args[0], self.mul(MINUS_ONE, args[1]))
            elif op == "mul":
                nf = self.mul(*args)
            elif op == "div":
                nf = self.mul(args[0], self.pow(args[1], -1))
            elif op == "square":
                nf = self.pow(args[0], 2)
            elif op == "cube":
                nf = self.pow(args[0], 3)
            elif op == "expneg":
                nf = self.fn("exp", self.mul(MINUS_ONE, args[0]))
            else:
                nf = self.fn(op, args[0])
        memo[tree] = nf
        return nf


# -- emission ----------------------------------------------------------------

def _chain(op: str, nodes: list) -> Node:
    out = nodes[0]
    for n in nodes[1:]:
        out = make(op, out, n)
    return out


def _emit_const(c) -> Node:
    if c[0] == "k":
        return const(c[1])
    if c[1] == 1.0 and len(c[2]) == 1 and c[2][0][1] == 1:
        return erc(c[2][0][0])
    return erc(-1)  # derived constant: read back as a fresh slot


def _smooth(e: int) -> bool:
    while e % 2 == 0:
        e //= 2
    while e % 3 == 0:
        e //= 3
    return e == 1


def _nested_power(b: Node, e: int) -> Node:
    if e == 1:
        return b
    if e % 3 == 0:
        return make("cube", _nested_power(b, e // 3))
    return make("square", _nested_power(b, e // 2))


def _power_pieces(base, e: int) -> list:
    """``base**e`` as a few square/cube nestings, largest piece first."""
    b = to_tree(base)
    pieces = []
    while e > 0:
        k = max(j for j in range(1, e + 1) if _smooth(j))
        pieces.append(_nested_power(b, k))
        e -= k
    return pieces


def _emit_product(coef, factors) -> Node:
    num = [p for b, e in factors if e > 0 for p in _power_pieces(b, e)]
    den = [p for b, e in factors if e < 0 for p in _power_pieces(b, -e)]
    if not _is_one(coef) or not num:
        # (k * sum) * ... would distribute on re-reading, so the coefficient
        # of a product of sums goes last
        sums_only = num and all(b[0] == "s" for b, e in factors if e > 0)
        num.insert(len(num) if sums_only else 0, _emit_const(coef))
    top = _chain("mul", num)
    if den:
        return make("div", top, _chain("mul", den))
    return top


def to_tree(nf) -> Node:
    tag = nf[0]
    if tag in ("k", "a"):
        return _emit_const(nf)
    if tag == "x":
        return var()
    if tag == "f":
        return make(nf[1], to_tree(nf[2]))
    if tag == "p":
        return _emit_product(nf[1], nf[2])
    pieces = [] if _is_zero(nf[1]) else [_emit_const(nf[1])]
    for mono, coef in nf[2]:
        if mono[0] == "p":
            pieces.append(_emit_product(coef, mono[2]))
        elif _is_one(coef):
            pieces.append(to_tree(mono))
        else:
            pieces.append(make("mul", _emit_const(coef), to_tree(mono)))
    return _chain("add", pieces)


def renumber_ercs(tree: Node) -> Node:
    """Give every ERC leaf its own slot, numbered in preorder."""
    counter = 0

    def walk(node: Node) -> Node:
        nonlocal counter
        if node.op == "erc":
            counter += 1
            return erc(counter - 1)
        if not node.children:
            return node
        return Node(node.op, tuple(walk(c) for c in node.children))

    return walk(tree)


def _max_erc(tree: Node) -> int:
    idx = [n.value for n in preorder(tree) if n.op == "erc"]
    return max(idx) + 1 if idx else 0


class _Ids:
    """Abstract-constant id allocator shared by every rewrite in one call."""

    def __init__(self, tree: Node):
        self.next = _max_erc(tree)


def _normalize_once(tree: Node, ids: _Ids) -> Node:
    alg = _Algebra(max(ids.next, _max_erc(tree)))
    out = to_tree(alg.from_tree(tree, {}))
    ids.next = alg.next_abstract
    return out


def _algebraic(tree: Node, cfg: CanonConfig, ids: _Ids) -> Node:
    current = tree
    seen = to_prefix(renumber_ercs(current))
    for _ in range(cfg.max_rewrite_passes):
        current = _normalize_once(current, ids)
        text = to_prefix(renumber_ercs(current))
        if text == seen:
            break
        seen = text
    return current


# -- public pipeline -----------------------------------------------------------

def algebraic_simplify(tree: Node, cfg: CanonConfig | None = None) -> Node:
    """Rewrite to the normal form, repeating until nothing changes (or the pass limit).

    ERC slots in the output are renumbered in preorder.
    """
    cfg = cfg or DEFAULT
    return renumber_ercs(_algebraic(tree, cfg, _Ids(tree)))


def snap_constant(value: float, cfg: CanonConfig | None = None, additive: bool = True) -> float:
    """Snap to a nearby small rational, then round to ``precision`` significant digits.

    An additive constant within ``10**-precision`` (absolute) of zero becomes
    zero.  A constant within that relative distance of ``p/q`` with
    ``q <= max_denominator`` becomes ``p/q``.  Tiny factors are kept: zeroing
    ``1e-20`` in ``1e-20 * exp(50 * x)`` would change the value.
    """
    cfg = cfg or DEFAULT
    if not math.isfinite(value):
        return value
    tol = 10.0 ** (-cfg.precision)
    if abs(value) <= tol:
        return 0.0 if additive else float(f"{value:.{cfg.precision}g}")
    for q in range(1, cfg.max_denominator + 1):
        p = round(value * q)
        if p != 0 and abs(value - p / q) <= tol * abs(value):
            value = p / q
            break
    return float(f"{value:.{cfg.precision}g}")


def rationalize_constants(tree: Node, cfg: CanonConfig | None = None) -> Node:
    """Apply :func:`snap_constant` to every constant leaf.

    Zero-snapping only happens for direct operands of ``add``/``sub``.
    """
    cfg = cfg or DEFAULT

    def walk(node: Node, additive: bool) -> Node:
        if node.op == "const":
            return const(snap_constant(node.value, cfg, additive))
        if not node.children:
            return node
        flag = node.op in ("add", "sub")
        return Node(node.op, tuple(walk(c, flag) for c in node.children))

    return walk(tree, False)


def recursive_simplify(tree: Node, cfg: CanonConfig | None = None) -> Node:
    """Bottom-up: simplify every argument first, rebuild, then simplify the root.

    Leaves are rationalized and folded; each rebuilt node is rationalized and
    passed through :func:`algebraic_simplify`.
    """
    cfg = cfg or DEFAULT
    memo: dict = {}
    ids = _Ids(tree)

    def rec(node: Node) -> Node:
        if node in memo:
            return memo[node]
        rebuilt = node
        if node.children:
            rebuilt = Node(node.op, tuple(rec(c) for c in node.children))
        out = _algebraic(rationalize_constants(rebuilt, cfg), cfg, ids)
        memo[node] = out
        return out

    return renumber_ercs(rec(tree))


def erc_abstract(tree: Node) -> CanonicalExpr:
    """Replace every constant leaf (and renumber every ERC leaf) by ERC slots in preorder."""
    counter = 0

    def walk(node: Node) -> Node:
        nonlocal counter
        if node.op in ("const", "erc"):
            counter += 1
            return erc(counter - 1)
        if not node.children:
            return node
        return Node(node.op, tuple(walk(c) for c in node.children))

    return CanonicalExpr(walk(tree))


def simplify(tree: Node, cfg: CanonConfig | None = None) -> Node:
    """Every stage except the final ERC abstraction; numerically equivalent to ``tree``."""
    cfg = cfg or DEFAULT
    t = algebraic_simplify(tree, cfg)
    t = rationalize_constants(t, cfg)
    return recursive_simplify(t, cfg)


def canonicalize(tree: Node, cfg: CanonConfig | None = None) -> CanonicalExpr:
    return erc_abstract(simplify(tree, cfg))
