"""Pairs of algebraically equivalent expressions, each checked by sympy."""

import sympy

from ercbench.expr import Node

PAIRS = [
    ("(add (mul x 2.0) (add (mul x 3.0) 1.0))", "(add 1.0 (mul 5.0 x))"),
    ("(add x 0.0)", "x"),
    ("(add (mul (sin x) 1.0) (sub 4.0 4.0))", "(sin x)"),
    ("(mul x x)", "(square x)"),
    ("(mul (square x) x)", "(cube x)"),
    ("(sqrt (square x))", "(abs x)"),
    ("(cos (mul 2.0 (mul 2.0 x)))", "(cos (mul 4.0 x))"),
    ("(sub x (sub 0.0 x))", "(mul 2.0 x)"),
    ("(add 1.57 (mul 24.3 x))", "(add (mul x 24.3) 1.57)"),
    ("(div x 2.0)", "(mul 0.5 x)"),
    ("(mul (add x 1.0) (add x 1.0))", "(square (add 1.0 x))"),
    ("(sub (mul 3.0 (sin x)) (sin x))", "(mul 2.0 (sin x))"),
    ("(exp (add x 1.0))", "(mul 2.718281828459045 (exp x))"),
    ("(mul (exp x) (exp x))", "(exp (mul 2.0 x))"),
    ("(expneg x)", "(exp (sub 0.0 x))"),
    ("(div (mul x x) x)", "x"),
    ("(add (ln x) (ln x))", "(mul 2.0 (ln x))"),
    ("(sin (sub 0.0 x))", "(sub 0.0 (sin x))"),
    ("(cos (sub 0.0 x))", "(cos x)"),
    ("(abs (sub 0.0 x))", "(abs x)"),
    ("(abs (mul -3.0 x))", "(mul 3.0 (abs x))"),
    ("(mul (mul 2.0 x) (mul 3.0 x))", "(mul 6.0 (square x))"),
    ("(sub (add x (tanh x)) x)", "(tanh x)"),
    ("(div 1.0 (div 1.0 x))", "x"),
    ("(mul (cube x) (div 1.0 x))", "(square x)"),
    ("(add (mul 0.9999999999999997 x) 1e-17)", "x"),
    ("(mul (sub x 1.0) 2.0)", "(sub (mul 2.0 x) 2.0)"),
    ("(exp (ln 5.0))", "5.0"),
    ("(add (square (sin x)) (mul (sin x) (sin x)))", "(mul 2.0 (square (sin x)))"),
    ("(mul 213.81 (sub 1.0 (exp (mul -0.547237 x))))",
     "(sub 213.81 (mul 213.81 (expneg (mul 0.547237 x))))"),
    ("(tan (mul x -1.0))", "(mul -1.0 (tan x))"),
    ("(div (sin x) (div (sin x) (cos x)))", "(cos x)"),
]

_X = sympy.Symbol("x", real=True)
_SYM = {
    "add": lambda a, b: a + b, "sub": lambda a, b: a - b, "mul": lambda a, b: a * b,
    "div": lambda a, b: a / b, "square": lambda a: a ** 2, "cube": lambda a: a ** 3,
    "sqrt": sympy.sqrt, "sin": sympy.sin, "cos": sympy.cos, "tan": sympy.tan,
    "tanh": sympy.tanh, "abs": sympy.Abs, "ln": sympy.log, "exp": sympy.exp,
    "expneg": lambda a: sympy.exp(-a),
}


def to_sympy(tree: Node):
    if tree.op == "x":
        return _X
    if tree.op == "const":
        return sympy.nsimplify(tree.value, rational=True, tolerance=1e-15)
    return _SYM[tree.op](*(to_sympy(c) for c in tree.children))


def sympy_equivalent(a: Node, b: Node) -> bool:
    """True when the difference simplifies to zero (up to negligible constants)."""
    diff = sympy.simplify(to_sympy(a) - to_sympy(b))
    if diff == 0:
        return True
    # exp(1) and similar only agree to float precision
    return all(abs(float(diff.subs(_X, v))) < 1e-12 for v in (0.37, 1.3, 2.9))
