"""Canonical forms and tree edit distance.

Canonicalization maps algebraically equal expressions to the same tree and
replaces constant values by abstract slots, so TED measures structure only.
"""

from ercbench.canon import canonicalize
from ercbench.expr import parse
from ercbench.ted import as_labeled, ted, ted_canonical

target = parse("(add 3.0 (mul 2.13 (ln x)))")  # F5
candidates = [
    "(add (mul (ln x) 2.1299) 3.0001)",
    "(sub (mul 2.0 (ln x)) (sub 0.0 (add 1.0 2.0)))",
    "(add (mul (ln x) (ln x)) 3.0)",
    "(add 3.0 (mul 2.13 (ln (mul x x))))",
    "(div (mul 4.26 (ln x)) 2.0)",
]
print("target:", canonicalize(target))
for text in candidates:
    t = parse(text)
    raw = ted(as_labeled(t), as_labeled(target))
    print(f"{text:<50} -> {str(canonicalize(t)):<32} raw TED {raw:>2.0f}, "
          f"canonical TED {ted_canonical(t, target)}")
