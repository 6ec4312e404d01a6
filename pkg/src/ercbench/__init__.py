"""Benchmark of constant optimizers inside tree-based genetic programming."""

from ercbench.expr import BasisSet, Node, evaluate, parse, to_prefix

__version__ = "0.1.0"

__all__ = ["BasisSet", "Node", "evaluate", "parse", "to_prefix", "__version__"]
