"""Tensor-term type calculus: terms, formulas, proofs and grammars."""

__version__ = "0.1.0"
