"""Deterministic fresh-index generation.

Fresh names are always produced by an explicit, counter-backed generator so
that every construction is reproducible.  Names of the form ``%k`` are
reserved: the surface parser rejects them, so generated names can never
collide with user-written ones.
"""

from __future__ import annotations

from typing import Iterable

RESERVED_PREFIX = "%"


class FreshGen:
    """Counter-backed source of fresh index (and variable) names."""

    def __init__(self, avoid: Iterable[str] = (), prefix: str = RESERVED_PREFIX):
        self._counter = 0
        self._prefix = prefix
        self._avoid = set(avoid)

    def avoid(self, names: Iterable[str]) -> "FreshGen":
        self._avoid.update(names)
        return self

    def fresh(self, hint: str = "") -> str:
        while True:
            name = f"{self._prefix}{hint}{self._counter}"
            self._counter += 1
            if name not in self._avoid:
                self._avoid.add(name)
                return name

    def fresh_pair(self, hint: str = "") -> tuple[str, str]:
        return self.fresh(hint), self.fresh(hint)
