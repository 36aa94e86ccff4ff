"""Tensor formulas and types.

Grammar: atoms are literals applied to index rows; compound formulas are
built with the multiplicative connectives (tensor, par) and the two index
binders nabla and triangle.  A binder ``Q^i_j A`` (with ``i != j``) binds the
lower occurrence of ``i`` and the upper occurrence of ``j`` in ``A`` that are
not already bound.

Well-formedness: every index has at most one free upper and at most one free
lower occurrence, and every binder actually binds exactly one lower and one
upper occurrence.  A *type* is a well-formed formula whose free upper and
free lower index sets are disjoint.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Union

from .errors import MalformedFormula
from .fresh import RESERVED_PREFIX
from .terms import IndexPair


@dataclass(frozen=True)
class Atom:
    """Literal ``name`` (negated if ``positive`` is false) with index rows."""

    name: str
    positive: bool
    upper: tuple[str, ...]
    lower: tuple[str, ...]

    @property
    def valency(self) -> tuple[int, int]:
        return (len(self.upper), len(self.lower))


@dataclass(frozen=True)
class Tensor:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Par:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Nabla:
    """``nabla^up_down A``: binds the lower ``up`` and the upper ``down``."""

    up: str
    down: str
    body: "Formula"


@dataclass(frozen=True)
class Triangle:
    """``tri^up_down A``: binds the lower ``up`` and the upper ``down``."""

    up: str
    down: str
    body: "Formula"


Formula = Union[Atom, Tensor, Par, Nabla, Triangle]
Binder = (Nabla, Triangle)


def atom(name: str, upper=(), lower=(), positive: bool = True) -> Atom:
    return Atom(name, positive, tuple(upper), tuple(lower))


def dual(f: Formula) -> Formula:
    """Involutive duality (linear negation)."""
    if isinstance(f, Atom):
        return Atom(f.name, not f.positive, tuple(reversed(f.lower)), tuple(reversed(f.upper)))
    if isinstance(f, Tensor):
        return Par(dual(f.right), dual(f.left))
    if isinstance(f, Par):
        return Tensor(dual(f.right), dual(f.left))
    if isinstance(f, Nabla):
        return Triangle(f.down, f.up, dual(f.body))
    if isinstance(f, Triangle):
        return Nabla(f.down, f.up, dual(f.body))
    raise TypeError(f"not a formula: {f!r}")


def subformulas(f: Formula) -> Iterator[Formula]:
    yield f
    if isinstance(f, (Tensor, Par)):
        yield from subformulas(f.left)
        yield from subformulas(f.right)
    elif isinstance(f, (Nabla, Triangle)):
        yield from subformulas(f.body)


def _occurrences(f: Formula) -> tuple[list[str], list[str]]:
    """Free (upper, lower) occurrences, in left-to-right order.

    A binder captures the first not-yet-bound lower occurrence of its upper
    row index and upper occurrence of its lower row index within its scope.
    """

    def free_occs(g: Formula) -> tuple[list[str], list[str]]:
        if isinstance(g, Atom):
            return list(g.upper), list(g.lower)
        if isinstance(g, (Tensor, Par)):
            lu, ll = free_occs(g.left)
            ru, rl = free_occs(g.right)
            return lu + ru, ll + rl
        u, l = free_occs(g.body)
        # Q^up_down binds the lower `up` and the upper `down`
        if g.down in u:
            u.remove(g.down)
        if g.up in l:
            l.remove(g.up)
        return u, l

    return free_occs(f)


def free_occurrences(f: Formula) -> tuple[list[str], list[str]]:
    """Free (upper, lower) index occurrences in left-to-right order."""
    return _occurrences(f)


def free_indices(f: Formula) -> IndexPair:
    u, l = _occurrences(f)
    return IndexPair(frozenset(u), frozenset(l))


def well_formed(f: Formula) -> bool:
    try:
        check_well_formed(f)
        return True
    except MalformedFormula:
        return False


def check_well_formed(f: Formula) -> None:
    """Raise MalformedFormula unless ``f`` is well formed."""
    if isinstance(f, Atom):
        u, l = f.upper, f.lower
        if len(set(u)) != len(u):
            raise MalformedFormula(f"repeated upper index in atom {f.name}")
        if len(set(l)) != len(l):
            raise MalformedFormula(f"repeated lower index in atom {f.name}")
        return
    if isinstance(f, (Tensor, Par)):
        check_well_formed(f.left)
        check_well_formed(f.right)
        lu, ll = _occurrences(f.left)
        ru, rl = _occurrences(f.right)
        dupu = set(lu) & set(ru)
        dupl = set(ll) & set(rl)
        if dupu or dupl:
            raise MalformedFormula(f"index {sorted(dupu | dupl)[0]!r} occurs free twice")
        return
    if isinstance(f, (Nabla, Triangle)):
        if f.up == f.down:
            raise MalformedFormula("binder rows must use distinct indices")
        check_well_formed(f.body)
        bu, bl = _occurrences(f.body)
        if bl.count(f.up) != 1:
            raise MalformedFormula(f"binder must capture exactly one lower {f.up!r}")
        if bu.count(f.down) != 1:
            raise MalformedFormula(f"binder must capture exactly one upper {f.down!r}")
        return
    raise TypeError(f"not a formula: {f!r}")


def is_type(f: Formula) -> bool:
    if not well_formed(f):
        return False
    fi = free_indices(f)
    return not (fi.upper & fi.lower)


def rename_free(f: Formula, mapping_upper: dict[str, str], mapping_lower: dict[str, str]) -> Formula:
    """Rename free upper/lower occurrences (rows treated independently)."""
    if isinstance(f, Atom):
        return Atom(
            f.name,
            f.positive,
            tuple(mapping_upper.get(i, i) for i in f.upper),
            tuple(mapping_lower.get(i, i) for i in f.lower),
        )
    if isinstance(f, Tensor):
        return Tensor(rename_free(f.left, mapping_upper, mapping_lower),
                      rename_free(f.right, mapping_upper, mapping_lower))
    if isinstance(f, Par):
        return Par(rename_free(f.left, mapping_upper, mapping_lower),
                   rename_free(f.right, mapping_upper, mapping_lower))
    if isinstance(f, (Nabla, Triangle)):
        mu = {k: v for k, v in mapping_upper.items() if k != f.down}
        ml = {k: v for k, v in mapping_lower.items() if k != f.up}
        body = rename_free(f.body, mu, ml)
        cls = type(f)
        return cls(f.up, f.down, body)
    raise TypeError(f"not a formula: {f!r}")


def rename_upper(f: Formula, old: str, new: str) -> Formula:
    return rename_free(f, {old: new}, {})


def rename_lower(f: Formula, old: str, new: str) -> Formula:
    return rename_free(f, {}, {old: new})


def rename_all(f: Formula, mapping: dict[str, str]) -> Formula:
    """Apply an index renaming to *every* occurrence, including binder rows."""
    if isinstance(f, Atom):
        return Atom(f.name, f.positive,
                    tuple(mapping.get(i, i) for i in f.upper),
                    tuple(mapping.get(i, i) for i in f.lower))
    if isinstance(f, Tensor):
        return Tensor(rename_all(f.left, mapping), rename_all(f.right, mapping))
    if isinstance(f, Par):
        return Par(rename_all(f.left, mapping), rename_all(f.right, mapping))
    if isinstance(f, (Nabla, Triangle)):
        cls = type(f)
        return cls(mapping.get(f.up, f.up), mapping.get(f.down, f.down), rename_all(f.body, mapping))
    raise TypeError(f"not a formula: {f!r}")


def alpha_canonical(f: Formula, start: int = 0) -> Formula:
    """Canonical renaming of bound indices to reserved names.

    Binders are renamed in traversal order to ``%b0``, ``%b1``, ... so two
    formulas are alpha-equivalent iff their canonical forms are equal.
    (Fresh generators only ever produce bare ``%<number>`` names, so the
    ``%b``/``%%f`` canonical namespaces never collide with them.)
    """
    counter = [start]

    def walk_outer(g: Formula) -> Formula:
        if isinstance(g, (Nabla, Triangle)):
            k = counter[0]
            counter[0] += 2
            nu = f"{RESERVED_PREFIX}b{k}"
            nd = f"{RESERVED_PREFIX}b{k + 1}"
            # first canonicalize the body with the binder's captured
            # occurrences still named as written, then rename them.
            inner = walk_outer(g.body)
            inner = rename_lower(rename_upper(inner, g.down, nd), g.up, nu)
            cls = type(g)
            return cls(nu, nd, inner)
        if isinstance(g, Tensor):
            return Tensor(walk_outer(g.left), walk_outer(g.right))
        if isinstance(g, Par):
            return Par(walk_outer(g.left), walk_outer(g.right))
        return g

    return walk_outer(f)


def alpha_equiv(f: Formula, g: Formula) -> bool:
    return alpha_canonical(f) == alpha_canonical(g)


def size(f: Formula) -> int:
    if isinstance(f, Atom):
        return 1
    if isinstance(f, (Tensor, Par)):
        return 1 + size(f.left) + size(f.right)
    return 1 + size(f.body)
