"""Tensor terms: elements of the free commutative monoid of indexed words.

A term is a multiset of factors.  A *word factor* ``[w]_i^j`` carries a word
(tuple of terminal symbols) together with one lower index ``i`` and one upper
index ``j``; geometrically it is an edge from ``i`` to ``j`` labelled ``w``.
A *loop factor* ``[w]`` is a vertex-free cycle carrying a cyclic word.  A
*variable factor* (used by natural deduction) is an opaque box with rows of
upper and lower indices.  The monoid unit ``1`` is the empty multiset.

Occurrence discipline: in any term an index may occur at most once as a lower
index and at most once as an upper index.  An index with both occurrences is
*bound*, with one occurrence *free*.

Beta reduction glues word factors along bound indices shared by two word
factors, turns ``[w]_i^i`` into the loop ``[w]``, erases the empty loop and
identifies cyclic rotations of loop words.  Normal forms are canonical:
gluing is exhaustive and loop words are stored as their lexicographically
least rotation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, NamedTuple, Union

from .errors import IndexCollision, MalformedTerm


class IndexPair(NamedTuple):
    """A pair (upper set, lower set) of index names."""

    upper: frozenset[str]
    lower: frozenset[str]

    def dagger(self) -> "IndexPair":
        return IndexPair(self.lower, self.upper)

    def union(self, other: "IndexPair") -> "IndexPair":
        return IndexPair(self.upper | other.upper, self.lower | other.lower)

    def perp(self, other: "IndexPair") -> bool:
        """Componentwise disjointness."""
        return not (self.upper & other.upper) and not (self.lower & other.lower)

    def support(self) -> frozenset[str]:
        return self.upper | self.lower

    @staticmethod
    def empty() -> "IndexPair":
        return IndexPair(frozenset(), frozenset())


@dataclass(frozen=True)
class WordFactor:
    """Regular factor ``[word]_lower^upper``."""

    word: tuple[str, ...]
    lower: str
    upper: str

    def key(self):
        return (0, self.word, self.lower, self.upper)


@dataclass(frozen=True)
class LoopFactor:
    """Singular factor ``[word]`` carrying a cyclic word, stored in its
    lexicographically least rotation."""

    word: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "word", least_rotation(self.word))

    def key(self):
        return (1, self.word)


@dataclass(frozen=True)
class VarFactor:
    """Opaque variable factor with ordered index rows (natural deduction)."""

    name: str
    upper: tuple[str, ...]
    lower: tuple[str, ...]

    def key(self):
        return (2, self.name, self.upper, self.lower)


Factor = Union[WordFactor, LoopFactor, VarFactor]


def least_rotation(word: tuple[str, ...]) -> tuple[str, ...]:
    """Lexicographically least rotation of a tuple of symbols."""
    if len(word) <= 1:
        return word
    best = word
    for k in range(1, len(word)):
        cand = word[k:] + word[:k]
        if cand < best:
            best = cand
    return best


def _factor_occurrences(factor: Factor) -> tuple[tuple[str, ...], tuple[str, ...]]:
    """(upper occurrences, lower occurrences) of a factor."""
    if isinstance(factor, WordFactor):
        return (factor.upper,), (factor.lower,)
    if isinstance(factor, LoopFactor):
        return (), ()
    return factor.upper, factor.lower


class Term:
    """A multiset of factors subject to the occurrence discipline."""

    __slots__ = ("factors",)

    def __init__(self, factors: Iterable[Factor] = ()):
        fs = sorted(factors, key=lambda f: f.key())
        uppers: set[str] = set()
        lowers: set[str] = set()
        for f in fs:
            up, lo = _factor_occurrences(f)
            for i in up:
                if i in uppers:
                    raise MalformedTerm(f"index {i!r} occurs twice as upper")
                uppers.add(i)
            for i in lo:
                if i in lowers:
                    raise MalformedTerm(f"index {i!r} occurs twice as lower")
                lowers.add(i)
        object.__setattr__(self, "factors", tuple(fs))

    # -- basic structure ---------------------------------------------------

    def __eq__(self, other) -> bool:
        return isinstance(other, Term) and self.factors == other.factors

    def __hash__(self) -> int:
        return hash(self.factors)

    def __iter__(self) -> Iterator[Factor]:
        return iter(self.factors)

    def __len__(self) -> int:
        return len(self.factors)

    def __repr__(self) -> str:
        from .surface import show_term

        return f"Term({show_term(self)})"

    def is_unit(self) -> bool:
        return not self.factors

    def word_factors(self) -> tuple[WordFactor, ...]:
        return tuple(f for f in self.factors if isinstance(f, WordFactor))

    def loop_factors(self) -> tuple[LoopFactor, ...]:
        return tuple(f for f in self.factors if isinstance(f, LoopFactor))

    def var_factors(self) -> tuple[VarFactor, ...]:
        return tuple(f for f in self.factors if isinstance(f, VarFactor))

    # -- indices -----------------------------------------------------------

    def indices(self) -> IndexPair:
        """I(t): all upper and lower index occurrences."""
        uppers: set[str] = set()
        lowers: set[str] = set()
        for f in self.factors:
            up, lo = _factor_occurrences(f)
            uppers.update(up)
            lowers.update(lo)
        return IndexPair(frozenset(uppers), frozenset(lowers))

    def free_indices(self) -> IndexPair:
        """FI(t): indices with exactly one occurrence."""
        idx = self.indices()
        both = idx.upper & idx.lower
        return IndexPair(idx.upper - both, idx.lower - both)

    def bound_indices(self) -> frozenset[str]:
        idx = self.indices()
        return idx.upper & idx.lower

    # -- monoid structure ----------------------------------------------------

    def __mul__(self, other: "Term") -> "Term":
        a, b = self.indices(), other.indices()
        for i in sorted(a.upper & b.upper):
            raise IndexCollision(i)
        for i in sorted(a.lower & b.lower):
            raise IndexCollision(i)
        return Term(self.factors + other.factors)

    def without(self, factor: Factor) -> "Term":
        """Remove one occurrence of ``factor`` (must be present)."""
        fs = list(self.factors)
        fs.remove(factor)
        return Term(fs)

    # -- renaming ------------------------------------------------------------

    def rename(self, mapping: dict[str, str]) -> "Term":
        """Apply an index renaming to every occurrence (must stay well formed)."""

        def r(i: str) -> str:
            return mapping.get(i, i)

        out: list[Factor] = []
        for f in self.factors:
            if isinstance(f, WordFactor):
                out.append(WordFactor(f.word, r(f.lower), r(f.upper)))
            elif isinstance(f, VarFactor):
                out.append(VarFactor(f.name, tuple(r(i) for i in f.upper), tuple(r(i) for i in f.lower)))
            else:
                out.append(f)
        return Term(out)

    # -- beta reduction --------------------------------------------------------

    def beta_normalize(self) -> "Term":
        """Canonical beta-normal form.

        Word factors are glued along indices bound between two word factors,
        cycles become loops, empty loops vanish and every loop word is put
        into its least rotation.  Variable factors block gluing.
        """
        words = list(self.word_factors())
        by_lower = {f.lower: k for k, f in enumerate(words)}
        by_upper = {f.upper: k for k, f in enumerate(words)}
        # successor: factor k is followed by the word factor whose lower index
        # equals k's upper index (gluing happens head-to-tail).
        succ = {k: by_lower.get(f.upper) for k, f in enumerate(words)}
        pred = {k: by_upper.get(f.lower) for k, f in enumerate(words)}

        visited: set[int] = set()
        out: list[Factor] = []
        loops: list[tuple[str, ...]] = [f.word for f in self.loop_factors()]

        # chains: start at factors with no predecessor
        for k, f in enumerate(words):
            if pred[k] is not None or k in visited:
                continue
            chain = [k]
            visited.add(k)
            cur = k
            while succ[cur] is not None and succ[cur] not in visited:
                cur = succ[cur]
                chain.append(cur)
                visited.add(cur)
            glued = tuple(s for j in chain for s in words[j].word)
            out.append(WordFactor(glued, words[chain[0]].lower, words[chain[-1]].upper))

        # remaining word factors form cycles
        for k in range(len(words)):
            if k in visited:
                continue
            cycle = [k]
            visited.add(k)
            cur = succ[k]
            while cur is not None and cur != k:
                cycle.append(cur)
                visited.add(cur)
                cur = succ[cur]
            loops.append(tuple(s for j in cycle for s in words[j].word))

        for w in loops:
            if w:
                out.append(LoopFactor(least_rotation(w)))

        out.extend(self.var_factors())
        return Term(out)

    def beta_equiv(self, other: "Term") -> bool:
        return self.beta_normalize() == other.beta_normalize()

    # -- alpha equivalence ------------------------------------------------------

    def alpha_equiv(self, other: "Term") -> bool:
        """Equality up to renaming of bound indices."""
        if len(self.factors) != len(other.factors):
            return False
        sb, ob = self.bound_indices(), other.bound_indices()
        if len(sb) != len(ob):
            return False
        if self.free_indices() != other.free_indices():
            return False

        mine = list(self.factors)
        theirs = list(other.factors)

        def match(ms: list[Factor], ts: list[Factor], ren: dict[str, str]) -> bool:
            if not ms:
                return not ts
            f = ms[0]
            for k, g in enumerate(ts):
                if type(f) is not type(g):
                    continue
                pairs: list[tuple[str, str]] = []
                if isinstance(f, WordFactor):
                    if f.word != g.word:
                        continue
                    pairs = [(f.lower, g.lower), (f.upper, g.upper)]
                elif isinstance(f, LoopFactor):
                    if f.word != g.word:
                        continue
                elif isinstance(f, VarFactor):
                    if f.name != g.name or len(f.upper) != len(g.upper) or len(f.lower) != len(g.lower):
                        continue
                    pairs = list(zip(f.upper, g.upper)) + list(zip(f.lower, g.lower))
                new = dict(ren)
                ok = True
                for a, b in pairs:
                    if a in sb:
                        if b not in ob:
                            ok = False
                            break
                        if new.setdefault(a, b) != b:
                            ok = False
                            break
                    elif a != b:
                        ok = False
                        break
                if not ok:
                    continue
                if len(set(new.values())) != len(new):
                    continue
                if match(ms[1:], ts[:k] + ts[k + 1 :], new):
                    return True
            return False

        return match(mine, theirs, {})

    # -- graph view ----------------------------------------------------------------

    def to_graph(self) -> dict:
        """Bipartite-graph view: vertices are index occurrences, edges are factors."""
        idx = self.indices()
        edges = []
        for f in self.factors:
            if isinstance(f, WordFactor):
                edges.append({"kind": "edge", "tail": f.lower, "head": f.upper, "word": list(f.word)})
            elif isinstance(f, LoopFactor):
                edges.append({"kind": "loop", "word": list(f.word)})
            else:
                edges.append(
                    {"kind": "variable", "name": f.name, "upper": list(f.upper), "lower": list(f.lower)}
                )
        return {
            "lower_vertices": sorted(idx.lower),
            "upper_vertices": sorted(idx.upper),
            "edges": edges,
        }


# -- convenient constructors ------------------------------------------------


def unit() -> Term:
    return Term()


def word(symbols: Iterable[str], lower: str, upper: str) -> Term:
    return Term([WordFactor(tuple(symbols), lower, upper)])


def loop(symbols: Iterable[str]) -> Term:
    return Term([LoopFactor(tuple(symbols))])


def delta(upper: str, lower: str) -> Term:
    """Kronecker delta ``[eps]_lower^upper``."""
    return Term([WordFactor((), lower, upper)])


def delta_factor(upper: str, lower: str) -> WordFactor:
    return WordFactor((), lower, upper)


def variable(name: str, upper: Iterable[str], lower: Iterable[str]) -> Term:
    return Term([VarFactor(name, tuple(upper), tuple(lower))])


def product(terms: Iterable[Term]) -> Term:
    out = Term()
    for t in terms:
        out = out * t
    return out
