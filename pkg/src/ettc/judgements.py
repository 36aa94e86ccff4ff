"""Sequents: tensor terms typed by contexts of formulas.

A sequent ``|- t :: A1, ..., An`` pairs a term with an ordered context of
well-formed formulas.  It is valid when

*   the context formulas have pairwise componentwise-disjoint free indices,
*   the term's indices are componentwise disjoint from the context's free
    indices, and
*   after erasing bound indices, every remaining index has exactly one upper
    and one lower occurrence across term and context.

A *typing* sequent additionally has a degeneracy-free context of types; then
the term's free indices are exactly the context's free indices with rows
swapped.  Eta expansion trades a degenerate context index for a delta factor;
the eta-long form of a sequent is the typing sequent it expands to.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations

from .errors import MalformedJudgement
from .formulas import (Formula, alpha_canonical, check_well_formed, free_indices,
                       free_occurrences, is_type, rename_all, rename_free, size)
from .fresh import RESERVED_PREFIX, FreshGen
from .terms import IndexPair, Term, WordFactor, delta, delta_factor


@dataclass(frozen=True)
class Sequent:
    """``|- term :: context`` (one-sided; natural deduction wraps this)."""

    term: Term
    context: tuple[Formula, ...]

    def __repr__(self) -> str:
        from .surface import show_sequent

        return f"Sequent({show_sequent(self)})"

    def replace(self, pos: int, *formulas: Formula) -> "Sequent":
        ctx = self.context[:pos] + tuple(formulas) + self.context[pos + 1 :]
        return Sequent(self.term, ctx)

    def with_term(self, term: Term) -> "Sequent":
        return Sequent(term, self.context)


def context_fi(context: tuple[Formula, ...]) -> IndexPair:
    out = IndexPair.empty()
    for f in context:
        out = out.union(free_indices(f))
    return out


def sequent_support(seq: Sequent) -> frozenset[str]:
    """All index names appearing anywhere (term indices + context frees)."""
    return seq.term.indices().support() | context_fi(seq.context).support()


def validate(seq: Sequent) -> None:
    """Raise MalformedJudgement unless ``seq`` is a valid sequent."""
    for f in seq.context:
        check_well_formed(f)
    for a in range(len(seq.context)):
        for b in range(a + 1, len(seq.context)):
            if not free_indices(seq.context[a]).perp(free_indices(seq.context[b])):
                raise MalformedJudgement("context formulas share free indices")
    fi_ctx = context_fi(seq.context)
    if not seq.term.indices().perp(fi_ctx):
        raise MalformedJudgement("term indices clash with context free indices")
    fi_t = seq.term.free_indices()
    uppers = fi_t.upper | fi_ctx.upper
    lowers = fi_t.lower | fi_ctx.lower
    if uppers != lowers:
        odd = sorted(uppers ^ lowers)
        raise MalformedJudgement(f"unmatched free indices: {odd}")


def is_valid(seq: Sequent) -> bool:
    try:
        validate(seq)
        return True
    except MalformedJudgement:
        return False


def degeneracy(context: tuple[Formula, ...]) -> frozenset[str]:
    """D(Gamma): indices free both upper and lower in the context."""
    fi = context_fi(context)
    return fi.upper & fi.lower


def cross_degeneracy(gamma: tuple[Formula, ...], theta: tuple[Formula, ...]) -> frozenset[str]:
    """D(Gamma;Theta): free upper in Gamma and free lower in Theta."""
    return context_fi(gamma).upper & context_fi(theta).lower


def is_typing(seq: Sequent) -> bool:
    """Typing sequent: valid, context of types, no degeneracy."""
    if not is_valid(seq):
        return False
    if degeneracy(seq.context):
        return False
    return all(is_type(f) for f in seq.context)


def is_lexical(seq: Sequent) -> bool:
    """Eta-reduced: no delta (empty-word) factors in the term."""
    return is_valid(seq) and not any(
        isinstance(f, WordFactor) and not f.word for f in seq.term.factors
    )


def locate_upper(context: tuple[Formula, ...], index: str) -> int:
    for k, f in enumerate(context):
        if index in free_indices(f).upper:
            return k
    raise MalformedJudgement(f"no free upper occurrence of {index!r} in context")


def locate_lower(context: tuple[Formula, ...], index: str) -> int:
    for k, f in enumerate(context):
        if index in free_indices(f).lower:
            return k
    raise MalformedJudgement(f"no free lower occurrence of {index!r} in context")


def rename_context_upper(context: tuple[Formula, ...], old: str, new: str) -> tuple[Formula, ...]:
    k = locate_upper(context, old)
    return context[:k] + (rename_free(context[k], {old: new}, {}),) + context[k + 1 :]


def rename_context_lower(context: tuple[Formula, ...], old: str, new: str) -> tuple[Formula, ...]:
    k = locate_lower(context, old)
    return context[:k] + (rename_free(context[k], {}, {old: new}),) + context[k + 1 :]


def eta_expand(seq: Sequent, index: str, fresh: str, row: str = "upper") -> Sequent:
    """One eta-expansion step on a free context index.

    ``row='upper'`` renames the free upper occurrence of ``index`` to
    ``fresh`` and multiplies the term with ``delta(index, fresh)``;
    ``row='lower'`` is the mirror step.  Expanding a degenerate index is
    the step that builds eta-long forms; expanding a non-degenerate index
    (whose partner sits in the term) is equally sound and the delta glues
    back under beta."""
    if fresh in sequent_support(seq):
        raise MalformedJudgement(f"{fresh!r} is not fresh")
    if row == "upper":
        ctx = rename_context_upper(seq.context, index, fresh)
        return Sequent(seq.term * delta(index, fresh), ctx)
    if row == "lower":
        ctx = rename_context_lower(seq.context, index, fresh)
        return Sequent(seq.term * delta(fresh, index), ctx)
    raise ValueError("row must be 'upper' or 'lower'")


def eta_long(seq: Sequent, gen: FreshGen | None = None) -> Sequent:
    """Eta-long form: expand every degenerate index (upper occurrences are
    renamed, lower occurrences are kept)."""
    gen = gen or FreshGen(sequent_support(seq))
    out = seq
    for i in sorted(degeneracy(out.context)):
        out = eta_expand(out, i, gen.fresh(), "upper")
    return out


def eta_reduce(seq: Sequent) -> Sequent:
    """Strip delta factors that are inverse to eta expansion steps.

    A delta with its upper index free lower in the context and its lower
    index free upper in the context undoes one expansion; the result is
    unique up to alpha.
    """
    out = seq
    changed = True
    while changed:
        changed = False
        fi_ctx = context_fi(out.context)
        for f in out.term.factors:
            if not isinstance(f, WordFactor) or f.word:
                continue
            if f.upper in fi_ctx.lower and f.lower in fi_ctx.upper:
                ctx = rename_context_upper(out.context, f.lower, f.upper)
                out = Sequent(out.term.without(f), ctx)
                changed = True
                break
    return out


def _canonical(seq: Sequent, up_to_beta: bool) -> Sequent:
    """Canonical alpha-renaming: formula binders and free index pairs."""
    counter = [0]
    ctx = []
    for f in seq.context:
        g = alpha_canonical(f, counter[0])
        counter[0] += 2 * sum(1 for _ in _binders(f))
        ctx.append(g)
    mapping: dict[str, str] = {}
    n = [0]

    def canon(i: str) -> str:
        if i not in mapping:
            mapping[i] = f"{RESERVED_PREFIX}{RESERVED_PREFIX}f{n[0]}"
            n[0] += 1
        return mapping[i]

    renamed_ctx = []
    for f in ctx:
        u, l = free_occurrences(f)
        ren = {i: canon(i) for i in u + l}
        renamed_ctx.append(rename_free(f, ren, ren))
    term = seq.term.beta_normalize() if up_to_beta else seq.term
    fi_t = term.free_indices()
    term = term.rename({i: mapping[i] for i in fi_t.support() if i in mapping})
    return Sequent(term, tuple(renamed_ctx))


def _binders(f: Formula):
    from .formulas import Nabla, Triangle, subformulas

    return (g for g in subformulas(f) if isinstance(g, (Nabla, Triangle)))


def equivalent(s1: Sequent, s2: Sequent, *, alpha: bool = True, beta: bool = False,
               eta: bool = False, multiset: bool = False) -> bool:
    """Decide equivalence of sequents up to the selected relations.

    Eta comparison brings both sides to eta-long form first (which is only
    meaningful together with alpha and beta).
    """
    if eta:
        beta = True
        alpha = True
        s1 = eta_long(s1)
        s2 = eta_long(s2)
    if not alpha:
        if beta:
            s1 = Sequent(s1.term.beta_normalize(), s1.context)
            s2 = Sequent(s2.term.beta_normalize(), s2.context)
        if multiset:
            return s1.term == s2.term and sorted(map(repr, s1.context)) == sorted(map(repr, s2.context))
        return s1 == s2

    def same(a: Sequent, b: Sequent) -> bool:
        ca, cb = _canonical(a, beta), _canonical(b, beta)
        return ca.context == cb.context and ca.term.alpha_equiv(cb.term)

    if not multiset:
        return same(s1, s2)
    if len(s1.context) != len(s2.context):
        return False
    for perm in permutations(range(len(s2.context))):
        if same(s1, Sequent(s2.term, tuple(s2.context[k] for k in perm))):
            return True
    return False


def sequent_size(seq: Sequent) -> int:
    return sum(size(f) for f in seq.context) + len(seq.term)


def rename_sequent(seq: Sequent, mapping: dict[str, str]) -> Sequent:
    """Apply an index renaming to every occurrence in term and context."""
    return Sequent(seq.term.rename(mapping),
                   tuple(rename_all(f, mapping) for f in seq.context))
