"""Tensor grammars and their first-order counterparts.

A tensor grammar is a finite lexicon of lexical typings ``tau : A``
together with a start atom of valency (1,1).  A word ``w`` belongs to the
language when the typing ``[w]^i_j : s^j_i`` is derivable from the lexicon,
i.e. when some natural-deduction derivation concludes it using each chosen
lexical entry as an axiom.

Membership search works through the sequent calculus: a choice of lexical
entries whose word factors tile ``w`` reduces the problem to a pure
delta-term typing, which is decided by exhaustive backward proof search in
the eta-long fragment.  Successful searches are converted back to natural
deduction and the lexical axioms are substituted in, so the result is a
checkable derivation, not just a yes/no answer.

First-order grammars (lexicons of quantified formulas over a distinguished
pair of free variables ``l``, ``r``) come with their own backward prover
and a faithful translation into tensor grammars.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations_with_replacement, permutations
from typing import Iterator, Optional

from .errors import RuleViolation
from .formulas import Atom, Formula, Nabla, Par, Tensor, Triangle, dual, \
    free_indices, rename_free
from .fresh import FreshGen
from .fol import FOAtom, FOContext, FOExists, FOForall, FOFormula, FOPar, \
    FOTensor, MLL1Derivation, PredicateSignature, captures, derive_fo, \
    eta_reduced_formula, fo_dual, fo_free_vars, free_occurrences as fo_free_occurrences, \
    is_marked, mill1_sequent, subst_free, LEFT, RIGHT
from .judgements import Sequent, _canonical, context_fi, is_lexical, is_typing, \
    is_valid, rename_sequent, sequent_support, validate
from .nd import NDDerivation, VarGen, basic, derive_nd, nd_from_sc, over, \
    substitute, under, validate_nd
from .sequent import Derivation, ETA, derive, embed_eta_long
from .terms import Term, WordFactor, _factor_occurrences, delta, word


# -- grammars --------------------------------------------------------------------


@dataclass(frozen=True)
class LexicalEntry:
    """A lexical typing: a beta-normal term of word factors with its type."""

    term: Term
    type: Formula

    def __post_init__(self):
        seq = self.typing()
        validate(seq)
        if not is_typing(seq):
            raise RuleViolation("a lexical entry must be a typing")
        if not is_lexical(seq):
            raise RuleViolation("a lexical entry term must consist of word factors")
        if self.term != self.term.beta_normalize():
            raise RuleViolation("a lexical entry term must be beta-normal")
        for f in self.term.factors:
            if not (isinstance(f, WordFactor) and f.word):
                raise RuleViolation("lexical entries carry non-empty word factors")

    def typing(self) -> Sequent:
        return Sequent(self.term, (self.type,))

    def symbols(self) -> tuple[str, ...]:
        """All terminal symbols of the entry, factor by factor."""
        return tuple(s for f in self.term.factors for s in f.word)


@dataclass(frozen=True)
class TensorGrammar:
    """A finite lexicon together with a start atom of valency (1,1)."""

    lexicon: tuple[LexicalEntry, ...]
    start: str

    def __post_init__(self):
        if not self.start:
            raise RuleViolation("a grammar needs a start symbol")


@dataclass(frozen=True)
class MILL1Entry:
    """A word typed by a first-order formula with designated endpoints.

    The formula has exactly one free occurrence of ``l`` (in left position)
    and one of ``r`` (in right position), and no other free variables.
    """

    word: tuple[str, ...]
    type: FOFormula

    def __post_init__(self):
        if not self.word:
            raise RuleViolation("a first-order entry needs a non-empty word")
        if fo_free_vars(self.type) - {"l", "r"} != frozenset():
            raise RuleViolation("entry formulas may only use 'l' and 'r' freely")
        occs = [(x, pol) for _, x, pol in fo_free_occurrences((self.type,))]
        if sorted(occs) != [("l", LEFT), ("r", RIGHT)]:
            raise RuleViolation(
                "an entry needs exactly one left 'l' and one right 'r' occurrence")


@dataclass(frozen=True)
class MILL1Grammar:
    """A finite first-order lexicon with a start predicate of valency (1,1)."""

    lexicon: tuple[MILL1Entry, ...]
    start: PredicateSignature

    def __post_init__(self):
        if (self.start.left, self.start.right) != (1, 1) or not self.start.positive:
            raise RuleViolation("the start predicate must be positive of valency (1,1)")


@dataclass(frozen=True)
class SearchBudget:
    """Caps on membership search; exceeding any of them is reported, not an error."""

    max_entries: int = 6
    max_depth: int = 40
    max_sequents: int = 100_000


@dataclass(frozen=True)
class SearchResult:
    """Outcome of a membership search.

    ``derivation`` is ``None`` both when the word is underivable and when a
    budget cap was hit; the two are told apart by ``exhausted``.
    """

    derivation: Optional[NDDerivation]
    entries: tuple[LexicalEntry, ...]
    exhausted: bool
    sequents: int

    @property
    def found(self) -> bool:
        return self.derivation is not None

    def __bool__(self) -> bool:
        return self.found


@dataclass(frozen=True)
class MILL1SearchResult:
    derivation: Optional[MLL1Derivation]
    exhausted: bool
    sequents: int

    @property
    def found(self) -> bool:
        return self.derivation is not None

    def __bool__(self) -> bool:
        return self.found


def _all_names(seq: Sequent) -> frozenset[str]:
    """Every index name of the sequent, bound formula indices included."""
    from .formulas import subformulas

    names = set(sequent_support(seq))
    for f in seq.context:
        for g in subformulas(f):
            if isinstance(g, (Nabla, Triangle)):
                names |= {g.up, g.down}
    return frozenset(names)


def _freshened(e: LexicalEntry, gen: FreshGen) -> LexicalEntry:
    """An alpha-variant of the entry with globally fresh free indices."""
    seq = e.typing()
    mapping = {i: gen.fresh() for i in sorted(sequent_support(seq))}
    out = rename_sequent(seq, mapping)
    return LexicalEntry(out.term, out.context[0])


# -- tiling: choosing entries whose word factors spell the input -------------------


def _tilings(symbols: tuple[str, ...], lexicon: tuple[LexicalEntry, ...],
             gen: FreshGen, max_entries: int
             ) -> Iterator[tuple[tuple[LexicalEntry, ...], tuple[WordFactor, ...]]]:
    """All ways to spell ``symbols`` with the word factors of a multiset of
    (freshly renamed) lexical entries, every factor used exactly once.

    Yields the chosen entries in order of first use together with the factor
    sequence, left to right.
    """

    def go(pos: int, chosen: list[LexicalEntry], unused: list[list[WordFactor]],
           order: list[WordFactor]):
        if pos == len(symbols):
            if all(not left for left in unused):
                yield tuple(chosen), tuple(order)
            return
        # continue with a factor of an already chosen entry
        for k, left in enumerate(unused):
            seen = set()
            for f in left:
                if f in seen:
                    continue
                seen.add(f)
                if symbols[pos:pos + len(f.word)] == f.word:
                    rest = list(left)
                    rest.remove(f)
                    unused[k] = rest
                    order.append(f)
                    yield from go(pos + len(f.word), chosen, unused, order)
                    order.pop()
                    unused[k] = left
        # or bring in a new entry
        if len(chosen) < max_entries:
            for e in lexicon:
                fresh = _freshened(e, gen)
                factors = list(fresh.term.factors)
                for f in dict.fromkeys(factors):
                    if symbols[pos:pos + len(f.word)] == f.word:
                        rest = list(factors)
                        rest.remove(f)
                        chosen.append(fresh)
                        unused.append(rest)
                        order.append(f)
                        yield from go(pos + len(f.word), chosen, unused, order)
                        order.pop()
                        unused.pop()
                        chosen.pop()

    yield from go(0, [], [], [])


def _glue_term(order: tuple[WordFactor, ...], upper: str, lower: str) -> Term:
    """The delta product turning the factor chain into ``[w]^upper_lower``."""
    t = delta(order[0].lower, lower) * delta(upper, order[-1].upper)
    for f, g in zip(order, order[1:]):
        t = t * delta(g.lower, f.upper)
    return t


# -- backward proof search in the eta-long fragment --------------------------------


class _EtaSearch:
    """Exhaustive cut-free backward search over delta-term typings."""

    def __init__(self, budget: SearchBudget, gen: FreshGen):
        self.budget = budget
        self.gen = gen
        self.sequents = 0
        self.truncated = False
        self._failed: set[Sequent] = set()
        self._active: set[Sequent] = set()

    def prove(self, goal: Sequent, depth: int | None = None) -> Optional[Derivation]:
        if depth is None:
            depth = self.budget.max_depth
        key = _canonical(goal, False)
        if key in self._failed or key in self._active:
            return None
        if depth <= 0 or self.sequents >= self.budget.max_sequents:
            self.truncated = True
            return None
        self.sequents += 1
        self._active.add(key)
        clean = self.sequents  # detect truncation inside this subtree
        was_truncated = self.truncated
        self.truncated = False
        try:
            out = self._expand(goal, depth)
        finally:
            self._active.discard(key)
        if out is None and not self.truncated:
            self._failed.add(key)
        self.truncated = self.truncated or was_truncated
        del clean
        return out

    def _attempt(self, rule: str, params: tuple, premise: Sequent, goal: Sequent,
                 depth: int) -> Optional[Derivation]:
        if not is_valid(premise):
            return None
        sub = self.prove(premise, depth - 1)
        if sub is None:
            return None
        try:
            d = derive(ETA, rule, params, sub)
        except RuleViolation:
            return None
        return d if d.conclusion == goal else None

    def _expand(self, goal: Sequent, depth: int) -> Optional[Derivation]:
        ctx = goal.context
        # leaves: a renamed dual pair of atoms with the matching delta links
        if (len(ctx) == 2 and isinstance(ctx[0], Atom) and isinstance(ctx[1], Atom)
                and not goal.term.var_factors()):
            try:
                d = derive(ETA, "id_eta", (ctx[0], ctx[1].upper, ctx[1].lower))
                if d.conclusion == goal:
                    return d
            except RuleViolation:
                pass
        for pos, f in enumerate(ctx):
            if isinstance(f, Par):
                premise = Sequent(goal.term,
                                  ctx[:pos] + (f.left, f.right) + ctx[pos + 1:])
                out = self._attempt("par", (pos,), premise, goal, depth)
                if out is not None:
                    return out
        for pos, f in enumerate(ctx):
            if isinstance(f, Nabla):
                i, j = self.gen.fresh(), self.gen.fresh()
                body = rename_free(f.body, {f.down: j}, {f.up: i})
                premise = Sequent(goal.term * delta(i, j),
                                  ctx[:pos] + (body,) + ctx[pos + 1:])
                out = self._attempt("nabla_alpha", (pos, f.up, f.down, i, j),
                                    premise, goal, depth)
                if out is not None:
                    return out
        for pos, f in enumerate(ctx):
            if isinstance(f, Triangle):
                for fac in goal.term.factors:
                    if not (isinstance(fac, WordFactor) and fac.word == ()):
                        continue
                    j, i = fac.upper, fac.lower
                    body = rename_free(f.body, {f.up: j}, {f.down: i})
                    premise = Sequent(goal.term.without(fac),
                                      ctx[:pos] + (body,) + ctx[pos + 1:])
                    out = self._attempt("triangle_alpha", (pos, f.down, f.up, i, j),
                                        premise, goal, depth)
                    if out is not None:
                        return out
        for pos, f in enumerate(ctx):
            if isinstance(f, Tensor):
                out = self._tensor(goal, pos, f, depth)
                if out is not None:
                    return out
        for pos in range(len(ctx) - 1):
            swapped = list(ctx)
            swapped[pos], swapped[pos + 1] = swapped[pos + 1], swapped[pos]
            premise = Sequent(goal.term, tuple(swapped))
            out = self._attempt("ex", (pos,), premise, goal, depth)
            if out is not None:
                return out
        return None

    def _tensor(self, goal: Sequent, pos: int, f: Tensor,
                depth: int) -> Optional[Derivation]:
        lctx = goal.context[:pos] + (f.left,)
        rctx = (f.right,) + goal.context[pos + 1:]
        lsup, rsup = context_fi(lctx).support(), context_fi(rctx).support()
        lterm, rterm = Term(), Term()
        for fac in goal.term.factors:
            up, lo = _factor_occurrences(fac)
            sup = set(up) | set(lo)
            if sup <= lsup and not (sup & rsup):
                lterm = lterm * Term((fac,))
            elif sup <= rsup and not (sup & lsup):
                rterm = rterm * Term((fac,))
            else:
                return None  # a factor straddles the split
        left, right = Sequent(lterm, lctx), Sequent(rterm, rctx)
        if not (is_valid(left) and is_valid(right)):
            return None
        dl = self.prove(left, depth - 1)
        if dl is None:
            return None
        dr = self.prove(right, depth - 1)
        if dr is None:
            return None
        try:
            d = derive(ETA, "tensor", (pos, 0), dl, dr)
        except RuleViolation:
            return None
        return d if d.conclusion == goal else None


# -- membership --------------------------------------------------------------------


def _target_endpoints(target: Formula) -> tuple[str, str]:
    fi = free_indices(target)
    if len(fi.upper) != 1 or len(fi.lower) != 1:
        raise RuleViolation("the target type needs one free upper and one "
                            "free lower index")
    (j,), (i,) = tuple(fi.upper), tuple(fi.lower)
    return i, j


def membership(g: TensorGrammar, symbols: tuple[str, ...],
               target: Formula | None = None,
               budget: SearchBudget | None = None) -> SearchResult:
    """Search for a lexicon-backed derivation of ``[w]^i_j : target``.

    With no explicit target the goal type is the start atom.  The result
    carries the natural-deduction derivation (with one axiom per lexical
    entry used) or records that the search space or the budget ran out.
    """
    budget = budget or SearchBudget()
    symbols = tuple(symbols)
    if not symbols:
        raise RuleViolation("membership needs a non-empty word")
    gen = FreshGen()
    for e in g.lexicon:
        gen.avoid(_all_names(e.typing()))
    if target is None:
        i, j = gen.fresh("i"), gen.fresh("j")
        target = Atom(g.start, True, (j,), (i,))
    else:
        gen.avoid(sequent_support(Sequent(Term(), (target,))))
        i, j = _target_endpoints(target)
    goal_term = word(symbols, lower=j, upper=i)

    search = _EtaSearch(budget, gen)
    for chosen, order in _tilings(symbols, g.lexicon, gen, budget.max_entries):
        t_prime = _glue_term(order, i, j)
        glued = (t_prime * Term(f for e in chosen for f in e.term.factors))
        if glued.beta_normalize() != goal_term:
            continue
        ctx = (target,) + tuple(dual(e.type) for e in reversed(chosen))
        goal = Sequent(t_prime, ctx)
        if not is_valid(goal):
            continue
        d = search.prove(goal)
        if d is not None:
            nd = _to_nd(d, chosen, goal_term)
            return SearchResult(nd, chosen, False, search.sequents)
    return SearchResult(None, (), search.truncated, search.sequents)


def _to_nd(d: Derivation, chosen: tuple[LexicalEntry, ...],
           goal_term: Term) -> NDDerivation:
    """Turn the found sequent derivation into a natural deduction of the
    typing itself, substituting each lexical entry for its declaration."""
    nd = nd_from_sc(embed_eta_long(d), principal=0, gen=VarGen())
    for e in chosen:
        names = [dec.var.name for dec in nd.conclusion.decls
                 if dec.formula == e.type]
        axiom = derive_nd("axiom", (e.term, e.type))
        nd = substitute(axiom, nd, names[0])
    if nd.conclusion.term != goal_term:
        nd = derive_nd("beta", (goal_term,), nd)
    return nd


def replay(g: TensorGrammar, d: NDDerivation) -> Sequent:
    """Re-check a derivation and confirm every axiom is a lexicon entry
    (up to renaming); returns the established typing."""
    validate_nd(d.conclusion)
    for node in d.nodes():
        again = derive_nd(node.rule, node.params, *node.premises)
        if again.conclusion != node.conclusion:
            raise RuleViolation("derivation node does not re-derive")
        if node.rule == "axiom":
            t, a = node.params
            got = Sequent(t, (a,))
            if not any(_alpha_variant(got, e.typing()) for e in g.lexicon):
                raise RuleViolation(f"axiom {t} : {a} is not in the lexicon")
    if d.conclusion.decls:
        raise RuleViolation("a grammar derivation may not keep open declarations")
    return Sequent(d.conclusion.term, (d.conclusion.formula,))


def _alpha_variant(s1: Sequent, s2: Sequent) -> bool:
    return _canonical(s1, False) == _canonical(s2, False)


def language_sample(g: TensorGrammar,
                    budget: SearchBudget | None = None) -> list[tuple[str, ...]]:
    """All words spellable from at most ``budget.max_entries`` entries that
    the grammar derives, in length-lexicographic order."""
    budget = budget or SearchBudget(max_entries=3)
    candidates: set[tuple[str, ...]] = set()
    for k in range(1, budget.max_entries + 1):
        for combo in combinations_with_replacement(g.lexicon, k):
            parts = [f.word for e in combo for f in e.term.factors]
            for perm in set(permutations(parts)):
                candidates.add(tuple(s for p in perm for s in p))
    out = []
    for w in sorted(candidates, key=lambda w: (len(w), w)):
        if membership(g, w, budget=budget).found:
            out.append(w)
    return out


# -- first-order membership ---------------------------------------------------------


def _fo_canonical(ctx: FOContext) -> tuple:
    """A name-independent key: bound variables numbered by binder, free
    variables by first occurrence."""
    free: dict[str, str] = {}
    counter = [0]

    def go(f: FOFormula, env: dict[str, str]):
        if isinstance(f, FOAtom):
            vs = tuple(env.get(x) or free.setdefault(x, f"f{len(free)}")
                       for x in f.vars)
            return (f.pred.symbol, f.pred.positive, vs)
        if isinstance(f, (FOTensor, FOPar)):
            tag = "*" if isinstance(f, FOTensor) else "#"
            return (tag, go(f.left, env), go(f.right, env))
        tag = "A" if isinstance(f, FOForall) else "E"
        counter[0] += 1
        return (tag, go(f.body, {**env, f.var: f"b{counter[0]}"}))

    return tuple(go(f, {}) for f in ctx)


class _FOSearch:
    """Exhaustive cut-free backward search for first-order sequents.

    When the goal is marked, premises that are not marked are pruned: a
    cut-free derivation of a marked sequent is marked throughout, so no
    derivation is lost.
    """

    def __init__(self, budget: SearchBudget, gen: FreshGen, marked: bool):
        self.budget = budget
        self.gen = gen
        self.marked = marked
        self.sequents = 0
        self.truncated = False
        self._failed: set[tuple] = set()
        self._active: set[tuple] = set()

    def prove(self, goal: FOContext, depth: int | None = None) -> Optional[MLL1Derivation]:
        if depth is None:
            depth = self.budget.max_depth
        if self.marked and not is_marked(goal):
            return None
        key = _fo_canonical(goal)
        if key in self._failed or key in self._active:
            return None
        if depth <= 0 or self.sequents >= self.budget.max_sequents:
            self.truncated = True
            return None
        self.sequents += 1
        self._active.add(key)
        was = self.truncated
        self.truncated = False
        try:
            out = self._expand(goal, depth)
        finally:
            self._active.discard(key)
        if out is None and not self.truncated:
            self._failed.add(key)
        self.truncated = self.truncated or was
        return out

    def _attempt(self, rule: str, params: tuple, premises: tuple[FOContext, ...],
                 goal: FOContext, depth: int) -> Optional[MLL1Derivation]:
        subs = []
        for p in premises:
            sub = self.prove(p, depth - 1)
            if sub is None:
                return None
            subs.append(sub)
        try:
            d = derive_fo(rule, params, *subs)
        except RuleViolation:
            return None
        return d if d.conclusion == goal else None

    def _expand(self, goal: FOContext, depth: int) -> Optional[MLL1Derivation]:
        if (len(goal) == 2 and isinstance(goal[1], FOAtom)
                and goal[0] == fo_dual(goal[1])):
            return derive_fo("id", (goal[1],))
        for pos, f in enumerate(goal):
            if isinstance(f, FOPar):
                premise = goal[:pos] + (f.left, f.right) + goal[pos + 1:]
                out = self._attempt("par", (pos,), (premise,), goal, depth)
                if out is not None:
                    return out
        for pos, f in enumerate(goal):
            if isinstance(f, FOForall):
                v = self.gen.fresh(f.var)
                premise = goal[:pos] + (subst_free(f.body, f.var, v),) + goal[pos + 1:]
                out = self._attempt("forall", (pos, f.var, f.body, v),
                                    (premise,), goal, depth)
                if out is not None:
                    return out
        for pos, f in enumerate(goal):
            if isinstance(f, FOExists):
                witnesses = sorted(fo_free_vars(goal)) + [self.gen.fresh(f.var)]
                for v in witnesses:
                    if captures(f.body, f.var, v):
                        continue
                    premise = (goal[:pos] + (subst_free(f.body, f.var, v),)
                               + goal[pos + 1:])
                    out = self._attempt("exists", (pos, f.var, f.body, v),
                                        (premise,), goal, depth)
                    if out is not None:
                        return out
        for pos, f in enumerate(goal):
            if isinstance(f, FOTensor):
                left = goal[:pos] + (f.left,)
                right = (f.right,) + goal[pos + 1:]
                out = self._attempt("tensor", (pos, 0), (left, right), goal, depth)
                if out is not None:
                    return out
        for pos in range(len(goal) - 1):
            swapped = list(goal)
            swapped[pos], swapped[pos + 1] = swapped[pos + 1], swapped[pos]
            out = self._attempt("ex", (pos,), (tuple(swapped),), goal, depth)
            if out is not None:
                return out
        return None


def _segmentations(symbols: tuple[str, ...], lexicon: tuple[MILL1Entry, ...],
                   max_entries: int) -> Iterator[tuple[MILL1Entry, ...]]:
    def go(pos: int, acc: list[MILL1Entry]):
        if pos == len(symbols):
            if acc:
                yield tuple(acc)
            return
        if len(acc) >= max_entries:
            return
        for e in lexicon:
            if symbols[pos:pos + len(e.word)] == e.word:
                acc.append(e)
                yield from go(pos + len(e.word), acc)
                acc.pop()

    yield from go(0, [])


def mill1_membership(g: MILL1Grammar, symbols: tuple[str, ...],
                     budget: SearchBudget | None = None) -> MILL1SearchResult:
    """Decide whether the first-order grammar derives the word: some
    segmentation into entries must yield a derivable instance sequent."""
    budget = budget or SearchBudget()
    symbols = tuple(symbols)
    if not symbols:
        raise RuleViolation("membership needs a non-empty word")
    avoid = set()
    for e in g.lexicon:
        avoid |= fo_free_vars(e.type)
    gen = FreshGen(avoid)
    total = 0
    truncated = False
    for seg in _segmentations(symbols, g.lexicon, budget.max_entries):
        cs = [gen.fresh("c") for _ in range(len(seg) + 1)]
        ants = tuple(subst_free(subst_free(e.type, "l", cs[k]), "r", cs[k + 1])
                     for k, e in enumerate(seg))
        goal = mill1_sequent(ants, FOAtom(g.start, (cs[0], cs[-1])))
        search = _FOSearch(budget, gen, is_marked(goal))
        d = search.prove(goal)
        total += search.sequents
        truncated = truncated or search.truncated
        if d is not None:
            return MILL1SearchResult(d, False, total)
    return MILL1SearchResult(None, truncated, total)


def mill1_language_sample(g: MILL1Grammar,
                          budget: SearchBudget | None = None) -> list[tuple[str, ...]]:
    """All words spellable from at most ``budget.max_entries`` entries that
    the first-order grammar derives, in length-lexicographic order."""
    budget = budget or SearchBudget(max_entries=3)
    candidates: set[tuple[str, ...]] = set()
    for k in range(1, budget.max_entries + 1):
        for combo in combinations_with_replacement(g.lexicon, k):
            for perm in set(permutations([e.word for e in combo])):
                candidates.add(tuple(s for p in perm for s in p))
    return [w for w in sorted(candidates, key=lambda w: (len(w), w))
            if mill1_membership(g, w, budget=budget).found]


# -- translating first-order grammars to tensor grammars -----------------------------


def translate_entry(e: MILL1Entry) -> LexicalEntry:
    """``(w, A)`` becomes ``[w]^r_l : ||A||`` with ``l`` the free upper and
    ``r`` the free lower index of the translated type."""
    gen = FreshGen(avoid={"l", "r"})
    f = eta_reduced_formula(e.type, gen)
    return LexicalEntry(word(e.word, lower="l", upper="r"), f)


def translate_grammar(g: MILL1Grammar) -> TensorGrammar:
    """The tensor grammar with the pointwise-translated lexicon; it derives
    exactly the words of the first-order grammar."""
    return TensorGrammar(tuple(translate_entry(e) for e in g.lexicon),
                         g.start.symbol)


# -- a small lexicalized grammar of English ------------------------------------------


def _entry(symbols: tuple[str, ...], factory, gen: FreshGen) -> LexicalEntry:
    i, j = gen.fresh("i"), gen.fresh("j")
    return LexicalEntry(word(symbols, lower=j, upper=i), factory(j, i, gen))


def _relative_argument(upper: str, lower: str, gen: FreshGen) -> Formula:
    """The body type selected by a relative pronoun: a sentence missing a
    noun phrase somewhere inside, with the gap's endpoints glued."""
    mu, nu = gen.fresh("u"), gen.fresh("t")
    return Triangle(mu, nu, Par(Atom("s", True, (upper,), (lower,)),
                                Atom("np", False, (nu,), (mu,))))


def sample_english_grammar() -> TensorGrammar:
    """A lexicalized toy grammar: proper names, a transitive verb, a verb
    modifier and a relative pronoun, with start symbol ``s``."""
    np, s = basic("np"), basic("s")
    vp = under(np, s)
    gen = FreshGen()
    lexicon = (
        _entry(("mary",), np, gen),
        _entry(("john",), np, gen),
        _entry(("loves",), over(vp, np), gen),
        _entry(("madly",), under(vp, vp), gen),
        _entry(("who",), over(under(np, np), _relative_argument), gen),
    )
    return TensorGrammar(lexicon, "s")
