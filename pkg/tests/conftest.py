"""Shared strategies and helpers for the test suite."""

from __future__ import annotations

import itertools
import random

from hypothesis import strategies as st

from ettc.formulas import Atom, Nabla, Par, Tensor, Triangle
from ettc.terms import Term, WordFactor, delta, word

NAMES = [f"i{k}" for k in range(12)]
LETTERS = ["a", "b", "c", "d"]


@st.composite
def terms(draw, max_factors: int = 6):
    """Random well-formed terms (each name at most once per row)."""
    n = draw(st.integers(0, max_factors))
    uppers = list(NAMES)
    lowers = list(NAMES)
    rng = random.Random(draw(st.integers(0, 2**32 - 1)))
    rng.shuffle(uppers)
    rng.shuffle(lowers)
    factors = []
    for _ in range(n):
        if not uppers or not lowers:
            break
        u = uppers.pop()
        lo = lowers.pop()
        w = tuple(rng.choice(LETTERS) for _ in range(rng.randint(0, 3)))
        factors.append(WordFactor(w, lower=lo, upper=u))
    return Term(factors)


def random_term(rng: random.Random, max_factors: int = 8) -> Term:
    """Plain-random counterpart of the hypothesis strategy."""
    uppers = list(NAMES)
    lowers = list(NAMES)
    rng.shuffle(uppers)
    rng.shuffle(lowers)
    factors = []
    for _ in range(rng.randint(0, max_factors)):
        if not uppers or not lowers:
            break
        w = tuple(rng.choice(LETTERS) for _ in range(rng.randint(0, 3)))
        factors.append(WordFactor(w, lower=lowers.pop(), upper=uppers.pop()))
    return Term(factors)


@st.composite
def closed_formulas(draw, depth: int = 3):
    """Random closed, well-formed formulas."""
    if depth == 0 or draw(st.booleans()):
        name = draw(st.sampled_from(["p", "q", "r"]))
        positive = draw(st.booleans())
        return Atom(name, positive, (), ())
    kind = draw(st.sampled_from(["tensor", "par", "nabla", "triangle"]))
    if kind in ("tensor", "par"):
        left = draw(closed_formulas(depth=depth - 1))
        right = draw(closed_formulas(depth=depth - 1))
        return Tensor(left, right) if kind == "tensor" else Par(left, right)
    # binder over an atom touching the bound pair
    up = draw(st.sampled_from(["x", "y"]))
    down = "z"
    body = Atom("p", draw(st.booleans()), (down,), (up,))
    return Nabla(up, down, body) if kind == "nabla" else Triangle(up, down, body)


# -- random derivations with cuts ------------------------------------------------

from ettc.fresh import FreshGen  # noqa: E402
from ettc.judgements import context_fi  # noqa: E402
from ettc.sequent import ETTC, derive, identity_expansion  # noqa: E402
from ettc.terms import delta_factor  # noqa: E402


def random_formula(rng: random.Random, gen: FreshGen, depth: int = 2):
    """Random well-formed formula with generator-fresh index names."""
    if depth == 0 or rng.random() < 0.45:
        return Atom(rng.choice("pqr"), rng.random() < 0.5, (gen.fresh(),), (gen.fresh(),))
    kind = rng.randrange(4)
    if kind < 2:
        left = random_formula(rng, gen, depth - 1)
        right = random_formula(rng, gen, depth - 1)
        return Tensor(left, right) if kind == 0 else Par(left, right)
    up, down = gen.fresh(), gen.fresh()
    body = Atom(rng.choice("pqr"), rng.random() < 0.5, (down,), (up,))
    return Nabla(up, down, body) if kind == 2 else Triangle(up, down, body)


def _binder_candidates(d):
    """(pos, mu, nu) triples where nabla currently applies."""
    seq = d.conclusion
    factors = set(seq.term.factors) | set(seq.term.beta_normalize().factors)
    out = []
    for pos, f in enumerate(seq.context):
        from ettc.formulas import free_indices
        fa = free_indices(f)
        for mu in fa.lower:
            for nu in fa.upper:
                if delta_factor(mu, nu) in factors:
                    out.append((pos, mu, nu))
    return out


def random_cut_derivation(rng: random.Random, max_size: int = 30, max_cuts: int = 5):
    """Random derivation containing cut rules, within the given budgets."""
    gen = FreshGen(prefix="v")
    d = identity_expansion(random_formula(rng, gen, rng.randint(0, 2)), gen)
    cuts = 0
    for _ in range(rng.randint(4, 16)):
        if d.logical_size() >= max_size - 4:
            break
        n = len(d.conclusion.context)
        roll = rng.random()
        try:
            if roll < 0.18 and n >= 2:
                d = derive(ETTC, "ex", (rng.randrange(n - 1),), d)
            elif roll < 0.32 and n >= 3:
                d = derive(ETTC, "par", (rng.randrange(n - 1),), d)
            elif roll < 0.46:
                e = identity_expansion(random_formula(rng, gen, rng.randint(0, 1)), gen)
                d = derive(ETTC, "tensor",
                           (rng.randrange(n), rng.randrange(len(e.conclusion.context))),
                           d, e)
            elif roll < 0.60:
                fi = context_fi(d.conclusion.context)
                ups, los = sorted(fi.upper), sorted(fi.lower)
                if ups and (rng.random() < 0.5 or not los):
                    d = derive(ETTC, "alpha_eta_up", (rng.choice(ups), gen.fresh()), d)
                elif los:
                    d = derive(ETTC, "alpha_eta_down", (rng.choice(los), gen.fresh()), d)
            elif roll < 0.72:
                cands = _binder_candidates(d)
                if cands:
                    pos, mu, nu = rng.choice(cands)
                    if delta_factor(mu, nu) not in d.conclusion.term.factors:
                        d = derive(ETTC, "beta", (d.conclusion.term.beta_normalize(),), d)
                    d = derive(ETTC, "nabla", (pos, mu, nu), d)
            elif roll < 0.8:
                t = d.conclusion.term.beta_normalize()
                if t != d.conclusion.term:
                    d = derive(ETTC, "beta", (t,), d)
            elif cuts < max_cuts:
                pos = rng.randrange(n)
                bridge = identity_expansion(d.conclusion.context[pos], gen)
                d = derive(ETTC, "cut", (pos, 0), d, bridge)
                cuts += 1
        except Exception:
            continue
    return d


# -- random natural-deduction derivations ------------------------------------------


def random_nd_derivation(rng, steps: int = 10):
    """A random well-typed natural-deduction derivation.

    Grows a pool of derivations from identity axioms over fresh-indexed
    formulas and combines them with randomly chosen rules; returns the last
    element touched.
    """
    from ettc.formulas import Nabla, Par, Tensor, dual, free_indices
    from ettc.nd import derive_nd
    from ettc.terms import VarFactor

    gen = FreshGen(prefix="n")
    counter = itertools.count()

    def var_for(f):
        fi = free_indices(f)
        return VarFactor(f"V{next(counter)}",
                         tuple(sorted(fi.lower)), tuple(sorted(fi.upper)))

    def axiom(f):
        return derive_nd("id", (var_for(f), f))

    pool = [axiom(random_formula(rng, gen, rng.randint(0, 1))) for _ in range(2)]

    for _ in range(steps):
        d = rng.choice(pool)
        seq = d.conclusion
        roll = rng.random()
        try:
            if roll < 0.12:
                pool.append(axiom(random_formula(rng, gen, rng.randint(0, 2))))
            elif roll < 0.24:
                fa = free_indices(seq.formula)
                ups, los = sorted(fa.upper), sorted(fa.lower)
                if ups and (rng.random() < 0.5 or not los):
                    d = derive_nd("alpha_eta_up", (rng.choice(ups), gen.fresh()), d)
                elif los:
                    d = derive_nd("alpha_eta_down", (rng.choice(los), gen.fresh()), d)
            elif roll < 0.32:
                t = seq.term.beta_normalize()
                if t != seq.term:
                    d = derive_nd("beta", (t,), d)
            elif roll < 0.44 and seq.decls:
                name = rng.choice(seq.decls).var.name
                rule = rng.choice(("par_intro_left", "par_intro_right"))
                d = derive_nd(rule, (name,), d)
            elif roll < 0.56:
                other = axiom(random_formula(rng, gen, rng.randint(0, 1)))
                if rng.random() < 0.5:
                    helper = axiom(Par(dual(seq.formula), other.conclusion.formula))
                    d = derive_nd("par_elim_left", (), d, helper)
                else:
                    helper = axiom(Par(other.conclusion.formula, dual(seq.formula)))
                    d = derive_nd("par_elim_right", (), helper, d)
            elif roll < 0.68:
                other = axiom(random_formula(rng, gen, rng.randint(0, 1)))
                d = derive_nd("tensor_intro", (), d, other)
            elif roll < 0.78 and isinstance(seq.formula, Tensor):
                x = axiom(seq.formula.left)
                y = axiom(seq.formula.right)
                body = derive_nd("tensor_intro", (), x, y)
                d = derive_nd("tensor_elim",
                              (x.conclusion.decls[0].var.name,
                               y.conclusion.decls[0].var.name), d, body)
            elif roll < 0.9 and isinstance(seq.formula, Nabla):
                opened = derive_nd("nabla_elim", (), d)
                f = seq.formula
                d = derive_nd("nabla_intro", (f.up, f.down), opened)
            else:
                fa = free_indices(seq.formula)
                ups, los = sorted(fa.upper), sorted(fa.lower)
                if ups and los:
                    d = derive_nd("triangle_intro", (rng.choice(los), rng.choice(ups)), d)
        except Exception:
            continue
        pool.append(d)
    return pool[-1]


# -- random first order derivations ------------------------------------------------


def random_mll1_derivation(rng, steps: int = 10, shared_vars: int = 3):
    """A random cut-free derivation over valency-carrying predicates.

    Variables are drawn from a small shared pool, so tensor branches can
    share names and existential steps exercise both the erased-link and
    the glued-link cases.
    """
    from ettc.fol import (FOAtom, LEFT, PredicateSignature, derive_fo,
                          free_occurrences, subst_at)

    sigs = [PredicateSignature("p", 1, 1), PredicateSignature("q", 2, 1),
            PredicateSignature("r", 1, 2), PredicateSignature("u", 0, 1)]
    counter = itertools.count()

    def var():
        if rng.random() < 0.6:
            return f"e{rng.randrange(shared_vars)}"
        return f"w{next(counter)}"

    def axiom():
        sig = rng.choice(sigs)
        return derive_fo("id", (FOAtom(sig, tuple(var() for _ in range(sig.arity))),))

    def occs_in(ctx, pos=None):
        by_var: dict[str, list] = {}
        for ref, x, pol in free_occurrences(ctx):
            if pos is None or ref.pos == pos:
                by_var.setdefault(x, []).append((ref, pol))
        return by_var

    pool = [axiom(), axiom()]
    for _ in range(steps):
        d = rng.choice(pool)
        ctx = d.conclusion
        n = len(ctx)
        roll = rng.random()
        try:
            if roll < 0.15:
                pool.append(axiom())
            elif roll < 0.3 and n >= 2:
                d = derive_fo("ex", (rng.randrange(n - 1),), d)
            elif roll < 0.5 and n >= 2:
                d = derive_fo("par", (rng.randrange(n - 1),), d)
            elif roll < 0.65:
                e = rng.choice(pool)
                d = derive_fo("tensor",
                              (rng.randrange(n), rng.randrange(len(e.conclusion))), d, e)
            elif roll < 0.8:
                # bind a variable whose two occurrences all sit in one formula
                cands = [(v, os) for v, os in occs_in(ctx).items()
                         if len(os) == 2 and {p for _, p in os} == {"left", "right"}
                         and len({r.pos for r, _ in os}) == 1]
                if not cands:
                    continue
                v, os = rng.choice(cands)
                pos = os[0][0].pos
                x = f"x{next(counter)}"
                body = subst_at(ctx[pos], [(r.path, r.slot) for r, _ in os], x)
                d = derive_fo("forall", (pos, x, body, v), d)
            else:
                # bind one left and one right occurrence inside one formula
                pos = rng.randrange(n)
                cands = []
                for v, os in occs_in(ctx, pos).items():
                    lefts = [r for r, p in os if p == LEFT]
                    rights = [r for r, p in os if p != LEFT]
                    if lefts and rights:
                        cands.append((v, rng.choice(lefts), rng.choice(rights)))
                if not cands:
                    continue
                v, rl, rr = rng.choice(cands)
                x = f"x{next(counter)}"
                body = subst_at(ctx[pos], [(rl.path, rl.slot), (rr.path, rr.slot)], x)
                d = derive_fo("exists", (pos, x, body, v), d)
        except Exception:
            continue
        pool.append(d)
    return pool[-1]


def random_wf_mll1(rng, steps: int = 10, tries: int = 200):
    """A random cut-free derivation with a well-formed conclusion."""
    from ettc.fol import is_well_formed

    for _ in range(tries):
        d = random_mll1_derivation(rng, steps=steps)
        if is_well_formed(d.conclusion):
            return d
    raise RuntimeError("no well-formed derivation found")
