"""Natural deduction over tensor terms with variables.

Sequents here have the shape ``X1:A1, ..., Xn:An |- t : B`` where the ``Xi``
are tensor variables declared with their types and ``t`` is a term that uses
each declared variable exactly once (the *standard* shape; every derivable
sequent is standard).  The module provides the rule checker, substitution,
abstraction of lexical axioms (the deduction theorem), the Lambek-style slash
eliminations and the two-way translation with the one-sided sequent calculus.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import count
from typing import Callable, Optional

from .errors import MalformedJudgement, RuleViolation
from .formulas import (Atom, Formula, Nabla, Par, Tensor, Triangle, dual,
                       free_indices, rename_lower, rename_upper)
from .fresh import FreshGen
from .judgements import Sequent, validate
from .sequent import ETTC, Derivation, derive, dual_bridge
from .cuts import _reorder
from .terms import Term, VarFactor, delta, delta_factor


def _need(cond: bool, msg: str) -> None:
    if not cond:
        raise RuleViolation(msg)


# -- sequents -------------------------------------------------------------------


@dataclass(frozen=True)
class Decl:
    """A variable declaration ``X : A``."""

    var: VarFactor
    formula: Formula


class NDSequent:
    """``decls |- term : formula``.

    Declarations are stored in order (the order fixes the sequent-calculus
    translation) but compare as a set: two sequents with permuted
    declarations are equal.
    """

    __slots__ = ("decls", "term", "formula")

    def __init__(self, decls: tuple[Decl, ...], term: Term, formula: Formula):
        object.__setattr__(self, "decls", tuple(decls))
        object.__setattr__(self, "term", term)
        object.__setattr__(self, "formula", formula)

    def __eq__(self, other) -> bool:
        return (isinstance(other, NDSequent)
                and frozenset(self.decls) == frozenset(other.decls)
                and self.term == other.term
                and self.formula == other.formula)

    def __hash__(self) -> int:
        return hash((frozenset(self.decls), self.term, self.formula))

    def __repr__(self) -> str:
        from .surface import show_formula, show_term

        ds = ", ".join(f"{d.var.name}:{show_formula(d.formula)}" for d in self.decls)
        return f"NDSequent({ds} |- {show_term(self.term)} : {show_formula(self.formula)})"

    def find(self, name: str) -> Decl:
        for d in self.decls:
            if d.var.name == name:
                return d
        raise RuleViolation(f"no declaration for variable {name!r}")

    def without(self, *names: str) -> tuple[Decl, ...]:
        drop = set(names)
        return tuple(d for d in self.decls if d.var.name not in drop)


def validate_nd(seq: NDSequent) -> None:
    """Raise unless ``seq`` is a valid standard sequent."""
    names = [d.var.name for d in seq.decls]
    if len(set(names)) != len(names):
        raise MalformedJudgement("repeated variable symbol in the context")
    for d in seq.decls:
        fa = free_indices(d.formula)
        if set(d.var.upper) != set(fa.lower) or set(d.var.lower) != set(fa.upper):
            raise MalformedJudgement(
                f"variable {d.var.name!r} does not match the rows of its type")
        if len(set(d.var.upper)) != len(d.var.upper) or len(set(d.var.lower)) != len(d.var.lower):
            raise MalformedJudgement(f"repeated index on variable {d.var.name!r}")
    # standard shape: each declared variable occurs exactly once in the term
    used = list(seq.term.var_factors())
    if sorted(f.name for f in used) != sorted(names):
        raise MalformedJudgement("term variables do not match the declarations")
    for f in used:
        d = seq.find(f.name)
        if f != d.var:
            raise MalformedJudgement(f"variable {f.name!r} used with different indices")
    # the index relation is that of the one-formula sequent |- t :: B
    validate(Sequent(seq.term, (seq.formula,)))


def is_valid_nd(seq: NDSequent) -> bool:
    try:
        validate_nd(seq)
    except MalformedJudgement:
        return False
    return True


def nd_equivalent(a: NDSequent, b: NDSequent) -> bool:
    """Same judgement up to variable naming, beta and bound-index renaming."""
    if a.formula != b.formula:
        return False
    if sorted(repr(d.formula) for d in a.decls) != sorted(repr(d.formula) for d in b.decls):
        return False
    ta = Term(f for f in a.term.factors if not isinstance(f, VarFactor)).beta_normalize()
    tb = Term(f for f in b.term.factors if not isinstance(f, VarFactor)).beta_normalize()
    return ta == tb or ta.alpha_equiv(tb)


def nd_support(seq: NDSequent) -> frozenset[str]:
    return frozenset(seq.term.indices().support()
                     | free_indices(seq.formula).support())


# -- derivations ------------------------------------------------------------------


@dataclass(frozen=True)
class NDDerivation:
    rule: str
    params: tuple
    premises: tuple["NDDerivation", ...]
    conclusion: NDSequent = field(compare=False)

    def nodes(self):
        for p in self.premises:
            yield from p.nodes()
        yield self


def derive_nd(rule: str, params: tuple, *premises: NDDerivation) -> NDDerivation:
    if rule not in _ND_RULES:
        raise RuleViolation(f"unknown natural-deduction rule {rule!r}")
    conclusion = _nd_conclusion(rule, params, tuple(p.conclusion for p in premises))
    return NDDerivation(rule, params, tuple(premises), conclusion)


def check_nd(d: NDDerivation) -> NDSequent:
    """Re-validate every node of the derivation; return the conclusion."""
    for node in d.nodes():
        got = _nd_conclusion(node.rule, node.params,
                             tuple(p.conclusion for p in node.premises))
        _need(got == node.conclusion, "stored conclusion does not match the rule")
    return d.conclusion


def _nd_conclusion(rule: str, params: tuple, prem: tuple[NDSequent, ...]) -> NDSequent:
    for s in prem:
        validate_nd(s)
    out = _ND_RULES[rule](params, prem)
    validate_nd(out)
    return out


def _nd_id(params, prem):
    _need(not prem, "id takes no premises")
    x, a = params
    _need(isinstance(x, VarFactor), "id needs a variable factor")
    return NDSequent((Decl(x, a),), Term([x]), a)


def _nd_axiom(params, prem):
    _need(not prem, "axiom takes no premises")
    t, a = params
    _need(isinstance(t, Term) and not t.var_factors(),
          "axiom needs a variable-free term")
    return NDSequent((), t, a)


def _nd_beta(params, prem):
    (target,) = params
    (p,) = prem
    _need(isinstance(target, Term), "beta needs a target term")
    _need(p.term.beta_equiv(target), "beta: terms are not beta-equivalent")
    return NDSequent(p.decls, target, p.formula)


def _nd_alpha_eta_up(params, prem):
    old, new = params
    (p,) = prem
    _need(old in free_indices(p.formula).upper, "no free upper occurrence to rename")
    _need(new not in nd_support(p), f"{new!r} is not fresh")
    return NDSequent(p.decls, p.term * delta(old, new), rename_upper(p.formula, old, new))


def _nd_alpha_eta_up_inv(params, prem):
    old, new = params
    (p,) = prem
    f = delta_factor(old, new)
    _need(f in p.term.factors, "premise term lacks the delta factor")
    _need(new in free_indices(p.formula).upper, "no renamed upper occurrence")
    out = NDSequent(p.decls, p.term.without(f), rename_upper(p.formula, new, old))
    _need(_nd_alpha_eta_up(params, (out,)) == p, "not an inverse alpha-eta step")
    return out


def _nd_alpha_eta_down(params, prem):
    old, new = params
    (p,) = prem
    _need(old in free_indices(p.formula).lower, "no free lower occurrence to rename")
    _need(new not in nd_support(p), f"{new!r} is not fresh")
    return NDSequent(p.decls, p.term * delta(new, old), rename_lower(p.formula, old, new))


def _nd_alpha_eta_down_inv(params, prem):
    old, new = params
    (p,) = prem
    f = delta_factor(new, old)
    _need(f in p.term.factors, "premise term lacks the delta factor")
    _need(new in free_indices(p.formula).lower, "no renamed lower occurrence")
    out = NDSequent(p.decls, p.term.without(f), rename_lower(p.formula, new, old))
    _need(_nd_alpha_eta_down(params, (out,)) == p, "not an inverse alpha-eta step")
    return out


def _nd_par_intro_left(params, prem):
    (name,) = params
    (p,) = prem
    d = p.find(name)
    return NDSequent(p.without(name), p.term.without(d.var), Par(dual(d.formula), p.formula))


def _nd_par_intro_right(params, prem):
    (name,) = params
    (p,) = prem
    d = p.find(name)
    return NDSequent(p.without(name), p.term.without(d.var), Par(p.formula, dual(d.formula)))


def _nd_par_elim_left(params, prem):
    l, r = prem
    _need(isinstance(r.formula, Par) and r.formula.left == dual(l.formula),
          "second premise must prove dual(A) # B")
    return NDSequent(l.decls + r.decls, l.term * r.term, r.formula.right)


def _nd_par_elim_right(params, prem):
    l, r = prem
    _need(isinstance(l.formula, Par) and l.formula.right == dual(r.formula),
          "first premise must prove B # dual(A)")
    return NDSequent(l.decls + r.decls, l.term * r.term, l.formula.left)


def _nd_tensor_intro(params, prem):
    l, r = prem
    return NDSequent(l.decls + r.decls, l.term * r.term, Tensor(l.formula, r.formula))


def _nd_tensor_elim(params, prem):
    xname, yname = params
    l, r = prem
    _need(isinstance(l.formula, Tensor), "first premise must prove a tensor")
    dx, dy = r.find(xname), r.find(yname)
    _need(dx.formula == l.formula.left and dy.formula == l.formula.right,
          "bound variables do not match the tensor components")
    t = r.term.without(dx.var).without(dy.var)
    return NDSequent(r.without(xname, yname) + l.decls, t * l.term, r.formula)


def _nd_nabla_intro(params, prem):
    mu, nu = params
    (p,) = prem
    fa = free_indices(p.formula)
    _need(mu in fa.lower and nu in fa.upper, "bound pair not free in the formula")
    f = delta_factor(mu, nu)
    _need(f in p.term.factors, "premise term lacks the delta factor")
    return NDSequent(p.decls, p.term.without(f), Nabla(mu, nu, p.formula))


def _nd_nabla_elim(params, prem):
    (p,) = prem
    f = p.formula
    _need(isinstance(f, Nabla), "premise must prove a nabla formula")
    return NDSequent(p.decls, p.term * delta(f.up, f.down), f.body)


def _nd_triangle_intro(params, prem):
    mu, nu = params
    (p,) = prem
    fa = free_indices(p.formula)
    _need(mu in fa.lower and nu in fa.upper, "bound pair not free in the formula")
    return NDSequent(p.decls, p.term * delta(nu, mu), Triangle(mu, nu, p.formula))


def _nd_triangle_elim(params, prem):
    (xname,) = params
    l, r = prem
    f = l.formula
    _need(isinstance(f, Triangle), "first premise must prove a triangle formula")
    dx = r.find(xname)
    _need(dx.formula == f.body, "bound variable does not match the triangle body")
    g = delta_factor(f.down, f.up)
    _need(g in r.term.factors, "second premise lacks the witness delta factor")
    t = r.term.without(g).without(dx.var)
    return NDSequent(l.decls + r.without(xname), t * l.term, r.formula)


_ND_RULES = {
    "id": _nd_id,
    "axiom": _nd_axiom,
    "beta": _nd_beta,
    "alpha_eta_up": _nd_alpha_eta_up,
    "alpha_eta_up_inv": _nd_alpha_eta_up_inv,
    "alpha_eta_down": _nd_alpha_eta_down,
    "alpha_eta_down_inv": _nd_alpha_eta_down_inv,
    "par_intro_left": _nd_par_intro_left,
    "par_intro_right": _nd_par_intro_right,
    "par_elim_left": _nd_par_elim_left,
    "par_elim_right": _nd_par_elim_right,
    "tensor_intro": _nd_tensor_intro,
    "tensor_elim": _nd_tensor_elim,
    "nabla_intro": _nd_nabla_intro,
    "nabla_elim": _nd_nabla_elim,
    "triangle_intro": _nd_triangle_intro,
    "triangle_elim": _nd_triangle_elim,
}

#: Rules of the fragment with a single par pair (one-directional application).
INTUITIONISTIC_RULES = frozenset(_ND_RULES) - {"par_intro_right", "par_elim_right"}


def is_intuitionistic(d: NDDerivation) -> bool:
    return all(node.rule in INTUITIONISTIC_RULES for node in d.nodes())


# -- substitution -----------------------------------------------------------------


def substitute(d1: NDDerivation, d2: NDDerivation, name: Optional[str] = None) -> NDDerivation:
    """Replace a variable of ``d2`` (of the type proved by ``d1``) by ``d1``.

    ``d1 : Gamma |- t:A`` and ``d2 : X:A, Theta |- X s : B`` combine into
    ``Gamma, Theta |- t s : B`` via a par introduction followed by a par
    elimination.
    """
    a = d1.conclusion.formula
    if name is None:
        matches = [d.var.name for d in d2.conclusion.decls if d.formula == a]
        _need(len(matches) == 1,
              "substitution target is ambiguous; name the variable explicitly")
        name = matches[0]
    else:
        _need(d2.conclusion.find(name).formula == a,
              "declared type does not match the substituted derivation")
    abstracted = derive_nd("par_intro_left", (name,), d2)
    return derive_nd("par_elim_left", (), d1, abstracted)


# -- variable supply ---------------------------------------------------------------


class VarGen:
    """Deterministic supply of fresh tensor variables (reserved '%' names)."""

    def __init__(self):
        self._counter = count()

    def for_formula(self, f: Formula) -> VarFactor:
        fa = free_indices(f)
        return VarFactor(f"%X{next(self._counter)}",
                         tuple(sorted(fa.lower)), tuple(sorted(fa.upper)))


# -- translation: natural deduction -> sequent calculus ----------------------------


def to_sequent_calculus(seq: NDSequent) -> Sequent:
    """``X1:A1,...,Xn:An |- t X1...Xn : B``  becomes  ``|- t :: B, ~An,...,~A1``."""
    validate_nd(seq)
    t = Term(f for f in seq.term.factors if not isinstance(f, VarFactor))
    ctx = (seq.formula,) + tuple(dual(d.formula) for d in reversed(seq.decls))
    return Sequent(t, ctx)


def _scid(f: Formula) -> Derivation:
    """Cut-free derivation of ``|- 1 :: f, ~f``."""
    if isinstance(f, Atom):
        return derive(ETTC, "id", (f,))
    d = dual_bridge(dual(f), dual(f))
    _need(d.conclusion.term.is_unit(), "identity expansion left residual factors")
    return d


def sc_from_nd(d: NDDerivation) -> Derivation:
    """Sequent-calculus derivation of ``to_sequent_calculus(d.conclusion)``."""
    out = _sc_from_nd(d)
    return _reorder(out, to_sequent_calculus(d.conclusion).context)


def _sc_strip(t: Term) -> Term:
    return Term(f for f in t.factors if not isinstance(f, VarFactor))


def _sc_from_nd(d: NDDerivation) -> Derivation:
    target = to_sequent_calculus(d.conclusion)
    rule, params = d.rule, d.params

    if rule == "axiom":
        raise RuleViolation("lexical axioms have no sequent image; "
                            "abstract them first (abstract_axioms)")
    if rule == "id":
        return _scid(d.conclusion.formula)

    if rule == "beta":
        p = sc_from_nd(d.premises[0])
        return derive(ETTC, "beta", (target.term,), p)

    if rule in ("alpha_eta_up", "alpha_eta_up_inv",
                "alpha_eta_down", "alpha_eta_down_inv"):
        p = sc_from_nd(d.premises[0])
        return derive(ETTC, rule, params, p)

    if rule in ("par_intro_left", "par_intro_right"):
        p = sc_from_nd(d.premises[0])
        f = d.conclusion.formula  # Par(~A, B) or Par(B, ~A)
        rest = target.context[1:]
        p = _reorder(p, (f.left, f.right) + rest)
        return derive(ETTC, "par", (0,), p)

    if rule == "par_elim_left":
        l, r = (sc_from_nd(p) for p in d.premises)
        a, par = d.premises[0].conclusion.formula, d.premises[1].conclusion.formula
        b = par.right
        aux = derive(ETTC, "tensor", (0, 0), _scid(dual(b)), _scid(a))
        # aux : |- B, ~B * A, ~A   with  ~B * A == dual(~A # B)
        c = derive(ETTC, "cut", (0, 1), r, aux)           # |- s :: Theta, B, ~A
        c = derive(ETTC, "cut", (0, len(c.conclusion.context) - 1), l, c)
        return c

    if rule == "par_elim_right":
        l, r = (sc_from_nd(p) for p in d.premises)
        par, a = d.premises[0].conclusion.formula, d.premises[1].conclusion.formula
        b = par.left
        aux = derive(ETTC, "tensor", (0, 0), _scid(a), _scid(dual(b)))
        # aux : |- ~A, A * ~B, B   with  A * ~B == dual(B # ~A)
        c = derive(ETTC, "cut", (0, 1), l, aux)           # |- s :: Gamma, ~A, B
        c = derive(ETTC, "cut", (0, len(c.conclusion.context) - 2), r, c)
        return c

    if rule == "tensor_intro":
        l, r = (sc_from_nd(p) for p in d.premises)
        return derive(ETTC, "tensor", (0, 0), l, r)

    if rule == "tensor_elim":
        l, r = (sc_from_nd(p) for p in d.premises)
        tens = d.premises[0].conclusion.formula
        ctx = list(r.conclusion.context)
        ctx.remove(dual(tens.left))
        ctx.remove(dual(tens.right))
        rest = tuple(ctx)
        r = _reorder(r, rest + (dual(tens.right), dual(tens.left)))
        r = derive(ETTC, "par", (len(rest),), r)          # ... ~B # ~A == dual(A*B)
        return derive(ETTC, "cut", (0, len(rest)), l, r)

    if rule == "nabla_intro":
        return derive(ETTC, "nabla", (0,) + params, sc_from_nd(d.premises[0]))

    if rule == "triangle_intro":
        return derive(ETTC, "triangle", (0,) + params, sc_from_nd(d.premises[0]))

    if rule == "nabla_elim":
        p = sc_from_nd(d.premises[0])
        f = d.premises[0].conclusion.formula  # Nabla(mu, nu, A)
        aux = derive(ETTC, "triangle", (0, f.down, f.up), _scid(dual(f.body)))
        # aux : |- d^mu_nu :: tri^nu_mu ~A, A
        return derive(ETTC, "cut", (0, 0), p, aux)

    if rule == "triangle_elim":
        l, r = (sc_from_nd(p) for p in d.premises)
        f = d.premises[0].conclusion.formula  # Triangle(mu, nu, A)
        pos = r.conclusion.context.index(dual(f.body))
        r = derive(ETTC, "nabla", (pos, f.down, f.up), r)
        return derive(ETTC, "cut", (0, pos), l, r)

    raise RuleViolation(f"unknown natural-deduction rule {rule!r}")


# -- translation: sequent calculus -> natural deduction -----------------------------


def nd_from_sc(d: Derivation, principal: int = 0, gen: VarGen | None = None) -> NDDerivation:
    """Natural-deduction derivation of the standard sequent whose translation
    is ``d.conclusion`` with the distinguished formula at ``principal``."""
    _need(d.system == ETTC, "only full-calculus derivations translate")
    gen = gen or VarGen()
    out = _nd_from_sc(d, principal, gen)
    seq = d.conclusion
    _need(out.conclusion.formula == seq.context[principal]
          and _sc_strip(out.conclusion.term) == seq.term
          and sorted(map(repr, (dl.formula for dl in out.conclusion.decls)))
          == sorted(map(repr, (dual(f) for k, f in enumerate(seq.context) if k != principal))),
          "translated conclusion does not match the sequent")
    return out


def _axvar(gen: VarGen, f: Formula) -> NDDerivation:
    """Fresh axiom ``Z:f |- Z:f``."""
    return derive_nd("id", (gen.for_formula(f), f))


def _decl_named(nd: NDDerivation, f: Formula) -> str:
    for dl in nd.conclusion.decls:
        if dl.formula == f:
            return dl.var.name
    raise RuleViolation(f"no declaration of type {f!r} to eliminate")


def _nd_from_sc(d: Derivation, p: int, gen: VarGen) -> NDDerivation:
    seq = d.conclusion
    rule, params = d.rule, d.params

    if rule == "id":
        f = seq.context[p]
        return derive_nd("id", (gen.for_formula(f), f))

    if rule == "beta":
        ih = _nd_from_sc(d.premises[0], p, gen)
        vars_ = Term(ih.conclusion.term.var_factors())
        return derive_nd("beta", (seq.term * vars_,), ih)

    if rule == "ex":
        (q,) = params
        if p == q:
            p2 = q + 1
        elif p == q + 1:
            p2 = q
        else:
            p2 = p
        return _nd_from_sc(d.premises[0], p2, gen)

    if rule in ("alpha_eta_up", "alpha_eta_down"):
        old, new = params
        prem = d.premises[0].conclusion
        row = free_indices(prem.context[p])
        at_principal = old in (row.upper if rule == "alpha_eta_up" else row.lower)
        ih = _nd_from_sc(d.premises[0], p, gen)
        if at_principal:
            return derive_nd(rule, params, ih)
        # the rename happens on a context formula: detour through a fresh
        # axiom for the renamed declaration, then substitute
        pos = _renamed_pos(prem, rule, old)
        c_old = dual(prem.context[pos])
        c_new = dual(seq.context[pos])
        ax = _axvar(gen, c_new)
        if rule == "alpha_eta_up":      # declaration rows are swapped
            step = derive_nd("alpha_eta_down", (new, old), ax)
        else:
            step = derive_nd("alpha_eta_up", (new, old), ax)
        _need(step.conclusion.formula == c_old, "context rename mismatch")
        return substitute(step, ih, _decl_named(ih, c_old))

    if rule in ("alpha_eta_up_inv", "alpha_eta_down_inv"):
        old, new = params
        prem = d.premises[0].conclusion
        row = free_indices(seq.context[p])
        at_principal = old in (row.upper if rule == "alpha_eta_up_inv" else row.lower)
        _need(at_principal, "inverse renaming of a context formula is not supported")
        ih = _nd_from_sc(d.premises[0], p, gen)
        return derive_nd(rule, params, ih)

    if rule == "par":
        (q,) = params
        prem = d.premises[0].conclusion
        if q == p:
            ih = _nd_from_sc(d.premises[0], p, gen)
            b = prem.context[p + 1]
            return derive_nd("par_intro_right", (_decl_named(ih, dual(b)),), ih)
        p2 = p if p < q else p + 1
        ih = _nd_from_sc(d.premises[0], p2, gen)
        f, g = prem.context[q], prem.context[q + 1]
        ax = _axvar(gen, dual(Par(f, g)))     # Tensor(~g, ~f)
        return derive_nd("tensor_elim",
                         (_decl_named(ih, dual(g)), _decl_named(ih, dual(f))),
                         ax, ih)

    if rule == "tensor":
        qa, qb = params
        l, r = d.premises
        nl = len(l.conclusion.context)
        if p == nl - 1:  # the tensor formula itself
            ihl = _nd_from_sc(l, qa, gen)
            ihr = _nd_from_sc(r, qb, gen)
            return derive_nd("tensor_intro", (), ihl, ihr)
        b, c = l.conclusion.context[qa], r.conclusion.context[qb]
        tens = Tensor(b, c)
        ax = _axvar(gen, dual(tens))          # Par(~c, ~b)
        if p < nl - 1:  # principal inside the left premise
            p2 = p if p < qa else p + 1
            ihl = _nd_from_sc(l, p2, gen)
            ihr = _nd_from_sc(r, qb, gen)
            half = derive_nd("par_elim_left", (), ihr, ax)    # ... |- s Z : ~b
            return substitute(half, ihl, _decl_named(ihl, dual(b)))
        idx = p - nl
        p2 = idx if idx < qb else idx + 1
        ihr = _nd_from_sc(r, p2, gen)
        ihl = _nd_from_sc(l, qa, gen)
        half = derive_nd("par_elim_right", (), ax, ihl)       # ... |- Z t : ~c
        return substitute(half, ihr, _decl_named(ihr, dual(c)))

    if rule == "nabla":
        q, mu, nu = params
        if q == p:
            ih = _nd_from_sc(d.premises[0], p, gen)
            return derive_nd("nabla_intro", (mu, nu), ih)
        prem = d.premises[0].conclusion
        ih = _nd_from_sc(d.premises[0], p, gen)
        body = prem.context[q]
        ax = _axvar(gen, dual(Nabla(mu, nu, body)))  # Triangle(nu, mu, ~body)
        return derive_nd("triangle_elim", (_decl_named(ih, dual(body)),), ax, ih)

    if rule == "triangle":
        q, mu, nu = params
        if q == p:
            ih = _nd_from_sc(d.premises[0], p, gen)
            return derive_nd("triangle_intro", (mu, nu), ih)
        prem = d.premises[0].conclusion
        ih = _nd_from_sc(d.premises[0], p, gen)
        body = prem.context[q]
        ax = _axvar(gen, dual(Triangle(mu, nu, body)))  # Nabla(nu, mu, ~body)
        opened = derive_nd("nabla_elim", (), ax)
        return substitute(opened, ih, _decl_named(ih, dual(body)))

    if rule == "cut":
        q1, q2 = params
        l, r = d.premises
        nl = len(l.conclusion.context)
        a = l.conclusion.context[q1]
        if p < nl - 1:  # principal survives from the left premise
            p2 = p if p < q1 else p + 1
            ihl = _nd_from_sc(l, p2, gen)
            ihr = _nd_from_sc(r, q2, gen)        # proves dual(a)
            return substitute(ihr, ihl, _decl_named(ihl, dual(a)))
        idx = p - (nl - 1)
        p2 = idx if idx < q2 else idx + 1
        ihr = _nd_from_sc(r, p2, gen)
        ihl = _nd_from_sc(l, q1, gen)            # proves a == dual(dual(a))
        return substitute(ihl, ihr, _decl_named(ihr, a))

    raise RuleViolation(f"rule {rule!r} has no natural-deduction image")


def _renamed_pos(prem: Sequent, rule: str, old: str) -> int:
    from .judgements import locate_lower, locate_upper

    if rule == "alpha_eta_up":
        return locate_upper(prem.context, old)
    return locate_lower(prem.context, old)


# -- the deduction theorem -----------------------------------------------------------


def abstract_axioms(d: NDDerivation) -> tuple[NDDerivation, Term]:
    """Replace every lexical axiom ``|- tau : A`` by a fresh declared variable.

    Returns the axiom-free derivation of ``X1:A1,...,Xn:An, Gamma |- t' X : B``
    together with ``t'`` (the conclusion term without the new variables);
    multiplying ``t'`` by the abstracted axiom terms recovers the original
    conclusion term up to beta.
    """
    gen = VarGen()
    new_names: set[str] = set()

    def normalized(node: NDDerivation) -> NDDerivation:
        t = node.conclusion.term
        n = t.beta_normalize()
        return node if t == n else derive_nd("beta", (n,), node)

    def go(node: NDDerivation) -> NDDerivation:
        if node.rule == "axiom":
            t, a = node.params
            x = gen.for_formula(a)
            new_names.add(x.name)
            return derive_nd("id", (x, a))
        prems = [go(q) for q in node.premises]
        if node.rule == "beta":
            return normalized(prems[0])
        try:
            return derive_nd(node.rule, node.params, *prems)
        except RuleViolation:
            # structure-sensitive rules may need the delta factors that the
            # original (fully glued) term hid inside a word; expose them
            prems = [normalized(q) for q in prems]
            return derive_nd(node.rule, node.params, *prems)

    out = go(d)
    t_prime = Term(f for f in out.conclusion.term.factors
                   if not (isinstance(f, VarFactor) and f.name in new_names))
    return out, t_prime


def axiom_terms(d: NDDerivation) -> list[Term]:
    """The lexical terms of all axiom leaves, in leaf order."""
    return [node.params[0] for node in d.nodes() if node.rule == "axiom"]


# -- slash types and their eliminations ------------------------------------------------

#: A directed type: callable mapping (upper, lower, gen) to a formula.
TypeFactory = Callable[[str, str, FreshGen], Formula]


def basic(name: str) -> TypeFactory:
    def make(upper: str, lower: str, gen: FreshGen) -> Formula:
        return Atom(name, True, (upper,), (lower,))

    return make


def over(b: TypeFactory, a: TypeFactory) -> TypeFactory:
    """``(b / a)^i_j = nabla^m_n (b^i_m # ~(a^j_n))``."""

    def make(upper: str, lower: str, gen: FreshGen) -> Formula:
        mu, nu = gen.fresh(), gen.fresh()
        return Nabla(mu, nu, Par(b(upper, mu, gen), dual(a(lower, nu, gen))))

    return make


def under(a: TypeFactory, b: TypeFactory) -> TypeFactory:
    """``(a \\ b)^i_j = nabla^m_n (~(a^m_i) # b^n_j)``."""

    def make(upper: str, lower: str, gen: FreshGen) -> Formula:
        mu, nu = gen.fresh(), gen.fresh()
        return Nabla(mu, nu, Par(dual(a(mu, upper, gen)), b(nu, lower, gen)))

    return make


def slash_elim(side: str, d1: NDDerivation, d2: NDDerivation) -> NDDerivation:
    """Derived Lambek eliminations.

    ``side='right'``: from ``Gamma |- t:(b/a)^i_j`` and ``Theta |- s:a^j_k``
    conclude ``Gamma, Theta |- t s : b^i_k``.  ``side='left'``: from
    ``Gamma |- s:a^i_j`` and ``Theta |- t:(a\\b)^j_k`` conclude
    ``Gamma, Theta |- s t : b^i_k``.
    """
    if side == "right":
        slash, arg = d1, d2
    elif side == "left":
        slash, arg = d2, d1
    else:
        raise RuleViolation("side must be 'left' or 'right'")
    f = slash.conclusion.formula
    _need(isinstance(f, Nabla) and isinstance(f.body, Par),
          "slash elimination needs a nabla-par type")
    opened = derive_nd("nabla_elim", (), slash)

    if side == "right":
        want = dual(f.body.right)        # the argument type with endpoint nu
        got = arg.conclusion.formula
        k0 = _endpoint(got, want, "lower", f.down)
        if k0 != f.down:
            arg = derive_nd("alpha_eta_down", (k0, f.down), arg)
        _need(arg.conclusion.formula == want, "argument type does not match the slash")
        out = derive_nd("par_elim_right", (), opened, arg)
        chain = [delta_factor(f.up, f.down)]
        if k0 != f.down:
            chain.append(delta_factor(f.down, k0))
        merged = _strip_chain(out.conclusion.term, chain) * delta(f.up, k0)
        if merged != out.conclusion.term:
            out = derive_nd("beta", (merged,), out)
        return derive_nd("alpha_eta_down_inv", (k0, f.up), out)

    want = dual(f.body.left)
    got = arg.conclusion.formula
    k0 = _endpoint(got, want, "upper", f.up)
    if k0 != f.up:
        arg = derive_nd("alpha_eta_up", (k0, f.up), arg)
    _need(arg.conclusion.formula == want, "argument type does not match the slash")
    out = derive_nd("par_elim_left", (), arg, opened)
    chain = [delta_factor(f.up, f.down)]
    if k0 != f.up:
        chain.append(delta_factor(k0, f.up))
    merged = _strip_chain(out.conclusion.term, chain) * delta(k0, f.down)
    if merged != out.conclusion.term:
        out = derive_nd("beta", (merged,), out)
    return derive_nd("alpha_eta_up_inv", (k0, f.down), out)


def _strip_chain(t: Term, factors) -> Term:
    for f in factors:
        t = t.without(f)
    return t


def _endpoint(got: Formula, want: Formula, row: str, binder: str) -> str:
    """The index of ``got`` that must be renamed (to ``binder``) for ``got``
    to equal ``want``; ``binder`` itself when they already agree."""
    if got == want:
        return binder
    a = getattr(free_indices(got), row)
    b = getattr(free_indices(want), row)
    diff = a - b
    _need(len(diff) == 1, "argument type does not match the slash")
    (k0,) = diff
    ren = (rename_upper if row == "upper" else rename_lower)(got, k0, binder)
    _need(ren == want, "argument type does not match the slash")
    return k0
