"""Sequent calculi over tensor sequents.

Two systems share one derivation datatype:

``ettc``
    identity on atoms, cut, beta conversion, the four alpha-eta rules,
    par, tensor, the nabla/triangle binder rules and exchange.

``eta``
    the eta-long fragment: a composite identity axiom on renamed-apart
    atoms, cut, beta conversion, par, tensor, exchange, and binder rules
    that rename the bound occurrences on the fly.  Every sequent in this
    system is a typing sequent.

Rules are applied positionally: parameters name the context positions they
act on, so the conclusion is a function of (rule, params, premises).
Exchange is still available for reorderings of the final conclusion.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import RuleViolation
from .formulas import (Atom, Formula, Nabla, Par, Tensor, Triangle, alpha_canonical,
                       dual, free_indices, rename_all, rename_free, subformulas)
from .fresh import FreshGen
from .judgements import (Sequent, context_fi, is_typing, rename_context_lower,
                         rename_context_upper, sequent_support, validate)
from .terms import Term, delta, delta_factor

ETTC = "ettc"
ETA = "eta"

_RULES = {
    ETTC: {"id", "cut", "beta", "alpha_eta_up", "alpha_eta_up_inv", "alpha_eta_down",
           "alpha_eta_down_inv", "par", "tensor", "nabla", "triangle", "ex"},
    ETA: {"id_eta", "cut", "beta", "par", "tensor", "nabla_alpha", "triangle_alpha", "ex"},
}


@dataclass(frozen=True)
class Derivation:
    system: str
    rule: str
    params: tuple
    premises: tuple["Derivation", ...]
    conclusion: Sequent

    def size(self) -> int:
        return 1 + sum(p.size() for p in self.premises)

    def logical_size(self) -> int:
        """Node count ignoring exchange and beta steps (reorderings and
        term normalisation are bookkeeping)."""
        return (self.rule not in ("ex", "beta")) + sum(
            p.logical_size() for p in self.premises)

    def cut_count(self) -> int:
        return (self.rule == "cut") + sum(p.cut_count() for p in self.premises)

    def nodes(self):
        yield self
        for p in self.premises:
            yield from p.nodes()


def derive(system: str, rule: str, params: tuple, *premises: Derivation) -> Derivation:
    """Apply a rule, validating its side conditions and the conclusion."""
    if rule not in _RULES[system]:
        raise RuleViolation(f"rule {rule!r} is not part of system {system!r}")
    for p in premises:
        if p.system != system:
            raise RuleViolation("premises belong to a different system")
    conclusion = _conclusion(system, rule, params, tuple(p.conclusion for p in premises))
    return Derivation(system, rule, params, tuple(premises), conclusion)


def check(d: Derivation) -> None:
    """Re-check every rule application in the derivation."""
    for p in d.premises:
        check(p)
    again = _conclusion(d.system, d.rule, d.params, tuple(p.conclusion for p in d.premises))
    if again != d.conclusion:
        raise RuleViolation("stored conclusion does not match the rule application")


def is_derivation(d: Derivation) -> bool:
    try:
        check(d)
        return True
    except Exception:
        return False


# -- rule implementations -----------------------------------------------------


def _need(cond: bool, msg: str) -> None:
    if not cond:
        raise RuleViolation(msg)


def _conclusion(system: str, rule: str, params: tuple, prem: tuple[Sequent, ...]) -> Sequent:
    for s in prem:
        validate(s)
        if system == ETA:
            _need(is_typing(s), "eta-long system requires typing sequents")
    out = _RULE_IMPL[rule](params, prem)
    validate(out)
    if system == ETA:
        _need(is_typing(out), "eta-long system requires typing sequents")
    return out


def _rule_id(params: tuple, prem: tuple[Sequent, ...]) -> Sequent:
    _need(not prem, "id takes no premises")
    (a,) = params
    _need(isinstance(a, Atom), "id needs an atomic formula")
    return Sequent(Term(), (a, dual(a)))


def _rule_id_eta(params: tuple, prem: tuple[Sequent, ...]) -> Sequent:
    _need(not prem, "id takes no premises")
    a, upper2, lower2 = params
    _need(isinstance(a, Atom), "id needs an atomic formula")
    upper2, lower2 = tuple(upper2), tuple(lower2)
    _need(len(upper2) == len(a.lower) and len(lower2) == len(a.upper),
          "renamed dual atom has wrong valency")
    b = Atom(a.name, not a.positive, upper2, lower2)
    # delta links: a.upper[t] with lower2 reversed, a.lower[t] with upper2 reversed
    t = Term()
    n, m = len(a.upper), len(a.lower)
    for idx in range(n):
        t = t * delta(lower2[n - 1 - idx], a.upper[idx])
    for idx in range(m):
        t = t * delta(a.lower[idx], upper2[m - 1 - idx])
    return Sequent(t, (a, b))


def _rule_cut(params: tuple, prem: tuple[Sequent, ...]) -> Sequent:
    pos_a, pos_b = params
    l, r = prem
    a = l.context[pos_a]
    _need(r.context[pos_b] == dual(a), "cut formulas are not dual")
    gamma = l.context[:pos_a] + l.context[pos_a + 1 :]
    theta = r.context[:pos_b] + r.context[pos_b + 1 :]
    t_i, s_i = l.term.indices(), r.term.indices()
    _need(t_i.perp(s_i), "cut: term indices clash")
    fi_g, fi_t = context_fi(gamma), context_fi(theta)
    _need(fi_g.perp(fi_t), "cut: side contexts share free indices")
    ft, fs = l.term.free_indices(), r.term.free_indices()
    fa = free_indices(a)
    # indices shared between the terms must interface through the cut formula
    _need((ft.upper & fs.lower) <= fa.lower and (ft.lower & fs.upper) <= fa.upper,
          "cut: terms interact outside the cut formula")
    # likewise for cross pairs between the two side contexts
    _need((fi_g.lower & fi_t.upper) <= fa.upper and (fi_g.upper & fi_t.lower) <= fa.lower,
          "cut: contexts interact outside the cut formula")
    return Sequent(l.term * r.term, gamma + theta)


def _rule_beta(params: tuple, prem: tuple[Sequent, ...]) -> Sequent:
    (target,) = params
    (p,) = prem
    _need(isinstance(target, Term), "beta needs a target term")
    _need(p.term.beta_equiv(target), "beta: terms are not beta-equivalent")
    return Sequent(target, p.context)


def _rule_alpha_eta_up(params: tuple, prem: tuple[Sequent, ...]) -> Sequent:
    old, new = params
    (p,) = prem
    _need(old in context_fi(p.context).upper, "no free upper occurrence to rename")
    _need(new not in sequent_support(p), f"{new!r} is not fresh")
    ctx = rename_context_upper(p.context, old, new)
    return Sequent(p.term * delta(old, new), ctx)


def _rule_alpha_eta_up_inv(params: tuple, prem: tuple[Sequent, ...]) -> Sequent:
    old, new = params
    (p,) = prem
    f = delta_factor(old, new)
    _need(f in p.term.factors, "premise term lacks the delta factor")
    _need(new in context_fi(p.context).upper, "no renamed upper occurrence")
    ctx = rename_context_upper(p.context, new, old)
    out = Sequent(p.term.without(f), ctx)
    _need(_rule_alpha_eta_up(params, (out,)) == p, "not an inverse alpha-eta step")
    return out


def _rule_alpha_eta_down(params: tuple, prem: tuple[Sequent, ...]) -> Sequent:
    old, new = params
    (p,) = prem
    _need(old in context_fi(p.context).lower, "no free lower occurrence to rename")
    _need(new not in sequent_support(p), f"{new!r} is not fresh")
    ctx = rename_context_lower(p.context, old, new)
    return Sequent(p.term * delta(new, old), ctx)


def _rule_alpha_eta_down_inv(params: tuple, prem: tuple[Sequent, ...]) -> Sequent:
    old, new = params
    (p,) = prem
    f = delta_factor(new, old)
    _need(f in p.term.factors, "premise term lacks the delta factor")
    _need(new in context_fi(p.context).lower, "no renamed lower occurrence")
    ctx = rename_context_lower(p.context, new, old)
    out = Sequent(p.term.without(f), ctx)
    _need(_rule_alpha_eta_down(params, (out,)) == p, "not an inverse alpha-eta step")
    return out


def _rule_par(params: tuple, prem: tuple[Sequent, ...]) -> Sequent:
    (pos,) = params
    (p,) = prem
    _need(0 <= pos < len(p.context) - 1, "par needs two adjacent formulas")
    a, b = p.context[pos], p.context[pos + 1]
    ctx = p.context[:pos] + (Par(a, b),) + p.context[pos + 2 :]
    return Sequent(p.term, ctx)


def _rule_tensor(params: tuple, prem: tuple[Sequent, ...]) -> Sequent:
    pos_a, pos_b = params
    l, r = prem
    a, b = l.context[pos_a], r.context[pos_b]
    lfi, rfi = context_fi(l.context), context_fi(r.context)
    _need(not (lfi.support() & rfi.support()), "tensor: premises share free indices")
    _need(not (l.term.indices().support() & r.term.indices().support()),
          "tensor: premise terms share indices")
    _need(l.term.indices().perp(rfi) and r.term.indices().perp(lfi),
          "tensor: terms clash with the opposite context")
    gamma = l.context[:pos_a] + l.context[pos_a + 1 :]
    theta = r.context[:pos_b] + r.context[pos_b + 1 :]
    return Sequent(l.term * r.term, gamma + (Tensor(a, b),) + theta)


def _rule_nabla(params: tuple, prem: tuple[Sequent, ...]) -> Sequent:
    pos, mu, nu = params
    (p,) = prem
    a = p.context[pos]
    fa = free_indices(a)
    _need(nu in fa.upper and mu in fa.lower, "nabla: bound pair not free in the formula")
    f = delta_factor(mu, nu)
    _need(f in p.term.factors, "nabla: premise term lacks the delta factor")
    ctx = p.context[:pos] + (Nabla(mu, nu, a),) + p.context[pos + 1 :]
    return Sequent(p.term.without(f), ctx)


def _rule_triangle(params: tuple, prem: tuple[Sequent, ...]) -> Sequent:
    pos, mu, nu = params
    (p,) = prem
    a = p.context[pos]
    fa = free_indices(a)
    _need(nu in fa.upper and mu in fa.lower, "triangle: bound pair not free in the formula")
    ctx = p.context[:pos] + (Triangle(mu, nu, a),) + p.context[pos + 1 :]
    return Sequent(p.term * delta(nu, mu), ctx)


def _rule_nabla_alpha(params: tuple, prem: tuple[Sequent, ...]) -> Sequent:
    pos, mu, nu, i, j = params
    (p,) = prem
    a1 = p.context[pos]
    fa = free_indices(a1)
    _need(i in fa.lower and j in fa.upper, "nabla: occurrence pair not free in the formula")
    f = delta_factor(i, j)
    t = p.term
    if f not in t.factors:
        # i, j are free in the term, so normalization exposes the delta factor
        t = t.beta_normalize()
        _need(f in t.factors, "nabla: premise term lacks the delta factor")
    body = rename_free(a1, {j: nu}, {i: mu})
    ctx = p.context[:pos] + (Nabla(mu, nu, body),) + p.context[pos + 1 :]
    return Sequent(t.without(f), ctx)


def _rule_triangle_alpha(params: tuple, prem: tuple[Sequent, ...]) -> Sequent:
    pos, mu, nu, i, j = params
    (p,) = prem
    a1 = p.context[pos]
    fa = free_indices(a1)
    _need(i in fa.lower and j in fa.upper, "triangle: occurrence pair not free in the formula")
    body = rename_free(a1, {j: nu}, {i: mu})
    ctx = p.context[:pos] + (Triangle(mu, nu, body),) + p.context[pos + 1 :]
    return Sequent(p.term * delta(j, i), ctx)


def _rule_ex(params: tuple, prem: tuple[Sequent, ...]) -> Sequent:
    (pos,) = params
    (p,) = prem
    _need(0 <= pos < len(p.context) - 1, "exchange needs two adjacent formulas")
    ctx = list(p.context)
    ctx[pos], ctx[pos + 1] = ctx[pos + 1], ctx[pos]
    return Sequent(p.term, tuple(ctx))


_RULE_IMPL = {
    "id": _rule_id,
    "id_eta": _rule_id_eta,
    "cut": _rule_cut,
    "beta": _rule_beta,
    "alpha_eta_up": _rule_alpha_eta_up,
    "alpha_eta_up_inv": _rule_alpha_eta_up_inv,
    "alpha_eta_down": _rule_alpha_eta_down,
    "alpha_eta_down_inv": _rule_alpha_eta_down_inv,
    "par": _rule_par,
    "tensor": _rule_tensor,
    "nabla": _rule_nabla,
    "triangle": _rule_triangle,
    "nabla_alpha": _rule_nabla_alpha,
    "triangle_alpha": _rule_triangle_alpha,
    "ex": _rule_ex,
}


# -- renaming whole derivations ------------------------------------------------


def _rename_params(rule: str, params: tuple, mapping: dict[str, str]) -> tuple:
    def r(x):
        if isinstance(x, str):
            return mapping.get(x, x)
        if isinstance(x, Term):
            return x.rename(mapping)
        if isinstance(x, (Atom, Tensor, Par, Nabla, Triangle)):
            return rename_all(x, mapping)
        if isinstance(x, tuple):
            return tuple(r(y) for y in x)
        return x

    out = tuple(r(x) for x in params)
    if rule in ("nabla", "triangle", "nabla_alpha", "triangle_alpha"):
        # the binder-name parameters are not free occurrences; renaming them
        # would rewrite closed formulas
        out = (out[0], params[1], params[2]) + out[3:]
    return out


def rename_derivation(d: Derivation, mapping: dict[str, str]) -> Derivation:
    """Rename free indices uniformly throughout a derivation (rules are
    equivariant under such renamings as long as the targets avoid binder
    names, which stay fixed)."""
    prems = tuple(rename_derivation(p, mapping) for p in d.premises)
    return derive(d.system, d.rule, _rename_params(d.rule, d.params, mapping), *prems)


def derivation_support(d: Derivation) -> set[str]:
    """All index names appearing in any sequent of the derivation,
    including binder names."""
    support: set[str] = set()
    for node in d.nodes():
        support |= sequent_support(node.conclusion)
        for f in node.conclusion.context:
            for g in subformulas(f):
                if isinstance(g, (Nabla, Triangle)):
                    support.add(g.up)
                    support.add(g.down)
    return support


def alpha_variant(d: Derivation, mapping: dict[str, str], gen: FreshGen | None = None) -> Derivation:
    """Rename the given indices, freshening any collisions with the targets."""
    support = derivation_support(d)
    gen = gen or FreshGen(support | set(mapping.values()) | set(mapping))
    full = dict(mapping)
    for name in sorted(set(mapping.values()) & support - set(mapping)):
        full[name] = gen.fresh()
    return rename_derivation(d, full)


# -- identity expansion and the dual bridge ------------------------------------


def dual_bridge(f: Formula, f2: Formula, gen: FreshGen | None = None) -> Derivation:
    """Cut-free derivation of ``|- dual(f), f2`` for alpha-equivalent f, f2.

    With ``f2 = f`` this is identity expansion.  Binder names of ``f2`` that
    shadow free indices of the sequent are not supported and raise.
    """
    _need(alpha_canonical(f) == alpha_canonical(f2), "formulas are not alpha-equivalent")
    gen = gen or FreshGen(free_indices(f).support())

    if isinstance(f, Atom):
        return derive(ETTC, "id", (dual(f),))

    if isinstance(f, Tensor):
        da = dual_bridge(f.left, f2.left, gen)
        db = dual_bridge(f.right, f2.right, gen)
        d = derive(ETTC, "tensor", (1, 1), da, db)  # |- ~A, A2*B2, ~B
        d = derive(ETTC, "ex", (1,), d)             # |- ~A, ~B, A2*B2
        d = derive(ETTC, "ex", (0,), d)             # |- ~B, ~A, A2*B2
        return derive(ETTC, "par", (0,), d)         # |- ~B # ~A, A2*B2

    if isinstance(f, Par):
        da = dual_bridge(f.left, f2.left, gen)
        db = dual_bridge(f.right, f2.right, gen)
        d = derive(ETTC, "tensor", (0, 0), db, da)  # |- B2, ~B*~A, A2
        d = derive(ETTC, "ex", (0,), d)             # |- ~B*~A, B2, A2
        d = derive(ETTC, "ex", (1,), d)             # |- ~B*~A, A2, B2
        return derive(ETTC, "par", (1,), d)         # |- ~B*~A, A2 # B2

    mu, nu = f.up, f.down
    x, y = f2.up, f2.down
    body2 = rename_free(f2.body, {y: nu}, {x: mu})
    d = dual_bridge(f.body, body2, gen)  # |- ~A, A2
    added = []
    if y != nu:
        d = derive(ETTC, "alpha_eta_up", (nu, y), d)
        added.append(delta_factor(nu, y))
    if x != mu:
        d = derive(ETTC, "alpha_eta_down", (mu, x), d)
        added.append(delta_factor(x, mu))
    if isinstance(f, Nabla):
        d = derive(ETTC, "triangle", (0, nu, mu), d)
        added.append(delta_factor(mu, nu))
        # the binder-side deltas chain to delta(x, y); normalize the rest
        base = _strip(d.conclusion.term, added)
        d = derive(ETTC, "beta", (delta(x, y) * base.beta_normalize(),), d)
        return derive(ETTC, "nabla", (1, x, y), d)
    # Triangle
    d = derive(ETTC, "triangle", (1, x, y), d)
    added.append(delta_factor(y, x))
    base = _strip(d.conclusion.term, added)
    d = derive(ETTC, "beta", (delta(nu, mu) * base.beta_normalize(),), d)
    return derive(ETTC, "nabla", (0, nu, mu), d)


def _strip(t: Term, factors) -> Term:
    for f in factors:
        t = t.without(f)
    return t


def identity_expansion(f: Formula, gen: FreshGen | None = None) -> Derivation:
    """Cut-free derivation of ``|- dual(f), f``."""
    return dual_bridge(f, f, gen)


# -- embedding the eta-long system into the full calculus -----------------------


def embed_eta_long(d: Derivation) -> Derivation:
    """Translate an eta-long derivation into the full calculus, preserving
    the conclusion exactly.  The result is cut-free iff the input is."""
    _need(d.system == ETA, "embed_eta_long expects an eta-long derivation")
    prems = tuple(embed_eta_long(p) for p in d.premises)

    if d.rule == "id_eta":
        a, upper2, lower2 = d.params
        out = derive(ETTC, "id", (a,))
        n, m = len(a.upper), len(a.lower)
        for t in range(n):
            out = derive(ETTC, "alpha_eta_down", (a.upper[t], lower2[n - 1 - t]), out)
        for t in range(m):
            out = derive(ETTC, "alpha_eta_up", (a.lower[t], upper2[m - 1 - t]), out)
        _need(out.conclusion == d.conclusion, "identity embedding mismatch")
        return out

    if d.rule in ("cut", "beta", "par", "tensor", "ex"):
        return derive(ETTC, d.rule, d.params, *prems)

    (p,) = prems
    if d.rule in ("nabla_alpha", "triangle_alpha"):
        return _embed_binder(d, p)

    raise RuleViolation(f"unexpected eta-long rule {d.rule!r}")


def _embed_binder(d: Derivation, p: Derivation) -> Derivation:
    """Replay an eta-long binder step with the plain nabla/triangle rules.

    The binder names ``mu``/``nu`` may already occur free in the premise
    sequent (as the pair they eventually bind lives in the term until the
    binder fires).  The plain rules need those names free, so clashing
    occurrences are first renamed aside with alpha-eta steps and restored
    with inverse renames once the names are safely bound.
    """
    pos, mu, nu, i, j = d.params
    gen = FreshGen(sequent_support(p.conclusion)
                   | sequent_support(d.conclusion) | {mu, nu, i, j})
    out = p

    def norm(target: Term | None = None) -> None:
        nonlocal out
        t = out.conclusion.term.beta_normalize() if target is None else target
        if out.conclusion.term != t:
            out = derive(ETTC, "beta", (t,), out)

    cur_i, cur_j = i, j
    restore: list[tuple[str, str, str]] = []
    norm()
    for name, clashes in ((nu, j != nu), (mu, i != mu)):
        if not clashes or name not in sequent_support(out.conclusion):
            continue
        if name in context_fi(out.conclusion.context).lower:
            w = gen.fresh()
            out = derive(ETTC, "alpha_eta_down", (name, w), out)
            if name == cur_i:
                cur_i = w
            else:
                restore.append(("alpha_eta_down", w, name))
            norm()
        if name in context_fi(out.conclusion.context).upper:
            w = gen.fresh()
            out = derive(ETTC, "alpha_eta_up", (name, w), out)
            if name == cur_j:
                cur_j = w
            else:
                restore.append(("alpha_eta_up", w, name))
            norm()
        _need(name not in sequent_support(out.conclusion),
              f"cannot free up the binder name {name!r}")
    if cur_j != nu:
        out = derive(ETTC, "alpha_eta_up", (cur_j, nu), out)
    if cur_i != mu:
        out = derive(ETTC, "alpha_eta_down", (cur_i, mu), out)
    if d.rule == "nabla_alpha":
        if delta_factor(mu, nu) not in out.conclusion.term.factors:
            norm()
        out = derive(ETTC, "nabla", (pos, mu, nu), out)
    else:
        out = derive(ETTC, "triangle", (pos, mu, nu), out)
    norm()
    for rule, w, name in reversed(restore):
        out = derive(ETTC, rule, (w, name), out)
        norm()
    norm(d.conclusion.term)
    _need(out.conclusion == d.conclusion, "binder embedding mismatch")
    return out
