"""Cut elimination.

The pipeline runs through the eta-long fragment:

1. ``eta_long_lift`` turns a full-calculus derivation into an eta-long one
   whose conclusion is the input sequent with every degenerate context index
   expanded away (a fresh upper name plus a delta factor per pair).
2. ``push_side_cuts`` permutes cuts upwards until every cut is principal,
   preserving the logical size (exchange steps don't count) exactly.
3. ``reduce_principal`` removes one innermost principal cut, strictly
   decreasing the logical size; the conclusion term may drift within its
   beta class.
4. The result is embedded back into the full calculus and the expansion
   deltas are stripped with inverse alpha-eta steps, recovering the exact
   original sequent.
"""

from __future__ import annotations

from .errors import RuleViolation
from .formulas import Atom, free_indices
from .fresh import FreshGen
from .judgements import Sequent, context_fi, eta_expand, sequent_support
from .sequent import (ETA, ETTC, Derivation, alpha_variant, derivation_support,
                      derive, embed_eta_long)
from .terms import delta, delta_factor

Pairs = list[tuple[str, str]]


def _expand_with(seq: Sequent, pairs: Pairs) -> Sequent:
    for index, fresh in pairs:
        seq = eta_expand(seq, index, fresh, "upper")
    return seq


# -- lifting into the eta-long fragment ----------------------------------------


def eta_long_lift(d: Derivation, gen: FreshGen | None = None) -> tuple[Derivation, Pairs]:
    """Translate a full-calculus derivation into the eta-long fragment.

    Returns an eta-long derivation together with the (index, fresh-upper)
    expansion pairs such that its conclusion equals the input conclusion
    with those pairs eta-expanded.
    """
    if d.system != ETTC:
        raise RuleViolation("eta_long_lift expects a full-calculus derivation")
    gen = gen or FreshGen(derivation_support(d))
    out, pairs = _lift(d, gen)
    assert out.conclusion == _expand_with(d.conclusion, pairs)
    return out, pairs


def _lift(d: Derivation, gen: FreshGen) -> tuple[Derivation, Pairs]:
    handler = _LIFT[d.rule]
    return handler(d, gen)


def _lift_id(d: Derivation, gen: FreshGen) -> tuple[Derivation, Pairs]:
    (a,) = d.params
    b = d.conclusion.context[1]  # dual atom
    pairs = [(e, gen.fresh()) for e in sorted(a.upper + a.lower)]
    mapping = dict(pairs)
    a2 = Atom(a.name, a.positive, tuple(mapping[e] for e in a.upper), a.lower)
    upper2 = tuple(mapping[e] for e in b.upper)
    out = derive(ETA, "id_eta", (a2, upper2, b.lower))
    return out, pairs


def _lift_simple(d: Derivation, gen: FreshGen) -> tuple[Derivation, Pairs]:
    # par and ex act on positions only; expansion commutes with them
    p, pairs = _lift(d.premises[0], gen)
    return derive(ETA, d.rule, d.params, p), pairs


def _lift_beta(d: Derivation, gen: FreshGen) -> tuple[Derivation, Pairs]:
    p, pairs = _lift(d.premises[0], gen)
    (target,) = d.params
    for index, fresh in pairs:
        target = target * delta(index, fresh)
    return derive(ETA, "beta", (target,), p), pairs


def _lift_tensor(d: Derivation, gen: FreshGen) -> tuple[Derivation, Pairs]:
    l, pairs1 = _lift(d.premises[0], gen)
    r, pairs2 = _lift(d.premises[1], gen)
    return derive(ETA, "tensor", d.params, l, r), pairs1 + pairs2


def _lift_nabla(d: Derivation, gen: FreshGen) -> tuple[Derivation, Pairs]:
    pos, mu, nu = d.params
    p, pairs = _lift(d.premises[0], gen)
    renames = dict(pairs)
    j = nu
    if nu in renames and renames[nu] in free_indices(p.conclusion.context[pos]).upper:
        # the binder's upper occurrence was itself expanded; the expansion
        # delta chains with the rule's own delta and collapses the pair
        j = renames[nu]
        pairs = [pr for pr in pairs if pr != (nu, j)]
    out = derive(ETA, "nabla_alpha", (pos, mu, nu, mu, j), p)
    target = _expand_with(d.conclusion, pairs).term
    if out.conclusion.term != target:
        out = derive(ETA, "beta", (target,), out)
    return out, pairs


def _lift_triangle(d: Derivation, gen: FreshGen) -> tuple[Derivation, Pairs]:
    pos, mu, nu = d.params
    p, pairs = _lift(d.premises[0], gen)
    renames = dict(pairs)
    if nu in renames and renames[nu] in free_indices(p.conclusion.context[pos]).upper:
        # the binder's upper occurrence was itself expanded; collapse the chain
        v = renames[nu]
        out = derive(ETA, "triangle_alpha", (pos, mu, nu, mu, v), p)
        pairs = [pr for pr in pairs if pr != (nu, v)]
        target = _expand_with(d.conclusion, pairs).term
        return derive(ETA, "beta", (target,), out), pairs
    out = derive(ETA, "triangle_alpha", (pos, mu, nu, mu, nu), p)
    return out, pairs


def _lift_alpha_eta(d: Derivation, gen: FreshGen) -> tuple[Derivation, Pairs]:
    old, new = d.params
    p, pairs = _lift(d.premises[0], gen)
    renames = dict(pairs)
    prem_seq = d.premises[0].conclusion
    fi = context_fi(prem_seq.context)
    if d.rule == "alpha_eta_up":
        if old in renames:
            # the renamed upper occurrence was expanded already: identify names
            v = renames[old]
            out = alpha_variant(p, {v: new}, gen)
            return out, [pr for pr in pairs if pr != (old, v)]
        out = alpha_variant(p, {old: new}, gen)
        target = _expand_with(d.conclusion, pairs).term
        return derive(ETA, "beta", (target,), out), pairs
    if d.rule == "alpha_eta_down":
        if old in renames:
            v = renames[old]
            out = alpha_variant(p, {old: new, v: old}, gen)
            return out, [pr for pr in pairs if pr != (old, v)]
        out = alpha_variant(p, {old: new}, gen)
        target = _expand_with(d.conclusion, pairs).term
        return derive(ETA, "beta", (target,), out), pairs
    # inverse rules: the conclusion is the *smaller* sequent
    seq = d.conclusion
    cfi = context_fi(seq.context)
    if d.rule == "alpha_eta_up_inv":
        if old in cfi.lower:
            v = gen.fresh()
            out = alpha_variant(p, {new: v}, gen)
            return out, pairs + [(old, v)]
        scratch = gen.fresh()
        out = alpha_variant(p, {new: old, old: scratch}, gen)
        target = _expand_with(d.conclusion, pairs).term
        return derive(ETA, "beta", (target,), out), pairs
    if d.rule == "alpha_eta_down_inv":
        if old in cfi.upper:
            v = gen.fresh()
            out = alpha_variant(p, {new: old, old: v}, gen)
            return out, pairs + [(old, v)]
        scratch = gen.fresh()
        out = alpha_variant(p, {new: old, old: scratch}, gen)
        target = _expand_with(d.conclusion, pairs).term
        return derive(ETA, "beta", (target,), out), pairs
    raise RuleViolation(f"unexpected rule {d.rule!r}")


def _strip_pairs(term, pairs):
    for index, fresh in pairs:
        term = term.without(delta_factor(index, fresh))
    return term


def _lift_cut(d: Derivation, gen: FreshGen) -> tuple[Derivation, Pairs]:
    pos1, pos2 = d.params
    d1, pairs1 = _lift(d.premises[0], gen)
    d2, pairs2 = _lift(d.premises[1], gen)
    a = d.premises[0].conclusion.context[pos1]
    fa = free_indices(a)
    p1map, p2map = dict(pairs1), dict(pairs2)
    # rename both copies of the cut formula's free occurrences apart so that
    # the lifted cut formulas are literal duals
    m1: dict[str, str] = {}
    m2: dict[str, str] = {}
    for e in sorted(fa.upper):
        fresh = gen.fresh()
        m1[p1map.get(e, e)] = fresh
        m2[e] = fresh
    for e in sorted(fa.lower):
        fresh = gen.fresh()
        m1[e] = fresh
        m2[p2map.get(e, e)] = fresh
    d1 = alpha_variant(d1, m1, gen) if m1 else d1
    d2 = alpha_variant(d2, m2, gen) if m2 else d2
    out = derive(ETA, "cut", (pos1, pos2), d1, d2)
    ctx_upper = context_fi(out.conclusion.context).upper
    pairs = [pr for pr in pairs1 + pairs2 if pr[1] in ctx_upper]
    target = _expand_with(d.conclusion, pairs)
    if out.conclusion != target:
        out = derive(ETA, "beta", (target.term,), out)
    return out, pairs


_LIFT = {
    "id": _lift_id,
    "beta": _lift_beta,
    "par": _lift_simple,
    "ex": _lift_simple,
    "tensor": _lift_tensor,
    "nabla": _lift_nabla,
    "triangle": _lift_triangle,
    "alpha_eta_up": _lift_alpha_eta,
    "alpha_eta_down": _lift_alpha_eta,
    "alpha_eta_up_inv": _lift_alpha_eta,
    "alpha_eta_down_inv": _lift_alpha_eta,
    "cut": _lift_cut,
}


# -- reordering conclusions with exchange steps ---------------------------------


def _reorder(d: Derivation, target: tuple) -> Derivation:
    """Append exchange steps until the conclusion context equals `target`."""
    current = list(d.conclusion.context)
    if sorted(map(repr, current)) != sorted(map(repr, target)):
        raise RuleViolation("reorder target is not a permutation")
    want = list(target)
    for i in range(len(want)):
        if current[i] == want[i]:
            continue
        j = next(k for k in range(i + 1, len(current)) if current[k] == want[i])
        while j > i:
            d = derive(d.system, "ex", (j - 1,), d)
            current[j - 1], current[j] = current[j], current[j - 1]
            j -= 1
    return d


# -- pushing side cuts ----------------------------------------------------------

_INTRODUCES = {"id_eta", "par", "tensor", "nabla_alpha", "triangle_alpha"}


def _introduces(d: Derivation, pos: int) -> bool:
    """Does the last rule of `d` introduce the formula at `pos`?"""
    if d.rule == "id_eta":
        return True
    if d.rule == "par":
        return pos == d.params[0]
    if d.rule == "tensor":
        # the tensor formula replaces the whole left premise tail
        return pos == len(d.premises[0].conclusion.context) - 1
    if d.rule in ("nabla_alpha", "triangle_alpha"):
        return pos == d.params[0]
    return False


def is_principal(cut: Derivation) -> bool:
    if cut.rule != "cut":
        raise RuleViolation("not a cut")
    pos1, pos2 = cut.params
    return _introduces(cut.premises[0], pos1) and _introduces(cut.premises[1], pos2)


def push_side_cuts(d: Derivation) -> Derivation:
    """Permute every side cut upwards until all cuts are principal.
    The conclusion and the logical size are preserved exactly."""
    changed = True
    while changed:
        d, changed = _push_once(d)
    return d


def _push_once(d: Derivation) -> tuple[Derivation, bool]:
    for i, p in enumerate(d.premises):
        new, changed = _push_once(p)
        if changed:
            prems = list(d.premises)
            prems[i] = new
            return _reapply(d, tuple(prems)), True
    if d.rule == "cut" and not is_principal(d) and _push_side(d) is not None:
        return _permute_side_cut(d), True
    return d, False


def _push_side(cut: Derivation) -> bool | None:
    """Which premise the cut can permute into: True for left, False for
    right, None if blocked.  A premise ending in another cut is off limits;
    the inner cut has to be reduced first, or the two cuts would swap places
    forever."""
    pos1, pos2 = cut.params
    left, right = cut.premises
    if not _introduces(left, pos1) and left.rule != "cut":
        return True
    if not _introduces(right, pos2) and right.rule != "cut":
        return False
    return None


def _reapply(d: Derivation, premises: tuple) -> Derivation:
    return derive(d.system, d.rule, d.params, *premises)


def _permute_side_cut(cut: Derivation) -> Derivation:
    pos1, pos2 = cut.params
    left, right = cut.premises
    target_ctx = cut.conclusion.context
    side = _push_side(cut)
    if side is None:
        raise RuleViolation("cut is blocked by an inner cut")
    if side:
        out = _permute_into(left, pos1, right, pos2, left_side=True)
    else:
        out = _permute_into(right, pos2, left, pos1, left_side=False)
    out = _reorder(out, target_ctx)
    if out.conclusion.term != cut.conclusion.term:
        # freshened bound spot indices drift the term within its beta class
        out = derive(ETA, "beta", (cut.conclusion.term,), out)
    if out.conclusion != cut.conclusion:
        raise RuleViolation("side-cut permutation changed the conclusion")
    return out


def _premise_position(d: Derivation, pos: int) -> tuple[int, int]:
    """Trace the conclusion formula at `pos` (not introduced by the last
    rule) to (premise number, position in that premise)."""
    if d.rule == "beta":
        return 0, pos
    if d.rule == "ex":
        p = d.params[0]
        if pos == p:
            return 0, p + 1
        if pos == p + 1:
            return 0, p
        return 0, pos
    if d.rule == "par":
        p = d.params[0]
        return 0, pos if pos < p else pos + 1
    if d.rule in ("nabla_alpha", "triangle_alpha"):
        return 0, pos
    if d.rule == "tensor":
        pos_a, pos_b = d.params
        nleft = len(d.premises[0].conclusion.context)
        if pos < nleft - 1:
            return 0, pos if pos < pos_a else pos + 1
        if pos == nleft - 1:
            raise RuleViolation("formula is introduced here")
        right = pos - nleft  # offset into Theta (right context minus B)
        return 1, right if right < pos_b else right + 1
    if d.rule == "cut":
        pos_a, pos_b = d.params
        nleft = len(d.premises[0].conclusion.context) - 1
        if pos < nleft:
            return 0, pos if pos < pos_a else pos + 1
        rightpos = pos - nleft
        return 1, rightpos if rightpos < pos_b else rightpos + 1
    raise RuleViolation(f"cannot trace through rule {d.rule!r}")


def _permute_into(side: Derivation, pos: int, other: Derivation, opos: int,
                  left_side: bool) -> Derivation:
    """Move the cut above the last rule of `side`.  `other` holds the dual
    cut formula at `opos`.  Returns a derivation of a permutation of the
    original cut conclusion."""
    rule, params = side.rule, side.params
    # after the cut, positions within the side premise shift by -1 past the
    # cut formula, and (when the side premise is on the right) by the length
    # of the other context block prepended by the cut
    base = 0 if left_side else len(other.conclusion.context) - 1

    def shifted(p: int, removed: int) -> int:
        return base + (p if p < removed else p - 1)

    if rule in ("nabla_alpha", "triangle_alpha"):
        # freshen the spot indices first: the other premise may use them
        bpos, mu, nu, i, j = params
        gen = FreshGen(derivation_support(side) | derivation_support(other))
        i2, j2 = gen.fresh(), gen.fresh()
        prem = alpha_variant(side.premises[0], {i: i2, j: j2}, gen)
        newcut = _mkcut(prem, pos, other, opos, left_side)
        return derive(ETA, rule, (shifted(bpos, pos), mu, nu, i2, j2), newcut)

    prem_no, ppos = _premise_position(side, pos)

    if rule == "beta":
        newcut = _mkcut(side.premises[0], ppos, other, opos, left_side)
        target = side.params[0] * other.conclusion.term
        return derive(ETA, "beta", (target,), newcut)

    if rule == "ex":
        return _mkcut(side.premises[0], ppos, other, opos, left_side)

    if rule == "par":
        newcut = _mkcut(side.premises[0], ppos, other, opos, left_side)
        return derive(ETA, "par", (shifted(params[0], ppos),), newcut)

    if rule in ("tensor", "cut"):
        pos_a, pos_b = params
        carrier = side.premises[prem_no]
        # the other premise joins the carrier's side of the rule, so its
        # bound indices must also avoid the sibling premise
        other = _hygienic(other, side.premises[1 - prem_no])
        newcut = _mkcut(carrier, ppos, other, opos, left_side)
        if prem_no == 0:
            return derive(ETA, rule, (shifted(pos_a, ppos), pos_b),
                          newcut, side.premises[1])
        return derive(ETA, rule, (pos_a, shifted(pos_b, ppos)),
                      side.premises[0], newcut)

    raise RuleViolation(f"cannot permute cut past rule {rule!r}")


def _hygienic(side: Derivation, other: Derivation) -> Derivation:
    """Rename bound term indices of `side`'s conclusion away from `other`'s
    support; frees stay fixed (they carry the sequent's interface)."""
    s_seq, o_seq = side.conclusion, other.conclusion
    free = s_seq.term.free_indices().support() | context_fi(s_seq.context).support()
    clash = (sequent_support(s_seq) & sequent_support(o_seq)) - free
    if not clash:
        return side
    gen = FreshGen(derivation_support(side) | derivation_support(other))
    return alpha_variant(side, {c: gen.fresh() for c in sorted(clash)}, gen)


def _mkcut(side: Derivation, pos: int, other: Derivation, opos: int,
           left_side: bool) -> Derivation:
    side = _hygienic(side, other)
    if left_side:
        return derive(ETA, "cut", (pos, opos), side, other)
    return derive(ETA, "cut", (opos, pos), other, side)


# -- reducing principal cuts -----------------------------------------------------


def reduce_principal(d: Derivation) -> Derivation:
    """Reduce one innermost principal cut.  Strictly decreases the logical
    size; the conclusion context is preserved and the term stays within its
    beta class."""
    target, changed = _reduce_once(d)
    if not changed:
        raise RuleViolation("no principal cut to reduce")
    return target


def _reduce_once(d: Derivation) -> tuple[Derivation, bool]:
    for i, p in enumerate(d.premises):
        new, changed = _reduce_once(p)
        if changed:
            prems = list(d.premises)
            prems[i] = new
            return _reapply(d, tuple(prems)), True
    if d.rule == "cut" and is_principal(d):
        return _reduce_cut(d), True
    return d, False


def _reduce_cut(cut: Derivation) -> Derivation:
    out = _reduce_cut_raw(cut)
    if out.conclusion.term != cut.conclusion.term:
        # reductions freshen glued indices; pin the term back so enclosing
        # rules can be reapplied verbatim
        out = derive(ETA, "beta", (cut.conclusion.term,), out)
    return out


def _reduce_cut_raw(cut: Derivation) -> Derivation:
    pos1, pos2 = cut.params
    left, right = cut.premises
    lrule, rrule = left.rule, right.rule

    if lrule == "id_eta" and rrule == "id_eta":
        a = cut.conclusion.context[0]
        b = cut.conclusion.context[1]
        return derive(ETA, "id_eta", (a, b.upper, b.lower))

    if lrule == "tensor" and rrule == "par":
        return _reduce_tensor_par(cut, left, right, pos2, flipped=False)
    if lrule == "par" and rrule == "tensor":
        return _reduce_tensor_par(cut, right, left, pos1, flipped=True)

    if lrule == "nabla_alpha" and rrule == "triangle_alpha":
        return _reduce_binder(cut, left, right, flipped=False)
    if lrule == "triangle_alpha" and rrule == "nabla_alpha":
        return _reduce_binder(cut, right, left, flipped=True)

    raise RuleViolation(
        f"unexpected principal pair {lrule!r}/{rrule!r}")


def _reduce_tensor_par(cut: Derivation, tens: Derivation, par: Derivation,
                       parpos: int, flipped: bool) -> Derivation:
    # tensor premise concludes  Gamma1, A (x) B, Gamma2
    # par premise concludes     Theta1, Bbar # Abar, Theta2
    pos_a, pos_b = tens.params
    da, db = tens.premises
    (ppos,) = par.params
    p0 = par.premises[0]  # ..., Bbar at ppos, Abar at ppos+1, ...
    da = _hygienic(da, p0)
    c1 = derive(ETA, "cut", (pos_a, ppos + 1), da, p0)
    db = _hygienic(db, c1)
    # Abar consumed; Bbar now located inside c1's context
    bbar_pos = len(da.conclusion.context) - 1 + ppos
    c2 = derive(ETA, "cut", (pos_b, bbar_pos), db, c1)
    return _reorder(c2, cut.conclusion.context)


def _reduce_binder(cut: Derivation, nab: Derivation, tri: Derivation,
                   flipped: bool) -> Derivation:
    npos, nmu, nnu, ni, nj = nab.params
    tpos, tmu, tnu, ti, tj = tri.params
    ps, pt = nab.premises[0], tri.premises[0]
    gen = FreshGen(derivation_support(nab) | derivation_support(tri))
    i2, j2 = gen.fresh(), gen.fresh()
    ps2 = alpha_variant(ps, {ni: i2, nj: j2}, gen)
    pt2 = alpha_variant(pt, {tj: i2, ti: j2}, gen)
    pt2 = _hygienic(pt2, ps2)
    if not flipped:
        out = derive(ETA, "cut", (npos, tpos), ps2, pt2)
    else:
        out = derive(ETA, "cut", (tpos, npos), pt2, ps2)
    return _reorder(out, cut.conclusion.context)


# -- the full pipeline ------------------------------------------------------------


def eliminate_cuts(d: Derivation) -> Derivation:
    """Produce a cut-free full-calculus derivation of exactly the same
    conclusion."""
    if d.system != ETTC:
        raise RuleViolation("eliminate_cuts expects a full-calculus derivation")
    work, pairs = eta_long_lift(d)
    while work.cut_count():
        work = push_side_cuts(work)
        work = reduce_principal(work)
    expanded = _expand_with(d.conclusion, pairs)
    if work.conclusion != expanded:
        work = derive(ETA, "beta", (expanded.term,), work)
    out = embed_eta_long(work)
    for index, fresh in reversed(pairs):
        out = derive(ETTC, "alpha_eta_up_inv", (index, fresh), out)
    if out.conclusion != d.conclusion:
        raise RuleViolation("cut elimination failed to restore the conclusion")
    return out
