"""First order multiplicative linear logic and its tensor-sequent bridge.

One-sided first order sequents ``|- Gamma`` over predicate symbols that
carry a *valency* ``(left, right)`` splitting their argument slots into
left and right variable occurrences.  The module provides

* formulas, duality and the sequent rules (Id/Cut/par/tensor/forall/
  exists) plus the extended ``exists_prime`` rule used by *linguistic*
  derivations, where every sequent keeps exactly one left and one right
  free occurrence per variable;
* occurrence nets of cut-free marked derivations (a perfect matching of
  left and right free occurrences) and the relinking transformation that
  renames a linked pair while preserving derivation size and net;
* ``to_linguistic``, turning any cut-free derivation of a well-formed
  sequent into a derivation whose every node is well-formed;
* the eta-long and eta-reduced translations into tensor sequents and the
  constructive correspondence between linguistic derivations and
  eta-long tensor derivations, in both directions;
* the Lambek type language with its translations into first order
  formulas and into tensor formulas.

Occurrences are addressed as ``OccRef(pos, path, slot)``: a context
position, a path of ``"L"``/``"R"``/``"B"`` steps to an atom, and an
argument slot of that atom.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, NamedTuple, Union

from .errors import MalformedFormula, MalformedJudgement, RuleViolation
from .formulas import Atom, Formula, Nabla, Par, Tensor, Triangle, rename_free
from .fresh import FreshGen
from .judgements import Sequent, equivalent, validate
from .sequent import Derivation, ETA, derive, rename_derivation
from .terms import Term, delta

LEFT = "left"
RIGHT = "right"


# -- predicate signatures and formulas -----------------------------------------


@dataclass(frozen=True)
class PredicateSignature:
    """A predicate symbol with a sign and a valency splitting its slots."""

    symbol: str
    left: int
    right: int
    positive: bool = True

    def __post_init__(self):
        if self.left < 0 or self.right < 0:
            raise MalformedFormula("negative valency")

    @property
    def arity(self) -> int:
        return self.left + self.right

    @property
    def valency(self) -> tuple[int, int]:
        return (self.left, self.right)

    def dual(self) -> "PredicateSignature":
        return PredicateSignature(self.symbol, self.right, self.left, not self.positive)


@dataclass(frozen=True)
class FOAtom:
    pred: PredicateSignature
    vars: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "vars", tuple(self.vars))
        if len(self.vars) != self.pred.arity:
            raise MalformedFormula(
                f"{self.pred.symbol!r} expects {self.pred.arity} arguments")


@dataclass(frozen=True)
class FOTensor:
    left: "FOFormula"
    right: "FOFormula"


@dataclass(frozen=True)
class FOPar:
    left: "FOFormula"
    right: "FOFormula"


@dataclass(frozen=True)
class FOForall:
    var: str
    body: "FOFormula"


@dataclass(frozen=True)
class FOExists:
    var: str
    body: "FOFormula"


FOFormula = Union[FOAtom, FOTensor, FOPar, FOForall, FOExists]
FOContext = tuple


def fo_dual(f: FOFormula) -> FOFormula:
    """Involutive negation; it flips tensor/par factors and reverses the
    argument list of atoms."""
    if isinstance(f, FOAtom):
        return FOAtom(f.pred.dual(), tuple(reversed(f.vars)))
    if isinstance(f, FOTensor):
        return FOPar(fo_dual(f.right), fo_dual(f.left))
    if isinstance(f, FOPar):
        return FOTensor(fo_dual(f.right), fo_dual(f.left))
    if isinstance(f, FOForall):
        return FOExists(f.var, fo_dual(f.body))
    return FOForall(f.var, fo_dual(f.body))


def fo_implies(a: FOFormula, b: FOFormula) -> FOFormula:
    """Linear implication, encoded as ``b par dual(a)``."""
    return FOPar(b, fo_dual(a))


class OccRef(NamedTuple):
    pos: int
    path: tuple[str, ...]
    slot: int


def fo_sub(f: FOFormula, path: tuple[str, ...]) -> FOFormula:
    for step in path:
        if step == "L":
            f = f.left
        elif step == "R":
            f = f.right
        else:
            f = f.body
    return f


def _walk(f: FOFormula, path: tuple[str, ...] = ()):
    """All atom occurrences: (path, slot, var, polarity)."""
    if isinstance(f, FOAtom):
        for slot, x in enumerate(f.vars):
            yield path, slot, x, (LEFT if slot < f.pred.left else RIGHT)
    elif isinstance(f, (FOTensor, FOPar)):
        yield from _walk(f.left, path + ("L",))
        yield from _walk(f.right, path + ("R",))
    else:
        yield from _walk(f.body, path + ("B",))


def binders_above(f: FOFormula, path: tuple[str, ...]) -> list[str]:
    out = []
    for step in path:
        if isinstance(f, (FOForall, FOExists)):
            out.append(f.var)
            f = f.body
        elif step == "L":
            f = f.left
        else:
            f = f.right
    return out


def occurrences(ctx: FOContext) -> Iterator[tuple[OccRef, str, str, bool]]:
    """All atom occurrences of a context: (ref, var, polarity, is_free)."""
    for pos, f in enumerate(ctx):
        for path, slot, x, pol in _walk(f):
            yield OccRef(pos, path, slot), x, pol, x not in binders_above(f, path)


def free_occurrences(ctx: FOContext) -> list[tuple[OccRef, str, str]]:
    return [(ref, x, pol) for ref, x, pol, free in occurrences(ctx) if free]


def fo_free_vars(ctx_or_formula) -> frozenset[str]:
    ctx = ctx_or_formula if isinstance(ctx_or_formula, tuple) else (ctx_or_formula,)
    return frozenset(x for _, x, _ in free_occurrences(ctx))


def var_at(ctx: FOContext, ref: OccRef) -> str:
    return fo_sub(ctx[ref.pos], ref.path).vars[ref.slot]


def polarity(ctx: FOContext, ref: OccRef) -> str:
    """``left`` or ``right``: valency splits atom slots, connectives and
    quantifiers leave polarity unchanged."""
    atom = fo_sub(ctx[ref.pos], ref.path)
    return LEFT if ref.slot < atom.pred.left else RIGHT


def free_positions(f: FOFormula, var: str) -> list[tuple[tuple[str, ...], int]]:
    """(path, slot) of every free occurrence of ``var``."""
    return [(path, slot) for path, slot, x, _ in _walk(f)
            if x == var and var not in binders_above(f, path)]


# -- substitution at occurrences -----------------------------------------------


def subst_at(f: FOFormula, targets, new: str) -> FOFormula:
    """Replace the occurrences at the given (path, slot) positions."""
    targets = set(targets)

    def go(g: FOFormula, path):
        if isinstance(g, FOAtom):
            vs = tuple(new if (path, s) in targets else x for s, x in enumerate(g.vars))
            return FOAtom(g.pred, vs)
        if isinstance(g, FOTensor):
            return FOTensor(go(g.left, path + ("L",)), go(g.right, path + ("R",)))
        if isinstance(g, FOPar):
            return FOPar(go(g.left, path + ("L",)), go(g.right, path + ("R",)))
        if isinstance(g, FOForall):
            return FOForall(g.var, go(g.body, path + ("B",)))
        return FOExists(g.var, go(g.body, path + ("B",)))

    return go(f, ())


def subst_free(f: FOFormula, old: str, new: str) -> FOFormula:
    """Replace every free occurrence of ``old`` by ``new`` (no capture
    check; see :func:`captures`)."""
    return subst_at(f, free_positions(f, old), new)


def captures(f: FOFormula, old: str, new: str) -> bool:
    """Would substituting ``new`` for free ``old`` bind the new name?"""
    return any(new in binders_above(f, path) for path, _ in free_positions(f, old))


def subst_ctx_at(ctx: FOContext, refs, new: str) -> FOContext:
    by_pos: dict[int, list] = {}
    for ref in refs:
        by_pos.setdefault(ref.pos, []).append((ref.path, ref.slot))
    return tuple(subst_at(f, by_pos[p], new) if p in by_pos else f
                 for p, f in enumerate(ctx))


def rebind_formula(f: FOFormula, qpath: tuple[str, ...], new: str) -> FOFormula:
    """Rename the bound variable of the quantifier at ``qpath``."""
    q = fo_sub(f, qpath)
    if not isinstance(q, (FOForall, FOExists)):
        raise RuleViolation("path does not point at a quantifier")
    if q.var == new:
        return f
    if free_positions(q.body, new) or captures(q.body, q.var, new):
        raise RuleViolation(f"renaming the binder to {new!r} would capture")
    body = subst_free(q.body, q.var, new)
    kind = FOForall if isinstance(q, FOForall) else FOExists

    def go(g, path):
        if path == qpath:
            return kind(new, body)
        step = qpath[len(path)]
        if step == "L":
            return type(g)(go(g.left, path + ("L",)), g.right)
        if step == "R":
            return type(g)(g.left, go(g.right, path + ("R",)))
        return type(g)(g.var, go(g.body, path + ("B",)))

    return go(f, ())


# -- linguistic marking --------------------------------------------------------

UNMARKED = "unmarked"
MARKED = "marked"
WELL_FORMED = "well_formed"


def _quantifier_balance(f: FOFormula) -> bool:
    """True when every quantifier binds exactly one left and one right
    occurrence."""
    if isinstance(f, FOAtom):
        return True
    if isinstance(f, (FOTensor, FOPar)):
        return _quantifier_balance(f.left) and _quantifier_balance(f.right)
    bound = free_positions(f.body, f.var)
    lefts = sum(1 for path, slot in bound
                if slot < fo_sub(f.body, path).pred.left)
    return lefts == 1 and len(bound) == 2 and _quantifier_balance(f.body)


def classify_sequent(ctx: FOContext) -> str:
    """``unmarked`` / ``marked`` / ``well_formed``.

    Marked: every quantifier binds exactly one left and one right
    occurrence.  Well-formed: marked, and every free variable has exactly
    one left and one right free occurrence in the whole context.
    """
    if not all(_quantifier_balance(f) for f in ctx):
        return UNMARKED
    counts: dict[str, list[int]] = {}
    for _, x, pol in free_occurrences(ctx):
        c = counts.setdefault(x, [0, 0])
        c[pol == RIGHT] += 1
    if all(c == [1, 1] for c in counts.values()):
        return WELL_FORMED
    return MARKED


def is_marked(ctx: FOContext) -> bool:
    return classify_sequent(ctx) in (MARKED, WELL_FORMED)


def is_well_formed(ctx: FOContext) -> bool:
    return classify_sequent(ctx) == WELL_FORMED


# -- sequent calculus ----------------------------------------------------------


@dataclass(frozen=True)
class MLL1Derivation:
    rule: str
    params: tuple
    premises: tuple["MLL1Derivation", ...]
    conclusion: FOContext

    def size(self) -> int:
        return 1 + sum(p.size() for p in self.premises)

    def cut_count(self) -> int:
        return (self.rule == "cut") + sum(p.cut_count() for p in self.premises)

    def nodes(self):
        yield self
        for p in self.premises:
            yield from p.nodes()


def _need(cond: bool, msg: str) -> None:
    if not cond:
        raise RuleViolation(msg)


def _rule_id(params, prem):
    _need(not prem, "id takes no premises")
    (a,) = params
    _need(isinstance(a, FOAtom), "id needs an atomic formula")
    return (fo_dual(a), a)


def _rule_cut(params, prem):
    pos_a, pos_b = params
    l, r = prem
    _need(r[pos_b] == fo_dual(l[pos_a]), "cut formulas are not dual")
    return l[:pos_a] + l[pos_a + 1 :] + r[:pos_b] + r[pos_b + 1 :]


def _rule_par(params, prem):
    (pos,) = params
    (p,) = prem
    _need(0 <= pos < len(p) - 1, "par needs two adjacent formulas")
    return p[:pos] + (FOPar(p[pos], p[pos + 1]),) + p[pos + 2 :]


def _rule_tensor(params, prem):
    pos_a, pos_b = params
    l, r = prem
    gamma = l[:pos_a] + l[pos_a + 1 :]
    theta = r[:pos_b] + r[pos_b + 1 :]
    return gamma + (FOTensor(l[pos_a], r[pos_b]),) + theta


def _rule_ex(params, prem):
    (pos,) = params
    (p,) = prem
    _need(0 <= pos < len(p) - 1, "exchange needs two adjacent formulas")
    out = list(p)
    out[pos], out[pos + 1] = out[pos + 1], out[pos]
    return tuple(out)


def _check_witness(body: FOFormula, x: str, v: str, got: FOFormula) -> None:
    _need(not captures(body, x, v), "the witness would be captured")
    _need(subst_free(body, x, v) == got,
          "premise formula is not the witness instance")


def _rule_forall(params, prem):
    pos, x, body, v = params
    (p,) = prem
    _check_witness(body, x, v, p[pos])
    rest = p[:pos] + p[pos + 1 :]
    _need(v not in fo_free_vars(rest), f"eigenvariable {v!r} is free in the context")
    return p[:pos] + (FOForall(x, body),) + p[pos + 1 :]


def _rule_exists(params, prem):
    pos, x, body, v = params
    (p,) = prem
    _check_witness(body, x, v, p[pos])
    return p[:pos] + (FOExists(x, body),) + p[pos + 1 :]


def _unique_occ(ctx: FOContext, var: str, pol: str) -> OccRef:
    refs = [ref for ref, x, q in free_occurrences(ctx) if x == var and q == pol]
    _need(len(refs) == 1, f"{var!r} needs exactly one free {pol} occurrence")
    return refs[0]


def apply_exists_prime(ctx: FOContext, pos: int, s: str, t: str,
                       x: str, v: str) -> FOContext:
    """The extended existential step on a well-formed sequent.

    Binds the left occurrence of ``s`` and the right occurrence of ``t``
    inside the formula at ``pos`` under a new quantifier on ``x``, then
    renames the remaining occurrences of ``s`` and ``t`` to ``v``.
    """
    _need(s != t, "the two glued variables must differ")
    _need(is_well_formed(ctx), "the premise sequent is not well-formed")
    a = ctx[pos]
    _need(x not in fo_free_vars(a), f"{x!r} occurs free in the formula")
    s_l = _unique_occ(ctx, s, LEFT)
    t_r = _unique_occ(ctx, t, RIGHT)
    _need(s_l.pos == pos and t_r.pos == pos,
          "the bound occurrences must lie in the chosen formula")
    s_r = _unique_occ(ctx, s, RIGHT)
    t_l = _unique_occ(ctx, t, LEFT)
    for ref in (s_l, t_r):
        _need(x not in binders_above(a, ref.path),
              "the new binder would capture inside the formula")
    for ref in (s_r, t_l):
        _need(v not in binders_above(ctx[ref.pos], ref.path),
              f"{v!r} is captured at a renamed occurrence")
    a1 = FOExists(x, subst_at(a, [(s_l.path, s_l.slot), (t_r.path, t_r.slot)], x))
    ctx1 = ctx[:pos] + (a1,) + ctx[pos + 1 :]
    lift = lambda r: OccRef(r.pos, (("B",) + r.path) if r.pos == pos else r.path, r.slot)
    return subst_ctx_at(ctx1, [lift(s_r), lift(t_l)], v)


def _rule_exists_prime(params, prem):
    pos, s, t, x, v = params
    (p,) = prem
    return apply_exists_prime(p, pos, s, t, x, v)


_FO_RULES = {
    "id": _rule_id,
    "cut": _rule_cut,
    "par": _rule_par,
    "tensor": _rule_tensor,
    "ex": _rule_ex,
    "forall": _rule_forall,
    "exists": _rule_exists,
    "exists_prime": _rule_exists_prime,
}


def derive_fo(rule: str, params: tuple, *premises: MLL1Derivation) -> MLL1Derivation:
    if rule not in _FO_RULES:
        raise RuleViolation(f"unknown rule {rule!r}")
    conclusion = _FO_RULES[rule](params, tuple(p.conclusion for p in premises))
    return MLL1Derivation(rule, params, tuple(premises), conclusion)


def check_mll1(d: MLL1Derivation, linguistic: bool = False) -> FOContext:
    """Re-check every rule application; in linguistic mode additionally
    require every node sequent to be well-formed (the mode that licenses
    the extended existential rule)."""
    for node in d.nodes():
        again = _FO_RULES[node.rule](node.params, tuple(p.conclusion for p in node.premises))
        if again != node.conclusion:
            raise RuleViolation("stored conclusion does not match the rule application")
        if node.rule == "exists_prime" and not linguistic:
            raise RuleViolation("the extended existential rule needs linguistic mode")
        if linguistic and not is_well_formed(node.conclusion):
            raise RuleViolation("linguistic derivations need well-formed sequents")
    if d.cut_count() == 0 and is_marked(d.conclusion):
        # cut-free derivations of marked sequents are marked throughout
        for node in d.nodes():
            if not is_marked(node.conclusion):
                raise RuleViolation("marked conclusion with an unmarked node")
    return d.conclusion


def is_fo_derivation(d: MLL1Derivation, linguistic: bool = False) -> bool:
    try:
        check_mll1(d, linguistic)
        return True
    except Exception:
        return False


# -- occurrence bookkeeping through rules ---------------------------------------


def _bound_refs(d: MLL1Derivation) -> list[OccRef]:
    """Premise occurrences that the final quantifier step binds."""
    if d.rule in ("forall", "exists"):
        pos, x, body, v = d.params
        return [OccRef(pos, path, slot) for path, slot in free_positions(body, x)]
    if d.rule == "exists_prime":
        pos, s, t, x, v = d.params
        p = d.premises[0].conclusion
        return [_unique_occ(p, s, LEFT), _unique_occ(p, t, RIGHT)]
    return []


def _map_ref(d: MLL1Derivation, k: int, ref: OccRef) -> OccRef | None:
    """Image in the conclusion of a free occurrence of premise ``k``;
    ``None`` when the occurrence becomes bound."""
    rule, params = d.rule, d.params
    if rule == "par":
        (pos,) = params
        if ref.pos == pos:
            return OccRef(pos, ("L",) + ref.path, ref.slot)
        if ref.pos == pos + 1:
            return OccRef(pos, ("R",) + ref.path, ref.slot)
        return ref if ref.pos < pos else OccRef(ref.pos - 1, ref.path, ref.slot)
    if rule == "ex":
        (pos,) = params
        if ref.pos == pos:
            return OccRef(pos + 1, ref.path, ref.slot)
        if ref.pos == pos + 1:
            return OccRef(pos, ref.path, ref.slot)
        return ref
    if rule == "tensor":
        pos_a, pos_b = params
        nl = len(d.premises[0].conclusion)
        if k == 0:
            if ref.pos == pos_a:
                return OccRef(nl - 1, ("L",) + ref.path, ref.slot)
            return OccRef(ref.pos if ref.pos < pos_a else ref.pos - 1, ref.path, ref.slot)
        if ref.pos == pos_b:
            return OccRef(nl - 1, ("R",) + ref.path, ref.slot)
        return OccRef(nl + (ref.pos if ref.pos < pos_b else ref.pos - 1), ref.path, ref.slot)
    if rule in ("forall", "exists", "exists_prime"):
        pos = params[0]
        if ref in _bound_refs(d):
            return None
        if ref.pos == pos:
            return OccRef(pos, ("B",) + ref.path, ref.slot)
        return ref
    raise RuleViolation(f"no occurrence mapping through {rule!r}")


def _unmap_ref(d: MLL1Derivation, ref: OccRef) -> tuple[int, OccRef]:
    """Premise preimage of a free conclusion occurrence."""
    for k, p in enumerate(d.premises):
        for r, _, _ in free_occurrences(p.conclusion):
            if _map_ref(d, k, r) == ref:
                return k, r
    raise RuleViolation("occurrence has no premise preimage")


OccurrenceNet = frozenset


def occurrence_net(d: MLL1Derivation) -> OccurrenceNet:
    """Perfect matching of left and right free occurrences of the
    conclusion of a cut-free marked derivation, as (left, right) pairs."""
    _need(d.cut_count() == 0, "occurrence nets need cut-free derivations")
    net = _net(d)
    ctx = d.conclusion
    frees = free_occurrences(ctx)
    matched = [r for link in net for r in link]
    _need(sorted(matched) == sorted(r for r, _, _ in frees),
          "the net is not a perfect matching")
    for l, r in net:
        _need(var_at(ctx, l) == var_at(ctx, r), "a link joins different variables")
        _need(polarity(ctx, l) == LEFT and polarity(ctx, r) == RIGHT,
              "links must join a left and a right occurrence")
    return net


def _net(d: MLL1Derivation) -> OccurrenceNet:
    rule = d.rule
    if rule == "id":
        (a,) = d.params
        n = a.pred.arity
        links = []
        for slot in range(n):
            mine = OccRef(1, (), slot)
            mirror = OccRef(0, (), n - 1 - slot)
            pair = (mine, mirror) if slot < a.pred.left else (mirror, mine)
            links.append(pair)
        return frozenset(links)
    nets = [_net(p) for p in d.premises]
    if rule in ("par", "ex", "tensor"):
        out = set()
        for k, net in enumerate(nets):
            for l, r in net:
                out.add((_map_ref(d, k, l), _map_ref(d, k, r)))
        return frozenset(out)
    if rule in ("forall", "exists", "exists_prime"):
        (net,) = nets
        prem = d.premises[0].conclusion
        bound = _bound_refs(d)
        b_l = next(r for r in bound if polarity(prem, r) == LEFT)
        b_r = next(r for r in bound if polarity(prem, r) == RIGHT)
        _need(len(bound) == 2 and b_l != b_r, "the step must bind one pair")
        if rule == "forall":
            _need((b_l, b_r) in net, "the bound pair is not linked")
            rest = net - {(b_l, b_r)}
        elif (b_l, b_r) in net and rule == "exists":
            rest = net - {(b_l, b_r)}
        else:
            l2 = next(l for l, r in net if r == b_r)
            r2 = next(r for l, r in net if l == b_l)
            _need(rule == "exists" or (var_at(prem, l2) != var_at(prem, r2)),
                  "the extended step must glue two links")
            rest = (net - {(l2, b_r), (b_l, r2)}) | {(l2, r2)}
        return frozenset((_map_ref(d, 0, l), _map_ref(d, 0, r)) for l, r in rest)
    raise RuleViolation(f"no occurrence net through {rule!r}")


# -- derivation transformations -------------------------------------------------


def subst_free_derivation(d: MLL1Derivation, old: str, new: str) -> MLL1Derivation:
    """Rename a free variable throughout a cut-free derivation (``new``
    must be globally fresh)."""
    prems = tuple(subst_free_derivation(p, old, new) for p in d.premises)
    params = d.params
    if d.rule == "id":
        (a,) = params
        params = (FOAtom(a.pred, tuple(new if x == old else x for x in a.vars)),)
    elif d.rule in ("forall", "exists"):
        pos, x, body, v = params
        if x != old:
            body = subst_free(body, old, new)
        params = (pos, x, body, new if v == old else v)
    elif d.rule == "exists_prime":
        pos, s, t, x, v = params
        r = lambda y: new if y == old else y
        params = (pos, r(s), r(t), x, r(v))
    return derive_fo(d.rule, params, *prems)


def _quantifier_intro(d: MLL1Derivation, pos: int, path: tuple[str, ...]):
    """Trace a quantifier subformula to the node where it is introduced."""
    if d.rule in ("forall", "exists", "exists_prime") and pos == d.params[0] and path == ():
        return None
    # map the reference backwards through the last rule
    rule, params = d.rule, d.params
    if rule == "par":
        (p0,) = params
        if pos == p0:
            step, rest = path[0], path[1:]
            return (0, p0 if step == "L" else p0 + 1, rest)
        return (0, pos if pos < p0 else pos + 1, path)
    if rule == "ex":
        (p0,) = params
        swap = {p0: p0 + 1, p0 + 1: p0}
        return (0, swap.get(pos, pos), path)
    if rule == "tensor":
        pos_a, pos_b = params
        nl = len(d.premises[0].conclusion)
        if pos == nl - 1:
            step, rest = path[0], path[1:]
            return (0, pos_a, rest) if step == "L" else (1, pos_b, rest)
        if pos < nl - 1:
            return (0, pos if pos < pos_a else pos + 1, path)
        return (1, pos - nl if pos - nl < pos_b else pos - nl + 1, path)
    if rule in ("forall", "exists", "exists_prime"):
        p0 = params[0]
        if pos == p0:
            return (0, p0, path[1:])
        return (0, pos, path)
    raise RuleViolation(f"cannot trace a quantifier through {rule!r}")


def rebind(d: MLL1Derivation, pos: int, path: tuple[str, ...], new: str) -> MLL1Derivation:
    """Rename the bound variable of one quantifier occurrence in the
    conclusion of a cut-free derivation."""
    q = fo_sub(d.conclusion[pos], path)
    _need(isinstance(q, (FOForall, FOExists)), "not a quantifier occurrence")
    if q.var == new:
        return d
    back = _quantifier_intro(d, pos, path)
    if back is None:
        if d.rule == "exists_prime":
            p0, s, t, x, v = d.params
            return derive_fo("exists_prime", (p0, s, t, new, v), *d.premises)
        p0, x, body, v = d.params
        _need(not free_positions(body, new) and not captures(body, x, new),
              f"renaming the binder to {new!r} would capture")
        return derive_fo(d.rule, (p0, new, subst_free(body, x, new), v), *d.premises)
    k, ppos, ppath = back
    prems = list(d.premises)
    prems[k] = rebind(prems[k], ppos, ppath, new)
    params = d.params
    if d.rule in ("forall", "exists") and pos == d.params[0]:
        # the renamed quantifier sits inside this step's own formula
        p0, x, body, v = d.params
        params = (p0, x, rebind_formula(body, path[1:], new), v)
    return derive_fo(d.rule, params, *prems)


def _clear_binders(d: MLL1Derivation, refs, v: str, gen: FreshGen):
    """Rename any quantifier on ``v`` scoping over the given occurrences,
    returning the adjusted derivation and the renamed quantifier sites."""
    renamed = []
    for ref in refs:
        f = d.conclusion[ref.pos]
        qpath = ()
        g = f
        for step in ref.path:
            if isinstance(g, (FOForall, FOExists)) and g.var == v:
                w = gen.fresh(v)
                d = rebind(d, ref.pos, qpath, w)
                renamed.append((ref.pos, qpath, v))
                f = d.conclusion[ref.pos]
                g = fo_sub(f, qpath)
            if step == "L":
                g = g.left
            elif step == "R":
                g = g.right
            else:
                g = g.body
            qpath = qpath + (step,)
    return d, renamed


def _fo_support(d: MLL1Derivation) -> set[str]:
    names: set[str] = set()
    for node in d.nodes():
        for f in node.conclusion:
            for path, slot, x, _ in _walk(f):
                names.add(x)
                names.update(binders_above(f, path))
    return names


def relink(d: MLL1Derivation, e_l: OccRef, e_r: OccRef, v: str,
           gen: FreshGen | None = None) -> MLL1Derivation:
    """Rename one linked pair of free occurrences to ``v``.

    Requires ``(e_l, e_r)`` in the occurrence net of ``d`` and neither
    occurrence under a quantifier on ``v``; the result derives the
    conclusion with just these two occurrences replaced, has the same
    size, and its net replaces that one link.
    """
    gen = gen or FreshGen(_fo_support(d) | {v})
    _need((e_l, e_r) in occurrence_net(d), "the occurrences are not linked")
    for ref in (e_l, e_r):
        _need(v not in binders_above(d.conclusion[ref.pos], ref.path),
              f"the occurrence at {ref} sits under a quantifier on {v!r}")
    return _relink(d, e_l, e_r, v, gen)


def _relink(d: MLL1Derivation, e_l: OccRef, e_r: OccRef, v: str,
            gen: FreshGen) -> MLL1Derivation:
    rule, params = d.rule, d.params
    if rule == "id":
        (a,) = params
        slot = e_l.slot if e_l.pos == 1 else e_r.slot
        a2 = FOAtom(a.pred, tuple(v if s == slot else x for s, x in enumerate(a.vars)))
        return derive_fo("id", (a2,))
    if rule in ("par", "ex", "tensor"):
        (k, p_l), (k2, p_r) = _unmap_ref(d, e_l), _unmap_ref(d, e_r)
        _need(k == k2, "a link never spans tensor branches")
        prems = list(d.premises)
        prems[k] = _relink(prems[k], p_l, p_r, v, gen)
        return derive_fo(rule, params, *prems)
    if rule == "forall":
        pos, x, body, w = params
        (_, p_l), (_, p_r) = _unmap_ref(d, e_l), _unmap_ref(d, e_r)
        prem = d.premises[0]
        if w == v:  # keep the eigenvariable clear of the new name
            w2 = gen.fresh(w)
            prem = subst_free_derivation(prem, w, w2)
            body, w = body if x == w else subst_free(body, w, w2), w2
        prem = _relink(prem, p_l, p_r, v, gen)
        body = subst_at(body, [(r.path[1:], r.slot) for r in (e_l, e_r) if r.pos == pos], v)
        return derive_fo("forall", (pos, x, body, w), prem)
    if rule == "exists":
        pos, x, body, w = params
        prem = d.premises[0]
        net = _net(prem)
        (_, p_l), (_, p_r) = _unmap_ref(d, e_l), _unmap_ref(d, e_r)
        body2 = subst_at(body, [(r.path[1:], r.slot) for r in (e_l, e_r) if r.pos == pos], v)
        if (p_l, p_r) in net:
            prem = _relink(prem, p_l, p_r, v, gen)
            return derive_fo("exists", (pos, x, body2, w), prem)
        # the target link was glued here: relink both halves, then
        # requantify with the new name as the witness
        bound = _bound_refs(d)
        pctx = prem.conclusion
        b_l = next(r for r in bound if polarity(pctx, r) == LEFT)
        b_r = next(r for r in bound if polarity(pctx, r) == RIGHT)
        prem, ren1 = _clear_binders(prem, [b_r], v, gen)
        prem = _relink(prem, p_l, b_r, v, gen)
        prem, ren2 = _clear_binders(prem, [b_l], v, gen)
        prem = _relink(prem, b_l, p_r, v, gen)
        body3 = subst_at(prem.conclusion[pos], free_positions(body, x), x)
        out = derive_fo("exists", (pos, x, body3, v), prem)
        for qpos, qpath, name in ren1 + ren2:
            out = rebind(out, qpos, (("B",) + qpath) if qpos == pos else qpath, name)
        return out
    raise RuleViolation(f"relinking through {rule!r} is not supported")


def to_linguistic(d: MLL1Derivation, gen: FreshGen | None = None) -> MLL1Derivation:
    """Translate a cut-free derivation of a well-formed sequent into one
    whose every node is well-formed, introducing extended existential
    steps where a quantifier glued two links."""
    _need(d.cut_count() == 0, "the translation needs a cut-free derivation")
    _need(is_well_formed(d.conclusion), "the conclusion is not well-formed")
    gen = gen or FreshGen(_fo_support(d))
    out = _linguistic(d, gen)
    assert out.conclusion == d.conclusion
    return out


def _linguistic(d: MLL1Derivation, gen: FreshGen) -> MLL1Derivation:
    if d.rule == "id":
        return d
    if d.rule != "exists" or is_well_formed(d.premises[0].conclusion):
        prems = tuple(_linguistic(p, gen) for p in d.premises)
        return derive_fo(d.rule, d.params, *prems)
    pos, x, body, w = d.params
    prem = d.premises[0]
    pctx = prem.conclusion
    net = _net(prem)
    bound = _bound_refs(d)
    b_l = next(r for r in bound if polarity(pctx, r) == LEFT)
    b_r = next(r for r in bound if polarity(pctx, r) == RIGHT)
    if (b_l, b_r) in net:
        # the witness pair is linked: rename it apart and requantify
        e = gen.fresh(w)
        prem2 = _relink(prem, b_l, b_r, e, gen)
        return derive_fo("exists", (pos, x, body, e), _linguistic(prem2, gen))
    # the step glues two links: split the four occurrences with fresh
    # names, recurse on the now well-formed premise, and glue back with
    # the extended existential rule
    v_l = next(l for l, r in net if r == b_r)
    v_r = next(r for l, r in net if l == b_l)
    fu, fw = gen.fresh(w), gen.fresh(w)
    prem2 = _relink(_relink(prem, v_l, b_r, fu, gen), b_l, v_r, fw, gen)
    out = derive_fo("exists_prime", (pos, fw, fu, x, w), _linguistic(prem2, gen))
    return out


# -- translations to tensor sequents --------------------------------------------


def _tag(x: str, pol: str) -> str:
    return f"{x}!l" if pol == LEFT else f"{x}!r"


def eta_long_formula(f: FOFormula) -> Formula:
    """Occurrence-tagged translation: variables become index pairs
    ``x!l``/``x!r``, quantifiers become binders on the tagged pair."""
    if isinstance(f, FOAtom):
        vl = f.pred.left
        return Atom(f.pred.symbol, f.pred.positive,
                    tuple(_tag(x, LEFT) for x in f.vars[:vl]),
                    tuple(_tag(x, RIGHT) for x in f.vars[vl:]))
    if isinstance(f, FOTensor):
        return Tensor(eta_long_formula(f.left), eta_long_formula(f.right))
    if isinstance(f, FOPar):
        return Par(eta_long_formula(f.left), eta_long_formula(f.right))
    binder = Nabla if isinstance(f, FOForall) else Triangle
    return binder(_tag(f.var, RIGHT), _tag(f.var, LEFT), eta_long_formula(f.body))


def translate_eta_long(ctx: FOContext) -> Sequent:
    """Eta-long image of a well-formed sequent: tagged formulas glued by
    one delta per free variable."""
    _need(is_well_formed(ctx), "the translation needs a well-formed sequent")
    term = Term()
    for x in sorted(fo_free_vars(ctx)):
        term = term * delta(_tag(x, RIGHT), _tag(x, LEFT))
    out = Sequent(term, tuple(eta_long_formula(f) for f in ctx))
    validate(out)
    return out


def eta_reduced_formula(f: FOFormula, gen: FreshGen) -> Formula:
    """Variable-indexed translation: left occurrences become upper
    indices, right occurrences lower ones, quantifiers bind fresh pairs."""
    if isinstance(f, FOAtom):
        vl = f.pred.left
        return Atom(f.pred.symbol, f.pred.positive, f.vars[:vl], f.vars[vl:])
    if isinstance(f, FOTensor):
        return Tensor(eta_reduced_formula(f.left, gen), eta_reduced_formula(f.right, gen))
    if isinstance(f, FOPar):
        return Par(eta_reduced_formula(f.left, gen), eta_reduced_formula(f.right, gen))
    body = eta_reduced_formula(f.body, gen)
    u, v = gen.fresh(f.var), gen.fresh(f.var)
    binder = Nabla if isinstance(f, FOForall) else Triangle
    return binder(u, v, rename_free(body, {f.var: v}, {f.var: u}))


def translate_eta_reduced(ctx: FOContext, gen: FreshGen | None = None) -> Sequent:
    """Eta-reduced image of a well-formed sequent (defined up to the
    choice of bound indices)."""
    _need(is_well_formed(ctx), "the translation needs a well-formed sequent")
    gen = gen or FreshGen(fo_free_vars(ctx))
    out = Sequent(Term(), tuple(eta_reduced_formula(f, gen) for f in ctx))
    validate(out)
    return out


# -- constructive correspondence ------------------------------------------------


def constructive_correspondence(d):
    """Map a linguistic derivation to an eta-long tensor derivation of
    the translated sequent, or a cut-free eta-long tensor derivation back
    to the linguistic derivation it translates."""
    if isinstance(d, MLL1Derivation):
        return _eta_of_fo(d)
    return _fo_of_eta(d)


def _eta_of_fo(d: MLL1Derivation) -> Derivation:
    check_mll1(d, linguistic=True)
    out = _eta_node(d)
    assert out.conclusion == translate_eta_long(d.conclusion)
    return out


def _eta_node(d: MLL1Derivation) -> Derivation:
    rule, params = d.rule, d.params
    if rule == "id":
        (a,) = params
        pos_atom = eta_long_formula(a)
        neg_atom = eta_long_formula(fo_dual(a))
        return derive(ETA, "id_eta", (neg_atom, pos_atom.upper, pos_atom.lower))
    prems = [_eta_node(p) for p in d.premises]
    if rule in ("par", "ex", "tensor"):
        return derive(ETA, rule, params, *prems)
    if rule == "forall":
        pos, x, body, w = params
        return derive(ETA, "nabla_alpha",
                      (pos, _tag(x, RIGHT), _tag(x, LEFT), _tag(w, RIGHT), _tag(w, LEFT)),
                      prems[0])
    if rule == "exists":
        pos, x, body, w = params
        step = derive(ETA, "triangle_alpha",
                      (pos, _tag(x, RIGHT), _tag(x, LEFT), _tag(w, RIGHT), _tag(w, LEFT)),
                      prems[0])
        return derive(ETA, "beta", (translate_eta_long(d.conclusion).term,), step)
    if rule == "exists_prime":
        pos, s, t, x, v = params
        prem = rename_derivation(
            prems[0], {_tag(s, RIGHT): _tag(v, RIGHT), _tag(t, LEFT): _tag(v, LEFT)})
        step = derive(ETA, "triangle_alpha",
                      (pos, _tag(x, RIGHT), _tag(x, LEFT), _tag(t, RIGHT), _tag(s, LEFT)),
                      prem)
        return derive(ETA, "beta", (translate_eta_long(d.conclusion).term,), step)
    raise RuleViolation(f"{rule!r} has no eta-long image")


def _var_of(upper: str, lower: str) -> str:
    """Variable name carried by a delta linking a lower context occurrence
    (the delta's upper index) to an upper one (its lower index)."""
    if upper.endswith("!r") and lower.endswith("!l") and upper[:-2] == lower[:-2]:
        return upper[:-2]
    return f"{upper}~{lower}"


def _delta_by_upper(term: Term, i: str):
    for f in term.beta_normalize().factors:
        if getattr(f, "word", None) == () and f.upper == i:
            return f
    raise MalformedJudgement(f"no delta factor with upper index {i!r}")


def _delta_by_lower(term: Term, j: str):
    for f in term.beta_normalize().factors:
        if getattr(f, "word", None) == () and f.lower == j:
            return f
    raise MalformedJudgement(f"no delta factor with lower index {j!r}")


def _pick_binder(mu: str, nu: str, prem_formula: FOFormula, w: str) -> str:
    name = _var_of(mu, nu)
    if name in fo_free_vars(prem_formula) or captures(prem_formula, w, name):
        name = f"{mu}~{nu}~b"
    return name


def _fo_of_eta(d: Derivation) -> MLL1Derivation:
    if d.system != ETA:
        raise RuleViolation("the inverse translation expects the eta-long system")
    out = _fo_node(d)
    check_mll1(out, linguistic=True)
    target = Sequent(d.conclusion.term.beta_normalize(), d.conclusion.context)
    if not equivalent(target, translate_eta_long(out.conclusion), alpha=True, beta=True):
        raise MalformedJudgement("the derivation is not an eta-long translation image")
    return out


def _fo_node(d: Derivation) -> MLL1Derivation:
    rule, params = d.rule, d.params
    if rule == "id_eta":
        a, upper2, lower2 = params
        n, m = len(a.upper), len(a.lower)
        sig = PredicateSignature(a.name, m, n, not a.positive)
        vars_left = [_var_of(a.lower[m - 1 - k], upper2[k]) for k in range(m)]
        vars_right = [_var_of(lower2[t], a.upper[n - 1 - t]) for t in range(n)]
        return derive_fo("id", (FOAtom(sig, tuple(vars_left + vars_right)),))
    if rule == "beta":
        return _fo_node(d.premises[0])
    prems = [_fo_node(p) for p in d.premises]
    if rule in ("par", "ex", "tensor"):
        return derive_fo(rule, params, *prems)
    if rule == "nabla_alpha":
        pos, mu, nu, i, j = params
        term = d.premises[0].conclusion.term
        f = _delta_by_upper(term, i)
        if f != _delta_by_lower(term, j):
            raise MalformedJudgement("the bound occurrences are not linked")
        w = _var_of(i, j)
        prem_f = prems[0].conclusion[pos]
        x = _pick_binder(mu, nu, prem_f, w)
        return derive_fo("forall", (pos, x, subst_free(prem_f, w, x), w), prems[0])
    if rule == "triangle_alpha":
        pos, mu, nu, i, j = params
        term = d.premises[0].conclusion.term
        fu, fl = _delta_by_upper(term, i), _delta_by_lower(term, j)
        prem_f = prems[0].conclusion[pos]
        if fu == fl:
            w = _var_of(i, j)
            x = _pick_binder(mu, nu, prem_f, w)
            return derive_fo("exists", (pos, x, subst_free(prem_f, w, x), w), prems[0])
        t, s = _var_of(fu.upper, fu.lower), _var_of(fl.upper, fl.lower)
        v = _var_of(fl.upper, fu.lower)
        x = _pick_binder(mu, nu, prem_f, s)
        return derive_fo("exists_prime", (pos, s, t, x, v), prems[0])
    raise RuleViolation(f"{rule!r} has no first order image")


# -- Lambek types ---------------------------------------------------------------


@dataclass(frozen=True)
class LCProp:
    name: str


@dataclass(frozen=True)
class LCOver:
    num: "LCFormula"  # B in B/A
    den: "LCFormula"  # A


@dataclass(frozen=True)
class LCUnder:
    den: "LCFormula"  # A in A\B
    num: "LCFormula"  # B


@dataclass(frozen=True)
class LCBullet:
    left: "LCFormula"
    right: "LCFormula"


LCFormula = Union[LCProp, LCOver, LCUnder, LCBullet]


def lc_to_mill1(f: LCFormula, l: str, r: str, gen: FreshGen | None = None) -> FOFormula:
    """First order image of a Lambek type, parameterised by a left and a
    right endpoint variable; propositional symbols become binary
    predicates of valency (1, 1)."""
    gen = gen or FreshGen({l, r}, prefix="x")
    if isinstance(f, LCProp):
        return FOAtom(PredicateSignature(f.name, 1, 1), (l, r))
    x = gen.fresh("x")
    if isinstance(f, LCOver):
        return FOForall(x, fo_implies(lc_to_mill1(f.den, r, x, gen),
                                      lc_to_mill1(f.num, l, x, gen)))
    if isinstance(f, LCUnder):
        return FOForall(x, fo_implies(lc_to_mill1(f.den, x, l, gen),
                                      lc_to_mill1(f.num, x, r, gen)))
    return FOExists(x, FOTensor(lc_to_mill1(f.left, l, x, gen),
                                lc_to_mill1(f.right, x, r, gen)))


def lc_to_ettc(f: LCFormula, i: str, j: str, gen: FreshGen | None = None) -> Formula:
    """Tensor-type image of a Lambek type with endpoints ``i`` (upper)
    and ``j`` (lower)."""
    gen = gen or FreshGen({i, j})
    if isinstance(f, LCProp):
        return Atom(f.name, True, (i,), (j,))
    mu, nu = gen.fresh(), gen.fresh()
    if isinstance(f, LCOver):
        from .formulas import dual
        return Nabla(mu, nu, Par(lc_to_ettc(f.num, i, mu, gen),
                                 dual(lc_to_ettc(f.den, j, nu, gen))))
    if isinstance(f, LCUnder):
        from .formulas import dual
        return Nabla(mu, nu, Par(dual(lc_to_ettc(f.den, mu, i, gen)),
                                 lc_to_ettc(f.num, nu, j, gen)))
    return Triangle(mu, nu, Tensor(lc_to_ettc(f.left, i, mu, gen),
                                   lc_to_ettc(f.right, nu, j, gen)))


def mill1_sequent(antecedents, succedent: FOFormula) -> FOContext:
    """One-sided image of a two-sided sequent: the succedent followed by
    the duals of the antecedents in reverse order."""
    return (succedent,) + tuple(fo_dual(a) for a in reversed(tuple(antecedents)))


# -- surface syntax -------------------------------------------------------------


def show_fo(f: FOFormula) -> str:
    if isinstance(f, FOAtom):
        head = f.pred.symbol if f.pred.positive else "~" + f.pred.symbol
        return f"{head}({', '.join(f.vars)})"
    if isinstance(f, FOTensor):
        return f"({show_fo(f.left)} * {show_fo(f.right)})"
    if isinstance(f, FOPar):
        return f"({show_fo(f.left)} # {show_fo(f.right)})"
    q = "forall" if isinstance(f, FOForall) else "exists"
    return f"{q} {f.var} {show_fo(f.body)}"


def show_fo_context(ctx: FOContext) -> str:
    return "|- " + ", ".join(show_fo(f) for f in ctx)


def parse_fo(text: str, valencies: dict[str, tuple[int, int]]) -> FOFormula:
    """Parse ``p(x,y)``, ``~p(y,x)``, ``A * B``, ``A # B``, ``forall x A``
    and ``exists x A`` with the given predicate valencies."""
    from .surface import tokenize
    from .errors import ParseError

    toks = tokenize(text)
    pos = [0]

    def peek():
        return toks[pos[0]]

    def eat(kind=None, value=None):
        k, v = toks[pos[0]]
        if (kind and k != kind) or (value and v != value):
            raise ParseError(f"expected {value or kind}, got {v!r}")
        pos[0] += 1
        return v

    def atom(negative: bool) -> FOAtom:
        name = eat("name")
        eat("punct", "(")
        vs = [eat("name")]
        while peek() == ("punct", ","):
            eat()
            vs.append(eat("name"))
        eat("punct", ")")
        if name not in valencies:
            raise ParseError(f"unknown predicate {name!r}")
        vl, vr = valencies[name]
        sig = PredicateSignature(name, vl, vr)
        if negative:
            sig = sig.dual()
        return FOAtom(sig, tuple(vs))

    def unary() -> FOFormula:
        k, v = peek()
        if k == "punct" and v == "(":
            eat()
            f = par_level()
            eat("punct", ")")
            return f
        if k == "punct" and v == "~":
            eat()
            return atom(negative=True)
        if k == "name" and v in ("forall", "exists"):
            eat()
            x = eat("name")
            body = unary()
            return FOForall(x, body) if v == "forall" else FOExists(x, body)
        return atom(negative=False)

    def tensor_level() -> FOFormula:
        f = unary()
        while peek() == ("punct", "*"):
            eat()
            f = FOTensor(f, unary())
        return f

    def par_level() -> FOFormula:
        f = tensor_level()
        while peek() == ("punct", "#"):
            eat()
            f = FOPar(f, tensor_level())
        return f

    out = par_level()
    if peek()[0] != "eof":
        raise ParseError(f"trailing input at {peek()[1]!r}")
    return out


def show_lc(f: LCFormula) -> str:
    if isinstance(f, LCProp):
        return f.name
    if isinstance(f, LCOver):
        return f"({show_lc(f.num)} / {show_lc(f.den)})"
    if isinstance(f, LCUnder):
        return f"({show_lc(f.den)} \\ {show_lc(f.num)})"
    return f"({show_lc(f.left)} . {show_lc(f.right)})"
