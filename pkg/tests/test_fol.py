"""First order layer: marking, nets, relinking, translations, correspondence."""

import random

import pytest

from conftest import random_mll1_derivation, random_wf_mll1
from ettc.errors import ParseError, RuleViolation
from ettc.fol import (FOAtom, FOExists, FOForall, FOPar, FOTensor, LCBullet,
                      LCOver, LCProp, LCUnder, OccRef, PredicateSignature,
                      apply_exists_prime, check_mll1, classify_sequent,
                      constructive_correspondence, derive_fo, eta_long_formula,
                      eta_reduced_formula, fo_dual, fo_free_vars,
                      free_occurrences, is_fo_derivation, is_well_formed,
                      lc_to_ettc, lc_to_mill1, mill1_sequent, occurrence_net,
                      parse_fo, polarity, relink, show_fo, show_fo_context,
                      show_lc, subst_free, to_linguistic, translate_eta_long,
                      translate_eta_reduced, var_at)
from ettc.formulas import Atom, Nabla, Par, Tensor, Triangle
from ettc.fresh import FreshGen
from ettc.judgements import Sequent, equivalent, validate
from ettc.sequent import check as check_tensor
from ettc.terms import Term

SA = PredicateSignature("a", 1, 1)


def a(x, y):
    return FOAtom(SA, (x, y))


def abar(x, y):
    return FOAtom(SA.dual(), (x, y))


# -- signatures, duality, polarity ---------------------------------------------


def test_valency_splits_slots():
    f = FOAtom(PredicateSignature("p", 1, 1), ("x", "y"))
    ctx = (f,)
    assert polarity(ctx, OccRef(0, (), 0)) == "left"
    assert polarity(ctx, OccRef(0, (), 1)) == "right"


def test_dual_swaps_valency_and_reverses_arguments():
    sig = PredicateSignature("p", 2, 1)
    assert sig.dual().valency == (1, 2)
    assert sig.dual().dual() == sig
    f = FOAtom(sig, ("x", "y", "z"))
    assert fo_dual(f) == FOAtom(sig.dual(), ("z", "y", "x"))
    assert fo_dual(fo_dual(f)) == f


def test_dual_is_involutive_on_compounds():
    f = FOForall("x", FOPar(a("x", "y"), FOTensor(abar("y", "x"), a("z", "z"))))
    assert fo_dual(fo_dual(f)) == f
    g = fo_dual(f)
    assert isinstance(g, FOExists)
    assert isinstance(g.body, FOTensor)


def test_arity_mismatch_rejected():
    with pytest.raises(Exception):
        FOAtom(SA, ("x",))


# -- marking ---------------------------------------------------------------------


def test_classify_well_formed_and_marked():
    # each variable once left and once right: well-formed
    wf = (a("e", "t"), abar("t", "e"))
    assert classify_sequent(wf) == "well_formed"
    # repeated variables across a tensor: marked but not well-formed
    m = (a("e", "t"), FOTensor(abar("t", "e"), a("e", "s")), abar("s", "e"))
    assert classify_sequent(m) == "marked"


def test_classify_unmarked_quantifier():
    # the quantifier binds a left occurrence only
    q = FOAtom(PredicateSignature("q", 1, 1), ("z", "w"))
    un = (FOForall("x", FOPar(a("x", "y"), q)),)
    assert classify_sequent(un) == "unmarked"
    # binding one left and one right occurrence is marked
    ok = (FOForall("x", a("x", "x")),)
    assert classify_sequent(ok) == "well_formed"


def test_cut_free_marked_derivations_are_marked_throughout():
    rng = random.Random(5)
    for _ in range(50):
        d = random_mll1_derivation(rng)
        check_mll1(d)  # asserts markedness at every node


# -- rules -----------------------------------------------------------------------


def test_id_and_par_and_ex():
    d = derive_fo("id", (a("x", "y"),))
    assert d.conclusion == (abar("y", "x"), a("x", "y"))
    p = derive_fo("par", (0,), d)
    assert p.conclusion == (FOPar(abar("y", "x"), a("x", "y")),)
    e = derive_fo("ex", (0,), d)
    assert e.conclusion == (a("x", "y"), abar("y", "x"))


def test_tensor_may_share_variables():
    d1 = derive_fo("id", (a("e", "t"),))
    d2 = derive_fo("id", (a("e", "s"),))
    d = derive_fo("tensor", (0, 1), d1, d2)
    assert d.conclusion == (a("e", "t"), FOTensor(abar("t", "e"), a("e", "s")),
                            abar("s", "e"))
    check_mll1(d)


def test_forall_eigencondition():
    d = derive_fo("par", (0,), derive_fo("id", (a("e1", "e2"),)))
    body = FOPar(abar("e2", "x"), a("x", "e2"))
    f = derive_fo("forall", (0, "x", body, "e1"), d)
    assert f.conclusion == (FOForall("x", body),)
    # the eigenvariable may not stay free elsewhere
    d2 = derive_fo("id", (a("e1", "e2"),))
    with pytest.raises(RuleViolation):
        derive_fo("forall", (1, "x", a("x", "e2"), "e1"), d2)


def test_cut_rule():
    d1 = derive_fo("id", (a("x", "y"),))
    d2 = derive_fo("id", (abar("y", "x"),))
    d = derive_fo("cut", (1, 1), d1, d2)
    assert d.conclusion == (abar("y", "x"), a("x", "y"))
    assert d.cut_count() == 1


def test_exists_needs_witness_instance():
    d = derive_fo("id", (a("e", "e"),))
    with pytest.raises(RuleViolation):
        derive_fo("exists", (1, "x", a("x", "y"), "e"), d)


# -- the extended existential step ------------------------------------------------


def eq9_premise_derivation():
    d1 = derive_fo("id", (a("y", "s"),))
    d2 = derive_fo("id", (a("z", "t"),))
    d3 = derive_fo("tensor", (0, 1), d1, d2)
    return derive_fo("ex", (0,), derive_fo("par", (0,), d3))


def test_exists_prime_glues_two_variables():
    prem = (abar("t", "z"), FOPar(a("y", "s"), FOTensor(abar("s", "y"), a("z", "t"))))
    out = apply_exists_prime(prem, 1, "s", "t", "x", "v")
    assert out == (abar("v", "z"),
                   FOExists("x", FOPar(a("y", "v"), FOTensor(abar("x", "y"), a("z", "x")))))
    assert is_well_formed(out)


def test_exists_prime_needs_well_formed_premise():
    prem = (a("e", "e"), abar("e", "e"))
    with pytest.raises(RuleViolation):
        apply_exists_prime(prem, 0, "e", "e", "x", "v")


def test_exists_prime_as_rule():
    d = derive_fo("exists_prime", (1, "s", "t", "x", "v"), eq9_premise_derivation())
    check_mll1(d, linguistic=True)
    with pytest.raises(RuleViolation):
        check_mll1(d)  # the extended rule needs linguistic mode


# -- occurrence nets ---------------------------------------------------------------


def test_axiom_net_matches_mirrored_slots():
    d = derive_fo("id", (a("e1", "e2"),))
    assert occurrence_net(d) == frozenset({
        (OccRef(0, (), 0), OccRef(1, (), 1)),   # e2
        (OccRef(1, (), 0), OccRef(0, (), 1)),   # e1
    })


def test_forall_erases_the_witness_link():
    d = derive_fo("par", (0,), derive_fo("id", (a("e1", "e2"),)))
    body = FOPar(abar("e2", "x"), a("x", "e2"))
    f = derive_fo("forall", (0, "x", body, "e1"), d)
    net = occurrence_net(f)
    assert len(net) == 1
    (l, r), = net
    assert var_at(f.conclusion, l) == var_at(f.conclusion, r) == "e2"


def test_exists_prime_net_glues_links():
    d = derive_fo("exists_prime", (1, "s", "t", "x", "v"), eq9_premise_derivation())
    net = occurrence_net(d)
    assert sorted(var_at(d.conclusion, l) for l, r in net) == ["v", "y", "z"]


def test_nets_are_perfect_matchings():
    rng = random.Random(7)
    for _ in range(60):
        d = random_mll1_derivation(rng)
        net = occurrence_net(d)  # raises unless a perfect matching
        ctx = d.conclusion
        for l, r in net:
            assert var_at(ctx, l) == var_at(ctx, r)
            assert polarity(ctx, l) == "left" and polarity(ctx, r) == "right"


def test_net_agrees_with_translation_term():
    rng = random.Random(11)
    for _ in range(30):
        d = random_wf_mll1(rng)
        net = occurrence_net(d)
        linked = {var_at(d.conclusion, l) for l, _ in net}
        term = translate_eta_long(d.conclusion).term
        deltas = {f.upper[:-2] for f in term.factors}
        assert linked == deltas == set(fo_free_vars(d.conclusion))


# -- relinking ----------------------------------------------------------------------


def test_relink_renames_one_link():
    d = eq9_premise_derivation()
    net = occurrence_net(d)
    l, r = next((l, r) for l, r in net if var_at(d.conclusion, l) == "s")
    d2 = relink(d, l, r, "v9")
    assert d2.size() == d.size()
    assert occurrence_net(d2) == net
    assert var_at(d2.conclusion, l) == var_at(d2.conclusion, r) == "v9"
    # all other occurrences untouched
    for ref, x, _ in free_occurrences(d.conclusion):
        if ref not in (l, r):
            assert var_at(d2.conclusion, ref) == x


def test_relink_rejects_unlinked_pairs():
    d = eq9_premise_derivation()
    refs = [ref for ref, x, pol in free_occurrences(d.conclusion)]
    net = occurrence_net(d)
    l = next(r for r, x, p in free_occurrences(d.conclusion) if p == "left")
    bad = next(r for r in refs if all(link != (l, r) for link in net)
               and polarity(d.conclusion, r) == "right")
    with pytest.raises(RuleViolation):
        relink(d, l, bad, "v")


def test_relink_random_invariants():
    rng = random.Random(13)
    for k in range(60):
        d = random_mll1_derivation(rng)
        net = occurrence_net(d)
        if not net:
            continue
        l, r = sorted(net)[rng.randrange(len(net))]
        d2 = relink(d, l, r, f"f{k}")
        assert d2.size() == d.size()
        assert occurrence_net(d2) == net
        check_mll1(d2)


# -- the linguistic translation ------------------------------------------------------


def glued_exists_derivation():
    g1 = derive_fo("id", (a("y", "w"),))
    g2 = derive_fo("id", (a("z", "w"),))
    g3 = derive_fo("ex", (0,), derive_fo("par", (0,), derive_fo("tensor", (0, 1), g1, g2)))
    body = FOPar(a("y", "w"), FOTensor(abar("x", "y"), a("z", "x")))
    return derive_fo("exists", (1, "x", body, "w"), g3)


def test_to_linguistic_introduces_extended_steps():
    d = glued_exists_derivation()
    assert is_well_formed(d.conclusion)
    assert not is_well_formed(d.premises[0].conclusion)
    l = to_linguistic(d)
    assert l.conclusion == d.conclusion
    assert "exists_prime" in {n.rule for n in l.nodes()}
    check_mll1(l, linguistic=True)


def test_to_linguistic_handles_erased_witness_links():
    h1 = derive_fo("id", (a("e1", "e2"),))
    h2 = derive_fo("id", (FOAtom(PredicateSignature("b", 1, 1), ("e1", "e3")),))
    h4 = derive_fo("par", (0,), derive_fo("tensor", (1, 1), h1, h2))
    body = FOPar(abar("e2", "x"),
                 FOTensor(a("x", "e2"), FOAtom(PredicateSignature("b", 1, 1), ("e1", "e3"))))
    d = derive_fo("exists", (0, "x", body, "e1"), h4)
    assert not is_well_formed(d.premises[0].conclusion)
    l = to_linguistic(d)
    assert l.conclusion == d.conclusion
    check_mll1(l, linguistic=True)


def test_to_linguistic_random():
    rng = random.Random(17)
    for _ in range(40):
        d = random_wf_mll1(rng)
        l = to_linguistic(d)
        assert l.conclusion == d.conclusion
        assert l.cut_count() == 0
        assert occurrence_net(l) == occurrence_net(d)
        check_mll1(l, linguistic=True)


# -- translations into tensor sequents -----------------------------------------------


def test_eta_long_formula_shapes():
    f = FOForall("x", a("x", "x"))
    assert eta_long_formula(f) == Nabla("x!r", "x!l",
                                        Atom("a", True, ("x!l",), ("x!r",)))
    g = FOExists("x", a("x", "x"))
    assert isinstance(eta_long_formula(g), Triangle)


def test_eta_reduced_formula_shape():
    f = FOForall("x", a("x", "x"))
    out = eta_reduced_formula(f, FreshGen())
    assert isinstance(out, Nabla)
    # bound pair renamed apart: A^j_i under nab^i_j
    assert out.body == Atom("a", True, (out.down,), (out.up,))


def test_translation_of_glued_conclusion_validates():
    ctx = (abar("v", "z"),
           FOExists("x", FOPar(a("y", "v"), FOTensor(abar("x", "y"), a("z", "x")))))
    long = translate_eta_long(ctx)
    validate(long)
    assert len(long.term.factors) == 3  # one delta per free variable
    red = translate_eta_reduced(ctx)
    validate(red)
    assert red.term == Term()
    assert equivalent(long, red, eta=True)


def test_translations_require_well_formed_input():
    with pytest.raises(RuleViolation):
        translate_eta_long((a("e", "t"), a("e", "s")))


def test_translations_agree_up_to_eta_random():
    rng = random.Random(19)
    for _ in range(40):
        d = random_wf_mll1(rng)
        assert equivalent(translate_eta_long(d.conclusion),
                          translate_eta_reduced(d.conclusion), eta=True)


# -- constructive correspondence -----------------------------------------------------


def test_correspondence_on_axiom():
    d = derive_fo("id", (a("x", "y"),))
    e = constructive_correspondence(d)
    assert e.rule == "id_eta"
    assert e.conclusion == translate_eta_long(d.conclusion)
    check_tensor(e)


def test_correspondence_forward_and_back():
    d = derive_fo("exists_prime", (1, "s", "t", "x", "v"), eq9_premise_derivation())
    e = constructive_correspondence(d)
    check_tensor(e)
    assert e.conclusion == translate_eta_long(d.conclusion)
    back = constructive_correspondence(e)
    assert back.conclusion == d.conclusion
    assert back.rule == "exists_prime"


def test_correspondence_random_round_trips():
    rng = random.Random(23)
    for _ in range(40):
        d = to_linguistic(random_wf_mll1(rng))
        e = constructive_correspondence(d)
        check_tensor(e)
        assert e.conclusion == translate_eta_long(d.conclusion)
        back = constructive_correspondence(e)
        assert back.conclusion == d.conclusion
        check_mll1(back, linguistic=True)


# -- Lambek types ----------------------------------------------------------------------


def test_lc_to_mill1_shapes():
    np, s = LCProp("np"), LCProp("s")
    assert lc_to_mill1(np, "l", "r") == FOAtom(PredicateSignature("np", 1, 1), ("l", "r"))
    over = lc_to_mill1(LCOver(s, np), "l", "r")
    assert isinstance(over, FOForall)
    x = over.var
    assert over.body == FOPar(FOAtom(PredicateSignature("s", 1, 1), ("l", x)),
                              fo_dual(FOAtom(PredicateSignature("np", 1, 1), ("r", x))))
    bullet = lc_to_mill1(LCBullet(np, s), "l", "r")
    assert isinstance(bullet, FOExists)
    y = bullet.var
    assert bullet.body == FOTensor(FOAtom(PredicateSignature("np", 1, 1), ("l", y)),
                                   FOAtom(PredicateSignature("s", 1, 1), (y, "r")))


def test_lc_to_ettc_shapes():
    np, s = LCProp("np"), LCProp("s")
    assert lc_to_ettc(np, "i", "j") == Atom("np", True, ("i",), ("j",))
    over = lc_to_ettc(LCOver(s, np), "i", "j")
    assert isinstance(over, Nabla)
    mu, nu = over.up, over.down
    assert over.body == Par(Atom("s", True, ("i",), (mu,)),
                            Atom("np", False, (nu,), ("j",)))
    under = lc_to_ettc(LCUnder(np, s), "i", "j")
    assert isinstance(under, Nabla)
    mu, nu = under.up, under.down
    assert under.body == Par(Atom("np", False, ("i",), (mu,)),
                             Atom("s", True, (nu,), ("j",)))
    bullet = lc_to_ettc(LCBullet(np, s), "i", "j")
    assert isinstance(bullet, Triangle)
    mu, nu = bullet.up, bullet.down
    assert bullet.body == Tensor(Atom("np", True, ("i",), (mu,)),
                                 Atom("s", True, (nu,), ("j",)))


def test_lc_translations_agree_up_to_alpha_eta():
    # the two routes meet for propositions, right slashes and products
    np, s = LCProp("np"), LCProp("s")
    for f in (np, LCOver(s, np), LCBullet(np, s), LCOver(LCBullet(np, s), np)):
        red = eta_reduced_formula(lc_to_mill1(f, "i", "j"), FreshGen({"i", "j"}))
        direct = lc_to_ettc(f, "i", "j")
        assert equivalent(Sequent(Term(), (red,)), Sequent(Term(), (direct,)), alpha=True)


def test_mill1_sequent_reverses_antecedents():
    np, s = LCProp("np"), LCProp("s")
    ant = [lc_to_mill1(np, "a", "b"), lc_to_mill1(s, "b", "c")]
    suc = lc_to_mill1(s, "a", "c")
    out = mill1_sequent(ant, suc)
    assert out == (suc, fo_dual(ant[1]), fo_dual(ant[0]))


# -- surface syntax ----------------------------------------------------------------------


def test_parse_and_show_round_trip():
    vals = {"a": (1, 1), "q": (2, 1)}
    f = parse_fo("forall x (a(x, y) # ~q(z, x, w))", vals)
    assert isinstance(f, FOForall)
    assert parse_fo(show_fo(f), vals) == f
    g = parse_fo("exists x (a(x, y) * a(y, x))", vals)
    assert isinstance(g, FOExists)
    assert show_fo_context((f,)).startswith("|- ")


def test_parse_rejects_unknown_predicates():
    with pytest.raises(ParseError):
        parse_fo("zz(x)", {"a": (1, 1)})
