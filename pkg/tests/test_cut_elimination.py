"""Cut elimination: lifting, permutation, principal reduction, embedding."""

from __future__ import annotations

import random

import pytest

from conftest import random_cut_derivation, random_formula

from ettc.cuts import (eliminate_cuts, eta_long_lift, is_principal,
                       push_side_cuts, reduce_principal)
from ettc.errors import RuleViolation
from ettc.formulas import Atom, Nabla, Par, Tensor, dual
from ettc.fresh import FreshGen
from ettc.judgements import eta_expand
from ettc.sequent import ETA, ETTC, check, derive, identity_expansion


def cut_free(d) -> bool:
    return d.rule != "cut" and all(cut_free(p) for p in d.premises)


def expand_with(seq, pairs):
    for index, fresh in pairs:
        seq = eta_expand(seq, index, fresh, "upper")
    return seq


def simple_cut():
    """Cut an axiom against the identity expansion of its first formula."""
    a = Atom("p", True, ("i",), ("j",))
    d = derive(ETTC, "id", (a,))
    bridge = identity_expansion(a, FreshGen({"i", "j"}))
    return derive(ETTC, "cut", (0, 0), d, bridge)


def tensor_par_cut():
    a = Atom("p", True, ("i",), ("j",))
    b = Atom("q", True, ("k",), ("l",))
    left = derive(ETTC, "tensor", (0, 0),
                  derive(ETTC, "id", (a,)), derive(ETTC, "id", (b,)))
    f = left.conclusion.context[1]
    assert f == Tensor(a, b)
    bridge = identity_expansion(f, FreshGen({"i", "j", "k", "l"}))
    return derive(ETTC, "cut", (1, 0), left, bridge)


def binder_cut():
    f = Nabla("x", "z", Atom("p", False, ("z",), ("x",)))
    d = identity_expansion(f)
    bridge = identity_expansion(d.conclusion.context[1], FreshGen({"x", "z"}))
    return derive(ETTC, "cut", (1, 0), d, bridge)


@pytest.mark.parametrize("build", [simple_cut, tensor_par_cut, binder_cut])
def test_eliminate_cuts_restores_conclusion_exactly(build):
    d = build()
    out = eliminate_cuts(d)
    check(out)
    assert out.system == ETTC
    assert cut_free(out)
    assert out.conclusion == d.conclusion


def test_lift_conclusion_is_an_expansion_of_the_original():
    d = tensor_par_cut()
    lifted, pairs = eta_long_lift(d)
    check(lifted)
    assert lifted.system == ETA
    assert lifted.conclusion == expand_with(d.conclusion, pairs)


def test_push_side_cuts_preserves_size_and_conclusion():
    lifted, _ = eta_long_lift(tensor_par_cut())
    pushed = push_side_cuts(lifted)
    assert pushed.conclusion == lifted.conclusion
    assert pushed.logical_size() == lifted.logical_size()


def innermost_cuts(d):
    if d.rule == "cut" and not any(p.cut_count() for p in d.premises):
        yield d
    for p in d.premises:
        yield from innermost_cuts(p)


def test_push_side_cuts_makes_innermost_cuts_principal():
    lifted, _ = eta_long_lift(binder_cut())
    pushed = push_side_cuts(lifted)
    for cut in innermost_cuts(pushed):
        assert is_principal(cut)


def test_reduce_principal_strictly_decreases_logical_size():
    lifted, _ = eta_long_lift(simple_cut())
    pushed = push_side_cuts(lifted)
    red = reduce_principal(pushed)
    assert red.logical_size() < pushed.logical_size()
    assert red.conclusion == pushed.conclusion


def test_reduce_principal_requires_a_principal_cut():
    d = identity_expansion(Atom("p", True, ("i",), ("j",)))
    lifted, _ = eta_long_lift(d)
    with pytest.raises(RuleViolation):
        reduce_principal(lifted)


def test_eliminate_cuts_rejects_eta_long_input():
    lifted, _ = eta_long_lift(simple_cut())
    with pytest.raises(RuleViolation):
        eliminate_cuts(lifted)


def test_stacked_cuts_terminate():
    a = Atom("r", True, ("i",), ("j",))
    d = derive(ETTC, "id", (a,))
    gen = FreshGen({"i", "j"}, prefix="w")
    for _ in range(3):
        d = derive(ETTC, "cut", (0, 0), d,
                   identity_expansion(d.conclusion.context[0], gen))
    out = eliminate_cuts(d)
    assert cut_free(out) and out.conclusion == d.conclusion


def test_random_derivations_round_trip():
    rng = random.Random(1234)
    for _ in range(40):
        d = random_cut_derivation(rng, max_size=24, max_cuts=3)
        check(d)
        out = eliminate_cuts(d)
        assert cut_free(out)
        assert out.conclusion == d.conclusion


def test_random_push_and_reduce_invariants():
    rng = random.Random(99)
    for _ in range(25):
        d = random_cut_derivation(rng, max_size=20, max_cuts=2)
        lifted, pairs = eta_long_lift(d)
        assert lifted.conclusion == expand_with(d.conclusion, pairs)
        pushed = push_side_cuts(lifted)
        assert pushed.conclusion == lifted.conclusion
        assert pushed.logical_size() == lifted.logical_size()
        if pushed.cut_count():
            red = reduce_principal(pushed)
            assert red.logical_size() < pushed.logical_size()
            assert red.conclusion == pushed.conclusion


def test_cut_free_inputs_pass_through():
    rng = random.Random(7)
    gen = FreshGen(prefix="u")
    for _ in range(10):
        d = identity_expansion(random_formula(rng, gen, 2), gen)
        out = eliminate_cuts(d)
        assert cut_free(out)
        assert out.conclusion == d.conclusion
