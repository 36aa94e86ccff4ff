"""Formulas: duality, free indices, alpha equivalence, well-formedness."""

import pytest
from hypothesis import given

from conftest import closed_formulas
from ettc.errors import MalformedFormula
from ettc.formulas import (Atom, Nabla, Par, Tensor, Triangle, alpha_canonical,
                           alpha_equiv, atom, check_well_formed, dual,
                           free_indices, is_type, rename_all, rename_free,
                           size, subformulas, well_formed)


def test_dual_atom_swaps_rows_and_sign():
    a = Atom("p", True, ("i",), ("j",))
    assert dual(a) == Atom("p", False, ("j",), ("i",))


def test_dual_tensor_is_reversed_par():
    a, b = atom("p"), atom("q")
    assert dual(Tensor(a, b)) == Par(dual(b), dual(a))
    assert dual(Par(a, b)) == Tensor(dual(b), dual(a))


def test_dual_binders_swap():
    body = Atom("p", True, ("n",), ("m",))
    f = Nabla("m", "n", body)
    assert dual(f) == Triangle("n", "m", dual(body))


@given(closed_formulas())
def test_duality_is_involutive(f):
    assert dual(dual(f)) == f


@given(closed_formulas())
def test_dual_preserves_size_and_wellformedness(f):
    assert size(dual(f)) == size(f)
    assert well_formed(dual(f))


def test_free_indices_of_binder():
    body = Atom("p", True, ("n", "k"), ("m", "l"))
    f = Nabla("m", "n", body)  # binds lower m and upper n
    fi = free_indices(f)
    assert fi.upper == frozenset({"k"})
    assert fi.lower == frozenset({"l"})


def test_alpha_equiv_renames_binders():
    f = Nabla("m", "n", Atom("p", True, ("n",), ("m",)))
    g = Nabla("a", "b", Atom("p", True, ("b",), ("a",)))
    assert alpha_equiv(f, g)
    assert alpha_canonical(f) == alpha_canonical(g)
    h = Nabla("a", "b", Atom("p", True, ("a",), ("b",)))
    assert not alpha_equiv(f, h)


def test_well_formed_rejects_duplicate_free_uppers():
    bad = Tensor(Atom("p", True, ("i",), ()), Atom("q", True, ("i",), ()))
    assert not well_formed(bad)
    with pytest.raises(MalformedFormula):
        check_well_formed(bad)


def test_well_formed_accepts_shared_name_across_rows():
    ok = Tensor(Atom("p", True, ("i",), ()), Atom("q", True, (), ("i",)))
    assert well_formed(ok)


def test_rename_free_respects_binders():
    f = Nabla("m", "n", Atom("p", True, ("n", "k"), ("m",)))
    g = rename_free(f, {"k": "x", "n": "zz"}, {})
    assert g == Nabla("m", "n", Atom("p", True, ("n", "x"), ("m",)))


def test_rename_all_renames_binders_too():
    f = Nabla("m", "n", Atom("p", True, ("n",), ("m",)))
    g = rename_all(f, {"m": "a", "n": "b"})
    assert g == Nabla("a", "b", Atom("p", True, ("b",), ("a",)))


def test_is_type_requires_nondegenerate_frees():
    assert is_type(Tensor(atom("p"), atom("q")))
    assert not is_type(Atom("p", True, ("i",), ("i",)))


def test_subformulas():
    f = Par(Tensor(atom("p"), atom("q")), atom("r"))
    names = [s.name for s in subformulas(f) if isinstance(s, Atom)]
    assert sorted(names) == ["p", "q", "r"]
