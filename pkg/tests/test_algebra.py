"""Table-backed algebra instances, echelon linear algebra, and quotients."""

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quasispan import (
    Echelon,
    build_heisenberg,
    c1_subspace,
    c_n_subspace,
    check_axioms,
    decompose_against,
    quotient_representatives,
)
from quasispan.algebra import vec_add_into, vec_eq, vec_scale


def test_axiom_suite_small_cutoffs():
    for cutoff in (2, 3, 4):
        report = check_axioms(build_heisenberg(cutoff))
        assert report.passed, report.failure
        assert report.counts["component_identity"] > 0


def test_mode_action_overflow_flag(alg6):
    # below the grading: exact zero, no overflow; above the cutoff: overflow
    vec, overflow = alg6.mode_action_basis("1", 5, "1")
    assert vec == {} and not overflow
    vec, overflow = alg6.mode_action_basis("1", -6, "1,1,1,1,1")
    assert vec == {} and overflow


def test_heisenberg_products_against_commutation(alg6):
    # (a_1 a) = vacuum via [a_m, a_n] = m delta_{m+n,0}
    vec, overflow = alg6.mode_action_basis("1", 1, "1")
    assert not overflow and vec == {"vac": Fraction(1)}
    vec, _ = alg6.mode_action_basis("1", 0, "1")
    assert vec == {}


def test_echelon_rank_and_membership():
    ech = Echelon(("a", "b", "c"))
    assert ech.insert({"a": Fraction(1), "b": Fraction(2)})
    assert ech.insert({"b": Fraction(1), "c": Fraction(1)})
    assert not ech.insert({"a": Fraction(1), "b": Fraction(3), "c": Fraction(1)})
    assert ech.rank == 2
    assert ech.contains({"a": Fraction(2), "b": Fraction(5), "c": Fraction(1)})
    assert not ech.contains({"c": Fraction(1)})


@settings(deadline=None, max_examples=40)
@given(
    st.lists(
        st.lists(st.fractions(max_denominator=5), min_size=4, max_size=4),
        min_size=1,
        max_size=6,
    )
)
def test_echelon_reduce_combo_recreates_vector(rows):
    order = ("a", "b", "c", "d")
    family = [dict(zip(order, (Fraction(x) for x in row))) for row in rows]
    ech = Echelon(order)
    for v in family:
        ech.insert(v)
    probe = {}
    for i, v in enumerate(family):
        vec_add_into(probe, v, Fraction(i + 1))
    residual, combo = ech.reduce(probe)
    assert not residual  # probe lies in the span by construction
    rebuilt = {}
    for i, coeff in combo.items():
        vec_add_into(rebuilt, family[i], coeff)
    assert vec_eq(rebuilt, probe)


def test_c1_complement_dimensions(alg6):
    x1 = quotient_representatives(alg6, c1_subspace(alg6))
    dims = x1.dims_by_weight()
    assert dims[0] == 1 and dims[1] == 1
    assert all(dims[w] == 0 for w in range(2, alg6.cutoff + 1))
    assert x1.ids == ("vac", "1")


def test_c2_complement_is_one_per_weight(alg6, x2):
    dims = x2.dims_by_weight()
    assert all(dims[w] == 1 for w in range(alg6.cutoff + 1))
    # representatives are the all-ones partitions
    assert x2.ids == tuple(
        "vac" if w == 0 else ",".join(["1"] * w) for w in range(alg6.cutoff + 1)
    )


def test_cn_subspaces_shrink_with_n(alg6):
    for w in range(alg6.cutoff + 1):
        d2 = c_n_subspace(alg6, 2).dim_at(w)
        d3 = c_n_subspace(alg6, 3).dim_at(w)
        assert d3 <= d2


def test_decompose_against_recreates(alg6, x2):
    sub = c_n_subspace(alg6, 2)
    for bid, w in alg6.basis:
        dec = decompose_against(alg6, sub, x2, {bid: Fraction(1)})
        rebuilt = {}
        for xid, c in dec.rep_coeffs.items():
            vec_add_into(rebuilt, {xid: Fraction(1)}, c)
        for label, c in dec.family_combo:
            kind, uid, n, vid = label
            assert kind == "mode" and n == -2
            vec, overflow = alg6.mode_action_basis(uid, n, vid)
            assert not overflow
            vec_add_into(rebuilt, vec, c)
        assert vec_eq(rebuilt, {bid: Fraction(1)})


def test_decompose_against_rejects_out_of_reach(alg6):
    sub = c_n_subspace(alg6, 2, weight_cap=3)
    quo = quotient_representatives(alg6, sub)
    with pytest.raises((ValueError, KeyError)):
        decompose_against(alg6, sub, quo, {"5": Fraction(1)})


def test_vec_helpers_are_exact():
    v = {"a": Fraction(1, 3)}
    assert vec_scale(v, Fraction(3)) == {"a": Fraction(1)}
    acc = {"a": Fraction(-1, 3)}
    vec_add_into(acc, v, Fraction(1))
    assert all(c == 0 for c in acc.values()) or acc == {}
