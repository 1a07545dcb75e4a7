"""Free-boson oracle instances: gradings, commutation, and module tables."""

from fractions import Fraction

import pytest

from quasispan import (
    build_adjoint_quasimodule,
    build_fock_quasimodule,
    build_heisenberg,
    build_trivial_algebra,
    validate_quasimodule,
    weight_zero_state,
)
from quasispan.algebra import vec_add_into, vec_eq
from quasispan.heisenberg import FockOracle, partition_basis, partitions_of


def test_graded_dimensions_are_partition_counts(alg6):
    # p(0..6) = 1, 1, 2, 3, 5, 7, 11
    expected = [1, 1, 2, 3, 5, 7, 11]
    for w, count in enumerate(expected):
        assert len(alg6.ids_at_weight(w)) == count
    assert len(partition_basis(6)) == sum(expected)


def test_partition_enumeration_is_deterministic():
    assert partitions_of(4) == partitions_of(4)
    assert set(partitions_of(4)) == {(4,), (3, 1), (2, 2), (2, 1, 1), (1, 1, 1, 1)}


def _apply(qm, gid, n, vec):
    out = {}
    for mid, c in vec.items():
        vec_add_into(out, qm.apply_basis(gid, n, mid), c)
    return out


@pytest.mark.parametrize("lam", [0, 1])
def test_generator_commutation_window(alg6, lam, qm0, qm1):
    # [a_m, a_n] = m delta_{m+n,0} id, checked on every state deep enough
    # for both orders to stay inside the depth window
    qm = qm0 if lam == 0 else qm1
    for m in range(-3, 4):
        for n in range(-3, 4):
            for mid, d in qm.basis:
                mids = {mid: Fraction(1)}
                d_after_n = d - n
                d_after_m = d - m
                if not (0 <= d_after_n <= qm.depth_cap):
                    continue
                if not (0 <= d_after_m <= qm.depth_cap):
                    continue
                if not (0 <= d - m - n <= qm.depth_cap):
                    continue
                lhs = _apply(qm, "1", m, _apply(qm, "1", n, mids))
                rhs = _apply(qm, "1", n, _apply(qm, "1", m, mids))
                expected = {}
                if m + n == 0:
                    expected = {mid: Fraction(m)}
                diff = dict(lhs)
                vec_add_into(diff, rhs, Fraction(-1))
                vec_add_into(diff, expected, Fraction(-1))
                assert all(c == 0 for c in diff.values()), (m, n, mid)


def test_zero_mode_acts_by_charge(qm1):
    w = weight_zero_state(qm1)
    assert _apply(qm1, "1", 0, w) == w
    assert qm1.lowest_weight == Fraction(1, 2)


def test_vacuum_fock_killed_by_nonnegative_modes(qm0):
    w = weight_zero_state(qm0)
    for n in range(0, 4):
        assert _apply(qm0, "1", n, w) == {}
    assert qm0.lowest_weight == 0


def test_oracle_shift_rule():
    # (L(-1)u)_m = -m u_{m-1} realized by the oracle tables: the weight-2
    # generator a_{-2}vac is the shift of the weight-1 generator
    oracle = FockOracle(Fraction(0))
    for m in (-3, -1, 0, 2):
        shifted = oracle.act_basis((2,), m, (1,))
        direct = oracle.act_basis((1,), m - 1, (1,))
        expect = {k: Fraction(-m) * c for k, c in direct.items() if m * c != 0}
        got = {k: c for k, c in shifted.items() if c != 0}
        assert got == expect


def test_fock_tables_validate_small():
    alg = build_heisenberg(4)
    for lam in (0, 1):
        qm = build_fock_quasimodule(alg, lam, depth_cap=4, validate=False)
        report = validate_quasimodule(qm, max_total_weight=4)
        assert report["passed"], report["failure"]


def test_adjoint_module_of_trivial_algebra():
    triv = build_trivial_algebra(3)
    qm = build_adjoint_quasimodule(triv)
    assert qm.ids_at_depth(0) == ["vac"]
    assert all(qm.ids_at_depth(d) == [] for d in range(1, qm.depth_cap + 1))
    report = validate_quasimodule(qm)
    assert report["passed"], report["failure"]


def test_adjoint_module_of_heisenberg(alg6):
    qm = build_adjoint_quasimodule(alg6, validate=False)
    assert qm.depth_cap == alg6.cutoff
    vec, _ = alg6.mode_action_basis("1", -2, "1")
    assert vec_eq(qm.apply_basis("1", -2, "1"), vec)


def test_fock_rejects_non_heisenberg_algebra():
    with pytest.raises(ValueError):
        build_fock_quasimodule(build_trivial_algebra(), 0)
