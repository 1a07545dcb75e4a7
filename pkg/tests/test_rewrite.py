"""Rewrite operations: worked cases, postconditions, value preservation."""

import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quasispan import (
    AnnihilationBound,
    BudgetExceeded,
    NormalizationTrace,
    ONE,
    build_fock_quasimodule,
    decompose_against,
    evaluate,
    expand_word_mode,
    express_algebra_element,
    express_module_element,
    make_expression,
    mode,
    normalize_diff0,
    normalize_diff1,
    replace_generator_c2,
    single,
    transpose_adjacent,
    uniform_annihilation_order,
)
from quasispan.algebra import vec_eq
from quasispan.modes import Monomial
from quasispan.rewrite import word_degree, word_filtration


def _word(alg, pairs, coeff=1):
    return single(tuple(mode(alg, g, i) for g, i in pairs), coeff=coeff)


def _word_lists(expr):
    return sorted(
        (str(m.coeff), [(s.gen, s.index) for s in m.word]) for m in expr.terms
    )


# -- creation-word expression of algebra and module elements ------------------


def test_express_algebra_element_base_cases(alg6, x1):
    e = express_algebra_element(alg6, {"vac": Fraction(1)}, x1)
    assert _word_lists(e) == [("1", [])]

    e = express_algebra_element(alg6, {"2": Fraction(1)}, x1)
    assert _word_lists(e) == [("1", [("1", -2)])]

    e = express_algebra_element(alg6, {"1,1": Fraction(1)}, x1)
    assert _word_lists(e) == [("1", [("1", -1), ("1", -1)])]


def test_express_algebra_element_replays(alg6, x1, x2):
    from quasispan import evaluate_adjoint

    for X in (x1, x2):
        for bid, wt in alg6.basis:
            if wt > 5:
                continue
            e = express_algebra_element(alg6, {bid: Fraction(1)}, X)
            assert all(sym.gen in set(X.ids) for m in e.terms for sym in m.word)
            assert vec_eq(evaluate_adjoint(e, alg6), {bid: Fraction(1)})


def test_express_module_element_substitutes_composites(alg6, qm0, x1):
    w = {"vac": Fraction(1)}
    e = _word(alg6, [("1,1", -2), ("2", 0)])
    out = express_module_element(e, x1, qm0)
    assert all(sym.gen in set(x1.ids) for m in out.terms for sym in m.word)
    assert vec_eq(evaluate(e, qm0, w), evaluate(out, qm0, w))


def test_expand_word_mode_matches_single_mode(alg6, qm0):
    # a length-one creation word recreates the plain mode of its generator
    out = expand_word_mode(alg6, (mode(alg6, "1", -1),), -2, ONE,
                           AnnihilationBound(4))
    w = {"vac": Fraction(1)}
    assert vec_eq(evaluate(out, qm0, w), evaluate(_word(alg6, [("1", -2)]), qm0, w))


# -- adjacent transposition and depth-two generator replacement ---------------


def test_transpose_adjacent_swaps_and_preserves(alg6, qm0, f_battery):
    w = {"1": Fraction(1)}
    m = Monomial(Fraction(2), (mode(alg6, "1", 1), mode(alg6, "1", -1)))
    for f in f_battery:
        qm = build_fock_quasimodule(alg6, 0, f=f, depth_cap=6, validate=False)
        out = transpose_adjacent(alg6, m, 1, f, AnnihilationBound(3))
        words = [[(s.gen, s.index) for s in t.word] for t in out.terms]
        assert [("1", -1), ("1", 1)] in words
        direct = evaluate(make_expression([m]), qm, w)
        assert vec_eq(direct, evaluate(out, qm, w))


def test_transpose_position_out_of_range(alg6):
    m = Monomial(Fraction(1), (mode(alg6, "1", 0),))
    with pytest.raises(ValueError):
        transpose_adjacent(alg6, m, 1, ONE, AnnihilationBound(2))


def test_replace_generator_c2_rewrites_composite(alg6, qm0, x2):
    from quasispan import c_n_subspace

    w = {"vac": Fraction(1)}
    gid = "3"
    dec = decompose_against(alg6, c_n_subspace(alg6, 2), x2, {gid: Fraction(1)})
    m = Monomial(Fraction(1), (mode(alg6, gid, -1),))
    out = replace_generator_c2(alg6, m, 1, dec, ONE, AnnihilationBound(6))
    heads = {t.word[0].gen for t in out.terms if t.word}
    assert gid not in heads
    assert vec_eq(evaluate(make_expression([m]), qm0, w), evaluate(out, qm0, w))


# -- difference-zero normalization ---------------------------------------------


def test_diff0_orders_and_annihilates(alg6, qm0, x1):
    w = {"vac": Fraction(1)}
    T = uniform_annihilation_order(qm0, w, x1).order
    assert T == 0
    e = _word(alg6, [("1", -1), ("1", -3)], coeff=3)
    out = normalize_diff0(e, x1, T, qm0, w)
    for m in out.terms:
        idx = [s.index for s in m.word]
        assert idx == sorted(idx) and all(i < T for i in idx)
    assert vec_eq(evaluate(e, qm0, w), evaluate(out, qm0, w))

    # annihilation: a trailing nonnegative mode on the vacuum drops the word
    e = _word(alg6, [("1", -2), ("1", 2)])
    out = normalize_diff0(e, x1, T, qm0, w)
    assert out.is_zero

    out = normalize_diff0(make_expression([]), x1, T, qm0, w)
    assert out.is_zero


def test_diff0_fixpoint_is_stable(alg6, qm0, x1):
    w = {"vac": Fraction(1)}
    e = _word(alg6, [("1", -3), ("1", -1)])
    out = normalize_diff0(e, x1, 0, qm0, w)
    assert _word_lists(out) == _word_lists(e)


def test_diff0_by_degree_ordering(alg6, qm1, x1):
    w = {"vac": Fraction(1)}
    T = uniform_annihilation_order(qm1, w, x1).order
    e = _word(alg6, [("1", -1), ("1", 1), ("1", -2)])
    out = normalize_diff0(e, x1, T, qm1, w, ordering="by-degree")
    for m in out.terms:
        degs = [s.degree for s in m.word]
        assert degs == sorted(degs, reverse=True)
        assert all(d >= -T - 1 for d in degs)
    assert vec_eq(evaluate(e, qm1, w), evaluate(out, qm1, w))


def test_diff0_budget_exceeded(alg6, qm0, x1):
    w = {"vac": Fraction(1)}
    e = _word(alg6, [("1", 1), ("1", -1), ("1", -2)])
    with pytest.raises(BudgetExceeded):
        normalize_diff0(e, x1, 0, qm0, w, budget=2)


# -- difference-one normalization ----------------------------------------------


def test_diff1_straightens_repeated_index(alg6, qm0, x2):
    w = {"vac": Fraction(1)}
    T = uniform_annihilation_order(qm0, w, x2).order
    trace = NormalizationTrace()
    e = _word(alg6, [("1", -1), ("1", -1)])
    out = normalize_diff1(e, x2, T, qm0, w, trace=trace)
    assert any(rule == "straighten" for rule, _, _ in trace.steps)
    assert trace.input_hash and trace.output_hash
    assert trace.budget_used > 0
    for m in out.terms:
        idx = [s.index for s in m.word]
        assert all(b > a for a, b in zip(idx, idx[1:]))
        assert all(i < T for i in idx)
    assert vec_eq(evaluate(e, qm0, w), evaluate(out, qm0, w))


def test_diff1_fixpoint_is_stable(alg6, qm0, x2):
    w = {"vac": Fraction(1)}
    e = _word(alg6, [("1", -3), ("1", -1)])
    out = normalize_diff1(e, x2, 0, qm0, w)
    assert _word_lists(out) == _word_lists(e)


def test_diff1_golden_three_letter_word(alg6, qm0, x2):
    w = {"vac": Fraction(1)}
    e = _word(alg6, [("1", -2), ("1", -2), ("1", -1)])
    out = normalize_diff1(e, x2, 0, qm0, w)
    assert vec_eq(evaluate(e, qm0, w), evaluate(out, qm0, w))
    for m in out.terms:
        idx = [s.index for s in m.word]
        assert all(b > a for a, b in zip(idx, idx[1:]))


# -- randomized value preservation batteries -----------------------------------


def _random_word(rng, gens, max_len=3, lo=-3, hi=2):
    return [
        (rng.choice(gens), rng.randint(lo, hi)) for _ in range(rng.randint(1, max_len))
    ]


@pytest.mark.parametrize("lam", [0, 1])
def test_diff0_battery(alg6, x1, lam):
    rng = random.Random(100 + lam)
    qm = build_fock_quasimodule(alg6, lam, depth_cap=6, validate=False)
    checked = 0
    for _ in range(40):
        mid = rng.choice([m for m, d in qm.basis if d <= 2])
        w = {mid: Fraction(1)}
        T = uniform_annihilation_order(qm, w, x1).order
        e = _word(alg6, _random_word(rng, ["1", "2", "1,1"]))
        try:
            direct = evaluate(e, qm, w)
        except Exception:
            continue
        out = normalize_diff0(e, x1, T, qm, w)
        assert vec_eq(direct, evaluate(out, qm, w))
        checked += 1
    assert checked >= 25


@pytest.mark.parametrize("lam", [0, 1])
def test_diff1_battery(alg6, x2, lam):
    rng = random.Random(200 + lam)
    qm = build_fock_quasimodule(alg6, lam, depth_cap=6, validate=False)
    checked = 0
    for _ in range(40):
        mid = rng.choice([m for m, d in qm.basis if d <= 2])
        w = {mid: Fraction(1)}
        T = uniform_annihilation_order(qm, w, x2).order
        e = _word(alg6, _random_word(rng, ["1", "2", "1,1"]))
        try:
            direct = evaluate(e, qm, w)
        except Exception:
            continue
        out = normalize_diff1(e, x2, T, qm, w)
        assert vec_eq(direct, evaluate(out, qm, w))
        checked += 1
    assert checked >= 25


def test_diff1_trace_metrics_bounded(alg6, qm0, x2):
    w = {"vac": Fraction(1)}
    e = _word(alg6, [("1", 0), ("1", -2), ("1", -2)])
    trace = NormalizationTrace()
    normalize_diff1(e, x2, 0, qm0, w, trace=trace)
    s_in = max(word_filtration(m.word) for m in e.terms)
    r_in = max(len(m.word) for m in e.terms)
    for _, _, (s, r, _, _) in trace.steps:
        assert (s, r) <= (s_in, r_in)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.tuples(st.sampled_from(["1", "2"]), st.integers(-3, 2)),
                min_size=1, max_size=3))
def test_diff0_idempotent(pairs):
    alg = _IDEMPOTENT_CACHE["alg"]
    qm = _IDEMPOTENT_CACHE["qm"]
    X = _IDEMPOTENT_CACHE["x1"]
    w = {"vac": Fraction(1)}
    e = _word(alg, pairs)
    once = normalize_diff0(e, X, 0, qm, w)
    twice = normalize_diff0(once, X, 0, qm, w)
    assert _word_lists(once) == _word_lists(twice)


def _build_idempotent_cache():
    from quasispan import build_heisenberg, c1_subspace, quotient_representatives

    alg = build_heisenberg(6)
    qm = build_fock_quasimodule(alg, 0, depth_cap=6, validate=False)
    return {"alg": alg, "qm": qm, "x1": quotient_representatives(alg, c1_subspace(alg))}


_IDEMPOTENT_CACHE = _build_idempotent_cache()
