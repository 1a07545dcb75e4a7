"""Spanning-set normalization for mode words on quasimodules.

Four layers: writing algebra vectors as creation words over quotient
representatives, flattening composite modes through the associativity-style
expansion, local rewrites (adjacent transposition, C2 replacement), and the
two normal forms (weakly ordered difference-zero words and strictly ordered
difference-one words below the annihilation order).

Every rewrite is an exact identity instantiated with an annihilation bound
matched to the formal depth of the vector it acts on, so evaluation of input
and output agree exactly on the generating vector.
"""

import hashlib
import json
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

from .exact import QuasiPolynomial, ONE, Rational, as_rational, binom
from .algebra import (
    AlgebraInstance,
    QuotientBasis,
    SubspaceBasis,
    SubspaceDecomposition,
    Vec,
    c1_subspace,
    c_n_subspace,
    decompose_against,
    vec_add_into,
    vec_eq,
)
from .quasimodule import AnnihilationBound, QuasimoduleInstance
from .identities import commutator_expand, replacement_rhs, straighten_rhs
from .modes import (
    Expression,
    ModeSymbol,
    Monomial,
    Word,
    evaluate_adjoint,
    filtration_level,
    make_expression,
    mode,
    single,
)

FProvider = Union[QuasiPolynomial, Callable[[str, str], QuasiPolynomial]]


class MetricViolation(RuntimeError):
    """A rewrite produced terms breaking its declared well-founded metric."""


class BudgetExceeded(RuntimeError):
    """A normalization run used more rule applications than allowed."""


class AnnihilationViolation(RuntimeError):
    """A mode at or above the annihilation order failed to kill the vector."""


@dataclass
class NormalizationTrace:
    """Step log of a normalization run.

    Each step is (rule, position, (filtration, length, leading index,
    degree)) for the word the rule was applied to; position is 1-indexed
    within that word.
    """

    steps: List[Tuple[str, int, Tuple[int, int, int, int]]] = field(
        default_factory=list
    )
    input_hash: str = ""
    output_hash: str = ""
    budget_used: int = 0


def expression_hash(expr: Expression) -> str:
    payload = json.dumps(expr.to_json_obj(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def word_filtration(word: Sequence[ModeSymbol]) -> int:
    return sum(sym.weight for sym in word)


def word_degree(word: Sequence[ModeSymbol]) -> int:
    return sum(sym.degree for sym in word)


def _metric(word: Sequence[ModeSymbol]) -> Tuple[int, int, int, int]:
    lead = word[0].index if word else 0
    return (word_filtration(word), len(word), lead, word_degree(word))


def _f_lookup(f: FProvider, uid: str, vid: str) -> QuasiPolynomial:
    if callable(f):
        return f(uid, vid)
    return f


# ---------------------------------------------------------------------------
# composite-mode expansion


def expand_word_mode(
    alg: AlgebraInstance,
    word: Sequence[ModeSymbol],
    m: int,
    f: QuasiPolynomial,
    bound: AnnihilationBound,
    cache: Optional[dict] = None,
) -> Expression:
    """Expression of plain generator modes equal to (x(1)_n1 ... x(r)_nr 1)_m.

    Exact on vectors of depth <= bound.max_depth.  The vacuum mode (1)_m is
    delta_{m,-1} times the identity; a single creation mode (x_n 1)_m with
    n <= -1 collapses through the shift derivative to
    (-1)^k C(m, k) x_{m+n+1} with k = -n-1.  Longer words split off the head
    generator with the associativity-style identity: two mode-split families
    plus same-length corrections whose operator degree strictly drops by
    i + j, which the depth bound eventually prunes as exact zeros.
    """
    if cache is None:
        cache = {}
    return _expand(alg, tuple(word), m, f, bound, cache)


def _expand(
    alg: AlgebraInstance,
    word: Word,
    m: int,
    f: QuasiPolynomial,
    bound: AnnihilationBound,
    cache: dict,
) -> Expression:
    depth = bound.max_depth
    key = (word, m, depth)
    hit = cache.get(key)
    if hit is not None:
        return hit
    out = _expand_uncached(alg, word, m, f, bound, cache)
    cache[key] = out
    return out


def _expand_uncached(
    alg: AlgebraInstance,
    word: Word,
    m: int,
    f: QuasiPolynomial,
    bound: AnnihilationBound,
    cache: dict,
) -> Expression:
    depth = bound.max_depth
    if not word:
        if m == -1:
            return make_expression([Monomial(Fraction(1), ())])
        return make_expression([])
    if len(word) == 1:
        sym = word[0]
        if sym.index >= 0:
            return make_expression([])
        k = -sym.index - 1
        coeff = binom(m, k) * (-1 if k % 2 else 1)
        if coeff == 0:
            return make_expression([])
        shifted = ModeSymbol(sym.gen, sym.weight, m + sym.index + 1)
        return make_expression(
            [Monomial(as_rational(coeff), (shifted,))], vacuum_id=alg.vacuum_id
        )

    elem_weight = word_degree(word)
    if elem_weight < 0:
        return make_expression([])
    if elem_weight - m - 1 < -depth:
        # the whole mode kills every vector within the bound
        return make_expression([])

    head, rest = word[0], word[1:]
    mp = head.index
    wt_x = head.weight
    wt_rest = word_degree(rest)
    terms: List[Monomial] = []
    for (i, j), aij in f.items():
        # modes of the head generator outside, then the tail mode
        t = 0
        while m + j + t < depth + wt_rest:
            if mp >= 0 and t > mp:
                break
            c = aij * binom(mp, t) * (-1 if t % 2 else 1)
            if c != 0:
                inner = _expand(alg, rest, m + j + t, f, bound, cache)
                xsym = ModeSymbol(head.gen, wt_x, mp + i - t)
                for mono in inner.terms:
                    terms.append(Monomial(c * mono.coeff, (xsym,) + mono.word))
            t += 1
        # tail mode outside, head generator against the vector first
        for t in range(0, depth + wt_x - i):
            c = -aij * binom(mp, t) * (-1 if (mp + t) % 2 else 1)
            if c == 0:
                continue
            inner = _expand(alg, rest, mp + m + j - t, f, bound, cache)
            xsym = ModeSymbol(head.gen, wt_x, i + t)
            for mono in inner.terms:
                terms.append(Monomial(c * mono.coeff, mono.word + (xsym,)))
        # same-length corrections at strictly lower operator degree
        if i == 0 and j == 0:
            continue
        for k in range(0, i + 1):
            c = -aij * binom(i, k)
            if c == 0:
                continue
            lifted = (ModeSymbol(head.gen, wt_x, mp + k),) + rest
            inner = _expand(alg, lifted, m + i + j - k, f, bound, cache)
            for mono in inner.terms:
                terms.append(Monomial(c * mono.coeff, mono.word))
    return make_expression(terms, vacuum_id=alg.vacuum_id)


# ---------------------------------------------------------------------------
# writing algebra vectors as creation words


class GeneratorExpressor:
    """Writes graded algebra vectors as creation words over the quotient ids.

    Peels the degree-one subspace per weight: representative parts become
    length-1 words, each u_{-1}v family term flattens the expressed u through
    expand_word_mode at index -1 against the expressed v, and shift images
    lower one index through (L(-1)a)_n = -n a_{n-1}.  Every produced
    expression is replayed against the structure constants and must recreate
    its vector exactly.
    """

    def __init__(self, alg: AlgebraInstance, X: QuotientBasis):
        self.alg = alg
        self.X = X
        self.x_ids = frozenset(X.ids)
        self.c1 = c1_subspace(alg)
        self.bound = AnnihilationBound(alg.cutoff)
        self._units: Dict[str, Expression] = {}
        self._expand_cache: dict = {}

    def unit(self, bid: str) -> Expression:
        hit = self._units.get(bid)
        if hit is None:
            hit = self._express_homogeneous({bid: Fraction(1)})
            self._units[bid] = hit
        return hit

    def express(self, v: Vec) -> Expression:
        by_weight: Dict[int, Vec] = {}
        for bid, c in v.items():
            if c == 0:
                continue
            by_weight.setdefault(self.alg.weight_of(bid), {})[bid] = as_rational(c)
        terms: List[Monomial] = []
        for w in sorted(by_weight):
            terms.extend(self._express_homogeneous(by_weight[w]).terms)
        return make_expression(terms, vacuum_id=self.alg.vacuum_id)

    def expand(self, word: Word, m: int) -> Expression:
        return _expand(self.alg, word, m, ONE, self.bound, self._expand_cache)

    def _express_homogeneous(self, v: Vec) -> Expression:
        w = self.alg.element_weight(v)
        if w is None:
            return make_expression([])
        if w > self.X.weight_cap:
            raise ValueError(
                f"quotient representatives stop at weight {self.X.weight_cap}, "
                f"needed {w}"
            )
        decomp = decompose_against(self.alg, self.c1, self.X, v)
        terms: List[Monomial] = []
        for xid, c in sorted(decomp.rep_coeffs.items()):
            terms.append(Monomial(c, (mode(self.alg, xid, -1),), "1"))
        for label, c in decomp.family_combo:
            if label[0] == "mode":
                _, uid, n1, bid = label
                assert n1 == -1
                e_u = self.unit(uid)
                e_b = self.unit(bid)
                for mu in e_u.terms:
                    op = self.expand(mu.word, -1)
                    for mo in op.terms:
                        for mb in e_b.terms:
                            terms.append(
                                Monomial(
                                    c * mu.coeff * mo.coeff * mb.coeff,
                                    mo.word + mb.word,
                                    "1",
                                )
                            )
            else:
                _, bid = label
                for mb in self.unit(bid).terms:
                    for pos, sym in enumerate(mb.word):
                        if sym.index == 0:
                            continue
                        lowered = (
                            mb.word[:pos] + (sym.shifted(-1),) + mb.word[pos + 1 :]
                        )
                        terms.append(
                            Monomial(c * mb.coeff * (-sym.index), lowered, "1")
                        )
        expr = make_expression(terms, vacuum_id=self.alg.vacuum_id)
        recreated = evaluate_adjoint(expr, self.alg)
        target = {bid: c for bid, c in v.items() if c != 0}
        if not vec_eq(recreated, target):
            raise RuntimeError(
                f"expressed words fail to recreate the weight-{w} vector"
            )
        return expr


def express_algebra_element(
    alg: AlgebraInstance, v: Vec, X: QuotientBasis
) -> Expression:
    """Write v as a combination of creation words x(1)_n1 ... x(r)_nr over X.

    X must be a quotient basis completing the degree-one subspace up to the
    weight of v; the result replays to v exactly on the vacuum.
    """
    return GeneratorExpressor(alg, X).express(v)


# ---------------------------------------------------------------------------
# substitution of non-representative generators in module words


def _substitute_step(
    gx: GeneratorExpressor,
    qm: QuasimoduleInstance,
    mono: Monomial,
    pos: int,
    depth_anchor: int,
    expand_cache: dict,
) -> List[Monomial]:
    """Replace the composite generator at pos by expanded creation words.

    depth_anchor bounds the depth of vectors the suffix is applied to, so
    the expansion runs at depth_anchor plus the suffix degree when positive.
    """
    alg = qm.algebra
    sym = mono.word[pos]
    prefix, suffix = mono.word[:pos], mono.word[pos + 1 :]
    local = AnnihilationBound(depth_anchor + max(0, word_degree(suffix)))
    out: List[Monomial] = []
    for mg in gx.unit(sym.gen).terms:
        op = _expand(alg, mg.word, sym.index, qm.f, local, expand_cache)
        for mo in op.terms:
            out.append(
                Monomial(
                    mono.coeff * mg.coeff * mo.coeff,
                    prefix + mo.word + suffix,
                    mono.base,
                )
            )
    return out


def express_module_element(
    e: Expression,
    X: QuotientBasis,
    qm: QuasimoduleInstance,
    bound: Optional[AnnihilationBound] = None,
) -> Expression:
    """Rewrite e so every mode generator is a quotient representative.

    Each leftmost non-representative generator is recreated from creation
    words over X and its mode flattened through expand_word_mode with the
    module's correction polynomial; the count of such generators drops with
    every substitution.  Exact on vectors of depth <= bound.max_depth
    (default: the module's own depth bound).
    """
    if bound is None:
        bound = qm.bound()
    gx = GeneratorExpressor(qm.algebra, X)
    expand_cache: dict = {}
    xids = gx.x_ids
    out: List[Monomial] = []
    work = deque(e.terms)
    while work:
        mono = work.popleft()
        pos = next(
            (p for p, s in enumerate(mono.word) if s.gen not in xids), None
        )
        if pos is None:
            out.append(mono)
            continue
        if word_degree(mono.word) < -bound.max_depth:
            continue
        work.extend(
            _substitute_step(gx, qm, mono, pos, bound.max_depth, expand_cache)
        )
    return make_expression(out, vacuum_id=qm.algebra.vacuum_id)


# ---------------------------------------------------------------------------
# local rewrites


def transpose_adjacent(
    alg: AlgebraInstance,
    m: Monomial,
    i: int,
    f: FProvider,
    bound: AnnihilationBound,
) -> Expression:
    """Swap modes i and i+1 (1-indexed) plus the commutator remainder.

    Exact on vectors of depth <= bound.max_depth.  Every remainder word
    replaces the swapped pair by one product mode, so its filtration level
    is strictly below the input's.
    """
    word = m.word
    r = len(word)
    if not 1 <= i < r:
        raise ValueError(f"transpose position {i} out of range for length {r}")
    left, right = word[i - 1], word[i]
    prefix, suffix = word[: i - 1], word[i + 1 :]
    out = [Monomial(m.coeff, prefix + (right, left) + suffix, m.base)]
    local = AnnihilationBound(bound.max_depth + max(0, word_degree(suffix)))
    rem = commutator_expand(
        alg, left.gen, left.index, right.gen, right.index,
        _f_lookup(f, left.gen, right.gen), local,
    )
    s_in = filtration_level(m)
    for mono in rem.terms:
        spliced = prefix + mono.word + suffix
        if word_filtration(spliced) >= s_in:
            raise MetricViolation(
                "transpose remainder did not drop the filtration level"
            )
        out.append(Monomial(m.coeff * mono.coeff, spliced, m.base))
    return make_expression(out, vacuum_id=alg.vacuum_id)


def replace_generator_c2(
    alg: AlgebraInstance,
    m: Monomial,
    i: int,
    decomposition: SubspaceDecomposition,
    f: FProvider,
    bound: AnnihilationBound,
) -> Expression:
    """Replace the i-th generator (1-indexed) by its class representatives.

    The decomposition must recreate the generator exactly as
    representatives + sum of u_{-2}v family terms; each family term expands
    through replacement_rhs and contributes only strictly lower filtration
    words, while representative terms keep the filtration level.
    """
    word = m.word
    r = len(word)
    if not 1 <= i <= r:
        raise ValueError(f"replace position {i} out of range for length {r}")
    sym = word[i - 1]
    recreated: Vec = {}
    pairs: List[Tuple[str, str, Fraction]] = []
    for xid, c in decomposition.rep_coeffs.items():
        vec_add_into(recreated, {xid: Fraction(1)}, c)
    for label, c in decomposition.family_combo:
        if label[0] != "mode" or label[2] != -2:
            raise ValueError(f"unusable family label {label!r} in decomposition")
        _, uid, _, vid = label
        vec, overflow = alg.mode_action_basis(uid, -2, vid)
        if overflow:
            raise ValueError("decomposition family term exceeds the cutoff")
        vec_add_into(recreated, vec, c)
        pairs.append((uid, vid, c))
    if not vec_eq(recreated, {sym.gen: Fraction(1)}):
        raise ValueError(
            f"decomposition does not recreate generator {sym.gen!r}"
        )
    prefix, suffix = word[: i - 1], word[i:]
    out: List[Monomial] = []
    for xid, c in sorted(decomposition.rep_coeffs.items()):
        out.append(
            Monomial(m.coeff * c, prefix + (mode(alg, xid, sym.index),) + suffix,
                     m.base)
        )
    local = AnnihilationBound(bound.max_depth + max(0, word_degree(suffix)))
    s_in = filtration_level(m)
    for uid, vid, c in pairs:
        rhs = replacement_rhs(
            alg, uid, vid, sym.index, _f_lookup(f, uid, vid), local
        )
        for mono in rhs.terms:
            spliced = prefix + mono.word + suffix
            if word_filtration(spliced) >= s_in:
                raise MetricViolation(
                    "replacement remainder did not drop the filtration level"
                )
            out.append(Monomial(m.coeff * c * mono.coeff, spliced, m.base))
    return make_expression(out, vacuum_id=alg.vacuum_id)


# ---------------------------------------------------------------------------
# difference-zero normalization


def _order_key(ordering: str) -> Callable[[ModeSymbol], Tuple]:
    if ordering == "by-index":
        return lambda sym: (sym.index, sym.gen)
    if ordering == "by-degree":
        return lambda sym: (-sym.degree, sym.gen)
    raise ValueError(f"unknown ordering {ordering!r}")


class _NormalizerBase:
    def __init__(
        self,
        X: QuotientBasis,
        T: int,
        qm: QuasimoduleInstance,
        w: Vec,
        budget: int,
        trace: Optional[NormalizationTrace],
    ):
        if T < 0:
            raise ValueError("annihilation order must be a natural number")
        self.qm = qm
        self.alg = qm.algebra
        self.X = X
        self.xids = frozenset(X.ids)
        self.T = T
        self.w = {k: as_rational(c) for k, c in w.items() if c != 0}
        self.depth_w = qm.element_depth(self.w) or 0
        self.budget = budget
        self.ticks = 0
        self.trace = trace
        self._kills: Dict[Tuple[str, int], bool] = {}

    def tick(self) -> None:
        self.ticks += 1
        if self.ticks > self.budget:
            raise BudgetExceeded(f"step budget {self.budget} exceeded")

    def record(self, rule: str, position: int, word: Word) -> None:
        if self.trace is not None:
            self.trace.steps.append((rule, position, _metric(word)))

    def annihilates(self, sym: ModeSymbol) -> bool:
        key = (sym.gen, sym.index)
        hit = self._kills.get(key)
        if hit is None:
            out: Vec = {}
            for mid, c in self.w.items():
                vec_add_into(out, self.qm.apply_basis(sym.gen, sym.index, mid), c)
            hit = not out
            self._kills[key] = hit
        return hit

    def check_annihilation(self, sym: ModeSymbol) -> None:
        if not self.annihilates(sym):
            raise AnnihilationViolation(
                f"{sym.gen}_{sym.index} does not kill the generating vector "
                f"(annihilation order {self.T})"
            )


class _Diff0Normalizer(_NormalizerBase):
    def __init__(self, X, T, qm, w, ordering, budget, trace):
        super().__init__(X, T, qm, w, budget, trace)
        self.key = _order_key(ordering)
        self.gx = GeneratorExpressor(self.alg, X)
        self._expand_cache: dict = {}

    def run(self, e: Expression) -> Expression:
        out: List[Monomial] = []
        work = deque(e.terms)
        while work:
            mono = work.popleft()
            word = mono.word
            if not word:
                out.append(mono)
                continue
            if word_degree(word) < -self.depth_w:
                self.tick()
                self.record("prune", 1, word)
                continue
            pos = next(
                (p for p, s in enumerate(word) if s.gen not in self.xids), None
            )
            if pos is not None:
                self.tick()
                self.record("substitute", pos + 1, word)
                work.extend(
                    _substitute_step(
                        self.gx, self.qm, mono, pos, self.depth_w,
                        self._expand_cache,
                    )
                )
                continue
            last = word[-1]
            if last.index >= self.T:
                self.tick()
                self.record("annihilate", len(word), word)
                self.check_annihilation(last)
                continue
            inv = next(
                (
                    p
                    for p in range(len(word) - 1)
                    if self.key(word[p]) > self.key(word[p + 1])
                ),
                None,
            )
            if inv is None:
                out.append(mono)
                continue
            self.tick()
            self.record("transpose", inv + 1, word)
            swapped = transpose_adjacent(
                self.alg, mono, inv + 1, self.qm.f_for,
                AnnihilationBound(self.depth_w),
            )
            work.extend(swapped.terms)
        return make_expression(out, vacuum_id=self.alg.vacuum_id)


def normalize_diff0(
    e: Expression,
    X: QuotientBasis,
    T: int,
    qm: QuasimoduleInstance,
    w: Vec,
    ordering: str = "by-index",
    bound: Optional[AnnihilationBound] = None,
    budget: int = 100000,
    trace: Optional[NormalizationTrace] = None,
) -> Expression:
    """Normalize e . w into weakly ordered words with indices below T.

    X must complete the degree-one subspace and uniformly annihilate w at
    order T.  With by-index ordering every output word satisfies
    n_1 <= ... <= n_r < T (ties broken by generator id); with by-degree
    ordering mode degrees are weakly decreasing and stay >= -T-1.  The
    rewrite sequence is exact on w: substitution of non-representative
    generators, annihilation drops verified against the action tables, and
    adjacent transpositions whose remainders recurse at strictly lower
    filtration.
    """
    if bound is None:
        bound = qm.bound()
    if trace is not None:
        trace.input_hash = expression_hash(e)
    key = _order_key(ordering)
    norm = _Diff0Normalizer(X, T, qm, w, ordering, budget, trace)
    out = norm.run(make_expression(e.terms, vacuum_id=qm.algebra.vacuum_id))
    for mono in out.terms:
        keys = [key(sym) for sym in mono.word]
        if keys != sorted(keys):
            raise MetricViolation("difference-zero output word is not ordered")
        if ordering == "by-index":
            if any(sym.index >= T for sym in mono.word):
                raise MetricViolation("difference-zero output index above order")
        else:
            if any(sym.degree < -T - 1 for sym in mono.word):
                raise MetricViolation("degree-ordered output below -T-1")
    if trace is not None:
        trace.output_hash = expression_hash(out)
        trace.budget_used = norm.ticks
    return out


# ---------------------------------------------------------------------------
# difference-one normalization


class _Diff1Normalizer(_NormalizerBase):
    def __init__(self, X, T, qm, w, budget, trace):
        super().__init__(X, T, qm, w, budget, trace)
        self.c2 = c_n_subspace(self.alg, 2)
        self._decomps: Dict[str, SubspaceDecomposition] = {}
        self._memo: Dict[Word, Expression] = {}
        self._straighten: dict = {}
        self._commutator: dict = {}

    def decomposition_for(self, gid: str) -> SubspaceDecomposition:
        hit = self._decomps.get(gid)
        if hit is None:
            hit = decompose_against(
                self.alg, self.c2, self.X, {gid: Fraction(1)}
            )
            self._decomps[gid] = hit
        return hit

    def straighten(self, u: ModeSymbol, v: ModeSymbol, d: int) -> Expression:
        # expansion of u_n v_n exact on vectors of depth <= d
        key = (u.gen, v.gen, u.index, d)
        hit = self._straighten.get(key)
        if hit is None:
            n = u.index
            f = self.qm.f_for(u.gen, v.gen)
            local = AnnihilationBound(d)
            if n < 0:
                hit = straighten_rhs(self.alg, u.gen, v.gen, n, f, local)
            else:
                hit = straighten_rhs(self.alg, v.gen, u.gen, n, f, local)
            self._straighten[key] = hit
        return hit

    def commutator(self, u: ModeSymbol, v: ModeSymbol, d: int) -> Expression:
        key = (u.gen, u.index, v.gen, v.index, d)
        hit = self._commutator.get(key)
        if hit is None:
            hit = commutator_expand(
                self.alg, u.gen, u.index, v.gen, v.index,
                self.qm.f_for(u.gen, v.gen), AnnihilationBound(d),
            )
            self._commutator[key] = hit
        return hit

    def process(self, word: Word) -> Expression:
        hit = self._memo.get(word)
        if hit is not None:
            return hit
        out = self._process_uncached(word)
        self._memo[word] = out
        return out

    def _process_uncached(self, word: Word) -> Expression:
        if not word:
            return make_expression([Monomial(Fraction(1), ())])
        if word_degree(word) < -self.depth_w:
            self.tick()
            self.record("prune", 1, word)
            return make_expression([])
        head = word[0]
        if head.gen not in self.xids:
            self.tick()
            self.record("replace", 1, word)
            s_in = word_filtration(word)
            replaced = replace_generator_c2(
                self.alg,
                Monomial(Fraction(1), word),
                1,
                self.decomposition_for(head.gen),
                self.qm.f_for,
                AnnihilationBound(self.depth_w),
            )
            terms: List[Monomial] = []
            for mono in replaced.terms:
                if (
                    word_filtration(mono.word) == s_in
                    and mono.word
                    and mono.word[0].gen not in self.xids
                ):
                    raise MetricViolation(
                        "replacement kept a non-representative head"
                    )
                sub = self.process(mono.word)
                terms.extend(t.scaled(mono.coeff) for t in sub.terms)
            return make_expression(terms, vacuum_id=self.alg.vacuum_id)
        tail = self.process(word[1:])
        terms = []
        for mono in tail.terms:
            fixed = self.fix(head, mono.word)
            terms.extend(t.scaled(mono.coeff) for t in fixed.terms)
        return make_expression(terms, vacuum_id=self.alg.vacuum_id)

    def fix(self, head: ModeSymbol, tword: Word) -> Expression:
        """Insert a representative mode into an already normalized word."""
        self.tick()
        word = (head,) + tword
        if word_degree(word) < -self.depth_w:
            self.record("prune", 1, word)
            return make_expression([])
        if not tword:
            if head.index >= self.T:
                self.record("annihilate", 1, word)
                self.check_annihilation(head)
                return make_expression([])
            return single(word)
        t0 = tword[0]
        if head.index < t0.index:
            return single(word)
        rest = tword[1:]
        d_rest = self.depth_w + word_degree(rest)
        if d_rest < 0:
            # the suffix already kills the generating vector
            self.record("prune", 2, word)
            return make_expression([])
        s_pair = head.weight + t0.weight
        terms: List[Monomial] = []
        if head.index == t0.index:
            self.record("straighten", 1, word)
            for sm in self.straighten(head, t0, d_rest).terms:
                sw = sm.word
                if len(sw) == 2:
                    if sw[0].index == sw[1].index:
                        raise MetricViolation(
                            "straightening emitted a repeated index"
                        )
                    inner = self.fix(sw[1], rest)
                    for im in inner.terms:
                        outer = self.fix(sw[0], im.word)
                        terms.extend(
                            t.scaled(sm.coeff * im.coeff) for t in outer.terms
                        )
                elif len(sw) == 1:
                    # (u_{-1}v) keeps the level but shortens the word
                    if word_filtration(sw) > s_pair:
                        raise MetricViolation(
                            "straightening remainder raised the filtration level"
                        )
                    sub = self.process(sw + rest)
                    terms.extend(t.scaled(sm.coeff) for t in sub.terms)
                else:
                    terms.append(Monomial(sm.coeff, rest))
            return make_expression(terms, vacuum_id=self.alg.vacuum_id)
        # head.index > t0.index: swap, then the commutator remainder
        self.record("transpose", 1, word)
        inserted = self.fix(head, rest)
        for im in inserted.terms:
            outer = self.fix(t0, im.word)
            terms.extend(t.scaled(im.coeff) for t in outer.terms)
        for rm in self.commutator(head, t0, d_rest).terms:
            if rm.word:
                if word_filtration(rm.word) >= s_pair:
                    raise MetricViolation(
                        "commutator remainder kept the filtration level"
                    )
                sub = self.process(rm.word + rest)
                terms.extend(t.scaled(rm.coeff) for t in sub.terms)
            else:
                terms.append(Monomial(rm.coeff, rest))
        return make_expression(terms, vacuum_id=self.alg.vacuum_id)


def normalize_diff1(
    e: Expression,
    X: QuotientBasis,
    T: int,
    qm: QuasimoduleInstance,
    w: Vec,
    bound: Optional[AnnihilationBound] = None,
    budget: int = 100000,
    trace: Optional[NormalizationTrace] = None,
) -> Expression:
    """Normalize e . w into strictly ordered words with indices below T.

    X must complete the depth-two subspace and uniformly annihilate w at
    order T.  The engine is innermost-first: it normalizes the tail of each
    word, then inserts the head, straightening repeated indices (repeated
    index strictly increases), transposing inverted pairs (leading index
    strictly decreases, commutator remainders recurse at strictly lower
    filtration), and replacing non-representative generators through their
    depth-two decompositions.  Every output word satisfies
    n_1 < ... < n_r < T and evaluation on w is preserved exactly.
    """
    if bound is None:
        bound = qm.bound()
    if trace is not None:
        trace.input_hash = expression_hash(e)
    norm = _Diff1Normalizer(X, T, qm, w, budget, trace)
    canonical = make_expression(e.terms, vacuum_id=qm.algebra.vacuum_id)
    terms: List[Monomial] = []
    for mono in canonical.terms:
        sub = norm.process(mono.word)
        terms.extend(t.scaled(mono.coeff) for t in sub.terms)
    out = make_expression(terms, vacuum_id=qm.algebra.vacuum_id)
    for mono in out.terms:
        indices = [sym.index for sym in mono.word]
        if any(b <= a for a, b in zip(indices, indices[1:])):
            raise MetricViolation("difference-one output is not strictly ordered")
        if indices and indices[-1] >= T:
            raise MetricViolation("difference-one output index above order")
    if trace is not None:
        trace.output_hash = expression_hash(out)
        trace.budget_used = norm.ticks
    return out
