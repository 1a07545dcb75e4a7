"""Truncated graded algebra instances backed by exact structure-constant tables.

An AlgebraInstance stores a finite weight-truncated slice of a nonnegatively
graded algebra with a distinguished vacuum element and a mode action
u_n v read off a table keyed (u_id, n, v_id).  Vectors are sparse
dict[basis_id -> Fraction] maps.  Everything downstream (axiom checking,
subspace spans, quotient representatives) is exact linear algebra over the
rationals via row echelon forms.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .exact import Rational, as_rational, binom, format_rational

Vec = Dict[str, Fraction]


# ---------------------------------------------------------------------------
# sparse vector helpers

def vec_scale(v: Mapping[str, Fraction], c: Fraction) -> Vec:
    if c == 0:
        return {}
    return {k: c * x for k, x in v.items()}


def vec_add_into(acc: Vec, v: Mapping[str, Fraction], c: Fraction = Fraction(1)) -> None:
    """acc += c * v, dropping cancelled entries."""
    if c == 0:
        return
    for k, x in v.items():
        s = acc.get(k, Fraction(0)) + c * x
        if s == 0:
            acc.pop(k, None)
        else:
            acc[k] = s


def vec_sub(a: Mapping[str, Fraction], b: Mapping[str, Fraction]) -> Vec:
    out: Vec = dict(a)
    vec_add_into(out, b, Fraction(-1))
    return out


def vec_eq(a: Mapping[str, Fraction], b: Mapping[str, Fraction]) -> bool:
    return vec_sub(a, b) == {}


def vec_is_zero(v: Mapping[str, Fraction]) -> bool:
    return all(c == 0 for c in v.values())


# ---------------------------------------------------------------------------
# algebra instances

@dataclass
class AlgebraInstance:
    """Weight-truncated algebra slice with exact mode-action tables.

    basis: ordered (id, weight) pairs; the order is the fixed total order used
      for deterministic representative selection.
    y_table: (u_id, n, v_id) -> sparse result vector, stored only when the
      result weight w(u)+w(v)-n-1 lies in [0, cutoff] and the value is nonzero.
    sl2: the three shift operators, keyed -1, 0, 1, each id -> vector.
    """

    name: str
    cutoff: int
    vacuum_id: str
    basis: Tuple[Tuple[str, int], ...]
    y_table: Dict[Tuple[str, int, str], Vec]
    sl2: Dict[int, Dict[str, Vec]]

    weights: Dict[str, int] = field(init=False)

    def __post_init__(self) -> None:
        self.weights = {bid: w for bid, w in self.basis}
        if self.vacuum_id not in self.weights:
            raise ValueError("vacuum id missing from basis")
        if self.weights[self.vacuum_id] != 0:
            raise ValueError("vacuum must have weight 0")
        if any(w < 0 for _, w in self.basis):
            raise ValueError("weights must be nonnegative")

    # -- basic queries ------------------------------------------------------

    def weight_of(self, bid: str) -> int:
        return self.weights[bid]

    def ids_at_weight(self, w: int) -> List[str]:
        return [bid for bid, bw in self.basis if bw == w]

    def element_weight(self, v: Mapping[str, Fraction]) -> Optional[int]:
        """Weight of a homogeneous vector, None for 0, error if mixed."""
        ws = {self.weights[k] for k, c in v.items() if c != 0}
        if not ws:
            return None
        if len(ws) > 1:
            raise ValueError(f"vector is not homogeneous: weights {sorted(ws)}")
        return ws.pop()

    def vacuum_vec(self) -> Vec:
        return {self.vacuum_id: Fraction(1)}

    # -- mode action ---------------------------------------------------------

    def mode_action_basis(self, uid: str, n: int, vid: str) -> Tuple[Vec, bool]:
        """u_n v for basis u, v.  Returns (vector, overflow flag).

        Results of weight above the cutoff are truncated to zero and flagged;
        results of negative weight are genuinely zero (grading truncation from
        below) and unflagged.
        """
        rw = self.weights[uid] + self.weights[vid] - n - 1
        if rw < 0:
            return {}, False
        if rw > self.cutoff:
            return {}, True
        return dict(self.y_table.get((uid, n, vid), {})), False

    def mode_action(
        self, u: Mapping[str, Fraction], n: int, v: Mapping[str, Fraction]
    ) -> Tuple[Vec, bool]:
        """Bilinear extension of the table action.  (vector, overflow flag)."""
        out: Vec = {}
        overflow = False
        for uid, cu in u.items():
            if cu == 0:
                continue
            for vid, cv in v.items():
                if cv == 0:
                    continue
                res, ov = self.mode_action_basis(uid, n, vid)
                overflow = overflow or ov
                vec_add_into(out, res, cu * cv)
        return out, overflow

    def sl2_apply(self, j: int, v: Mapping[str, Fraction]) -> Vec:
        table = self.sl2[j]
        out: Vec = {}
        for bid, c in v.items():
            vec_add_into(out, table.get(bid, {}), c)
        return out

    # -- serialization -------------------------------------------------------

    def to_json_obj(self) -> Dict:
        return {
            "name": self.name,
            "cutoff": self.cutoff,
            "vacuum": self.vacuum_id,
            "basis": [[bid, w] for bid, w in self.basis],
            "y_table": [
                [u, n, v, sorted((k, format_rational(c)) for k, c in vec.items())]
                for (u, n, v), vec in sorted(self.y_table.items())
            ],
            "sl2": {
                str(j): [
                    [bid, sorted((k, format_rational(c)) for k, c in vec.items())]
                    for bid, vec in sorted(tab.items())
                ]
                for j, tab in self.sl2.items()
            },
        }

    @staticmethod
    def from_json_obj(obj: Mapping) -> "AlgebraInstance":
        y_table = {
            (u, int(n), v): {k: as_rational(c) for k, c in entries}
            for u, n, v, entries in obj["y_table"]
        }
        sl2 = {
            int(j): {bid: {k: as_rational(c) for k, c in entries} for bid, entries in rows}
            for j, rows in obj["sl2"].items()
        }
        return AlgebraInstance(
            name=obj["name"],
            cutoff=int(obj["cutoff"]),
            vacuum_id=obj["vacuum"],
            basis=tuple((bid, int(w)) for bid, w in obj["basis"]),
            y_table=y_table,
            sl2=sl2,
        )


# ---------------------------------------------------------------------------
# exact row echelon with provenance

class Echelon:
    """Row echelon form over Fraction with combination tracking.

    Rows are reduced against each other on insertion.  Each row remembers an
    exact combination over the inserted family, so membership tests come with
    the witness coefficients.
    """

    def __init__(self, coordinate_order: Sequence[str]):
        self.order = {k: i for i, k in enumerate(coordinate_order)}
        # pivot id -> (vector, combo over family indices)
        self.rows: Dict[str, Tuple[Vec, Dict[int, Fraction]]] = {}
        self.family_size = 0

    def _pivot(self, v: Vec) -> Optional[str]:
        best = None
        for k in v:
            if best is None or self.order[k] < self.order[best]:
                best = k
        return best

    def reduce(self, v: Mapping[str, Fraction]) -> Tuple[Vec, Dict[int, Fraction]]:
        """Reduce v against the rows.  Returns (residual, combo) with
        v = residual + sum combo[i] * family[i]."""
        residual: Vec = {k: c for k, c in v.items() if c != 0}
        combo: Dict[int, Fraction] = {}
        while True:
            piv = self._pivot(residual)
            if piv is None or piv not in self.rows:
                return residual, combo
            row, row_combo = self.rows[piv]
            factor = residual[piv] / row[piv]
            vec_add_into(residual, row, -factor)
            for i, c in row_combo.items():
                s = combo.get(i, Fraction(0)) + factor * c
                if s == 0:
                    combo.pop(i, None)
                else:
                    combo[i] = s

    def insert(self, v: Mapping[str, Fraction]) -> bool:
        """Insert a family vector; returns True if it enlarged the span."""
        idx = self.family_size
        self.family_size += 1
        residual, combo = self.reduce(v)
        piv = self._pivot(residual)
        if piv is None:
            return False
        full_combo = {i: -c for i, c in combo.items()}
        full_combo[idx] = Fraction(1)
        # v = residual + sum combo*family  =>  residual = v - sum combo*family
        self.rows[piv] = (residual, full_combo)
        return True

    def contains(self, v: Mapping[str, Fraction]) -> bool:
        residual, _ = self.reduce(v)
        return not residual

    @property
    def rank(self) -> int:
        return len(self.rows)


@dataclass
class SubspaceBasis:
    """Per-weight spans of a graded subspace, with generating-family labels.

    labels[w][i] identifies how the i-th inserted family vector at weight w was
    produced (e.g. ('mode', u_id, n, v_id) or ('shift', w_id)); the echelon's
    combination output indexes into this list.
    """

    kind: str
    weight_cap: int
    echelons: Dict[int, Echelon]
    labels: Dict[int, List[Tuple]]
    vectors: Dict[int, List[Vec]]

    def dim_at(self, w: int) -> int:
        ech = self.echelons.get(w)
        return ech.rank if ech else 0

    def contains(self, alg: AlgebraInstance, v: Mapping[str, Fraction]) -> bool:
        v = {k: c for k, c in v.items() if c != 0}
        if not v:
            return True
        w = alg.element_weight(v)
        ech = self.echelons.get(w)
        return ech.contains(v) if ech else False


def _empty_subspace(alg: AlgebraInstance, kind: str, cap: int) -> SubspaceBasis:
    ech = {
        w: Echelon(alg.ids_at_weight(w))
        for w in range(cap + 1)
    }
    return SubspaceBasis(
        kind=kind,
        weight_cap=cap,
        echelons=ech,
        labels={w: [] for w in range(cap + 1)},
        vectors={w: [] for w in range(cap + 1)},
    )


def _subspace_insert(sub: SubspaceBasis, w: int, vec: Vec, label: Tuple) -> None:
    sub.labels[w].append(label)
    sub.vectors[w].append(vec)
    sub.echelons[w].insert(vec)


def c_n_subspace(alg: AlgebraInstance, n: int, weight_cap: Optional[int] = None) -> SubspaceBasis:
    """Graded span of all u_{-n} v (n >= 2) up to the weight cap."""
    if n < 2:
        raise ValueError("c_n_subspace requires n >= 2; use c1_subspace")
    cap = alg.cutoff if weight_cap is None else weight_cap
    sub = _empty_subspace(alg, f"c{n}", cap)
    for uid, wu in alg.basis:
        for vid, wv in alg.basis:
            w = wu + wv + n - 1
            if w > cap:
                continue
            vec, ov = alg.mode_action_basis(uid, -n, vid)
            if ov:
                raise ValueError("subspace construction overflowed the cutoff")
            if vec:
                _subspace_insert(sub, w, vec, ("mode", uid, -n, vid))
    return sub


def c1_subspace(alg: AlgebraInstance, weight_cap: Optional[int] = None) -> SubspaceBasis:
    """Span of u_{-1}v over positive-weight u, v, plus all shift images L(-1)w."""
    cap = alg.cutoff if weight_cap is None else weight_cap
    sub = _empty_subspace(alg, "c1", cap)
    for uid, wu in alg.basis:
        if wu <= 0:
            continue
        for vid, wv in alg.basis:
            if wv <= 0:
                continue
            w = wu + wv
            if w > cap:
                continue
            vec, ov = alg.mode_action_basis(uid, -1, vid)
            if ov:
                raise ValueError("subspace construction overflowed the cutoff")
            if vec:
                _subspace_insert(sub, w, vec, ("mode", uid, -1, vid))
    shift = alg.sl2[-1]
    for bid, wb in alg.basis:
        w = wb + 1
        if w > cap:
            continue
        vec = shift.get(bid, {})
        if vec:
            _subspace_insert(sub, w, dict(vec), ("shift", bid))
    return sub


@dataclass
class QuotientBasis:
    """Deterministic homogeneous representatives completing a graded subspace."""

    kind: str
    weight_cap: int
    reps: Tuple[Tuple[str, int], ...]  # (basis id, weight), in selection order

    @property
    def ids(self) -> Tuple[str, ...]:
        return tuple(bid for bid, _ in self.reps)

    def ids_at_weight(self, w: int) -> List[str]:
        return [bid for bid, bw in self.reps if bw == w]

    def dims_by_weight(self) -> Dict[int, int]:
        out = {w: 0 for w in range(self.weight_cap + 1)}
        for _, w in self.reps:
            out[w] += 1
        return out


def quotient_representatives(
    alg: AlgebraInstance, sub: SubspaceBasis, weight_cap: Optional[int] = None
) -> QuotientBasis:
    """Pick, per weight, the first basis elements (in the fixed basis order)
    whose classes complete the subspace to the full weight component."""
    cap = sub.weight_cap if weight_cap is None else min(weight_cap, sub.weight_cap)
    reps: List[Tuple[str, int]] = []
    for w in range(cap + 1):
        ech = Echelon(alg.ids_at_weight(w))
        for vec in sub.vectors.get(w, []):
            ech.insert(vec)
        for bid in alg.ids_at_weight(w):
            if ech.insert({bid: Fraction(1)}):
                reps.append((bid, w))
    return QuotientBasis(kind=sub.kind, weight_cap=cap, reps=tuple(reps))


@dataclass
class SubspaceDecomposition:
    """v = sum rep_coeffs[x] * x + sum combo[i] * family vector i (exact)."""

    weight: int
    rep_coeffs: Dict[str, Fraction]
    family_combo: List[Tuple[Tuple, Fraction]]  # (label, coefficient)


def decompose_against(
    alg: AlgebraInstance,
    sub: SubspaceBasis,
    quo: QuotientBasis,
    v: Mapping[str, Fraction],
) -> SubspaceDecomposition:
    """Exact decomposition of a homogeneous v into quotient representatives
    plus a labelled combination of subspace family vectors."""
    v = {k: c for k, c in v.items() if c != 0}
    w = alg.element_weight(v)
    if w is None:
        return SubspaceDecomposition(0, {}, [])
    ech = Echelon(alg.ids_at_weight(w))
    family: List[Tuple] = []
    for vec, label in zip(sub.vectors.get(w, []), sub.labels.get(w, [])):
        family.append(("sub", label))
        ech.insert(vec)
    for bid in quo.ids_at_weight(w):
        family.append(("rep", bid))
        ech.insert({bid: Fraction(1)})
    residual, combo = ech.reduce(v)
    if residual:
        raise ValueError(
            "vector is outside subspace + representatives: rank deficiency"
        )
    reps: Dict[str, Fraction] = {}
    fam: List[Tuple[Tuple, Fraction]] = []
    for i, c in sorted(combo.items()):
        tag, payload = family[i]
        if tag == "rep":
            reps[payload] = c
        else:
            fam.append((payload, c))
    return SubspaceDecomposition(weight=w, rep_coeffs=reps, family_combo=fam)


# ---------------------------------------------------------------------------
# axiom suite

@dataclass
class AxiomWindow:
    """Sampling window for the axiom suite.

    max_total_weight bounds w(u)+w(v)+w(s) for the three-element identity
    checks; indices m, n, p range over [index_lo, index_hi].
    """

    max_total_weight: int
    index_lo: int = -2
    index_hi: int = 2


@dataclass
class AxiomReport:
    passed: bool
    counts: Dict[str, int]
    failure: Optional[str] = None

    def to_json_obj(self) -> Dict:
        return {
            "passed": self.passed,
            "counts": dict(sorted(self.counts.items())),
            "failure": self.failure,
        }


def _fail(counts: Dict[str, int], msg: str) -> AxiomReport:
    return AxiomReport(passed=False, counts=counts, failure=msg)


def check_axioms(alg: AlgebraInstance, window: Optional[AxiomWindow] = None) -> AxiomReport:
    """Exact verification of the defining properties on the truncated tables.

    Covers: grading truncation from below, vacuum and creation properties,
    the shift-derivative rule (L(-1)u)_n = -n u_{n-1}, the sl2 bracket
    relations and their compatibility with mode operators, and the
    three-parameter component identity relating iterated actions to product
    modes, sampled over the window.  Stops at the first counterexample.
    """
    if window is None:
        window = AxiomWindow(max_total_weight=alg.cutoff)
    counts: Dict[str, int] = {}

    def bump(key: str) -> None:
        counts[key] = counts.get(key, 0) + 1

    vac = alg.vacuum_id

    # table sanity: weight additivity and truncation from below
    for (uid, n, vid), vec in alg.y_table.items():
        rw = alg.weights[uid] + alg.weights[vid] - n - 1
        if rw < 0 and vec:
            return _fail(counts, f"nonzero action below weight 0: {(uid, n, vid)}")
        got = alg.element_weight(vec)
        if got is not None and got != rw:
            return _fail(counts, f"weight additivity broken at {(uid, n, vid)}")
        if uid == vac and n != -1 and vec:
            return _fail(counts, f"vacuum acts outside index -1: {(uid, n, vid)}")
        if vid == vac and n >= 0 and vec:
            return _fail(counts, f"creation violated in table: {(uid, n, vid)}")
        bump("table_grading")

    # vacuum property: vac_n v = delta_{n,-1} v
    for vid, wv in alg.basis:
        expect = {vid: Fraction(1)}
        vec, _ = alg.mode_action_basis(vac, -1, vid)
        if not vec_eq(vec, expect):
            return _fail(counts, f"vacuum action at -1 wrong on {vid}")
        for n in range(-3, 3):
            if n == -1:
                continue
            rw = wv - n - 1
            if rw < 0 or rw > alg.cutoff:
                continue
            vec, _ = alg.mode_action_basis(vac, n, vid)
            if vec:
                return _fail(counts, f"vacuum action at {n} nonzero on {vid}")
        bump("vacuum")

    # creation property: u_{-1} vac = u, u_n vac = 0 for n >= 0
    for uid, wu in alg.basis:
        vec, _ = alg.mode_action_basis(uid, -1, vac)
        if not vec_eq(vec, {uid: Fraction(1)}):
            return _fail(counts, f"creation u_-1 vac != u for {uid}")
        for n in range(0, wu + 1):
            vec, ov = alg.mode_action_basis(uid, n, vac)
            if vec or ov:
                return _fail(counts, f"creation u_{n} vac != 0 for {uid}")
        bump("creation")

    # weight operator is diagonal
    for bid, w in alg.basis:
        if not vec_eq(alg.sl2[0].get(bid, {}), {bid: Fraction(w)}):
            return _fail(counts, f"weight operator not diagonal on {bid}")
        bump("weight_diag")

    # sl2 bracket relations on the basis: [L0,L-1]=L-1, [L0,L1]=-L1, [L-1,L1]=-2L0
    for bid, w in alg.basis:
        x = {bid: Fraction(1)}

        def brk(a: int, b: int) -> Vec:
            first = alg.sl2_apply(a, alg.sl2_apply(b, x))
            second = alg.sl2_apply(b, alg.sl2_apply(a, x))
            return vec_sub(first, second)

        if w + 1 <= alg.cutoff:
            if not vec_eq(brk(0, -1), alg.sl2_apply(-1, x)):
                return _fail(counts, f"[L0,L-1] != L-1 on {bid}")
        if not vec_eq(brk(0, 1), vec_scale(alg.sl2_apply(1, x), Fraction(-1))):
            return _fail(counts, f"[L0,L1] != -L1 on {bid}")
        if w + 1 <= alg.cutoff:
            if not vec_eq(brk(-1, 1), vec_scale(alg.sl2_apply(0, x), Fraction(-2))):
                return _fail(counts, f"[L-1,L1] != -2L0 on {bid}")
        bump("sl2_brackets")

    # shift-derivative rule: (L(-1)u)_n = -n u_{n-1}
    for uid, wu in alg.basis:
        if wu + 1 > alg.cutoff:
            continue
        lu = alg.sl2[-1].get(uid, {})
        for vid, wv in alg.basis:
            lo = wu + wv - alg.cutoff  # result weight of u_{n-1} v <= cutoff
            hi = wu + wv + 1
            for n in range(lo, hi + 1):
                if not 0 <= wu + 1 + wv - n - 1 <= alg.cutoff:
                    continue
                if not 0 <= wu + wv - n <= alg.cutoff:
                    continue
                lhs, ov1 = alg.mode_action(lu, n, {vid: Fraction(1)})
                rhs, ov2 = alg.mode_action_basis(uid, n - 1, vid)
                if ov1 or ov2:
                    continue
                if not vec_eq(lhs, vec_scale(rhs, Fraction(-n))):
                    return _fail(counts, f"shift-derivative fails at {(uid, n, vid)}")
                bump("shift_derivative")

    # sl2 compatibility: [L(j), u_n] = sum_k binom(j+1,k) (L(k-1)u)_{n+j+1-k}
    for j in (-1, 0, 1):
        for uid, wu in alg.basis:
            if wu + 1 > alg.cutoff:
                continue  # the k = 0 term needs L(-1)u inside the truncation
            for vid, wv in alg.basis:
                for n in range(-alg.cutoff - 2, alg.cutoff + 2):
                    rw = wu + wv - n - 1
                    if not 0 <= rw <= alg.cutoff:
                        continue
                    if rw - j < 0 or rw - j > alg.cutoff:
                        continue
                    if wv - j < 0 or wv - j > alg.cutoff:
                        continue
                    x = {vid: Fraction(1)}
                    unv, ov = alg.mode_action_basis(uid, n, vid)
                    if ov:
                        continue
                    lhs = alg.sl2_apply(j, unv)
                    second, ov = alg.mode_action({uid: Fraction(1)}, n, alg.sl2_apply(j, x))
                    if ov:
                        continue
                    vec_add_into(lhs, second, Fraction(-1))
                    rhs: Vec = {}
                    ok = True
                    for k in range(0, j + 2):
                        lku = alg.sl2[k - 1].get(uid, {}) if k - 1 != 0 else {
                            uid: Fraction(wu)
                        }
                        term, ov = alg.mode_action(lku, n + j + 1 - k, x)
                        if ov:
                            ok = False
                            break
                        vec_add_into(rhs, term, binom(j + 1, k))
                    if not ok:
                        continue
                    if not vec_eq(lhs, rhs):
                        return _fail(
                            counts, f"sl2 mode bracket fails at j={j}, {(uid, n, vid)}"
                        )
                    bump("sl2_modes")

    # three-parameter component identity on sampled triples
    idx = range(window.index_lo, window.index_hi + 1)
    for uid, wu in alg.basis:
        for vid, wv in alg.basis:
            if wu + wv > window.max_total_weight:
                continue
            for sid, ws in alg.basis:
                if wu + wv + ws > window.max_total_weight:
                    continue
                s = {sid: Fraction(1)}
                for m in idx:
                    for n in idx:
                        for p in idx:
                            final = wu + wv + ws - m - n - p - 2
                            if not 0 <= final <= alg.cutoff:
                                continue
                            if wv + ws - n - 1 > alg.cutoff:
                                continue
                            if wu + wv - m - 1 > alg.cutoff:
                                continue
                            if wu + ws - p - 1 > alg.cutoff:
                                continue
                            lhs: Vec = {}
                            for i in range(0, wu + wv - m):
                                prod, _ = alg.mode_action_basis(uid, m + i, vid)
                                if not prod:
                                    continue
                                term, _ = alg.mode_action(prod, n + p - i, s)
                                vec_add_into(lhs, term, binom(p, i))
                            rhs: Vec = {}
                            for i in range(0, wv + ws - n):
                                inner, _ = alg.mode_action_basis(vid, n + i, sid)
                                if not inner:
                                    continue
                                term, _ = alg.mode_action(
                                    {uid: Fraction(1)}, m + p - i, inner
                                )
                                vec_add_into(
                                    rhs, term, Fraction(-1) ** i * binom(m, i)
                                )
                            for i in range(0, wu + ws - p):
                                inner, _ = alg.mode_action_basis(uid, p + i, sid)
                                if not inner:
                                    continue
                                term, _ = alg.mode_action(
                                    {vid: Fraction(1)}, m + n - i, inner
                                )
                                vec_add_into(
                                    rhs,
                                    term,
                                    -(Fraction(-1) ** (i + m)) * binom(m, i),
                                )
                            if not vec_eq(lhs, rhs):
                                return _fail(
                                    counts,
                                    "component identity fails at "
                                    f"u={uid} v={vid} s={sid} (m,n,p)={(m, n, p)}",
                                )
                            bump("component_identity")

    return AxiomReport(passed=True, counts=counts)
