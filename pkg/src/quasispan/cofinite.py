"""Uniform annihilation orders and depth-truncated cofiniteness reports.

A generating vector w of a depth-capped quasimodule is uniformly annihilated
by a finite generator set X at order T when x_n w = 0 for every x in X and
every n >= T.  The order bounds the index window of normalized spanning
words, which in turn bounds the number of words staying outside the module
subspaces C_n(W) = span{v_{-n} u}; the reports below measure those subspaces,
the quotient dimensions per depth, and the span of the enumerated short
words, all by exact echelon ranks on the truncated instance.

Every verdict is a statement about the truncation at hand (dimensions
stabilizing below the cap), never about the untruncated module, and each
report records the truncation parameters it was computed with.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .algebra import Echelon, QuotientBasis, Vec, vec_add_into
from .exact import format_rational
from .heisenberg import VACUUM_ID
from .modes import evaluate, mode, single
from .quasimodule import QuasimoduleInstance, TruncationOverflow


# ---------------------------------------------------------------------------
# uniform annihilation


@dataclass(frozen=True)
class AnnihilationCertificate:
    """Order T with per-generator witnesses: x_n w = 0 for all n >= T.

    witnesses maps each generator id to the largest index acting nonzero on
    the vector (None when no scanned index acts nonzero); T is one more than
    the largest nonnegative witness, or 0 when every witness is negative.
    """

    x_ids: Tuple[str, ...]
    x_weight_cap: Optional[int]
    vector: Vec
    order: int
    witnesses: Dict[str, Optional[int]]

    def to_json_obj(self) -> Dict:
        return {
            "x_ids": list(self.x_ids),
            "x_weight_cap": self.x_weight_cap,
            "vector": sorted((k, format_rational(c)) for k, c in self.vector.items()),
            "order": self.order,
            "witnesses": {g: w for g, w in sorted(self.witnesses.items())},
        }


def _mode_on_vector(qm: QuasimoduleInstance, gid: str, n: int, v: Vec) -> Vec:
    out: Vec = {}
    for mid, c in v.items():
        vec_add_into(out, qm.apply_basis(gid, n, mid), c)
    return out


def uniform_annihilation_order(
    qm: QuasimoduleInstance, w: Vec, X: QuotientBasis
) -> AnnihilationCertificate:
    """Smallest T with x_n w = 0 for all representatives x and all n >= T.

    Scans indices from the exact-vanishing threshold downward; the first
    nonzero action per generator is its witness.  Indices below the depth
    window are not scanned (a certificate is a statement about the truncated
    oracle), which never affects T since only nonnegative witnesses raise it.
    """
    alg = qm.algebra
    d0 = qm.element_depth(w)
    if d0 is None:
        raise ValueError("annihilation order of the zero vector is undefined")
    witnesses: Dict[str, Optional[int]] = {}
    for xid in X.ids:
        wx = alg.weight_of(xid)
        witness: Optional[int] = None
        # above d0 + wx - 1 the image depth is negative, an exact zero
        for n in range(d0 + wx - 1, d0 + wx - 2 - qm.depth_cap, -1):
            if any(c != 0 for c in _mode_on_vector(qm, xid, n, w).values()):
                witness = n
                break
        witnesses[xid] = witness
    order = max((1 + n for n in witnesses.values() if n is not None), default=0)
    order = max(order, 0)
    return AnnihilationCertificate(
        x_ids=tuple(X.ids),
        x_weight_cap=X.weight_cap,
        vector=dict(w),
        order=order,
        witnesses=witnesses,
    )


def verify_annihilation(qm: QuasimoduleInstance, cert: AnnihilationCertificate) -> bool:
    """Replay every (x, n >= T) action and the minimality witness at T - 1."""
    alg = qm.algebra
    d0 = qm.element_depth(cert.vector)
    if d0 is None:
        return False
    for xid in cert.x_ids:
        wx = alg.weight_of(xid)
        for n in range(cert.order, d0 + wx):
            if any(c != 0 for c in _mode_on_vector(qm, xid, n, cert.vector).values()):
                return False
    if cert.order > 0:
        hit = any(
            any(c != 0 for c in _mode_on_vector(qm, xid, cert.order - 1,
                                                cert.vector).values())
            for xid in cert.x_ids
        )
        if not hit:
            return False
    return True


# ---------------------------------------------------------------------------
# module subspaces C_n(W) and the index -1 variant


def _module_subspace_data(
    qm: QuasimoduleInstance, n: int, depth_cap: int
) -> Tuple[Dict[int, Echelon], Dict[int, List[Vec]]]:
    """Per-depth echelons and raw generating vectors for span{v_{-n} u}.

    n >= 2 gives the standard module subspace; n = 1 gives the index -1
    variant where v runs over the whole algebra basis, vacuum included.
    """
    if n < 1:
        raise ValueError("module subspace index must be >= 1")
    alg = qm.algebra
    echelons = {d: Echelon(tuple(qm.ids_at_depth(d))) for d in range(depth_cap + 1)}
    vectors: Dict[int, List[Vec]] = {d: [] for d in range(depth_cap + 1)}
    for dm in range(depth_cap + 1):
        for mid in qm.ids_at_depth(dm):
            for vid, wv in alg.basis:
                d = dm + wv + n - 1
                if d > depth_cap:
                    continue
                vec = qm.apply_basis(vid, -n, mid)
                if any(c != 0 for c in vec.values()):
                    vectors[d].append(vec)
                    echelons[d].insert(vec)
    return echelons, vectors


def difference_one_words(
    X: QuotientBasis, n: int, T: int, vacuum_id: str = VACUUM_ID
) -> List[Tuple[Tuple[str, int], ...]]:
    """Strictly increasing words over X with indices in (-n, T), length <= T+n-1.

    These are exactly the normalized spanning words that can fall outside
    span{v_{-n} u}: a leading index <= -n puts the whole word inside it, and
    strictly increasing indices inside the window cap the length.  Vacuum
    modes resolve away, so the vacuum representative is skipped (the empty
    word already stands for the generating vector itself).
    """
    gens = [g for g in X.ids if g != vacuum_id]
    window = list(range(-n + 1, T))
    words: List[Tuple[Tuple[str, int], ...]] = [()]
    for r in range(1, T + n):
        for idxs in itertools.combinations(window, r):
            for picks in itertools.product(gens, repeat=r):
                words.append(tuple(zip(picks, idxs)))
    return words


def module_cn_quotient(
    qm: QuasimoduleInstance,
    w: Vec,
    X: QuotientBasis,
    T: int,
    n: int,
    depth_cap: Optional[int] = None,
) -> Dict:
    """Per-depth dimensions of W modulo span{v_{-n} u} plus the spanning data.

    Dimensions come from exact echelon ranks.  The spanning section evaluates
    every difference-one word from the bounded enumeration on w, seeds the
    echelons with the subspace, and reports the largest depth prefix at which
    the combined span is everything; X truncation limits how far that can
    reach, which the report records.
    """
    if n < 1:
        raise ValueError("module subspace index must be >= 1")
    cap = qm.depth_cap if depth_cap is None else depth_cap
    if cap > qm.depth_cap:
        raise ValueError(f"depth cap {cap} exceeds the instance cap {qm.depth_cap}")
    alg = qm.algebra
    echelons, _ = _module_subspace_data(qm, n, cap)

    dims: Dict[int, List[int]] = {}
    for d in range(cap + 1):
        dim_w = len(qm.ids_at_depth(d))
        dim_sub = echelons[d].rank
        dims[d] = [dim_w, dim_sub, dim_w - dim_sub]

    d0 = qm.element_depth(w)
    if d0 is None:
        raise ValueError("spanning check needs a nonzero generating vector")
    words = difference_one_words(X, n, T, vacuum_id=alg.vacuum_id)
    kept: List[Tuple[Tuple[str, int], ...]] = []
    skipped = 0
    for word in words:
        syms = tuple(mode(alg, g, i) for g, i in word)
        d = d0 + sum(s.degree for s in syms)
        if d < 0 or d > cap:
            skipped += 1
            continue
        try:
            val = evaluate(single(syms), qm, w)
        except TruncationOverflow:
            skipped += 1
            continue
        kept.append(word)
        if any(c != 0 for c in val.values()):
            echelons[d].insert(val)

    full_rank_depths = [d for d in range(cap + 1)
                        if echelons[d].rank == len(qm.ids_at_depth(d))]
    certified = -1
    for d in range(cap + 1):
        if d in full_rank_depths:
            certified = d
        else:
            break

    quotients = [dims[d][2] for d in range(cap + 1)]
    stable = cap >= 2 and quotients[-1] == quotients[-2] == quotients[-3]
    stabilization = {
        "stabilized": stable,
        "value": quotients[-1] if stable else None,
        "note": None if stable else "cap too small to certify stabilization",
    }

    return {
        "subspace_index": n,
        "annihilation_order": T,
        "x_ids": list(X.ids),
        "x_weight_cap": X.weight_cap,
        "depth_cap": cap,
        "module": qm.label,
        "dims": {str(d): dims[d] for d in range(cap + 1)},
        "spanning": {
            "max_word_length": T + n - 1,
            "index_window": [-n + 1, T - 1],
            "words": [[list(sym) for sym in word] for word in kept],
            "word_count": len(kept),
            "skipped_out_of_window": skipped,
            "full_rank_depths": full_rank_depths,
            "certified_depth": certified,
        },
        "stabilization": stabilization,
    }


def cofinite_equivalence_check(
    qm: QuasimoduleInstance,
    X: QuotientBasis,
    T: int,
    n_max: int,
    depth_cap: Optional[int] = None,
) -> Dict:
    """Compare span{v_{-n} u} across 2 <= n <= n_max at the truncation.

    Measures the pairwise containments by echelon membership of the raw
    generating vectors and records the observed direction instead of
    asserting one; also reports whether the per-n finiteness verdicts
    (quotient dimensions vanishing at the top of the depth window) agree.
    """
    if n_max < 2:
        raise ValueError("equivalence check needs n_max >= 2")
    cap = qm.depth_cap if depth_cap is None else depth_cap
    if cap > qm.depth_cap:
        raise ValueError(f"depth cap {cap} exceeds the instance cap {qm.depth_cap}")

    data = {n: _module_subspace_data(qm, n, cap) for n in range(2, n_max + 1)}

    per_n: Dict[str, Dict] = {}
    for n in range(2, n_max + 1):
        echelons, _ = data[n]
        dims = {}
        for d in range(cap + 1):
            dim_w = len(qm.ids_at_depth(d))
            dims[str(d)] = [dim_w, echelons[d].rank, dim_w - echelons[d].rank]
        quotients = [dims[str(d)][2] for d in range(cap + 1)]
        finite: Optional[bool]
        if cap >= 1:
            finite = quotients[-1] == 0 and quotients[-2] == 0
        else:
            finite = None
        per_n[str(n)] = {"dims": dims, "finite_at_cap": finite}

    containments = []
    for a in range(2, n_max + 1):
        for b in range(2, a):
            # a > b: test span{v_{-a}u} against span{v_{-b}u} and back
            ech_a, vecs_a = data[a]
            ech_b, vecs_b = data[b]
            a_in_b = all(
                ech_b[d].contains(v) for d in range(cap + 1) for v in vecs_a[d]
            )
            b_in_a = all(
                ech_a[d].contains(v) for d in range(cap + 1) for v in vecs_b[d]
            )
            containments.append({
                "deeper_index": a,
                "shallower_index": b,
                "deeper_in_shallower": a_in_b,
                "shallower_in_deeper": b_in_a,
            })

    if all(c["deeper_in_shallower"] for c in containments):
        if any(not c["shallower_in_deeper"] for c in containments):
            direction = "deeper index inside shallower index"
        else:
            direction = "equal at this truncation"
    elif all(c["shallower_in_deeper"] for c in containments):
        direction = "shallower index inside deeper index"
    else:
        direction = "mixed"

    verdicts = [per_n[str(n)]["finite_at_cap"] for n in range(2, n_max + 1)]
    return {
        "n_max": n_max,
        "depth_cap": cap,
        "annihilation_order": T,
        "x_ids": list(X.ids),
        "x_weight_cap": X.weight_cap,
        "module": qm.label,
        "per_n": per_n,
        "containments": containments,
        "observed_direction": direction,
        "verdicts": verdicts,
        "verdicts_agree": len(set(verdicts)) <= 1,
    }
