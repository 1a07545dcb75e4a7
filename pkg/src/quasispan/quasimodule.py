"""Depth-truncated quasimodule instances over a table-backed algebra.

A QuasimoduleInstance stores the action of algebra basis elements on a
depth-truncated module basis, the sl2 operators in their module realization,
and the quasi-locality polynomial attached to the instance (one polynomial,
used for every generator pair; a decorated honest module satisfies the
quasi relations for any choice, which is how f != 1 test instances arise).

Depth conventions: module basis element b sits at weight lowest_weight +
depth(b); a mode u_n maps depth d to depth d + w(u) - n - 1.  Components that
would land above the depth cap are truncated away; strict evaluation treats
that as an overflow error so tests can prove their windows are
truncation-safe.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Tuple

from .algebra import AlgebraInstance, Vec, vec_add_into, vec_eq, vec_scale, vec_sub
from .exact import QuasiPolynomial, Rational, binom, format_rational


class TruncationOverflow(RuntimeError):
    """A computation touched components above the depth cap in strict mode."""


@dataclass
class AnnihilationBound:
    """Uniform kill indices on a depth-truncated module.

    A mode of a weight-w generator lowers no vector's depth below 0 once its
    index reaches max_depth + w, so such modes vanish identically on the
    truncated module.  kill_index is monotone in the weight, which is what the
    rewriting recursions rely on for termination.
    """

    max_depth: int

    def __post_init__(self) -> None:
        if self.max_depth < 0:
            raise ValueError("annihilation bound needs a nonnegative depth cap")

    def kill_index(self, weight: int) -> int:
        return self.max_depth + weight


@dataclass
class QuasimoduleInstance:
    """Finite depth-truncated quasimodule slice with exact action tables."""

    algebra: AlgebraInstance
    lowest_weight: Rational
    depth_cap: int
    basis: Tuple[Tuple[str, int], ...]  # (module basis id, depth)
    action: Dict[Tuple[str, int, str], Vec]  # (algebra id, n, module id) -> vec
    sl2: Dict[int, Dict[str, Vec]]
    f: QuasiPolynomial
    label: str = "module"

    depths: Dict[str, int] = field(init=False)

    def __post_init__(self) -> None:
        self.depths = {mid: d for mid, d in self.basis}
        if any(d < 0 for _, d in self.basis):
            raise ValueError("depths must be nonnegative")

    # -- queries --------------------------------------------------------------

    def depth_of(self, mid: str) -> int:
        return self.depths[mid]

    def ids_at_depth(self, d: int) -> List[str]:
        return [mid for mid, md in self.basis if md == d]

    def element_depth(self, v: Mapping[str, Fraction]) -> Optional[int]:
        ds = {self.depths[k] for k, c in v.items() if c != 0}
        if not ds:
            return None
        if len(ds) > 1:
            raise ValueError(f"module vector is not depth-homogeneous: {sorted(ds)}")
        return ds.pop()

    def bound(self) -> AnnihilationBound:
        return AnnihilationBound(self.depth_cap)

    def f_for(self, uid: str, vid: str) -> QuasiPolynomial:
        return self.f

    # -- action ---------------------------------------------------------------

    def apply_basis(self, uid: str, n: int, mid: str, strict: bool = True) -> Vec:
        rd = self.depths[mid] + self.algebra.weights[uid] - n - 1
        if rd < 0:
            return {}
        if rd > self.depth_cap:
            if strict:
                raise TruncationOverflow(
                    f"{uid}_{n} on depth {self.depths[mid]} lands at depth {rd} "
                    f"> cap {self.depth_cap}"
                )
            return {}
        return dict(self.action.get((uid, n, mid), {}))

    def apply_mode(
        self, uid: str, n: int, v: Mapping[str, Fraction], strict: bool = True
    ) -> Vec:
        out: Vec = {}
        for mid, c in v.items():
            if c == 0:
                continue
            vec_add_into(out, self.apply_basis(uid, n, mid, strict=strict), c)
        return out

    def apply_element(
        self, u: Mapping[str, Fraction], n: int, v: Mapping[str, Fraction],
        strict: bool = True,
    ) -> Vec:
        out: Vec = {}
        for uid, cu in u.items():
            if cu == 0:
                continue
            vec_add_into(out, self.apply_mode(uid, n, v, strict=strict), cu)
        return out

    def sl2_apply(self, j: int, v: Mapping[str, Fraction]) -> Vec:
        table = self.sl2[j]
        out: Vec = {}
        for mid, c in v.items():
            vec_add_into(out, table.get(mid, {}), c)
        return out

    # -- serialization ----------------------------------------------------------

    def to_json_obj(self) -> Dict:
        return {
            "label": self.label,
            "lowest_weight": format_rational(self.lowest_weight),
            "depth_cap": self.depth_cap,
            "f": self.f.to_json_obj(),
            "basis": [[mid, d] for mid, d in self.basis],
            "action": [
                [u, n, m, sorted((k, format_rational(c)) for k, c in vec.items())]
                for (u, n, m), vec in sorted(self.action.items())
            ],
            "sl2": {
                str(j): [
                    [mid, sorted((k, format_rational(c)) for k, c in vec.items())]
                    for mid, vec in sorted(tab.items())
                ]
                for j, tab in self.sl2.items()
            },
        }


def validate_quasimodule(
    qm: QuasimoduleInstance, max_total_weight: Optional[int] = None,
    index_lo: int = -2, index_hi: int = 2,
) -> Dict:
    """Exact spot-check that the action tables carry a genuine module structure.

    Verifies depth bookkeeping, the vacuum property, the shift-derivative rule
    on module modes, the weight operator's diagonal action, and the sampled
    three-parameter component identity with both iterated orders.  A module
    passing these satisfies the decorated quasi relations for every admissible
    polynomial, which identity-level tests exercise separately.
    """
    alg = qm.algebra
    cap = qm.depth_cap
    total_cap = max_total_weight if max_total_weight is not None else min(
        alg.cutoff + cap, 8
    )
    checks = {"grading": 0, "vacuum": 0, "shift_derivative": 0, "weight_diag": 0,
              "component_identity": 0}

    for (uid, n, mid), vec in qm.action.items():
        rd = qm.depths[mid] + alg.weights[uid] - n - 1
        got = qm.element_depth(vec)
        if got is not None and (rd < 0 or got != rd):
            return {"passed": False, "failure": f"depth bookkeeping at {(uid, n, mid)}",
                    "checks": checks}
        checks["grading"] += 1

    vac = alg.vacuum_id
    for mid, d in qm.basis:
        if not vec_eq(qm.apply_basis(vac, -1, mid), {mid: Fraction(1)}):
            return {"passed": False, "failure": f"vacuum property on {mid}",
                    "checks": checks}
        for n in (-3, -2, 0, 1, 2):
            rd = d - n - 1
            if 0 <= rd <= cap and qm.apply_basis(vac, n, mid):
                return {"passed": False, "failure": f"vacuum index {n} on {mid}",
                        "checks": checks}
        checks["vacuum"] += 1

    for mid, d in qm.basis:
        lw = qm.sl2[0].get(mid, {})
        if not vec_eq(lw, {mid: qm.lowest_weight + d}):
            return {"passed": False, "failure": f"weight operator on {mid}",
                    "checks": checks}
        checks["weight_diag"] += 1

    for uid, wu in alg.basis:
        if wu + 1 > alg.cutoff:
            continue
        lu = alg.sl2[-1].get(uid, {})
        for mid, d in qm.basis:
            for n in range(-cap - 2, cap + 2):
                if not 0 <= d + wu + 1 - n - 1 <= cap:
                    continue
                if not 0 <= d + wu - n <= cap:
                    continue
                lhs = qm.apply_element(lu, n, {mid: Fraction(1)})
                rhs = qm.apply_basis(uid, n - 1, mid)
                if not vec_eq(lhs, vec_scale(rhs, Fraction(-n))):
                    return {"passed": False,
                            "failure": f"shift-derivative at {(uid, n, mid)}",
                            "checks": checks}
                checks["shift_derivative"] += 1

    idx = range(index_lo, index_hi + 1)
    for uid, wu in alg.basis:
        for vid, wv in alg.basis:
            if wu + wv > total_cap:
                continue
            for mid, dm in qm.basis:
                if wu + wv + dm > total_cap:
                    continue
                s = {mid: Fraction(1)}
                for m in idx:
                    for n in idx:
                        for p in idx:
                            final = dm + wu + wv - m - n - p - 2
                            if not 0 <= final <= cap:
                                continue
                            if dm + wv - n - 1 > cap:
                                continue
                            if dm + wu - p - 1 > cap:
                                continue
                            if wu + wv - m - 1 > alg.cutoff:
                                continue
                            lhs: Vec = {}
                            for i in range(0, wu + wv - m):
                                prod, _ = alg.mode_action_basis(uid, m + i, vid)
                                if not prod:
                                    continue
                                term = qm.apply_element(prod, n + p - i, s)
                                vec_add_into(lhs, term, binom(p, i))
                            rhs: Vec = {}
                            i = 0
                            while dm + wv - n - i - 1 >= 0:
                                inner = qm.apply_basis(vid, n + i, mid)
                                if inner:
                                    term = qm.apply_mode(uid, m + p - i, inner)
                                    vec_add_into(
                                        rhs, term, Fraction(-1) ** i * binom(m, i)
                                    )
                                i += 1
                            i = 0
                            while dm + wu - p - i - 1 >= 0:
                                inner = qm.apply_basis(uid, p + i, mid)
                                if inner:
                                    term = qm.apply_mode(vid, m + n - i, inner)
                                    vec_add_into(
                                        rhs, term,
                                        -(Fraction(-1) ** (i + m)) * binom(m, i),
                                    )
                                i += 1
                            if not vec_eq(lhs, rhs):
                                return {
                                    "passed": False,
                                    "failure": "component identity at "
                                    f"u={uid} v={vid} w={mid} (m,n,p)={(m, n, p)}",
                                    "checks": checks,
                                }
                            checks["component_identity"] += 1

    return {"passed": True, "failure": None, "checks": checks}
