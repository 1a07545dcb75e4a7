"""Exact identity constructors and a formal-residue verifier.

Two independent computation routes live here.

Route one: coefficient tables.  quasi_assoc_sides and quasi_comm_sides write
down, over an explicit index window, the coefficient of every word u_a v_b,
v_b u_a, and (u_k v)_c appearing in the stated associativity-style and
commutator-style identities for a quasimodule with locality polynomial f.

Route two: residue extraction.  residue_tables expands the three terms of
the quasi-Jacobi identity multiplied by x0^w0 x1^w1 x2^w2 as literal formal
series (delta expansion, then binomial expansion of the (x - y)^N kernels in
nonnegative powers of the second listed variable) and extracts the residue
coefficient of every in-window word.  verify_residue_derivation compares the
two routes entry by entry.

The constructors replacement_rhs, straighten_rhs, and commutator_expand turn
the identities into Expression rewriters: each isolates one operator word and
re-expands recursive terms until a grading-based annihilation bound kills
them, so every emitted term is exactly equal, as an operator on vectors of
module depth <= bound.max_depth, to the word it replaces.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .algebra import AlgebraInstance
from .exact import QuasiPolynomial, Rational, binom, format_rational
from .modes import Expression, ModeSymbol, Monomial, make_expression
from .quasimodule import AnnihilationBound

IndexPair = Tuple[int, int]
TableMap = Dict[IndexPair, Fraction]


class InconsistentBound(ValueError):
    """Annihilation bound rejected before any expansion is attempted."""


class ProductOverflow(RuntimeError):
    """A product u_k v needed by an expansion lies above the weight cutoff."""


def _require_bound(bound: AnnihilationBound) -> None:
    if not isinstance(bound, AnnihilationBound) or bound.max_depth < 0:
        raise InconsistentBound("expansion needs a grading-consistent annihilation bound")


# ---------------------------------------------------------------------------
# coefficient tables


@dataclass
class CoefficientTable:
    """Exact coefficients of u_a v_b / v_b u_a / (u_k v)_c words in a window.

    Entries are stored only when both indices lie in [-window, window]; zero
    accumulations are removed, so equal tables have equal maps.
    """

    window: int
    uv: TableMap = field(default_factory=dict)
    vu: TableMap = field(default_factory=dict)
    prod: TableMap = field(default_factory=dict)

    def _add(self, table: TableMap, a: int, b: int, c: Fraction) -> None:
        if c == 0 or abs(a) > self.window or abs(b) > self.window:
            return
        s = table.get((a, b), Fraction(0)) + c
        if s == 0:
            table.pop((a, b), None)
        else:
            table[(a, b)] = s

    def add_uv(self, a: int, b: int, c: Fraction) -> None:
        self._add(self.uv, a, b, c)

    def add_vu(self, b: int, a: int, c: Fraction) -> None:
        self._add(self.vu, b, a, c)

    def add_prod(self, k: int, c_index: int, c: Fraction) -> None:
        self._add(self.prod, k, c_index, c)

    def merged_with(self, other: "CoefficientTable") -> "CoefficientTable":
        out = CoefficientTable(min(self.window, other.window))
        for src in (self, other):
            for (a, b), c in src.uv.items():
                out.add_uv(a, b, c)
            for (b, a), c in src.vu.items():
                out.add_vu(b, a, c)
            for (k, ci), c in src.prod.items():
                out.add_prod(k, ci, c)
        return out

    def first_mismatch(self, other: "CoefficientTable") -> Optional[Tuple]:
        """(table name, key, self value, other value) of the first difference."""
        for name in ("uv", "vu", "prod"):
            mine: TableMap = getattr(self, name)
            theirs: TableMap = getattr(other, name)
            for key in sorted(set(mine) | set(theirs)):
                x = mine.get(key, Fraction(0))
                y = theirs.get(key, Fraction(0))
                if x != y:
                    return (name, key, x, y)
        return None

    def to_json_obj(self) -> dict:
        def dump(table: TableMap) -> List[list]:
            return [[a, b, format_rational(c)] for (a, b), c in sorted(table.items())]

        return {
            "window": self.window,
            "uv": dump(self.uv),
            "vu": dump(self.vu),
            "prod": dump(self.prod),
        }


def _k_cap(window: int, f: QuasiPolynomial, m: int, n: int) -> int:
    # beyond this every generated index pair has left the window for good
    return 2 * window + 2 * f.degree_bound + abs(m) + abs(n) + 4


def quasi_assoc_sides(
    m: int, n: int, f: QuasiPolynomial, window: int
) -> Tuple[CoefficientTable, CoefficientTable]:
    """Both sides of the associativity-style identity at residue weights (m, n).

    Left table (prod entries): sum over (i, j) in supp f and 0 <= k <= i of
    a_ij C(i, k) (u_{m+k} v)_{n+i+j-k}.  Right table (uv and vu entries):
    sum of (-1)^k C(m, k) a_ij u_{m+i-k} v_{n+j+k} minus
    (-1)^{k+m} C(m, k) a_ij v_{m+n+j-k} u_{i+k}.  The identity asserts
    left = right as operators; the tables record coefficients exactly.
    """
    lhs = CoefficientTable(window)
    rhs = CoefficientTable(window)
    cap = _k_cap(window, f, m, n)
    for (i, j), aij in f.items():
        for k in range(0, i + 1):
            lhs.add_prod(m + k, n + i + j - k, aij * binom(i, k))
        for k in range(0, cap):
            c = binom(m, k) * aij
            if c != 0:
                rhs.add_uv(m + i - k, n + j + k, (-1) ** k * c)
                rhs.add_vu(m + n + j - k, i + k, -((-1) ** (k + m)) * c)
    return lhs, rhs


def quasi_comm_sides(
    m: int, n: int, f: QuasiPolynomial, window: int
) -> Tuple[CoefficientTable, CoefficientTable]:
    """Both sides of the commutator-style identity at weights (m, n).

    Left table: sum of a_ij (u_{m+i} v_{n+j} - v_{n+j} u_{m+i}).  Right
    table (prod entries): a_ij C(m+i, k) (u_k v)_{m+n+i+j-k} for k >= 0.
    """
    lhs = CoefficientTable(window)
    rhs = CoefficientTable(window)
    cap = _k_cap(window, f, m, n)
    for (i, j), aij in f.items():
        lhs.add_uv(m + i, n + j, aij)
        lhs.add_vu(n + j, m + i, -aij)
        for k in range(0, cap):
            rhs.add_prod(k, m + n + i + j - k, aij * binom(m + i, k))
    return lhs, rhs


def residue_tables(
    f: QuasiPolynomial, w0: int, w1: int, w2: int, window: int
) -> CoefficientTable:
    """Residue extraction of the quasi-Jacobi identity at x0^w0 x1^w1 x2^w2.

    Expands each of the three terms directly.  Taking Res_x0 against x0^w0
    turns the first delta kernel into (x1 - x2)^w0, expanded in nonnegative
    powers of x2 as sum_t C(w0, t) (-1)^t x1^{w0-t} x2^t, and the second into
    (-1)^{w0} (x2 - x1)^{w0} expanded in nonnegative powers of x1.  For the
    third term the x0-power of the kernel (x1 - x0)^k is t >= 0, the x1
    residue then forces k = t - w1 - i - 1, and the literal expansion
    coefficient C(t - w1 - i - 1, t) (-1)^t is used as is: no binomial
    transformation is applied, so agreement with the stated identity tables
    checks those transformations.

    The identity asserts uv + vu entries equal prod entries as operators.
    """
    out = CoefficientTable(window)
    cap = _k_cap(window, f, max(abs(w0), abs(w1)), abs(w2))
    for (i, j), aij in f.items():
        for t in range(0, cap):
            kern = binom(w0, t) * ((-1) ** t)
            if kern != 0:
                out.add_uv(w0 + w1 + i - t, w2 + j + t, aij * kern)
                out.add_vu(w0 + w2 + j - t, w1 + i + t, -((-1) ** w0) * aij * kern)
            kern_c = binom(t - w1 - i - 1, t) * ((-1) ** t)
            out.add_prod(w0 + t, w1 + w2 + i + j - t, aij * kern_c)
    return out


def verify_residue_derivation(
    f: QuasiPolynomial, m: int, n: int, window: int, which: str
) -> dict:
    """Machine-check one identity instance against direct residue extraction.

    which = 'assoc' compares the associativity-style tables with the residue
    at weights (m, 0, n); which = 'comm' compares the commutator-style tables
    with the residue at weights (0, m, n).  Returns a JSON-ready report with
    status 'match' or the first mismatching entry.
    """
    if which == "assoc":
        lhs, rhs = quasi_assoc_sides(m, n, f, window)
        extracted = residue_tables(f, m, 0, n, window)
    elif which == "comm":
        lhs, rhs = quasi_comm_sides(m, n, f, window)
        extracted = residue_tables(f, 0, m, n, window)
    else:
        raise ValueError(f"unknown identity variant {which!r}")
    stated = lhs.merged_with(rhs)
    mismatch = stated.first_mismatch(extracted)
    report = {
        "identity": which,
        "f": f.to_json_obj(),
        "parameters": {"m": m, "n": n},
        "window": window,
        "status": "match" if mismatch is None else "mismatch",
    }
    if mismatch is not None:
        name, key, stated_c, extracted_c = mismatch
        report["mismatch"] = {
            "table": name,
            "entry": list(key),
            "stated": format_rational(stated_c),
            "extracted": format_rational(extracted_c),
        }
    return report


# ---------------------------------------------------------------------------
# expression-level constructors


def _product_modes(
    alg: AlgebraInstance,
    u: str,
    k: int,
    v: str,
    outer: int,
    coeff: Fraction,
    max_depth: int,
) -> List[Monomial]:
    """Monomials for coeff * (u_k v)_outer with u_k v expanded in the basis.

    Modes whose index already annihilates every vector of depth <= max_depth
    (index >= max_depth + weight) are exact zeros and are not emitted.
    """
    if coeff == 0:
        return []
    vec, overflow = alg.mode_action_basis(u, k, v)
    if overflow:
        raise ProductOverflow(
            f"product {u}_{k} {v} exceeds the weight cutoff; rebuild with a larger algebra"
        )
    out: List[Monomial] = []
    for bid in sorted(vec):
        wb = alg.weight_of(bid)
        if outer >= max_depth + wb:
            continue
        out.append(Monomial(coeff * vec[bid], (ModeSymbol(bid, wb, outer),)))
    return out


def replacement_rhs(
    alg: AlgebraInstance,
    u: str,
    v: str,
    n: int,
    f: QuasiPolynomial,
    bound: AnnihilationBound,
) -> Expression:
    """Expression equal to (u_{-2} v)_n on vectors of depth <= bound.max_depth.

    Isolates (u_{-2} v)_n in the associativity-style identity at m = -2,
    where (-1)^k C(-2, k) = k + 1, and re-expands the recursive
    (u_{-2} v)_{n+i+j} terms (i + j >= 1) until the strictly increasing outer
    index reaches the annihilation bound.  Output words are two-mode u/v
    words plus basis-expanded products (u_{-2+k} v) with k >= 1 only.
    """
    _require_bound(bound)
    depth = bound.max_depth
    wtu = alg.weight_of(u)
    wtv = alg.weight_of(v)
    kill_u = depth + wtu
    kill_v = depth + wtv
    kill_prod = depth + wtu + wtv + 1
    monos: List[Monomial] = []
    pending: Dict[int, Fraction] = {n: Fraction(1)}
    while pending:
        c0 = min(pending)
        coeff0 = pending.pop(c0)
        if coeff0 == 0 or c0 >= kill_prod:
            continue
        for (i, j), aij in f.items():
            ca = coeff0 * aij
            if wtu + wtv - c0 - i - j < -depth:
                continue  # every word in this family kills depth <= max_depth
            k = 0
            while c0 + j + k < kill_v:
                monos.append(
                    Monomial(
                        ca * (k + 1),
                        (ModeSymbol(u, wtu, -2 + i - k), ModeSymbol(v, wtv, c0 + j + k)),
                    )
                )
                k += 1
            k = 0
            while i + k < kill_u:
                monos.append(
                    Monomial(
                        -ca * (k + 1),
                        (ModeSymbol(v, wtv, -2 + c0 + j - k), ModeSymbol(u, wtu, i + k)),
                    )
                )
                k += 1
            for k in range(1, i + 1):
                monos.extend(
                    _product_modes(alg, u, -2 + k, v, c0 + i + j - k, -ca * binom(i, k), depth)
                )
            if i + j != 0:
                c1 = c0 + i + j
                if c1 <= c0:
                    raise RuntimeError("replacement outer index failed to increase")
                pending[c1] = pending.get(c1, Fraction(0)) - ca
    return make_expression(monos, vacuum_id=alg.vacuum_id)


def straighten_rhs(
    alg: AlgebraInstance,
    u: str,
    v: str,
    n: int,
    f: QuasiPolynomial,
    bound: AnnihilationBound,
) -> Expression:
    """Expression for the repeated pair u_n v_n (n < 0) or v_n u_n (n >= 0).

    Built from the associativity-style identity at m = -1 and outer index
    2n+1, where every coefficient collapses to a_ij: the prod sum equals the
    sum of words u_{-1+i-k} v_{2n+1+j+k} plus words v_{2n+j-k} u_{i+k}.  The
    repeated pair sits at (i, j) = (0, 0) with k = -n-1 (first family) or
    k = n (second); isolating it and recursively re-straightening the other
    repeated-index words (whose repeated index n + (i+j)/2 strictly exceeds
    n) leaves only words with distinct indices, basis-expanded products
    (u_{-1+k} v), and terms killed by the bound.
    """
    _require_bound(bound)
    if n < 0:
        return _straighten_pair(alg, u, n, v, f, bound, None)
    return _straighten_pair(alg, v, n, u, f, bound, None)


def _straighten_pair(
    alg: AlgebraInstance,
    g1: str,
    h: int,
    g2: str,
    f: QuasiPolynomial,
    bound: AnnihilationBound,
    floor: Optional[int],
) -> Expression:
    """Expression equal to the two-mode word g1_h g2_h on depth <= max_depth."""
    if floor is not None and h <= floor:
        raise RuntimeError("straightening repeated index failed to increase")
    depth = bound.max_depth
    w1 = alg.weight_of(g1)
    w2 = alg.weight_of(g2)
    if w1 + w2 - 2 * h - 2 < -depth:
        return Expression(())  # the pair annihilates every vector in range
    if h < 0:
        return _straighten_core(alg, g1, g2, h, f, bound, omit_first_family=True)
    return _straighten_core(alg, g2, g1, h, f, bound, omit_first_family=False)


def _straighten_core(
    alg: AlgebraInstance,
    u: str,
    v: str,
    n: int,
    f: QuasiPolynomial,
    bound: AnnihilationBound,
    omit_first_family: bool,
) -> Expression:
    depth = bound.max_depth
    wtu = alg.weight_of(u)
    wtv = alg.weight_of(v)
    kill_u = depth + wtu
    kill_v = depth + wtv
    monos: List[Monomial] = []
    recursive: List[Tuple[str, int, str, Fraction]] = []

    def two_mode(ga: str, wa: int, a: int, gb: str, wb: int, b: int, c: Fraction) -> None:
        if a == b:
            recursive.append((ga, a, gb, c))
        else:
            monos.append(Monomial(c, (ModeSymbol(ga, wa, a), ModeSymbol(gb, wb, b))))

    for (i, j), aij in f.items():
        if wtu + wtv - 2 * n - 2 - i - j < -depth:
            continue
        for k in range(0, i + 1):
            monos.extend(
                _product_modes(alg, u, -1 + k, v, 2 * n + 1 + i + j - k, aij * binom(i, k), depth)
            )
        k = 0
        while 2 * n + 1 + j + k < kill_v:
            if not (omit_first_family and i == 0 and j == 0 and k == -n - 1):
                two_mode(u, wtu, -1 + i - k, v, wtv, 2 * n + 1 + j + k, -aij)
            k += 1
        k = 0
        while i + k < kill_u:
            if not ((not omit_first_family) and i == 0 and j == 0 and k == n):
                two_mode(v, wtv, 2 * n + j - k, u, wtu, i + k, -aij)
            k += 1
    expr = make_expression(monos, vacuum_id=alg.vacuum_id)
    for g1, h, g2, c in recursive:
        expr = expr + _straighten_pair(alg, g1, h, g2, f, bound, floor=n).scaled(c)
    return expr


def commutator_expand(
    alg: AlgebraInstance,
    u: str,
    m: int,
    v: str,
    n: int,
    f: QuasiPolynomial,
    bound: AnnihilationBound,
) -> Expression:
    """Expression for [u_m, v_n] containing only product modes (u_k v)_c, k >= 0.

    Worklist over index pairs: each pair (a, b) contributes the products
    a_ij C(a+i, k) (u_k v)_{a+b+i+j-k} and re-queues -a_ij [u_{a+i}, v_{b+j}]
    for i + j >= 1.  Pair index totals strictly increase, and a pair dies as
    an exact zero once a + b >= max_depth + wt(u) + wt(v) - 1, because either
    order of application then lands below depth zero.
    """
    _require_bound(bound)
    depth = bound.max_depth
    wtu = alg.weight_of(u)
    wtv = alg.weight_of(v)
    sum_kill = depth + wtu + wtv - 1
    heap: List[Tuple[int, int, int]] = [(m + n, m, n)]
    coeffs: Dict[Tuple[int, int], Fraction] = {(m, n): Fraction(1)}
    monos: List[Monomial] = []
    while heap:
        total, a, b = heapq.heappop(heap)
        c = coeffs.pop((a, b), Fraction(0))
        if c == 0 or a + b >= sum_kill:
            continue
        for (i, j), aij in f.items():
            if i + j != 0:
                key = (a + i, b + j)
                if a + i + b + j <= total:
                    raise RuntimeError("commutator index total failed to increase")
                if key not in coeffs:
                    coeffs[key] = Fraction(0)
                    heapq.heappush(heap, (a + i + b + j, a + i, b + j))
                coeffs[key] -= c * aij
            for k in range(0, wtu + wtv):
                monos.extend(
                    _product_modes(alg, u, k, v, a + b + i + j - k, c * aij * binom(a + i, k), depth)
                )
    return make_expression(monos, vacuum_id=alg.vacuum_id)
