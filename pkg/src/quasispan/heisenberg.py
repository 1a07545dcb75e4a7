"""Rank-one free boson instances computed by a brute-force oracle.

Basis states are integer partitions: the partition (n1 >= n2 >= ... >= nk)
stands for the vector obtained by applying the creation operators for
lowering indices -n1, ..., -nk to the cyclic vector.  The commutation rule is
[a_m, a_n] = m if m + n = 0 (and 0 otherwise), the generator has weight 1 and
norm 1, and the zero mode acts by the charge eigenvalue lam on the whole
Fock space.

The vertex-operator coefficients are computed independently of any identity
machinery through the normal-ordered recursion for free fields: writing a
basis element as u = a_{-n} b with n its largest part,

  u_m = sum_{j <= -1} binom(-j-1, n-1) a_j b_{m-j-n}
      + sum_{j >= 0}  binom(-j-1, n-1) b_{m-j-n} a_j

where a_j are the generator modes and b_* the (recursively computed) modes of
the rest of the partition.  The recursion bottoms out at the vacuum, whose
only nonvanishing mode is the identity at index -1.  All intermediate depths
stay below max(input depth, output depth), so the oracle computes exactly and
the caller truncates afterwards.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Tuple

from .algebra import AlgebraInstance, Vec, vec_add_into
from .exact import ONE, QuasiPolynomial, Rational, as_rational, binom
from .quasimodule import QuasimoduleInstance, validate_quasimodule

Partition = Tuple[int, ...]

VACUUM_ID = "vac"


def partition_id(parts: Partition) -> str:
    return VACUUM_ID if not parts else ",".join(str(p) for p in parts)


def parse_partition(pid: str) -> Partition:
    if pid == VACUUM_ID:
        return ()
    return tuple(int(p) for p in pid.split(","))


def partitions_of(w: int) -> List[Partition]:
    """All partitions of w as weakly decreasing tuples."""
    if w == 0:
        return [()]
    out: List[Partition] = []

    def rec(remaining: int, maxpart: int, acc: List[int]) -> None:
        if remaining == 0:
            out.append(tuple(acc))
            return
        for p in range(min(remaining, maxpart), 0, -1):
            acc.append(p)
            rec(remaining - p, p, acc)
            acc.pop()

    rec(w, w, [])
    return out


def partition_basis(max_weight: int) -> List[Tuple[str, int]]:
    """(id, weight) pairs in the fixed total order: by weight, then by the
    weakly-decreasing part tuple in ascending lexicographic order."""
    basis: List[Tuple[str, int]] = []
    for w in range(max_weight + 1):
        for parts in sorted(partitions_of(w)):
            basis.append((partition_id(parts), w))
    return basis


# ---------------------------------------------------------------------------
# the oracle

State = Dict[Partition, Fraction]


def _generator_mode(j: int, parts: Partition, lam: Rational) -> State:
    """Single generator mode a_j on a basis partition."""
    if j < 0:
        new = tuple(sorted(parts + (-j,), reverse=True))
        return {new: Fraction(1)}
    if j == 0:
        return {parts: lam} if lam != 0 else {}
    count = parts.count(j)
    if count == 0:
        return {}
    rest = list(parts)
    rest.remove(j)
    return {tuple(rest): Fraction(j * count)}


class FockOracle:
    """Exact mode evaluation on the charge-lam Fock space, memoized."""

    def __init__(self, lam: Rational):
        self.lam = as_rational(lam)
        self._memo: Dict[Tuple[Partition, int, Partition], State] = {}

    def act_basis(self, u: Partition, m: int, state: Partition) -> State:
        key = (u, m, state)
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        out: State
        if not u:
            out = {state: Fraction(1)} if m == -1 else {}
        else:
            n = u[0]
            rest = u[1:]
            wrest = sum(rest)
            depth = sum(state)
            out = {}
            # annihilator side: b_{m-j-n} (a_j state), j >= 0
            js: List[int] = sorted(set(parts for parts in state))
            if self.lam != 0:
                js = [0] + js
            for j in js:
                coeff = binom(-j - 1, n - 1)
                if coeff == 0:
                    continue
                moved = _generator_mode(j, state, self.lam)
                for mid_state, c in moved.items():
                    inner = self.act_basis(rest, m - j - n, mid_state)
                    for res, ci in inner.items():
                        _state_add(out, res, coeff * c * ci)
            # creator side: a_j (b_{m-j-n} state), j <= -1, truncated where
            # the inner index already kills the state
            jlo = m - n - depth - wrest + 1
            for j in range(jlo, 0):
                coeff = binom(-j - 1, n - 1)
                if coeff == 0:
                    continue
                inner = self.act_basis(rest, m - j - n, state)
                for res, ci in inner.items():
                    for fin, cf in _generator_mode(j, res, self.lam).items():
                        _state_add(out, fin, coeff * ci * cf)
        self._memo[key] = out
        return out

    def act(self, u: Partition, m: int, state: State) -> State:
        out: State = {}
        for parts, c in state.items():
            for res, ci in self.act_basis(u, m, parts).items():
                _state_add(out, res, c * ci)
        return out


def _state_add(acc: State, key: Partition, c: Fraction) -> None:
    if c == 0:
        return
    s = acc.get(key, Fraction(0)) + c
    if s == 0:
        acc.pop(key, None)
    else:
        acc[key] = s


def _state_to_vec(state: State) -> Vec:
    return {partition_id(p): c for p, c in state.items() if c != 0}


def _sl2_tables(
    basis: Iterable[Tuple[str, int]], lam: Rational, cap: int,
    lowest_weight: Rational,
) -> Dict[int, Dict[str, Vec]]:
    """Shift operators through the standard quadratic expressions, restricted
    to the three relevant components."""
    tables: Dict[int, Dict[str, Vec]] = {-1: {}, 0: {}, 1: {}}
    for mid, d in basis:
        parts = parse_partition(mid)
        tables[0][mid] = {mid: lowest_weight + d}

        down: State = {}
        if lam != 0:
            for res, c in _generator_mode(-1, parts, lam).items():
                _state_add(down, res, lam * c)
        for j in sorted(set(parts)):
            for res, c in _generator_mode(j, parts, lam).items():
                for fin, cf in _generator_mode(-j - 1, res, lam).items():
                    _state_add(down, fin, c * cf)
        if d + 1 <= cap:
            vec = _state_to_vec(down)
            if vec:
                tables[-1][mid] = vec

        up: State = {}
        if lam != 0:
            for res, c in _generator_mode(1, parts, lam).items():
                _state_add(up, res, lam * c)
        for j in sorted(set(parts)):
            if j < 2:
                continue
            for res, c in _generator_mode(j, parts, lam).items():
                for fin, cf in _generator_mode(1 - j, res, lam).items():
                    _state_add(up, fin, c * cf)
        vec = _state_to_vec(up)
        if vec:
            tables[1][mid] = vec
    return tables


def build_heisenberg(cutoff: int) -> AlgebraInstance:
    """Weight-truncated rank-one free boson algebra with oracle-filled tables."""
    if cutoff < 2:
        raise ValueError("heisenberg build needs cutoff >= 2")
    basis = partition_basis(cutoff)
    oracle = FockOracle(Fraction(0))
    y_table: Dict[Tuple[str, int, str], Vec] = {}
    for uid, wu in basis:
        u = parse_partition(uid)
        for vid, wv in basis:
            v = parse_partition(vid)
            for n in range(wu + wv - 1 - cutoff, wu + wv):
                vec = _state_to_vec(oracle.act_basis(u, n, v))
                if vec:
                    y_table[(uid, n, vid)] = vec
    sl2 = _sl2_tables(basis, Fraction(0), cutoff, Fraction(0))
    return AlgebraInstance(
        name=f"heisenberg:{cutoff}",
        cutoff=cutoff,
        vacuum_id=VACUUM_ID,
        basis=tuple(basis),
        y_table=y_table,
        sl2=sl2,
    )


def build_trivial_algebra(cutoff: int = 0) -> AlgebraInstance:
    """The one-dimensional algebra spanned by its vacuum."""
    basis = ((VACUUM_ID, 0),)
    y_table = {(VACUUM_ID, -1, VACUUM_ID): {VACUUM_ID: Fraction(1)}}
    return AlgebraInstance(
        name="trivial",
        cutoff=max(cutoff, 0),
        vacuum_id=VACUUM_ID,
        basis=basis,
        y_table=y_table,
        sl2={-1: {}, 0: {VACUUM_ID: {}}, 1: {}},
    )


def build_fock_quasimodule(
    alg: AlgebraInstance,
    lam: Rational,
    f: Optional[QuasiPolynomial] = None,
    depth_cap: int = 6,
    validate: bool = True,
) -> QuasimoduleInstance:
    """Charge-lam Fock space over a Heisenberg instance, depth-truncated.

    The polynomial f is recorded on the instance without altering the tables:
    an honest module satisfies the decorated relations for any admissible f.
    """
    if not alg.name.startswith("heisenberg"):
        raise ValueError("fock module requires a heisenberg algebra instance")
    lam = as_rational(lam)
    f = ONE if f is None else f
    basis = partition_basis(depth_cap)
    lowest = lam * lam / 2
    oracle = FockOracle(lam)
    action: Dict[Tuple[str, int, str], Vec] = {}
    for uid, wu in alg.basis:
        u = parse_partition(uid)
        for mid, dm in basis:
            state = parse_partition(mid)
            for n in range(dm + wu - 1 - depth_cap, dm + wu):
                vec = _state_to_vec(oracle.act_basis(u, n, state))
                if vec:
                    action[(uid, n, mid)] = vec
    sl2 = _sl2_tables(basis, lam, depth_cap, lowest)
    qm = QuasimoduleInstance(
        algebra=alg,
        lowest_weight=lowest,
        depth_cap=depth_cap,
        basis=tuple(basis),
        action=action,
        sl2=sl2,
        f=f,
        label=f"fock:lam={lam}:depth={depth_cap}",
    )
    if validate:
        report = validate_quasimodule(qm, max_total_weight=min(alg.cutoff, 5))
        if not report["passed"]:
            raise ValueError(f"fock tables failed validation: {report['failure']}")
    return qm


def build_adjoint_quasimodule(
    alg: AlgebraInstance,
    f: Optional[QuasiPolynomial] = None,
    validate: bool = True,
) -> QuasimoduleInstance:
    """Any table-backed algebra viewed as a module over itself.

    Depth equals weight and the action table is the algebra's own product
    table, so the depth cap coincides with the algebra cutoff.
    """
    qm = QuasimoduleInstance(
        algebra=alg,
        lowest_weight=Fraction(0),
        depth_cap=alg.cutoff,
        basis=tuple(alg.basis),
        action={key: dict(vec) for key, vec in alg.y_table.items()},
        sl2={j: {k: dict(v) for k, v in tab.items()} for j, tab in alg.sl2.items()},
        f=ONE if f is None else f,
        label=f"adjoint:{alg.name}",
    )
    if validate:
        report = validate_quasimodule(qm, max_total_weight=min(alg.cutoff, 5))
        if not report["passed"]:
            raise ValueError(f"adjoint tables failed validation: {report['failure']}")
    return qm


def weight_zero_state(qm: QuasimoduleInstance) -> Vec:
    """The depth-zero cyclic vector of a Fock instance."""
    return {VACUUM_ID: Fraction(1)}
