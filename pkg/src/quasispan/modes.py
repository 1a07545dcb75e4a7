"""Free mode-expression algebra.

A Monomial is an exact coefficient times an ordered word of generator modes
x(1)_{n_1} ... x(r)_{n_r} applied to a tagged generating vector w.  An
Expression is a finite canonical sum of such monomials.  Expressions are pure
values: construction canonicalizes (merges duplicate words, drops zeros,
sorts), and evaluation pushes the word right-to-left through a quasimodule's
exact action tables.

Bookkeeping symbols: for a mode x_n of a weight-wt(x) generator the degree is
wt(x) - n - 1 (how much the operator raises module weight); for a word, the
filtration level s is the sum of the generator weights and r is its length.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .algebra import AlgebraInstance, Vec, vec_add_into
from .exact import Rational, as_rational, format_rational
from .quasimodule import QuasimoduleInstance


@dataclass(frozen=True, order=True)
class ModeSymbol:
    """One mode x_n of a homogeneous generator (id plus cached weight)."""

    gen: str
    weight: int
    index: int

    def __post_init__(self) -> None:
        if self.weight < 0:
            raise ValueError("mode generator must have nonnegative weight")

    @property
    def degree(self) -> int:
        return self.weight - self.index - 1

    def shifted(self, delta: int) -> "ModeSymbol":
        return ModeSymbol(self.gen, self.weight, self.index + delta)

    def __str__(self) -> str:
        return f"{self.gen}[{self.index}]"


def mode(alg: AlgebraInstance, gen_id: str, index: int) -> ModeSymbol:
    """Build a ModeSymbol for an algebra basis element, resolving its weight."""
    return ModeSymbol(gen_id, alg.weight_of(gen_id), index)


Word = Tuple[ModeSymbol, ...]


@dataclass(frozen=True)
class Monomial:
    """coefficient * word applied to the generating vector ``base``."""

    coeff: Rational
    word: Word
    base: str = "w"

    @property
    def length(self) -> int:
        return len(self.word)

    @property
    def filtration_level(self) -> int:
        return sum(m.weight for m in self.word)

    @property
    def degree(self) -> int:
        return sum(m.degree for m in self.word)

    def indices(self) -> Tuple[int, ...]:
        return tuple(m.index for m in self.word)

    def scaled(self, c: Rational) -> "Monomial":
        return Monomial(self.coeff * c, self.word, self.base)

    def sort_key(self) -> Tuple:
        return (
            self.filtration_level,
            self.length,
            tuple(m.gen for m in self.word),
            self.indices(),
            self.base,
        )

    def __str__(self) -> str:
        head = format_rational(self.coeff)
        body = " ".join(str(m) for m in self.word)
        return f"{head} * {body} {self.base}".replace("*  ", "* ")


def filtration_level(m: Monomial) -> int:
    return m.filtration_level


def degree(m: ModeSymbol) -> int:
    return m.degree


@dataclass(frozen=True)
class Expression:
    """Canonical finite sum of monomials; construct via make_expression."""

    terms: Tuple[Monomial, ...]

    def __iter__(self):
        return iter(self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def scaled(self, c: Rational) -> "Expression":
        c = as_rational(c)
        if c == 0:
            return Expression(())
        return Expression(tuple(t.scaled(c) for t in self.terms))

    def __add__(self, other: "Expression") -> "Expression":
        return make_expression(list(self.terms) + list(other.terms))

    def __sub__(self, other: "Expression") -> "Expression":
        return self + other.scaled(Fraction(-1))

    def max_filtration(self) -> int:
        return max((t.filtration_level for t in self.terms), default=0)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        return "  +  ".join(str(t) for t in self.terms)

    def to_json_obj(self) -> List[dict]:
        return [
            {
                "coeff": format_rational(t.coeff),
                "word": [[m.gen, m.index] for m in t.word],
            }
            for t in self.terms
        ]


def make_expression(
    monomials: Iterable[Monomial],
    vacuum_id: Optional[str] = None,
) -> Expression:
    """Canonicalize a raw monomial list into an Expression.

    Merges equal words, drops zero coefficients, and sorts by the canonical
    key (filtration level, length, generator ids, indices).  When vacuum_id
    is given, vacuum modes are resolved eagerly by the vacuum axioms: a mode
    1_{-1} acts as the identity (the symbol is deleted) and 1_n for n != -1
    acts as zero (the whole term is dropped).
    """
    merged: Dict[Tuple[Word, str], Rational] = {}
    for mono in monomials:
        word = mono.word
        coeff = mono.coeff
        if vacuum_id is not None and any(m.gen == vacuum_id for m in word):
            kept: List[ModeSymbol] = []
            dead = False
            for m in word:
                if m.gen != vacuum_id:
                    kept.append(m)
                elif m.index != -1:
                    dead = True
                    break
            if dead:
                continue
            word = tuple(kept)
        if coeff == 0:
            continue
        key = (word, mono.base)
        acc = merged.get(key, Fraction(0)) + coeff
        if acc == 0:
            merged.pop(key, None)
        else:
            merged[key] = acc
    terms = [Monomial(c, w, b) for (w, b), c in merged.items()]
    terms.sort(key=Monomial.sort_key)
    return Expression(tuple(terms))


def single(word: Sequence[ModeSymbol], coeff: Rational = Fraction(1), base: str = "w") -> Expression:
    return make_expression([Monomial(as_rational(coeff), tuple(word), base)])


EMPTY_WORD = Expression((Monomial(Fraction(1), ()),))


def evaluate(
    expr: Expression,
    qm: QuasimoduleInstance,
    w_vector: Mapping[str, Fraction],
    strict: bool = True,
) -> Vec:
    """Apply every monomial word right-to-left through the action tables.

    Exact and linear; the empty word returns w_vector itself.  With strict
    set, any contribution that would leave the depth window raises
    TruncationOverflow; otherwise such contributions are silently cut.
    """
    total: Vec = {}
    for mono in expr.terms:
        current: Vec = {k: Fraction(v) for k, v in w_vector.items() if v != 0}
        for sym in reversed(mono.word):
            if sym.gen not in qm.algebra.weights:
                raise KeyError(f"unresolvable generator {sym.gen!r}")
            nxt: Vec = {}
            for mid, c in current.items():
                vec_add_into(nxt, qm.apply_basis(sym.gen, sym.index, mid, strict=strict), c)
            current = nxt
            if not current:
                break
        vec_add_into(total, current, mono.coeff)
    return total


def evaluate_adjoint(expr: Expression, alg: AlgebraInstance) -> Vec:
    """Apply every monomial word right-to-left to the algebra's vacuum.

    Exact; raises RuntimeError if any intermediate leaves the weight cutoff,
    so callers only get values they can trust.
    """
    total: Vec = {}
    for mono in expr.terms:
        current: Vec = alg.vacuum_vec()
        for sym in reversed(mono.word):
            nxt: Vec = {}
            for bid, c in current.items():
                vec, overflow = alg.mode_action_basis(sym.gen, sym.index, bid)
                if overflow:
                    raise RuntimeError(
                        f"{sym.gen}_{sym.index} on {bid} exceeds cutoff {alg.cutoff}"
                    )
                vec_add_into(nxt, vec, c)
            current = nxt
            if not current:
                break
        vec_add_into(total, current, mono.coeff)
    return total


def expression_to_json(expr: Expression) -> List[dict]:
    return expr.to_json_obj()


def expression_from_json(obj: Iterable[Mapping], alg: AlgebraInstance, base: str = "w") -> Expression:
    """Rebuild an Expression, resolving generator weights from the algebra."""
    monos: List[Monomial] = []
    for entry in obj:
        coeff = as_rational(entry["coeff"])
        word = tuple(mode(alg, gen, int(n)) for gen, n in entry["word"])
        monos.append(Monomial(coeff, word, base))
    return make_expression(monos)
