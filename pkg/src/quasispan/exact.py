"""Exact scalar arithmetic and quasi-locality polynomials.

Every number in the engine is a ``fractions.Fraction`` (aliased ``Rational``
here): always reduced, positive denominator, arbitrary precision.  Floats are
never used.

A quasi-locality polynomial f(x1, x2) is stored sparsely as a map
(i, j) -> coefficient of x1^i x2^j.  Normalized form: all exponents are
nonnegative, the constant term is exactly 1, and every exponent is bounded by
the degree bound L.  Any nonzero polynomial whose support has a unique minimal
exponent pair can be brought to this form by dividing out a monomial
c * x1^i * x2^j.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Tuple, Union

Rational = Fraction

RationalLike = Union[Rational, int, str]


def as_rational(value: RationalLike) -> Rational:
    """Coerce an int, Fraction, or 'num/den' string to an exact Rational."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    raise TypeError(f"not an exact rational: {value!r}")


def format_rational(q: Rational) -> str:
    """Render a Rational as 'num/den' (or plain 'num' when den == 1)."""
    return str(q)


def binom(m: int, k: int) -> Rational:
    """Generalized binomial coefficient: m over k for any integer m, k >= 0.

    Defined through the falling factorial m(m-1)...(m-k+1) / k!, so e.g.
    binom(-2, 3) == -4.  Negative k is rejected.
    """
    if k < 0:
        raise ValueError("binom: lower index must be nonnegative")
    num = 1
    den = 1
    for t in range(k):
        num *= m - t
        den *= t + 1
    return Fraction(num, den)


@dataclass(frozen=True, eq=False)
class QuasiPolynomial:
    """Normalized quasi-locality polynomial.

    terms maps (i, j) with 0 <= i, j <= degree_bound to nonzero coefficients;
    terms[(0, 0)] == 1 always holds.
    """

    terms: Mapping[Tuple[int, int], Rational]
    degree_bound: int = field(default=0)

    def __post_init__(self) -> None:
        cleaned: Dict[Tuple[int, int], Rational] = {}
        for (i, j), c in dict(self.terms).items():
            q = as_rational(c)
            if q == 0:
                continue
            if i < 0 or j < 0:
                raise ValueError("quasi-polynomial support must be nonnegative")
            cleaned[(int(i), int(j))] = q
        if not cleaned:
            raise ValueError("quasi-polynomial must be nonzero")
        if cleaned.get((0, 0)) != 1:
            raise ValueError("quasi-polynomial constant term must be 1")
        bound = max(max(i for i, _ in cleaned), max(j for _, j in cleaned))
        object.__setattr__(self, "terms", dict(cleaned))
        object.__setattr__(self, "degree_bound", bound)

    def coeff(self, i: int, j: int) -> Rational:
        return self.terms.get((i, j), Fraction(0))

    def items(self) -> Iterable[Tuple[Tuple[int, int], Rational]]:
        return sorted(self.terms.items())

    def is_one(self) -> bool:
        return self.terms == {(0, 0): Fraction(1)}

    def _key(self) -> Tuple[Tuple[int, int, Rational], ...]:
        return tuple((i, j, c) for (i, j), c in sorted(self.terms.items()))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, QuasiPolynomial):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self) -> int:
        return hash(self._key())

    def __repr__(self) -> str:
        parts = []
        for (i, j), c in self.items():
            mono = "1" if (i, j) == (0, 0) else f"x1^{i} x2^{j}"
            parts.append(f"{c}*{mono}")
        return "QuasiPolynomial(" + " + ".join(parts) + ")"

    def to_json_obj(self) -> Dict[str, List]:
        return {
            "terms": [[i, j, format_rational(c)] for (i, j), c in self.items()]
        }

    @staticmethod
    def from_json_obj(obj: Mapping) -> "QuasiPolynomial":
        raw = {}
        for entry in obj["terms"]:
            i, j, c = entry
            raw[(int(i), int(j))] = as_rational(c)
        return QuasiPolynomial(raw)


ONE = None  # populated below once the class exists


def quasi_poly(raw: Mapping[Tuple[int, int], RationalLike]) -> QuasiPolynomial:
    """Build a QuasiPolynomial from an already-normalized coefficient map."""
    return QuasiPolynomial({k: as_rational(v) for k, v in raw.items()})


def normalize_quasi_poly(
    raw: Mapping[Tuple[int, int], RationalLike]
) -> QuasiPolynomial:
    """Bring an arbitrary nonzero Laurent-supported map into normalized form.

    Shifts the minimal exponents to (0, 0) and rescales so the constant term
    is 1.  Raises ValueError for the zero map and for maps that cannot be
    normalized this way (no term sits at the componentwise-minimal exponent
    pair, e.g. x1 + x2).
    """
    support: Dict[Tuple[int, int], Rational] = {}
    for (i, j), c in raw.items():
        q = as_rational(c)
        if q != 0:
            support[(int(i), int(j))] = q
    if not support:
        raise ValueError("cannot normalize the zero polynomial")
    imin = min(i for i, _ in support)
    jmin = min(j for _, j in support)
    shifted = {(i - imin, j - jmin): c for (i, j), c in support.items()}
    lead = shifted.get((0, 0))
    if lead is None:
        raise ValueError(
            "not normalizable: no term at the minimal exponent pair"
        )
    return QuasiPolynomial({k: c / lead for k, c in shifted.items()})


ONE = QuasiPolynomial({(0, 0): Fraction(1)})
