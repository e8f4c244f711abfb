"""Exact supercommutative polynomial ring.

Elements are polynomials over a chart's generators with rational
coefficients.  Even generators commute with everything; odd generators
anticommute among themselves and square to zero.  Every value is kept in
a canonical normal form: odd factors sorted ascending by generator index
with the reordering sign folded into the coefficient, no zero
coefficients stored.  Equality is therefore a plain map comparison.

All derivatives here are left derivatives: the generator is
anticommuted to the leftmost position of each monomial and struck.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, NamedTuple, Optional, Union


class SupermechError(Exception):
    """Base class for errors raised by this package."""


class ChartMismatchError(SupermechError):
    pass


class ParityError(SupermechError):
    pass


class NotInvertibleError(SupermechError):
    pass


class UndecidedError(SupermechError):
    """Raised when an exact decision procedure cannot conclude."""


class NotSupportedError(SupermechError):
    pass


class InternalInconsistencyError(SupermechError):
    """A structural identity the engine verifies at build time failed."""


class Parity(IntEnum):
    EVEN = 0
    ODD = 1

    def __str__(self) -> str:
        return "even" if self is Parity.EVEN else "odd"


@dataclass(frozen=True)
class Generator:
    name: str
    parity: Parity
    index: int


@dataclass(frozen=True)
class Chart:
    """A named coordinate system: an ordered list of generators.

    ``kind`` is one of ``"M"``, ``"TM"``, ``"T*M"`` or ``"mixed"`` (the
    last is internal plumbing for velocity back-substitution).
    ``partner_pairs`` maps each base generator to its velocity or
    momentum partner on TM / T*M charts.
    """

    kind: str
    generators: tuple[Generator, ...]
    partner_pairs: tuple[tuple[str, str], ...] = ()

    @cached_property
    def _by_name(self) -> dict[str, Generator]:
        return {g.name: g for g in self.generators}

    @cached_property
    def _partner(self) -> dict[str, str]:
        return dict(self.partner_pairs)

    @cached_property
    def _base_of(self) -> dict[str, str]:
        return {v: k for k, v in self.partner_pairs}

    def generator(self, name: str) -> Generator:
        try:
            return self._by_name[name]
        except KeyError:
            raise ChartMismatchError(f"no generator {name!r} on chart {self.kind}") from None

    def has_generator(self, name: str) -> bool:
        return name in self._by_name

    def parity_of_index(self, index: int) -> Parity:
        return self.generators[index].parity

    def partner(self, base_name: str) -> str:
        return self._partner[base_name]

    def base_of(self, derived_name: str) -> Optional[str]:
        return self._base_of.get(derived_name)

    @property
    def base_names(self) -> tuple[str, ...]:
        if not self.partner_pairs:
            return tuple(g.name for g in self.generators)
        return tuple(k for k, _ in self.partner_pairs)

    @property
    def fiber_names(self) -> tuple[str, ...]:
        return tuple(v for _, v in self.partner_pairs)


class Monomial(NamedTuple):
    """Canonical monomial: even exponents plus sorted odd factor indices."""

    evens: tuple[tuple[int, int], ...]  # (generator index, exponent), index-sorted
    odds: tuple[int, ...]  # strictly increasing generator indices

    def degree(self) -> int:
        return sum(e for _, e in self.evens) + len(self.odds)


ONE_MONOMIAL = Monomial((), ())

Scalar = Union[int, Fraction]


def _merge_odds(a: tuple[int, ...], b: tuple[int, ...]) -> Optional[tuple[int, tuple[int, ...]]]:
    """Merge two sorted odd-index tuples; None when an index repeats.

    Returns (sign, merged) where sign counts the transpositions needed
    to interleave b into a.
    """
    i = j = 0
    sign = 1
    out: list[int] = []
    while i < len(a) and j < len(b):
        if a[i] == b[j]:
            return None
        if a[i] < b[j]:
            out.append(a[i])
            i += 1
        else:
            if (len(a) - i) % 2:
                sign = -sign
            out.append(b[j])
            j += 1
    out.extend(a[i:])
    out.extend(b[j:])
    return sign, tuple(out)


def _mul_monomials(m1: Monomial, m2: Monomial) -> Optional[tuple[int, Monomial]]:
    merged = _merge_odds(m1.odds, m2.odds)
    if merged is None:
        return None
    sign, odds = merged
    exps: dict[int, int] = dict(m1.evens)
    for idx, e in m2.evens:
        exps[idx] = exps.get(idx, 0) + e
    evens = tuple(sorted(exps.items()))
    return sign, Monomial(evens, odds)


class Superfunction:
    """A ring element over a fixed chart, in canonical normal form."""

    __slots__ = ("chart", "terms")

    def __init__(self, chart: Chart, terms: Mapping[Monomial, Scalar]):
        clean: dict[Monomial, Fraction] = {}
        for mono, coeff in terms.items():
            c = Fraction(coeff)
            if c:
                clean[mono] = c
        self.chart = chart
        self.terms = clean

    # -- constructors -------------------------------------------------

    @classmethod
    def zero(cls, chart: Chart) -> "Superfunction":
        return cls(chart, {})

    @classmethod
    def constant(cls, chart: Chart, value: Scalar) -> "Superfunction":
        return cls(chart, {ONE_MONOMIAL: Fraction(value)})

    @classmethod
    def generator(cls, chart: Chart, name: str) -> "Superfunction":
        g = chart.generator(name)
        if g.parity is Parity.ODD:
            mono = Monomial((), (g.index,))
        else:
            mono = Monomial(((g.index, 1),), ())
        return cls(chart, {mono: Fraction(1)})

    # -- basic predicates ---------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(m == ONE_MONOMIAL for m in self.terms)

    def constant_value(self) -> Fraction:
        if not self.terms:
            return Fraction(0)
        if not self.is_constant():
            raise SupermechError("not a constant")
        return self.terms[ONE_MONOMIAL]

    def parity(self) -> Optional[Parity]:
        """Parity when homogeneous, None when inhomogeneous, EVEN for zero."""
        seen = {len(m.odds) % 2 for m in self.terms}
        if not seen:
            return Parity.EVEN
        if len(seen) > 1:
            return None
        return Parity(seen.pop())

    def has_parity(self, p: Parity) -> bool:
        """True when every term has parity p; zero matches any parity."""
        return all(len(m.odds) % 2 == int(p) for m in self.terms)

    def max_degree(self) -> int:
        return max((m.degree() for m in self.terms), default=0)

    def generators_used(self) -> set[str]:
        names: set[str] = set()
        for m in self.terms:
            for idx, _ in m.evens:
                names.add(self.chart.generators[idx].name)
            for idx in m.odds:
                names.add(self.chart.generators[idx].name)
        return names

    # -- arithmetic ----------------------------------------------------

    def _check_chart(self, other: "Superfunction") -> None:
        if self.chart != other.chart:
            raise ChartMismatchError(
                f"operands live on different charts ({self.chart.kind} vs {other.chart.kind})"
            )

    def _coerce(self, other: Union["Superfunction", Scalar]) -> "Superfunction":
        if isinstance(other, Superfunction):
            self._check_chart(other)
            return other
        return Superfunction.constant(self.chart, other)

    def __add__(self, other: Union["Superfunction", Scalar]) -> "Superfunction":
        other = self._coerce(other)
        terms = dict(self.terms)
        for m, c in other.terms.items():
            terms[m] = terms.get(m, Fraction(0)) + c
        return Superfunction(self.chart, terms)

    __radd__ = __add__

    def __neg__(self) -> "Superfunction":
        return Superfunction(self.chart, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other: Union["Superfunction", Scalar]) -> "Superfunction":
        return self + (-self._coerce(other))

    def __rsub__(self, other: Scalar) -> "Superfunction":
        return self._coerce(other) - self

    def __mul__(self, other: Union["Superfunction", Scalar]) -> "Superfunction":
        if not isinstance(other, Superfunction):
            c = Fraction(other)
            return Superfunction(self.chart, {m: c * v for m, v in self.terms.items()})
        self._check_chart(other)
        terms: dict[Monomial, Fraction] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                prod = _mul_monomials(m1, m2)
                if prod is None:
                    continue
                sign, mono = prod
                terms[mono] = terms.get(mono, Fraction(0)) + sign * c1 * c2
        return Superfunction(self.chart, terms)

    def __rmul__(self, other: Scalar) -> "Superfunction":
        return self * other

    def __pow__(self, n: int) -> "Superfunction":
        if n < 0:
            raise SupermechError("negative powers are not ring elements")
        result = Superfunction.constant(self.chart, 1)
        for _ in range(n):
            result = result * self
        return result

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Fraction)):
            other = Superfunction.constant(self.chart, other)
        if not isinstance(other, Superfunction):
            return NotImplemented
        return self.chart == other.chart and self.terms == other.terms

    def __hash__(self) -> int:
        return hash((self.chart, frozenset(self.terms.items())))

    def __repr__(self) -> str:
        return f"Superfunction({render(self)!r})"

    # -- calculus on the ring -------------------------------------------

    def left_partial(self, name: str) -> "Superfunction":
        g = self.chart.generator(name)
        terms: dict[Monomial, Fraction] = {}
        for mono, coeff in self.terms.items():
            if g.parity is Parity.EVEN:
                exps = dict(mono.evens)
                e = exps.get(g.index, 0)
                if not e:
                    continue
                if e == 1:
                    del exps[g.index]
                else:
                    exps[g.index] = e - 1
                new = Monomial(tuple(sorted(exps.items())), mono.odds)
                terms[new] = terms.get(new, Fraction(0)) + e * coeff
            else:
                if g.index not in mono.odds:
                    continue
                pos = mono.odds.index(g.index)
                sign = -1 if pos % 2 else 1
                new = Monomial(mono.evens, mono.odds[:pos] + mono.odds[pos + 1 :])
                terms[new] = terms.get(new, Fraction(0)) + sign * coeff
        return Superfunction(self.chart, terms)

    def body(self) -> "Superfunction":
        """Set every odd generator to zero."""
        terms = {m: c for m, c in self.terms.items() if not m.odds}
        return Superfunction(self.chart, terms)

    def soul(self) -> "Superfunction":
        return self - self.body()

    def invert(self) -> "Superfunction":
        """Inverse of an even element whose body is a nonzero constant.

        The nilpotent part is removed by a finite geometric series; it
        terminates because the odd sector is finite-dimensional.
        """
        if not self.has_parity(Parity.EVEN):
            raise NotInvertibleError("only even elements are inverted here")
        body = self.body()
        if not body.is_constant():
            raise NotInvertibleError("body is not a constant")
        c = body.constant_value()
        if not c:
            raise NotInvertibleError("body vanishes")
        n = self * (Fraction(1) / c) - 1
        result = Superfunction.constant(self.chart, 1)
        power = Superfunction.constant(self.chart, 1)
        sign = 1
        while True:
            power = power * n
            sign = -sign
            if power.is_zero():
                break
            result = result + power * sign
        return result * (Fraction(1) / c)


def parity_of(f: Superfunction) -> Optional[Parity]:
    return f.parity()


class AlgebraMorphism:
    """Parity-preserving superalgebra homomorphism given on generators.

    Acts as a pullback: the domain chart's generators map to values in
    the codomain chart's algebra.  Application is the unique ring
    homomorphism extending the assignment.
    """

    __slots__ = ("domain", "codomain", "images")

    def __init__(self, domain: Chart, codomain: Chart, images: Mapping[str, Superfunction]):
        self.domain = domain
        self.codomain = codomain
        self.images: dict[str, Superfunction] = {}
        for g in domain.generators:
            try:
                img = images[g.name]
            except KeyError:
                raise SupermechError(f"morphism misses generator {g.name!r}") from None
            if img.chart != codomain:
                raise ChartMismatchError(f"image of {g.name!r} is not over the codomain chart")
            if not img.has_parity(g.parity):
                raise ParityError(
                    f"image of {g.name!r} must be {g.parity}, got {render(img)}"
                )
            self.images[g.name] = img

    @classmethod
    def identity(cls, chart: Chart) -> "AlgebraMorphism":
        return cls(chart, chart, {g.name: Superfunction.generator(chart, g.name) for g in chart.generators})

    def apply(self, f: Superfunction) -> Superfunction:
        if f.chart != self.domain:
            raise ChartMismatchError("function is not over the morphism's domain chart")
        result = Superfunction.zero(self.codomain)
        gens = self.domain.generators
        for mono, coeff in f.terms.items():
            acc = Superfunction.constant(self.codomain, coeff)
            for idx, e in mono.evens:
                acc = acc * (self.images[gens[idx].name] ** e)
            for idx in mono.odds:
                acc = acc * self.images[gens[idx].name]
            result = result + acc
        return result

    def then(self, after: "AlgebraMorphism") -> "AlgebraMorphism":
        """Compose pullbacks: (after . self) as algebra maps."""
        if after.domain != self.codomain:
            raise ChartMismatchError("morphisms do not compose")
        return AlgebraMorphism(
            self.domain, after.codomain, {name: after.apply(img) for name, img in self.images.items()}
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, AlgebraMorphism):
            return NotImplemented
        return (
            self.domain == other.domain
            and self.codomain == other.codomain
            and self.images == other.images
        )


def pullback_apply(morphism: AlgebraMorphism, f: Superfunction) -> Superfunction:
    return morphism.apply(f)


# -- canonical text rendering -----------------------------------------


def _display_key(chart: Chart, mono: Monomial):
    vec = [0] * len(chart.generators)
    for idx, e in mono.evens:
        vec[idx] = e
    for idx in mono.odds:
        vec[idx] = 1
    return (mono.degree(), tuple(vec))


def display_terms(f: Superfunction) -> list[tuple[Monomial, Fraction]]:
    """Terms in deterministic display order: graded, then exponent-lex."""
    return sorted(f.terms.items(), key=lambda item: _display_key(f.chart, item[0]))


def _render_monomial(chart: Chart, mono: Monomial) -> str:
    factors: list[str] = []
    for idx, e in mono.evens:
        name = chart.generators[idx].name
        factors.append(name if e == 1 else f"{name}^{e}")
    for idx in mono.odds:
        factors.append(chart.generators[idx].name)
    return "*".join(factors)


def render(f: Superfunction) -> str:
    if f.is_zero():
        return "0"
    parts: list[str] = []
    for mono, coeff in display_terms(f):
        body = _render_monomial(f.chart, mono)
        mag = abs(coeff)
        if not body:
            text = str(mag)
        elif mag == 1:
            text = body
        else:
            text = f"{mag}*{body}"
        if not parts:
            parts.append(text if coeff > 0 else f"-{text}")
        else:
            parts.append(f"+ {text}" if coeff > 0 else f"- {text}")
    return " ".join(parts)
