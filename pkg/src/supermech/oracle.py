"""Brute-force verification in a concrete finite exterior algebra.

Superfunctions are evaluated by sending even generators to random exact
rationals and odd generators to distinct basis 1-vectors of an exterior
algebra with a couple of spare dimensions.  Evaluation is a ring
homomorphism, so two symbolically equal elements must evaluate
identically in every context; the spare dimensions keep products that
vanish only by an odd square from being confused with accidental zeros.

This module shares no arithmetic code with the symbolic kernel: the
multivector product below is an independent implementation.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from random import Random
from typing import Mapping

from .algebra import Chart, Parity, Superfunction, SupermechError

MAX_ODD_DIMENSION = 12


class Multivector:
    """Element of an exterior algebra over the rationals.

    Components are indexed by strictly increasing tuples of basis
    indices; the product follows the alternating sign rule.
    """

    __slots__ = ("components",)

    def __init__(self, components: Mapping[tuple[int, ...], Fraction]):
        self.components = {k: Fraction(v) for k, v in components.items() if v}

    @classmethod
    def scalar(cls, value) -> "Multivector":
        return cls({(): Fraction(value)})

    @classmethod
    def basis(cls, index: int) -> "Multivector":
        return cls({(index,): Fraction(1)})

    def __add__(self, other: "Multivector") -> "Multivector":
        out = dict(self.components)
        for key, value in other.components.items():
            out[key] = out.get(key, Fraction(0)) + value
        return Multivector(out)

    def __mul__(self, other: "Multivector") -> "Multivector":
        out: dict[tuple[int, ...], Fraction] = {}
        for ka, va in self.components.items():
            for kb, vb in other.components.items():
                overlap = set(ka) & set(kb)
                if overlap:
                    continue
                combined = ka + kb
                inversions = 0
                for i, x in enumerate(combined):
                    for y in combined[i + 1 :]:
                        if x > y:
                            inversions += 1
                key = tuple(sorted(combined))
                sign = -1 if inversions % 2 else 1
                out[key] = out.get(key, Fraction(0)) + sign * va * vb
        return Multivector(out)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Multivector):
            return NotImplemented
        return self.components == other.components

    def is_zero(self) -> bool:
        return not self.components

    def __repr__(self) -> str:
        return f"Multivector({self.components!r})"


@dataclass
class OracleContext:
    odd_dimension: int
    odd_assignment: dict[str, int]  # odd generator name -> basis index
    even_values: dict[str, Fraction]

    def __post_init__(self) -> None:
        if self.odd_dimension > MAX_ODD_DIMENSION:
            raise SupermechError(
                f"odd dimension {self.odd_dimension} exceeds the desk-scale bound"
            )
        if len(set(self.odd_assignment.values())) != len(self.odd_assignment):
            raise SupermechError("odd assignment must be injective")


def random_context(chart: Chart, rng: Random, spare: int = 2) -> OracleContext:
    odd_names = [g.name for g in chart.generators if g.parity is Parity.ODD]
    even_names = [g.name for g in chart.generators if g.parity is Parity.EVEN]
    n = min(len(odd_names) + spare, MAX_ODD_DIMENSION)
    if len(odd_names) > n:
        raise SupermechError("too many odd generators for the oracle")
    indices = rng.sample(range(1, n + 1), len(odd_names))
    evens = {
        name: Fraction(rng.randint(-9, 9), rng.randint(1, 9)) for name in even_names
    }
    return OracleContext(n, dict(zip(odd_names, indices)), evens)


def evaluate(f: Superfunction, ctx: OracleContext) -> Multivector:
    chart = f.chart
    for name in f.generators_used():
        g = chart.generator(name)
        table = ctx.odd_assignment if g.parity is Parity.ODD else ctx.even_values
        if name not in table:
            raise SupermechError(f"oracle context does not cover generator {name!r}")
    total = Multivector({})
    for mono, coeff in f.terms.items():
        scalar = Fraction(coeff)
        for idx, e in mono.evens:
            scalar *= ctx.even_values[chart.generators[idx].name] ** e
        value = Multivector.scalar(scalar)
        for idx in mono.odds:
            value = value * Multivector.basis(ctx.odd_assignment[chart.generators[idx].name])
        total = total + value
    return total


def check_identity(f: Superfunction, g: Superfunction, trials: int, rng: Random) -> bool:
    """Exact agreement of both evaluations over randomized contexts."""
    if f.chart != g.chart:
        raise SupermechError("identity check needs a shared chart")
    for _ in range(max(1, trials)):
        ctx = random_context(f.chart, rng)
        if evaluate(f, ctx) != evaluate(g, ctx):
            return False
    return True
