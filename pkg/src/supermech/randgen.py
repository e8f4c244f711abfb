"""Seeded random ring elements for verification sweeps."""

from __future__ import annotations

from fractions import Fraction
from random import Random

from .algebra import Chart, Monomial, Parity, Superfunction


def random_monomial(rng: Random, chart: Chart, parity: Parity | None, max_degree: int) -> Monomial:
    evens = [g for g in chart.generators if g.parity is Parity.EVEN]
    odds = [g for g in chart.generators if g.parity is Parity.ODD]
    n_odd = rng.randint(0, min(len(odds), 2))
    if parity is not None and n_odd % 2 != int(parity):
        n_odd = n_odd + 1 if n_odd + 1 <= len(odds) else n_odd - 1
    if parity is not None and (n_odd < 0 or n_odd % 2 != int(parity)):
        n_odd = None
    if n_odd is None:
        return Monomial((), ())
    odd_idx = tuple(sorted(g.index for g in rng.sample(odds, n_odd))) if n_odd else ()
    exps: dict[int, int] = {}
    budget = max(0, max_degree - n_odd)
    for _ in range(rng.randint(0, budget)):
        if not evens:
            break
        g = rng.choice(evens)
        exps[g.index] = exps.get(g.index, 0) + 1
    return Monomial(tuple(sorted(exps.items())), odd_idx)


def random_homogeneous(
    rng: Random, chart: Chart, parity: Parity, max_degree: int = 2, n_terms: int = 3
) -> Superfunction:
    """Random homogeneous element; may be zero when the chart is too small."""
    result = Superfunction.zero(chart)
    for _ in range(rng.randint(1, n_terms)):
        mono = random_monomial(rng, chart, parity, max_degree)
        if len(mono.odds) % 2 != int(parity):
            continue
        coeff = Fraction(rng.randint(-4, 4), rng.randint(1, 3))
        result = result + Superfunction(chart, {mono: coeff})
    return result


def random_superfunction(
    rng: Random, chart: Chart, max_degree: int = 3, n_terms: int = 4
) -> Superfunction:
    result = Superfunction.zero(chart)
    for _ in range(rng.randint(1, n_terms)):
        mono = random_monomial(rng, chart, None, max_degree)
        coeff = Fraction(rng.randint(-6, 6), rng.randint(1, 4))
        result = result + Superfunction(chart, {mono: coeff})
    return result
