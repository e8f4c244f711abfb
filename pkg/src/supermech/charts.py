"""Construction of the base, tangent and cotangent charts.

Derived generator names are fixed: ``v_<base>`` and ``zeta_<base>`` on
the tangent chart, ``p_<base>`` and ``eta_<base>`` on the cotangent
chart.  The cotangent chart carries the canonical 1-form and its
(negated) exterior derivative; with right-placed coefficients the
canonical 1-form reads ``sum dq^i . p^i - sum dth^a . eta^a``, the sign
on the odd block being what the stored-coefficient convention requires.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .algebra import AlgebraMorphism, Chart, Generator, Parity, Superfunction, SupermechError
from .calculus import (
    GradedOneForm,
    GradedTwoForm,
    VectorField,
    total_time_derivative,
    vertical_lift,
)

_NAME_RE = re.compile(r"[a-zA-Z][a-zA-Z0-9_]*\Z")
_DERIVED_PREFIXES = ("v_", "p_", "zeta_", "eta_")


@dataclass(frozen=True)
class ChartTriple:
    """The three charts of one problem plus their canonical structure."""

    base: Chart
    tangent: Chart
    cotangent: Chart
    tau_pullback: AlgebraMorphism  # base functions into the tangent algebra
    pi_pullback: AlgebraMorphism  # base functions into the cotangent algebra
    theta0: GradedOneForm
    omega0: GradedTwoForm

    def time_derivative(self) -> VectorField:
        return total_time_derivative(self.base, self.tangent, self.tau_pullback)

    def liouville_field(self) -> VectorField:
        return vertical_lift(self.time_derivative(), self.tangent, self.tau_pullback)


def _validate_names(even_names, odd_names) -> None:
    all_names = list(even_names) + list(odd_names)
    seen = set()
    for name in all_names:
        if not _NAME_RE.match(name):
            raise SupermechError(f"invalid generator name {name!r}")
        if name.startswith(_DERIVED_PREFIXES):
            raise SupermechError(
                f"name {name!r} collides with a derived-generator prefix {_DERIVED_PREFIXES}"
            )
        if name in seen:
            raise SupermechError(f"duplicate generator name {name!r}")
        seen.add(name)


def make_charts(even_names, odd_names) -> ChartTriple:
    even_names = tuple(even_names)
    odd_names = tuple(odd_names)
    _validate_names(even_names, odd_names)

    base_gens = [Generator(n, Parity.EVEN, i) for i, n in enumerate(even_names)]
    base_gens += [Generator(n, Parity.ODD, len(even_names) + i) for i, n in enumerate(odd_names)]
    base = Chart("M", tuple(base_gens))

    def bundle_chart(kind: str, even_prefix: str, odd_prefix: str) -> Chart:
        gens: list[Generator] = []
        idx = 0
        for n in even_names:
            gens.append(Generator(n, Parity.EVEN, idx))
            idx += 1
        for n in even_names:
            gens.append(Generator(f"{even_prefix}{n}", Parity.EVEN, idx))
            idx += 1
        for n in odd_names:
            gens.append(Generator(n, Parity.ODD, idx))
            idx += 1
        for n in odd_names:
            gens.append(Generator(f"{odd_prefix}{n}", Parity.ODD, idx))
            idx += 1
        pairs = tuple((n, f"{even_prefix}{n}") for n in even_names) + tuple(
            (n, f"{odd_prefix}{n}") for n in odd_names
        )
        return Chart(kind, tuple(gens), pairs)

    tangent = bundle_chart("TM", "v_", "zeta_")
    cotangent = bundle_chart("T*M", "p_", "eta_")

    tau = AlgebraMorphism(
        base, tangent, {g.name: Superfunction.generator(tangent, g.name) for g in base.generators}
    )
    pi = AlgebraMorphism(
        base, cotangent, {g.name: Superfunction.generator(cotangent, g.name) for g in base.generators}
    )

    theta_coeffs = {}
    omega_entries = {}
    for n in even_names:
        p = Superfunction.generator(cotangent, f"p_{n}")
        theta_coeffs[n] = p
        omega_entries[(n, f"p_{n}")] = Superfunction.constant(cotangent, 1)
    for n in odd_names:
        eta = Superfunction.generator(cotangent, f"eta_{n}")
        theta_coeffs[n] = -eta
        omega_entries[(n, f"eta_{n}")] = Superfunction.constant(cotangent, -1)
    theta0 = GradedOneForm(cotangent, theta_coeffs)
    omega0 = GradedTwoForm(cotangent, omega_entries)

    return ChartTriple(base, tangent, cotangent, tau, pi, theta0, omega0)


def transport_base_function(f: Superfunction, target: Chart) -> Superfunction:
    """Move a function touching only shared-name generators to another chart."""
    missing = [n for n in f.generators_used() if not target.has_generator(n)]
    if missing:
        raise SupermechError(f"function touches generators absent from target chart: {missing}")
    images = {
        g.name: Superfunction.generator(target, g.name)
        if target.has_generator(g.name)
        else Superfunction.zero(target)
        for g in f.chart.generators
    }
    return AlgebraMorphism(f.chart, target, images).apply(f)
