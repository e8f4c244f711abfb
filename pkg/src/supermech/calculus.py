"""Vector fields and graded 1- and 2-forms over a chart.

Sign conventions (fixed once, everything else is derived from them):

* a basis 1-form ``dx^a`` carries bidegree (1, |x^a|); swapping two
  homogeneous factors of bidegrees (p, s) and (q, t) costs
  ``(-1)^(pq + st)``.  In particular ``dx^a ^ dx^b = -(-1)^(|a||b|) dx^b ^ dx^a``,
  so wedge squares of even generators vanish while ``dth ^ dth`` need not;
* coefficients are stored to the RIGHT of basis forms;
* the exterior derivative is a left derivation of bidegree (1, 0):
  ``d(sum dx^a . c_a) = - sum dx^a ^ dx^b . (d c_a / d x^b)``;
* interior products contract the first slot, and for a field along a
  morphism the untouched slots are pulled back through it.

A vector field along a pullback ``phi*`` applies to functions as
``X(f) = sum_a X(x^a) . phi*(df/dx^a)`` with left partials, which is the
unique derivation extension of its generator components.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence

from .algebra import (
    AlgebraMorphism,
    Chart,
    ChartMismatchError,
    Parity,
    SupermechError,
    Superfunction,
    render,
)


class VectorField:
    """A derivation on a chart, or along a morphism into another chart.

    ``components`` maps generator names of ``domain`` to values in the
    algebra of ``codomain``.  ``pullback`` is None for ordinary fields
    (domain == codomain) and the morphism's pullback otherwise.
    """

    __slots__ = ("domain", "codomain", "components", "pullback")

    def __init__(
        self,
        domain: Chart,
        components: Mapping[str, Superfunction],
        pullback: Optional[AlgebraMorphism] = None,
    ):
        self.domain = domain
        self.pullback = pullback
        self.codomain = pullback.codomain if pullback is not None else domain
        if pullback is not None and pullback.domain != domain:
            raise ChartMismatchError("pullback does not start at the field's domain chart")
        comps: dict[str, Superfunction] = {}
        for g in domain.generators:
            value = components.get(g.name)
            if value is None:
                value = Superfunction.zero(self.codomain)
            if value.chart != self.codomain:
                raise ChartMismatchError(f"component at {g.name!r} lives on the wrong chart")
            comps[g.name] = value
        self.components = comps

    @classmethod
    def coordinate(cls, chart: Chart, name: str) -> "VectorField":
        return cls(chart, {name: Superfunction.constant(chart, 1)})

    def component(self, name: str) -> Superfunction:
        return self.components[name]

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.components.values())

    def is_vertical(self) -> bool:
        """Zero on base generators (meaningful on TM / T*M charts)."""
        return all(self.components[b].is_zero() for b in self.domain.base_names)

    def parity(self) -> Optional[Parity]:
        """Field parity, i.e. |component| + |generator| mod 2, or None."""
        found: Optional[Parity] = None
        for g in self.domain.generators:
            comp = self.components[g.name]
            if comp.is_zero():
                continue
            p = comp.parity()
            if p is None:
                return None
            fp = Parity((int(p) + int(g.parity)) % 2)
            if found is None:
                found = fp
            elif found is not fp:
                return None
        return found if found is not None else Parity.EVEN

    def parity_parts(self) -> tuple["VectorField", "VectorField"]:
        even: dict[str, Superfunction] = {}
        odd: dict[str, Superfunction] = {}
        for g in self.domain.generators:
            comp = self.components[g.name]
            same = Superfunction(comp.chart, {m: c for m, c in comp.terms.items() if len(m.odds) % 2 == int(g.parity)})
            flip = comp - same
            even[g.name] = same
            odd[g.name] = flip
        return (
            VectorField(self.domain, even, self.pullback),
            VectorField(self.domain, odd, self.pullback),
        )

    def apply(self, f: Superfunction) -> Superfunction:
        if f.chart != self.domain:
            raise ChartMismatchError("function is not over the field's domain chart")
        pb = self.pullback
        result = Superfunction.zero(self.codomain)
        for g in self.domain.generators:
            comp = self.components[g.name]
            if comp.is_zero():
                continue
            partial = f.left_partial(g.name)
            if partial.is_zero():
                continue
            pulled = pb.apply(partial) if pb is not None else partial
            result = result + comp * pulled
        return result

    def __call__(self, f: Superfunction) -> Superfunction:
        return self.apply(f)

    def __add__(self, other: "VectorField") -> "VectorField":
        if self.domain != other.domain or self.codomain != other.codomain:
            raise ChartMismatchError("fields live on different charts")
        return VectorField(
            self.domain,
            {g.name: self.components[g.name] + other.components[g.name] for g in self.domain.generators},
            self.pullback,
        )

    def __sub__(self, other: "VectorField") -> "VectorField":
        return self + other.scale(Fraction(-1))

    def scale(self, factor) -> "VectorField":
        return VectorField(
            self.domain,
            {name: comp * factor for name, comp in self.components.items()},
            self.pullback,
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, VectorField):
            return NotImplemented
        return (
            self.domain == other.domain
            and self.codomain == other.codomain
            and self.components == other.components
        )

    def __repr__(self) -> str:
        return f"VectorField({render_field(self)!r})"


class GradedOneForm:
    """``sum_a dx^a . c_a`` with coefficients stored on the right."""

    __slots__ = ("chart", "coeffs")

    def __init__(self, chart: Chart, coeffs: Mapping[str, Superfunction]):
        self.chart = chart
        clean: dict[str, Superfunction] = {}
        for name, c in coeffs.items():
            chart.generator(name)
            if c.chart != chart:
                raise ChartMismatchError("coefficient on the wrong chart")
            if not c.is_zero():
                clean[name] = c
        self.coeffs = clean

    @classmethod
    def zero(cls, chart: Chart) -> "GradedOneForm":
        return cls(chart, {})

    def coefficient(self, name: str) -> Superfunction:
        return self.coeffs.get(name, Superfunction.zero(self.chart))

    def is_zero(self) -> bool:
        return not self.coeffs

    def __add__(self, other: "GradedOneForm") -> "GradedOneForm":
        if self.chart != other.chart:
            raise ChartMismatchError("forms live on different charts")
        out = dict(self.coeffs)
        for name, c in other.coeffs.items():
            out[name] = out.get(name, Superfunction.zero(self.chart)) + c
        return GradedOneForm(self.chart, out)

    def __sub__(self, other: "GradedOneForm") -> "GradedOneForm":
        return self + other.rmul(Fraction(-1))

    def __neg__(self) -> "GradedOneForm":
        return self.rmul(Fraction(-1))

    def rmul(self, h) -> "GradedOneForm":
        """Right multiplication by a function or scalar: (dx.c).h = dx.(c h)."""
        return GradedOneForm(self.chart, {name: c * h for name, c in self.coeffs.items()})

    def lmul(self, f: Superfunction) -> "GradedOneForm":
        """Left multiplication: f.(dx^a.c) = (-1)^(|f||a|) dx^a.(f c)."""
        out: dict[str, Superfunction] = {}
        f_even = Superfunction(f.chart, {m: c for m, c in f.terms.items() if len(m.odds) % 2 == 0})
        f_odd = f - f_even
        for name, c in self.coeffs.items():
            g = self.chart.generator(name)
            part = f_even * c
            part = part + (f_odd * c) * (-1 if g.parity is Parity.ODD else 1)
            out[name] = part
        return GradedOneForm(self.chart, out)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GradedOneForm):
            return NotImplemented
        return self.chart == other.chart and self.coeffs == other.coeffs

    def __repr__(self) -> str:
        return f"GradedOneForm({render_one_form(self)!r})"


class GradedTwoForm:
    """Sum of ``dx^a ^ dx^b . c`` over canonical pairs a <= b.

    The full coefficient matrix (both orientations) is kept and its
    graded antisymmetry is checked; geometric sums run over the
    canonical upper-triangle entries so every term counts once.  Odd-odd
    diagonal entries are admissible.
    """

    __slots__ = ("chart", "entries", "matrix")

    def __init__(self, chart: Chart, entries: Mapping[tuple[str, str], Superfunction]):
        self.chart = chart
        canonical: dict[tuple[str, str], Superfunction] = {}
        for (a, b), c in entries.items():
            ga, gb = chart.generator(a), chart.generator(b)
            if c.chart != chart:
                raise ChartMismatchError("coefficient on the wrong chart")
            if c.is_zero():
                continue
            if ga.index > gb.index:
                sign = -1 if (ga.parity is Parity.EVEN or gb.parity is Parity.EVEN) else 1
                key, val = (b, a), c * sign
            elif ga.index == gb.index and ga.parity is Parity.EVEN:
                continue  # dx ^ dx = 0 for an even generator
            else:
                key, val = (a, b), c
            if key in canonical:
                canonical[key] = canonical[key] + val
            else:
                canonical[key] = val
        self.entries = {k: v for k, v in canonical.items() if not v.is_zero()}
        matrix: dict[tuple[str, str], Superfunction] = {}
        for (a, b), c in self.entries.items():
            matrix[(a, b)] = c
            if a != b:
                ga, gb = chart.generator(a), chart.generator(b)
                sign = -1 if (ga.parity is Parity.EVEN or gb.parity is Parity.EVEN) else 1
                matrix[(b, a)] = c * sign
        self.matrix = matrix

    @classmethod
    def zero(cls, chart: Chart) -> "GradedTwoForm":
        return cls(chart, {})

    def coefficient(self, a: str, b: str) -> Superfunction:
        return self.matrix.get((a, b), Superfunction.zero(self.chart))

    def is_zero(self) -> bool:
        return not self.entries

    def check_antisymmetry(self) -> bool:
        """omega_ba == -(-1)^(|a||b|) omega_ab on the stored matrix."""
        for (a, b), c in self.matrix.items():
            ga, gb = self.chart.generator(a), self.chart.generator(b)
            sign = -1 if (int(ga.parity) * int(gb.parity)) % 2 == 0 else 1
            other = self.coefficient(b, a)
            if other != c * sign:
                return False
            if a == b and ga.parity is Parity.EVEN and not c.is_zero():
                return False
        return True

    def __add__(self, other: "GradedTwoForm") -> "GradedTwoForm":
        if self.chart != other.chart:
            raise ChartMismatchError("forms live on different charts")
        out = dict(self.entries)
        for key, c in other.entries.items():
            out[key] = out.get(key, Superfunction.zero(self.chart)) + c
        return GradedTwoForm(self.chart, out)

    def __sub__(self, other: "GradedTwoForm") -> "GradedTwoForm":
        return self + other.rmul(Fraction(-1))

    def __neg__(self) -> "GradedTwoForm":
        return self.rmul(Fraction(-1))

    def rmul(self, h) -> "GradedTwoForm":
        return GradedTwoForm(self.chart, {key: c * h for key, c in self.entries.items()})

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GradedTwoForm):
            return NotImplemented
        return self.chart == other.chart and self.entries == other.entries

    def __repr__(self) -> str:
        return f"GradedTwoForm({render_two_form(self)!r})"


# -- exterior calculus -------------------------------------------------


def differential(f: Superfunction) -> GradedOneForm:
    chart = f.chart
    return GradedOneForm(chart, {g.name: f.left_partial(g.name) for g in chart.generators})


def exterior_derivative(alpha: GradedOneForm) -> GradedTwoForm:
    chart = alpha.chart
    form = GradedTwoForm.zero(chart)
    for a, c in alpha.coeffs.items():
        for g in chart.generators:
            dc = c.left_partial(g.name)
            if not dc.is_zero():
                form = form + GradedTwoForm(chart, {(a, g.name): -dc})
    return form


def wedge(alpha: GradedOneForm, beta: GradedOneForm) -> GradedTwoForm:
    """(dx^a.g) ^ (dx^b.k) = (-1)^(|g||b|) dx^a ^ dx^b . (g k)."""
    if alpha.chart != beta.chart:
        raise ChartMismatchError("forms live on different charts")
    chart = alpha.chart
    form = GradedTwoForm.zero(chart)
    for a, g in alpha.coeffs.items():
        g_even = Superfunction(chart, {m: c for m, c in g.terms.items() if len(m.odds) % 2 == 0})
        g_odd = g - g_even
        for b, k in beta.coeffs.items():
            gb = chart.generator(b)
            coeff = g_even * k
            coeff = coeff + (g_odd * k) * (-1 if gb.parity is Parity.ODD else 1)
            form = form + GradedTwoForm(chart, {(a, b): coeff})
    return form


def interior_one(field: VectorField, alpha: GradedOneForm) -> Superfunction:
    """i_X (dx^a . c) = X(x^a) . phi*(c)."""
    if alpha.chart != field.domain:
        raise ChartMismatchError("form is not over the field's domain chart")
    pb = field.pullback
    result = Superfunction.zero(field.codomain)
    for name, c in alpha.coeffs.items():
        comp = field.components[name]
        if comp.is_zero():
            continue
        pulled = pb.apply(c) if pb is not None else c
        result = result + comp * pulled
    return result


def _pulled_basis_form(field: VectorField, name: str) -> GradedOneForm:
    if field.pullback is None:
        return GradedOneForm(field.codomain, {name: Superfunction.constant(field.codomain, 1)})
    return differential(field.pullback.images[name])


def interior_two(
    field: VectorField, omega: GradedTwoForm, parity: Optional[Parity] = None
) -> GradedOneForm:
    """First-slot contraction of a 2-form.

    i_X (dx^a ^ dx^b . c) =
        X(x^a) . d(phi* x^b) . phi*(c)
        - (-1)^(|X||a|) d(phi* x^a) . (X(x^b) . phi*(c))

    where d(phi* x) is the codomain differential of the pulled-back
    generator (the identity's dx for ordinary fields).  ``parity``
    overrides the field parity; inhomogeneous fields are split.
    """
    if omega.chart != field.domain:
        raise ChartMismatchError("form is not over the field's domain chart")
    if parity is None:
        p = field.parity()
        if p is None:
            even, odd = field.parity_parts()
            return interior_two(even, omega, Parity.EVEN) + interior_two(odd, omega, Parity.ODD)
        parity = p
    pb = field.pullback
    chart = field.codomain

    def pulled(f: Superfunction) -> Superfunction:
        return pb.apply(f) if pb is not None else f

    result = GradedOneForm.zero(chart)
    for (a, b), c in omega.entries.items():
        ga = omega.chart.generator(a)
        gb = omega.chart.generator(b)
        xa = field.components[a]
        xb = field.components[b]
        pc = pulled(c)
        if not xa.is_zero():
            base_b = _pulled_basis_form(field, b)
            term = base_b.lmul(xa).rmul(pc)
            result = result + term
        if not xb.is_zero():
            sign = -1 if (int(parity) * int(ga.parity)) % 2 else 1
            base_a = _pulled_basis_form(field, a)
            term = base_a.rmul(xb * pc).rmul(Fraction(-sign))
            result = result + term
    return result


def two_form_value(omega: GradedTwoForm, x: VectorField, y: VectorField) -> Superfunction:
    """omega(X, Y) = i_Y i_X omega, for ordinary fields on one chart."""
    return interior_one(y, interior_two(x, omega))


def pullback_one_form(morphism: AlgebraMorphism, alpha: GradedOneForm) -> GradedOneForm:
    """sum d(phi* x^a) . phi*(c_a) over the codomain chart."""
    if alpha.chart != morphism.domain:
        raise ChartMismatchError("form is not over the morphism's domain chart")
    out = GradedOneForm.zero(morphism.codomain)
    for name, c in alpha.coeffs.items():
        out = out + differential(morphism.images[name]).rmul(morphism.apply(c))
    return out


def pullback_two_form(morphism: AlgebraMorphism, omega: GradedTwoForm) -> GradedTwoForm:
    if omega.chart != morphism.domain:
        raise ChartMismatchError("form is not over the morphism's domain chart")
    out = GradedTwoForm.zero(morphism.codomain)
    for (a, b), c in omega.entries.items():
        da = differential(morphism.images[a])
        db = differential(morphism.images[b])
        out = out + wedge(da, db).rmul(morphism.apply(c))
    return out


# -- tangent-chart structure ------------------------------------------


def total_time_derivative(m_chart: Chart, tm_chart: Chart, tau_pullback: AlgebraMorphism) -> VectorField:
    """The canonical field along the tangent projection: base goes to velocity."""
    comps = {
        base: Superfunction.generator(tm_chart, tm_chart.partner(base))
        for base in m_chart.base_names
    }
    return VectorField(m_chart, comps, tau_pullback)


def vertical_lift(field: VectorField, tm_chart: Chart, tau_pullback: AlgebraMorphism) -> VectorField:
    """Transplant base components onto the matching velocity generators."""
    comps: dict[str, Superfunction] = {}
    if field.pullback is None:
        if field.codomain != tau_pullback.domain:
            raise ChartMismatchError("field is not over the base chart")
        for base in field.domain.base_names:
            comps[tm_chart.partner(base)] = tau_pullback.apply(field.components[base])
    else:
        if field.codomain != tm_chart or field.domain != tau_pullback.domain:
            raise ChartMismatchError("field is not along the tangent projection")
        for base in field.domain.base_names:
            comps[tm_chart.partner(base)] = field.components[base]
    return VectorField(tm_chart, comps)


def vertical_endomorphism(field: VectorField) -> VectorField:
    """Base components move to the velocity partners; everything else dies."""
    chart = field.domain
    if field.pullback is not None:
        raise ChartMismatchError("expected an ordinary field on TM")
    comps = {chart.partner(base): field.components[base] for base in chart.base_names}
    return VectorField(chart, comps)


def vertical_power(f: Superfunction, tm_chart: Chart, tau_pullback: AlgebraMorphism) -> Superfunction:
    """The fiber-linear function on TM built from a base function.

    With left derivatives the consistent placement is velocity factors
    first: sum_a u^a . tau*(df/dx^a).
    """
    if f.chart != tau_pullback.domain:
        raise ChartMismatchError("function is not over the base chart")
    result = Superfunction.zero(tm_chart)
    for base in f.chart.base_names:
        partial = f.left_partial(base)
        if partial.is_zero():
            continue
        u = Superfunction.generator(tm_chart, tm_chart.partner(base))
        result = result + u * tau_pullback.apply(partial)
    return result


def interior_system(
    omega: GradedTwoForm, unknown_gens: Sequence[str], parity: Parity
) -> tuple[list[list[Superfunction]], list[str]]:
    """Linear system for i_X omega with X an ordinary field of given parity.

    Returns (matrix, equation_gens) such that for a field with
    components X^g, the dx^e coefficient of i_X omega equals
    sum_g X^g . matrix[g][e].  Unknowns multiply from the left.
    """
    chart = omega.chart
    eq_gens = [g.name for g in chart.generators]
    col = {name: i for i, name in enumerate(eq_gens)}
    zero = Superfunction.zero(chart)
    matrix = [[zero for _ in eq_gens] for _ in unknown_gens]
    row = {name: i for i, name in enumerate(unknown_gens)}
    for (a, b), c in omega.entries.items():
        ga, gb = chart.generator(a), chart.generator(b)
        if a in row:
            sign = -1 if ((int(parity) + int(ga.parity)) * int(gb.parity)) % 2 else 1
            i, j = row[a], col[b]
            matrix[i][j] = matrix[i][j] + c * sign
        if b in row:
            sign = -1 if (int(parity) * int(ga.parity)) % 2 else 1
            i, j = row[b], col[a]
            matrix[i][j] = matrix[i][j] - c * sign
    return matrix, eq_gens


# -- rendering ---------------------------------------------------------


def _coeff_text(c: Superfunction) -> tuple[str, bool]:
    """Rendered coefficient and whether it is exactly +-1."""
    if c == 1:
        return "", True
    if c == -1:
        return "-", True
    text = render(c)
    if " " in text:
        text = f"({text})"
    return text, False


def render_field(field: VectorField) -> str:
    parts: list[str] = []
    for g in field.domain.generators:
        c = field.components[g.name]
        if c.is_zero():
            continue
        text, unit = _coeff_text(c)
        body = f"d/d{g.name}" if unit else f"{text}*d/d{g.name}"
        if text == "-":
            body = f"-d/d{g.name}"
        if not parts:
            parts.append(body)
        else:
            if body.startswith("-"):
                parts.append(f"- {body[1:]}")
            else:
                parts.append(f"+ {body}")
    return " ".join(parts) if parts else "0"


def render_one_form(alpha: GradedOneForm) -> str:
    parts: list[str] = []
    for g in alpha.chart.generators:
        c = alpha.coeffs.get(g.name)
        if c is None:
            continue
        text, unit = _coeff_text(c)
        if unit:
            body = f"d{g.name}" if text == "" else f"-d{g.name}"
        else:
            body = f"d{g.name}*{text}"
        if not parts:
            parts.append(body)
        elif body.startswith("-"):
            parts.append(f"- {body[1:]}")
        else:
            parts.append(f"+ {body}")
    return " ".join(parts) if parts else "0"


def render_two_form(omega: GradedTwoForm) -> str:
    chart = omega.chart
    keys = sorted(
        omega.entries,
        key=lambda ab: (chart.generator(ab[0]).index, chart.generator(ab[1]).index),
    )
    parts: list[str] = []
    for a, b in keys:
        c = omega.entries[(a, b)]
        text, unit = _coeff_text(c)
        if unit:
            body = f"d{a}^d{b}" if text == "" else f"-d{a}^d{b}"
        else:
            body = f"d{a}^d{b}*{text}"
        if not parts:
            parts.append(body)
        elif body.startswith("-"):
            parts.append(f"- {body[1:]}")
        else:
            parts.append(f"+ {body}")
    return " ".join(parts) if parts else "0"
