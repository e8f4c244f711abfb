"""Constraint analysis for singular Lagrangians.

Central objects:

* the time-evolution operator, a derivation along the momentum-map
  pullback sending cotangent functions to tangent ones.  Its generator
  values are forced by the dynamical and second-order conditions, which
  are re-verified exactly every time it is built;
* graded Hamiltonian fields and the Poisson bracket on the cotangent
  chart;
* primary constraints extracted by exact velocity elimination from the
  momentum relations (affine momenta with constant coefficients only);
* per-constraint analysis: the induced tangent-side constraint, its
  projectability through the momentum map, the kernel membership test
  for the associated field, and first/second class classification.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from random import Random
from typing import Optional, Sequence

from .algebra import (
    AlgebraMorphism,
    Chart,
    Generator,
    InternalInconsistencyError,
    NotSupportedError,
    Parity,
    SupermechError,
    Superfunction,
    UndecidedError,
    render,
)
from .calculus import (
    GradedOneForm,
    VectorField,
    differential,
    interior_one,
    interior_system,
    interior_two,
    two_form_value,
    vertical_endomorphism,
)
from .charts import ChartTriple, transport_base_function
from .lagrangian import (
    KernelBasis,
    LagrangianProblem,
    kernel_fl_star,
    sode_base_field,
)
from .linsolve import EliminationStalled, rational_row_reduce, right_solve
from .randgen import random_homogeneous

IN_KERNEL = "in-kernel"
NOT_IN_KERNEL = "not-in-kernel"
UNDECIDED = "undecided"
YES = "yes"
NO = "no"
FIRST = "first"
SECOND = "second"


@dataclass
class TimeEvolutionOperator:
    problem: LagrangianProblem
    field: VectorField  # along the momentum-map pullback

    def apply(self, h: Superfunction) -> Superfunction:
        return self.field.apply(h)

    def component(self, name: str) -> Superfunction:
        return self.field.components[name]


def build_K(problem: LagrangianProblem) -> TimeEvolutionOperator:
    """Generator components plus exact build-time verification.

    Base generators go to their velocities (second-order condition);
    each momentum generator goes to the matching base partial of the
    Lagrangian, with a sign on the odd sector.  Both defining conditions
    are then checked mechanically; a failure means a sign-convention
    regression, not a property of the input.
    """
    charts = problem.charts
    tm, ct = charts.tangent, charts.cotangent
    L = problem.lagrangian
    comps: dict[str, Superfunction] = {}
    for g in ct.generators:
        base = ct.base_of(g.name)
        if base is None:
            comps[g.name] = Superfunction.generator(tm, tm.partner(g.name))
        else:
            dL = L.left_partial(base)
            comps[g.name] = dL if g.parity is Parity.EVEN else -dL
    k_field = VectorField(ct, comps, problem.fl_pullback)
    if k_field.parity() is not Parity.EVEN:
        raise InternalInconsistencyError("time-evolution operator is not even")
    op = TimeEvolutionOperator(problem, k_field)
    verify_dynamical_condition(op)
    verify_second_order_condition(op)
    return op


def verify_dynamical_condition(op: TimeEvolutionOperator) -> tuple[GradedOneForm, GradedOneForm]:
    """Contraction into the canonical 2-form must equal d(energy)."""
    lhs = interior_two(op.field, op.problem.charts.omega0, Parity.EVEN)
    rhs = differential(op.problem.energy)
    if lhs != rhs:
        raise InternalInconsistencyError(
            "dynamical condition failed: sign conventions have regressed"
        )
    return lhs, rhs


def verify_second_order_condition(op: TimeEvolutionOperator) -> list[tuple[Superfunction, Superfunction]]:
    """Composition with the base inclusion must be the total time derivative."""
    charts = op.problem.charts
    t_op = charts.time_derivative()
    pairs = []
    for g in charts.base.generators:
        f = Superfunction.generator(charts.base, g.name)
        lhs = op.apply(charts.pi_pullback.apply(f))
        rhs = t_op.apply(f)
        pairs.append((lhs, rhs))
        if lhs != rhs:
            raise InternalInconsistencyError("second-order condition failed")
    return pairs


def apply_K(op: TimeEvolutionOperator, h: Superfunction) -> Superfunction:
    return op.apply(h)


def hamiltonian_field(charts: ChartTriple, h: Superfunction) -> VectorField:
    """The unique field with i_Y omega0 = dh, for homogeneous h.

    Closed form in canonical coordinates; verified by substitution.
    """
    parity = h.parity()
    if parity is None:
        raise SupermechError("Hamiltonian fields need homogeneous input")
    ct = charts.cotangent
    sign = -1 if parity is Parity.ODD else 1
    comps: dict[str, Superfunction] = {}
    for base in ct.base_names:
        fiber = ct.partner(base)
        if ct.generator(base).parity is Parity.EVEN:
            comps[base] = h.left_partial(fiber)
            comps[fiber] = -h.left_partial(base)
        else:
            comps[base] = h.left_partial(fiber) * sign
            comps[fiber] = h.left_partial(base) * sign
    y = VectorField(ct, comps)
    if interior_two(y, charts.omega0, parity) != differential(h):
        raise InternalInconsistencyError("Hamiltonian field failed verification")
    return y


def poisson(charts: ChartTriple, h: Superfunction, k: Superfunction) -> Superfunction:
    """Canonical bracket: the 2-form evaluated on the two Hamiltonian fields."""
    if h.parity() is None or k.parity() is None:
        raise SupermechError("the bracket needs homogeneous arguments")
    yh = hamiltonian_field(charts, h)
    yk = hamiltonian_field(charts, k)
    return two_form_value(charts.omega0, yh, yk)


def r_operator(problem: LagrangianProblem, y: VectorField) -> VectorField:
    """Vertical field whose velocity components pull back the base ones.

    Determined by its action on fiber-linear functions; the even and odd
    sectors come out uniformly.
    """
    charts = problem.charts
    tm = charts.tangent
    if y.domain != charts.cotangent or y.pullback is not None:
        raise SupermechError("expected an ordinary field on the cotangent chart")
    comps = {
        tm.partner(base): problem.fl_pullback.apply(y.components[base])
        for base in charts.cotangent.base_names
    }
    return VectorField(tm, comps)


def xh_base_field(problem: LagrangianProblem, h: Superfunction) -> VectorField:
    """A tangent-chart representative: pulled-back base components, no vertical part."""
    charts = problem.charts
    tm = charts.tangent
    yh = hamiltonian_field(charts, h)
    comps = {
        base: problem.fl_pullback.apply(yh.components[base]) for base in tm.base_names
    }
    return VectorField(tm, comps)


@dataclass
class KernelTestResult:
    verdict: str  # in-kernel | not-in-kernel | undecided
    field: VectorField  # completed when in-kernel, the base representative otherwise
    fixed_representative_in_kernel: Optional[bool]


def xh_kernel_test(problem: LagrangianProblem, h: Superfunction) -> KernelTestResult:
    """Does some vertical completion of the representative kill the Cartan form?

    The representative is unique only up to vertical fields, so the
    membership question is decided over all vertical completions by an
    exact linear solve.  The fixed zero-completion answer is recorded
    separately when it differs.
    """
    parity = h.parity()
    if parity is None:
        raise SupermechError("kernel test needs a homogeneous constraint")
    tm = problem.charts.tangent
    x0 = xh_base_field(problem, h)
    base_contraction = interior_two(x0, problem.omega_L, parity)
    fixed_in_kernel = base_contraction.is_zero()
    matrix, eq_gens = interior_system(problem.omega_L, problem.velocity_gens, parity)
    rhs = [-base_contraction.coefficient(name) for name in eq_gens]
    try:
        solution = right_solve(matrix, rhs, tm)
    except EliminationStalled:
        return KernelTestResult(UNDECIDED, x0, fixed_in_kernel)
    if solution is None:
        return KernelTestResult(NOT_IN_KERNEL, x0, fixed_in_kernel)
    completed = x0 + VectorField(tm, dict(zip(problem.velocity_gens, solution)))
    if not interior_two(completed, problem.omega_L, parity).is_zero():
        raise InternalInconsistencyError("kernel completion failed direct substitution")
    return KernelTestResult(IN_KERNEL, completed, fixed_in_kernel)


def check_vertical_part_in_kernel(problem: LagrangianProblem, h: Superfunction) -> bool:
    """The vertical image of the representative must kill the Cartan form.

    Holds for every genuine constraint; asserted as a sanity check.
    """
    x0 = xh_base_field(problem, h)
    s_x = vertical_endomorphism(x0)
    return s_x.is_vertical() and interior_two(s_x, problem.omega_L).is_zero()


# -- primary constraints ------------------------------------------------


@dataclass
class VelocityElimination:
    """Result of eliminating velocities from the momentum relations.

    ``mixed_chart`` extends the cotangent chart by the free velocity
    generators; ``solved`` expresses each pivot velocity there.  The
    substitution morphism sends tangent functions into the mixed chart.
    """

    mixed_chart: Chart
    substitution: AlgebraMorphism  # tangent algebra -> mixed algebra
    free_velocities: list[str]
    constraints: list[Superfunction]


def eliminate_velocities(problem: LagrangianProblem) -> VelocityElimination:
    """Exact elimination of velocities from the momentum relations.

    Requires every pulled-back momentum to be affine in the velocity
    sector with constant rational coefficients; the even and odd sectors
    are eliminated separately so the produced relations stay
    homogeneous.
    """
    charts = problem.charts
    tm, ct = charts.tangent, charts.cotangent
    ugens = problem.velocity_gens

    rows: dict[Parity, list[tuple[str, list[Fraction], Superfunction]]] = {
        Parity.EVEN: [],
        Parity.ODD: [],
    }
    for name, pulled in problem.momentum_table():
        coeffs: list[Fraction] = []
        rest = pulled
        for u in ugens:
            c = pulled.left_partial(u)
            if not c.is_constant():
                raise NotSupportedError(
                    "momenta are not affine in the velocities with constant "
                    "coefficients; supply constraints manually"
                )
            value = c.constant_value()
            coeffs.append(value)
            if value:
                rest = rest - Superfunction.generator(tm, u) * value
        for u in ugens:
            if not rest.left_partial(u).is_zero():
                raise NotSupportedError(
                    "momenta are not affine in the velocities; supply constraints manually"
                )
        rows[ct.generator(name).parity].append((name, coeffs, rest))

    # sanity: constant coefficients cannot connect sectors of unlike parity
    for parity, rws in rows.items():
        for name, coeffs, _ in rws:
            for u, c in zip(ugens, coeffs):
                if c and tm.generator(u).parity is not parity:
                    raise InternalInconsistencyError("cross-parity constant coefficient")

    free = list(ugens)
    solved_exprs: dict[str, tuple[list[tuple[str, Fraction]], Superfunction]] = {}
    constraints: list[Superfunction] = []

    for parity in (Parity.EVEN, Parity.ODD):
        sector_rows = rows[parity]
        if not sector_rows:
            continue
        sector_ugens = [u for u in ugens if tm.generator(u).parity is parity]
        col_of = {u: i for i, u in enumerate(sector_ugens)}
        matrix = [
            [coeffs[ugens.index(u)] for u in sector_ugens] for _, coeffs, _ in sector_rows
        ]
        rref, transform, pivot_cols = rational_row_reduce(matrix)
        for r in range(len(sector_rows)):
            combo = transform[r]
            if r < len(pivot_cols):
                continue
            if all(c == 0 for c in combo):
                continue
            lead = next(c for c in combo if c)
            h = Superfunction.zero(ct)
            for c, (name, _, rest) in zip(combo, sector_rows):
                if not c:
                    continue
                term = Superfunction.generator(ct, name) - transport_base_function(rest, ct)
                h = h + term * (c / lead)
            if problem.fl_pullback.apply(h) != 0:
                raise InternalInconsistencyError("extracted relation does not pull back to zero")
            if not h.is_zero():
                constraints.append(h)
        for row_idx, col in enumerate(pivot_cols):
            u = sector_ugens[col]
            free.remove(u)
            combo = transform[row_idx]
            tail = [
                (sector_ugens[j], -rref[row_idx][j])
                for j in range(len(sector_ugens))
                if j not in pivot_cols and rref[row_idx][j]
            ]
            source = Superfunction.zero(ct)
            for c, (name, _, rest) in zip(combo, sector_rows):
                if not c:
                    continue
                source = source + (
                    Superfunction.generator(ct, name) - transport_base_function(rest, ct)
                ) * c
            solved_exprs[u] = (tail, source)

    mixed = _mixed_chart(ct, tm, free)
    sub_images: dict[str, Superfunction] = {}
    for g in tm.generators:
        if mixed.has_generator(g.name) and g.name not in solved_exprs:
            sub_images[g.name] = Superfunction.generator(mixed, g.name)
    for u, (tail, source) in solved_exprs.items():
        expr = transport_base_function(source, mixed)
        for free_u, c in tail:
            expr = expr + Superfunction.generator(mixed, free_u) * c
        sub_images[u] = expr
    substitution = AlgebraMorphism(tm, mixed, sub_images)
    return VelocityElimination(mixed, substitution, free, constraints)


def _mixed_chart(ct: Chart, tm: Chart, free_velocities: list[str]) -> Chart:
    gens = list(ct.generators)
    idx = len(gens)
    for u in free_velocities:
        gens.append(Generator(u, tm.generator(u).parity, idx))
        idx += 1
    return Chart("mixed", tuple(gens), ct.partner_pairs)


def primary_constraints(problem: LagrangianProblem) -> list[Superfunction]:
    return eliminate_velocities(problem).constraints


# -- projectability ------------------------------------------------------


@dataclass
class ProjectionResult:
    verdict: str  # yes | no | undecided
    projection: Optional[Superfunction]  # cotangent function when constructed


def is_projectable(
    problem: LagrangianProblem,
    g: Superfunction,
    elimination: Optional[VelocityElimination] = None,
    momentum_kernel: Optional[KernelBasis] = None,
) -> ProjectionResult:
    """Is a tangent-chart function a pullback through the momentum map?

    Boolean verdict: annihilation by every basis field of the momentum
    kernel.  When velocity elimination is available a witness is also
    constructed by back-substitution and verified exactly.
    """
    if g.chart != problem.charts.tangent:
        raise SupermechError("projectability applies to tangent-chart functions")
    try:
        kernel = momentum_kernel if momentum_kernel is not None else kernel_fl_star(problem)
    except UndecidedError:
        return ProjectionResult(UNDECIDED, None)
    annihilated = all(u.apply(g).is_zero() for u in kernel.fields)
    verdict = YES if annihilated else NO

    projection: Optional[Superfunction] = None
    if annihilated and elimination is not None:
        candidate = elimination.substitution.apply(g)
        used = candidate.generators_used()
        if not (used & set(elimination.free_velocities)):
            ct = problem.charts.cotangent
            h = transport_base_function(candidate, ct)
            if problem.fl_pullback.apply(h) == g:
                projection = h
            else:
                raise InternalInconsistencyError("constructed projection failed verification")
    if projection is not None and verdict != YES:
        raise InternalInconsistencyError("constructive projection contradicts kernel verdict")
    return ProjectionResult(verdict, projection)


# -- the induced constraint and its cross-checks -------------------------


def random_sode(problem: LagrangianProblem, rng: Random, max_degree: int = 2) -> VectorField:
    """A random even second-order field: fixed base part, random verticals."""
    tm = problem.charts.tangent
    gamma = sode_base_field(problem)
    comps = dict(gamma.components)
    for u in problem.velocity_gens:
        parity = tm.generator(u).parity
        comps[u] = random_homogeneous(rng, tm, parity, max_degree)
    return VectorField(tm, comps)


def evolution_identity_rhs(
    problem: LagrangianProblem,
    h: Superfunction,
    x_h: VectorField,
    gamma: VectorField,
) -> Superfunction:
    """i_{X_h}[i_Gamma omega_L - d E_L] + i_Gamma d(FL* h)."""
    alpha = interior_two(gamma, problem.omega_L, Parity.EVEN) - differential(problem.energy)
    value = interior_one(x_h, alpha)
    pulled = problem.fl_pullback.apply(h)
    value = value + interior_one(gamma, differential(pulled))
    return value


# -- records and classification ------------------------------------------


@dataclass
class ConstraintRecord:
    h: Superfunction
    parity: Parity
    origin: str  # "primary" | "user-supplied"
    c_h: Optional[Superfunction] = None
    projectable: str = UNDECIDED
    projection: Optional[Superfunction] = None
    class_label: str = UNDECIDED
    kernel_test: str = UNDECIDED
    kernel_test_fixed_representative: Optional[bool] = None


def make_record(problem: LagrangianProblem, h: Superfunction, origin: str) -> ConstraintRecord:
    if h.chart != problem.charts.cotangent:
        raise SupermechError("constraints are cotangent-chart functions")
    parity = h.parity()
    if parity is None:
        raise SupermechError(f"constraint must be homogeneous: {render(h)}")
    if not problem.fl_pullback.apply(h).is_zero():
        raise SupermechError(
            f"{render(h)} is not a constraint: it does not pull back to zero"
        )
    return ConstraintRecord(h, parity, origin)


def classify_records(
    problem: LagrangianProblem, records: Sequence[ConstraintRecord]
) -> None:
    """First class iff every bracket with the record set pulls back to zero.

    The self-bracket is included; for odd constraints it carries the
    decisive information.  A tangency cross-check (the Hamiltonian field
    preserves the constraint set under pullback) is asserted to agree.
    """
    charts = problem.charts
    fl = problem.fl_pullback
    for rec in records:
        brackets_vanish = True
        for other in records:
            br = poisson(charts, rec.h, other.h)
            if not fl.apply(br).is_zero():
                brackets_vanish = False
                break
        rec.class_label = FIRST if brackets_vanish else SECOND

        yh = hamiltonian_field(charts, rec.h)
        tangent = all(fl.apply(yh.apply(other.h)).is_zero() for other in records)
        if tangent != brackets_vanish:
            raise InternalInconsistencyError(
                "tangency cross-check disagrees with bracket classification"
            )


def analyze_problem_constraints(
    problem: LagrangianProblem,
    op: TimeEvolutionOperator,
    user_constraints: Sequence[Superfunction] = (),
    rng: Optional[Random] = None,
) -> tuple[list[ConstraintRecord], Optional[VelocityElimination]]:
    """Full primary-level analysis: records with every verdict filled in."""
    rng = rng or Random(0)
    elimination: Optional[VelocityElimination] = None
    records: list[ConstraintRecord] = []
    try:
        elimination = eliminate_velocities(problem)
        for h in elimination.constraints:
            records.append(make_record(problem, h, "primary"))
    except NotSupportedError:
        if not user_constraints:
            raise
    for h in user_constraints:
        records.append(make_record(problem, h, "user-supplied"))

    try:
        momentum_kernel = kernel_fl_star(problem)
    except UndecidedError:
        momentum_kernel = None

    for rec in records:
        rec.c_h = op.apply(rec.h)
        _verify_evolution_identity(problem, op, rec, rng)
        result = xh_kernel_test(problem, rec.h)
        rec.kernel_test = result.verdict
        rec.kernel_test_fixed_representative = result.fixed_representative_in_kernel
        if not check_vertical_part_in_kernel(problem, rec.h):
            raise InternalInconsistencyError(
                "vertical image of the constraint representative left the kernel"
            )
        if momentum_kernel is None:
            rec.projectable = UNDECIDED
        else:
            proj = is_projectable(problem, rec.c_h, elimination, momentum_kernel)
            rec.projectable = proj.verdict
            rec.projection = proj.projection

    classify_records(problem, records)

    for rec in records:
        if rec.kernel_test != UNDECIDED and rec.projectable != UNDECIDED:
            if (rec.kernel_test == IN_KERNEL) != (rec.projectable == YES):
                raise InternalInconsistencyError(
                    "kernel-membership and projectability verdicts disagree"
                )
        if rec.projectable != UNDECIDED and rec.class_label != UNDECIDED:
            if (rec.class_label == FIRST) != (rec.projectable == YES):
                raise InternalInconsistencyError(
                    "class label and projectability verdicts disagree"
                )
    return records, elimination


def _verify_evolution_identity(
    problem: LagrangianProblem,
    op: TimeEvolutionOperator,
    rec: ConstraintRecord,
    rng: Random,
) -> None:
    """The induced constraint must be reproducible from any second-order field."""
    x0 = xh_base_field(problem, rec.h)
    for _ in range(2):
        gamma = random_sode(problem, rng)
        value = evolution_identity_rhs(problem, rec.h, x0, gamma)
        if value != rec.c_h:
            raise InternalInconsistencyError(
                "second-order-field independence of the induced constraint failed"
            )
