"""Everything derived from an even Lagrangian superfunction.

Builds the momentum-map pullback, the energy, the Cartan forms, the
velocity-sector Hessian, kernels of the Cartan 2-form and of the
momentum map, and the dynamics field in the regular case.

Odd Lagrangians are rejected: only the even construction is specified
and we refuse to guess the odd variant.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .algebra import (
    AlgebraMorphism,
    Parity,
    SupermechError,
    Superfunction,
    UndecidedError,
    InternalInconsistencyError,
    render,
)
from .calculus import (
    GradedOneForm,
    GradedTwoForm,
    VectorField,
    differential,
    exterior_derivative,
    interior_system,
    interior_two,
)
from .charts import ChartTriple
from .linsolve import EliminationStalled, is_invertible, right_kernel, right_solve

REGULAR = "regular"
SINGULAR = "singular"
UNDECIDED = "undecided"


class OddLagrangianError(SupermechError):
    pass


class SingularLagrangianError(SupermechError):
    pass


@dataclass
class KernelBasis:
    fields: list[VectorField]
    space_tag: str  # "ker omega_L" | "ker FL_*" | "Vker omega_L"


@dataclass
class LagrangianProblem:
    charts: ChartTriple
    lagrangian: Superfunction
    fl_pullback: AlgebraMorphism  # cotangent algebra -> tangent algebra
    energy: Superfunction
    theta_L: GradedOneForm
    omega_L: GradedTwoForm
    hessian: list[list[Superfunction]]
    velocity_gens: list[str]
    regularity: str

    def momentum_table(self) -> list[tuple[str, Superfunction]]:
        """Fiber generator of the cotangent chart with its pulled-back value."""
        ct = self.charts.cotangent
        return [(name, self.fl_pullback.images[name]) for name in ct.fiber_names]


def build_problem(charts: ChartTriple, lagrangian: Superfunction) -> LagrangianProblem:
    tm = charts.tangent
    if lagrangian.chart != tm:
        raise SupermechError("the Lagrangian must be a function on the tangent chart")
    p = lagrangian.parity()
    if p is None:
        raise SupermechError(
            f"the Lagrangian must be homogeneous even; {render(lagrangian)} mixes parities"
        )
    if p is Parity.ODD:
        raise OddLagrangianError(
            "odd Lagrangians are not supported; the construction implemented here "
            "is the even one"
        )

    ct = charts.cotangent
    images: dict[str, Superfunction] = {}
    for g in ct.generators:
        base = ct.base_of(g.name)
        if base is None:
            images[g.name] = Superfunction.generator(tm, g.name)
        else:
            u = tm.partner(base)
            dL = lagrangian.left_partial(u)
            images[g.name] = dL if g.parity is Parity.EVEN else -dL
    fl = AlgebraMorphism(ct, tm, images)

    delta = charts.liouville_field()
    energy = delta.apply(lagrangian) - lagrangian

    theta_coeffs = {
        base: lagrangian.left_partial(tm.partner(base)) for base in tm.base_names
    }
    theta_L = GradedOneForm(tm, theta_coeffs)
    omega_L = -exterior_derivative(theta_L)
    if not omega_L.check_antisymmetry():
        raise InternalInconsistencyError("Cartan 2-form lost graded antisymmetry")

    ugens = [tm.partner(b) for b in tm.base_names]
    hessian = [
        [lagrangian.left_partial(a).left_partial(b) for b in ugens] for a in ugens
    ]
    _check_hessian_blocks(tm, ugens, hessian)

    try:
        regularity = REGULAR if is_invertible(hessian, tm) else SINGULAR
    except EliminationStalled:
        regularity = UNDECIDED

    return LagrangianProblem(
        charts, lagrangian, fl, energy, theta_L, omega_L, hessian, ugens, regularity
    )


def _check_hessian_blocks(tm, ugens, hessian) -> None:
    for i, a in enumerate(ugens):
        for j, b in enumerate(ugens):
            pa = tm.generator(a).parity
            pb = tm.generator(b).parity
            expected = hessian[j][i] if not (pa and pb) else -hessian[j][i]
            if hessian[i][j] != expected:
                raise InternalInconsistencyError("Hessian block symmetry failed")


def is_regular(problem: LagrangianProblem) -> bool:
    if problem.regularity == UNDECIDED:
        raise UndecidedError(
            "regularity is undecided: the Hessian has entries with non-constant body"
        )
    return problem.regularity == REGULAR


def kernel_fl_star(problem: LagrangianProblem) -> KernelBasis:
    """Vertical fields annihilating every pulled-back momentum.

    These are vertical lifts of the Hessian's null directions: for a
    vertical field the action on a pulled-back fiber generator is the
    component vector contracted into the Hessian.
    """
    tm = problem.charts.tangent
    ugens = problem.velocity_gens
    try:
        basis_vectors = right_kernel(problem.hessian, tm)
    except EliminationStalled:
        raise UndecidedError("momentum-map kernel is undecided for this Hessian") from None
    fields = []
    for vec in basis_vectors:
        comps = {u: c for u, c in zip(ugens, vec)}
        fld = VectorField(tm, comps)
        for name, img in problem.fl_pullback.images.items():
            if not fld.apply(img).is_zero():
                raise InternalInconsistencyError("momentum-kernel field failed verification")
        fields.append(fld)
    return KernelBasis(fields, "ker FL_*")


def _omega_kernel_vectors(problem: LagrangianProblem, unknown_gens: list[str]):
    tm = problem.charts.tangent
    matrix, _ = interior_system(problem.omega_L, unknown_gens, Parity.EVEN)
    return right_kernel(matrix, tm)


def kernel_omega_L(problem: LagrangianProblem) -> KernelBasis:
    tm = problem.charts.tangent
    gens = [g.name for g in tm.generators]
    try:
        vectors = _omega_kernel_vectors(problem, gens)
    except EliminationStalled:
        raise UndecidedError("Cartan-form kernel is undecided for this Lagrangian") from None
    fields = []
    for vec in vectors:
        fld = VectorField(tm, dict(zip(gens, vec)))
        if not interior_two(fld, problem.omega_L).is_zero():
            raise InternalInconsistencyError("kernel field failed direct substitution")
        fields.append(fld)
    return KernelBasis(fields, "ker omega_L")


def vertical_kernel_omega_L(problem: LagrangianProblem) -> KernelBasis:
    tm = problem.charts.tangent
    ugens = problem.velocity_gens
    try:
        vectors = _omega_kernel_vectors(problem, ugens)
    except EliminationStalled:
        raise UndecidedError("vertical Cartan kernel is undecided") from None
    fields = []
    for vec in vectors:
        fld = VectorField(tm, dict(zip(ugens, vec)))
        if not interior_two(fld, problem.omega_L).is_zero():
            raise InternalInconsistencyError("vertical kernel field failed substitution")
        fields.append(fld)
    return KernelBasis(fields, "Vker omega_L")


def sode_base_field(problem: LagrangianProblem) -> VectorField:
    """The second-order skeleton: base generators map to their velocities."""
    tm = problem.charts.tangent
    comps = {
        base: Superfunction.generator(tm, tm.partner(base)) for base in tm.base_names
    }
    return VectorField(tm, comps)


def sode_field(problem: LagrangianProblem) -> VectorField:
    """The unique dynamics field of a regular problem.

    Solves the dynamical equation for the vertical components on top of
    the second-order skeleton and verifies the result exactly.
    """
    if not is_regular(problem):
        raise SingularLagrangianError(
            "the Lagrangian is singular; use the constraint analysis instead"
        )
    tm = problem.charts.tangent
    gamma0 = sode_base_field(problem)
    target = differential(problem.energy) - interior_two(gamma0, problem.omega_L, Parity.EVEN)
    matrix, eq_gens = interior_system(problem.omega_L, problem.velocity_gens, Parity.EVEN)
    rhs = [target.coefficient(name) for name in eq_gens]
    try:
        solution = right_solve(matrix, rhs, tm)
    except EliminationStalled:
        raise UndecidedError("dynamics solve stalled despite regularity") from None
    if solution is None:
        raise InternalInconsistencyError("regular problem admitted no dynamics field")
    gamma = gamma0 + VectorField(tm, dict(zip(problem.velocity_gens, solution)))
    if interior_two(gamma, problem.omega_L, Parity.EVEN) != differential(problem.energy):
        raise InternalInconsistencyError("dynamics field failed the defining equation")
    return gamma
