"""Exact linear algebra over the superfunction ring.

Systems have the shape ``X . M = b`` with the unknown row vector
multiplying from the left; this is the orientation produced by
contracting unknown field components into stored 2-form coefficients.
Solutions are found by column elimination.  Pivots must be invertible
ring elements, which here means: even, with a nonzero constant body.
When nonzero entries remain but none is a valid pivot the elimination
stalls and the caller reports an undecided verdict instead of guessing.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Optional, Sequence

from .algebra import Chart, NotInvertibleError, Parity, Superfunction


class EliminationStalled(Exception):
    """No pivot with an invertible body exists among nonzero entries."""


def _is_unit(f: Superfunction) -> bool:
    if not f.has_parity(Parity.EVEN):
        return False
    body = f.body()
    return body.is_constant() and bool(body.constant_value())


class _Echelon:
    """Column echelon data for X . M = b systems."""

    def __init__(self, matrix: Sequence[Sequence[Superfunction]], chart: Chart, rhs=None):
        self.chart = chart
        self.m = [list(row) for row in matrix]
        self.n_rows = len(self.m)
        self.n_cols = len(self.m[0]) if self.m else 0
        self.rhs = list(rhs) if rhs is not None else None
        self.pivots: list[tuple[int, int]] = []  # (row, col)
        self._reduce()

    def _find_pivot(self, used_rows: set[int], used_cols: set[int]):
        for r in range(self.n_rows):
            if r in used_rows:
                continue
            for c in range(self.n_cols):
                if c in used_cols:
                    continue
                if _is_unit(self.m[r][c]):
                    return r, c
        return None

    def _remaining_nonzero(self, used_rows: set[int], used_cols: set[int]) -> bool:
        for r in range(self.n_rows):
            if r in used_rows:
                continue
            for c in range(self.n_cols):
                if c in used_cols:
                    continue
                if not self.m[r][c].is_zero():
                    return True
        return False

    def _reduce(self) -> None:
        used_rows: set[int] = set()
        used_cols: set[int] = set()
        while True:
            found = self._find_pivot(used_rows, used_cols)
            if found is None:
                self.stalled = self._remaining_nonzero(used_rows, used_cols)
                return
            r, c = found
            inv = self.m[r][c].invert()
            for e in range(self.n_cols):
                if e == c:
                    continue
                factor = inv * self.m[r][e]
                if factor.is_zero():
                    continue
                for a in range(self.n_rows):
                    self.m[a][e] = self.m[a][e] - self.m[a][c] * factor
                if self.rhs is not None:
                    self.rhs[e] = self.rhs[e] - self.rhs[c] * factor
            self.pivots.append((r, c))
            used_rows.add(r)
            used_cols.add(c)

    def kernel_basis(self) -> list[list[Superfunction]]:
        if self.stalled:
            raise EliminationStalled()
        zero = Superfunction.zero(self.chart)
        one = Superfunction.constant(self.chart, 1)
        pivot_rows = {r for r, _ in self.pivots}
        free_rows = [r for r in range(self.n_rows) if r not in pivot_rows]
        basis = []
        for f in free_rows:
            vec = [zero] * self.n_rows
            vec[f] = one
            for r, c in self.pivots:
                coeff = self.m[f][c]
                if not coeff.is_zero():
                    vec[r] = -(coeff * self.m[r][c].invert())
            basis.append(vec)
        return basis

    def particular_solution(self) -> Optional[list[Superfunction]]:
        if self.stalled:
            raise EliminationStalled()
        assert self.rhs is not None
        zero = Superfunction.zero(self.chart)
        pivot_cols = {c for _, c in self.pivots}
        for e in range(self.n_cols):
            if e not in pivot_cols and not self.rhs[e].is_zero():
                return None
        vec = [zero] * self.n_rows
        for r, c in self.pivots:
            vec[r] = self.rhs[c] * self.m[r][c].invert()
        return vec


def right_kernel(matrix: Sequence[Sequence[Superfunction]], chart: Chart) -> list[list[Superfunction]]:
    """Basis of {X : X . M = 0}, free coordinates set to 1, index order."""
    if not matrix:
        return []
    ech = _Echelon(matrix, chart)
    basis = ech.kernel_basis()
    zero = Superfunction.zero(chart)
    for vec in basis:
        for col in range(ech.n_cols):
            total = zero
            for r in range(ech.n_rows):
                total = total + vec[r] * matrix[r][col]
            assert total.is_zero(), "kernel vector failed direct substitution"
    return basis


def right_solve(
    matrix: Sequence[Sequence[Superfunction]],
    rhs: Sequence[Superfunction],
    chart: Chart,
) -> Optional[list[Superfunction]]:
    """A particular solution of X . M = b, or None when inconsistent."""
    if not matrix:
        return None if any(not b.is_zero() for b in rhs) else []
    ech = _Echelon(matrix, chart, rhs=rhs)
    sol = ech.particular_solution()
    if sol is None:
        return None
    for col in range(ech.n_cols):
        total = Superfunction.zero(chart)
        for r in range(ech.n_rows):
            total = total + sol[r] * matrix[r][col]
        assert total == rhs[col], "solution failed direct substitution"
    return sol


def is_invertible(matrix: Sequence[Sequence[Superfunction]], chart: Chart) -> bool:
    """Invertibility of a square matrix over the ring.

    Raises EliminationStalled when nonzero non-unit entries block the
    decision (e.g. entries with non-constant body).
    """
    n = len(matrix)
    if n == 0:
        return True
    if any(len(row) != n for row in matrix):
        raise ValueError("matrix is not square")
    ech = _Echelon(matrix, chart)
    if len(ech.pivots) == n:
        return True
    if ech.stalled:
        raise EliminationStalled()
    return False


def rational_row_reduce(rows: list[list[Fraction]]) -> tuple[list[list[Fraction]], list[list[Fraction]], list[int]]:
    """Reduced row echelon form over the rationals with transform tracking.

    Returns (rref, transform, pivot_cols) where transform . input = rref.
    """
    n = len(rows)
    width = len(rows[0]) if rows else 0
    a = [list(map(Fraction, row)) for row in rows]
    t = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    pivot_cols: list[int] = []
    r = 0
    for c in range(width):
        pivot = next((i for i in range(r, n) if a[i][c]), None)
        if pivot is None:
            continue
        a[r], a[pivot] = a[pivot], a[r]
        t[r], t[pivot] = t[pivot], t[r]
        scale = a[r][c]
        a[r] = [x / scale for x in a[r]]
        t[r] = [x / scale for x in t[r]]
        for i in range(n):
            if i != r and a[i][c]:
                factor = a[i][c]
                a[i] = [x - factor * y for x, y in zip(a[i], a[r])]
                t[i] = [x - factor * y for x, y in zip(t[i], t[r])]
        pivot_cols.append(c)
        r += 1
        if r == n:
            break
    return a, t, pivot_cols


def rational_null_space(matrix: list[list[Fraction]]) -> list[list[Fraction]]:
    """Basis for {x : x . M = 0} over the rationals (left null space)."""
    if not matrix:
        return []
    transposed = [list(col) for col in zip(*matrix)]
    rref, _, pivot_cols = rational_row_reduce(transposed)
    n = len(matrix)
    free = [j for j in range(n) if j not in pivot_cols]
    basis = []
    for f in free:
        vec = [Fraction(0)] * n
        vec[f] = Fraction(1)
        for row_idx, c in enumerate(pivot_cols):
            vec[c] = -rref[row_idx][f]
        basis.append(vec)
    return basis
