"""Identity assertions with optional brute-force re-verification.

Every structural identity the analysis relies on funnels through a
CheckLog.  Symbolic equality is always required; when oracle trials are
enabled each assertion is additionally evaluated in random exterior
algebra contexts, so a sign regression cannot hide behind a shared
symbolic code path.
"""

from __future__ import annotations

from random import Random
from typing import Optional

from .algebra import InternalInconsistencyError, Superfunction
from .calculus import GradedOneForm, GradedTwoForm
from . import oracle


class CheckLog:
    def __init__(self, oracle_trials: int = 0, rng: Optional[Random] = None):
        self.oracle_trials = oracle_trials
        self.rng = rng or Random(0)
        self.entries: list[tuple[str, bool]] = []
        self.oracle_checks = 0
        self.oracle_mismatches = 0

    def _record(self, name: str, passed: bool) -> None:
        self.entries.append((name, passed))
        if not passed:
            raise InternalInconsistencyError(f"identity check failed: {name}")

    def _oracle_pair(self, name: str, lhs: Superfunction, rhs: Superfunction) -> None:
        if self.oracle_trials <= 0:
            return
        self.oracle_checks += 1
        if not oracle.check_identity(lhs, rhs, self.oracle_trials, self.rng):
            self.oracle_mismatches += 1
            raise InternalInconsistencyError(f"oracle mismatch on passing identity: {name}")

    def equal_functions(self, name: str, lhs: Superfunction, rhs: Superfunction) -> None:
        passed = lhs == rhs
        if passed:
            self._oracle_pair(name, lhs, rhs)
        self._record(name, passed)

    def zero_function(self, name: str, f: Superfunction) -> None:
        self.equal_functions(name, f, Superfunction.zero(f.chart))

    def equal_one_forms(self, name: str, lhs: GradedOneForm, rhs: GradedOneForm) -> None:
        passed = lhs == rhs
        if passed and self.oracle_trials > 0:
            for gen in set(lhs.coeffs) | set(rhs.coeffs):
                self._oracle_pair(f"{name}[d{gen}]", lhs.coefficient(gen), rhs.coefficient(gen))
        self._record(name, passed)

    def equal_two_forms(self, name: str, lhs: GradedTwoForm, rhs: GradedTwoForm) -> None:
        passed = lhs == rhs
        if passed and self.oracle_trials > 0:
            for a, b in set(lhs.entries) | set(rhs.entries):
                self._oracle_pair(
                    f"{name}[d{a}^d{b}]", lhs.coefficient(a, b), rhs.coefficient(a, b)
                )
        self._record(name, passed)

    def is_true(self, name: str, flag: bool) -> None:
        self._record(name, flag)

    def summary(self) -> list[tuple[str, bool]]:
        return list(self.entries)
