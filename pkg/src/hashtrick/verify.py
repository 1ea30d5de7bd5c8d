"""Self-contained verification: cross-checks everything checkable.

Each check compares two independent routes to the same quantity (two
enumeration strategies, a closed form against enumeration, or Monte Carlo
against exact probabilities). Checks that would blow the enumeration
budget are skipped and say so; a skip is visible in the report, never a
silent pass.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from . import _kernels
from .bounds import moment_bound
from .experiment import DEFAULT_SEED, run_cell
from .oracle import (
    BudgetExceeded,
    DEFAULT_BUDGET,
    ExactVector,
    count_eulerian_graphs,
    exact_failure_probability,
    exact_moment_bruteforce,
    exact_moment_sequences,
)

STATUS_PASS = "pass"
STATUS_FAIL = "fail"
STATUS_SKIP = "skip"


@dataclass(frozen=True)
class CheckResult:
    name: str
    status: str
    detail: str = ""


@dataclass
class VerificationReport:
    backend: str
    budget: int
    trials: int
    seed: int
    checks: list[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.status != STATUS_FAIL for c in self.checks)

    def to_json(self) -> dict:
        return {
            "backend": self.backend,
            "budget": self.budget,
            "trials": self.trials,
            "seed": self.seed,
            "passed": self.passed,
            "checks": [
                {"name": c.name, "status": c.status, "detail": c.detail}
                for c in self.checks
            ],
        }


def _guarded(name: str, fn: Callable[[], str]) -> CheckResult:
    try:
        return CheckResult(name, STATUS_PASS, fn())
    except BudgetExceeded as exc:
        return CheckResult(name, STATUS_SKIP, str(exc))
    except AssertionError as exc:
        return CheckResult(name, STATUS_FAIL, str(exc))


def _check_cross_oracle(budget: int) -> str:
    cells = 0
    for m in (2, 3):
        for k in (2, 3, 4):
            for r in (2, 4):
                x = ExactVector.unit_flat(k)
                brute = exact_moment_bruteforce(m, x, r, budget)
                seq = exact_moment_sequences(m, x, r, budget)
                assert brute == seq, (
                    f"moment mismatch at m={m}, k={k}, r={r}: {brute} != {seq}"
                )
                cells += 1
    return f"{cells} cells, both enumerations agree exactly"


def _check_variance_closed_form(budget: int) -> str:
    cells = 0
    for m in (2, 3, 4, 8):
        for k in (2, 3, 4, 5):
            expected = Fraction(2, m) * (1 - Fraction(1, k))
            got = exact_moment_sequences(m, ExactVector.unit_flat(k), 2, budget)
            assert got == expected, (
                f"variance mismatch at m={m}, k={k}: {got} != {expected}"
            )
            cells += 1
    return f"{cells} cells match (2/m)(1 - 1/k) exactly"


def _check_failure_probability_spots(budget: int) -> str:
    spots = [
        (2, 2, Fraction(1, 2), Fraction(1, 2)),
        (2, 2, Fraction(3, 2), Fraction(0)),
        (4, 2, Fraction(1, 2), Fraction(1, 4)),
    ]
    for m, k, eps, expected in spots:
        got = exact_failure_probability(m, k, eps, budget)
        assert got == expected, (
            f"failure probability mismatch at m={m}, k={k}, eps={eps}: {got}"
        )
    return f"{len(spots)} hand-checked probabilities match"


def _check_markov_consistency(budget: int) -> str:
    cells = 0
    for m, k in ((2, 2), (3, 3), (4, 2)):
        x = ExactVector.unit_flat(k)
        for r in (2, 4):
            moment = exact_moment_sequences(m, x, r, budget)
            for eps in (Fraction(1, 4), Fraction(1, 2), Fraction(1)):
                prob = exact_failure_probability(m, k, eps, budget)
                assert prob <= moment / eps ** r, (
                    f"Markov violated at m={m}, k={k}, r={r}, eps={eps}"
                )
                cells += 1
    return f"{cells} (m, k, r, eps) points obey the moment tail bound"


def _check_eulerian_sandwich(budget: int) -> str:
    checked = 0
    worst = 0.0
    for alpha, r_max in ((2, 6), (3, 7), (4, 6), (5, 5)):
        for r in range(alpha, r_max + 1):
            for beta in range(1, alpha // 2 + 1):
                result = count_eulerian_graphs(alpha, beta, r, budget)
                if result.log2_ratio_per_r is None:
                    continue
                assert result.log2_ratio_per_r <= 8.0, (
                    f"count vs estimate gap too large at alpha={alpha}, "
                    f"beta={beta}, r={r}: {result.log2_ratio_per_r}"
                )
                worst = max(worst, result.log2_ratio_per_r)
                checked += 1
    return f"{checked} realizable cells, worst per-edge gap {worst:.3f} bits"


def _check_moment_bound_shape() -> str:
    points = 0
    for m in (64, 256, 1024):
        for r in (2, 4, 8):
            previous = None
            for exp in range(0, 21):
                value = moment_bound(m, r, 2 ** exp)
                assert value > 0
                if previous is not None:
                    assert value <= previous * (1 + 1e-12), (
                        f"moment bound not non-increasing at m={m}, r={r}, k=2^{exp}"
                    )
                previous = value
                points += 1
            doubled = moment_bound(m, 2 * r, 16)
            assert doubled <= 4 * moment_bound(m, r, 16) + 1e-12, (
                f"doubling inequality violated at m={m}, r={r}"
            )
    return f"{points} grid points monotone; doubling inequality holds"


def _check_monte_carlo_bridge(budget: int, trials: int, seed: int,
                              backend: str | None) -> str:
    details = []
    for m, k in ((64, 2), (16, 3)):
        eps = Fraction(1, 2)
        exact = exact_failure_probability(m, k, eps, budget)
        fails = run_cell(seed, m, k, trials, [eps], backend)[0]
        hat = Fraction(fails, trials)
        p = float(exact)
        sigma = math.sqrt(p * (1 - p) / trials)
        assert abs(float(hat) - p) <= 4 * sigma, (
            f"Monte Carlo off at m={m}, k={k}: {float(hat):.5f} vs {p:.5f} "
            f"(4 sigma = {4 * sigma:.5f})"
        )
        details.append(f"m={m},k={k}: {float(hat):.4f} vs {p:.4f}")
    return "; ".join(details)


def run_all(budget: int = DEFAULT_BUDGET, trials: int = 1 << 13,
            seed: int = DEFAULT_SEED, backend: str | None = None) -> VerificationReport:
    """Run every check and return the structured report."""
    report = VerificationReport(
        backend=backend or _kernels.BACKEND, budget=budget, trials=trials, seed=seed,
    )
    report.checks.append(_guarded("cross-oracle-moments", lambda: _check_cross_oracle(budget)))
    report.checks.append(_guarded("variance-closed-form", lambda: _check_variance_closed_form(budget)))
    report.checks.append(_guarded("failure-probability-spots", lambda: _check_failure_probability_spots(budget)))
    report.checks.append(_guarded("markov-consistency", lambda: _check_markov_consistency(budget)))
    report.checks.append(_guarded("eulerian-sandwich", lambda: _check_eulerian_sandwich(budget)))
    report.checks.append(_guarded("moment-bound-shape", lambda: _check_moment_bound_shape()))
    report.checks.append(_guarded(
        "monte-carlo-bridge",
        lambda: _check_monte_carlo_bridge(budget, trials, seed, backend),
    ))
    return report
