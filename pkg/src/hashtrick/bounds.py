"""Closed-form bounds.

Three quantities with exact formulas live here:

* ``moment_bound``: the three-branch scale controlling the r-th moment
  norm of the projection's norm distortion,
* ``evaluate_tradeoff``: the largest max-to-norm ratio nu(m, eps, delta)
  for which the distortion guarantee holds, evaluated by regime, and
* ``eulerian_count_estimate``: the closed-form stand-in for the number of
  labeled Eulerian multigraphs that drive the moment analysis.

Regime thresholds use base-2 logarithms; the moment branches use natural
logarithms. Both choices are part of the formulas, not style.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

DEFAULT_UPPER_C = 4.0
DEFAULT_LOWER_D = 1.0 / 16.0
DEFAULT_SCALE = 0.725

REGIME_TRIVIAL_ONE = "trivial_one"
REGIME_MIDDLE = "middle"
REGIME_ZERO = "zero"
REGIME_INDETERMINATE = "indeterminate"


def moment_bound(m: float, r: float, k: float) -> float:
    """Moment-norm scale for bucket count m, moment order r, support size k.

    Branches on k against m*r and sqrt(m*r):

    * k >= m*r: sqrt(r/m)
    * m*r > k >= sqrt(m*r): max of sqrt(r/m) and r^2 / (k * ln^2(e*m*r/k))
    * sqrt(m*r) > k: additionally r / (k * ln(e*m*r/k^2))
    """
    if m <= 0 or r <= 0 or k <= 0:
        raise ValueError("m, r and k must be positive")
    first = math.sqrt(r / m)
    if k >= m * r:
        return first
    second = r * r / (k * math.log(math.e * m * r / k) ** 2)
    if k >= math.sqrt(m * r):
        return max(first, second)
    third = r / (k * math.log(math.e * m * r / (k * k)))
    return max(first, second, third)


@dataclass(frozen=True)
class TradeoffQuery:
    """One point on the tradeoff curve plus the tunable constants.

    ``upper_c`` is the middle-regime entry threshold (in units of the
    distortion dimension lg(1/delta)/eps^2), ``lower_d`` the zero-regime
    exit threshold, and ``scale`` the constant standing in for the
    asymptotic Theta in the middle regime.
    """

    m: int
    eps: float
    delta: float
    upper_c: float = DEFAULT_UPPER_C
    lower_d: float = DEFAULT_LOWER_D
    scale: float = DEFAULT_SCALE

    def __post_init__(self):
        if not isinstance(self.m, int) or isinstance(self.m, bool) or self.m < 1:
            raise ValueError("m must be a positive integer")
        if not 0.0 < self.eps < 1.0:
            raise ValueError("eps must lie strictly inside (0, 1)")
        if not 0.0 < self.delta < 1.0:
            raise ValueError("delta must lie strictly inside (0, 1)")
        if not 0.0 < self.lower_d <= self.upper_c:
            raise ValueError("need 0 < lower_d <= upper_c")
        if self.scale <= 0.0:
            raise ValueError("scale must be positive")


@dataclass(frozen=True)
class TradeoffResult:
    """Evaluated tradeoff point.

    ``nu`` is clamped to [0, 1]. ``left_term`` and ``right_term`` are the
    two middle-regime branch values before scaling (None outside the middle
    regime); ``note`` carries a diagnostic when the regime is
    indeterminate.
    """

    nu: float
    regime: str
    left_term: float | None = None
    right_term: float | None = None
    note: str = ""

    def to_json(self) -> dict:
        return {
            "nu": self.nu,
            "regime": self.regime,
            "left_term": self.left_term,
            "right_term": self.right_term,
            "note": self.note,
        }


def evaluate_tradeoff(query: TradeoffQuery) -> TradeoffResult:
    """Evaluate the tradeoff curve at one (m, eps, delta) point.

    Checks run in a fixed order that makes the regimes exhaustive and
    exclusive even where the raw thresholds cross: the trivial regime
    first (m >= 2 / (eps^2 delta), where every vector passes), then the
    zero regime (m below lower_d * lg(1/delta)/eps^2), then the middle
    regime (m at least upper_c times the same dimension); whatever is left
    between the zero and middle thresholds is indeterminate.
    """
    m = float(query.m)
    eps = query.eps
    delta = query.delta
    if m >= 2.0 / (eps * eps * delta):
        return TradeoffResult(1.0, REGIME_TRIVIAL_ONE)
    log_inv_delta = math.log2(1.0 / delta)
    dimension = log_inv_delta / (eps * eps)
    if m < query.lower_d * dimension:
        return TradeoffResult(0.0, REGIME_ZERO)
    if m < query.upper_c * dimension:
        return TradeoffResult(
            0.0, REGIME_INDETERMINATE,
            note="m falls between the zero and middle thresholds",
        )
    left_arg = eps * m / log_inv_delta
    right_arg = eps * eps * m / log_inv_delta
    if left_arg <= 1.0 or right_arg <= 1.0:
        return TradeoffResult(
            0.0, REGIME_INDETERMINATE,
            note="middle-regime log argument at or below 1",
        )
    left = math.log2(left_arg) / log_inv_delta
    right = math.sqrt(math.log2(right_arg) / log_inv_delta)
    nu = query.scale * math.sqrt(eps) * min(left, right)
    return TradeoffResult(min(max(nu, 0.0), 1.0), REGIME_MIDDLE, left, right)


def eulerian_count_estimate(alpha: int, beta: int, r: int) -> Fraction:
    """Closed-form estimate for the labeled Eulerian multigraph count.

    Equals alpha^(2 alpha) * beta^(-beta) * ((alpha - 2 beta)^2 +
    4 (alpha - beta))^(r - alpha) for alpha vertices, beta components and
    r labeled edges. Requires integers with 1 <= beta <= alpha/2 and
    alpha <= r, the domain where the estimate is meaningful.
    """
    for name, value in (("alpha", alpha), ("beta", beta), ("r", r)):
        if not isinstance(value, int) or isinstance(value, bool):
            raise ValueError(f"{name} must be an integer")
    if beta < 1 or 2 * beta > alpha or alpha > r:
        raise ValueError("need 1 <= beta <= alpha/2 and alpha <= r")
    base = (alpha - 2 * beta) ** 2 + 4 * (alpha - beta)
    return Fraction(alpha ** (2 * alpha) * base ** (r - alpha), beta ** beta)
