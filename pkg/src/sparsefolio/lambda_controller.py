"""Initialization and adaptive escalation of the L1 penalty weight.

The default weight is 1/(m*n) for an m-period, n-asset estimation window.
In adaptive mode the weight is multiplied by (shorts observed / shorts
tolerated) whenever the iterate carries more short positions than the
investor allows, which monotonically drives the solution long-only.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

LAMBDA_MODES = ("fixed", "auto-initial", "adaptive")
DEFAULT_MAX_ADJUSTMENTS = 50


@dataclass(frozen=True)
class LambdaSchedule:
    lambda0: float
    lambda_current: float
    sn: int = 0
    adjustments_made: int = 0
    max_adjustments: int = DEFAULT_MAX_ADJUSTMENTS
    mode: str = "fixed"

    def __post_init__(self):
        if self.mode not in LAMBDA_MODES:
            raise ValueError(f"mode must be one of {LAMBDA_MODES}, got {self.mode!r}")
        if self.lambda0 < 0 or self.lambda_current < 0:
            raise ValueError("lambda weights must be nonnegative")
        if self.mode != "fixed" and self.lambda0 == 0:
            # A zero weight can never escalate multiplicatively and "auto"
            # always yields 1/(m*n) > 0, so only fixed mode may carry 0.
            raise ValueError(f"lambda must be positive in {self.mode} mode")
        if self.lambda_current < self.lambda0:
            raise ValueError("lambda_current may never fall below lambda0")
        if self.sn < 0:
            raise ValueError("sn must be nonnegative")
        if not (0 <= self.adjustments_made <= self.max_adjustments):
            raise ValueError("adjustments_made out of range")

    @classmethod
    def fixed(cls, value: float) -> "LambdaSchedule":
        return cls(lambda0=float(value), lambda_current=float(value), mode="fixed")

    @classmethod
    def auto(cls, m: int, n: int) -> "LambdaSchedule":
        value = initial_lambda(m, n)
        return cls(lambda0=value, lambda_current=value, mode="auto-initial")

    @classmethod
    def adaptive(cls, lambda0: float, sn: int = 0,
                 max_adjustments: int = DEFAULT_MAX_ADJUSTMENTS) -> "LambdaSchedule":
        return cls(lambda0=float(lambda0), lambda_current=float(lambda0),
                   sn=sn, max_adjustments=max_adjustments, mode="adaptive")


def initial_lambda(m: int, n: int) -> float:
    """Default L1 weight 1/(m*n); decays with more data or more assets."""
    if m < 2 or n < 2:
        raise ValueError(f"need m >= 2 periods and n >= 2 assets, got m={m}, n={n}")
    return 1.0 / (m * n)


def maybe_adjust(schedule: LambdaSchedule, sm: int) -> LambdaSchedule:
    """Escalate lambda when the iterate holds more than sn short positions.

    The multiplier is sm/sn with a zero sn clamped to 1 in the denominator.
    Only multipliers above 1 count as adjustments (sm = 1 with sn = 0 would
    multiply by exactly 1); the budget max_adjustments bounds the total
    number so lambda cannot diverge when the target is unattainable
    long-only.  Lambda never decreases.
    """
    if schedule.mode != "adaptive":
        raise ValueError(f"maybe_adjust requires adaptive mode, got {schedule.mode!r}")
    if sm > schedule.sn and schedule.adjustments_made < schedule.max_adjustments:
        factor = sm / max(schedule.sn, 1)
        if factor > 1.0:
            return replace(schedule,
                           lambda_current=schedule.lambda_current * factor,
                           adjustments_made=schedule.adjustments_made + 1)
    return schedule
