"""Turn equilibrium values into answers: promise decisions and rigorous
diamond-norm intervals.

A promise decision compares the solved value against the two thresholds
from the reduction; it is only attempted when the threshold gap exceeds
twice the total solver slack, otherwise the run refuses (the amplification
machinery that could shrink arbitrary gaps is out of scope). Unconditional
intervals invert the Fuchs-van de Graaf inequalities instead and are always
available.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .channels import ChannelSpec, normalize
from .errors import GapTooSmallError, ValidationError
from .mmw import EquilibriumResult, MMWConfig, solve_equilibrium
from .reduction import ReducedInstance, build_instance, promise_thresholds

_FUZZ = 1e-9


@dataclass(frozen=True)
class DiamondReport:
    """Decision and/or interval for the diamond distance of a channel pair.

    ``interval`` always contains the true diamond distance given the solver
    guarantee; ``decision`` ('far' or 'close') is present only when a
    promise (a, b) was supplied.
    """

    value: float
    delta: float
    delta1: float
    interval: tuple[float, float]
    lower_cert: float
    upper_cert: float
    iterations: int
    decision: str | None = None
    promise: tuple[float, float] | None = None
    thresholds: tuple[float, float] | None = None

    def __post_init__(self):
        lo, hi = self.interval
        if not (0.0 <= lo <= hi <= 2.0):
            raise ValidationError(f"interval [{lo}, {hi}] must be ordered inside [0, 2]")
        if (self.decision is None) != (self.promise is None):
            raise ValidationError("decision and promise must be supplied together")
        if self.decision is not None and self.decision not in ("far", "close"):
            raise ValidationError(f"decision must be 'far' or 'close', got {self.decision!r}")


def diamond_interval(value: float, delta_total: float) -> tuple[float, float]:
    """Interval for the diamond distance from an equilibrium value known to
    precision ``delta_total``.

    With v- = max(0, value - delta_total) and v+ = min(1, value + delta_total),
    the distance lies in [2 (1 - v+), 2 sqrt(1 - v-^2)].
    """
    if delta_total < 0:
        raise ValidationError(f"delta_total must be nonnegative, got {delta_total}")
    if not -delta_total - _FUZZ <= value <= 1.0 + delta_total + _FUZZ:
        raise ValidationError(
            f"value {value} outside the plausible range [-{delta_total}, 1 + {delta_total}]"
        )
    v = min(1.0, max(0.0, value))
    v_lo = max(0.0, v - delta_total)
    v_hi = min(1.0, v + delta_total)
    lo = max(0.0, 2.0 * (1.0 - v_hi))
    hi = min(2.0, 2.0 * math.sqrt(max(0.0, 1.0 - v_lo * v_lo)))
    return lo, hi


def _require_gap(t_far: float, t_close: float, delta_total: float) -> None:
    gap = t_close - t_far
    if gap <= 2.0 * delta_total:
        raise GapTooSmallError(
            f"threshold gap {gap:.4f} (thresholds {t_far:.4f}/{t_close:.4f}) does not "
            f"exceed twice the solver slack {delta_total:.4f}: gap too small for a "
            "direct decision; the amplification pipeline that handles such promises "
            "is out of scope"
        )


def _report(result: EquilibriumResult, cfg: MMWConfig, decision=None,
            promise=None, thresholds=None) -> DiamondReport:
    delta1 = cfg.resolved_delta1()
    return DiamondReport(
        value=result.value,
        delta=cfg.delta,
        delta1=delta1,
        interval=diamond_interval(result.value, cfg.delta + delta1),
        lower_cert=result.lower_cert,
        upper_cert=result.upper_cert,
        iterations=result.iterations,
        decision=decision,
        promise=promise,
        thresholds=thresholds,
    )


def solve_and_report(
    inst: ReducedInstance,
    cfg: MMWConfig | None = None,
    promise: tuple[float, float] | None = None,
) -> tuple[DiamondReport, EquilibriumResult]:
    """Solve an instance and build its report; the solver result (with the
    full trace) rides along for callers that want it.

    With a promise (a, b), the threshold gap is checked before any solver
    work and the report carries a decision.
    """
    cfg = MMWConfig() if cfg is None else cfg
    thresholds = None
    if promise is not None:
        a, b = promise
        thresholds = promise_thresholds(a, b)
        _require_gap(thresholds[0], thresholds[1], cfg.delta + cfg.resolved_delta1())
    result = solve_equilibrium(inst, cfg)
    decision = None
    if promise is not None:
        t_far, t_close = thresholds
        decision = "far" if result.value < 0.5 * (t_far + t_close) else "close"
        promise = (float(promise[0]), float(promise[1]))
    report = _report(result, cfg, decision=decision, promise=promise,
                     thresholds=thresholds)
    return report, result


def equilibrium_report(inst: ReducedInstance, cfg: MMWConfig | None = None) -> DiamondReport:
    """Solve an instance and report the value with its unconditional interval."""
    return solve_and_report(inst, cfg)[0]


def decide_qcd(inst: ReducedInstance, a: float, b: float,
               cfg: MMWConfig | None = None) -> DiamondReport:
    """Decide a distinguishability promise on a reduced instance.

    Under the promise that the diamond distance is either >= a ('far') or
    <= b ('close'), the solved value lands within the solver slack of one
    threshold side; the decision picks whichever threshold is closer.
    Raises GapTooSmallError when the thresholds are not separated well
    enough for the configured precision.
    """
    return solve_and_report(inst, cfg, promise=(a, b))[0]


def pdn_decide(spec0: ChannelSpec, spec1: ChannelSpec, a: float, b: float,
               cfg: MMWConfig | None = None,
               gap_floor: float | None = None) -> DiamondReport:
    """Decide a diamond-norm promise directly from two channel descriptions.

    Requires a^2 - (4b - b^2) > gap_floor; the default floor,
    8 (delta + delta1) (t_close + t_far), makes this exactly the threshold
    separation needed by the solver precision, since
    a^2 - (4b - b^2) = 4 (t_close - t_far)(t_close + t_far). Refuses with
    GapTooSmallError otherwise, never guesses.
    """
    cfg = MMWConfig() if cfg is None else cfg
    t_far, t_close = promise_thresholds(a, b)
    delta_total = cfg.delta + cfg.resolved_delta1()
    quad = a * a - (4.0 * b - b * b)
    floor = 8.0 * delta_total * (t_close + t_far) if gap_floor is None else gap_floor
    if quad <= floor:
        raise GapTooSmallError(
            f"promise condition a^2 - (4b - b^2) = {quad:.4f} does not exceed the "
            f"floor {floor:.4f} required at precision delta={cfg.delta}: gap too "
            "small for a direct decision; the amplification pipeline that handles "
            "such promises is out of scope"
        )
    inst = build_instance(normalize(spec0), normalize(spec1))
    return decide_qcd(inst, a, b, cfg)
