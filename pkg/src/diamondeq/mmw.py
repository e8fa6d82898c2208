"""Matrix multiplicative weights solver for equilibrium values.

The meta-algorithm maintains a density rho(t) proportional to
exp(-eps * sum of observed loss matrices) and enjoys the regret bound

    (1 - eps) * sum_t <rho(t), M(t)>  <=  <rho*, sum_t M(t)> + ln(N)/eps

for every density rho*, provided every loss matrix satisfies 0 <= M <= I.
Instantiated with the channel-pair difference map, the averaged per-round
value approximates the equilibrium value within delta after
T = ceil(16 ln N / delta^2) rounds at learning rate eps = delta/4; with
floating-point kernels the guarantee degrades by at most the configured
slack budget delta1 on each side (accounted as (1/2) T delta1 inside the
regret inequality).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import tolerances
from .errors import (
    CertificateViolation,
    IterationCapError,
    OracleBoundError,
    ValidationError,
)
from .linalg import as_cmatrix, herm_eig, hs_inner, pos_proj
from .reduction import ReducedInstance, difference_adjoint, difference_output

#: Eigenvalue excursions of a loss matrix beyond [0, 1] up to this much are
#: clipped to the boundary; anything larger is a hard error.
CLIP_TOL = 1e-9


@dataclass(frozen=True)
class MMWConfig:
    """Solver configuration.

    ``delta`` is the target precision of the returned value. ``epsilon``
    and ``rounds`` default to delta/4 and ceil(16 ln N / delta^2) and are
    only overridden for experiments. ``delta1`` is the aggregate slack
    budget charged to approximate arithmetic (default delta/10); the
    per-operation budgets ``eta_exp``/``eta_proj`` are assumptions on the
    kernels, comfortably met by double precision at the matrix sizes this
    package targets and cross-checked by the test suite's independent
    oracles.
    """

    delta: float = 0.2
    epsilon: float | None = None
    rounds: int | None = None
    eta_exp: float = tolerances.ETA_DEFAULT
    eta_proj: float = tolerances.ETA_DEFAULT
    delta1: float | None = None
    max_rounds: int = 1_000_000

    def __post_init__(self):
        if not 0.0 < self.delta <= 2.0:
            raise ValidationError(f"delta must lie in (0, 2], got {self.delta}")
        if not 0.0 < self.resolved_epsilon() <= 0.5:
            raise ValidationError(
                f"learning rate must lie in (0, 1/2], got {self.resolved_epsilon()}"
            )
        if self.rounds is not None and self.rounds < 1:
            raise ValidationError(f"rounds must be >= 1, got {self.rounds}")
        if not self.resolved_delta1() < self.delta:
            raise ValidationError(
                f"slack budget delta1={self.resolved_delta1()} must be below delta={self.delta}"
            )
        if self.eta_exp <= 0 or self.eta_proj <= 0:
            raise ValidationError("per-operation budgets eta_exp/eta_proj must be positive")
        if self.max_rounds < 1:
            raise ValidationError(f"max_rounds must be >= 1, got {self.max_rounds}")

    def resolved_epsilon(self) -> float:
        return self.delta / 4.0 if self.epsilon is None else self.epsilon

    def resolved_delta1(self) -> float:
        return self.delta / 10.0 if self.delta1 is None else self.delta1

    def resolved_rounds(self, dim: int) -> int:
        if self.rounds is not None:
            return int(self.rounds)
        return int(math.ceil(16.0 * math.log(dim) / (self.delta * self.delta)))


@dataclass(eq=False)
class SolverTrace:
    """Per-round records of one solver run.

    Arrays are indexed by round (0-based for round t = 1). ``exp_min`` and
    ``exp_max`` are the extreme eigenvalues of the accumulated exponent
    -eps * sum of prior losses that produced rho(t); ``exponent_norm_bound``
    is the a-priori operator-norm bound eps * T on that exponent.
    """

    dim: int
    epsilon: float
    rounds: int
    delta: float
    delta1: float
    exponent_norm_bound: float
    losses: np.ndarray = field(default_factory=lambda: np.zeros(0))
    step_inners: np.ndarray = field(default_factory=lambda: np.zeros(0))
    exp_min: np.ndarray = field(default_factory=lambda: np.zeros(0))
    exp_max: np.ndarray = field(default_factory=lambda: np.zeros(0))
    rho_trace_err: np.ndarray = field(default_factory=lambda: np.zeros(0))
    rho_min_eig: np.ndarray = field(default_factory=lambda: np.zeros(0))
    m_min_eig: np.ndarray = field(default_factory=lambda: np.zeros(0))
    m_max_eig: np.ndarray = field(default_factory=lambda: np.zeros(0))
    loss_sum: np.ndarray | None = None
    value: float | None = None

    @property
    def executed(self) -> int:
        return int(self.losses.shape[0])

    def __eq__(self, other):
        if not isinstance(other, SolverTrace):
            return NotImplemented
        scalars = ("dim", "epsilon", "rounds", "delta", "delta1",
                   "exponent_norm_bound", "value")
        arrays = ("losses", "step_inners", "exp_min", "exp_max",
                  "rho_trace_err", "rho_min_eig", "m_min_eig", "m_max_eig")
        if any(getattr(self, k) != getattr(other, k) for k in scalars):
            return False
        if any(not np.array_equal(getattr(self, k), getattr(other, k)) for k in arrays):
            return False
        if (self.loss_sum is None) != (other.loss_sum is None):
            return False
        return self.loss_sum is None or np.array_equal(self.loss_sum, other.loss_sum)


def _gibbs_density(loss_sum: np.ndarray, epsilon: float):
    """Density exp(-eps S) / tr exp(-eps S) via eigendecomposition.

    The exponent is shifted by its largest eigenvalue before exponentiating;
    the shift cancels in the normalization, so the returned density is the
    exact mathematical value up to the eigendecomposition residual.
    """
    dec = herm_eig(loss_sum)
    w = dec.eigenvalues  # descending
    gains = np.exp(-epsilon * (w - w[-1]))
    total = float(np.sum(gains))
    rho = (dec.eigenvectors * gains) @ dec.eigenvectors.conj().T / total
    rho = 0.5 * (rho + rho.conj().T)
    # Spectrum of rho is gains/total by construction.
    return rho, -epsilon * float(w[0]), -epsilon * float(w[-1]), float(gains[-1] / total)


def mmw_run(loss_oracle, dim: int, cfg: MMWConfig | None = None) -> SolverTrace:
    """Run the multiplicative weights loop.

    ``loss_oracle`` maps a density rho to a loss matrix M with 0 <= M <= I,
    optionally returning ``(M, loss_value)`` to attach a per-round scalar to
    the trace (defaults to <rho, M>). Loss eigenvalues are checked each
    round: excursions beyond [0, 1] within CLIP_TOL are clipped, larger ones
    raise OracleBoundError. If the accuracy formula asks for more rounds
    than ``max_rounds``, the loop runs to the cap and raises
    IterationCapError carrying the partial trace.
    """
    cfg = MMWConfig() if cfg is None else cfg
    if dim < 1:
        raise ValidationError(f"dimension must be >= 1, got {dim}")
    eps = cfg.resolved_epsilon()
    planned = cfg.resolved_rounds(dim)
    executed = min(planned, cfg.max_rounds)

    records = {name: [] for name in (
        "losses", "step_inners", "exp_min", "exp_max",
        "rho_trace_err", "rho_min_eig", "m_min_eig", "m_max_eig")}
    loss_sum = np.zeros((dim, dim), dtype=np.complex128)

    for _ in range(executed):
        rho, e_min, e_max, rho_low = _gibbs_density(loss_sum, eps)
        records["exp_min"].append(e_min)
        records["exp_max"].append(e_max)
        records["rho_trace_err"].append(abs(float(np.trace(rho).real) - 1.0))
        records["rho_min_eig"].append(rho_low)

        out = loss_oracle(rho)
        m, loss = out if isinstance(out, tuple) else (out, None)
        m = as_cmatrix(m)
        if m.shape != (dim, dim):
            raise OracleBoundError(
                f"oracle returned shape {m.shape}, expected ({dim}, {dim})"
            )
        dec = herm_eig(m)
        high, low = float(dec.eigenvalues[0]), float(dec.eigenvalues[-1])
        if low < -CLIP_TOL or high > 1.0 + CLIP_TOL:
            raise OracleBoundError(
                f"loss matrix eigenvalues [{low:.3e}, {high:.3e}] violate "
                f"[0, 1] beyond the clip tolerance {CLIP_TOL:.1e}"
            )
        records["m_min_eig"].append(low)
        records["m_max_eig"].append(high)
        if low < 0.0 or high > 1.0:
            clipped = np.clip(dec.eigenvalues, 0.0, 1.0)
            m = (dec.eigenvectors * clipped) @ dec.eigenvectors.conj().T
            m = 0.5 * (m + m.conj().T)
        inner = float(hs_inner(rho, m).real)
        records["step_inners"].append(inner)
        records["losses"].append(inner if loss is None else float(loss))

        loss_sum = loss_sum + m
        loss_sum = 0.5 * (loss_sum + loss_sum.conj().T)

    trace = SolverTrace(
        dim=dim,
        epsilon=eps,
        rounds=planned,
        delta=cfg.delta,
        delta1=cfg.resolved_delta1(),
        exponent_norm_bound=eps * planned,
        loss_sum=loss_sum,
        **{name: np.asarray(values, dtype=np.float64) for name, values in records.items()},
    )
    if executed < planned:
        raise IterationCapError(
            f"accuracy formula asks for {planned} rounds but max_rounds is "
            f"{cfg.max_rounds}; partial trace attached",
            trace=trace,
        )
    return trace


def min_eig_projector(h) -> np.ndarray:
    """Rank-one projector onto an eigenvector of minimal eigenvalue."""
    dec = herm_eig(h)
    v = dec.eigenvectors[:, -1:]
    p = v @ v.conj().T
    return 0.5 * (p + p.conj().T)


def regret_check(trace: SolverTrace, rho_star=None, delta1: float | None = None) -> float:
    """Slack of the regret inequality for a completed trace.

    Returns ``<rho*, sum M> + ln(N)/eps + (1/2) T delta1 - (1-eps) sum <rho(t), M(t)>``,
    which must be nonnegative (within roundoff) whenever the inequality
    holds; ``rho_star`` defaults to the projector onto the minimum
    eigenvector of the accumulated loss sum, the adversarial choice. Pass
    ``delta1=0`` to check the exact-arithmetic form of the bound.
    """
    if trace.loss_sum is None:
        raise ValidationError("trace has no accumulated loss sum")
    star = min_eig_projector(trace.loss_sum) if rho_star is None else as_cmatrix(rho_star)
    if star.shape != trace.loss_sum.shape:
        raise ValidationError(
            f"rho_star shape {star.shape} does not match dimension {trace.dim}"
        )
    slack_budget = trace.delta1 if delta1 is None else delta1
    t = trace.executed
    lhs = (1.0 - trace.epsilon) * float(np.sum(trace.step_inners))
    rhs = (
        float(hs_inner(star, trace.loss_sum).real)
        + math.log(trace.dim) / trace.epsilon
        + 0.5 * t * slack_budget
    )
    return rhs - lhs


@dataclass(frozen=True, eq=False)
class EquilibriumResult:
    """Approximate equilibrium value with self-validating certificates.

    ``lower_cert`` is the minimum eigenvalue of the adjoint image of the
    averaged (or best single-round) witness, a weak-duality lower bound on
    the equilibrium value; ``upper_cert`` is the smallest per-round value,
    an upper bound since every round plays an exact best response. Both are
    checked against ``value`` at construction.
    """

    value: float
    lower_cert: float
    upper_cert: float
    iterations: int
    trace: SolverTrace
    bound: float = 1.0

    def __post_init__(self):
        fuzz = 1e-9 * max(1.0, self.bound)
        slack = 2.0 * self.trace.delta1 * self.bound + fuzz
        if self.lower_cert > self.upper_cert + slack:
            raise CertificateViolation(
                f"certificates crossed: lower {self.lower_cert} > upper "
                f"{self.upper_cert} + {slack}"
            )
        width = self.trace.delta * self.bound + fuzz
        if not (self.lower_cert - width <= self.value <= self.upper_cert + width):
            raise CertificateViolation(
                f"value {self.value} outside certificate window "
                f"[{self.lower_cert - width}, {self.upper_cert + width}]"
            )


def solve_generic(
    dim: int,
    apply_op,
    adjoint_op,
    argmax_op,
    bound: float,
    cfg: MMWConfig | None = None,
    loss_range: tuple[float, float] | None = None,
) -> EquilibriumResult:
    """Equilibrium value of min over densities, max over a convex witness
    set, of ``<witness, apply_op(rho)>``.

    ``argmax_op`` must return the exact maximizing witness for a given value
    operator (up to eta_proj), ``adjoint_op`` the adjoint image of a
    witness, and ``bound`` a bound on ``|<witness, apply_op(rho)>|`` over
    all inputs (spot-checked every round; the accuracy guarantee scales
    with it).
    """
    cfg = MMWConfig() if cfg is None else cfg
    if bound <= 0:
        raise ValidationError(f"value bound must be positive, got {bound}")
    eye = np.eye(dim, dtype=np.complex128)
    state = {"witness_sum": None, "count": 0}

    def oracle(rho):
        value_op = apply_op(rho)
        witness = argmax_op(value_op)
        loss = float(hs_inner(witness, value_op).real)
        if abs(loss) > bound * (1.0 + CLIP_TOL) + CLIP_TOL:
            raise OracleBoundError(
                f"round value {loss} exceeds the declared bound {bound}"
            )
        if loss_range is not None and not (
            loss_range[0] - CLIP_TOL <= loss <= loss_range[1] + CLIP_TOL
        ):
            raise OracleBoundError(
                f"round value {loss} outside promised range {loss_range}"
            )
        image = adjoint_op(witness)
        m = 0.5 * (image / bound + eye)
        if state["witness_sum"] is None:
            state["witness_sum"] = np.array(witness, dtype=np.complex128)
        else:
            state["witness_sum"] += witness
        state["count"] += 1
        return m, loss

    trace = mmw_run(oracle, dim, cfg)
    value = float(np.mean(trace.losses))
    trace.value = value

    averaged = state["witness_sum"] / state["count"]
    lower_avg = float(np.linalg.eigvalsh(adjoint_op(averaged))[0])
    # lambda_min of each round's adjoint image, recovered from the recorded
    # loss-matrix spectrum: image = bound * (2 M - I).
    lower_single = bound * (2.0 * float(np.max(trace.m_min_eig)) - 1.0)
    lower = max(lower_avg, lower_single)
    upper = float(np.min(trace.losses))
    return EquilibriumResult(
        value=value,
        lower_cert=lower,
        upper_cert=upper,
        iterations=trace.executed,
        trace=trace,
        bound=bound,
    )


def solve_equilibrium(inst: ReducedInstance, cfg: MMWConfig | None = None) -> EquilibriumResult:
    """Equilibrium value of a reduced channel-pair instance.

    Each round plays the positive-eigenspace projector of the difference
    output (the exact best response) and feeds back the shifted adjoint
    image as the loss matrix; the averaged per-round value approximates the
    equilibrium value within delta (+ the delta1 slack budget) and lies in
    [0, 1] up to roundoff.
    """
    cfg = MMWConfig() if cfg is None else cfg
    return solve_generic(
        inst.pair_dim,
        lambda rho: difference_output(inst, rho),
        lambda witness: difference_adjoint(inst, witness),
        lambda value_op: pos_proj(value_op, cfg.eta_proj),
        1.0,
        cfg,
        loss_range=(0.0, 1.0),
    )
