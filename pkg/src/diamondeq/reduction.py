"""Reduction of a channel pair to an equilibrium-value instance.

Two channels Q0, Q1 with Stinespring isometries A0, A1 (shared environment
dim z after padding) are combined into the stacked isometries

    S+ = (A0; A1) / sqrt(2)      S- = (A0; -A1) / sqrt(2)

whose rows carry an extra binary index placed as the most significant tensor
factor, so the stacked output space is ordered (flag, Y, Z). The stacks
satisfy tr_{flag,Z}(2 S+ X S-*) = Q0(X) - Q1(X), which is enforced on a full
matrix-unit basis at construction time rather than trusted.

The two "arm" channels tr_Y(S+ . S+*) and tr_Y(S- . S-*) map densities on
the doubled input space X0 (x) X1 (dim n^2, first factor most significant)
to densities on (flag, Z) (dim 2z), each arm reading only one marginal. The
difference map and its adjoint drive the equilibrium solver; the
distinguishability promises translate into thresholds on the equilibrium
value via the Fuchs-van de Graaf inequalities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import tolerances
from .channels import StinespringChannel, pad_env
from .errors import ValidationError
from .linalg import as_cmatrix, kron, partial_trace

#: Frobenius tolerance for the basis-wise decomposition identity.
DECOMPOSITION_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class ReducedInstance:
    """The stacked pair (S+, S-) with dimension bookkeeping.

    ``pair_dim`` (= n^2) is the solver-side density dimension and
    ``witness_dim`` (= 2z) the measurement-effect dimension.
    """

    stack_plus: np.ndarray
    stack_minus: np.ndarray
    input_dim: int
    output_dim: int
    env_dim: int

    @property
    def pair_dim(self) -> int:
        return self.input_dim * self.input_dim

    @property
    def witness_dim(self) -> int:
        return 2 * self.env_dim


def _channel_diff(a0: np.ndarray, a1: np.ndarray, m: int, z: int, x: np.ndarray) -> np.ndarray:
    return partial_trace(a0 @ x @ a0.conj().T, (m, z), (0,)) - partial_trace(
        a1 @ x @ a1.conj().T, (m, z), (0,)
    )


def build_instance(ch0: StinespringChannel, ch1: StinespringChannel) -> ReducedInstance:
    """Stack two channels into a ReducedInstance.

    Environments are zero-padded to a common dimension first. Both stacks are
    isometries by construction; the decomposition identity linking the stacks
    back to Q0 - Q1 is verified on every matrix unit before returning.
    """
    if ch0.input_dim != ch1.input_dim or ch0.output_dim != ch1.output_dim:
        raise ValidationError(
            "channel pair dimension mismatch: "
            f"({ch0.input_dim}->{ch0.output_dim}) vs ({ch1.input_dim}->{ch1.output_dim})"
        )
    z = max(ch0.env_dim, ch1.env_dim)
    a0 = pad_env(ch0, z).isometry
    a1 = pad_env(ch1, z).isometry
    n, m = ch0.input_dim, ch0.output_dim

    s = 1.0 / math.sqrt(2.0)
    plus = np.vstack([a0, a1]) * s
    minus = np.vstack([a0, -a1]) * s

    for label, c in (("plus", plus), ("minus", minus)):
        residual = float(np.linalg.norm(c.conj().T @ c - np.eye(n)))
        if residual > tolerances.ISO_TOL:
            raise ValidationError(
                f"stacked {label} matrix is not an isometry: residual {residual:.3e}"
            )

    for i in range(n):
        for j in range(n):
            x = np.zeros((n, n), dtype=np.complex128)
            x[i, j] = 1.0
            lhs = partial_trace(2.0 * plus @ x @ minus.conj().T, (2, m, z), (1,))
            rhs = _channel_diff(a0, a1, m, z, x)
            residual = float(np.linalg.norm(lhs - rhs))
            if residual > DECOMPOSITION_TOL:
                raise ValidationError(
                    f"stack decomposition identity fails on basis unit ({i},{j}): "
                    f"residual {residual:.3e}"
                )

    return ReducedInstance(plus, minus, n, m, z)


def _marginals(inst: ReducedInstance, rho: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    n = inst.input_dim
    first = partial_trace(rho, (n, n), (0,))
    second = partial_trace(rho, (n, n), (1,))
    return first, second


def arm_outputs(inst: ReducedInstance, rho) -> tuple[np.ndarray, np.ndarray]:
    """The two arm-channel outputs on (flag, Z), each a density operator.

    The plus arm reads the first marginal of ``rho``, the minus arm the
    second.
    """
    r = as_cmatrix(rho)
    if r.shape != (inst.pair_dim, inst.pair_dim):
        raise ValidationError(
            f"joint density has shape {r.shape}, expected "
            f"({inst.pair_dim}, {inst.pair_dim})"
        )
    first, second = _marginals(inst, r)
    dims = (2, inst.output_dim, inst.env_dim)
    out_plus = partial_trace(inst.stack_plus @ first @ inst.stack_plus.conj().T, dims, (0, 2))
    out_minus = partial_trace(inst.stack_minus @ second @ inst.stack_minus.conj().T, dims, (0, 2))
    return 0.5 * (out_plus + out_plus.conj().T), 0.5 * (out_minus + out_minus.conj().T)


def difference_output(inst: ReducedInstance, rho) -> np.ndarray:
    """Difference of the two arm outputs: Hermitian and traceless."""
    out_plus, out_minus = arm_outputs(inst, rho)
    return out_plus - out_minus


def difference_adjoint(inst: ReducedInstance, effect) -> np.ndarray:
    """Adjoint of the difference map on a measurement effect 0 <= E <= I.

    Computed by the closed formula
    (S+* (I_Y lifted E) S+) (x) I - I (x) (S-* (I_Y lifted E) S-);
    the defining inner-product identity is covered by property tests. The
    result always satisfies -I <= . <= I because each arm is trace
    preserving.
    """
    e = as_cmatrix(effect)
    d = inst.witness_dim
    if e.shape != (d, d):
        raise ValidationError(f"effect has shape {e.shape}, expected ({d}, {d})")
    w = np.linalg.eigvalsh(0.5 * (e + e.conj().T))
    limit = tolerances.PSD_TOL
    if w[0] < -limit or w[-1] > 1.0 + limit:
        raise ValidationError(
            f"effect eigenvalues [{w[0]:.3e}, {w[-1]:.3e}] outside [0, 1] "
            f"beyond tolerance {limit:.3e}"
        )
    z, m, n = inst.env_dim, inst.output_dim, inst.input_dim
    lifted = np.einsum(
        "qkrl,ym->qykrml", e.reshape(2, z, 2, z), np.eye(m, dtype=np.complex128)
    ).reshape(2 * m * z, 2 * m * z)
    g_plus = inst.stack_plus.conj().T @ lifted @ inst.stack_plus
    g_minus = inst.stack_minus.conj().T @ lifted @ inst.stack_minus
    eye = np.eye(n, dtype=np.complex128)
    out = kron(g_plus, eye) - kron(eye, g_minus)
    return 0.5 * (out + out.conj().T)


def promise_thresholds(a: float, b: float) -> tuple[float, float]:
    """Equilibrium-value thresholds implied by a distinguishability promise.

    For diamond distance >= a the equilibrium value is at most
    sqrt(4 - a^2)/2; for distance <= b it is at least (2 - b)/2. Returns
    (upper_when_far, lower_when_close).
    """
    if not (0.0 <= b < a <= 2.0):
        raise ValidationError(f"promise must satisfy 0 <= b < a <= 2, got a={a}, b={b}")
    return math.sqrt(4.0 - a * a) / 2.0, (2.0 - b) / 2.0
