"""Channel data model: validation, normalization to Stinespring form,
application, and compilation of small gate circuits into isometries.

A channel on input space X (dim n) with output space Y (dim m) is stored as
an isometry A from X into Y tensor Z (environment dim z), acting as
rho -> tr_Z(A rho A*). Flattened indices put Y before Z (leftmost factor
most significant, as everywhere in this package).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import tolerances
from .errors import ValidationError
from .linalg import as_cmatrix, herm_eig, kron, partial_trace

KINDS = ("stinespring", "kraus", "unitary", "constant")


def check_isometry(a) -> float:
    """Return the isometry residual ||A*A - I||_F."""
    m = as_cmatrix(a)
    n = m.shape[1]
    return float(np.linalg.norm(m.conj().T @ m - np.eye(n)))


def _require_isometry(a, what: str, iso_tol: float) -> np.ndarray:
    m = as_cmatrix(a)
    residual = check_isometry(m)
    if residual > iso_tol:
        raise ValidationError(
            f"{what} is not an isometry: ||A*A - I||_F = {residual:.3e} > {iso_tol:.3e}"
        )
    return m


def require_density(rho, dim: int | None = None, tol: float | None = None) -> np.ndarray:
    """Validate a density operator (Hermitian, PSD and unit trace within tol)."""
    limit = tolerances.DENSITY_TOL if tol is None else tol
    m = as_cmatrix(rho)
    if m.shape[0] != m.shape[1]:
        raise ValidationError(f"density operator must be square, got shape {m.shape}")
    if dim is not None and m.shape[0] != dim:
        raise ValidationError(f"density operator has dim {m.shape[0]}, expected {dim}")
    herm = float(np.linalg.norm(m - m.conj().T))
    if herm > limit:
        raise ValidationError(f"density operator not Hermitian: residual {herm:.3e}")
    tr = complex(np.trace(m))
    if abs(tr - 1.0) > limit:
        raise ValidationError(f"density operator has trace {tr}, expected 1")
    low = float(np.linalg.eigvalsh(0.5 * (m + m.conj().T))[0])
    if low < -limit:
        raise ValidationError(f"density operator has negative eigenvalue {low:.3e}")
    return 0.5 * (m + m.conj().T)


def _freeze(m: np.ndarray) -> np.ndarray:
    out = np.array(m, dtype=np.complex128)
    out.flags.writeable = False
    return out


@dataclass(frozen=True, eq=False)
class ChannelSpec:
    """A channel as provided by the user, in one of four kinds.

    kind        matrices                        constraint
    ----------  ------------------------------  --------------------------------
    stinespring one (m*z) x n isometry          A*A = I within iso_tol
    kraus       k operators, each m x n         sum K_i* K_i = I within iso_tol
    unitary     one n x n matrix                unitary within iso_tol
    constant    one m x m target state sigma    PSD, trace 1 within tolerance

    Validation happens at construction and raises ValidationError naming the
    failed check and its residual.
    """

    kind: str
    input_dim: int
    output_dim: int
    matrices: tuple = field(default_factory=tuple)
    env_dim: int | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValidationError(f"unknown channel kind {self.kind!r}, expected one of {KINDS}")
        n, m = int(self.input_dim), int(self.output_dim)
        if n <= 0 or m <= 0:
            raise ValidationError(f"channel dims must be positive, got n={n}, m={m}")
        mats = tuple(_freeze(as_cmatrix(x)) for x in self.matrices)
        object.__setattr__(self, "matrices", mats)
        object.__setattr__(self, "input_dim", n)
        object.__setattr__(self, "output_dim", m)
        if self.kind != "stinespring" and self.env_dim is not None:
            raise ValidationError("env_dim only applies to the stinespring kind")
        getattr(self, f"_check_{self.kind}")()

    def _check_stinespring(self):
        if len(self.matrices) != 1:
            raise ValidationError("stinespring kind takes exactly one matrix")
        a = self.matrices[0]
        rows, cols = a.shape
        if cols != self.input_dim or rows % self.output_dim != 0:
            raise ValidationError(
                f"stinespring matrix shape {a.shape} incompatible with "
                f"input_dim={self.input_dim}, output_dim={self.output_dim}"
            )
        z = rows // self.output_dim
        if self.env_dim is not None and self.env_dim != z:
            raise ValidationError(
                f"declared env_dim={self.env_dim} but matrix implies z={z}"
            )
        object.__setattr__(self, "env_dim", z)
        _require_isometry(a, "stinespring matrix", tolerances.ISO_TOL)

    def _check_kraus(self):
        if not self.matrices:
            raise ValidationError("kraus kind needs at least one operator")
        n, m = self.input_dim, self.output_dim
        for i, k in enumerate(self.matrices):
            if k.shape != (m, n):
                raise ValidationError(
                    f"kraus operator {i} has shape {k.shape}, expected ({m}, {n})"
                )
        total = sum(k.conj().T @ k for k in self.matrices)
        residual = float(np.linalg.norm(total - np.eye(n)))
        if residual > tolerances.ISO_TOL:
            raise ValidationError(
                f"kraus set is not trace preserving: ||sum K*K - I||_F = {residual:.3e}"
            )

    def _check_unitary(self):
        if len(self.matrices) != 1:
            raise ValidationError("unitary kind takes exactly one matrix")
        u = self.matrices[0]
        if self.input_dim != self.output_dim or u.shape != (self.input_dim, self.input_dim):
            raise ValidationError(
                f"unitary matrix shape {u.shape} must be square and match "
                f"input_dim={self.input_dim}, output_dim={self.output_dim}"
            )
        _require_isometry(u, "unitary matrix", tolerances.ISO_TOL)

    def _check_constant(self):
        if len(self.matrices) != 1:
            raise ValidationError("constant kind takes exactly one target state")
        sigma = self.matrices[0]
        if sigma.shape != (self.output_dim, self.output_dim):
            raise ValidationError(
                f"constant target has shape {sigma.shape}, expected "
                f"({self.output_dim}, {self.output_dim})"
            )
        require_density(sigma)


@dataclass(frozen=True, eq=False)
class StinespringChannel:
    """A validated channel rho -> tr_Z(A rho A*) with A an isometry."""

    isometry: np.ndarray
    input_dim: int
    output_dim: int
    env_dim: int

    def __post_init__(self):
        a = _freeze(as_cmatrix(self.isometry))
        if a.shape != (self.output_dim * self.env_dim, self.input_dim):
            raise ValidationError(
                f"isometry shape {a.shape} does not match dims "
                f"(m*z, n) = ({self.output_dim * self.env_dim}, {self.input_dim})"
            )
        object.__setattr__(self, "isometry", a)
        _require_isometry(a, "channel isometry", tolerances.ISO_TOL)


def _native_apply(spec: ChannelSpec, x: np.ndarray) -> np.ndarray:
    """Channel action straight from the spec's own representation."""
    if spec.kind == "stinespring":
        a = spec.matrices[0]
        return partial_trace(a @ x @ a.conj().T, (spec.output_dim, spec.env_dim), (0,))
    if spec.kind == "kraus":
        return sum(k @ x @ k.conj().T for k in spec.matrices)
    if spec.kind == "unitary":
        u = spec.matrices[0]
        return u @ x @ u.conj().T
    # constant
    return spec.matrices[0] * complex(np.trace(x))


def apply(ch: StinespringChannel, rho, validate: bool = True) -> np.ndarray:
    """Apply the channel to a density operator.

    The output is again a density operator up to roundoff (the isometry
    guarantees trace preservation).
    """
    r = require_density(rho, ch.input_dim) if validate else as_cmatrix(rho)
    if r.shape != (ch.input_dim, ch.input_dim):
        raise ValidationError(
            f"input has shape {r.shape}, channel expects ({ch.input_dim}, {ch.input_dim})"
        )
    a = ch.isometry
    return partial_trace(a @ r @ a.conj().T, (ch.output_dim, ch.env_dim), (0,))


def normalize(spec: ChannelSpec) -> StinespringChannel:
    """Normalize a validated ChannelSpec into Stinespring form.

    Dilation choices, fixed once for reproducibility:

    * kraus: A = sum_i K_i (x) |i>_Z, so z equals the number of operators
      and Z is the trailing tensor factor;
    * unitary: A = U with a trivial environment (z = 1);
    * constant target sigma = sum_j lam_j |v_j><v_j|: A maps
      |x> -> sum_j sqrt(lam_j) |v_j>_Y |j>_Z1 |x>_Z2 with Z = Z1 (x) Z2,
      so z = m * n.

    The returned channel reproduces the spec's action on a full matrix-unit
    basis within 1e-9 (verified here before returning).
    """
    n, m = spec.input_dim, spec.output_dim
    if spec.kind == "stinespring":
        ch = StinespringChannel(spec.matrices[0], n, m, spec.env_dim)
    elif spec.kind == "unitary":
        ch = StinespringChannel(spec.matrices[0], n, m, 1)
    elif spec.kind == "kraus":
        k = len(spec.matrices)
        a = np.zeros((m * k, n), dtype=np.complex128)
        for i, op in enumerate(spec.matrices):
            e = np.zeros((k, 1), dtype=np.complex128)
            e[i, 0] = 1.0
            a += kron(op, e)
        ch = StinespringChannel(a, n, m, k)
    else:  # constant
        dec = herm_eig(spec.matrices[0])
        lam = np.clip(dec.eigenvalues, 0.0, None)
        a = np.zeros((m * m * n, n), dtype=np.complex128)
        eye = np.eye(n, dtype=np.complex128)
        for j in range(m):
            v = dec.eigenvectors[:, j].reshape(m, 1)
            e = np.zeros((m, 1), dtype=np.complex128)
            e[j, 0] = 1.0
            a += math.sqrt(float(lam[j])) * kron(kron(v, e), eye)
        ch = StinespringChannel(a, n, m, m * n)

    # The dilation must reproduce the declared action on a full basis.
    for i in range(n):
        for j in range(n):
            x = np.zeros((n, n), dtype=np.complex128)
            x[i, j] = 1.0
            want = _native_apply(spec, x)
            got = partial_trace(
                ch.isometry @ x @ ch.isometry.conj().T, (m, ch.env_dim), (0,)
            )
            residual = float(np.linalg.norm(got - want))
            if residual > 1e-9:
                raise ValidationError(
                    f"normalized channel deviates from the {spec.kind} action on "
                    f"basis unit ({i},{j}): residual {residual:.3e}"
                )
    return ch


def pad_env(ch: StinespringChannel, env_dim: int) -> StinespringChannel:
    """Extend the environment to ``env_dim`` by appending zero rows inside
    each output block. The channel action is unchanged."""
    if env_dim < ch.env_dim:
        raise ValidationError(f"cannot shrink env dim {ch.env_dim} to {env_dim}")
    if env_dim == ch.env_dim:
        return ch
    a = ch.isometry.reshape(ch.output_dim, ch.env_dim, ch.input_dim)
    padded = np.zeros((ch.output_dim, env_dim, ch.input_dim), dtype=np.complex128)
    padded[:, : ch.env_dim, :] = a
    return StinespringChannel(
        padded.reshape(ch.output_dim * env_dim, ch.input_dim),
        ch.input_dim,
        ch.output_dim,
        env_dim,
    )


def _embed_gate(gate: np.ndarray, wires, dims) -> np.ndarray:
    """Lift a gate acting on ``wires`` to the full wire register."""
    w = len(dims)
    rest = [i for i in range(w) if i not in wires]
    order = list(wires) + rest
    rest_dim = int(np.prod([dims[i] for i in rest])) if rest else 1
    full = np.kron(gate, np.eye(rest_dim, dtype=np.complex128))
    shape = [dims[i] for i in order]
    tensor = full.reshape(shape + shape)
    inv = np.argsort(order)
    perm = list(inv) + [w + int(i) for i in inv]
    side = int(np.prod(dims))
    return tensor.transpose(perm).reshape(side, side)


def circuit_to_stinespring(
    gates,
    wire_dims,
    ancilla_count: int = 0,
    traced_wires=(),
) -> StinespringChannel:
    """Compile a gate list into a Stinespring channel.

    ``wire_dims`` lists every wire's dimension, inputs first; the final
    ``ancilla_count`` wires start in |0>. Each gate is a pair
    ``(unitary, wires)`` where ``wires`` are distinct wire indices whose
    combined dimension matches the unitary. Wires listed in ``traced_wires``
    form the environment Z; the remaining wires, in their original order,
    form the output Y.
    """
    dims = tuple(int(d) for d in wire_dims)
    w = len(dims)
    if any(d <= 0 for d in dims):
        raise ValidationError(f"wire dimensions must be positive, got {dims}")
    if not 0 <= ancilla_count <= w:
        raise ValidationError(f"ancilla_count {ancilla_count} out of range for {w} wires")
    traced = tuple(sorted(set(int(t) for t in traced_wires)))
    if any(t < 0 or t >= w for t in traced):
        raise ValidationError(f"traced wires {traced} out of range for {w} wires")

    total = int(np.prod(dims))
    unitary = np.eye(total, dtype=np.complex128)
    for g, (gate, wires) in enumerate(gates):
        wires = tuple(int(x) for x in wires)
        if len(set(wires)) != len(wires):
            raise ValidationError(f"gate {g} lists duplicate wires {wires}")
        if any(x < 0 or x >= w for x in wires):
            raise ValidationError(f"gate {g} wiring {wires} out of range for {w} wires")
        u = as_cmatrix(gate)
        gdim = int(np.prod([dims[x] for x in wires]))
        if u.shape != (gdim, gdim):
            raise ValidationError(
                f"gate {g} has shape {u.shape}, wires {wires} need ({gdim}, {gdim})"
            )
        residual = check_isometry(u)
        if residual > tolerances.ISO_TOL:
            raise ValidationError(
                f"gate {g} is not unitary: residual {residual:.3e}"
            )
        unitary = _embed_gate(u, wires, dims) @ unitary

    n_wires = w - ancilla_count
    n = int(np.prod(dims[:n_wires])) if n_wires else 1
    anc_dim = int(np.prod(dims[n_wires:])) if ancilla_count else 1
    anc = np.zeros((anc_dim, 1), dtype=np.complex128)
    anc[0, 0] = 1.0
    a = unitary @ kron(np.eye(n, dtype=np.complex128), anc)

    kept = [i for i in range(w) if i not in traced]
    perm = kept + list(traced)
    a = a.reshape(dims + (n,)).transpose(perm + [w]).reshape(total, n)
    m = int(np.prod([dims[i] for i in kept])) if kept else 1
    z = int(np.prod([dims[i] for i in traced])) if traced else 1
    return StinespringChannel(a, n, m, z)
