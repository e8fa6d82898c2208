"""Dense complex-matrix kernels with explicit error tolerances.

All operations are pure functions of numpy arrays. Flattened tensor indices
follow one global convention, fixed for the whole package: the leftmost
tensor factor is the most significant index, matching ``numpy.kron``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import tolerances
from .errors import EigendecompositionError, ValidationError


def as_cmatrix(a) -> np.ndarray:
    """Coerce ``a`` to a finite complex128 2-D array."""
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2:
        raise ValidationError(f"expected a 2-D matrix, got ndim={m.ndim}")
    if not (np.all(np.isfinite(m.real)) and np.all(np.isfinite(m.imag))):
        raise ValidationError("matrix entries must be finite (no NaN/Inf)")
    return m


def hermitian_part(a) -> np.ndarray:
    """Return (A + A*) / 2."""
    m = as_cmatrix(a)
    return 0.5 * (m + m.conj().T)


def require_hermitian(h, herm_tol: float | None = None) -> np.ndarray:
    """Validate that ``h`` is Hermitian within tolerance and return the
    symmetrized copy (H + H*) / 2.

    Raises ValidationError naming the Frobenius residual on failure.
    """
    m = as_cmatrix(h)
    if m.shape[0] != m.shape[1]:
        raise ValidationError(f"Hermitian matrix must be square, got shape {m.shape}")
    limit = tolerances.HERM_TOL if herm_tol is None else herm_tol
    residual = float(np.linalg.norm(m - m.conj().T))
    if residual > limit:
        raise ValidationError(
            f"matrix is not Hermitian: ||H - H*||_F = {residual:.3e} > {limit:.3e}"
        )
    return 0.5 * (m + m.conj().T)


@dataclass(frozen=True, eq=False)
class EigDecomp:
    """Eigendecomposition of a Hermitian matrix.

    ``eigenvalues`` are real and sorted non-increasing; ``eigenvectors``
    holds the matching orthonormal eigenvectors as columns.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[0]

    def reconstruct(self) -> np.ndarray:
        """Return U diag(w) U*."""
        return (self.eigenvectors * self.eigenvalues) @ self.eigenvectors.conj().T


def herm_eig(h, herm_tol: float | None = None) -> EigDecomp:
    """Eigendecomposition of a Hermitian matrix, eigenvalues descending.

    Checks the reconstruction and unitarity residuals against
    ``EIG_TOL * dim`` before returning.
    """
    hs = require_hermitian(h, herm_tol)
    n = hs.shape[0]
    try:
        w, u = np.linalg.eigh(hs)
    except np.linalg.LinAlgError as exc:
        raise EigendecompositionError(
            f"eigendecomposition of a {n}x{n} Hermitian matrix did not converge"
        ) from exc
    w = w[::-1].copy()
    u = u[:, ::-1].copy()
    limit = tolerances.EIG_TOL * n
    recon = float(np.linalg.norm(hs - (u * w) @ u.conj().T))
    unit = float(np.linalg.norm(u.conj().T @ u - np.eye(n)))
    if recon > limit or unit > limit:
        raise EigendecompositionError(
            f"eigendecomposition of a {n}x{n} matrix exceeded residual bounds: "
            f"reconstruction {recon:.3e}, unitarity {unit:.3e}, limit {limit:.3e}"
        )
    return EigDecomp(w, u)


def _positive_eta(eta: float | None) -> float:
    value = tolerances.ETA_DEFAULT if eta is None else eta
    if not value > 0:
        raise ValidationError(f"approximation budget eta must be positive, got {value}")
    return value


def mat_exp_hermitian(h, eta: float | None = None) -> np.ndarray:
    """exp(H) for Hermitian H via eigendecomposition.

    The result R is Hermitian positive definite and satisfies
    ``||R - exp(H)|| <= eta`` in operator norm; any ``eta`` at a comfortable
    margin above machine precision times ``||exp(H)||`` is honored by this
    route.
    """
    _positive_eta(eta)
    dec = herm_eig(h)
    r = (dec.eigenvectors * np.exp(dec.eigenvalues)) @ dec.eigenvectors.conj().T
    return 0.5 * (r + r.conj().T)


def pos_proj(h, eta: float | None = None) -> np.ndarray:
    """Orthogonal projector onto the span of eigenvectors of H with strictly
    positive eigenvalue.

    Eigenvalues are taken from the symmetrized input; the zero matrix maps to
    the zero projector. ``||result - projector|| <= eta`` holds whenever no
    eigenvalue sits within roundoff of zero.
    """
    _positive_eta(eta)
    dec = herm_eig(h)
    cols = dec.eigenvectors[:, dec.eigenvalues > 0.0]
    p = cols @ cols.conj().T
    return 0.5 * (p + p.conj().T)


def trace_norm(a) -> float:
    """Trace norm ||A||_1, the sum of singular values."""
    m = as_cmatrix(a)
    try:
        s = np.linalg.svd(m, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise EigendecompositionError(
            f"singular value decomposition of a {m.shape[0]}x{m.shape[1]} "
            "matrix did not converge"
        ) from exc
    return float(np.sum(s))


def _psd_sqrt(p, psd_tol: float) -> np.ndarray:
    dec = herm_eig(p)
    low = float(dec.eigenvalues[-1])
    if low < -psd_tol:
        raise ValidationError(
            f"matrix is not positive semidefinite: min eigenvalue {low:.3e} < -{psd_tol:.3e}"
        )
    w = np.sqrt(np.clip(dec.eigenvalues, 0.0, None))
    return (dec.eigenvectors * w) @ dec.eigenvectors.conj().T


def fidelity(p, q, psd_tol: float | None = None) -> float:
    """Fidelity ||sqrt(P) sqrt(Q)||_1 of two positive semidefinite operators.

    Inputs may dip below zero by at most ``psd_tol`` (clipped); anything
    lower is rejected. Satisfies F(cP, cQ) = c F(P, Q) for scalar c >= 0.
    """
    limit = tolerances.PSD_TOL if psd_tol is None else psd_tol
    rp = _psd_sqrt(p, limit)
    rq = _psd_sqrt(q, limit)
    return trace_norm(rp @ rq)


def partial_trace(m, dims, keep) -> np.ndarray:
    """Trace out tensor factors of a square matrix.

    ``dims`` lists the factor dimensions, leftmost factor most significant in
    the flattened index; ``keep`` selects the factor positions to retain.
    Kept factors stay in their original relative order. The full trace is
    preserved: tr(result) = tr(M).
    """
    mm = as_cmatrix(m)
    dims = tuple(int(d) for d in dims)
    if any(d <= 0 for d in dims):
        raise ValidationError(f"factor dimensions must be positive, got {dims}")
    side = int(np.prod(dims))
    if mm.shape != (side, side):
        raise ValidationError(
            f"matrix shape {mm.shape} does not match factor dimensions {dims} "
            f"(expected {side}x{side})"
        )
    keep = tuple(sorted(set(int(k) for k in keep)))
    if any(k < 0 or k >= len(dims) for k in keep):
        raise ValidationError(f"keep positions {keep} out of range for {len(dims)} factors")
    k = len(dims)
    tensor = mm.reshape(dims + dims)
    letters = "abcdefghijklmnopqrstuvwxyz"
    if 2 * k > len(letters):
        raise ValidationError(f"too many tensor factors ({k})")
    row = list(letters[:k])
    col = [letters[k + i] if i in keep else row[i] for i in range(k)]
    out = "".join(row[i] for i in keep) + "".join(col[i] for i in keep)
    reduced = np.einsum("".join(row) + "".join(col) + "->" + out, tensor)
    kept_side = int(np.prod([dims[i] for i in keep])) if keep else 1
    return reduced.reshape(kept_side, kept_side)


def hs_inner(a, b) -> complex:
    """Hilbert-Schmidt inner product tr(A* B)."""
    ma = as_cmatrix(a)
    mb = as_cmatrix(b)
    if ma.shape != mb.shape:
        raise ValidationError(f"shape mismatch in inner product: {ma.shape} vs {mb.shape}")
    return complex(np.vdot(ma, mb))


def kron(a, b) -> np.ndarray:
    """Tensor product with the leftmost factor most significant."""
    return np.kron(as_cmatrix(a), as_cmatrix(b))
