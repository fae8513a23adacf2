"""Dense Hermitian-operator numerics.

Spectral decompositions with a deterministic eigenvector phase convention,
the symmetric-division superoperator in spectral and vectorized backends,
support (kernel) projectors, Kronecker powers, and Hermitian pseudo-inverses.
All functions are pure; inputs are never mutated.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

from .errors import (
    DimensionCapError,
    DimensionMismatchError,
    NegativeEigenvalueError,
    NonHermitianError,
    NumericalFailureError,
)

HERMITICITY_TOL = 1e-12
NULL_TOL = 1e-12
DIMENSION_CAP = 4096


def require_hermitian(a, tol: float = HERMITICITY_TOL, name: str = "operator") -> np.ndarray:
    """Validate that ``a`` is a square Hermitian matrix and return it as complex.

    Hermiticity is checked relative to the largest entry magnitude:
    ``max|A - A^dag| <= tol * max|A|``.
    """
    arr = np.asarray(a, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
        raise DimensionMismatchError(f"{name} must be a square matrix, got shape {arr.shape}")
    scale = float(np.abs(arr).max())
    dev = float(np.abs(arr - arr.conj().T).max())
    if dev > tol * scale:
        raise NonHermitianError(f"{name} deviates from Hermiticity by {dev:.3e} (scale {scale:.3e})")
    return arr


def hermitian_part(a: np.ndarray) -> np.ndarray:
    """Return (A + A^dag) / 2."""
    return 0.5 * (a + a.conj().T)


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues in ascending order and the matching unitary of column eigenvectors."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


@dataclass(frozen=True)
class SupportProjector:
    """Projector onto the kernel of a positive semi-definite operator."""

    projector: np.ndarray
    rank: int
    null_tolerance: float


def spectral_decompose(h, tol: float = HERMITICITY_TOL) -> SpectralDecomposition:
    """Eigendecomposition of a Hermitian matrix with deterministic phases.

    Each eigenvector is rescaled so that its largest-magnitude component is
    real and positive, which makes downstream projective measurements
    reproducible across runs.
    """
    arr = require_hermitian(h, tol=tol)
    try:
        w, v = np.linalg.eigh(hermitian_part(arr))
    except np.linalg.LinAlgError as exc:
        raise NumericalFailureError(f"eigensolver failed: {exc}") from exc
    v = v.copy()
    for j in range(v.shape[1]):
        i = int(np.argmax(np.abs(v[:, j])))
        pivot = v[i, j]
        mag = abs(pivot)
        if mag > 0.0:
            v[:, j] *= pivot.conjugate() / mag
    return SpectralDecomposition(eigenvalues=w, eigenvectors=v)


def support_projector(rho, tol: float = NULL_TOL) -> SupportProjector:
    """Projector onto eigenspaces of ``rho`` with eigenvalue below ``tol * max``.

    Raises ``NegativeEigenvalueError`` when ``rho`` fails to be positive
    semi-definite within the same relative tolerance.
    """
    dec = spectral_decompose(rho)
    w, v = dec.eigenvalues, dec.eigenvectors
    wmax = max(float(w[-1]), 0.0)
    threshold = tol * wmax
    if float(w[0]) < -threshold:
        raise NegativeEigenvalueError(f"minimum eigenvalue {w[0]:.3e} below -{threshold:.3e}")
    null = w <= threshold
    vn = v[:, null]
    proj = vn @ vn.conj().T
    return SupportProjector(projector=hermitian_part(proj), rank=int(null.sum()), null_tolerance=threshold)


def _checked_pair(rho, x, tol):
    rho = require_hermitian(rho, name="rho")
    x = require_hermitian(x, name="X")
    if rho.shape != x.shape:
        raise DimensionMismatchError(f"rho has shape {rho.shape} but X has shape {x.shape}")
    dec = spectral_decompose(rho)
    w = dec.eigenvalues
    wmax = max(float(w[-1]), 0.0)
    if float(w[0]) < -tol * wmax:
        raise NegativeEigenvalueError(f"rho has eigenvalue {w[0]:.3e}")
    return rho, x, dec, wmax


def omega_apply(rho, x, tol: float = NULL_TOL) -> np.ndarray:
    """Symmetric division of ``x`` by ``rho``.

    In the eigenbasis of ``rho`` the (i, j) block of ``x`` is scaled by
    ``2 / (p_i + p_j)``; blocks with ``p_i + p_j`` below ``tol * max(p)`` are
    dropped, so the result is always finite on singular states.  Multiplying
    the output symmetrically by ``rho`` recovers ``x`` minus its component on
    the kernel-kernel block.
    """
    _, x, dec, wmax = _checked_pair(rho, x, tol)
    w, v = dec.eigenvalues, dec.eigenvectors
    m = v.conj().T @ x @ v
    denom = w[:, None] + w[None, :]
    keep = denom > tol * wmax
    weights = np.where(keep, 2.0 / np.where(keep, denom, 1.0), 0.0)
    out = v @ (weights * m) @ v.conj().T
    return hermitian_part(out)


def omega_apply_vectorized(rho, x, tol: float = NULL_TOL) -> np.ndarray:
    """Symmetric division computed through matrix vectorization.

    Applies the pseudo-inverse of ``(rho (x) I + I (x) rho^T) / 2`` to the
    row-major vectorization of ``x``.  Serves as an independent cross-check of
    the spectral backend; the two agree within 1e-9 on the support.
    """
    rho, x, _, _ = _checked_pair(rho, x, tol)
    d = rho.shape[0]
    eye = np.eye(d)
    big = 0.5 * (np.kron(rho, eye) + np.kron(eye, rho.T))
    big_pinv = np.linalg.pinv(big, rcond=tol, hermitian=True)
    out = (big_pinv @ x.reshape(-1)).reshape(d, d)
    return hermitian_part(out)


def tensor_power(rho, m: int, cap: int = DIMENSION_CAP) -> np.ndarray:
    """Kronecker power ``rho^{(x) m}`` with a hard output-dimension cap."""
    arr = np.asarray(rho, dtype=complex)
    if m < 1 or int(m) != m:
        raise ValueError(f"m must be a positive integer, got {m!r}")
    d = arr.shape[0]
    if d ** m > cap:
        raise DimensionCapError(f"dimension {d}^{m} = {d ** m} exceeds cap {cap}")
    return reduce(np.kron, [arr] * int(m))


def sym_pinv(m, rcond: float = 1e-12) -> np.ndarray:
    """Moore-Penrose pseudo-inverse of a symmetric (Hermitian) matrix.

    Built from the eigendecomposition; eigenvalues with magnitude at most
    ``rcond * max|eigenvalue|`` are treated as exactly zero.
    """
    arr = np.asarray(m)
    real_input = not np.iscomplexobj(arr)
    arr_c = require_hermitian(arr, tol=1e-10, name="matrix")
    w, v = np.linalg.eigh(hermitian_part(arr_c))
    wmax = float(np.abs(w).max()) if w.size else 0.0
    keep = np.abs(w) > rcond * wmax
    winv = np.where(keep, 1.0 / np.where(keep, w, 1.0), 0.0)
    out = hermitian_part((v * winv) @ v.conj().T)
    return out.real if real_input else out


def range_residual(m: np.ndarray, m_pinv: np.ndarray, vec: np.ndarray) -> float:
    """Relative residual of projecting ``vec`` onto the range of ``m``."""
    norm = float(np.linalg.norm(vec))
    if norm == 0.0:
        return 0.0
    return float(np.linalg.norm(m @ (m_pinv @ vec) - vec)) / norm
