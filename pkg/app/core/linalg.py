"""Dense complex matrix kernel for matrices up to 16x16.

Matrices are plain ``numpy`` ``complex128`` arrays. Every public function
checks its input shape and finiteness, and never mutates its arguments.
"""

from __future__ import annotations

import logging
from typing import Literal

import numpy as np
import numpy.typing as npt

from app.core.config import MAX_DIM, TOLERANCES
from app.core.exceptions import ContractError, MatrixSizeError

logger = logging.getLogger(__name__)

ComplexMatrix = npt.NDArray[np.complex128]
RealVector = npt.NDArray[np.float64]
EigenMethod = Literal["jacobi", "lapack"]


def as_matrix(a: npt.ArrayLike) -> ComplexMatrix:
    """Coerce to a finite square complex matrix of supported size."""
    matrix = np.asarray(a, dtype=np.complex128)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1] or matrix.shape[0] == 0:
        raise MatrixSizeError(f"expected a non-empty square matrix, got shape {matrix.shape}")
    if matrix.shape[0] > MAX_DIM:
        raise MatrixSizeError(f"dimension {matrix.shape[0]} exceeds {MAX_DIM}", dim=matrix.shape[0])
    if not np.all(np.isfinite(matrix)):
        raise ContractError("matrix has non-finite entries")
    return matrix


def identity(dim: int) -> ComplexMatrix:
    return np.eye(dim, dtype=np.complex128)


def adjoint(a: ComplexMatrix) -> ComplexMatrix:
    return np.asarray(a).conj().T


def max_abs(a: npt.ArrayLike) -> float:
    return float(np.max(np.abs(a))) if np.size(a) else 0.0


def hermiticity_residual(a: ComplexMatrix) -> float:
    return max_abs(a - adjoint(a))


def unitarity_residual(a: ComplexMatrix) -> float:
    """Max-entry residual of A^dagger A - I."""
    matrix = as_matrix(a)
    return max_abs(adjoint(matrix) @ matrix - identity(matrix.shape[0]))


def is_hermitian(a: ComplexMatrix, tol: float = TOLERANCES.hermitian) -> bool:
    return hermiticity_residual(as_matrix(a)) < tol


def is_unitary(a: ComplexMatrix, tol: float = TOLERANCES.unitary) -> bool:
    return unitarity_residual(a) < tol


def kron(a: npt.ArrayLike, b: npt.ArrayLike) -> ComplexMatrix:
    """Kronecker product, entry[(i*db+k),(j*db+l)] = a[i,j] * b[k,l]."""
    left = as_matrix(a)
    right = as_matrix(b)
    dim = left.shape[0] * right.shape[0]
    if dim > MAX_DIM:
        raise MatrixSizeError(f"kron dimension {dim} exceeds {MAX_DIM}", dim=dim)
    return np.kron(left, right)


def _off_diagonal_mass(a: ComplexMatrix) -> float:
    off = a - np.diag(np.diag(a))
    return float(np.sqrt(np.sum(np.abs(off) ** 2)))


def jacobi_eigh(
    a: ComplexMatrix,
    offdiag_tol: float = TOLERANCES.jacobi_offdiag,
    max_sweeps: int = TOLERANCES.jacobi_max_sweeps,
) -> tuple[RealVector, ComplexMatrix]:
    """Cyclic Jacobi eigensolver for Hermitian matrices.

    Each rotation first removes the phase of ``a[p, q]`` and then applies the
    real symmetric Jacobi rotation, so the accumulated transform stays unitary.
    Returns unsorted eigenvalues and the matching eigenvector columns.
    """
    work = np.array(a, dtype=np.complex128, copy=True)
    dim = work.shape[0]
    vectors = identity(dim)
    scale = max(1.0, float(np.sqrt(np.sum(np.abs(work) ** 2))))

    for sweep in range(max_sweeps):
        if _off_diagonal_mass(work) < offdiag_tol * scale:
            break
        for p in range(dim - 1):
            for q in range(p + 1, dim):
                apq = work[p, q]
                magnitude = abs(apq)
                if magnitude < 1e-300:
                    continue
                phase = apq / magnitude
                app = work[p, p].real
                aqq = work[q, q].real
                tau = (aqq - app) / (2.0 * magnitude)
                t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                rotation = np.array(
                    [[c, s], [-s * np.conj(phase), c * np.conj(phase)]],
                    dtype=np.complex128,
                )
                idx = [p, q]
                work[:, idx] = work[:, idx] @ rotation
                work[idx, :] = adjoint(rotation) @ work[idx, :]
                vectors[:, idx] = vectors[:, idx] @ rotation
                work[p, q] = 0.0
                work[q, p] = 0.0
                work[p, p] = work[p, p].real
                work[q, q] = work[q, q].real
    else:
        logger.warning("Jacobi eigensolver hit %d sweeps without converging", max_sweeps)

    return np.real(np.diag(work)).astype(np.float64), vectors


def hermitian_eig(
    a: npt.ArrayLike,
    tol: float = TOLERANCES.hermitian,
    method: EigenMethod = "jacobi",
) -> tuple[RealVector, ComplexMatrix]:
    """Eigenvalues ascending (ties keep their original order) with eigenvector columns."""
    matrix = as_matrix(a)
    residual = hermiticity_residual(matrix)
    if residual >= tol:
        raise ContractError(f"matrix is not Hermitian (residual {residual:.3e})", report=residual)
    symmetric = (matrix + adjoint(matrix)) / 2
    if method == "jacobi":
        values, vectors = jacobi_eigh(symmetric)
    else:
        values, vectors = np.linalg.eigh(symmetric)
    order = np.argsort(values, kind="stable")
    return values[order], vectors[:, order]


def hermitian_eigvals(
    a: npt.ArrayLike,
    tol: float = TOLERANCES.hermitian,
    method: EigenMethod = "jacobi",
) -> RealVector:
    if method == "jacobi":
        return hermitian_eig(a, tol, method)[0]
    matrix = as_matrix(a)
    residual = hermiticity_residual(matrix)
    if residual >= tol:
        raise ContractError(f"matrix is not Hermitian (residual {residual:.3e})", report=residual)
    return np.sort(np.linalg.eigvalsh((matrix + adjoint(matrix)) / 2), kind="stable")


def expm_i_hermitian(h: npt.ArrayLike, theta: float, method: EigenMethod = "jacobi") -> ComplexMatrix:
    """exp(-i * theta * h) through the eigendecomposition of h."""
    values, vectors = hermitian_eig(h, method=method)
    phases = np.exp(-1j * theta * values)
    return (vectors * phases) @ adjoint(vectors)


def trace_norm_hermitian(a: npt.ArrayLike, method: EigenMethod = "jacobi") -> float:
    """Sum of absolute eigenvalues."""
    return float(np.sum(np.abs(hermitian_eigvals(a, method=method))))
