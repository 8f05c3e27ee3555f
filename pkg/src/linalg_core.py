"""
Dense Complex Linear Algebra Core
=================================

Small-dimension dense linear algebra shared by every other module:
- Kronecker (tensor) products and bipartite partial traces
- Hermitian eigendecomposition with validation
- Regularity-checked inverses of positive semidefinite operators
- Matrix JSON encoding {"dim": n, "re": [[...]], "im": [[...]]}

Matrices are plain read-only ``numpy`` arrays of dtype complex128.
"""

import logging
from typing import Dict, Tuple

import numpy as np

logger = logging.getLogger(__name__)

# Relative tolerance for Hermiticity validation.
HERMITIAN_TOL = 1e-10
# Default floor on the minimum eigenvalue accepted by psd_inverse.
DEFAULT_REG_TOL = 1e-8

SUBSYSTEMS = ("S", "P")


class LinalgError(Exception):
    """Custom exception for linear algebra errors."""
    pass


class SingularMatrixError(LinalgError):
    """Raised when an operator is not regular enough to be inverted."""
    pass


def as_complex_matrix(x, name: str = "matrix") -> np.ndarray:
    """
    Coerce input into a validated, read-only square complex matrix.

    Args:
        x: Array-like input
        name: Label used in error messages

    Returns:
        np.ndarray: Read-only complex128 array of shape (dim, dim)

    Raises:
        LinalgError: If the input is not square, empty or has non-finite entries
    """
    arr = np.array(x, dtype=np.complex128)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise LinalgError(f"{name} must be square, got shape {arr.shape}")
    if arr.shape[0] < 1:
        raise LinalgError(f"{name} must have dim >= 1")
    if not np.all(np.isfinite(arr)):
        raise LinalgError(f"{name} has non-finite entries")
    arr.flags.writeable = False
    return arr


def dagger(x: np.ndarray) -> np.ndarray:
    """Conjugate transpose."""
    return np.conjugate(np.transpose(x))


def frobenius_norm(x: np.ndarray) -> float:
    return float(np.linalg.norm(x, "fro"))


def hermiticity_residual(h: np.ndarray) -> float:
    return frobenius_norm(h - dagger(h))


def is_hermitian(h: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    """Check ||h - h^dagger||_F <= tol * (1 + ||h||_F)."""
    return hermiticity_residual(h) <= tol * (1.0 + frobenius_norm(h))


def hermitize(h: np.ndarray) -> np.ndarray:
    """Symmetrize away roundoff: (h + h^dagger) / 2."""
    return 0.5 * (h + dagger(h))


def tensor(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """
    Kronecker product with row-major block ordering.

    entry(i*dim(b)+k, j*dim(b)+m) = a(i, j) * b(k, m)
    """
    return as_complex_matrix(np.kron(a, b), name="tensor product")


def partial_trace(x: np.ndarray, dims: Tuple[int, int], keep: str = "S") -> np.ndarray:
    """
    Trace out one factor of a bipartite operator on S (x) P.

    Args:
        x: Operator of dimension d_S * d_P
        dims: (d_S, d_P)
        keep: Subsystem tag to keep, "S" or "P"

    Returns:
        np.ndarray: Reduced operator on the kept subsystem

    Raises:
        LinalgError: On a dimension mismatch or unknown subsystem tag
    """
    d_s, d_p = int(dims[0]), int(dims[1])
    if d_s < 1 or d_p < 1:
        raise LinalgError(f"Subsystem dimensions must be positive, got {dims}")
    x = np.asarray(x)
    if x.shape != (d_s * d_p, d_s * d_p):
        raise LinalgError(
            f"Dimension mismatch: operator shape {x.shape} vs dims {d_s}x{d_p}"
        )
    if keep not in SUBSYSTEMS:
        raise LinalgError(f"Unknown subsystem tag: {keep!r}")

    blocks = x.reshape(d_s, d_p, d_s, d_p)
    if keep == "S":
        reduced = np.einsum("ijkj->ik", blocks)
    else:
        reduced = np.einsum("ijik->jk", blocks)
    return as_complex_matrix(reduced, name="reduced operator")


def hermitian_eig(h: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Eigendecomposition of a Hermitian matrix.

    Args:
        h: Hermitian matrix

    Returns:
        Tuple of ascending real eigenvalues and a unitary matrix whose columns
        are the matching eigenvectors, so that h = V diag(lam) V^dagger.

    Raises:
        LinalgError: If h is not Hermitian within tolerance
    """
    h = np.asarray(h, dtype=np.complex128)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise LinalgError(f"Eigenproblem needs a square matrix, got {h.shape}")
    if not is_hermitian(h):
        raise LinalgError(
            f"Matrix is not Hermitian (residual {hermiticity_residual(h):.3e})"
        )
    eigenvalues, eigenvectors = np.linalg.eigh(hermitize(h))
    return eigenvalues, eigenvectors


def psd_inverse(h: np.ndarray, reg_tol: float = DEFAULT_REG_TOL) -> np.ndarray:
    """
    Invert a Hermitian positive semidefinite operator through its spectrum.

    Args:
        h: Hermitian PSD operator
        reg_tol: Smallest eigenvalue accepted as regular

    Returns:
        np.ndarray: V diag(1/lam) V^dagger

    Raises:
        SingularMatrixError: If the minimum eigenvalue is below reg_tol
    """
    eigenvalues, vectors = hermitian_eig(h)
    if eigenvalues[0] < reg_tol:
        raise SingularMatrixError(
            f"Operator is not regular: min eigenvalue {eigenvalues[0]:.3e} < {reg_tol:.1e}"
        )
    inverse = (vectors / eigenvalues) @ dagger(vectors)
    return as_complex_matrix(hermitize(inverse), name="inverse")


def matrix_to_json(x: np.ndarray) -> Dict:
    """Encode a square complex matrix as {"dim", "re", "im"}."""
    x = np.asarray(x, dtype=np.complex128)
    return {
        "dim": int(x.shape[0]),
        "re": x.real.tolist(),
        "im": x.imag.tolist(),
    }


def matrix_from_json(data: Dict, name: str = "matrix") -> np.ndarray:
    """
    Decode the {"dim", "re", "im"} matrix encoding.

    Raises:
        LinalgError: If fields are missing or shapes disagree with "dim"
    """
    if not isinstance(data, dict):
        raise LinalgError(f"{name}: expected an object with dim/re/im")
    for key in ("dim", "re", "im"):
        if key not in data:
            raise LinalgError(f"{name}: missing field '{key}'")
    dim = data["dim"]
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
        raise LinalgError(f"{name}: 'dim' must be a positive integer")
    try:
        real = np.array(data["re"], dtype=float)
        imag = np.array(data["im"], dtype=float)
    except (TypeError, ValueError) as e:
        raise LinalgError(f"{name}: entries must be numbers") from e
    if real.shape != (dim, dim) or imag.shape != (dim, dim):
        raise LinalgError(
            f"{name}: re/im must be {dim}x{dim}, got {real.shape} and {imag.shape}"
        )
    return as_complex_matrix(real + 1j * imag, name=name)

