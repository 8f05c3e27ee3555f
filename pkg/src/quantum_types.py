"""
Quantum Domain Types
====================

Validated, immutable quantum objects and the scalar statistics over them.

Components:
- DensityOperator: Hermitian, PSD, unit-trace state
- Observable: Hermitian operator with a cached spectral decomposition
  (one projector per distinct eigenvalue, eigenvalues closer than 1e-8 merged)
- UnitaryOperator: interaction unitary on S (x) P
- KrausSet: Kraus family {V_{k,l}} grouped by meter outcome r_k
- expectation / variance / shift_to_zero_ground
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Iterator, Optional, Sequence, Tuple, Union

import numpy as np

from .linalg_core import (
    HERMITIAN_TOL,
    LinalgError,
    as_complex_matrix,
    dagger,
    frobenius_norm,
    hermitian_eig,
    hermitize,
    is_hermitian,
    matrix_to_json,
)

logger = logging.getLogger(__name__)

STATE_TOL = 1e-10
SPECTRAL_TOL = 1e-9
UNITARY_TOL = 1e-10
COMPLETENESS_TOL = 1e-9
# Eigenvalues closer than this share one eigenspace.
EIGENVALUE_MERGE_TOL = 1e-8

PAULI: Dict[str, np.ndarray] = {
    "identity": as_complex_matrix([[1, 0], [0, 1]], name="identity"),
    "sigma_x": as_complex_matrix([[0, 1], [1, 0]], name="sigma_x"),
    "sigma_y": as_complex_matrix([[0, -1j], [1j, 0]], name="sigma_y"),
    "sigma_z": as_complex_matrix([[1, 0], [0, -1]], name="sigma_z"),
}


class QuantumTypeError(Exception):
    """Custom exception for invalid quantum objects and dimension mismatches."""
    pass


def _checked_matrix(x, name: str) -> np.ndarray:
    try:
        return as_complex_matrix(x, name=name)
    except LinalgError as e:
        raise QuantumTypeError(str(e)) from e


@dataclass(frozen=True, eq=False)
class DensityOperator:
    """Hermitian, positive semidefinite, unit-trace state."""
    matrix: np.ndarray

    def __post_init__(self):
        matrix = _checked_matrix(self.matrix, "density operator")
        if not is_hermitian(matrix, STATE_TOL):
            raise QuantumTypeError("density operator is not Hermitian")
        trace = np.trace(matrix)
        if abs(trace - 1.0) > STATE_TOL:
            raise QuantumTypeError(f"density operator trace is {trace.real:.12g}, expected 1")

        eigenvalues, vectors = hermitian_eig(matrix)
        if eigenvalues[0] < -STATE_TOL:
            raise QuantumTypeError(
                f"density operator has negative eigenvalue {eigenvalues[0]:.3e}"
            )
        if eigenvalues[0] < 0.0:
            # Roundoff from upstream products: clamp and renormalize
            clamped = np.clip(eigenvalues, 0.0, None)
            clamped = clamped / clamped.sum()
            matrix = as_complex_matrix(hermitize((vectors * clamped) @ dagger(vectors)))
        object.__setattr__(self, "matrix", matrix)

    @property
    def dim(self) -> int:
        return int(self.matrix.shape[0])

    @classmethod
    def pure(cls, vector: Sequence[complex]) -> "DensityOperator":
        """Projector onto a normalized copy of the given state vector."""
        psi = np.asarray(vector, dtype=np.complex128).reshape(-1)
        norm = np.linalg.norm(psi)
        if norm == 0.0:
            raise QuantumTypeError("cannot build a pure state from the zero vector")
        psi = psi / norm
        return cls(np.outer(psi, psi.conj()))

    @classmethod
    def maximally_mixed(cls, dim: int) -> "DensityOperator":
        return cls(np.eye(dim) / dim)

    def spectral_decomposition(self) -> Tuple[np.ndarray, np.ndarray]:
        """Return (probabilities, eigenvector columns), probabilities clipped at 0."""
        eigenvalues, vectors = hermitian_eig(self.matrix)
        return np.clip(eigenvalues, 0.0, None), vectors

    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))

    def to_json(self) -> Dict:
        data = matrix_to_json(self.matrix)
        data["kind"] = "density"
        return data


def _spectral_groups(matrix: np.ndarray) -> Tuple[Tuple[float, ...], Tuple[np.ndarray, ...]]:
    """Group an eigendecomposition into (distinct eigenvalue, projector) pairs."""
    eigenvalues, vectors = hermitian_eig(matrix)
    groups = [[0]]
    for i in range(1, len(eigenvalues)):
        if eigenvalues[i] - eigenvalues[i - 1] < EIGENVALUE_MERGE_TOL:
            groups[-1].append(i)
        else:
            groups.append([i])

    values = []
    projectors = []
    for members in groups:
        block = vectors[:, members]
        values.append(float(np.mean(eigenvalues[members])))
        projectors.append(as_complex_matrix(block @ dagger(block), name="projector"))
    return tuple(values), tuple(projectors)


@dataclass(frozen=True, eq=False)
class Observable:
    """
    Hermitian operator with its spectral decomposition A = sum_k r_k Pi_k.

    Eigenvalues are distinct and ascending; projectors[k] spans the
    eigenspace of eigenvalues[k].
    """
    matrix: np.ndarray
    eigenvalues: Tuple[float, ...] = field(default=())
    projectors: Tuple[np.ndarray, ...] = field(default=())

    def __post_init__(self):
        matrix = _checked_matrix(self.matrix, "observable")
        if not is_hermitian(matrix):
            raise QuantumTypeError("observable is not Hermitian")
        matrix = as_complex_matrix(hermitize(matrix), name="observable")

        if self.eigenvalues or self.projectors:
            eigenvalues = tuple(float(r) for r in self.eigenvalues)
            projectors = tuple(_checked_matrix(p, "projector") for p in self.projectors)
        else:
            eigenvalues, projectors = _spectral_groups(matrix)

        self._validate_spectrum(matrix, eigenvalues, projectors)
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "eigenvalues", eigenvalues)
        object.__setattr__(self, "projectors", projectors)

    @staticmethod
    def _validate_spectrum(matrix: np.ndarray, eigenvalues: Tuple[float, ...],
                           projectors: Tuple[np.ndarray, ...]) -> None:
        dim = matrix.shape[0]
        if len(eigenvalues) != len(projectors) or not eigenvalues:
            raise QuantumTypeError("eigenvalues and projectors must pair up")
        if any(b <= a for a, b in zip(eigenvalues, eigenvalues[1:])):
            raise QuantumTypeError("eigenvalues must be distinct and ascending")

        total = np.zeros((dim, dim), dtype=np.complex128)
        reconstruction = np.zeros((dim, dim), dtype=np.complex128)
        for i, (r, p) in enumerate(zip(eigenvalues, projectors)):
            if p.shape != matrix.shape:
                raise QuantumTypeError("projector dimension mismatch")
            if frobenius_norm(p @ p - p) > SPECTRAL_TOL:
                raise QuantumTypeError(f"projector {i} is not idempotent")
            for j in range(i + 1, len(projectors)):
                if frobenius_norm(p @ projectors[j]) > SPECTRAL_TOL:
                    raise QuantumTypeError(f"projectors {i} and {j} are not orthogonal")
            total += p
            reconstruction += r * p
        if frobenius_norm(total - np.eye(dim)) > SPECTRAL_TOL:
            raise QuantumTypeError("projectors do not resolve the identity")
        if frobenius_norm(reconstruction - matrix) > SPECTRAL_TOL * (1.0 + frobenius_norm(matrix)):
            raise QuantumTypeError("spectral decomposition does not reproduce the matrix")

    @property
    def dim(self) -> int:
        return int(self.matrix.shape[0])

    @property
    def min_eigenvalue(self) -> float:
        return self.eigenvalues[0]

    @property
    def zero_grounded(self) -> bool:
        return abs(self.eigenvalues[0]) <= STATE_TOL

    def to_json(self) -> Dict:
        data = matrix_to_json(self.matrix)
        data["kind"] = "observable"
        return data


@dataclass(frozen=True, eq=False)
class UnitaryOperator:
    matrix: np.ndarray

    def __post_init__(self):
        matrix = _checked_matrix(self.matrix, "unitary")
        residual = frobenius_norm(dagger(matrix) @ matrix - np.eye(matrix.shape[0]))
        if residual > UNITARY_TOL:
            raise QuantumTypeError(f"operator is not unitary (residual {residual:.3e})")
        object.__setattr__(self, "matrix", matrix)

    @property
    def dim(self) -> int:
        return int(self.matrix.shape[0])

    def to_json(self) -> Dict:
        data = matrix_to_json(self.matrix)
        data["kind"] = "unitary"
        return data


# (k, j, m): meter outcome index, probe basis index, rho_P eigenvector index
KrausLabel = Tuple[int, int, int]


@dataclass(frozen=True, eq=False)
class KrausOutcome:
    """All Kraus operators V_{k,l} sharing the meter outcome r_k."""
    eigenvalue: float
    operators: Tuple[np.ndarray, ...]
    labels: Tuple[KrausLabel, ...]


@dataclass(frozen=True, eq=False)
class KrausSet:
    """
    Doubly indexed Kraus family on S, grouped by meter outcome.

    Satisfies sum_{k,l} V_{k,l}^dagger V_{k,l} = I_S and lists outcomes with
    ascending eigenvalues starting at r_0 = 0 (unless built with
    require_zero_ground=False).
    """
    dim_s: int
    outcomes: Tuple[KrausOutcome, ...]
    require_zero_ground: bool = True

    def __post_init__(self):
        if self.dim_s < 1:
            raise QuantumTypeError("dim_S must be positive")
        if not self.outcomes:
            raise QuantumTypeError("Kraus set needs at least one outcome")
        values = [o.eigenvalue for o in self.outcomes]
        if any(b <= a for a, b in zip(values, values[1:])):
            raise QuantumTypeError("outcome eigenvalues must be ascending")
        if self.require_zero_ground and abs(values[0]) > STATE_TOL:
            raise QuantumTypeError(f"lowest outcome must be 0, got {values[0]:.3e}")

        total = np.zeros((self.dim_s, self.dim_s), dtype=np.complex128)
        for outcome in self.outcomes:
            if len(outcome.operators) != len(outcome.labels):
                raise QuantumTypeError("every Kraus operator needs a label")
            for v in outcome.operators:
                if v.shape != (self.dim_s, self.dim_s):
                    raise QuantumTypeError(
                        f"Kraus operator shape {v.shape} does not match dim_S={self.dim_s}"
                    )
                total += dagger(v) @ v
        residual = frobenius_norm(total - np.eye(self.dim_s))
        if residual > COMPLETENESS_TOL:
            raise QuantumTypeError(f"Kraus completeness violated (residual {residual:.3e})")

    @classmethod
    def from_operators(cls, groups: Sequence[Tuple[float, Sequence[np.ndarray]]],
                       require_zero_ground: bool = True) -> "KrausSet":
        """
        Build a set from (eigenvalue, operators) pairs, labelling each operator
        (k, 0, position).
        """
        outcomes = []
        dim_s: Optional[int] = None
        for k, (value, operators) in enumerate(groups):
            mats = tuple(_checked_matrix(v, "Kraus operator") for v in operators)
            if mats and dim_s is None:
                dim_s = mats[0].shape[0]
            labels = tuple((k, 0, i) for i in range(len(mats)))
            outcomes.append(KrausOutcome(float(value), mats, labels))
        if dim_s is None:
            raise QuantumTypeError("Kraus set has no operators")
        return cls(dim_s, tuple(outcomes), require_zero_ground)

    @property
    def has_zero_outcome(self) -> bool:
        return abs(self.outcomes[0].eigenvalue) <= STATE_TOL

    def __iter__(self) -> Iterator[Tuple[float, KrausLabel, np.ndarray]]:
        """Yield (r_k, label, V_{k,l}) over the whole family."""
        for outcome in self.outcomes:
            for label, v in zip(outcome.labels, outcome.operators):
                yield outcome.eigenvalue, label, v

    def __len__(self) -> int:
        return sum(len(o.operators) for o in self.outcomes)


OperatorLike = Union[Observable, np.ndarray]
StateLike = Union[DensityOperator, np.ndarray]


def _as_matrix(x: Union[OperatorLike, StateLike]) -> np.ndarray:
    return x.matrix if isinstance(x, (Observable, DensityOperator)) else np.asarray(x)


def expectation(obs: OperatorLike, state: StateLike) -> float:
    """
    Expectation value tr[obs . state].

    Raises:
        QuantumTypeError: On a dimension mismatch or a non-real result
    """
    o = _as_matrix(obs)
    rho = _as_matrix(state)
    if o.shape != rho.shape:
        raise QuantumTypeError(f"dimension mismatch: observable {o.shape} vs state {rho.shape}")
    value = np.trace(o @ rho)
    if abs(value.imag) > HERMITIAN_TOL * (1.0 + frobenius_norm(o)):
        raise QuantumTypeError(f"expectation has imaginary part {value.imag:.3e}")
    return float(value.real)


def variance(obs: OperatorLike, state: StateLike) -> float:
    """Variance tr[obs^2 state] - tr[obs state]^2, clamped at 0."""
    o = _as_matrix(obs)
    mean = expectation(o, state)
    second = expectation(o @ o, state)
    return max(second - mean * mean, 0.0)


def shift_to_zero_ground(obs: Observable) -> Observable:
    """Shift the spectrum so the lowest eigenvalue is exactly 0."""
    shift = obs.eigenvalues[0]
    if shift == 0.0:
        return obs
    return Observable(
        obs.matrix - shift * np.eye(obs.dim),
        eigenvalues=tuple(r - shift for r in obs.eigenvalues),
        projectors=obs.projectors,
    )
