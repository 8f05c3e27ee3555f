"""
Indirect Measurement Schemes
============================

A scheme is the triple (U, M, rho_P) acting on S (x) P. This module builds
schemes and evaluates the quantities defined directly on them:
- the observable A fixed by the unbiasedness condition
  A = tr_P[U^dagger M U (I_S (x) rho_P)]
- the unbiasedness residual of a candidate observable
- the noise operator N = U^dagger M U - A (x) I_P
- Heisenberg-picture meter moments and the variance decomposition
  Delta M^2 = Delta A^2 + Delta N^2
"""

import logging
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np

from ..linalg_core import (
    as_complex_matrix,
    dagger,
    frobenius_norm,
    hermitize,
    matrix_to_json,
    partial_trace,
    tensor,
)
from ..quantum_types import (
    DensityOperator,
    Observable,
    QuantumTypeError,
    UnitaryOperator,
    expectation,
    shift_to_zero_ground,
    variance,
)

logger = logging.getLogger(__name__)

BASIS_TOL = 1e-10
COMPUTATIONAL_BASIS = "computational"
CUSTOM_BASIS = "custom"


class MeasurementError(Exception):
    """Custom exception for invalid measurement schemes and inputs."""
    pass


class ConsistencyError(MeasurementError):
    """Raised when an identity that must hold by construction fails numerically."""

    def __init__(self, equation: str, message: str):
        self.equation = equation
        super().__init__(f"{equation}: {message}")


@dataclass(frozen=True, eq=False)
class MeasurementScheme:
    """
    One indirect measurement of S: interaction U on S (x) P, zero-grounded
    meter observable M on S (x) P, probe state rho_P and the orthonormal probe
    basis {|psi_j>} (columns of probe_basis) used to index Kraus operators.
    """
    d_s: int
    d_p: int
    unitary: UnitaryOperator
    meter: Observable
    rho_p: DensityOperator
    probe_basis: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.d_s < 1 or self.d_p < 1:
            raise MeasurementError(f"dimensions must be positive, got d_S={self.d_s}, d_P={self.d_p}")
        total = self.d_s * self.d_p
        if self.unitary.dim != total:
            raise MeasurementError(f"U has dim {self.unitary.dim}, expected d_S*d_P={total}")
        if self.meter.dim != total:
            raise MeasurementError(f"M has dim {self.meter.dim}, expected d_S*d_P={total}")
        if self.rho_p.dim != self.d_p:
            raise MeasurementError(f"rho_P has dim {self.rho_p.dim}, expected d_P={self.d_p}")
        if not self.meter.zero_grounded:
            raise MeasurementError(
                f"M must have minimum eigenvalue 0, got {self.meter.min_eigenvalue:.3e}"
            )
        object.__setattr__(self, "meter", shift_to_zero_ground(self.meter))

        if self.probe_basis is None:
            basis = as_complex_matrix(np.eye(self.d_p), name="probe basis")
            label = COMPUTATIONAL_BASIS
        else:
            basis = as_complex_matrix(self.probe_basis, name="probe basis")
            if basis.shape != (self.d_p, self.d_p):
                raise MeasurementError(f"probe basis must be {self.d_p}x{self.d_p}")
            if frobenius_norm(dagger(basis) @ basis - np.eye(self.d_p)) > BASIS_TOL:
                raise MeasurementError("probe basis columns are not orthonormal")
            label = COMPUTATIONAL_BASIS if np.array_equal(basis, np.eye(self.d_p)) else CUSTOM_BASIS
        object.__setattr__(self, "probe_basis", basis)
        object.__setattr__(self, "_basis_label", label)

    @property
    def dims(self) -> Tuple[int, int]:
        return self.d_s, self.d_p

    @property
    def basis_label(self) -> str:
        return self._basis_label

    def heisenberg_meter(self) -> np.ndarray:
        """U^dagger M U on S (x) P."""
        u = self.unitary.matrix
        return hermitize(dagger(u) @ self.meter.matrix @ u)

    def joint_state(self, rho_s: DensityOperator) -> np.ndarray:
        """rho_S (x) rho_P."""
        self._check_system_dim(rho_s.dim, "rho_S")
        return tensor(rho_s.matrix, self.rho_p.matrix)

    def _check_system_dim(self, dim: int, name: str) -> None:
        if dim != self.d_s:
            raise MeasurementError(f"{name} has dim {dim}, expected d_S={self.d_s}")

    def to_json(self, metadata: Optional[Dict] = None) -> Dict:
        data = {
            "d_S": self.d_s,
            "d_P": self.d_p,
            "U": matrix_to_json(self.unitary.matrix),
            "M": matrix_to_json(self.meter.matrix),
            "rho_P": matrix_to_json(self.rho_p.matrix),
            "probe_basis": matrix_to_json(self.probe_basis),
        }
        meta = {"probe_basis": self.basis_label}
        meta.update(metadata or {})
        data["metadata"] = meta
        return data


def derive_unbiased_observable(scheme: MeasurementScheme) -> Observable:
    """
    The unique A on S with tr[A rho] = tr[U^dagger M U (rho (x) rho_P)] for
    every rho: A = tr_P[U^dagger M U (I_S (x) rho_P)].
    """
    weighted = scheme.heisenberg_meter() @ tensor(np.eye(scheme.d_s), scheme.rho_p.matrix)
    a = partial_trace(weighted, scheme.dims, keep="S")
    return Observable(hermitize(a))


def unbiasedness_residual(scheme: MeasurementScheme, a: Observable) -> float:
    """Frobenius distance between a and the observable the scheme measures."""
    scheme._check_system_dim(a.dim, "observable")
    return frobenius_norm(a.matrix - derive_unbiased_observable(scheme).matrix)


def noise_operator(scheme: MeasurementScheme, a: Observable) -> np.ndarray:
    """N = U^dagger M U - A (x) I_P."""
    scheme._check_system_dim(a.dim, "observable")
    noise = scheme.heisenberg_meter() - tensor(a.matrix, np.eye(scheme.d_p))
    return as_complex_matrix(hermitize(noise), name="noise operator")


def heisenberg_moments(scheme: MeasurementScheme, rho_s: DensityOperator) -> Tuple[float, float]:
    """Mean and variance of U^dagger M U on rho_S (x) rho_P."""
    joint = scheme.joint_state(rho_s)
    evolved = scheme.heisenberg_meter()
    return expectation(evolved, joint), variance(evolved, joint)


@dataclass(frozen=True)
class VarianceDecomposition:
    """Delta M^2 against Delta A^2 + Delta N^2 on one initial state."""
    meter_variance: float
    observable_variance: float
    noise_variance: float

    @property
    def residual(self) -> float:
        return self.meter_variance - (self.observable_variance + self.noise_variance)

    def to_dict(self) -> Dict:
        return {
            "meter_variance": self.meter_variance,
            "observable_variance": self.observable_variance,
            "noise_variance": self.noise_variance,
            "residual": self.residual,
        }


def variance_decomposition(scheme: MeasurementScheme, a: Observable,
                           rho_s: DensityOperator) -> VarianceDecomposition:
    joint = scheme.joint_state(rho_s)
    try:
        observable_variance = variance(a, rho_s)
    except QuantumTypeError as e:
        raise MeasurementError(str(e)) from e
    return VarianceDecomposition(
        meter_variance=variance(scheme.heisenberg_meter(), joint),
        observable_variance=observable_variance,
        noise_variance=variance(noise_operator(scheme, a), joint),
    )
