"""
Kraus Representation of Indirect Measurements
=============================================

Extracts the Kraus family {V_{k,l}} of a scheme and evaluates everything
that only needs the system-side description:
- V_{k,(j,m)} = sqrt(q_m) <psi_j| Pi_k U |phi_m>
- the post-measurement state sum V rho V^dagger
- meter statistics from Kraus sums
- the purified run |Psi> on S (x) S-bar (x) Q with the ancilla meter
  M' = sum r_k |k,l><k,l|, and the checks that it reproduces the meter
  mean, the meter variance and the post-measurement state
"""

import logging
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np

from ..linalg_core import dagger, frobenius_norm, hermitize, partial_trace, tensor
from ..quantum_types import (
    COMPLETENESS_TOL,
    DensityOperator,
    KrausLabel,
    KrausOutcome,
    KrausSet,
)
from .scheme import ConsistencyError, MeasurementError, MeasurementScheme

logger = logging.getLogger(__name__)

# Kraus operators below this Frobenius norm are dropped from the family.
ZERO_OPERATOR_TOL = 1e-12
PURIFICATION_TOL = 1e-9


def kraus_from_scheme(scheme: MeasurementScheme) -> KrausSet:
    """
    Extract the Kraus family of a scheme, grouped by meter outcome.

    Operators are labelled (k, j, m): meter outcome, probe basis vector psi_j
    and eigenvector phi_m of rho_P. Completeness is checked on the full
    family before numerically zero operators are dropped.

    Raises:
        ConsistencyError: If sum V^dagger V deviates from I_S
    """
    d_s, d_p = scheme.dims
    q, phi = scheme.rho_p.spectral_decomposition()
    bra_probe = tensor(np.eye(d_s), dagger(scheme.probe_basis))
    ket_probe = tensor(np.eye(d_s), phi)
    weights = np.sqrt(q)

    raw = []
    total = np.zeros((d_s, d_s), dtype=np.complex128)
    for k, projector in enumerate(scheme.meter.projectors):
        blocks = (bra_probe @ projector @ scheme.unitary.matrix @ ket_probe).reshape(d_s, d_p, d_s, d_p)
        operators = []
        for j in range(d_p):
            for m in range(d_p):
                v = weights[m] * blocks[:, j, :, m]
                total += dagger(v) @ v
                operators.append(((k, j, m), v))
        raw.append((scheme.meter.eigenvalues[k], operators))

    residual = frobenius_norm(total - np.eye(d_s))
    if residual > COMPLETENESS_TOL:
        raise ConsistencyError("Kraus completeness", f"residual {residual:.3e}")

    outcomes = []
    dropped = 0
    for value, operators in raw:
        kept = [(label, v) for label, v in operators if frobenius_norm(v) >= ZERO_OPERATOR_TOL]
        dropped += len(operators) - len(kept)
        outcomes.append(KrausOutcome(
            eigenvalue=value,
            operators=tuple(np.array(v) for _, v in kept),
            labels=tuple(label for label, _ in kept),
        ))
    logger.debug(f"Extracted Kraus family: {len(raw)} outcomes, {dropped} zero operators dropped")
    return KrausSet(d_s, tuple(outcomes))


def _check_state_dim(kraus: KrausSet, rho_s: DensityOperator) -> None:
    if rho_s.dim != kraus.dim_s:
        raise MeasurementError(f"rho_S has dim {rho_s.dim}, Kraus set acts on dim {kraus.dim_s}")


def post_measurement_state(kraus: KrausSet, rho_s: DensityOperator) -> DensityOperator:
    """rho'_S = sum_{k,l} V_{k,l} rho_S V_{k,l}^dagger."""
    _check_state_dim(kraus, rho_s)
    result = np.zeros((kraus.dim_s, kraus.dim_s), dtype=np.complex128)
    for _, _, v in kraus:
        result += v @ rho_s.matrix @ dagger(v)
    return DensityOperator(hermitize(result))


def full_space_post_measurement(scheme: MeasurementScheme, rho_s: DensityOperator) -> DensityOperator:
    """tr_P[sum_k Pi_k U (rho_S (x) rho_P) U^dagger Pi_k], evaluated on S (x) P."""
    u = scheme.unitary.matrix
    evolved = u @ scheme.joint_state(rho_s) @ dagger(u)
    measured = sum(p @ evolved @ p for p in scheme.meter.projectors)
    return DensityOperator(hermitize(partial_trace(measured, scheme.dims, keep="S")))


def outcome_probabilities(kraus: KrausSet, rho_s: DensityOperator) -> np.ndarray:
    """p_k = sum_l tr[V_{k,l}^dagger V_{k,l} rho_S] for every outcome."""
    _check_state_dim(kraus, rho_s)
    probabilities = np.zeros(len(kraus.outcomes))
    for k, outcome in enumerate(kraus.outcomes):
        for v in outcome.operators:
            probabilities[k] += np.real(np.trace(dagger(v) @ v @ rho_s.matrix))
    return probabilities


def kraus_moments(kraus: KrausSet, rho_s: DensityOperator) -> Tuple[float, float]:
    """Meter mean and variance from Kraus sums."""
    probabilities = outcome_probabilities(kraus, rho_s)
    values = np.array([o.eigenvalue for o in kraus.outcomes])
    mean = float(np.dot(values, probabilities))
    second = float(np.dot(values ** 2, probabilities))
    return mean, max(second - mean * mean, 0.0)


def meter_statistics(scheme: MeasurementScheme, rho_s: DensityOperator,
                     kraus: Optional[KrausSet] = None) -> Tuple[float, float]:
    """
    Mean and variance of the meter readout on the post-measurement ensemble.

    Args:
        scheme: Measurement scheme
        rho_s: Initial state of S
        kraus: Precomputed Kraus set of the scheme (extracted if omitted)

    Returns:
        Tuple of (mean, variance)
    """
    scheme._check_system_dim(rho_s.dim, "rho_S")
    if kraus is None:
        kraus = kraus_from_scheme(scheme)
    return kraus_moments(kraus, rho_s)


@dataclass(frozen=True, eq=False)
class PurifiedRun:
    """
    Purified post-measurement state |Psi> on S (x) S-bar (x) Q.

    psi is stored flat with index order (s, mu, q); Q has one basis vector
    |k,l> per Kraus operator, block_index maps each label to its position and
    meter_prime_eigenvalues[q] is the eigenvalue of M' on that vector.
    """
    psi: np.ndarray
    dims: Tuple[int, int, int]
    meter_prime_eigenvalues: Tuple[float, ...]
    block_index: Dict[KrausLabel, int]

    def _amplitudes(self) -> np.ndarray:
        return self.psi.reshape(self.dims)

    def norm(self) -> float:
        return float(np.linalg.norm(self.psi))

    def ancilla_weights(self) -> np.ndarray:
        """<Psi| I (x) |k,l><k,l| |Psi> for every Q basis vector."""
        return np.sum(np.abs(self._amplitudes()) ** 2, axis=(0, 1))

    def meter_prime_moments(self) -> Tuple[float, float]:
        weights = self.ancilla_weights()
        values = np.array(self.meter_prime_eigenvalues)
        mean = float(np.dot(values, weights))
        second = float(np.dot(values ** 2, weights))
        return mean, max(second - mean * mean, 0.0)

    def reduced_state(self) -> np.ndarray:
        """tr_{S-bar, Q} |Psi><Psi|."""
        amplitudes = self._amplitudes()
        return np.einsum("smq,tmq->st", amplitudes, amplitudes.conj())


@dataclass(frozen=True)
class PurificationReport:
    norm_residual: float
    mean_residual: float
    variance_residual: float
    state_residual: float
    tolerance: float = PURIFICATION_TOL

    @property
    def passed(self) -> bool:
        return all(r <= self.tolerance for r in (
            self.norm_residual, self.mean_residual, self.variance_residual, self.state_residual
        ))

    def to_dict(self) -> Dict:
        return {
            "norm_residual": self.norm_residual,
            "mean_residual": self.mean_residual,
            "variance_residual": self.variance_residual,
            "state_residual": self.state_residual,
            "passed": self.passed,
        }


def purify(kraus: KrausSet, rho_s: DensityOperator) -> PurifiedRun:
    """|Psi> = sum_{k,l,mu} sqrt(lambda_mu) (V_{k,l}|mu>) (x) |mu-bar> (x) |k,l>."""
    _check_state_dim(kraus, rho_s)
    lambdas, vectors = rho_s.spectral_decomposition()
    weighted = vectors * np.sqrt(lambdas)

    columns = []
    eigenvalues = []
    block_index: Dict[KrausLabel, int] = {}
    for value, label, v in kraus:
        block_index[label] = len(columns)
        columns.append(v @ weighted)
        eigenvalues.append(value)

    amplitudes = np.stack(columns, axis=-1)
    return PurifiedRun(
        psi=amplitudes.reshape(-1),
        dims=amplitudes.shape,
        meter_prime_eigenvalues=tuple(eigenvalues),
        block_index=block_index,
    )


def purify_and_verify(kraus: KrausSet, rho_s: DensityOperator,
                      tol: float = PURIFICATION_TOL) -> Tuple[PurifiedRun, PurificationReport]:
    """
    Build the purified run and check that the ancilla meter M' reproduces the
    meter mean and variance and that tracing out S-bar and Q returns the
    post-measurement state.

    Raises:
        ConsistencyError: Naming the first identity that fails
    """
    run = purify(kraus, rho_s)
    mean, var = kraus_moments(kraus, rho_s)
    prime_mean, prime_var = run.meter_prime_moments()
    report = PurificationReport(
        norm_residual=abs(run.norm() - 1.0),
        mean_residual=abs(prime_mean - mean),
        variance_residual=abs(prime_var - var),
        state_residual=frobenius_norm(run.reduced_state() - post_measurement_state(kraus, rho_s).matrix),
        tolerance=tol,
    )
    checks = (
        ("purification norm", report.norm_residual),
        ("purified meter mean", report.mean_residual),
        ("purified meter variance", report.variance_residual),
        ("purified reduced state", report.state_residual),
    )
    for equation, residual in checks:
        if residual > tol:
            raise ConsistencyError(equation, f"residual {residual:.3e} exceeds {tol:.1e}")
    return run, report
