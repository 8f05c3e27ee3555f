"""
Experiment Runners
==================

Drives the three sweeps:
- run_random_sweep: random schemes with d_S, d_P drawn from dim_range and
  the observable fixed by unbiasedness
- run_qubit_tradeoff: Haar-random U on a qubit pair, probe state and probe
  meter found by Nelder-Mead so that the scheme measures sigma_z/2 + I
- run_ndr_sweep: the same qubit schemes evaluated against the
  noise-disturbance relation and the noise floor

Every trial draws from its own random stream, so record sequences depend
only on (master_seed, config), never on the worker count.
"""

import logging
import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from functools import partial
from typing import Any, Callable, Dict, Iterable, Iterator, List, Optional, TypeVar

import numpy as np

from ..linalg_core import LinalgError
from ..measurement.kraus import kraus_from_scheme, purify_and_verify
from ..measurement.scheme import (
    ConsistencyError,
    MeasurementError,
    MeasurementScheme,
    derive_unbiased_observable,
    unbiasedness_residual,
)
from ..measurement.tradeoff import (
    UNBOUNDED,
    DegenerateObservableError,
    TradeoffError,
    TurReport,
    ndr_record,
    tur_bound,
)
from ..quantum_types import PAULI, DensityOperator, KrausLabel, Observable, QuantumTypeError, UnitaryOperator
from .config import ExperimentConfig
from .generators import haar_unitary, random_density, random_meter, trial_rng, trial_seed
from .optimizer import OptimizerError, nelder_mead

logger = logging.getLogger(__name__)

STATUS_OK = "ok"
STATUS_DEGENERATE = "degenerate"
STATUS_UNBOUNDED = "unbounded"
STATUS_FAILED = "failed"

DECOMPOSITION_TOL = 1e-9
POLISH_STEP = 1e-3

QUBIT_STATE = DensityOperator(0.5 * (PAULI["identity"] + PAULI["sigma_y"]))
QUBIT_OBSERVABLE = Observable(0.5 * PAULI["sigma_z"] + PAULI["identity"])

_TRIAL_ERRORS = (LinalgError, QuantumTypeError, MeasurementError, TradeoffError, OptimizerError, ValueError)

T = TypeVar("T")


class SchemeSearchError(Exception):
    """Raised when no probe state and meter reach the unbiasedness tolerance for a unitary."""

    def __init__(self, message: str, best_residual: float):
        self.best_residual = best_residual
        super().__init__(message)


@dataclass
class TrialRecord:
    """One trial of a sweep. Numeric fields stay None when the trial did not get that far."""
    trial_index: int
    seed: int
    d_s: int
    d_p: int
    status: str
    residual: Optional[float] = None
    xi: Optional[float] = None
    selected_l: Optional[KrausLabel] = None
    cv2: Optional[float] = None
    noise_ratio: Optional[float] = None
    lhs: Optional[float] = None
    rhs: Optional[float] = None
    satisfied: Optional[bool] = None
    noise_floor: Optional[float] = None
    floor_respected: Optional[bool] = None
    decomposition_residual: Optional[float] = None
    message: str = ""
    scheme: Optional[MeasurementScheme] = field(default=None, repr=False, compare=False)
    rho_s: Optional[DensityOperator] = field(default=None, repr=False, compare=False)

    @property
    def accepted(self) -> bool:
        return self.status in (STATUS_OK, STATUS_UNBOUNDED)

    @property
    def violated(self) -> bool:
        return self.status == STATUS_OK and (self.satisfied is False or self.floor_respected is False)

    @property
    def one_plus_noise_ratio(self) -> Optional[float]:
        return None if self.noise_ratio is None else 1.0 + self.noise_ratio

    def apply_report(self, report: TurReport) -> None:
        self.status = STATUS_UNBOUNDED if report.unbounded else STATUS_OK
        self.residual = report.residual
        self.xi = report.xi
        self.selected_l = report.selected_l
        self.cv2 = report.cv_squared
        self.noise_ratio = report.noise_ratio
        self.lhs = report.lhs
        self.rhs = report.rhs
        self.satisfied = report.satisfied
        self.noise_floor = report.noise_floor
        self.floor_respected = report.floor_respected
        self.decomposition_residual = report.decomposition_residual

    def to_dict(self) -> Dict[str, Any]:
        unbounded = self.status == STATUS_UNBOUNDED
        return {
            "trial": self.trial_index,
            "d_S": self.d_s,
            "d_P": self.d_p,
            "seed": self.seed,
            "cv2": self.cv2,
            "xi": UNBOUNDED if unbounded else self.xi,
            "selected_l": None if self.selected_l is None else "-".join(str(i) for i in self.selected_l),
            "noise_ratio": self.noise_ratio,
            "one_plus_noise_ratio": self.one_plus_noise_ratio,
            "lhs": UNBOUNDED if unbounded else self.lhs,
            "rhs": self.rhs,
            "residual": self.residual,
            "decomposition_residual": self.decomposition_residual,
            "status": self.status,
            "satisfied": self.satisfied,
            "noise_floor": self.noise_floor,
            "floor_respected": self.floor_respected,
            "message": self.message,
        }


@dataclass
class NdrTrialRecord:
    """Noise on A, disturbance on B and the noise floor of one qubit scheme."""
    trial_index: int
    seed: int
    status: str
    residual: Optional[float] = None
    xi: Optional[float] = None
    cv2: Optional[float] = None
    noise_a: Optional[float] = None
    disturbance_b: Optional[float] = None
    noise_ratio: Optional[float] = None
    disturbance_ratio: Optional[float] = None
    commutator_mean_abs: Optional[float] = None
    noise_floor: Optional[float] = None
    ndr_slack: Optional[float] = None
    holds_additive: Optional[bool] = None
    holds_reciprocal: Optional[bool] = None
    floor_respected: Optional[bool] = None
    message: str = ""
    scheme: Optional[MeasurementScheme] = field(default=None, repr=False, compare=False)

    @property
    def accepted(self) -> bool:
        return self.status in (STATUS_OK, STATUS_UNBOUNDED)

    @property
    def violated(self) -> bool:
        return self.accepted and not (self.holds_additive and self.holds_reciprocal and self.floor_respected)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "trial": self.trial_index,
            "seed": self.seed,
            "residual": self.residual,
            "xi": UNBOUNDED if self.status == STATUS_UNBOUNDED else self.xi,
            "cv2": self.cv2,
            "noise_a": self.noise_a,
            "disturbance_b": self.disturbance_b,
            "noise_ratio": self.noise_ratio,
            "disturbance_ratio": self.disturbance_ratio,
            "commutator_mean_abs": self.commutator_mean_abs,
            "noise_floor": self.noise_floor,
            "ndr_slack": self.ndr_slack,
            "holds_additive": self.holds_additive,
            "holds_reciprocal": self.holds_reciprocal,
            "floor_respected": self.floor_respected,
            "status": self.status,
            "message": self.message,
        }


def run_indexed(task: Callable[[int], T], indices: Iterable[int], workers: int = 1) -> List[T]:
    """
    Run task(index) for every index and return the results in index order.

    Args:
        task: Function of the trial index
        indices: Trial indices to run
        workers: Thread-pool size (1 runs inline)
    """
    indices = list(indices)
    if workers <= 1 or len(indices) <= 1:
        return [task(i) for i in indices]

    results: Dict[int, T] = {}
    with ThreadPoolExecutor(max_workers=workers) as executor:
        future_to_index = {executor.submit(task, i): i for i in indices}
        for future in as_completed(future_to_index):
            index = future_to_index[future]
            results[index] = future.result()
            logger.debug(f"Trial {index} finished ({len(results)}/{len(indices)})")
    return [results[i] for i in sorted(results)]


def audited_report(scheme: MeasurementScheme, rho_s: DensityOperator, a: Observable,
                   config: ExperimentConfig) -> TurReport:
    """
    TurReport of a scheme after the Kraus completeness, purification and
    variance-decomposition checks have passed.

    Raises:
        ConsistencyError: If one of the checks fails
        DegenerateObservableError: If Delta A^2 is degenerate
    """
    kraus = kraus_from_scheme(scheme)
    purify_and_verify(kraus, rho_s)
    report = tur_bound(scheme, rho_s, a, config.unbias_tol, config.reg_tol, kraus)

    scale = 1.0 + report.variance_a + report.variance_noise
    allowed = (DECOMPOSITION_TOL + 10.0 * report.residual) * scale
    if abs(report.decomposition_residual) > allowed:
        raise ConsistencyError(
            "variance decomposition",
            f"residual {report.decomposition_residual:.3e} exceeds {allowed:.1e}",
        )
    if not report.forms_agree:
        raise ConsistencyError("bound forms", "observable and meter forms of the bound disagree")
    return report


def _random_trial(config: ExperimentConfig, index: int) -> TrialRecord:
    seed = trial_seed(config.master_seed, index)
    rng = np.random.default_rng(seed)
    dims = sorted(config.dim_range)
    d_s = int(rng.choice(dims))
    d_p = int(rng.choice(dims))
    record = TrialRecord(trial_index=index, seed=seed, d_s=d_s, d_p=d_p, status=STATUS_FAILED)

    try:
        rho_p = random_density(d_p, rng)
        u = haar_unitary(d_s * d_p, rng)
        ground_rank = min(config.ground_rank or d_s, d_s * d_p - 1)
        meter = random_meter(d_s * d_p, rng, ground_rank=ground_rank)
        scheme = MeasurementScheme(d_s=d_s, d_p=d_p, unitary=u, meter=meter, rho_p=rho_p)
        a = derive_unbiased_observable(scheme)
        rho_s = random_density(d_s, rng)
        record.scheme, record.rho_s = scheme, rho_s
        record.apply_report(audited_report(scheme, rho_s, a, config))
    except DegenerateObservableError as e:
        record.status = STATUS_DEGENERATE
        record.message = str(e)
    except _TRIAL_ERRORS as e:
        record.message = str(e)
        logger.warning(f"Trial {index} (d_S={d_s}, d_P={d_p}) failed: {e}")

    logger.debug(f"Trial {index}: d_S={d_s}, d_P={d_p}, status={record.status}")
    return record


def _log_summary(name: str, records: List[Any]) -> None:
    counts = Counter(r.status for r in records)
    violations = [r.trial_index for r in records if r.violated]
    summary = ", ".join(f"{status}={counts[status]}" for status in sorted(counts))
    logger.info(f"{name}: {len(records)} records ({summary}), {len(violations)} violations")
    if violations:
        logger.warning(f"{name}: bound or noise floor violated in trials {violations}")


def run_random_sweep(config: ExperimentConfig) -> List[TrialRecord]:
    """
    Random-scheme sweep.

    Args:
        config: Validated experiment configuration

    Returns:
        List[TrialRecord]: One record per trial, ordered by trial index
    """
    config.validate()
    logger.info(f"Random sweep: {config.trials} trials, dims {sorted(config.dim_range)}, "
                f"seed {config.master_seed}")
    records = run_indexed(partial(_random_trial, config), range(config.trials), config.workers)
    _log_summary("Random sweep", records)
    return records


def _qubit_probe(theta: np.ndarray):
    """Map 6 free parameters onto (rho_P, M_P)."""
    w = theta[:3]
    norm = np.linalg.norm(w)
    bloch = np.tanh(norm) * w / norm if norm > 0 else np.zeros(3)
    rho_p = 0.5 * (PAULI["identity"] + bloch[0] * PAULI["sigma_x"]
                   + bloch[1] * PAULI["sigma_y"] + bloch[2] * PAULI["sigma_z"])
    strength = np.logaddexp(0.0, theta[3])
    v = np.array([np.cos(theta[4]), np.exp(1j * theta[5]) * np.sin(theta[4])])
    return rho_p, strength * np.outer(v, v.conj())


def _qubit_objective(u: np.ndarray, target: np.ndarray) -> Callable[[np.ndarray], float]:
    u_dag = u.conj().T
    identity = PAULI["identity"]

    def squared_residual(theta: np.ndarray) -> float:
        rho_p, m_p = _qubit_probe(theta)
        evolved = u_dag @ np.kron(identity, m_p) @ u
        weighted = (evolved @ np.kron(identity, rho_p)).reshape(2, 2, 2, 2)
        derived = np.einsum("ijkj->ik", weighted)
        return float(np.sum(np.abs(target - derived) ** 2))

    return squared_residual


def optimize_qubit_scheme(u: UnitaryOperator, rng: np.random.Generator,
                          config: ExperimentConfig) -> MeasurementScheme:
    """
    Search a probe state and a probe meter M = I_S (x) m|v><v| so that the
    scheme (U, M, rho_P) measures sigma_z/2 + I.

    Args:
        u: Interaction on two qubits
        rng: Random stream for the restart points
        config: Tolerances, restart and iteration limits

    Returns:
        MeasurementScheme: Scheme with unbiasedness residual <= config.unbias_tol

    Raises:
        SchemeSearchError: If no restart reaches the tolerance
    """
    if u.dim != 4:
        raise MeasurementError(f"qubit search needs a 4-dimensional U, got {u.dim}")
    objective = _qubit_objective(u.matrix, QUBIT_OBSERVABLE.matrix)
    best = math.inf

    for restart in range(config.max_restarts):
        theta, value = nelder_mead(objective, rng.normal(size=6),
                                   tol=config.optimizer_tol, max_iter=config.optimizer_max_iter)
        best = min(best, math.sqrt(value))
        if math.sqrt(value) > config.unbias_tol:
            continue

        theta, value = nelder_mead(objective, theta, tol=config.optimizer_tol,
                                   max_iter=config.optimizer_max_iter, step=POLISH_STEP)
        rho_p, m_p = _qubit_probe(theta)
        scheme = MeasurementScheme(
            d_s=2,
            d_p=2,
            unitary=u,
            meter=Observable(np.kron(PAULI["identity"], m_p)),
            rho_p=DensityOperator(rho_p),
        )
        residual = unbiasedness_residual(scheme, QUBIT_OBSERVABLE)
        if residual <= config.unbias_tol:
            logger.debug(f"Qubit scheme found after {restart + 1} restarts, residual {residual:.3e}")
            return scheme
        best = min(best, residual)

    raise SchemeSearchError(
        f"no scheme within {config.unbias_tol:.1e} after {config.max_restarts} restarts "
        f"(best residual {best:.3e})",
        best_residual=best,
    )


@dataclass
class QubitAttempt:
    """One Haar draw of the qubit search."""
    trial_index: int
    seed: int
    scheme: Optional[MeasurementScheme]
    residual: Optional[float]
    message: str = ""


def _qubit_attempt(config: ExperimentConfig, index: int) -> QubitAttempt:
    seed = trial_seed(config.master_seed, index)
    rng = trial_rng(config.master_seed, index)
    try:
        scheme = optimize_qubit_scheme(haar_unitary(4, rng), rng, config)
    except SchemeSearchError as e:
        logger.warning(f"Attempt {index}: {e}")
        return QubitAttempt(index, seed, None, e.best_residual, str(e))
    except _TRIAL_ERRORS as e:
        logger.warning(f"Attempt {index} failed: {e}")
        return QubitAttempt(index, seed, None, None, str(e))
    return QubitAttempt(index, seed, scheme, unbiasedness_residual(scheme, QUBIT_OBSERVABLE))


def iter_qubit_attempts(config: ExperimentConfig) -> Iterator[QubitAttempt]:
    """Qubit search attempts in index order, computed in batches of config.workers."""
    cap = config.attempt_cap
    start = 0
    while start < cap:
        batch = range(start, min(start + config.workers, cap))
        yield from run_indexed(partial(_qubit_attempt, config), batch, config.workers)
        start = batch.stop


def _qubit_record(config: ExperimentConfig, attempt: QubitAttempt) -> TrialRecord:
    record = TrialRecord(trial_index=attempt.trial_index, seed=attempt.seed, d_s=2, d_p=2,
                         status=STATUS_FAILED, residual=attempt.residual, message=attempt.message)
    if attempt.scheme is None:
        return record
    record.scheme, record.rho_s = attempt.scheme, QUBIT_STATE
    try:
        record.apply_report(audited_report(attempt.scheme, QUBIT_STATE, QUBIT_OBSERVABLE, config))
    except _TRIAL_ERRORS as e:
        record.status = STATUS_FAILED
        record.message = str(e)
        logger.warning(f"Attempt {attempt.trial_index} rejected: {e}")
    return record


def run_qubit_tradeoff(config: ExperimentConfig) -> List[TrialRecord]:
    """
    Qubit trade-off sweep: draw Haar U until config.trials schemes have been
    accepted or config.attempt_cap draws are spent.

    Returns:
        List[TrialRecord]: Every attempt, accepted ones and failed searches
    """
    config.validate()
    logger.info(f"Qubit trade-off: {config.trials} schemes, seed {config.master_seed}")
    records: List[TrialRecord] = []
    accepted = 0
    for attempt in iter_qubit_attempts(config):
        record = _qubit_record(config, attempt)
        records.append(record)
        accepted += record.accepted
        if accepted >= config.trials:
            break

    if accepted < config.trials:
        logger.warning(f"Only {accepted}/{config.trials} schemes found in {config.attempt_cap} attempts")
    _log_summary("Qubit trade-off", records)
    return records


def _ndr_record(config: ExperimentConfig, b: Observable, attempt: QubitAttempt) -> NdrTrialRecord:
    record = NdrTrialRecord(trial_index=attempt.trial_index, seed=attempt.seed, status=STATUS_FAILED,
                            residual=attempt.residual, message=attempt.message)
    if attempt.scheme is None:
        return record
    record.scheme = attempt.scheme
    try:
        report = audited_report(attempt.scheme, QUBIT_STATE, QUBIT_OBSERVABLE, config)
        ndr = ndr_record(attempt.scheme, QUBIT_OBSERVABLE, b, QUBIT_STATE, report.xi, report.cv_squared)
    except _TRIAL_ERRORS as e:
        record.message = str(e)
        logger.warning(f"Attempt {attempt.trial_index} rejected: {e}")
        return record

    record.status = STATUS_UNBOUNDED if report.unbounded else STATUS_OK
    record.residual = report.residual
    record.xi = report.xi
    record.cv2 = report.cv_squared
    record.noise_a = ndr.noise_a
    record.disturbance_b = ndr.disturbance_b
    record.noise_ratio = ndr.noise_ratio
    record.disturbance_ratio = ndr.disturbance_ratio
    record.commutator_mean_abs = ndr.commutator_mean_abs
    record.noise_floor = ndr.floor
    record.ndr_slack = ndr.check.slack
    record.holds_additive = ndr.check.holds_additive
    record.holds_reciprocal = ndr.check.holds_reciprocal
    record.floor_respected = ndr.floor_respected
    return record


def run_ndr_sweep(config: ExperimentConfig) -> List[NdrTrialRecord]:
    """
    Noise-disturbance sweep over the qubit schemes of the trade-off search,
    with B = config.observable_b.
    """
    config.validate()
    b = Observable(PAULI[config.observable_b])
    logger.info(f"NDR sweep: {config.trials} schemes, B={config.observable_b}, seed {config.master_seed}")
    records: List[NdrTrialRecord] = []
    accepted = 0
    for attempt in iter_qubit_attempts(config):
        record = _ndr_record(config, b, attempt)
        records.append(record)
        accepted += record.accepted
        if accepted >= config.trials:
            break

    if accepted < config.trials:
        logger.warning(f"Only {accepted}/{config.trials} schemes found in {config.attempt_cap} attempts")
    _log_summary("NDR sweep", records)
    return records

