"""
Survival Activity, TUR Bound and Noise-Disturbance Relations
============================================================

Evaluates the trade-off relations of an indirect measurement:
- survival activity Xi = min_l { tr[(V_{0,l}^dagger V_{0,l})^-1 rho] - 1 }
- the bound Xi (1 + Delta N^2 / Delta A^2) >= <A>^2 / Delta A^2 and its
  meter form Delta_p M^2 / <M>_p^2 >= 1 / Xi
- the disturbance operator D_B = U^dagger (B (x) I_P) U - B (x) I_P
- the noise-disturbance relation in additive and reciprocal form
- the noise floor sqrt(CV^2 / Xi - 1) implied by a finite survival activity

An unbounded survival activity (no regular V_{0,l}) is represented by
``None`` rather than a large float.
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, List, NamedTuple, Optional, Tuple

import numpy as np

from ..linalg_core import (
    DEFAULT_REG_TOL,
    SingularMatrixError,
    as_complex_matrix,
    dagger,
    hermitize,
    psd_inverse,
    tensor,
)
from ..quantum_types import (
    DensityOperator,
    KrausLabel,
    KrausSet,
    Observable,
    UnitaryOperator,
    expectation,
    variance,
)
from .kraus import kraus_from_scheme, kraus_moments
from .scheme import (
    ConsistencyError,
    MeasurementScheme,
    derive_unbiased_observable,
    noise_operator,
    unbiasedness_residual,
    variance_decomposition,
)

logger = logging.getLogger(__name__)

DEFAULT_UNBIAS_TOL = 1e-5
DEGENERATE_VARIANCE_TOL = 1e-10
BOUND_REL_SLACK = 1e-7
BOUND_ABS_SLACK = 1e-9
FORM_AGREEMENT_TOL = 1e-9
NDR_TOL = 1e-9
UNBOUNDED = "unbounded"


class TradeoffError(Exception):
    """Custom exception for trade-off evaluation errors."""
    pass


class DegenerateObservableError(TradeoffError):
    """Raised when Delta A^2 is too small for the coefficient of variation."""
    pass


class UnbiasednessError(TradeoffError):
    """Raised when a scheme does not measure the given observable."""
    pass


class MissingZeroOutcomeError(TradeoffError):
    """Raised when a Kraus set has no outcome with eigenvalue 0."""
    pass


def bound_satisfied(lhs: float, rhs: float) -> bool:
    return lhs >= rhs * (1.0 - BOUND_REL_SLACK) - BOUND_ABS_SLACK


def survival_activity_candidates(kraus: KrausSet, rho_s: DensityOperator,
                                 reg_tol: float = DEFAULT_REG_TOL) -> List[Tuple[KrausLabel, float]]:
    """
    Xi_l for every regular operator of the zero-outcome block.

    Raises:
        MissingZeroOutcomeError: If the lowest outcome is not 0
        ConsistencyError: If some Xi_l is negative beyond roundoff
    """
    if not kraus.has_zero_outcome:
        raise MissingZeroOutcomeError(
            f"lowest outcome is {kraus.outcomes[0].eigenvalue:.3e}; shift the meter to a zero ground"
        )
    if rho_s.dim != kraus.dim_s:
        raise TradeoffError(f"rho_S has dim {rho_s.dim}, Kraus set acts on dim {kraus.dim_s}")

    zero_block = kraus.outcomes[0]
    candidates = []
    for label, v in zip(zero_block.labels, zero_block.operators):
        try:
            inverse = psd_inverse(hermitize(dagger(v) @ v), reg_tol)
        except SingularMatrixError:
            continue
        xi = float(np.real(np.trace(inverse @ rho_s.matrix))) - 1.0
        if xi < -FORM_AGREEMENT_TOL * (1.0 + abs(xi)):
            raise ConsistencyError("survival activity non-negativity", f"Xi_{label} = {xi:.3e}")
        candidates.append((label, max(xi, 0.0)))
    return candidates


def survival_activity(kraus: KrausSet, rho_s: DensityOperator,
                      reg_tol: float = DEFAULT_REG_TOL) -> Tuple[Optional[float], Optional[KrausLabel]]:
    """
    Minimal survival activity over the zero-outcome Kraus operators.

    Returns:
        Tuple of (Xi, label of the minimizing V_{0,l}); both None when no
        V_{0,l}^dagger V_{0,l} is regular (unbounded activity)
    """
    candidates = survival_activity_candidates(kraus, rho_s, reg_tol)
    if not candidates:
        return None, None
    label, xi = min(candidates, key=lambda c: c[1])
    return xi, label


@dataclass(frozen=True)
class TurReport:
    """Both sides of the indirect-measurement trade-off for one scheme and state."""
    xi: Optional[float]
    selected_l: Optional[KrausLabel]
    cv_squared: float
    noise_ratio: float
    lhs: float
    rhs: float
    satisfied: bool
    mean_a: float
    variance_a: float
    variance_noise: float
    meter_mean: float
    meter_variance: float
    residual: float
    decomposition_residual: float
    forms_agree: bool

    @property
    def unbounded(self) -> bool:
        return self.xi is None

    @property
    def one_plus_noise_ratio(self) -> float:
        return 1.0 + self.noise_ratio

    @property
    def noise_floor(self) -> float:
        """Smallest Delta N / Delta A compatible with Xi; 0 when Xi is unbounded."""
        if self.xi is None:
            return 0.0
        if self.xi <= 0.0:
            return 0.0 if bound_satisfied(0.0, self.cv_squared) else math.inf
        return noise_floor(self.xi, self.cv_squared)

    @property
    def floor_respected(self) -> bool:
        # noise_ratio is Delta N^2 / Delta A^2, so compare squares with the bound's slack
        floor_sq = self.noise_floor ** 2
        if math.isinf(floor_sq):
            return False
        if floor_sq == 0.0:
            return True
        return self.noise_ratio >= floor_sq - BOUND_REL_SLACK * (1.0 + floor_sq) - BOUND_ABS_SLACK / self.xi

    @property
    def meter_ratio(self) -> float:
        """Delta_p M^2 / <M>_p^2."""
        if self.meter_mean == 0.0:
            return math.inf
        return self.meter_variance / self.meter_mean ** 2

    def to_dict(self) -> Dict:
        return {
            "xi": UNBOUNDED if self.xi is None else self.xi,
            "selected_l": None if self.selected_l is None else list(self.selected_l),
            "cv2": self.cv_squared,
            "noise_ratio": self.noise_ratio,
            "lhs": UNBOUNDED if self.xi is None else self.lhs,
            "rhs": self.rhs,
            "satisfied": self.satisfied,
        }


def tur_bound(scheme: MeasurementScheme, rho_s: DensityOperator,
              a: Optional[Observable] = None,
              unbias_tol: float = DEFAULT_UNBIAS_TOL,
              reg_tol: float = DEFAULT_REG_TOL,
              kraus: Optional[KrausSet] = None) -> TurReport:
    """
    Assemble Xi, Delta N^2, Delta A^2 and <A> into both sides of the bound.

    Args:
        scheme: Measurement scheme
        rho_s: Initial state of S
        a: Target observable; defaults to the one derived from the scheme
        unbias_tol: Largest accepted unbiasedness residual
        reg_tol: Regularity threshold for V_{0,l}^dagger V_{0,l}
        kraus: Precomputed Kraus set of the scheme

    Raises:
        UnbiasednessError: If the scheme does not measure a within unbias_tol
        DegenerateObservableError: If Delta A^2 < 1e-10
    """
    if a is None:
        a = derive_unbiased_observable(scheme)
    residual = unbiasedness_residual(scheme, a)
    if residual > unbias_tol:
        raise UnbiasednessError(f"unbiasedness residual {residual:.3e} exceeds {unbias_tol:.1e}")

    decomposition = variance_decomposition(scheme, a, rho_s)
    variance_a = decomposition.observable_variance
    if variance_a < DEGENERATE_VARIANCE_TOL:
        raise DegenerateObservableError(f"Delta A^2 = {variance_a:.3e} is degenerate")
    mean_a = expectation(a, rho_s)

    if kraus is None:
        kraus = kraus_from_scheme(scheme)
    xi, label = survival_activity(kraus, rho_s, reg_tol)
    meter_mean, meter_variance = kraus_moments(kraus, rho_s)

    cv_squared = mean_a ** 2 / variance_a
    noise_ratio = decomposition.noise_variance / variance_a
    if xi is None:
        lhs = math.inf
        satisfied = True
        forms_agree = True
    else:
        lhs = xi * (1.0 + noise_ratio)
        satisfied = bound_satisfied(lhs, cv_squared)
        # (lhs - rhs) Delta A^2 equals Xi Delta_p M^2 - <M>_p^2 under exact unbiasedness
        bound_gap = (lhs - cv_squared) * variance_a
        meter_gap = xi * meter_variance - meter_mean ** 2
        scale = 1.0 + xi * meter_variance + meter_mean ** 2
        forms_agree = residual > FORM_AGREEMENT_TOL or abs(bound_gap - meter_gap) <= FORM_AGREEMENT_TOL * scale

    return TurReport(
        xi=xi,
        selected_l=label,
        cv_squared=cv_squared,
        noise_ratio=noise_ratio,
        lhs=lhs,
        rhs=cv_squared,
        satisfied=satisfied,
        mean_a=mean_a,
        variance_a=variance_a,
        variance_noise=decomposition.noise_variance,
        meter_mean=meter_mean,
        meter_variance=meter_variance,
        residual=residual,
        decomposition_residual=decomposition.residual,
        forms_agree=forms_agree,
    )


def disturbance_operator(u: UnitaryOperator, b: Observable, d_s: int, d_p: int) -> np.ndarray:
    """D_B = U^dagger (B (x) I_P) U - B (x) I_P."""
    if u.dim != d_s * d_p:
        raise TradeoffError(f"U has dim {u.dim}, expected {d_s * d_p}")
    if b.dim != d_s:
        raise TradeoffError(f"B has dim {b.dim}, expected d_S={d_s}")
    lifted = tensor(b.matrix, np.eye(d_p))
    disturbance = dagger(u.matrix) @ lifted @ u.matrix - lifted
    return as_complex_matrix(hermitize(disturbance), name="disturbance operator")


def commutator_mean_abs(a: Observable, b: Observable, rho_s: DensityOperator) -> float:
    """|<[A, B]>| on rho_S."""
    commutator = a.matrix @ b.matrix - b.matrix @ a.matrix
    return float(abs(np.trace(commutator @ rho_s.matrix)))


class NdrCheck(NamedTuple):
    holds_additive: bool
    holds_reciprocal: bool
    slack: float
    reciprocal_slack: float = 0.0


def ndr_check(noise_a: float, dist_b: float, std_a: float, std_b: float,
              commutator_mean_abs: float) -> NdrCheck:
    """
    Evaluate the noise-disturbance relation
        dN_A dD_B + dN_A dB + dA dD_B >= |<[A,B]>| / 2
    and its reciprocal form
        (dN_A/dA + 1)(dD_B/dB + 1) >= 1 + |<[A,B]>| / (2 dA dB).

    The reciprocal slack is the additive slack divided by dA dB, so both
    verdicts come from one comparison and always agree.

    Returns:
        NdrCheck with both verdicts, the additive slack (lhs - rhs) and the
        reciprocal slack

    Raises:
        TradeoffError: On non-finite or negative inputs, or dA = 0 or dB = 0
    """
    values = (noise_a, dist_b, std_a, std_b, commutator_mean_abs)
    if not all(math.isfinite(v) for v in values):
        raise TradeoffError(f"NDR inputs must be finite, got {values}")
    if any(v < 0 for v in values):
        raise TradeoffError(f"NDR inputs must be non-negative, got {values}")
    if std_a <= 0 or std_b <= 0:
        raise TradeoffError("NDR needs Delta A > 0 and Delta B > 0")

    slack = noise_a * dist_b + noise_a * std_b + std_a * dist_b - 0.5 * commutator_mean_abs
    holds = bool(slack >= -NDR_TOL)
    return NdrCheck(holds, holds, slack, slack / (std_a * std_b))


def noise_floor(xi: float, cv_squared: float) -> float:
    """
    Lower bound on Delta N_A / Delta A implied by a survival activity xi:
    sqrt(CV^2 / xi - 1) when CV^2 > xi, else 0.
    """
    if not math.isfinite(xi) or xi <= 0:
        raise TradeoffError(f"noise floor needs a positive finite survival activity, got {xi}")
    if cv_squared <= xi:
        return 0.0
    return math.sqrt(cv_squared / xi - 1.0)


def ndr_frontier(commutator_term: float, points: int = 101) -> List[Tuple[float, float]]:
    """
    Equality curve of the reciprocal NDR in units of (Delta A, Delta B):
    (x + 1)(y + 1) = 1 + c with c = |<[A,B]>| / (2 dA dB), for x in [0, c].
    """
    c = max(commutator_term, 0.0)
    xs = np.linspace(0.0, c, points) if c > 0 else np.zeros(1)
    return [(float(x), float((1.0 + c) / (x + 1.0) - 1.0)) for x in xs]


@dataclass(frozen=True)
class NdrRecord:
    """Noise and disturbance of one scheme, with the NDR and noise-floor verdicts."""
    noise_a: float
    disturbance_b: float
    std_a: float
    std_b: float
    commutator_mean_abs: float
    check: NdrCheck
    floor: float

    @property
    def noise_ratio(self) -> float:
        """Delta N_A / Delta A."""
        return self.noise_a / self.std_a

    @property
    def disturbance_ratio(self) -> float:
        """Delta D_B / Delta B."""
        return self.disturbance_b / self.std_b

    @property
    def floor_respected(self) -> bool:
        return self.noise_ratio >= self.floor - BOUND_REL_SLACK


def ndr_record(scheme: MeasurementScheme, a: Observable, b: Observable,
               rho_s: DensityOperator, xi: Optional[float], cv_squared: float) -> NdrRecord:
    """
    Measure noise on A and disturbance on B for a scheme whose meter acts on
    the probe, then evaluate the NDR and the noise floor (0 if xi is None).
    """
    joint = scheme.joint_state(rho_s)
    noise_a = math.sqrt(variance(noise_operator(scheme, a), joint))
    disturbance = disturbance_operator(scheme.unitary, b, scheme.d_s, scheme.d_p)
    disturbance_b = math.sqrt(variance(disturbance, joint))
    std_a = math.sqrt(variance(a, rho_s))
    std_b = math.sqrt(variance(b, rho_s))
    commutator = commutator_mean_abs(a, b, rho_s)
    return NdrRecord(
        noise_a=noise_a,
        disturbance_b=disturbance_b,
        std_a=std_a,
        std_b=std_b,
        commutator_mean_abs=commutator,
        check=ndr_check(noise_a, disturbance_b, std_a, std_b, commutator),
        floor=0.0 if xi is None else noise_floor(xi, cv_squared),
    )
