"""
Unit tests for the sweep runners.
"""

import math
import unittest

import numpy as np
import pytest

from src.experiments.config import ExperimentConfig
from src.experiments.runners import (
    QUBIT_OBSERVABLE,
    QUBIT_STATE,
    STATUS_DEGENERATE,
    STATUS_FAILED,
    STATUS_OK,
    STATUS_UNBOUNDED,
    SchemeSearchError,
    TrialRecord,
    audited_report,
    optimize_qubit_scheme,
    run_indexed,
    run_ndr_sweep,
    run_qubit_tradeoff,
    run_random_sweep,
)
from src.measurement.scheme import MeasurementScheme, unbiasedness_residual
from src.quantum_types import PAULI, DensityOperator, Observable, UnitaryOperator


class TestRunIndexed(unittest.TestCase):

    def test_results_in_index_order(self):
        self.assertEqual(run_indexed(lambda i: i * i, range(10), workers=3), [i * i for i in range(10)])

    def test_inline_execution(self):
        self.assertEqual(run_indexed(str, [2, 0, 1]), ["2", "0", "1"])


class TestTrialRecord(unittest.TestCase):

    def test_unbounded_record_serialization(self):
        record = TrialRecord(trial_index=3, seed=11, d_s=2, d_p=2, status=STATUS_UNBOUNDED,
                             xi=None, lhs=math.inf, cv2=1.0, noise_ratio=0.5, selected_l=None)
        row = record.to_dict()
        self.assertEqual(row["xi"], "unbounded")
        self.assertEqual(row["lhs"], "unbounded")
        self.assertEqual(row["one_plus_noise_ratio"], 1.5)
        self.assertTrue(record.accepted)
        self.assertFalse(record.violated)

    def test_failed_record(self):
        record = TrialRecord(trial_index=0, seed=1, d_s=3, d_p=2, status=STATUS_FAILED, message="boom")
        self.assertFalse(record.accepted)
        self.assertIsNone(record.to_dict()["selected_l"])
        self.assertIsNone(record.one_plus_noise_ratio)

    def test_noise_below_floor_is_a_violation(self):
        record = TrialRecord(trial_index=1, seed=2, d_s=2, d_p=2, status=STATUS_OK,
                             satisfied=True, noise_floor=2.0, floor_respected=False)
        self.assertTrue(record.violated)
        self.assertEqual(record.to_dict()["noise_floor"], 2.0)


class TestRandomSweep(unittest.TestCase):
    """Test cases for run_random_sweep."""

    def setUp(self):
        self.config = ExperimentConfig(trials=12, master_seed=7, dim_range=(2, 3))

    def test_bound_holds_on_every_trial(self):
        records = run_random_sweep(self.config)
        self.assertEqual([r.trial_index for r in records], list(range(12)))
        for record in records:
            self.assertIn(record.status, (STATUS_OK, STATUS_UNBOUNDED, STATUS_DEGENERATE), record.message)
            self.assertIn(record.d_s, (2, 3))
            self.assertIn(record.d_p, (2, 3))
            if record.status == STATUS_OK:
                self.assertTrue(record.satisfied)
                self.assertLessEqual(record.residual, self.config.unbias_tol)
                self.assertGreaterEqual(record.xi, 0.0)
                self.assertTrue(record.floor_respected)
                self.assertFalse(record.violated)
            elif record.status == STATUS_UNBOUNDED:
                self.assertEqual(record.noise_floor, 0.0)

    def test_deterministic(self):
        first = [r.to_dict() for r in run_random_sweep(self.config)]
        second = [r.to_dict() for r in run_random_sweep(self.config)]
        self.assertEqual(first, second)

    def test_worker_count_does_not_change_records(self):
        serial = run_random_sweep(self.config)
        threaded = run_random_sweep(ExperimentConfig(trials=12, master_seed=7, dim_range=(2, 3), workers=2))
        self.assertEqual([r.to_dict() for r in serial], [r.to_dict() for r in threaded])

    def test_seed_changes_records(self):
        other = run_random_sweep(ExperimentConfig(trials=12, master_seed=8, dim_range=(2, 3)))
        self.assertNotEqual([r.seed for r in run_random_sweep(self.config)], [r.seed for r in other])

    def test_accepted_records_keep_scheme(self):
        records = run_random_sweep(self.config)
        accepted = [r for r in records if r.accepted]
        self.assertTrue(accepted)
        for record in accepted:
            self.assertIsInstance(record.scheme, MeasurementScheme)
            self.assertEqual(record.rho_s.dim, record.d_s)


class TestQubitSearch(unittest.TestCase):

    def test_audited_report_on_known_scheme(self):
        c, s = np.cos(np.pi / 6), np.sin(np.pi / 6)
        i2 = PAULI["identity"]
        unitary = np.block([[i2, np.zeros((2, 2))], [np.zeros((2, 2)), np.array([[c, -s], [s, c]])]])
        scheme = MeasurementScheme(2, 2, UnitaryOperator(unitary),
                                   Observable(np.kron(i2, np.diag([0.0, 2.0]))), DensityOperator.pure([1, 0]))
        report = audited_report(scheme, QUBIT_STATE, Observable(np.diag([0.0, 0.5])), ExperimentConfig())
        self.assertAlmostEqual(report.xi, 1 / 6, places=12)

    def test_identity_interaction_cannot_measure_target(self):
        """With U = I the probe meter only measures multiples of the identity."""
        config = ExperimentConfig(max_restarts=2, optimizer_max_iter=300)
        with self.assertRaises(SchemeSearchError) as ctx:
            optimize_qubit_scheme(UnitaryOperator(np.eye(4)), np.random.default_rng(0), config)
        self.assertGreaterEqual(ctx.exception.best_residual, 1 / math.sqrt(2) - 1e-9)


@pytest.mark.slow
def test_qubit_tradeoff_schemes():
    config = ExperimentConfig(trials=2, master_seed=3)
    records = run_qubit_tradeoff(config)
    accepted = [r for r in records if r.accepted]
    assert len(accepted) == 2
    for record in accepted:
        assert abs(record.cv2 - 4.0) <= 1e-9
        assert record.residual <= config.unbias_tol
        assert unbiasedness_residual(record.scheme, QUBIT_OBSERVABLE) <= config.unbias_tol
        if record.status == STATUS_OK:
            assert record.satisfied
            assert record.floor_respected
            assert record.xi * record.one_plus_noise_ratio >= 4.0 * (1 - 1e-7) - 1e-9


@pytest.mark.slow
def test_ndr_sweep_records_hold():
    config = ExperimentConfig(trials=2, master_seed=5, observable_b="sigma_z")
    records = run_ndr_sweep(config)
    accepted = [r for r in records if r.accepted]
    assert len(accepted) == 2
    for record in accepted:
        assert record.holds_additive and record.holds_reciprocal
        assert record.floor_respected
        assert not record.violated


if __name__ == '__main__':
    unittest.main()
