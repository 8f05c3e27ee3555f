"""
Unit tests for Kraus extraction, meter statistics and the purified run.
"""

import unittest

import numpy as np
import pytest

from src.experiments.generators import haar_unitary, random_density, random_meter
from src.linalg_core import dagger
from src.measurement.kraus import (
    full_space_post_measurement,
    kraus_from_scheme,
    meter_statistics,
    outcome_probabilities,
    post_measurement_state,
    purify,
    purify_and_verify,
)
from src.measurement.scheme import MeasurementError, MeasurementScheme, heisenberg_moments
from src.quantum_types import PAULI, DensityOperator, Observable, UnitaryOperator

I2 = PAULI["identity"]
QUBIT_STATE = DensityOperator(0.5 * (I2 + PAULI["sigma_y"]))


def controlled_rotation(theta: float = np.pi / 3) -> MeasurementScheme:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    unitary = np.block([[I2, np.zeros((2, 2))], [np.zeros((2, 2)), np.array([[c, -s], [s, c]])]])
    return MeasurementScheme(2, 2, UnitaryOperator(unitary),
                             Observable(np.kron(I2, np.diag([0.0, 2.0]))), DensityOperator.pure([1, 0]))


def identity_scheme() -> MeasurementScheme:
    return MeasurementScheme(2, 2, UnitaryOperator(np.eye(4)),
                             Observable(np.kron(PAULI["sigma_z"] + I2, I2)), DensityOperator.pure([1, 0]))


def random_scheme(rng, d_s, d_p, probe_basis=None):
    return MeasurementScheme(d_s, d_p, haar_unitary(d_s * d_p, rng),
                             random_meter(d_s * d_p, rng, ground_rank=d_s),
                             random_density(d_p, rng), probe_basis=probe_basis)


class TestKrausExtraction(unittest.TestCase):
    """Test cases for kraus_from_scheme."""

    def test_controlled_rotation_operators(self):
        kraus = kraus_from_scheme(controlled_rotation())
        c, s = np.cos(np.pi / 6), np.sin(np.pi / 6)
        zero, two = kraus.outcomes
        self.assertEqual(zero.eigenvalue, 0.0)
        self.assertAlmostEqual(two.eigenvalue, 2.0, places=12)
        self.assertEqual(len(zero.operators), 1)
        self.assertEqual(len(two.operators), 1)
        np.testing.assert_allclose(zero.operators[0], np.diag([1.0, c]), atol=1e-12)
        np.testing.assert_allclose(two.operators[0], np.diag([0.0, s]), atol=1e-12)
        self.assertEqual(zero.labels[0][:2], (0, 0))
        self.assertEqual(two.labels[0][:2], (1, 1))

    def test_identity_scheme_zero_operator_has_rank_one(self):
        kraus = kraus_from_scheme(identity_scheme())
        zero_block = kraus.outcomes[0]
        self.assertEqual(len(zero_block.operators), 1)
        self.assertEqual(np.linalg.matrix_rank(zero_block.operators[0], tol=1e-10), 1)

    def test_completeness_on_random_schemes(self):
        rng = np.random.default_rng(31)
        for d_s, d_p in [(2, 2), (2, 3), (3, 2), (4, 4), (5, 5)]:
            kraus = kraus_from_scheme(random_scheme(rng, d_s, d_p))
            total = sum(dagger(v) @ v for _, _, v in kraus)
            np.testing.assert_allclose(total, np.eye(d_s), atol=1e-10)
            self.assertTrue(kraus.has_zero_outcome)

    def test_probe_basis_does_not_change_the_channel(self):
        rng = np.random.default_rng(8)
        base = random_scheme(rng, 3, 3)
        rotated = MeasurementScheme(3, 3, base.unitary, base.meter, base.rho_p,
                                    probe_basis=haar_unitary(3, rng).matrix)
        rho = random_density(3, rng)
        np.testing.assert_allclose(post_measurement_state(kraus_from_scheme(base), rho).matrix,
                                   post_measurement_state(kraus_from_scheme(rotated), rho).matrix, atol=1e-10)
        np.testing.assert_allclose(outcome_probabilities(kraus_from_scheme(base), rho),
                                   outcome_probabilities(kraus_from_scheme(rotated), rho), atol=1e-10)


class TestPostMeasurementState(unittest.TestCase):

    def test_controlled_rotation_state(self):
        """Populations are kept and the coherence shrinks by cos(theta/2)."""
        c = np.cos(np.pi / 6)
        rho = post_measurement_state(kraus_from_scheme(controlled_rotation()), QUBIT_STATE)
        np.testing.assert_allclose(rho.matrix, [[0.5, -0.5j * c], [0.5j * c, 0.5]], atol=1e-12)

    def test_identity_scheme_dephases(self):
        rho = post_measurement_state(kraus_from_scheme(identity_scheme()), QUBIT_STATE)
        np.testing.assert_allclose(rho.matrix, 0.5 * I2, atol=1e-12)

    def test_matches_full_space_evaluation(self):
        rng = np.random.default_rng(99)
        for d_s, d_p in [(2, 2), (3, 2), (2, 4)]:
            scheme = random_scheme(rng, d_s, d_p)
            rho = random_density(d_s, rng)
            np.testing.assert_allclose(post_measurement_state(kraus_from_scheme(scheme), rho).matrix,
                                       full_space_post_measurement(scheme, rho).matrix, atol=1e-10)

    def test_state_dimension_checked(self):
        with self.assertRaises(MeasurementError):
            post_measurement_state(kraus_from_scheme(identity_scheme()), DensityOperator.maximally_mixed(3))


class TestMeterStatistics(unittest.TestCase):

    def test_controlled_rotation_moments(self):
        mean, var = meter_statistics(controlled_rotation(), QUBIT_STATE)
        self.assertAlmostEqual(mean, 0.25, places=12)
        self.assertAlmostEqual(var, 7 / 16, places=12)

    def test_probabilities_sum_to_one(self):
        rng = np.random.default_rng(5)
        scheme = random_scheme(rng, 3, 4)
        probabilities = outcome_probabilities(kraus_from_scheme(scheme), random_density(3, rng))
        self.assertAlmostEqual(float(probabilities.sum()), 1.0, places=10)
        self.assertTrue(np.all(probabilities >= -1e-12))

    def test_agrees_with_heisenberg_picture(self):
        rng = np.random.default_rng(2718)
        for _ in range(20):
            d_s, d_p = (int(d) for d in rng.choice([2, 3, 4], size=2))
            scheme = random_scheme(rng, d_s, d_p)
            rho = random_density(d_s, rng)
            mean, var = meter_statistics(scheme, rho)
            h_mean, h_var = heisenberg_moments(scheme, rho)
            self.assertAlmostEqual(mean, h_mean, delta=1e-9 * (1 + abs(h_mean)))
            self.assertAlmostEqual(var, h_var, delta=1e-9 * (1 + h_var))


class TestPurification(unittest.TestCase):

    def test_controlled_rotation_purification(self):
        kraus = kraus_from_scheme(controlled_rotation())
        run, report = purify_and_verify(kraus, QUBIT_STATE)
        self.assertTrue(report.passed)
        self.assertAlmostEqual(run.norm(), 1.0, places=12)
        self.assertEqual(run.dims, (2, 2, 2))
        mean, var = run.meter_prime_moments()
        self.assertAlmostEqual(mean, 0.25, places=12)
        self.assertAlmostEqual(var, 7 / 16, places=12)

    def test_block_index_covers_every_operator(self):
        kraus = kraus_from_scheme(random_scheme(np.random.default_rng(3), 2, 3))
        run = purify(kraus, DensityOperator.maximally_mixed(2))
        self.assertEqual(sorted(run.block_index.values()), list(range(len(kraus))))
        self.assertAlmostEqual(float(run.ancilla_weights().sum()), 1.0, places=12)

    def test_random_schemes_pass_all_checks(self):
        rng = np.random.default_rng(161)
        for _ in range(10):
            scheme = random_scheme(rng, 3, 3)
            _, report = purify_and_verify(kraus_from_scheme(scheme), random_density(3, rng))
            self.assertTrue(report.passed, report.to_dict())


@pytest.mark.slow
def test_meter_statistics_random_schemes():
    """500 random schemes: Kraus sums reproduce the Heisenberg-picture moments."""
    rng = np.random.default_rng(500)
    for _ in range(500):
        d_s, d_p = (int(d) for d in rng.choice([2, 3, 4, 5], size=2))
        scheme = random_scheme(rng, d_s, d_p)
        rho = random_density(d_s, rng)
        kraus = kraus_from_scheme(scheme)
        mean, var = meter_statistics(scheme, rho, kraus)
        h_mean, h_var = heisenberg_moments(scheme, rho)
        assert abs(mean - h_mean) <= 1e-9 * (1 + abs(h_mean))
        assert abs(var - h_var) <= 1e-9 * (1 + h_var)
        purify_and_verify(kraus, rho)


if __name__ == '__main__':
    unittest.main()
