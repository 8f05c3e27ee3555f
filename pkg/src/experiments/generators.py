"""
Random Generators
=================

Seeded samplers for the sweeps:
- haar_unitary: Haar-distributed unitaries via QR of a complex Ginibre matrix
- random_density: Hilbert-Schmidt ensemble GG^dagger / tr(GG^dagger)
- random_meter: shifted GUE-type Hermitian matrices with a zero ground space

Every trial draws from its own stream keyed by (master_seed, trial_index).
"""

import numpy as np

from ..linalg_core import dagger, hermitian_eig, hermitize
from ..quantum_types import DensityOperator, Observable, UnitaryOperator, shift_to_zero_ground


def trial_seed(master_seed: int, trial_index: int) -> int:
    """64-bit seed of one trial's random stream."""
    sequence = np.random.SeedSequence([int(master_seed), int(trial_index)])
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def trial_rng(master_seed: int, trial_index: int) -> np.random.Generator:
    return np.random.default_rng(trial_seed(master_seed, trial_index))


def ginibre(d: int, rng: np.random.Generator) -> np.ndarray:
    """d x d matrix of independent standard complex Gaussians (E|z|^2 = 1)."""
    return (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2.0)


def haar_unitary(d: int, rng: np.random.Generator) -> UnitaryOperator:
    """Haar sample: Q from the QR factorization, with R's diagonal phases divided out."""
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    q, r = np.linalg.qr(ginibre(d, rng))
    diagonal = np.diag(r)
    phases = diagonal / np.abs(diagonal)
    return UnitaryOperator(q * phases)


def random_density(d: int, rng: np.random.Generator) -> DensityOperator:
    """Hilbert-Schmidt random state."""
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    g = ginibre(d, rng)
    gram = g @ dagger(g)
    return DensityOperator(hermitize(gram / np.trace(gram).real))


def random_meter(d: int, rng: np.random.Generator, ground_rank: int = 1) -> Observable:
    """
    Random zero-grounded meter observable.

    A Hermitian matrix (G + G^dagger)/2 is shifted so that its lowest
    eigenvalue is 0. With ground_rank > 1 the lowest ground_rank eigenvalues
    are all pinned to 0, giving a degenerate zero outcome.
    """
    if d < 2:
        raise ValueError(f"meter dimension must be >= 2, got {d}")
    if not 1 <= ground_rank < d:
        raise ValueError(f"ground_rank must lie in [1, {d - 1}], got {ground_rank}")
    g = ginibre(d, rng)
    h = hermitize(g)
    if ground_rank == 1:
        return shift_to_zero_ground(Observable(h))

    eigenvalues, vectors = hermitian_eig(h)
    shifted = eigenvalues - eigenvalues[ground_rank - 1]
    shifted[:ground_rank] = 0.0
    return shift_to_zero_ground(Observable(hermitize((vectors * shifted) @ dagger(vectors))))
