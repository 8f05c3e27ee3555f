"""
Experiments Module
==================

Seeded generators, the Nelder-Mead scheme search and the sweep drivers.

Components:
- config.py: ExperimentConfig and config-file loading
- generators.py: Haar unitaries, Hilbert-Schmidt states, zero-grounded meters
- optimizer.py: Nelder-Mead simplex minimizer
- runners.py: random sweep, qubit trade-off search, noise-disturbance sweep
"""

from .config import DEFAULT_SEED, ExperimentConfig, ExperimentConfigError, default_seed, load_config_file
from .generators import haar_unitary, random_density, random_meter, trial_rng, trial_seed
from .optimizer import OptimizerError, nelder_mead
from .runners import (
    QUBIT_OBSERVABLE,
    QUBIT_STATE,
    NdrTrialRecord,
    SchemeSearchError,
    TrialRecord,
    optimize_qubit_scheme,
    run_ndr_sweep,
    run_qubit_tradeoff,
    run_random_sweep,
)

__all__ = [
    "DEFAULT_SEED",
    "ExperimentConfig",
    "ExperimentConfigError",
    "NdrTrialRecord",
    "OptimizerError",
    "QUBIT_OBSERVABLE",
    "QUBIT_STATE",
    "SchemeSearchError",
    "TrialRecord",
    "default_seed",
    "haar_unitary",
    "load_config_file",
    "nelder_mead",
    "optimize_qubit_scheme",
    "random_density",
    "random_meter",
    "run_ndr_sweep",
    "run_qubit_tradeoff",
    "run_random_sweep",
    "trial_rng",
    "trial_seed",
]
