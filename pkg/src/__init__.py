# qmeter package
# Indirect-measurement schemes, their Kraus representation and trade-off checks

__version__ = "1.0.0"

from .linalg_core import LinalgError, SingularMatrixError
from .quantum_types import DensityOperator, KrausSet, Observable, QuantumTypeError, UnitaryOperator

__all__ = [
    '__version__',
    'DensityOperator',
    'KrausSet',
    'LinalgError',
    'Observable',
    'QuantumTypeError',
    'SingularMatrixError',
    'UnitaryOperator',
]
