"""
Sample input generator for the verify command.
"""

import json
from pathlib import Path

import numpy as np

from src.experiments.runners import QUBIT_OBSERVABLE, QUBIT_STATE
from src.measurement.scheme import MeasurementScheme
from src.quantum_types import PAULI, DensityOperator, Observable, UnitaryOperator

SAMPLE_DIR = Path("sample_data")
I2 = PAULI["identity"]


def identity_scheme() -> MeasurementScheme:
    """U = I, M = (sigma_z + I) (x) I: a direct projective measurement of sigma_z + I."""
    return MeasurementScheme(
        d_s=2,
        d_p=2,
        unitary=UnitaryOperator(np.eye(4)),
        meter=Observable(np.kron(PAULI["sigma_z"] + I2, I2)),
        rho_p=DensityOperator.pure([1, 0]),
    )


def swap_scheme() -> MeasurementScheme:
    """SWAP interaction with the meter sigma_z + I on the probe."""
    swap = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]])
    return MeasurementScheme(
        d_s=2,
        d_p=2,
        unitary=UnitaryOperator(swap),
        meter=Observable(np.kron(I2, PAULI["sigma_z"] + I2)),
        rho_p=DensityOperator.pure([1, 0]),
    )


def controlled_rotation_scheme(theta: float = np.pi / 3) -> MeasurementScheme:
    """Probe rotated by theta when S is |1>; meter 2|1><1| on the probe."""
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    rotation = np.array([[c, -s], [s, c]])
    unitary = np.block([[I2, np.zeros((2, 2))], [np.zeros((2, 2)), rotation]])
    return MeasurementScheme(
        d_s=2,
        d_p=2,
        unitary=UnitaryOperator(unitary),
        meter=Observable(np.kron(I2, 2.0 * np.diag([0.0, 1.0]))),
        rho_p=DensityOperator.pure([1, 0]),
    )


def write_json(data: dict, name: str) -> None:
    path = SAMPLE_DIR / name
    with open(path, "w", encoding="utf-8") as f:
        json.dump(data, f, indent=2)
        f.write("\n")
    print(f"Created {path}")


if __name__ == "__main__":
    SAMPLE_DIR.mkdir(exist_ok=True)
    write_json(identity_scheme().to_json({"description": "U = I, M = (sigma_z + I) (x) I"}),
               "identity_scheme.json")
    write_json(swap_scheme().to_json({"description": "SWAP, M = I (x) (sigma_z + I)"}),
               "swap_scheme.json")
    write_json(controlled_rotation_scheme().to_json({"description": "controlled rotation, theta = pi/3"}),
               "controlled_rotation_scheme.json")
    write_json(QUBIT_STATE.to_json(), "qubit_state.json")
    write_json(QUBIT_OBSERVABLE.to_json(), "qubit_observable.json")

    print("\nSample files created successfully!")
    print("Audit them with, e.g.:")
    print("  python -m src.cli verify sample_data/identity_scheme.json sample_data/qubit_state.json")
