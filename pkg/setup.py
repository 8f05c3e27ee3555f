#!/usr/bin/env python3
"""
Bootstrap a qmeter checkout: virtual environment, dependencies, the sample
scheme files used by ``verify``, the fast test suite and one audit of the
controlled-rotation sample.
"""

import os
import subprocess
import sys
from pathlib import Path

PROJECT_DIR = Path(__file__).resolve().parent
VENV_DIR = PROJECT_DIR / "venv"
BIN_DIR = VENV_DIR / ("Scripts" if os.name == "nt" else "bin")
VENV_PYTHON = BIN_DIR / ("python.exe" if os.name == "nt" else "python")

SAMPLE_SCHEME = Path("sample_data") / "controlled_rotation_scheme.json"
SAMPLE_STATE = Path("sample_data") / "qubit_state.json"


def run_step(argv, description, required=True):
    """Run one bootstrap step; abort on a failed required step."""
    print(f"📋 {description}...")
    completed = subprocess.run([str(a) for a in argv], cwd=PROJECT_DIR, capture_output=True, text=True)
    if completed.returncode == 0:
        print(f"✅ {description}")
        return True
    output = (completed.stderr or completed.stdout).strip().splitlines()
    print(f"❌ {description} failed (exit {completed.returncode})")
    for line in output[-10:]:
        print(f"   {line}")
    if required:
        sys.exit(1)
    return False


def main():
    print("🚀 Setting up qmeter")
    print("=" * 50)

    if sys.version_info < (3, 8):
        print("❌ Python 3.8 or higher is required")
        sys.exit(1)

    if VENV_DIR.exists():
        print("📦 Reusing venv/")
    else:
        run_step([sys.executable, "-m", "venv", VENV_DIR], "Creating venv/")

    run_step([VENV_PYTHON, "-m", "pip", "install", "-r", "requirements.txt"], "Installing requirements")
    run_step([VENV_PYTHON, "create_sample_data.py"], "Writing sample_data/")
    tests_ok = run_step([VENV_PYTHON, "-m", "pytest", "tests", "-m", "not slow", "-q"],
                        "Running fast tests", required=False)
    audit_ok = run_step([VENV_PYTHON, "-m", "src.cli", "verify", SAMPLE_SCHEME, SAMPLE_STATE],
                        "Auditing the controlled-rotation sample", required=False)

    print("\n🎉 Setup finished" + ("" if tests_ok and audit_ok else " with warnings"))
    activate = r".\venv\Scripts\activate" if os.name == "nt" else "source venv/bin/activate"
    print(f"\nActivate with:  {activate}")
    print("Then try:       python -m src.cli random-sweep --trials 100 --seed 42 --out results")


if __name__ == "__main__":
    main()
