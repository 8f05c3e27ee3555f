"""
Command-Line Interface
======================

Subcommands:
- random-sweep:   random schemes, bound check on every trial
- qubit-tradeoff: optimized qubit schemes measuring sigma_z/2 + I
- ndr:            noise-disturbance relation and noise floor on the qubit schemes
- verify:         full audit of one scheme file and one state file

Exit codes: 0 success, 1 physics or bound failure, 2 usage or schema failure.

Usage:
    python -m src.cli random-sweep --trials 1000 --seed 42 --out results
    python -m src.cli verify sample_data/identity_scheme.json sample_data/qubit_state.json
"""

import argparse
import logging
import math
import sys
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import __version__
from .experiments.config import (
    NDR_OBSERVABLES,
    ExperimentConfig,
    ExperimentConfigError,
    default_seed,
    load_config_file,
)
from .experiments.optimizer import OptimizerError
from .experiments.runners import (
    DECOMPOSITION_TOL,
    QUBIT_OBSERVABLE,
    QUBIT_STATE,
    run_ndr_sweep,
    run_qubit_tradeoff,
    run_random_sweep,
)
from .linalg_core import LinalgError
from .measurement.kraus import kraus_from_scheme, meter_statistics, purify_and_verify
from .measurement.scheme import (
    ConsistencyError,
    MeasurementError,
    derive_unbiased_observable,
    heisenberg_moments,
    unbiasedness_residual,
    variance_decomposition,
)
from .measurement.tradeoff import (
    UNBOUNDED,
    DegenerateObservableError,
    TradeoffError,
    ndr_frontier,
    noise_floor,
    tur_bound,
)
from .quantum_types import PAULI, Observable, QuantumTypeError, expectation, variance
from .result_writer import ResultWriter, ResultWriterError, RunManifest, reference_curve, summarize
from .scheme_files import SchemaError, SchemeFileLoader, dump_scheme

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2

RANDOM_SWEEP_COLUMNS = ["trial", "d_S", "d_P", "seed", "cv2", "xi", "noise_ratio",
                        "lhs", "rhs", "residual", "status", "satisfied"]
QUBIT_COLUMNS = ["trial", "residual", "xi", "one_plus_noise_ratio", "cv2", "satisfied"]
NDR_COLUMNS = ["trial", "residual", "xi", "cv2", "noise_ratio", "disturbance_ratio",
               "noise_floor", "ndr_slack", "holds_additive", "holds_reciprocal", "floor_respected"]
ORACLE_TOL = 1e-9
REFERENCE_POINTS = 101


def positive_int(value: str) -> int:
    try:
        number = int(value, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {value!r}")
    if number < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {number}")
    return number


def seed_int(value: str) -> int:
    try:
        number = int(value, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {value!r}")
    if not 0 <= number < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return number


def positive_float(value: str) -> float:
    try:
        number = float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {value!r}")
    if not (math.isfinite(number) and number > 0):
        raise argparse.ArgumentTypeError(f"must be a positive finite number, got {value}")
    return number


def build_parser() -> argparse.ArgumentParser:
    logging_flags = argparse.ArgumentParser(add_help=False)
    verbosity = logging_flags.add_mutually_exclusive_group()
    verbosity.add_argument("--verbose", "-v", action="store_true", help="Log per-trial progress")
    verbosity.add_argument("--quiet", "-q", action="store_true", help="Log warnings and errors only")

    tolerance_flags = argparse.ArgumentParser(add_help=False)
    tolerance_flags.add_argument("--unbias-tol", type=positive_float, help="Unbiasedness tolerance (default 1e-5)")
    tolerance_flags.add_argument("--reg-tol", type=positive_float, help="Regularity threshold for V0 (default 1e-8)")

    sweep_flags = argparse.ArgumentParser(add_help=False)
    sweep_flags.add_argument("--trials", type=positive_int, help="Number of trials / accepted schemes")
    sweep_flags.add_argument("--seed", type=seed_int, help="Master seed (default: QMETER_SEED or built-in)")
    sweep_flags.add_argument("--out", default="results", help="Output directory (default: results)")
    sweep_flags.add_argument("--format", choices=["csv", "json"], default="csv", help="Record table format")
    sweep_flags.add_argument("--dump", action="store_true", help="Write accepted schemes as JSON files")
    sweep_flags.add_argument("--config", help="JSON or key=value configuration file")
    sweep_flags.add_argument("--workers", type=positive_int, help="Worker threads (default 1)")

    parser = argparse.ArgumentParser(
        prog="qmeter",
        description="Indirect-measurement trade-off toolkit",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True)

    parents = [sweep_flags, tolerance_flags, logging_flags]
    random_sweep = subparsers.add_parser("random-sweep", parents=parents,
                                         help="Bound check on random schemes")
    random_sweep.set_defaults(handler=cmd_random_sweep)

    qubit = subparsers.add_parser("qubit-tradeoff", parents=parents,
                                  help="Trade-off of optimized qubit schemes")
    qubit.set_defaults(handler=cmd_qubit_tradeoff)

    ndr = subparsers.add_parser("ndr", parents=parents, help="Noise-disturbance relation sweep")
    ndr.add_argument("--b", choices=NDR_OBSERVABLES, help="Disturbed observable B (default sigma_x)")
    ndr.add_argument("--xi", type=positive_float, action="append", default=[],
                     help="Survival activity for a noise-floor line (repeatable)")
    ndr.set_defaults(handler=cmd_ndr)

    verify = subparsers.add_parser("verify", parents=[tolerance_flags, logging_flags],
                                   help="Audit one scheme file against one state file")
    verify.add_argument("scheme_file", help="Scheme JSON file")
    verify.add_argument("state_file", help="Density-operator JSON file for rho_S")
    verify.add_argument("--observable", help="Observable JSON file (default: the one the scheme measures)")
    verify.set_defaults(handler=cmd_verify)

    return parser


def configure_logging(args: argparse.Namespace) -> None:
    level = logging.INFO
    if getattr(args, "verbose", False):
        level = logging.DEBUG
    elif getattr(args, "quiet", False):
        level = logging.WARNING
    logging.basicConfig(
        level=level,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        stream=sys.stderr,
        force=True,
    )


def resolve_config(args: argparse.Namespace, default_trials: int) -> ExperimentConfig:
    """Defaults, then the config file, then explicit flags."""
    config = ExperimentConfig(trials=default_trials, master_seed=default_seed())
    if args.config:
        config = load_config_file(args.config, base=config)
    overrides = {
        "trials": args.trials,
        "master_seed": args.seed,
        "unbias_tol": args.unbias_tol,
        "reg_tol": args.reg_tol,
        "workers": args.workers,
        "observable_b": getattr(args, "b", None),
    }
    return ExperimentConfig.from_dict({k: v for k, v in overrides.items() if v is not None}, base=config)


def _write_manifest(writer: ResultWriter, command: str, config: ExperimentConfig,
                    summary: Dict) -> None:
    writer.create_run_manifest(RunManifest(
        subcommand=command,
        config=config.to_dict(),
        master_seed=config.master_seed,
        tool_version=__version__,
        summary=summary,
    ))


def _dump_accepted(writer: ResultWriter, records: Sequence, command: str) -> int:
    dumped = 0
    for record in records:
        if not record.accepted or record.scheme is None:
            continue
        dump_scheme(
            writer,
            record.scheme,
            getattr(record, "rho_s", None) or QUBIT_STATE,
            f"schemes/trial_{record.trial_index:05d}",
            {"subcommand": command, "trial": record.trial_index, "seed": record.seed,
             "residual": record.residual},
        )
        dumped += 1
    return dumped


def cmd_random_sweep(args: argparse.Namespace) -> int:
    config = resolve_config(args, default_trials=1000)
    records = run_random_sweep(config)

    writer = ResultWriter(args.out)
    writer.write_records([r.to_dict() for r in records], RANDOM_SWEEP_COLUMNS, "random_sweep", args.format)
    ok = [r for r in records if r.status == "ok"]
    writer.write_plot_data([(r.cv2, r.lhs) for r in ok], ["cv2", "lhs"], "random_sweep_plot")
    upper = max([r.cv2 for r in ok] + [1.0])
    writer.write_plot_data(reference_curve(np.linspace(0.0, upper, REFERENCE_POINTS), lambda x: x),
                           ["x", "y"], "random_sweep_reference")
    if args.dump:
        _dump_accepted(writer, records, args.command)

    violations = [r.trial_index for r in records if r.violated]
    counts = {status: sum(r.status == status for r in records)
              for status in ("ok", "unbounded", "degenerate", "failed")}
    _write_manifest(writer, args.command, config, {**counts, "violations": violations})

    print(f"random-sweep: {len(records)} trials, " + ", ".join(f"{k}={v}" for k, v in counts.items()))
    if violations:
        logger.error(f"Bound or noise floor violated in trials {violations}")
        print(f"bound or noise floor violated in trials: {violations}")
        return EXIT_FAILURE
    return EXIT_OK


def _qubit_cv_squared() -> float:
    return expectation(QUBIT_OBSERVABLE, QUBIT_STATE) ** 2 / variance(QUBIT_OBSERVABLE, QUBIT_STATE)


def cmd_qubit_tradeoff(args: argparse.Namespace) -> int:
    config = resolve_config(args, default_trials=100)
    records = run_qubit_tradeoff(config)
    accepted = [r for r in records if r.accepted]
    failures = len(records) - len(accepted)
    cv2 = _qubit_cv_squared()

    writer = ResultWriter(args.out)
    writer.write_records([r.to_dict() for r in accepted], QUBIT_COLUMNS, "qubit_tradeoff", args.format)
    finite = [r for r in accepted if r.xi is not None]
    writer.write_plot_data([(r.xi, r.one_plus_noise_ratio) for r in finite],
                           ["xi", "one_plus_noise_ratio"], "qubit_tradeoff_plot")
    xi_values = [r.xi for r in finite if r.xi > 0]
    low, high = (min(xi_values), max(xi_values)) if xi_values else (1.0, 2.0 * cv2)
    writer.write_plot_data(reference_curve(np.linspace(low, high, REFERENCE_POINTS), lambda x: cv2 / x),
                           ["xi", "cv2_over_xi"], "qubit_tradeoff_reference")
    if args.dump:
        _dump_accepted(writer, accepted, args.command)
        writer.write_json(QUBIT_OBSERVABLE.to_json(), "schemes/observable.json")

    violations = [r.trial_index for r in accepted if r.violated]
    drifted = [r.trial_index for r in accepted if abs(r.cv2 - cv2) > ORACLE_TOL]
    summary = {"accepted": len(accepted), "failed_attempts": failures, "violations": violations,
               "xi_range": summarize(xi_values)}
    _write_manifest(writer, args.command, config, summary)

    print(f"qubit-tradeoff: {len(accepted)} accepted, {failures} failed attempts")
    status = EXIT_OK
    if violations:
        logger.error(f"Bound or noise floor violated in attempts {violations}")
        status = EXIT_FAILURE
    if drifted:
        logger.error(f"CV^2 differs from {cv2} in attempts {drifted}")
        status = EXIT_FAILURE
    if len(accepted) < config.trials:
        logger.error(f"Found {len(accepted)} of {config.trials} schemes within {config.attempt_cap} attempts")
        status = EXIT_FAILURE
    return status


def cmd_ndr(args: argparse.Namespace) -> int:
    config = resolve_config(args, default_trials=100)
    records = run_ndr_sweep(config)
    accepted = [r for r in records if r.accepted]
    cv2 = _qubit_cv_squared()

    b = Observable(PAULI[config.observable_b])
    std_a = math.sqrt(variance(QUBIT_OBSERVABLE, QUBIT_STATE))
    std_b = math.sqrt(variance(b, QUBIT_STATE))
    commutator = QUBIT_OBSERVABLE.matrix @ b.matrix - b.matrix @ QUBIT_OBSERVABLE.matrix
    commutator_term = abs(np.trace(commutator @ QUBIT_STATE.matrix)) / (2.0 * std_a * std_b)
    floors = [(xi, noise_floor(xi, cv2)) for xi in args.xi]

    writer = ResultWriter(args.out)
    writer.write_records([r.to_dict() for r in accepted], NDR_COLUMNS, "ndr", args.format)
    writer.write_plot_data([(r.noise_ratio, r.disturbance_ratio) for r in accepted],
                           ["noise_ratio", "disturbance_ratio"], "ndr_plot")
    writer.write_plot_data(ndr_frontier(commutator_term, REFERENCE_POINTS),
                           ["noise_ratio", "disturbance_ratio"], "ndr_frontier")
    writer.write_plot_data(floors, ["xi", "noise_floor"], "ndr_noise_floors")
    if args.dump:
        _dump_accepted(writer, accepted, args.command)
        writer.write_json(QUBIT_OBSERVABLE.to_json(), "schemes/observable.json")

    violations = [r.trial_index for r in accepted if r.violated]
    summary = {"accepted": len(accepted), "failed_attempts": len(records) - len(accepted),
               "violations": violations, "commutator_term": float(commutator_term),
               "noise_floors": {format(xi, ".17g"): floor for xi, floor in floors}}
    _write_manifest(writer, args.command, config, summary)

    print(f"ndr: {len(accepted)} accepted, B={config.observable_b}")
    for xi, floor in floors:
        print(f"noise floor at xi={xi:.17g}: {floor:.17g}")
    status = EXIT_OK
    if violations:
        logger.error(f"NDR or noise floor violated in attempts {violations}")
        status = EXIT_FAILURE
    if len(accepted) < config.trials:
        logger.error(f"Found {len(accepted)} of {config.trials} schemes within {config.attempt_cap} attempts")
        status = EXIT_FAILURE
    return status


class Audit:
    """Named pass/fail checks printed by the verify command."""

    def __init__(self):
        self.checks: List[Tuple[str, bool, str]] = []

    def add(self, name: str, passed: bool, detail: str) -> bool:
        self.checks.append((name, passed, detail))
        return passed

    def run(self, name: str, check: Callable[[], Tuple[bool, str]]) -> bool:
        try:
            passed, detail = check()
        except ConsistencyError as e:
            return self.add(e.equation, False, str(e))
        except (MeasurementError, TradeoffError, QuantumTypeError) as e:
            return self.add(name, False, str(e))
        return self.add(name, passed, detail)

    @property
    def passed(self) -> bool:
        return all(passed for _, passed, _ in self.checks)

    def failures(self) -> List[str]:
        return [name for name, passed, _ in self.checks if not passed]

    def render(self) -> str:
        return "\n".join(f"[{'PASS' if passed else 'FAIL'}] {name}: {detail}"
                         for name, passed, detail in self.checks)


def cmd_verify(args: argparse.Namespace) -> int:
    unbias_tol = args.unbias_tol or ExperimentConfig.unbias_tol
    reg_tol = args.reg_tol or ExperimentConfig.reg_tol

    loader = SchemeFileLoader()
    scheme = loader.load_scheme(args.scheme_file)
    rho_s = loader.load_state(args.state_file)
    if rho_s.dim != scheme.d_s:
        raise SchemaError("$", f"state has dim {rho_s.dim}, scheme has d_S={scheme.d_s}")
    if args.observable:
        a = loader.load_observable(args.observable)
        if a.dim != scheme.d_s:
            raise SchemaError("$", f"observable has dim {a.dim}, scheme has d_S={scheme.d_s}")
    else:
        a = derive_unbiased_observable(scheme)

    audit = Audit()
    print(f"scheme: {args.scheme_file} (d_S={scheme.d_s}, d_P={scheme.d_p}, probe basis {scheme.basis_label})")

    kraus_holder = []

    def completeness():
        kraus_holder.append(kraus_from_scheme(scheme))
        return True, f"{len(kraus_holder[0])} Kraus operators in {len(kraus_holder[0].outcomes)} outcomes"

    if not audit.run("Kraus completeness", completeness):
        print(audit.render())
        return EXIT_FAILURE
    kraus = kraus_holder[0]

    residual = unbiasedness_residual(scheme, a)
    audit.add("unbiasedness", residual <= unbias_tol, f"residual {residual:.3e} (tolerance {unbias_tol:.1e})")

    def decomposition():
        d = variance_decomposition(scheme, a, rho_s)
        scale = 1.0 + d.meter_variance
        allowed = (DECOMPOSITION_TOL + 10.0 * residual) * scale
        return abs(d.residual) <= allowed, (
            f"Delta M^2={d.meter_variance:.17g}, Delta A^2={d.observable_variance:.17g}, "
            f"Delta N^2={d.noise_variance:.17g}, residual {d.residual:.3e}"
        )

    audit.run("variance decomposition", decomposition)

    def oracle():
        kraus_mean, kraus_var = meter_statistics(scheme, rho_s, kraus)
        full_mean, full_var = heisenberg_moments(scheme, rho_s)
        gap = max(abs(kraus_mean - full_mean), abs(kraus_var - full_var))
        return gap <= ORACLE_TOL * (1.0 + abs(full_mean) + full_var), f"Kraus vs full-space gap {gap:.3e}"

    audit.run("meter statistics oracle", oracle)

    def purification():
        _, report = purify_and_verify(kraus, rho_s)
        return report.passed, ", ".join(f"{k}={v:.3e}" for k, v in report.to_dict().items() if k != "passed")

    audit.run("purification", purification)

    def bound():
        try:
            report = tur_bound(scheme, rho_s, a, unbias_tol, reg_tol, kraus)
        except DegenerateObservableError as e:
            return False, f"degenerate observable: {e}"
        xi = UNBOUNDED if report.unbounded else f"{report.xi:.17g} (l={report.selected_l})"
        lhs = UNBOUNDED if report.unbounded else f"{report.lhs:.17g}"
        audit.add("bound forms", report.forms_agree, "observable and meter forms agree"
                  if report.forms_agree else "observable and meter forms disagree")
        audit.add("noise floor", report.floor_respected,
                  f"Delta N/Delta A={math.sqrt(report.noise_ratio):.17g}, floor={report.noise_floor:.17g}")
        return report.satisfied, f"Xi={xi}, lhs={lhs}, rhs={report.rhs:.17g}"

    audit.run("trade-off bound", bound)

    print(audit.render())
    if not audit.passed:
        logger.error(f"Failed checks: {', '.join(audit.failures())}")
        return EXIT_FAILURE
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE

    configure_logging(args)
    try:
        return args.handler(args)
    except (SchemaError, ExperimentConfigError) as e:
        logger.error(str(e))
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (ResultWriterError, MeasurementError, TradeoffError, QuantumTypeError,
            LinalgError, OptimizerError) as e:
        logger.error(str(e))
        print(f"error: {e}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
