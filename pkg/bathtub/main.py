"""
bathtub - command-line entry point.

    bathtub estimate --model hazard --in data.csv --interval 0,5 --out fit.csv
    bathtub simulate --model nhpp --estimator histogram --bins 8 --reps 200
    bathtub verify --suite theorem1 --reps 500 --seed 7

Every run is reproducible from its config file, input file and seed. Errors are
printed to stderr as one JSON line; the exit code is 0 on success, 1 for usage or
domain errors, 2 for parse errors and 3 when a verify suite records violations.
"""

import argparse
import logging
import sys
from collections.abc import Sequence
from typing import Any

from bathtub import __version__
from bathtub.config import get_settings, load_run_config
from bathtub.core.exceptions import BathtubException, UsageError, VerificationFailure
from bathtub.core.responses import ExitCode, create_error_payload, create_summary
from bathtub.models.shape import Command, EstimatorKind, ModelKind
from bathtub.models.stepfn import Partition
from bathtub.schemas.risk import EstimatorSpec, RiskReport, TruthSpec
from bathtub.schemas.run import RunConfig
from bathtub.services.estimators import fit
from bathtub.services.risk import default_size, monte_carlo_risk
from bathtub.services.simulation import default_truth
from bathtub.services.verification import verify_inequalities
from bathtub.storage.csv_codec import emit, ingest

logger = logging.getLogger(__name__)

DEFAULT_REPS = 100


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that raises UsageError instead of exiting."""

    def error(self, message: str) -> None:  # type: ignore[override]
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bathtub", description="Shape-respecting estimation and risk checks")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    shared = _Parser(add_help=False)
    shared.add_argument("--config", help="key=value run configuration file")
    shared.add_argument("--model", help="density, regression, hazard or nhpp")
    shared.add_argument("--shape", help="u_shaped, unimodal, nonincreasing or nondecreasing")
    shared.add_argument("--interval", help="estimation interval a,b")
    shared.add_argument("--mode", type=float, help="known mode / valley")
    shared.add_argument("--seed", type=int)
    shared.add_argument("--reps", type=int, help="replications (simulate) or trials (verify)")
    shared.add_argument("--in", dest="input_path", help="input CSV, '-' for stdin")
    shared.add_argument("--out", dest="output_path", help="output CSV, '-' for stdout")
    shared.add_argument("--constant", type=float, help="risk bracket constant C (default 49)")

    commands.add_parser("estimate", parents=[shared], help="fit a shape-respecting estimate")

    simulate = commands.add_parser(
        "simulate", parents=[shared], help="Monte Carlo risk on a preset truth"
    )
    simulate.add_argument("--size", type=float, help="sample size n, or horizon T for nhpp")
    simulate.add_argument("--sigma", type=float, help="regression noise level")
    simulate.add_argument("--estimator", help="shape, histogram, known_mode or constant_mle")
    simulate.add_argument("--bins", type=int, help="cells of the histogram estimator")

    verify = commands.add_parser("verify", parents=[shared], help="run a verification suite")
    verify.add_argument("--suite", help="suite name, or 'all'")
    return parser


def _overrides(args: argparse.Namespace) -> dict[str, Any]:
    values = {k: v for k, v in vars(args).items() if k != "config"}
    values["command"] = args.command
    return values


def run_estimate(cfg: RunConfig) -> None:
    model = ModelKind(cfg.model)  # type: ignore[arg-type]
    data = ingest(cfg.input_path, model, cfg.domain)  # type: ignore[arg-type]
    estimate = fit(data, model, cfg.shape, cfg.mode)
    emit(estimate, cfg.output_path)


def _simulation_truth(cfg: RunConfig) -> TruthSpec:
    model = ModelKind(cfg.model)  # type: ignore[arg-type]
    horizon = None
    if model is ModelKind.NHPP and cfg.size is not None:
        horizon = cfg.size
    elif model.anchored_at_zero and cfg.domain is not None:
        horizon = cfg.domain.b
    truth = default_truth(model, horizon)
    if model is ModelKind.REGRESSION and cfg.sigma is not None:
        truth = truth.model_copy(update={"sigma": cfg.sigma})
    return truth


def _estimator(cfg: RunConfig, truth: TruthSpec) -> EstimatorSpec:
    if cfg.estimator is EstimatorKind.HISTOGRAM:
        return EstimatorSpec.histogram(Partition.uniform(truth.horizon, cfg.bins))  # type: ignore[arg-type]
    if cfg.estimator is EstimatorKind.KNOWN_MODE:
        return EstimatorSpec.known_mode(cfg.mode, cfg.shape)  # type: ignore[arg-type]
    if cfg.estimator is EstimatorKind.CONSTANT_MLE:
        return EstimatorSpec.constant_mle()
    return EstimatorSpec.shape_pipeline(cfg.shape)


def run_simulate(cfg: RunConfig) -> RiskReport:
    truth = _simulation_truth(cfg)
    size = None if truth.kind is ModelKind.NHPP else (cfg.size or default_size(truth))
    report = monte_carlo_risk(
        truth, _estimator(cfg, truth), size, cfg.reps or DEFAULT_REPS, cfg.seed
    )
    emit(report, cfg.output_path)
    return report


def run_verify(cfg: RunConfig) -> RiskReport:
    report = verify_inequalities(cfg.suite, cfg.reps or DEFAULT_REPS, cfg.seed, cfg.constant)
    emit(report, cfg.output_path)
    if not report.passed:
        raise VerificationFailure(
            report.name, report.violations, details={"rows": list(report.violation_rows[:5])}
        )
    return report


def main(argv: Sequence[str] | None = None) -> int:
    """
    Run the CLI.

    Args:
        argv: Arguments without the program name; defaults to sys.argv[1:]

    Returns:
        Process exit code
    """
    settings = get_settings()
    logging.basicConfig(
        level=getattr(logging, settings.LOG_LEVEL.upper(), logging.INFO),
        format=settings.LOG_FORMAT,
        stream=sys.stderr,
    )

    try:
        args = build_parser().parse_args(argv)
        cfg = load_run_config(args.config, _overrides(args))
        logger.debug(f"Run configuration: {cfg.model_dump()}")
        if cfg.command is Command.ESTIMATE:
            run_estimate(cfg)
        else:
            runner = run_simulate if cfg.command is Command.SIMULATE else run_verify
            report = runner(cfg)
            fields = {"mean_l1": report.mean_l1, "stderr": report.stderr}
            if "plain_l1" in report.metrics:
                fields["plain_l1"] = report.metrics["plain_l1"]
            print(
                create_summary(report.name, report.passed, report.violations, **fields),
                file=sys.stderr,
            )
    except VerificationFailure as e:
        print(create_summary(e.suite, False, e.violations), file=sys.stderr)
        print(create_error_payload(e.to_dict()), file=sys.stderr)
        return e.exit_code
    except BathtubException as e:
        print(create_error_payload(e.to_dict()), file=sys.stderr)
        return e.exit_code
    except Exception:
        logger.exception("Unexpected error")
        return ExitCode.USAGE
    return ExitCode.SUCCESS


if __name__ == "__main__":
    sys.exit(main())
