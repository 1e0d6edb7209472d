"""Command line surface of herding-box.

Usage: ``herding-box <command> [options]`` with one of the commands in ``COMMANDS``. Every
option can also be set in a flat JSON file passed with ``--config``; explicit flags win.
Exit codes: 0 success, 1 invalid configuration or input, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from concurrent import futures
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
import pandas as pd

from .conditional import CondConfig, LabeledDataset, Procedure, augment_normalization_feature, cond_run
from .config import RunConfig
from .diagnostics import cluster_points, diagnose
from .engine import herd_run
from .exceptions import (
    ConfigError,
    DatasetParseError,
    DimensionMismatchError,
    HerdingError,
    MomentFeasibilityError,
    SingularBasisError,
    StateSpaceError,
)
from .feature_map import FeatureMap, TableFeatureMap
from .latent import PomrfProblem, Variant, hidden_marginal_entropy, pomrf_run
from .maximizer import DEFAULT_MAX_SWEEPS, ExactEnumerationMaximizer
from .maximizer_registry import MaximizerRegistry
from .models import (
    BETA_CRITICAL,
    DEFAULT_ISING_SWEEPS,
    MAX_EXACT_SITES,
    IsingConfig,
    IsingLattice,
    RandomModelSpec,
    banana_dataset,
    component_size_histogram,
    exact_edge_moment,
    ising_herd_run,
    random_mrf,
    rbm_features,
    separable_dataset,
    swendsen_wang_sample,
    xor_dataset,
)
from .moments import MomentVector, Provenance
from .scalar import MultinomialConfig, NeuronConfig, max_window_discrepancy, multinomial_run, neuron_run
from .temperature import MAX_PERIOD, PERIOD_CONSECUTIVE, bifurcation_scan
from .trace import DEFAULT_SNAPSHOT_STRIDE, HerdingTrace, TraceConfig
from .trace_io import read_dataset, read_moments, read_trace, write_report, write_table, write_trace
from .utils import ConfigArgumentParser, ParamParser

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2

# Raised on bad user input; every other HerdingError is a runtime failure.
INPUT_ERRORS = (
    ConfigError,
    DatasetParseError,
    DimensionMismatchError,
    MomentFeasibilityError,
    StateSpaceError,
    SingularBasisError,
)


@dataclass(frozen=True)
class Command:
    name: str
    description: str
    add_arguments: Callable[[ConfigArgumentParser], None]
    run: Callable[[argparse.Namespace, RunConfig], str]


def _add_common_arguments(parser: ConfigArgumentParser, out_help: str) -> None:
    parser.add_config_argument("--steps", type=int, default=1000, help="Number of herding steps T.")
    parser.add_config_argument("--out", type=Path, default=None, help=out_help)
    parser.add_config_argument("--verbose", action="store_true", help="Enable verbose logging (DEBUG level).")


def _add_trace_arguments(parser: ConfigArgumentParser) -> None:
    parser.add_config_argument(
        "--snapshot-stride", type=int, default=DEFAULT_SNAPSHOT_STRIDE, help="Keep every k-th weight vector."
    )
    parser.add_config_argument(
        "--strict-pct", action="store_true", help="Abort with exit code 2 on the first PCT violation."
    )


def _setup_logging(verbose: bool) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(asctime)s.%(msecs)03d [%(levelname)s] %(name)s - %(message)s",
        datefmt="%Y-%m-%d %H:%M:%S",
    )


def _get_run_config(command: Command, argv: Sequence[str]) -> tuple[argparse.Namespace, RunConfig]:
    parser = ConfigArgumentParser(args=argv, prog=f"herding-box {command.name}", description=command.description)
    command.add_arguments(parser)
    args = parser.parse_args(argv)

    if getattr(args, "steps", 1) < 1:
        parser.error("--steps must be >= 1")
    if getattr(args, "snapshot_stride", 1) < 1:
        parser.error("--snapshot-stride must be >= 1")

    _setup_logging(args.verbose)
    unused = parser.unused_config_keys()
    if unused:
        log.warning("Ignoring unknown config keys %s", unused)
    config = RunConfig.from_namespace(command.name, args)
    log.debug("Resolved config: %s", config.to_json())
    return args, config


def _build_model(spec: str, moments_path: Path | None) -> tuple[FeatureMap, MomentVector]:
    """``random:D=..,K=..,seed=..,scale=..`` or ``one-of-d:D=..``; ``moments_path`` overrides the moments."""
    try:
        kind, params = ParamParser.parse_spec(spec)
    except ValueError as e:
        raise ConfigError(f"Invalid model spec '{spec}': {e}")
    moments: MomentVector | None = None
    if kind == "random":
        unknown = set(params) - {"D", "K", "seed", "scale"}
        if unknown:
            raise ConfigError(f"Unknown random model parameters {sorted(unknown)}")
        model = random_mrf(
            RandomModelSpec(
                int(params.get("D", 4)),  # type: ignore[call-overload]
                int(params.get("K", 2)),  # type: ignore[call-overload]
                int(params.get("seed", 0)),  # type: ignore[call-overload]
                float(params.get("scale", 1.0)),  # type: ignore[arg-type]
            )
        )
        fmap: FeatureMap = model.fmap
        moments = model.moments
    elif kind == "one-of-d":
        if "D" not in params:
            raise ConfigError("one-of-d model needs D")
        fmap = TableFeatureMap.one_of_d(int(params["D"]))  # type: ignore[call-overload]
    else:
        raise ConfigError(f"Unknown model kind '{kind}', expected 'random' or 'one-of-d'")
    if moments_path is not None:
        names, values = read_moments(moments_path)
        moments = MomentVector.for_features(fmap, values, Provenance.ANALYTIC, names=names)
    if moments is None:
        raise ConfigError(f"Model '{kind}' needs --moments")
    return fmap, moments


def _summary(command: str, trace: HerdingTrace, moments: MomentVector | None) -> str:
    error = (
        float(np.linalg.norm(trace.running_feature_sum / trace.steps - moments.values))
        if moments is not None and trace.steps
        else float("nan")
    )
    return (
        f"{command}: T={trace.steps} moment_error={error:.6g} "
        f"pct_violations={len(trace.pct_violations)} max_weight_norm={trace.max_weight_norm:.6g}"
    )


# herd


def _herd_arguments(parser: ConfigArgumentParser) -> None:
    parser.add_config_argument(
        "--model", type=str, default="random:D=4,K=2,seed=0", help="Model spec, e.g. random:D=4,K=2,seed=7."
    )
    parser.add_config_argument("--moments", type=Path, default=None, help="CSV with name,value moment rows.")
    parser.add_config_argument("--w0", type=str, default=None, help="Initial weights (default: the moments).")
    parser.add_config_argument(
        "--maximizer",
        type=str,
        default=ExactEnumerationMaximizer.kind,
        help=f"Maximizer kind, one of {MaximizerRegistry.kinds()}.",
    )
    parser.add_config_argument("--max-sweeps", type=int, default=DEFAULT_MAX_SWEEPS, help="Coordinate ascent sweeps.")
    parser.add_config_argument("--report", type=Path, default=None, help="Also write a diagnostics report JSON.")
    _add_common_arguments(parser, "Trace CSV path.")
    _add_trace_arguments(parser)


def _run_herd(args: argparse.Namespace, config: RunConfig) -> str:
    fmap, moments = _build_model(args.model, args.moments)
    w0 = ParamParser.parse_vector(args.w0) if args.w0 else None
    maximizer = MaximizerRegistry.create(args.maximizer, {"max_sweeps": args.max_sweeps})
    trace = herd_run(
        w0,
        moments,
        fmap,
        maximizer,
        args.steps,
        TraceConfig(snapshot_stride=args.snapshot_stride, strict_pct=args.strict_pct),
    )
    if args.out is not None:
        write_trace(trace, args.out, config)
    if args.report is not None:
        write_report(diagnose(trace, moments, fmap).to_dict(), args.report, config)
    return _summary("herd", trace, moments)


# neuron


def _neuron_arguments(parser: ConfigArgumentParser) -> None:
    parser.add_config_argument("--pi", type=ParamParser.parse_constant, default=0.5, help="Target firing rate.")
    parser.add_config_argument("--w0", type=ParamParser.parse_constant, default=0.0, help="Initial weight.")
    parser.add_config_argument(
        "--window", type=int, default=None, help="Report the largest count discrepancy over windows of this length."
    )
    _add_common_arguments(parser, "CSV with step, bit and weight columns.")


def _run_neuron(args: argparse.Namespace, config: RunConfig) -> str:
    neuron = NeuronConfig(args.pi, args.w0)
    run = neuron_run(neuron, args.steps)
    if args.out is not None:
        frame = pd.DataFrame({"step": np.arange(1, args.steps + 1), "bit": run.bits, "w": run.weights[1:]})
        write_table(frame, args.out, config)
    rate_error = abs(float(np.mean(run.bits)) - neuron.pi)
    summary = f"neuron: T={args.steps} rate_error={rate_error:.6g} final_weight={run.final_weight:.17g}"
    if args.window is not None:
        if not 1 <= args.window <= args.steps:
            raise ConfigError(f"--window must lie in 1..{args.steps}")
        summary += f" max_window_discrepancy={max_window_discrepancy(run.bits, neuron.pi, args.window):.6g}"
    return summary


# multinomial


def _multinomial_arguments(parser: ConfigArgumentParser) -> None:
    parser.add_config_argument("--pi", type=str, required=True, help="Probability vector, e.g. 1/2,1/3,1/6.")
    parser.add_config_argument("--w0", type=str, default=None, help="Initial weights (default: pi).")
    _add_common_arguments(parser, "CSV with step, state and max-norm columns.")


def _run_multinomial(args: argparse.Namespace, config: RunConfig) -> str:
    try:
        pi = ParamParser.parse_vector(args.pi)
        w0 = ParamParser.parse_vector(args.w0) if args.w0 else None
    except ValueError as e:
        raise ConfigError(str(e))
    multinomial = MultinomialConfig(pi, w0)
    run = multinomial_run(multinomial, args.steps)
    if args.out is not None:
        frame = pd.DataFrame(
            {"step": np.arange(1, args.steps + 1), "state": run.states, "w_inf_norm": run.weight_inf_norms[1:]}
        )
        write_table(frame, args.out, config)
    error = float(np.max(np.abs(run.counts(multinomial.size) / args.steps - multinomial.pi)))
    return (
        f"multinomial: T={args.steps} moment_error={error:.6g} "
        f"max_weight_inf_norm={float(np.max(run.weight_inf_norms)):.6g}"
    )


# bifurcate


def _bifurcate_arguments(parser: ConfigArgumentParser) -> None:
    parser.add_config_argument("--model", type=str, default="random:D=4,K=2,seed=7", help="Model spec.")
    parser.add_config_argument("--moments", type=Path, default=None, help="CSV with name,value moment rows.")
    parser.add_config_argument(
        "--t-grid", type=str, default="0.05:0.5:200", help="Temperatures as start:stop:count or a list."
    )
    parser.add_config_argument("--burn-in", type=int, default=5000, help="Steps discarded before period detection.")
    parser.add_config_argument("--max-period", type=int, default=MAX_PERIOD, help="Largest detectable period.")
    parser.add_config_argument(
        "--consecutive", type=int, default=PERIOD_CONSECUTIVE, help="Matching steps required for a period."
    )
    parser.add_config_argument("--workers", type=int, default=1, help="Temperatures scanned in parallel.")
    parser.add_config_argument(
        "--attractor-out", type=Path, default=None, help="CSV of distinct attractor points per temperature."
    )
    parser.add_config_argument("--out", type=Path, default=None, help="CSV of temperature and detected period.")
    parser.add_config_argument("--verbose", action="store_true", help="Enable verbose logging (DEBUG level).")


def _run_bifurcate(args: argparse.Namespace, config: RunConfig) -> str:
    fmap, moments = _build_model(args.model, args.moments)
    try:
        temperatures = ParamParser.parse_grid(args.t_grid)
    except ValueError as e:
        raise ConfigError(str(e))
    if args.burn_in < 0 or args.max_period < 1 or args.consecutive < 1 or args.workers < 1:
        raise ConfigError("--burn-in must be >= 0; --max-period, --consecutive and --workers >= 1")
    points = bifurcation_scan(
        moments,
        fmap,
        temperatures,
        burn_in=args.burn_in,
        max_period=args.max_period,
        consecutive=args.consecutive,
        max_workers=args.workers,
    )
    if args.out is not None:
        frame = pd.DataFrame(
            {
                "temperature": [p.temperature for p in points],
                "period": pd.array([p.period for p in points], dtype="Int64"),
            }
        )
        write_table(frame, args.out, config)
    if args.attractor_out is not None:
        rows = [
            [point.temperature, *representative]
            for point in points
            for representative in cluster_points(point.attractor)
        ]
        columns = ["temperature", *(f"w{k}" for k in range(fmap.dim))]
        write_table(pd.DataFrame(rows, columns=columns), args.attractor_out, config)
    periodic = [p.period for p in points if p.period is not None]
    return (
        f"bifurcate: temperatures={len(points)} periodic={len(periodic)} "
        f"max_period={max(periodic) if periodic else 'none'}"
    )


# pomrf


def _pomrf_arguments(parser: ConfigArgumentParser) -> None:
    parser.add_config_argument("--data", type=Path, required=True, help="CSV of +-1 visible data.")
    parser.add_config_argument("--hidden", type=int, default=2, help="Number of hidden units.")
    parser.add_config_argument(
        "--variant", type=str, default=str(Variant.FULL), help="'full' or 'tractable' joint maximization."
    )
    parser.add_config_argument(
        "--maximizer", type=str, default=ExactEnumerationMaximizer.kind, help="Maximizer kind for the imputations."
    )
    parser.add_config_argument(
        "--joint-maximizer",
        type=str,
        default=None,
        help="Maximizer kind for the joint sample (default: exact for full, coordinate ascent for tractable).",
    )
    parser.add_config_argument("--max-sweeps", type=int, default=DEFAULT_MAX_SWEEPS, help="Coordinate ascent sweeps.")
    parser.add_config_argument("--minibatch", type=int, default=None, help="Cases per step (default: all).")
    parser.add_config_argument("--workers", type=int, default=1, help="Threads for the per-case imputations.")
    _add_common_arguments(parser, "Trace CSV path.")
    _add_trace_arguments(parser)


def _run_pomrf(args: argparse.Namespace, config: RunConfig) -> str:
    data = read_dataset(args.data)
    if isinstance(data, LabeledDataset):
        raise ConfigError(f"{args.data}: POMRF herding needs unlabelled +-1 data")
    if args.hidden < 0 or args.workers < 1:
        raise ConfigError("--hidden must be >= 0 and --workers >= 1")
    variant = Variant(args.variant)
    fmap = rbm_features(data.shape[1], args.hidden)
    problem = PomrfProblem(data, fmap)
    parameters = {"max_sweeps": args.max_sweeps}
    maximizer = MaximizerRegistry.create(args.maximizer, parameters)
    joint_kind = args.joint_maximizer or (
        ExactEnumerationMaximizer.kind if variant == Variant.FULL else "coordinate-ascent"
    )
    joint = MaximizerRegistry.create(joint_kind, parameters)
    trace_config = TraceConfig(snapshot_stride=args.snapshot_stride, strict_pct=args.strict_pct)
    executor = futures.ThreadPoolExecutor(max_workers=args.workers) if args.workers > 1 else None
    try:
        result = pomrf_run(
            problem,
            None,
            args.steps,
            maximizer,
            joint,
            variant=variant,
            trace_config=trace_config,
            minibatch=args.minibatch,
            executor=executor,
        )
    finally:
        if executor is not None:
            executor.shutdown()
    entropy = hidden_marginal_entropy(result.imputations) if args.hidden else np.zeros(0)
    if args.out is not None:
        write_trace(
            result.trace,
            args.out,
            config,
            positive_feature_sum=result.positive_feature_sum,
            hidden_entropy=entropy,
        )
    trace = result.trace
    return (
        f"pomrf: T={trace.steps} moment_gap={float(np.max(result.moment_gap())):.6g} "
        f"pct_violations={len(trace.pct_violations)} max_weight_norm={trace.max_weight_norm:.6g}"
    )


# cond

_SYNTHETIC_DATASETS = {"separable": separable_dataset, "banana": banana_dataset, "xor": xor_dataset}


def _synthetic_dataset(spec: str) -> LabeledDataset:
    try:
        kind, params = ParamParser.parse_spec(spec)
    except ValueError as e:
        raise ConfigError(f"Invalid dataset spec '{spec}': {e}")
    factory = _SYNTHETIC_DATASETS.get(kind)
    if factory is None:
        raise ConfigError(f"Unknown dataset '{kind}', expected one of {sorted(_SYNTHETIC_DATASETS)}")
    n_cases = int(params.pop("n", 200))  # type: ignore[call-overload]
    try:
        return factory(n_cases, **params)  # type: ignore[operator]
    except TypeError as e:
        raise ConfigError(f"Invalid parameters for dataset '{kind}': {e}")


def _cond_arguments(parser: ConfigArgumentParser) -> None:
    parser.add_config_argument("--train", type=Path, default=None, help="Labelled training CSV.")
    parser.add_config_argument("--test", type=Path, default=None, help="Labelled test CSV.")
    parser.add_config_argument(
        "--dataset", type=str, default=None, help="Synthetic data instead of --train, e.g. xor:n=200,seed=1."
    )
    parser.add_config_argument(
        "--test-fraction", type=float, default=None, help="Hold out this fraction of the training data."
    )
    parser.add_config_argument(
        "--procedure", type=str, default=str(Procedure.JOINT), help="'joint' or 'one-vs-all'."
    )
    parser.add_config_argument("--hidden", type=int, default=20, help="Number of hidden units.")
    parser.add_config_argument("--minibatch", type=int, default=None, help="Cases per step (default: all).")
    parser.add_config_argument("--burn-in", type=int, default=1000, help="Steps before test votes are collected.")
    parser.add_config_argument("--init-scale", type=float, default=1.0, help="Scale of the random initial weights.")
    parser.add_config_argument("--learning-rate", type=float, default=1.0, help="Update step size.")
    parser.add_config_argument(
        "--no-rescale", action="store_true", help="Do not divide scale and rate by block sizes."
    )
    parser.add_config_argument("--no-label-bias", action="store_true", help="Drop the label bias block.")
    parser.add_config_argument("--no-direct", action="store_true", help="Drop the direct input-label block.")
    parser.add_config_argument(
        "--entropy-lambda", type=float, default=0.0, help="Initial strength of the hidden-bias entropy term."
    )
    parser.add_config_argument(
        "--normalize", action="store_true", help="Append a feature that gives every input the same norm."
    )
    parser.add_config_argument("--seed", type=int, default=0, help="Seed of the initial weights and data split.")
    parser.add_config_argument("--report", type=Path, default=None, help="Run summary JSON.")
    parser.add_config_argument(
        "--strict-pct", action="store_true", help="Abort with exit code 2 on the first PCT violation."
    )
    _add_common_arguments(parser, "CSV of training errors per step and herder.")


def _run_cond(args: argparse.Namespace, config: RunConfig) -> str:
    if (args.train is None) == (args.dataset is None):
        raise ConfigError("Give exactly one of --train and --dataset")
    if args.dataset is not None:
        train = _synthetic_dataset(args.dataset)
    else:
        loaded = read_dataset(args.train)
        if not isinstance(loaded, LabeledDataset):
            raise ConfigError(f"{args.train}: conditional herding needs a 'label' column")
        train = loaded
    test: LabeledDataset | None = None
    if args.test is not None:
        loaded = read_dataset(args.test)
        if not isinstance(loaded, LabeledDataset):
            raise ConfigError(f"{args.test}: conditional herding needs a 'label' column")
        test = loaded
    elif args.test_fraction is not None:
        train, test = train.split(args.test_fraction, args.seed)
    if args.normalize:
        train, r_max = augment_normalization_feature(train)
        if test is not None:
            test, _ = augment_normalization_feature(test, r_max)

    cond = CondConfig(
        procedure=Procedure(args.procedure),
        hidden=args.hidden,
        minibatch=args.minibatch,
        burn_in=args.burn_in,
        init_scale=args.init_scale,
        learning_rate=args.learning_rate,
        rescale=not args.no_rescale,
        label_bias=not args.no_label_bias,
        direct=not args.no_direct,
        entropy_lambda=args.entropy_lambda,
        strict_pct=args.strict_pct,
        seed=args.seed,
    )
    result = cond_run(train, test, cond, args.steps)
    if args.out is not None:
        frame = pd.DataFrame(
            {f"herder{i}": pd.Series(errors, dtype="Int64") for i, errors in enumerate(result.training_errors)}
        )
        frame.insert(0, "step", np.arange(1, len(frame) + 1))
        write_table(frame, args.out, config)
    if args.report is not None:
        report = {
            "stop_reason": result.stop_reason,
            "steps": result.steps,
            "test_error": result.test_error,
            "pct_violations": result.pct_violations,
            "votes": result.votes.steps,
            "herders": [
                {
                    "updates": herder.updates,
                    "converged": herder.converged,
                    "final_training_error": herder.errors[-1] if herder.errors else None,
                    "max_weight_inf_norm": herder.max_weight_inf_norm,
                    "moment_gap": (
                        float(np.max(np.abs(herder.positive_sum - herder.negative_sum))) / herder.updates
                        if herder.updates
                        else 0.0
                    ),
                }
                for herder in result.herders
            ],
        }
        write_report(report, args.report, config)
    test_error = "n/a" if result.test_error is None else f"{result.test_error:.6g}"
    return (
        f"cond: steps={result.steps} stop={result.stop_reason} test_error={test_error} "
        f"pct_violations={result.pct_violations}"
    )


# ising


def _ising_arguments(parser: ConfigArgumentParser) -> None:
    parser.add_config_argument("--height", type=int, default=32, help="Lattice rows.")
    parser.add_config_argument("--width", type=int, default=32, help="Lattice columns.")
    parser.add_config_argument("--open-boundary", action="store_true", help="No periodic wrap-around edges.")
    parser.add_config_argument(
        "--beta", type=float, default=BETA_CRITICAL, help="Inverse temperature of the target model."
    )
    parser.add_config_argument(
        "--edge-moment", type=float, default=None, help="Target edge moment (default: estimated at --beta)."
    )
    parser.add_config_argument(
        "--sw-steps", type=int, default=10000, help="Swendsen-Wang samples for the edge moment estimate."
    )
    parser.add_config_argument("--sw-burn-in", type=int, default=100, help="Swendsen-Wang burn-in sweeps.")
    parser.add_config_argument("--seed", type=int, default=0, help="Swendsen-Wang seed.")
    parser.add_config_argument(
        "--max-sweeps", type=int, default=DEFAULT_ISING_SWEEPS, help="Coordinate ascent sweeps per step."
    )
    parser.add_config_argument(
        "--histogram-out", type=Path, default=None, help="CSV of connected component size counts."
    )
    _add_common_arguments(parser, "Trace CSV path.")
    _add_trace_arguments(parser)


def _run_ising(args: argparse.Namespace, config: RunConfig) -> str:
    lattice = IsingLattice(args.height, args.width, periodic=not args.open_boundary)
    edge_moment = args.edge_moment
    if edge_moment is None:
        if lattice.n_sites <= MAX_EXACT_SITES:
            edge_moment = exact_edge_moment(lattice, args.beta)
        else:
            estimate = swendsen_wang_sample(lattice, args.beta, args.sw_steps, args.seed, args.sw_burn_in)
            log.info("Swendsen-Wang edge moment %.6g +- %.2g", estimate.edge_moment, estimate.standard_error)
            edge_moment = estimate.edge_moment
    ising = IsingConfig(
        lattice,
        edge_moment=edge_moment,
        max_sweeps=args.max_sweeps,
        snapshot_stride=args.snapshot_stride,
        strict_pct=args.strict_pct,
    )
    trace, _, moments = ising_herd_run(ising, args.steps)
    if args.out is not None:
        write_trace(trace, args.out, config, edge_moment=edge_moment)
    histogram = component_size_histogram(trace.samples, lattice)
    if args.histogram_out is not None:
        frame = pd.DataFrame({"size": histogram.sizes, "count": histogram.counts})
        write_table(frame, args.histogram_out, config, slope=histogram.slope)
    slope = "n/a" if histogram.slope is None else f"{histogram.slope:.4g}"
    return f"{_summary('ising', trace, moments)} component_slope={slope}"


# diagnose


def _diagnose_arguments(parser: ConfigArgumentParser) -> None:
    parser.add_config_argument("--trace", type=Path, required=True, help="Trace CSV written by another command.")
    parser.add_config_argument(
        "--model", type=str, default=None, help="Model spec for the moment error (default: from the trace config)."
    )
    parser.add_config_argument("--moments", type=Path, default=None, help="CSV with name,value moment rows.")
    parser.add_config_argument("--t-max", type=int, default=20, help="Largest autocorrelation lag.")
    parser.add_config_argument("--l-max", type=int, default=20, help="Longest subsequence length.")
    parser.add_config_argument("--norm-stride", type=int, default=1, help="Keep every k-th weight norm.")
    parser.add_config_argument("--report", type=Path, default=None, help="Report JSON path.")
    parser.add_config_argument("--verbose", action="store_true", help="Enable verbose logging (DEBUG level).")


def _run_diagnose(args: argparse.Namespace, config: RunConfig) -> str:
    if args.t_max < 0 or args.l_max < 0 or args.norm_stride < 1:
        raise ConfigError("--t-max and --l-max must be >= 0, --norm-stride >= 1")
    try:
        trace, meta = read_trace(args.trace)
    except (OSError, KeyError, ValueError) as e:
        raise DatasetParseError(f"Could not read trace {args.trace}: {e}")
    source = RunConfig.from_dict(meta.get("config") or {})
    model = args.model or (source.get("model") if source.command == "herd" else None)
    moments_path = args.moments or (Path(source.get("moments")) if source.get("moments") else None)
    fmap: FeatureMap | None = None
    moments: MomentVector | None = None
    if model is not None:
        fmap, moments = _build_model(model, moments_path)
    report = diagnose(trace, moments, fmap, t_max=args.t_max, l_max=args.l_max, norm_stride=args.norm_stride)
    if args.report is not None:
        write_report(report.to_dict(), args.report, config)
    error = "n/a"
    if report.moment_error_curve is not None:
        error = f"{float(report.moment_error_curve.l2[-1]):.6g}"
    period = "aperiodic" if report.period is None else str(report.period)
    return (
        f"diagnose: T={trace.steps} moment_error={error} period={period} "
        f"pct_violations={report.pct_summary['violations']} max_weight_norm={trace.max_weight_norm:.6g}"
    )


COMMANDS: dict[str, Command] = {
    command.name: command
    for command in (
        Command("herd", "Herd a fully visible model.", _herd_arguments, _run_herd),
        Command("neuron", "Herd a single binary neuron.", _neuron_arguments, _run_neuron),
        Command("multinomial", "Herd a discrete distribution.", _multinomial_arguments, _run_multinomial),
        Command("bifurcate", "Scan periods of the finite-temperature map.", _bifurcate_arguments, _run_bifurcate),
        Command("pomrf", "Herd a model with hidden units from visible data.", _pomrf_arguments, _run_pomrf),
        Command("cond", "Train a classifier by conditional herding.", _cond_arguments, _run_cond),
        Command("ising", "Herd a 2-D Ising model.", _ising_arguments, _run_ising),
        Command("diagnose", "Compute diagnostics of a written trace.", _diagnose_arguments, _run_diagnose),
    )
}


def _usage() -> str:
    lines = ["usage: herding-box <command> [options]", "", "commands:"]
    lines.extend(f"  {name:<12} {command.description}" for name, command in COMMANDS.items())
    return "\n".join(lines)


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv or argv[0] in {"-h", "--help"}:
        print(_usage())
        return EXIT_OK if argv else EXIT_CONFIG
    command = COMMANDS.get(argv[0])
    if command is None:
        print(f"Unknown command '{argv[0]}'\n{_usage()}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        args, config = _get_run_config(command, argv[1:])
    except ConfigError:
        return EXIT_CONFIG
    except SystemExit as e:
        # --help
        return EXIT_OK if e.code in (None, 0) else EXIT_CONFIG

    try:
        summary = command.run(args, config)
    except INPUT_ERRORS as e:
        log.error("Invalid input: %s", e)
        return EXIT_CONFIG
    except HerdingError as e:
        log.error("Run failed: %s", e)
        return EXIT_RUNTIME
    except (ValueError, OSError) as e:
        log.error("Invalid input: %s", e)
        return EXIT_CONFIG
    print(summary)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
