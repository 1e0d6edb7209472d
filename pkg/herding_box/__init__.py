"""
Initialization of the herding-box package.
Exposes the herding engine, its models and diagnostics at package level.
"""

try:
    from importlib.metadata import version

    __version__ = version("herding-box")
except Exception:
    __version__ = "0.0.0.dev0"

# fmt: off
# isort: skip_file
from .exceptions import (
    ConfigError,
    DatasetParseError,
    DimensionMismatchError,
    HerdingError,
    MomentFeasibilityError,
    MonotonicityError,
    NonEnumerableError,
    NonFiniteWeightError,
    PctViolationError,
    SingularBasisError,
    StateSpaceError,
)
from .state_space import State, StateSpace
from .feature_map import FeatureMap, TableFeatureMap
from .moments import MomentVector, Provenance
from .maximizer import (
    CoordinateAscentMaximizer,
    DataInitializedMaximizer,
    ExactEnumerationMaximizer,
    Maximizer,
    PersistentCoordinateAscentMaximizer,
)
from .maximizer_registry import MaximizerRegistry
from .trace import HerdingTrace, TraceConfig
from .engine import herd_run, herd_step, pct_violated, tipi_value
from .temperature import bifurcation_scan, detect_period, expected_features_at_temperature
from .scalar import MultinomialConfig, NeuronConfig, multinomial_run, neuron_run
from .latent import PomrfProblem, pomrf_run, pomrf_step, tractable_pomrf_step
from .conditional import CondConfig, CondModel, LabeledDataset, cond_predict_step, cond_run, cond_step
from .diagnostics import DiagReport, diagnose
from .config import RunConfig
# fmt: on

__all__ = [
    "ConfigError",
    "DatasetParseError",
    "DimensionMismatchError",
    "HerdingError",
    "MomentFeasibilityError",
    "MonotonicityError",
    "NonEnumerableError",
    "NonFiniteWeightError",
    "PctViolationError",
    "SingularBasisError",
    "StateSpaceError",
    "State",
    "StateSpace",
    "FeatureMap",
    "TableFeatureMap",
    "MomentVector",
    "Provenance",
    "Maximizer",
    "ExactEnumerationMaximizer",
    "CoordinateAscentMaximizer",
    "PersistentCoordinateAscentMaximizer",
    "DataInitializedMaximizer",
    "MaximizerRegistry",
    "HerdingTrace",
    "TraceConfig",
    "herd_run",
    "herd_step",
    "pct_violated",
    "tipi_value",
    "bifurcation_scan",
    "detect_period",
    "expected_features_at_temperature",
    "MultinomialConfig",
    "NeuronConfig",
    "multinomial_run",
    "neuron_run",
    "PomrfProblem",
    "pomrf_run",
    "pomrf_step",
    "tractable_pomrf_step",
    "CondConfig",
    "CondModel",
    "LabeledDataset",
    "cond_predict_step",
    "cond_run",
    "cond_step",
    "DiagReport",
    "diagnose",
    "RunConfig",
    "__version__",
]
