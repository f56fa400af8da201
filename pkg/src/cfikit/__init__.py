"""cfikit: importance values for the feature changes in a counterfactual
explanation, with deterministic SVG charts and a subprocess model bridge.
"""

from .core import (
    Delta,
    ExplanationCase,
    FeatureValue,
    Instance,
    Orientation,
    apply_changes,
    compute_delta,
    load_instance,
    orient,
)
from .countershapley import (
    CoalitionMap,
    CounterShapleyValues,
    build_coalition_map,
    countershapley_value,
    countershapley_values,
    permutation_oracle,
)
from .errors import CfiError
from .greedy import GreedyResult, GreedyStep, greedy_cfi
from .models import (
    CachingModel,
    CountingModel,
    LinearModel,
    Model,
    ModelSpec,
    TableModel,
    TreeModel,
    load_model,
    parse_model_spec,
)
from .validation import ValidationReport, find_flipping_subsets, validate_counterfactual

__version__ = "0.1.0"

__all__ = [
    "CachingModel",
    "CfiError",
    "CoalitionMap",
    "CounterShapleyValues",
    "CountingModel",
    "Delta",
    "ExplanationCase",
    "FeatureValue",
    "GreedyResult",
    "GreedyStep",
    "Instance",
    "LinearModel",
    "Model",
    "ModelSpec",
    "Orientation",
    "TableModel",
    "TreeModel",
    "ValidationReport",
    "apply_changes",
    "build_coalition_map",
    "compute_delta",
    "countershapley_value",
    "countershapley_values",
    "find_flipping_subsets",
    "greedy_cfi",
    "load_instance",
    "load_model",
    "orient",
    "parse_model_spec",
    "permutation_oracle",
    "validate_counterfactual",
    "__version__",
]
