"""Semi-supervised self-organizing map for clustering and classification.

The map grows prototype nodes with per-dimension relevance weights, learns
from labeled and unlabeled patterns alike (switching per pattern between an
attraction/repulsion scheme and plain competitive learning), and classifies
with a labeled-fallback search that can reject uncovered patterns. The
package also ships the evaluation harness: dataset loading, label masking,
repeated k-fold splits, Latin Hypercube parameter sweeps and CSV reporting.
"""

from .data import (DataFormatError, Dataset, FoldPlan, NormStats, apply_norm,
                   kfold_split, load_arff, load_csv, mask_labels, normalize)
from .experiments import (DEFAULT_RANGES, FRACTIONS, CurvePoint, ParamRange,
                          RunResult, best_per_fold, emit_curve,
                          emit_curve_svg, emit_results, lhs_sample, lhs_unit,
                          mean_std, resolve_sample, run_one, run_sweep,
                          summarize_curve)
from .inference import REJECTED, Prediction, classify, classify_batch, cluster
from .model import (ACTIVATION_EPS, NO_CLASS, HyperParams, MapFullError,
                    Node, SomMap, activation, compute_relevances, connected,
                    update_node, weighted_distance)
from .persistence import TrainedModel, load_model, save_model
from .training import (TrainState, TrainStats, convergence_phase, handle_reset,
                       init_map, insert_node, supervised_step, train,
                       train_with_state, unsupervised_step)

__version__ = "0.1.0"

__all__ = [
    "ACTIVATION_EPS", "CurvePoint", "DEFAULT_RANGES", "DataFormatError",
    "Dataset", "FRACTIONS", "FoldPlan", "HyperParams", "MapFullError",
    "NO_CLASS", "Node", "NormStats", "ParamRange", "Prediction", "REJECTED",
    "RunResult", "SomMap", "TrainState", "TrainStats", "TrainedModel",
    "activation", "apply_norm", "best_per_fold", "classify", "classify_batch",
    "cluster", "compute_relevances", "connected", "convergence_phase",
    "emit_curve", "emit_curve_svg", "emit_results", "handle_reset",
    "init_map", "insert_node", "kfold_split", "lhs_sample", "lhs_unit",
    "load_arff", "load_csv", "load_model", "mask_labels", "mean_std",
    "normalize", "resolve_sample", "run_one", "run_sweep", "save_model",
    "summarize_curve", "supervised_step", "train", "train_with_state",
    "unsupervised_step", "update_node", "weighted_distance",
]
