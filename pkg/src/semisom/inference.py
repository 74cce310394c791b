"""Cluster assignment and classification over a trained map."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import NO_CLASS, SomMap

# Classification outcome when no labeled node is activated above threshold.
REJECTED = -2


@dataclass(frozen=True)
class Prediction:
    """Outcome of classifying one pattern.

    Attributes:
        node: Index of the node that produced the label, or ``None`` when
            the pattern was rejected.
        label: Predicted class id, or ``REJECTED``.
        activation: Activation of ``node``; for rejections, the activation
            of the overall winner.
    """

    node: int | None
    label: int
    activation: float


def cluster(som: SomMap, x: np.ndarray, a_t: float) -> tuple[int, float] | None:
    """Assign ``x`` to the most activated node, or ``None`` for outliers.

    A pattern is an outlier when even the winner's activation stays below
    ``a_t``.
    """
    winner, act = som.find_winner(x)
    if act < a_t:
        return None
    return winner, act


def classify(som: SomMap, x: np.ndarray, a_t: float) -> Prediction:
    """Predict a class label for ``x``.

    A labeled winner decides immediately, at any activation. An unlabeled
    winner defers to the most activated labeled node that still reaches
    ``a_t``. When no such node exists the pattern is rejected; a rejection
    is never silently mapped to a class.
    """
    acts = som.activations(x)
    winner = int(np.argmax(acts))
    labels = som.labels
    if labels[winner] != NO_CLASS:
        return Prediction(winner, int(labels[winner]), float(acts[winner]))
    ok = (labels != NO_CLASS) & (acts >= a_t)
    if ok.any():
        idx = np.flatnonzero(ok)
        j = int(idx[np.argmax(acts[idx])])
        return Prediction(j, int(labels[j]), float(acts[j]))
    return Prediction(None, REJECTED, float(acts[winner]))


def classify_batch(som: SomMap, patterns: np.ndarray,
                   a_t: float) -> list[Prediction]:
    """Classify each row of ``patterns``."""
    return [classify(som, x, a_t) for x in np.asarray(patterns, dtype=float)]
