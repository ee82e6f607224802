"""Accuracy, prediction disagreement and run aggregation."""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np


class AggregateStats(NamedTuple):
    mean: float
    std: float
    count: int


@dataclass
class RunPair:
    result_original: "RunResult"  # noqa: F821
    result_khop: "RunResult"  # noqa: F821
    khop_graph: object = None

    def __post_init__(self):
        p1, p2 = self.result_original.probabilities, self.result_khop.probabilities
        if p1.shape != p2.shape:
            raise ValueError(f"paired runs disagree on shape: {p1.shape} vs {p2.shape}")


class DisagreementProfile(NamedTuple):
    mean_original: np.ndarray
    mean_khop: np.ndarray
    count: int


def accuracy(predicted, truth, mask=None) -> float:
    predicted, truth = np.asarray(predicted), np.asarray(truth)
    if predicted.shape != truth.shape:
        raise ValueError("prediction and truth lengths differ")
    mask = np.ones(truth.shape, dtype=bool) if mask is None else np.asarray(mask, dtype=bool)
    if not mask.any():
        raise ValueError("accuracy mask selects no nodes")
    return float(np.mean(predicted[mask] == truth[mask]))


def disagreement(pred1, pred2, mask=None) -> float:
    """Fraction of nodes whose predicted labels differ.

    The default is over all nodes; pass ``mask`` for the restricted variant.
    """
    pred1, pred2 = np.asarray(pred1), np.asarray(pred2)
    if pred1.shape != pred2.shape:
        raise ValueError(f"prediction lengths differ: {pred1.shape} vs {pred2.shape}")
    if pred1.size == 0:
        raise ValueError("empty prediction vectors")
    differ = pred1 != pred2
    if mask is not None:
        mask = np.asarray(mask, dtype=bool)
        if not mask.any():
            raise ValueError("disagreement mask selects no nodes")
        differ = differ[mask]
    return float(np.mean(differ))


def mean_probs_on_disagreed(pair: RunPair) -> DisagreementProfile | None:
    """Average class-probability rows of both models over the nodes where
    they disagree; ``None`` when they agree everywhere."""
    r1, r2 = pair.result_original, pair.result_khop
    idx = np.flatnonzero(r1.predictions != r2.predictions)
    if idx.size == 0:
        return None
    return DisagreementProfile(r1.probabilities[idx].mean(axis=0),
                               r2.probabilities[idx].mean(axis=0), int(idx.size))


def aggregate_runs(values) -> AggregateStats:
    """Mean and population standard deviation."""
    v = np.asarray(list(values), dtype=np.float64)
    if v.size == 0:
        raise ValueError("cannot aggregate an empty list of runs")
    return AggregateStats(float(v.mean()), float(v.std()), int(v.size))
