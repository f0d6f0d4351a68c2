"""Binary linear classifier: class-weighted hinge SGD plus an F-tuned threshold.

Training minimizes ``lambda/2 * ||w||^2 + (1/n) * sum_i cw_i * hinge_i``
by seeded stochastic subgradient descent, where ``cw_i`` is ``w`` for
positive instances and 1 for negatives, and ``lambda = 1 / (c * n)``.
The intercept stays at zero during descent; after the weights converge,
the decision threshold is chosen to maximize F-score on the training
scores themselves.  The candidate grid is every distinct training score
plus 0.0, so the tuned threshold can never score below the fixed-zero
threshold, and ties break toward the lower threshold (higher recall).

Prediction is ``score = <w, x> + bias`` with the positive label assigned
iff ``score >= threshold``; feature ids the model has never seen
contribute zero.  Training is bit-deterministic for a fixed seed.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .features import FeatureRegistry, FeatureVector


class DegenerateTrainingError(ValueError):
    """Training data does not contain both classes."""


class TrainingError(RuntimeError):
    """Optimization produced non-finite weights."""


class ModelFormatError(ValueError):
    """A model file violates the versioned text format."""


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters for hinge-SGD training.

    ``c`` scales inverse regularization (lambda = 1/(c*n)); ``w``
    multiplies the loss of positive instances.
    """

    c: float = 20.0
    w: float = 3.0
    epochs: int = 50
    eta0: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.c <= 0:
            raise ValueError("c must be positive")
        if self.w <= 0:
            raise ValueError("w must be positive")
        if self.epochs < 1:
            raise ValueError("epochs must be at least 1")
        if self.eta0 <= 0:
            raise ValueError("eta0 must be positive")


@dataclass
class LinearModel:
    """Dense weight vector indexed by feature id, plus bias and threshold."""

    weights: np.ndarray
    bias: float
    threshold: float

    def decision(self, vector: FeatureVector) -> float:
        """Raw score for one feature vector; unknown ids contribute 0."""
        ids, values = vector.as_arrays()
        known = ids < len(self.weights)
        return float(np.dot(self.weights[ids[known]], values[known]) + self.bias)

    def predict(self, vector: FeatureVector) -> tuple[float, int]:
        """(score, label): label is 1 iff score >= threshold (inclusive)."""
        score = self.decision(vector)
        return score, int(score >= self.threshold)


def _f_score(tp: int, fp: int, fn: int) -> float:
    denominator = 2 * tp + fp + fn
    return 2 * tp / denominator if denominator else 0.0


def tune_threshold(
    scores: np.ndarray, labels: np.ndarray
) -> tuple[float, float]:
    """F-maximizing threshold over all distinct scores plus 0.0.

    Returns (threshold, best F).  Predictions count an instance positive
    when its score is >= the threshold.  Ties in F break toward the
    lowest threshold, which prefers recall.
    """
    scores = np.asarray(scores, dtype=np.float64)
    positive = np.asarray(labels).astype(bool)
    candidates = np.unique(np.concatenate([scores, [0.0]]))
    best_threshold = 0.0
    best_f = -1.0
    for threshold in candidates:
        predicted = scores >= threshold
        tp = int(np.sum(predicted & positive))
        fp = int(np.sum(predicted & ~positive))
        fn = int(np.sum(~predicted & positive))
        f = _f_score(tp, fp, fn)
        if f > best_f:
            best_f = f
            best_threshold = float(threshold)
    return best_threshold, best_f


def train(
    instances: Sequence[tuple[FeatureVector, int]],
    config: TrainConfig = TrainConfig(),
) -> LinearModel:
    """Train a linear model on (feature vector, label in {0, 1}) pairs.

    Raises :class:`DegenerateTrainingError` unless both classes are
    present.  Two calls with identical data and seed produce bit-identical
    weights.
    """
    n = len(instances)
    labels = np.array([int(label) for _, label in instances])
    if not ((labels == 1).any() and (labels == 0).any()):
        raise DegenerateTrainingError("training data must contain both classes")

    dimension = 0
    prepared = []
    for vector, label in instances:
        ids, values = vector.as_arrays()
        if len(ids):
            dimension = max(dimension, int(ids[-1]) + 1)
        y = 1.0 if label == 1 else -1.0
        class_weight = config.w if label == 1 else 1.0
        prepared.append((ids, values, y, class_weight))

    weights = np.zeros(dimension, dtype=np.float64)
    lam = 1.0 / (config.c * n)
    rng = np.random.default_rng(config.seed)
    step = 0
    for epoch in range(config.epochs):
        for index in rng.permutation(n):
            ids, values, y, class_weight = prepared[index]
            eta = config.eta0 / (1.0 + config.eta0 * lam * step)
            margin = y * np.dot(weights[ids], values)
            weights *= 1.0 - eta * lam
            if margin < 1.0:
                weights[ids] += (eta * class_weight) * y * values
            step += 1
        if not np.all(np.isfinite(weights)):
            raise TrainingError(f"non-finite weights after epoch {epoch}")

    scores = np.array(
        [np.dot(weights[ids], values) for ids, values, _, _ in prepared]
    )
    threshold, _ = tune_threshold(scores, labels)
    return LinearModel(weights=weights, bias=0.0, threshold=threshold)


_MODEL_MAGIC = "incongruity-model"
_MODEL_VERSION = 1


def save_model(
    path: str | Path, model: LinearModel, registry: FeatureRegistry
) -> None:
    """Write the model as versioned text.

    Floats use ``repr`` so a load reproduces them exactly.  The registry's
    full name list is stored (one name per id, in id order) followed by
    the nonzero id/weight pairs, the bias, and the threshold.
    """
    names = registry.names
    if len(names) < len(model.weights):
        raise ValueError("registry does not cover every weight id")
    lines = [
        f"{_MODEL_MAGIC} v{_MODEL_VERSION}",
        f"dim {len(model.weights)}",
        f"bias {float(model.bias)!r}",
        f"threshold {float(model.threshold)!r}",
        f"names {len(names)}",
    ]
    lines.extend(names)
    nonzero = np.flatnonzero(model.weights)
    lines.append(f"weights {len(nonzero)}")
    lines.extend(f"{int(i)} {float(model.weights[i])!r}" for i in nonzero)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_model(path: str | Path) -> tuple[LinearModel, FeatureRegistry]:
    """Read a model file back into a model and a frozen registry."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    try:
        if lines[0] != f"{_MODEL_MAGIC} v{_MODEL_VERSION}":
            raise ModelFormatError(f"unsupported model header {lines[0]!r}")
        dimension = int(_expect(lines[1], "dim"))
        bias = float(_expect(lines[2], "bias"))
        threshold = float(_expect(lines[3], "threshold"))
        name_count = int(_expect(lines[4], "names"))
        names = lines[5 : 5 + name_count]
        if len(names) != name_count:
            raise ModelFormatError("truncated name section")
        weight_header = 5 + name_count
        weight_count = int(_expect(lines[weight_header], "weights"))
        weights = np.zeros(dimension, dtype=np.float64)
        for line in lines[weight_header + 1 : weight_header + 1 + weight_count]:
            fid_text, _, value_text = line.partition(" ")
            weights[int(fid_text)] = float(value_text)
    except (IndexError, ValueError) as exc:
        if isinstance(exc, ModelFormatError):
            raise
        raise ModelFormatError(f"malformed model file {path}") from exc
    registry = FeatureRegistry()
    for name in names:
        registry.intern(name)
    registry.freeze()
    return LinearModel(weights=weights, bias=bias, threshold=threshold), registry


def _expect(line: str, key: str) -> str:
    prefix = key + " "
    if not line.startswith(prefix):
        raise ModelFormatError(f"expected '{key} ...' line, found {line!r}")
    return line[len(prefix) :]
