"""Corpus ingestion, stratified cross-validation, experiment grid, reports.

The harness runs feature configurations over a labeled corpus with
stratified k-fold cross-validation.  Within each fold the feature
registry is fit on training instances only and frozen before test
extraction, so no feature id can originate in test data.  Pooled
metrics concatenate the per-fold test predictions and are the primary
numbers; per-fold values are kept alongside.

``run_matrix`` evaluates every (prior set, augmentation, embedding)
cell; ``compute_gains`` reduces the grid to mean F gains per
(embedding, augmentation) and per embedding; ``emit_report`` renders
both as TSV or Markdown with deterministic ordering and 2-decimal
percentages.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .classify import DegenerateTrainingError, TrainConfig, train
from .embeddings import EmbeddingTable, intersect_vocabularies
from .features import (
    PRIOR_SETS,
    ConfigurationError,
    ExperimentConfig,
    FeatureRegistry,
    FeatureVector,
    Lexicon,
    build_config_features,
    default_lexicon,
)
from .similarity import Augmentation
from .text import (
    DEFAULT_CASING,
    CasingPolicy,
    TokenizedSentence,
    default_stopwords,
    tokenize,
)

AUGMENTATIONS = (
    Augmentation.NONE,
    Augmentation.S,
    Augmentation.WS,
    Augmentation.S_AND_WS,
)

SARCASTIC = 1
NON_SARCASTIC = 0


class DatasetParseError(ValueError):
    """A corpus file line violates the dataset contract."""


class SplitError(ValueError):
    """The corpus cannot be split as requested."""


class ExperimentError(RuntimeError):
    """A configuration run failed; the message names the fold."""


class IncompleteMatrixError(ValueError):
    """Gain computation found a missing grid cell."""


@dataclass(frozen=True)
class LabeledInstance:
    """One corpus entry: stable id, text, binary label (1 = sarcastic)."""

    id: str
    text: str
    label: int

    def __post_init__(self):
        if self.label not in (0, 1):
            raise ValueError(f"label must be 0 or 1, got {self.label!r}")
        if not self.id:
            raise ValueError("instance id must be non-empty")
        if not self.text.strip():
            raise ValueError("instance text must be non-empty")


def load_dataset(path: str | Path, fmt: str = "auto") -> list[LabeledInstance]:
    """Read a corpus file.

    TSV rows are ``<id>\\t<label>\\t<text>`` with label 0 or 1
    (1 = sarcastic); JSONL rows are objects with ``id``, ``label`` and
    ``text`` keys.  ``fmt`` is ``tsv``, ``jsonl``, or ``auto`` (sniffed
    from the first line).  Bad labels, duplicate ids, and empty text
    raise :class:`DatasetParseError` naming the line.
    """
    path = Path(path)
    content = path.read_text(encoding="utf-8")
    if fmt == "auto":
        first = content.lstrip()[:1]
        fmt = "jsonl" if first == "{" else "tsv"
    if fmt not in ("tsv", "jsonl"):
        raise ValueError(f"unknown dataset format {fmt!r}")

    instances: list[LabeledInstance] = []
    seen: set[str] = set()
    for lineno, line in enumerate(content.splitlines(), start=1):
        if not line.strip():
            continue
        if fmt == "tsv":
            parts = line.split("\t", 2)
            if len(parts) != 3:
                raise DatasetParseError(
                    f"{path}: line {lineno}: expected '<id>\\t<label>\\t<text>'"
                )
            instance_id, label_text, text = parts
            if label_text not in ("0", "1"):
                raise DatasetParseError(
                    f"{path}: line {lineno}: label must be 0 or 1, got {label_text!r}"
                )
            label = int(label_text)
        else:
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DatasetParseError(
                    f"{path}: line {lineno}: invalid JSON"
                ) from exc
            try:
                instance_id = str(record["id"])
                label = record["label"]
                text = record["text"]
            except (KeyError, TypeError) as exc:
                raise DatasetParseError(
                    f"{path}: line {lineno}: need 'id', 'label', 'text' keys"
                ) from exc
            if label not in (0, 1):
                raise DatasetParseError(
                    f"{path}: line {lineno}: label must be 0 or 1, got {label!r}"
                )
        if instance_id in seen:
            raise DatasetParseError(
                f"{path}: line {lineno}: duplicate id {instance_id!r}"
            )
        if not str(text).strip():
            raise DatasetParseError(f"{path}: line {lineno}: empty text")
        seen.add(instance_id)
        instances.append(LabeledInstance(instance_id, str(text), label))
    if not instances:
        raise DatasetParseError(f"{path}: no instances")
    return instances


def save_dataset_tsv(instances: Sequence[LabeledInstance], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for instance in instances:
            handle.write(f"{instance.id}\t{instance.label}\t{instance.text}\n")


def stratified_kfold(
    instances: Sequence[LabeledInstance], k: int = 5, seed: int = 0
) -> list[tuple[list[int], list[int]]]:
    """Deterministic stratified k-fold split.

    Returns k (train_indices, test_indices) pairs.  Each class is
    shuffled with the seed and dealt round-robin, so per-fold class
    counts differ by at most one.  Raises :class:`SplitError` when any
    class has fewer than k members.
    """
    if k < 2:
        raise SplitError("need at least 2 folds")
    rng = np.random.default_rng(seed)
    test_folds: list[list[int]] = [[] for _ in range(k)]
    for label in (NON_SARCASTIC, SARCASTIC):
        class_indices = [
            i for i, inst in enumerate(instances) if inst.label == label
        ]
        if len(class_indices) < k:
            raise SplitError(
                f"class {label} has {len(class_indices)} instances; "
                f"need at least {k} for {k}-fold splits"
            )
        order = rng.permutation(len(class_indices))
        for position, class_position in enumerate(order):
            test_folds[position % k].append(class_indices[class_position])
    splits = []
    for fold in range(k):
        test = sorted(test_folds[fold])
        test_set = set(test)
        train = [i for i in range(len(instances)) if i not in test_set]
        splits.append((train, test))
    return splits


@dataclass(frozen=True)
class FoldMetrics:
    precision: float
    recall: float
    f_score: float


@dataclass(frozen=True)
class MetricsReport:
    """Positive-class precision/recall/F as percentages (full precision)."""

    precision: float
    recall: float
    f_score: float
    per_fold: tuple[FoldMetrics, ...] = ()


@dataclass(frozen=True)
class Prediction:
    instance_id: str
    label: int
    predicted: int
    score: float
    fold: int


def metrics_from_predictions(
    predictions: Sequence[Prediction],
) -> tuple[float, float, float]:
    tp = sum(1 for p in predictions if p.predicted == 1 and p.label == 1)
    fp = sum(1 for p in predictions if p.predicted == 1 and p.label == 0)
    fn = sum(1 for p in predictions if p.predicted == 0 and p.label == 1)
    precision = 100.0 * tp / (tp + fp) if tp + fp else 0.0
    recall = 100.0 * tp / (tp + fn) if tp + fn else 0.0
    f_score = (
        2 * precision * recall / (precision + recall)
        if precision + recall > 0
        else 0.0
    )
    return precision, recall, f_score


@dataclass(frozen=True)
class Resources:
    """Everything a run needs besides the corpus."""

    embeddings: Mapping[str, EmbeddingTable] = dataclasses.field(
        default_factory=dict
    )
    lexicon: Lexicon | None = None
    stopwords: frozenset[str] = dataclasses.field(
        default_factory=default_stopwords
    )
    casing: CasingPolicy = DEFAULT_CASING
    distance_exponent: int = 2

    def with_default_lexicon(self) -> "Resources":
        if self.lexicon is not None:
            return self
        return dataclasses.replace(self, lexicon=default_lexicon())


@dataclass(frozen=True)
class ConfigResult:
    config: ExperimentConfig
    metrics: MetricsReport
    predictions: tuple[Prediction, ...]


def _validate_embedding(config: ExperimentConfig, resources: Resources) -> None:
    if config.augmentation is Augmentation.NONE:
        if config.embedding and resources.embeddings and config.embedding not in resources.embeddings:
            raise ConfigurationError(
                f"unknown embedding id {config.embedding!r}"
            )
        return
    if config.embedding not in resources.embeddings:
        raise ConfigurationError(
            f"unknown embedding id {config.embedding!r}; "
            f"available: {sorted(resources.embeddings)}"
        )


def extract_features(
    sentences: Sequence[TokenizedSentence],
    config: ExperimentConfig,
    resources: Resources,
    registry: FeatureRegistry,
) -> list[FeatureVector]:
    return [
        build_config_features(
            sentence,
            config,
            resources.embeddings,
            resources.lexicon,
            registry,
            stopwords=resources.stopwords,
            casing=resources.casing,
            distance_exponent=resources.distance_exponent,
        )
        for sentence in sentences
    ]


def run_config(
    config: ExperimentConfig,
    instances: Sequence[LabeledInstance],
    resources: Resources,
    *,
    folds: int = 5,
    seed: int = 0,
    train_config: TrainConfig | None = None,
) -> ConfigResult:
    """Cross-validate one configuration.

    Per fold: fit a fresh feature registry on the training split, freeze
    it, extract test features against the frozen registry, train, and
    predict.  The pooled metrics concatenate all test predictions.
    """
    _validate_embedding(config, resources)
    train_config = train_config or TrainConfig()
    splits = stratified_kfold(instances, k=folds, seed=seed)
    sentences = [tokenize(inst.text) for inst in instances]

    all_predictions: list[Prediction] = []
    per_fold: list[FoldMetrics] = []
    for fold_index, (train_idx, test_idx) in enumerate(splits):
        try:
            registry = FeatureRegistry()
            train_vectors = extract_features(
                [sentences[i] for i in train_idx], config, resources, registry
            )
            registry.freeze()
            test_vectors = extract_features(
                [sentences[i] for i in test_idx], config, resources, registry
            )
            model = train(
                [
                    (vector, instances[i].label)
                    for vector, i in zip(train_vectors, train_idx)
                ],
                train_config,
            )
        except (ConfigurationError, DegenerateTrainingError, ValueError) as exc:
            raise ExperimentError(
                f"config {config.label}: fold {fold_index}: {exc}"
            ) from exc
        fold_predictions = []
        for vector, i in zip(test_vectors, test_idx):
            score, predicted = model.predict(vector)
            fold_predictions.append(
                Prediction(instances[i].id, instances[i].label, predicted, score, fold_index)
            )
        per_fold.append(FoldMetrics(*metrics_from_predictions(fold_predictions)))
        all_predictions.extend(fold_predictions)

    pooled = metrics_from_predictions(all_predictions)
    report = MetricsReport(*pooled, per_fold=tuple(per_fold))
    return ConfigResult(config, report, tuple(all_predictions))


@dataclass(frozen=True)
class MatrixResult:
    """All grid cells plus the context needed to render a report."""

    cells: Mapping[tuple[str, Augmentation, str], ConfigResult]
    embeddings: tuple[str, ...]
    vocab_sizes: Mapping[str, int]
    intersected: bool
    n_instances: int
    folds: int
    seed: int


def run_matrix(
    instances: Sequence[LabeledInstance],
    resources: Resources,
    *,
    intersect: bool = False,
    folds: int = 5,
    seed: int = 0,
    train_config: TrainConfig | None = None,
) -> MatrixResult:
    """Run every (prior set, augmentation, embedding) combination.

    Cells with augmentation ``none`` do not depend on the embedding, so
    they are computed once per prior set and replicated across embedding
    keys; their metrics are consequently constant along that axis.
    """
    if not resources.embeddings:
        raise ValueError("run_matrix needs at least one embedding table")
    if intersect:
        tables = intersect_vocabularies(list(resources.embeddings.values()))
        resources = dataclasses.replace(
            resources,
            embeddings={t.name: t for t in tables},
        )
    names = tuple(resources.embeddings)

    cells: dict[tuple[str, Augmentation, str], ConfigResult] = {}
    for prior in PRIOR_SETS:
        base_config = ExperimentConfig(prior, Augmentation.NONE, "", intersect)
        base = run_config(
            base_config,
            instances,
            resources,
            folds=folds,
            seed=seed,
            train_config=train_config,
        )
        for name in names:
            cells[(prior, Augmentation.NONE, name)] = dataclasses.replace(
                base,
                config=dataclasses.replace(base_config, embedding=name),
            )
        for name in names:
            for augmentation in AUGMENTATIONS[1:]:
                config = ExperimentConfig(prior, augmentation, name, intersect)
                cells[(prior, augmentation, name)] = run_config(
                    config,
                    instances,
                    resources,
                    folds=folds,
                    seed=seed,
                    train_config=train_config,
                )
    vocab_sizes = {name: len(resources.embeddings[name]) for name in names}
    return MatrixResult(
        cells=cells,
        embeddings=names,
        vocab_sizes=vocab_sizes,
        intersected=intersect,
        n_instances=len(instances),
        folds=folds,
        seed=seed,
    )


@dataclass(frozen=True)
class GainTables:
    """Mean F gains: one value per (embedding, augmentation), one per embedding."""

    per_augmentation: Mapping[tuple[str, Augmentation], float]
    per_embedding: Mapping[str, float]


def compute_gains(matrix: MatrixResult) -> GainTables:
    """Reduce the grid to mean F gains over the four prior sets.

    For each embedding and augmentation, the gain is the mean over prior
    sets of F(prior + augmentation) - F(prior); the per-embedding value
    averages its three augmentation gains.  A missing cell raises
    :class:`IncompleteMatrixError`.
    """
    per_augmentation: dict[tuple[str, Augmentation], float] = {}
    per_embedding: dict[str, float] = {}
    for name in matrix.embeddings:
        augmentation_gains = []
        for augmentation in AUGMENTATIONS[1:]:
            deltas = []
            for prior in PRIOR_SETS:
                try:
                    augmented = matrix.cells[(prior, augmentation, name)]
                    baseline = matrix.cells[(prior, Augmentation.NONE, name)]
                except KeyError as exc:
                    raise IncompleteMatrixError(
                        f"missing grid cell {exc.args[0]}"
                    ) from exc
                deltas.append(
                    augmented.metrics.f_score - baseline.metrics.f_score
                )
            gain = sum(deltas) / len(deltas)
            per_augmentation[(name, augmentation)] = gain
            augmentation_gains.append(gain)
        per_embedding[name] = sum(augmentation_gains) / len(augmentation_gains)
    return GainTables(per_augmentation, per_embedding)


_DEVIATION_NOTE = (
    "classifier: class-weighted hinge SGD with an F-score-maximizing "
    "decision threshold (approximate stand-in for direct F-loss training)"
)


def _row_label(prior: str, augmentation: Augmentation) -> str:
    if augmentation is Augmentation.NONE:
        return prior
    return f"{prior}+{augmentation.label}"


def emit_report(
    matrix: MatrixResult,
    gains: GainTables,
    fmt: str = "markdown",
    path: str | Path | None = None,
) -> str:
    """Render the grid and gain tables; optionally write to ``path``.

    Output ordering is fixed (embeddings in matrix order, prior sets
    L,G,B,J, augmentations none,S,WS,S+WS) and all values are percentages
    with exactly two decimals, so equal-seed reruns emit identical bytes.
    """
    if fmt == "tsv":
        text = _report_tsv(matrix, gains)
    elif fmt == "markdown":
        text = _report_markdown(matrix, gains)
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text


def _cell_metrics(matrix: MatrixResult, key) -> MetricsReport:
    try:
        return matrix.cells[key].metrics
    except KeyError as exc:
        raise IncompleteMatrixError(f"missing grid cell {exc.args[0]}") from exc


def _report_tsv(matrix: MatrixResult, gains: GainTables) -> str:
    lines = ["embedding\tprior\taugmentation\tprecision\trecall\tf_score"]
    for name in matrix.embeddings:
        for prior in PRIOR_SETS:
            for augmentation in AUGMENTATIONS:
                m = _cell_metrics(matrix, (prior, augmentation, name))
                lines.append(
                    f"{name}\t{prior}\t{augmentation.label}\t"
                    f"{m.precision:.2f}\t{m.recall:.2f}\t{m.f_score:.2f}"
                )
    lines.append("")
    lines.append("embedding\taugmentation\tmean_f_gain")
    for name in matrix.embeddings:
        for augmentation in AUGMENTATIONS[1:]:
            value = gains.per_augmentation[(name, augmentation)]
            lines.append(f"{name}\t+{augmentation.label}\t{value:.2f}")
    lines.append("")
    lines.append("embedding\taverage_f_gain")
    for name in matrix.embeddings:
        lines.append(f"{name}\t{gains.per_embedding[name]:.2f}")
    return "\n".join(lines) + "\n"


def _report_markdown(matrix: MatrixResult, gains: GainTables) -> str:
    out = ["# Similarity-augmentation experiment report", ""]
    out.append(f"- instances: {matrix.n_instances}")
    out.append(f"- folds: {matrix.folds} (stratified, seed {matrix.seed})")
    out.append(f"- vocabulary intersected: {'yes' if matrix.intersected else 'no'}")
    out.append(f"- {_DEVIATION_NOTE}")
    out.append("")
    for name in matrix.embeddings:
        out.append(f"## Embedding: {name} (vocabulary {matrix.vocab_sizes[name]})")
        out.append("")
        out.append("| features | precision | recall | f-score |")
        out.append("| --- | --- | --- | --- |")
        for prior in PRIOR_SETS:
            for augmentation in AUGMENTATIONS:
                m = _cell_metrics(matrix, (prior, augmentation, name))
                out.append(
                    f"| {_row_label(prior, augmentation)} | {m.precision:.2f} "
                    f"| {m.recall:.2f} | {m.f_score:.2f} |"
                )
        out.append("")
    out.append("## Mean F gain by augmentation")
    out.append("")
    out.append("| augmentation | " + " | ".join(matrix.embeddings) + " |")
    out.append("| --- |" + " --- |" * len(matrix.embeddings))
    for augmentation in AUGMENTATIONS[1:]:
        row = [
            f"{gains.per_augmentation[(name, augmentation)]:.2f}"
            for name in matrix.embeddings
        ]
        out.append(f"| +{augmentation.label} | " + " | ".join(row) + " |")
    out.append("")
    out.append("## Mean F gain by embedding")
    out.append("")
    out.append("| embedding | mean gain |")
    out.append("| --- | --- |")
    for name in matrix.embeddings:
        out.append(f"| {name} | {gains.per_embedding[name]:.2f} |")
    out.append("")
    return "\n".join(out) + "\n"


def parse_report(text: str, fmt: str = "markdown") -> dict:
    """Parse a report back into its numbers (for round-trip checks).

    Returns ``{"cells": {(prior, augmentation, embedding): (P, R, F)},
    "gains": {(embedding, augmentation): gain},
    "average_gains": {embedding: gain}}``.
    """
    if fmt == "tsv":
        return _parse_tsv(text)
    if fmt == "markdown":
        return _parse_markdown(text)
    raise ValueError(f"unknown report format {fmt!r}")


def _parse_label(label: str) -> tuple[str, Augmentation]:
    prior, _, augmentation = label.partition("+")
    return prior, Augmentation.parse(augmentation) if augmentation else Augmentation.NONE


def _parse_tsv(text: str) -> dict:
    sections: list[list[str]] = [[]]
    for line in text.splitlines():
        if line == "":
            sections.append([])
        else:
            sections[-1].append(line)
    sections = [s for s in sections if s]
    cells = {}
    for line in sections[0][1:]:
        name, prior, augmentation, p, r, f = line.split("\t")
        cells[(prior, Augmentation.parse(augmentation), name)] = (
            float(p),
            float(r),
            float(f),
        )
    gains = {}
    for line in sections[1][1:]:
        name, augmentation, value = line.split("\t")
        gains[(name, Augmentation.parse(augmentation.lstrip("+")))] = float(value)
    average_gains = {}
    for line in sections[2][1:]:
        name, value = line.split("\t")
        average_gains[name] = float(value)
    return {"cells": cells, "gains": gains, "average_gains": average_gains}


def _parse_markdown(text: str) -> dict:
    cells = {}
    gains = {}
    average_gains = {}
    current_embedding = None
    section = None
    embedding_order: list[str] = []
    for line in text.splitlines():
        if line.startswith("## Embedding: "):
            current_embedding = line[len("## Embedding: ") :].split(" (")[0]
            section = "cells"
            continue
        if line.startswith("## Mean F gain by augmentation"):
            section = "gains"
            continue
        if line.startswith("## Mean F gain by embedding"):
            section = "average"
            continue
        if not line.startswith("|") or line.startswith("| ---"):
            continue
        fields = [f.strip() for f in line.strip("|").split("|")]
        if section == "cells":
            if fields[0] == "features":
                continue
            prior, augmentation = _parse_label(fields[0])
            cells[(prior, augmentation, current_embedding)] = tuple(
                float(v) for v in fields[1:4]
            )
        elif section == "gains":
            if fields[0] == "augmentation":
                embedding_order = fields[1:]
                continue
            augmentation = Augmentation.parse(fields[0].lstrip("+"))
            for name, value in zip(embedding_order, fields[1:]):
                gains[(name, augmentation)] = float(value)
        elif section == "average":
            if fields[0] == "embedding":
                continue
            average_gains[fields[0]] = float(fields[1])
    return {"cells": cells, "gains": gains, "average_gains": average_gains}
