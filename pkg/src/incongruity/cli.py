"""Command-line interface for the experiment pipeline."""

from __future__ import annotations

from pathlib import Path

import click

from .classify import TrainConfig, load_model, save_model, train
from .embeddings import (
    EmbeddingTable,
    intersect_vocabularies,
    load_embeddings,
    save_text_vectors,
)
from .features import (
    ExperimentConfig,
    FeatureRegistry,
    default_lexicon,
    load_lexicon,
)
from .harness import (
    Prediction,
    Resources,
    compute_gains,
    emit_report,
    extract_features,
    load_dataset,
    metrics_from_predictions,
    run_matrix,
)
from .synthetic import generate_corpus, toy_embedding_tables, write_corpus_and_tables
from .text import default_stopwords, load_stopwords, tokenize

_EMBED_DIR_ENVVAR = "INCONGRUITY_EMBED_DIR"


def _detect_format(path: Path) -> str:
    return "binary_w2v" if path.suffix == ".bin" else "text_vectors"


def _load_one(path: Path, fmt: str) -> EmbeddingTable:
    if fmt == "auto":
        fmt = _detect_format(path)
    return load_embeddings(path, fmt)


def _load_embedding_dir(directory: str | None) -> dict[str, EmbeddingTable]:
    if directory is None:
        return {}
    tables: dict[str, EmbeddingTable] = {}
    for path in sorted(Path(directory).iterdir()):
        if path.suffix in (".txt", ".vec", ".bin"):
            table = _load_one(path, "auto")
            tables[table.name] = table
    return tables


def _build_resources(embeddings_dir, stopwords_file, lexicon_file) -> Resources:
    stopwords = (
        load_stopwords(stopwords_file) if stopwords_file else default_stopwords()
    )
    lexicon = load_lexicon(lexicon_file) if lexicon_file else default_lexicon()
    return Resources(
        embeddings=_load_embedding_dir(embeddings_dir),
        lexicon=lexicon,
        stopwords=stopwords,
    )


_embeddings_option = click.option(
    "--embeddings",
    "embeddings_dir",
    type=click.Path(exists=True, file_okay=False),
    envvar=_EMBED_DIR_ENVVAR,
    default=None,
    help=f"Directory of embedding files (default: ${_EMBED_DIR_ENVVAR}).",
)
_stopwords_option = click.option(
    "--stopwords",
    "stopwords_file",
    type=click.Path(exists=True, dir_okay=False),
    default=None,
    help="Stopword file (default: shipped list).",
)
_lexicon_option = click.option(
    "--lexicon",
    "lexicon_file",
    type=click.Path(exists=True, dir_okay=False),
    default=None,
    help="Tag lexicon file (default: shipped lexicon).",
)


@click.group()
def main():
    """Similarity-feature experiments for sarcasm detection."""


@main.command("load-embeddings")
@click.argument("path", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option(
    "--format",
    "fmt",
    type=click.Choice(["auto", "binary_w2v", "text_vectors"]),
    default="auto",
    show_default=True,
)
def load_embeddings_command(path: Path, fmt: str):
    """Load and validate one embedding file, printing a summary."""
    table = _load_one(path, fmt)
    click.echo(f"{table.name}: {len(table)} words, dimension {table.dimension}")


@main.command("intersect-vocab")
@click.argument(
    "paths", nargs=-1, required=True, type=click.Path(exists=True, dir_okay=False, path_type=Path)
)
@click.option(
    "--out",
    "out_dir",
    required=True,
    type=click.Path(file_okay=False, path_type=Path),
    help="Directory for the intersected tables (text format).",
)
def intersect_vocab_command(paths: tuple[Path, ...], out_dir: Path):
    """Restrict embedding tables to their common vocabulary."""
    tables = [_load_one(path, "auto") for path in paths]
    intersected = intersect_vocabularies(tables)
    out_dir.mkdir(parents=True, exist_ok=True)
    for table in intersected:
        save_text_vectors(table, out_dir / f"{table.name}.txt")
    click.echo(
        f"common vocabulary: {len(intersected[0])} words across {len(tables)} tables"
    )


def _config_and_resources(config_str, embeddings_dir, stopwords_file, lexicon_file):
    resources = _build_resources(embeddings_dir, stopwords_file, lexicon_file)
    config = ExperimentConfig.parse(
        config_str, embedding=next(iter(resources.embeddings), "")
    )
    return config, resources


@main.command("extract-features")
@click.option("--config", "config_str", required=True, help="e.g. L, G+S, J+S+WS:emb-a")
@click.option(
    "--dataset", required=True, type=click.Path(exists=True, dir_okay=False)
)
@_embeddings_option
@_stopwords_option
@_lexicon_option
@click.option("--out", "out_file", required=True, type=click.Path(dir_okay=False))
def extract_features_command(
    config_str, dataset, embeddings_dir, stopwords_file, lexicon_file, out_file
):
    """Extract features for a whole corpus into a text feature file.

    Each output line is '<id>\\t<label>\\t<name>:<value> ...'.
    """
    config, resources = _config_and_resources(
        config_str, embeddings_dir, stopwords_file, lexicon_file
    )
    instances = load_dataset(dataset)
    registry = FeatureRegistry()
    sentences = [tokenize(inst.text) for inst in instances]
    vectors = extract_features(sentences, config, resources, registry)
    with open(out_file, "w", encoding="utf-8") as handle:
        for instance, vector in zip(instances, vectors):
            rendered = " ".join(
                f"{registry.name_of(fid)}:{value!r}" for fid, value in vector.items()
            )
            handle.write(f"{instance.id}\t{instance.label}\t{rendered}\n")
    click.echo(f"wrote {len(instances)} instances, {len(registry)} features")


@main.command("train")
@click.option("--config", "config_str", required=True)
@click.option("--dataset", required=True, type=click.Path(exists=True, dir_okay=False))
@_embeddings_option
@_stopwords_option
@_lexicon_option
@click.option("--c", "c", type=float, default=20.0, show_default=True)
@click.option("--w", "w", type=float, default=3.0, show_default=True)
@click.option("--epochs", type=int, default=50, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--model-out", required=True, type=click.Path(dir_okay=False))
def train_command(
    config_str, dataset, embeddings_dir, stopwords_file, lexicon_file,
    c, w, epochs, seed, model_out,
):
    """Train on the full dataset and save the model."""
    config, resources = _config_and_resources(
        config_str, embeddings_dir, stopwords_file, lexicon_file
    )
    instances = load_dataset(dataset)
    registry = FeatureRegistry()
    sentences = [tokenize(inst.text) for inst in instances]
    vectors = extract_features(sentences, config, resources, registry)
    model = train(
        [(vector, inst.label) for vector, inst in zip(vectors, instances)],
        TrainConfig(c=c, w=w, epochs=epochs, seed=seed),
    )
    save_model(model_out, model, registry)
    click.echo(
        f"trained on {len(instances)} instances; "
        f"threshold {model.threshold:.6f}; saved to {model_out}"
    )


@main.command("evaluate")
@click.option("--config", "config_str", required=True)
@click.option("--dataset", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--model", "model_file", required=True, type=click.Path(exists=True, dir_okay=False))
@_embeddings_option
@_stopwords_option
@_lexicon_option
def evaluate_command(
    config_str, dataset, model_file, embeddings_dir, stopwords_file, lexicon_file
):
    """Evaluate a saved model on a dataset; prints P/R/F percentages."""
    config, resources = _config_and_resources(
        config_str, embeddings_dir, stopwords_file, lexicon_file
    )
    instances = load_dataset(dataset)
    model, registry = load_model(model_file)
    sentences = [tokenize(inst.text) for inst in instances]
    vectors = extract_features(sentences, config, resources, registry)
    predictions = []
    for instance, vector in zip(instances, vectors):
        score, predicted = model.predict(vector)
        predictions.append(
            Prediction(instance.id, instance.label, predicted, score, 0)
        )
    precision, recall, f_score = metrics_from_predictions(predictions)
    click.echo(f"precision {precision:.2f}  recall {recall:.2f}  f-score {f_score:.2f}")


@main.command("run-matrix")
@click.option("--dataset", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option(
    "--embeddings",
    "embeddings_dir",
    type=click.Path(exists=True, file_okay=False),
    envvar=_EMBED_DIR_ENVVAR,
    required=True,
    help=f"Directory of embedding files (default: ${_EMBED_DIR_ENVVAR}).",
)
@click.option("--intersect", is_flag=True, help="Intersect vocabularies first.")
@click.option("--report", "report_file", required=True, type=click.Path(dir_okay=False))
@click.option(
    "--format",
    "fmt",
    type=click.Choice(["markdown", "tsv"]),
    default="markdown",
    show_default=True,
)
@click.option("--folds", type=int, default=5, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--c", "c", type=float, default=20.0, show_default=True)
@click.option("--w", "w", type=float, default=3.0, show_default=True)
@click.option("--epochs", type=int, default=50, show_default=True)
@_stopwords_option
@_lexicon_option
@click.option(
    "--predictions",
    "predictions_file",
    type=click.Path(dir_okay=False),
    default=None,
    help="Also dump per-instance predictions as TSV.",
)
def run_matrix_command(
    dataset, embeddings_dir, intersect, report_file, fmt,
    folds, seed, c, w, epochs, stopwords_file, lexicon_file, predictions_file,
):
    """Run the full prior-set x augmentation x embedding grid."""
    resources = _build_resources(embeddings_dir, stopwords_file, lexicon_file)
    instances = load_dataset(dataset)
    matrix = run_matrix(
        instances,
        resources,
        intersect=intersect,
        folds=folds,
        seed=seed,
        train_config=TrainConfig(c=c, w=w, epochs=epochs, seed=seed),
    )
    gains = compute_gains(matrix)
    emit_report(matrix, gains, fmt, report_file)
    if predictions_file:
        with open(predictions_file, "w", encoding="utf-8") as handle:
            handle.write("prior\taugmentation\tembedding\tfold\tid\tlabel\tpredicted\tscore\n")
            for key in sorted(
                matrix.cells, key=lambda k: (k[0], k[1].label, k[2])
            ):
                result = matrix.cells[key]
                for p in result.predictions:
                    handle.write(
                        f"{key[0]}\t{key[1].label}\t{key[2]}\t{p.fold}\t"
                        f"{p.instance_id}\t{p.label}\t{p.predicted}\t{p.score!r}\n"
                    )
    click.echo(f"wrote {report_file} ({len(matrix.cells)} grid cells)")


@main.command("gen-synthetic")
@click.option("--n", "n", type=int, required=True)
@click.option("--skew", type=float, required=True, help="Sarcastic fraction.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--separability", type=float, default=1.0, show_default=True)
@click.option("--out", "out_file", required=True, type=click.Path(dir_okay=False))
@click.option(
    "--embeddings-out",
    "embeddings_out",
    type=click.Path(file_okay=False),
    default=None,
    help="Also write the matching toy embedding tables here.",
)
def gen_synthetic_command(n, skew, seed, separability, out_file, embeddings_out):
    """Generate a synthetic corpus (and optionally toy embeddings)."""
    instances = generate_corpus(n, skew, seed, separability)
    tables = toy_embedding_tables(seed) if embeddings_out else None
    write_corpus_and_tables(instances, out_file, tables, embeddings_out)
    n_pos = sum(inst.label for inst in instances)
    click.echo(f"wrote {len(instances)} instances ({n_pos} sarcastic) to {out_file}")


if __name__ == "__main__":
    main()
