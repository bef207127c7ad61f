"""Command line for the personalization pipeline: synth, train, personalize, evaluate, experiment."""
import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional, Sequence

from pydantic import ValidationError

from app.config import settings
from app.exceptions import ConfigurationError, CorpusError, ShipError
from app.models.annotations import CorpusManifest
from app.models.network import MlpConfig
from app.models.run import Command, RunConfig
from app.models.synth import REFERENCE_ANNOTATOR, SynthSpec
from app.pipeline import (
    estimated_from_tracks, evaluate_estimates, layer_sizes, load_corpus, personalize,
    run_experiment, train_model,
)
from app.storage import Storage
from app.utils.run_monitor import run_monitor
from app.utils.synth_corpus import write_corpus

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"


def _split_list(text: str) -> List[str]:
    items = [item.strip() for item in text.split(",") if item.strip()]
    if not items:
        raise argparse.ArgumentTypeError("expected a comma-separated list")
    return items


def _ratios(text: str):
    try:
        return tuple(float(item) for item in _split_list(text))
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid ratios {text!r}") from None


def _sizes(text: str) -> List[int]:
    try:
        return [int(item) for item in _split_list(text)]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid layer sizes {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ship", description="Annotator-specific chord labels from shared harmonic interval profiles"
    )
    commands = parser.add_subparsers(dest="command", required=True)

    def add(name: str, help_text: str) -> argparse.ArgumentParser:
        sub = commands.add_parser(name, help=help_text)
        sub.add_argument("--seed", type=int, help=f"random seed (default: {settings.seed})")
        return sub

    synth = add("synth", "render a synthetic multi-annotator corpus")
    synth.add_argument("--spec", type=Path, help="JSON synthesis spec (default: built-in)")
    synth.add_argument("--out", type=Path, help="output corpus directory")

    def add_corpus_args(sub: argparse.ArgumentParser) -> None:
        sub.add_argument("--manifest", type=Path, help="corpus manifest.json")
        sub.add_argument("--ratios", type=_ratios, help="train,val,test ratios, e.g. 0.65,0.10,0.25")
        sub.add_argument("--song-wise", action="store_true", help="split whole songs instead of frames")

    def add_training_args(sub: argparse.ArgumentParser) -> None:
        sub.add_argument("--max-epochs", type=int, help=f"(default: {settings.max_epochs})")
        sub.add_argument("--hidden-sizes", type=_sizes, help="hidden layer sizes, e.g. 1024,512,256")

    train = add("train", "train a network on the SHIP of the selected annotators")
    add_corpus_args(train)
    add_training_args(train)
    train.add_argument("--model", type=Path, help="model file to write")
    train.add_argument("--annotators", type=_split_list, help="target annotators (default: all)")

    person = add("personalize", "write annotator-specific LAB files for the test frames")
    add_corpus_args(person)
    person.add_argument("--model", type=Path, help="trained model file")
    person.add_argument("--annotators", type=_split_list, help="annotators to personalize for (default: all)")
    person.add_argument("--out", type=Path, help="output directory, one subdirectory per annotator")

    evaluate = add("evaluate", "score estimated LAB files on the test frames")
    add_corpus_args(evaluate)
    evaluate.add_argument("--estimates", type=Path, help="directory with <annotator>/<song>.lab files")
    evaluate.add_argument("--annotators", type=_split_list, help="annotators to score (default: all found)")
    evaluate.add_argument("--reference-annotator", help="score every estimate against this annotator")
    evaluate.add_argument("--metrics", type=_split_list, help="subset of root,majmin,mirex,thirds,7ths")
    evaluate.add_argument("--agreement", action="store_true", help="add the cross-annotator agreement matrix")
    evaluate.add_argument("--out", type=Path, help="directory for report.tsv and report.json")

    experiment = add("experiment", "compare multi-reference and single-reference training")
    add_corpus_args(experiment)
    add_training_args(experiment)
    experiment.add_argument("--spec", type=Path, help="synthesize a corpus from this spec first")
    experiment.add_argument("--reference-annotator", help="single reference annotator")
    experiment.add_argument("--metrics", type=_split_list, help="subset of root,majmin,mirex,thirds,7ths")
    experiment.add_argument("--out", type=Path, help="output directory")
    return parser


def parse_run_config(argv: Optional[Sequence[str]] = None) -> RunConfig:
    args = build_parser().parse_args(argv)
    values = {key: value for key, value in vars(args).items() if value is not None}
    return RunConfig(**values)


def _mlp_config(run: RunConfig, input_size: int) -> MlpConfig:
    return MlpConfig.from_settings(
        max_epochs=run.max_epochs,
        seed=run.seed,
        layer_sizes=layer_sizes(input_size, run.hidden_sizes),
    )


def _input_size() -> int:
    return settings.context_frames * settings.n_bins


def _manifest(run: RunConfig) -> CorpusManifest:
    manifest = Storage.read_manifest(run.manifest)
    overrides = {"song_wise": run.song_wise or manifest.split.song_wise}
    if run.seed is not None:
        overrides["seed"] = run.seed
    if run.ratios is not None:
        overrides["ratios"] = run.ratios
    return manifest.model_copy(update={"split": manifest.split.model_copy(update=overrides)})


def _synth_spec(run: RunConfig) -> SynthSpec:
    spec = SynthSpec()
    if run.spec is not None:
        try:
            spec = SynthSpec.model_validate_json(run.spec.read_text(encoding="utf-8"))
        except ValueError as e:
            raise ConfigurationError(f"{run.spec}: invalid synthesis spec: {e}") from e
    if run.seed is not None:
        spec = spec.model_copy(update={"seed": run.seed})
    return spec


def cmd_synth(run: RunConfig) -> None:
    spec = _synth_spec(run)
    write_corpus(spec, run.out)
    print(run.out / MANIFEST_NAME)


def cmd_train(run: RunConfig) -> None:
    manifest = _manifest(run)
    corpus = load_corpus(manifest, run.annotators)
    model = train_model(corpus, run.annotators, _mlp_config(run, _input_size()))
    Storage.save_model(run.model, model)
    print(run.model)


def cmd_personalize(run: RunConfig) -> None:
    manifest = _manifest(run)
    model = Storage.load_model(run.model)
    corpus = load_corpus(manifest)
    annotators = run.annotators or list(corpus.available_annotators)
    for annotator in annotators:
        if annotator not in corpus.available_annotators:
            raise CorpusError(f"unknown annotator {annotator!r}")
        for estimate in personalize(model, corpus, annotator):
            path = run.out / annotator / f"{estimate.song_id}.lab"
            Storage.write_lab(path, estimate.sequence.segments)
        print(run.out / annotator)


def cmd_evaluate(run: RunConfig) -> None:
    manifest = _manifest(run)
    corpus = load_corpus(manifest)
    annotators = run.annotators or [
        annotator for annotator in corpus.available_annotators
        if (run.estimates / annotator).is_dir()
    ]
    if not annotators:
        raise CorpusError(f"no estimates for any annotator under {run.estimates}")

    estimates = {}
    for annotator in annotators:
        tracks = {}
        for song in corpus.songs:
            path = run.estimates / annotator / f"{song.song_id}.lab"
            if path.is_file():
                tracks[song.song_id] = Storage.read_lab(path, annotator, song.song_id)
        estimates[annotator] = estimated_from_tracks(corpus, tracks)

    report = evaluate_estimates(
        corpus, estimates, run.reference_annotator, run.metrics, run.agreement
    )
    if run.out is not None:
        run.out.mkdir(parents=True, exist_ok=True)
        (run.out / "report.tsv").write_text(report.to_table(), encoding="utf-8")
        (run.out / "report.json").write_text(report.to_json(), encoding="utf-8")
    sys.stdout.write(report.to_table())


def cmd_experiment(run: RunConfig) -> None:
    if run.manifest is None:
        spec = _synth_spec(run)
        write_corpus(spec, run.out / "corpus")
        run = run.model_copy(update={"manifest": run.out / "corpus" / MANIFEST_NAME})
    manifest = _manifest(run)
    reference = run.reference_annotator or manifest.reference_annotator or REFERENCE_ANNOTATOR
    corpus = load_corpus(manifest)

    result = run_experiment(corpus, reference, _mlp_config(run, _input_size()), run.metrics)
    Storage.save_model(run.out / "ship.model", result.ship_model)
    Storage.save_model(run.out / "iso.model", result.iso_model)
    (run.out / "experiment.tsv").write_text(result.report.to_table(), encoding="utf-8")
    (run.out / "experiment.json").write_text(result.report.to_json(), encoding="utf-8")
    sys.stdout.write(result.report.to_table())


COMMANDS = {
    Command.SYNTH: cmd_synth,
    Command.TRAIN: cmd_train,
    Command.PERSONALIZE: cmd_personalize,
    Command.EVALUATE: cmd_evaluate,
    Command.EXPERIMENT: cmd_experiment,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(
        level=settings.log_level,
        stream=sys.stderr,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        run = parse_run_config(argv)
        COMMANDS[run.command](run)
    except ValidationError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except (ShipError, OSError) as e:
        run_monitor.record_error()
        logger.debug("Command failed", exc_info=True)
        print(f"error: {e}", file=sys.stderr)
        return 1
    return 0
