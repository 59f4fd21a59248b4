"""Command-line front end.

Subcommands wire the library into reproducible batch steps: ``gen`` writes a
synthetic corpus, ``extract`` turns a manifest into a feature table,
``rank`` orders features by information gain, ``crossval`` runs stratified
cross-validation, ``agree`` compares classifier output with listener
responses, and ``synth`` resynthesizes a pitch/energy pair as audio.

Every command is deterministic given its inputs, configuration and seed.
Exit codes: 0 success, 1 usage or configuration error, 2 data or validation
error, 3 numeric error.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, fields

from . import agreement as agr
from .audio import synthesize_stimulus, write_wav
from .dataio import (
    STYLES,
    load_dataset,
    load_energy_contour,
    load_pitch_track,
    load_responses,
    to_cents,
)
from .errors import ConfigError, MelostyleError, NumericError
from .features import (
    extract_clip_features,
    feature_vectors_to_table,
    load_clip_data,
    load_feature_table,
    write_feature_table,
)
from .learn import (
    KnnVoteClassifier,
    QuadraticGaussianClassifier,
    cross_validate,
    rank_features,
    write_cv_confusion,
    write_cv_predictions,
    write_cv_summary,
)
from .synthcorpus import generate_corpus

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3


@dataclass
class RunConfig:
    """Every tunable parameter, under its canonical config-file key.

    File format is line-oriented ``key=value``; command-line flags of the
    same name override file values. Defaults are the method's standard
    operating values (N=400 ms, J=20 cents, x=0.3, 8-cent bins, k=7,
    5 folds).
    """

    N_ms: float = 400.0
    J_cents: float = 20.0
    x: float = 0.3
    bin_width: float = 8.0
    median_win_bins: int = 7
    floor_frac: float = 0.05
    dev: float = 20.0
    k: int = 7
    folds: int = 5
    seed: int = 0
    ridge: float = 1e-6
    bins: int = 10


CONFIG_TYPES = {f.name: f.type for f in fields(RunConfig)}


def load_config_file(path: str) -> dict:
    values = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    for lineno, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"{path}: line {lineno}: expected key=value")
        key, _, raw = stripped.partition("=")
        key, raw = key.strip(), raw.strip()
        if key not in CONFIG_TYPES:
            raise ConfigError(f"{path}: line {lineno}: unknown key {key!r}")
        try:
            caster = int if CONFIG_TYPES[key] in ("int", int) else float
            values[key] = caster(raw)
        except ValueError as exc:
            raise ConfigError(f"{path}: line {lineno}: bad value for {key}: {exc}") from exc
    return values


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Config file first, then explicit command-line overrides."""
    values = {}
    if getattr(args, "config", None):
        values.update(load_config_file(args.config))
    for name in CONFIG_TYPES:
        override = getattr(args, name, None)
        if override is not None:
            values[name] = override
    return RunConfig(**values)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _add_config_flags(parser: argparse.ArgumentParser, keys: tuple[str, ...]) -> None:
    parser.add_argument("--config", help="key=value parameter file")
    for key in keys:
        caster = int if CONFIG_TYPES[key] in ("int", int) else float
        parser.add_argument(f"--{key}", type=caster, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="melostyle", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a synthetic style corpus")
    p.add_argument("--style", required=True, choices=STYLES + ("all",))
    p.add_argument("--count", type=int, required=True, help="total clips")
    p.add_argument("--duration", type=float, default=30.0, help="seconds per clip")
    p.add_argument("--audio", action="store_true", help="also synthesize WAV audio")
    p.add_argument("--out", required=True, help="output directory")
    _add_config_flags(p, ("seed",))

    p = sub.add_parser("extract", help="compute the feature table for a manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True, help="feature table file")
    _add_config_flags(
        p,
        ("N_ms", "J_cents", "x", "bin_width", "median_win_bins", "floor_frac", "dev"),
    )

    p = sub.add_parser("rank", help="rank features by information gain")
    p.add_argument("--table", required=True, help="feature table file")
    p.add_argument("--out", required=True, help="ranked list file")
    _add_config_flags(p, ("bins",))

    p = sub.add_parser("crossval", help="stratified cross-validation")
    p.add_argument("--table", required=True, help="feature table file")
    p.add_argument("--classifier", choices=("quadratic", "knn"), default="quadratic")
    p.add_argument(
        "--subset",
        default="A",
        choices=("A", "B", "C", "all", "melodic", "timbre", "melodic+timbre"),
    )
    p.add_argument("--out", required=True, help="output directory for report files")
    _add_config_flags(p, ("k", "folds", "seed", "ridge"))

    p = sub.add_parser(
        "agree",
        help="compare classifier predictions with listener responses",
        epilog=(
            "Reports the Pearson correlation and its t statistic. The two-way "
            "ANOVA variant is intentionally not implemented: building its "
            "replicated contingency table requires choices the available "
            "description does not determine."
        ),
    )
    p.add_argument("--predictions", required=True, help="crossval predictions file")
    p.add_argument("--responses", required=True, help="listener responses file")
    p.add_argument("--out", required=True, help="agreement report file")
    _add_config_flags(p, ("seed",))

    p = sub.add_parser("synth", help="resynthesize a melody as 3-harmonic audio")
    p.add_argument("--pitch", required=True, help="pitch track file")
    p.add_argument("--energy", required=True, help="energy contour file")
    p.add_argument("--tonic", type=float, required=True, help="tonic in Hz")
    p.add_argument("--out", required=True, help="output WAV path")
    _add_config_flags(p, ("seed",))

    return parser


def cmd_gen(args) -> int:
    config = resolve_config(args)
    styles = STYLES if args.style == "all" else (args.style,)
    manifest = generate_corpus(
        args.out,
        count=args.count,
        duration_s=args.duration,
        seed=config.seed,
        styles=styles,
        audio=args.audio,
    )
    print(manifest)
    return EXIT_OK


def cmd_extract(args) -> int:
    config = resolve_config(args)
    records = load_dataset(args.manifest)
    vectors, labels, problems = [], [], []
    for record in records:
        try:
            clip = load_clip_data(record)
            vectors.append(
                extract_clip_features(
                    clip,
                    n_ms=config.N_ms,
                    j_cents=config.J_cents,
                    er_threshold=config.x,
                    bin_width=config.bin_width,
                    median_win_bins=config.median_win_bins,
                    floor_frac=config.floor_frac,
                    ed_dev=config.dev,
                )
            )
            labels.append(record.style)
            if record.audio_path is None:
                print(
                    f"warning: clip {record.clip_id}: no audio, melodic features only",
                    file=sys.stderr,
                )
        except MelostyleError as exc:
            problems.append(f"clip {record.clip_id}: {exc}")
    if problems:
        for problem in problems:
            print(f"error: {problem}", file=sys.stderr)
        return EXIT_DATA
    write_feature_table(feature_vectors_to_table(vectors, labels), args.out)
    return EXIT_OK


def cmd_rank(args) -> int:
    config = resolve_config(args)
    table = load_feature_table(args.table)
    ranking = rank_features(table, bins=config.bins)
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("feature,info_gain_bits\n")
        for name, gain in ranking:
            fh.write(f"{name},{gain:.6f}\n")
    return EXIT_OK


def cmd_crossval(args) -> int:
    config = resolve_config(args)
    table = load_feature_table(args.table).subset(args.subset)
    if args.classifier == "quadratic":
        estimator = QuadraticGaussianClassifier(ridge=config.ridge)
    else:
        estimator = KnnVoteClassifier(k=config.k)
    report = cross_validate(table, estimator, folds=config.folds, seed=config.seed)
    os.makedirs(args.out, exist_ok=True)
    write_cv_summary(report, os.path.join(args.out, "cv_summary.csv"))
    write_cv_confusion(report, os.path.join(args.out, "cv_confusion.csv"))
    write_cv_predictions(report, os.path.join(args.out, "cv_predictions.csv"))
    print(f"overall_accuracy {report.accuracy:.6f}")
    return EXIT_OK


def _load_predictions(path: str) -> list[agr.LabeledConfidence]:
    from .dataio import _read_lines
    from .errors import FormatError

    lines = _read_lines(path)
    expected = "clip_id,true,predicted,p_H,p_C,p_T"
    if not lines or lines[0].strip() != expected:
        raise FormatError(f"{path}: line 1: expected header {expected!r}")
    out = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 6:
            raise FormatError(f"{path}: line {lineno}: expected 6 columns")
        clip_id, _, predicted = parts[0], parts[1], parts[2]
        try:
            posteriors = [float(v) for v in parts[3:6]]
        except ValueError as exc:
            raise FormatError(f"{path}: line {lineno}: malformed posterior: {exc}") from exc
        out.append(
            agr.LabeledConfidence(
                clip_id=clip_id,
                label=predicted,
                confidence=agr.classifier_confidence(posteriors),
                source="Classifier",
            )
        )
    return out


def cmd_agree(args) -> int:
    classifier_labels = _load_predictions(args.predictions)
    responses = load_responses(args.responses)
    listener_labels = [
        agr.aggregate_listeners(responses, lc.clip_id) for lc in classifier_labels
    ]
    extra = sorted({r.clip_id for r in responses} - {lc.clip_id for lc in classifier_labels})
    if extra:
        from .errors import ValidationError

        raise ValidationError(f"responses cover clips absent from predictions: {extra}")
    result = agr.label_correlation(listener_labels, classifier_labels)
    agr.write_agreement_report(
        listener_labels,
        classifier_labels,
        result,
        args.out,
        counts=agr.category_counts(responses),
    )
    t_text = "inf" if result.t == float("inf") else f"{result.t:.4f}"
    print(f"r {result.r:.6f} t {t_text} n {result.n}")
    return EXIT_OK


def cmd_synth(args) -> int:
    pitch = load_pitch_track(args.pitch)
    energy = load_energy_contour(args.energy)
    cents = to_cents(pitch, args.tonic)
    write_wav(synthesize_stimulus(cents, energy, args.tonic), args.out)
    return EXIT_OK


COMMANDS = {
    "gen": cmd_gen,
    "extract": cmd_extract,
    "rank": cmd_rank,
    "crossval": cmd_crossval,
    "agree": cmd_agree,
    "synth": cmd_synth,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return COMMANDS[args.command](args)
    except (ConfigError, ValueError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except MelostyleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
