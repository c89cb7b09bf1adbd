"""Command-line entry point wiring all pipeline stages.

Subcommands: build-dataset, score, aggregate, aggregate-binary,
calibrate, predict-external, evaluate, and pipeline (chains the stages
from one TOML config). Errors exit nonzero with a machine-readable JSON
object on stderr; exit codes distinguish usage errors (2), missing
inputs (3), and dataset validation failures (4) from other failures (1).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import aggregation, calibration, dataset, evaluation, external, interchange, manifest, scoring
from .types import ALL_CONFIGS, AggregationConfig, DatasetLoadError, ValidationError

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 2
EXIT_MISSING_INPUT = 3
EXIT_VALIDATION = 4


class CliError(Exception):
    def __init__(self, message, code=EXIT_ERROR, **details):
        super().__init__(message)
        self.code = code
        self.details = details


def _fail_json(kind, message, code, **details):
    print(json.dumps({"error": kind, "message": message, **details}), file=sys.stderr)
    return code


def _require_file(path, flag):
    path = Path(path)
    if not path.exists():
        raise CliError(f"{flag}: no such path: {path}", EXIT_MISSING_INPUT, path=str(path))
    return path


def _build_scorer(args) -> scoring.Scorer:
    if args.backend == "oracle":
        return scoring.OracleScorer.from_path(_require_file(args.input, "--input"))
    if args.backend == "constant":
        return scoring.ConstantScorer(args.value)
    if args.backend == "lexical":
        return scoring.LexicalScorer()
    if args.backend == "file":
        if not args.scores:
            raise CliError("--backend file requires --scores", EXIT_USAGE)
        return scoring.FileScorer.from_path(_require_file(args.scores, "--scores"))
    if args.backend == "remote":
        if not args.url:
            raise CliError("--backend remote requires --url", EXIT_USAGE)
        return scoring.RemoteScorer(
            args.url, timeout=args.timeout, retries=args.retries,
            max_in_flight=args.max_in_flight,
        )
    raise CliError(f"unknown backend {args.backend!r}", EXIT_USAGE)


# --- subcommands ------------------------------------------------------------

def cmd_build_dataset(args) -> int:
    input_path = _require_file(args.input, "--input")
    spec = dataset.SplitSpec(
        train_fraction=args.train_frac,
        validation_fraction_of_train=args.val_frac_of_train,
        seed=args.seed,
    )
    built = dataset.build(input_path, args.output, spec, args.n)
    manifest.write_manifest(
        Path(args.output) / "manifest.json",
        "build-dataset",
        {"input": str(input_path), "n": args.n, "seed": args.seed,
         "train_frac": args.train_frac, "val_frac_of_train": args.val_frac_of_train},
        outputs=[str(Path(args.output))],
    )
    counts = built.stats["ranking_pairs"]["test"]
    print(
        f"built dataset under {args.output}: "
        f"{built.stats['questions']} questions, "
        f"{counts['answerable']}+{counts['unanswerable']} test rankings"
    )
    return EXIT_OK


def cmd_score(args) -> int:
    input_path = _require_file(args.input, "--input")
    scorer = _build_scorer(args)
    instances = interchange.load_sentence_instances(input_path)
    written = scoring.score_dataset(scorer, instances, args.output, resume=not args.no_resume)
    manifest.write_manifest(
        str(args.output) + ".manifest.json",
        "score",
        {"backend": args.backend, "input": str(input_path), "output": str(args.output)},
        outputs=[str(args.output)],
    )
    print(f"wrote {written} new score record(s) to {args.output}")
    return EXIT_OK


def _aggregate_once(scores, rankings, config, output_path):
    results = aggregation.run_pipeline(scores, rankings, config)
    interchange.write_jsonl(output_path, aggregation.predictions_to_objs(results, config))
    return output_path


def cmd_aggregate(args) -> int:
    scores = interchange.load_score_records(_require_file(args.scores, "--scores"))
    rankings = interchange.load_rankings(_require_file(args.rankings, "--rankings"))
    output = Path(args.output)
    written = []
    if args.all_configs:
        for config in ALL_CONFIGS:
            path = output.with_name(
                output.stem + f".{config.name}" + (output.suffix or ".jsonl")
            )
            written.append(_aggregate_once(scores, rankings, config, path))
    else:
        config = AggregationConfig(
            passage_fn=args.passage_fn,
            ranking_fn=args.ranking_fn,
            passage_threshold=args.passage_threshold,
            ranking_threshold=args.ranking_threshold,
        )
        written.append(_aggregate_once(scores, rankings, config, output))
    manifest.write_manifest(
        str(output) + ".manifest.json",
        "aggregate",
        {"scores": str(args.scores), "rankings": str(args.rankings),
         "all_configs": args.all_configs, "passage_fn": args.passage_fn,
         "ranking_fn": args.ranking_fn,
         "passage_threshold": args.passage_threshold,
         "ranking_threshold": args.ranking_threshold},
        outputs=[str(p) for p in written],
    )
    for p in written:
        print(f"wrote predictions to {p}")
    return EXIT_OK


def cmd_aggregate_binary(args) -> int:
    predictions = interchange.load_predictions(_require_file(args.predictions, "--predictions"))
    rankings = interchange.load_rankings(_require_file(args.rankings, "--rankings"))
    by_passage = {}
    for row in predictions:
        key = (row["question_id"], row["passage_id"])
        by_passage[key] = row.get("prediction")
    rows = aggregation.aggregate_binary_file(by_passage, rankings, args.mode)
    interchange.write_jsonl(args.output, rows)
    manifest.write_manifest(
        str(args.output) + ".manifest.json",
        "aggregate-binary",
        {"predictions": str(args.predictions), "rankings": str(args.rankings),
         "mode": args.mode},
        outputs=[str(args.output)],
    )
    unpredicted = sum(1 for r in rows if r.get("unpredicted"))
    print(f"wrote {len(rows)} ranking decision(s) to {args.output}"
          + (f" ({unpredicted} unpredicted)" if unpredicted else ""))
    return EXIT_OK


def cmd_calibrate(args) -> int:
    scores = interchange.load_score_records(_require_file(args.scores, "--scores"))
    instances_path = _require_file(args.instances, "--instances")
    if args.level == "passage":
        instances = interchange.load_passage_instances(instances_path)
    else:
        instances = interchange.load_rankings(instances_path)
    result = calibration.calibrate(
        scores, instances, args.fn, args.level, args.step, passage_fn=args.passage_fn
    )
    Path(args.output).parent.mkdir(parents=True, exist_ok=True)
    with open(args.output, "w", encoding="utf-8") as f:
        json.dump(result.to_obj(), f, indent=2)
        f.write("\n")
    manifest.write_manifest(
        str(args.output) + ".manifest.json",
        "calibrate",
        {"scores": str(args.scores), "instances": str(args.instances),
         "fn": args.fn, "level": args.level, "step": args.step,
         "passage_fn": args.passage_fn},
        outputs=[str(args.output)],
    )
    print(
        f"{args.level}/{args.fn}: threshold {result.chosen_threshold} "
        f"(validation accuracy {result.accuracy:.3f})"
    )
    return EXIT_OK


def cmd_predict_external(args) -> int:
    spec = external.PredictorSpec.from_path(_require_file(args.spec, "--spec"))
    instances = _require_file(args.instances, "--instances")
    corpus = _require_file(args.corpus, "--corpus") if args.corpus else None
    run = external.run_predictor(spec, instances, args.output, corpus_path=corpus)
    print(
        f"predicted {run['n_predicted']}/{run['n_instances']} instance(s); "
        f"errors: {run['errors']}"
    )
    return EXIT_OK


def _prediction_entries(paths, skip_unpredicted):
    """Load prediction files into (level, config, {identity: decision})."""
    entries = []
    for path in paths:
        rows = interchange.load_predictions(path)
        if not rows:
            raise CliError(f"empty prediction file: {path}", EXIT_ERROR)
        by_config: dict[tuple[str, str], dict] = {}
        for row in rows:
            if "passage_ids" in row:
                level = "ranking"
                identity = (row["question_id"], tuple(row["passage_ids"]))
            elif "sentence_index" in row:
                level = "sentence"
                identity = (row["question_id"], row["passage_id"], row["sentence_index"])
            else:
                level = "passage"
                identity = (row["question_id"], row["passage_id"])
            decision = row.get("decision", row.get("prediction"))
            if decision is None:
                if skip_unpredicted:
                    continue
                raise CliError(
                    f"{path}: unpredicted instance {identity}; pass "
                    "--skip-unpredicted to evaluate on the predicted subset",
                    EXIT_ERROR,
                )
            config = row.get("config", Path(path).stem)
            by_config.setdefault((level, config), {})[identity] = decision
        for (level, config), preds in by_config.items():
            entries.append((level, config, preds))
    return entries


def _load_labels(path):
    rows = list(interchange.read_jsonl(path))
    labels_by_level: dict[str, dict] = {}
    for row in rows:
        if "passage_ids" in row:
            labels_by_level.setdefault("ranking", {})[
                (row["question_id"], tuple(row["passage_ids"]))
            ] = row["label"]
        elif "sentence_index" in row:
            labels_by_level.setdefault("sentence", {})[
                (row["question_id"], row["passage_id"], row["sentence_index"])
            ] = row["label"]
        else:
            labels_by_level.setdefault("passage", {})[
                (row["question_id"], row["passage_id"])
            ] = row["label"]
    return labels_by_level


def cmd_evaluate(args) -> int:
    labels_by_level = _load_labels(_require_file(args.labels, "--labels"))
    for p in args.predictions:
        _require_file(p, "--predictions")
    entries = _prediction_entries(args.predictions, args.skip_unpredicted)
    if args.skip_unpredicted:
        # Evaluate on instances every config predicted, so accuracy and
        # the pairwise McNemar counts stay aligned on one common subset.
        for level in {lv for lv, _, _ in entries}:
            common = set(labels_by_level[level])
            for lv, _, preds in entries:
                if lv == level:
                    common &= set(preds)
            if not common:
                raise CliError(
                    f"no {level} instance was predicted by every config",
                    EXIT_ERROR,
                )
            labels_by_level[level] = {
                k: v for k, v in labels_by_level[level].items() if k in common
            }
        entries = [
            (lv, cfg, {k: v for k, v in preds.items() if k in labels_by_level[lv]})
            for lv, cfg, preds in entries
        ]
    report_obj, text = evaluation.report(entries, labels_by_level)
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "report.json", "w", encoding="utf-8") as f:
        json.dump(report_obj, f, indent=2)
        f.write("\n")
    (out / "report.txt").write_text(text, encoding="utf-8")
    manifest.write_manifest(
        out / "manifest.json",
        "evaluate",
        {"predictions": [str(p) for p in args.predictions], "labels": str(args.labels),
         "skip_unpredicted": args.skip_unpredicted},
        outputs=[str(out / "report.json"), str(out / "report.txt")],
    )
    print(text)
    return EXIT_OK


def cmd_pipeline(args) -> int:
    config_path = _require_file(args.config, "--config")
    raw = config_path.read_bytes()
    try:
        cfg = tomllib.loads(raw.decode("utf-8"))
    except tomllib.TOMLDecodeError as e:
        raise CliError(f"invalid pipeline config: {e}", EXIT_USAGE)

    base = config_path.parent

    def resolve(p):
        p = Path(p)
        return p if p.is_absolute() else base / p

    corpus = _require_file(resolve(cfg["corpus"]["input"]), "corpus.input")
    out_dir = resolve(cfg["output"]["dir"])
    split_cfg = cfg.get("split", {})
    spec = dataset.SplitSpec(
        train_fraction=split_cfg.get("train_fraction", 0.9),
        validation_fraction_of_train=split_cfg.get("validation_fraction_of_train", 0.1),
        seed=split_cfg.get("seed", 0),
    )
    n = cfg.get("dataset", {}).get("n", 3)

    dataset_dir = out_dir / "dataset"
    built = dataset.build(corpus, dataset_dir, spec, n)

    scorer_cfg = cfg.get("scorer", {"backend": "oracle"})
    backend = scorer_cfg.get("backend", "oracle")
    test_sentences = dataset_dir / "sentences.test.jsonl"
    instances = interchange.load_sentence_instances(test_sentences)
    if backend == "oracle":
        scorer = scoring.OracleScorer.from_instances(instances)
    elif backend == "constant":
        scorer = scoring.ConstantScorer(scorer_cfg.get("value", 0.5))
    elif backend == "lexical":
        scorer = scoring.LexicalScorer()
    elif backend == "file":
        scorer = scoring.FileScorer.from_path(resolve(scorer_cfg["scores"]))
    elif backend == "remote":
        scorer = scoring.RemoteScorer(
            scorer_cfg["url"],
            timeout=scorer_cfg.get("timeout", 30.0),
            retries=scorer_cfg.get("retries", 2),
            max_in_flight=scorer_cfg.get("max_in_flight", 1),
        )
    else:
        raise CliError(f"unknown scorer backend {backend!r}", EXIT_USAGE)

    scores_path = out_dir / "scores" / "test.jsonl"
    if scores_path.exists():
        scores_path.unlink()  # pipeline runs are never resumed mid-file
    scoring.score_dataset(scorer, instances, scores_path)
    scores = interchange.load_score_records(scores_path)

    rankings = interchange.load_rankings(dataset_dir / "rankings.test.jsonl")
    if not rankings:
        raise CliError(
            "no test ranking instances were generated; check the split "
            "configuration (the test partition may be empty)",
            EXIT_VALIDATION,
        )
    agg_cfg = cfg.get("aggregation", {})
    if agg_cfg.get("all_configs", True):
        configs = list(ALL_CONFIGS)
    else:
        configs = [AggregationConfig(
            passage_fn=agg_cfg.get("passage_fn", "max"),
            ranking_fn=agg_cfg.get("ranking_fn", "mean"),
            passage_threshold=agg_cfg.get("passage_threshold"),
            ranking_threshold=agg_cfg.get("ranking_threshold"),
        )]
    prediction_paths = []
    for config in configs:
        path = out_dir / "predictions" / f"rankings.{config.name}.jsonl"
        _aggregate_once(scores, rankings, config, path)
        prediction_paths.append(path)

    labels_by_level = _load_labels(dataset_dir / "rankings.test.jsonl")
    entries = _prediction_entries(prediction_paths, skip_unpredicted=False)
    report_obj, text = evaluation.report(entries, labels_by_level)
    report_dir = out_dir / "report"
    report_dir.mkdir(parents=True, exist_ok=True)
    with open(report_dir / "report.json", "w", encoding="utf-8") as f:
        json.dump(report_obj, f, indent=2)
        f.write("\n")
    (report_dir / "report.txt").write_text(text, encoding="utf-8")

    manifest.write_manifest(
        out_dir / "pipeline.manifest.json",
        "pipeline",
        raw,
        outputs=[str(dataset_dir), str(scores_path)]
                + [str(p) for p in prediction_paths]
                + [str(report_dir)],
    )
    print(text)
    print(f"pipeline outputs under {out_dir}")
    return EXIT_OK


# --- parser -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="answerability",
        description="Predict whether questions are answerable from ranked passages.",
        epilog=(
            "File formats are JSONL (one JSON object per line, UTF-8). Corpus "
            "records carry a 'kind' field (question | passage | nugget | ranking); "
            "score records carry question_id, passage_id, sentence_index, "
            "probability; prediction records carry the instance identity, a "
            "config name, and a binary decision."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-dataset", help="build the three-level labeled dataset")
    p.add_argument("--input", required=True, help="corpus JSONL file or directory")
    p.add_argument("--output", required=True, help="output directory")
    p.add_argument("--n", type=int, default=3, help="ranking size (default 3)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--train-frac", type=float, default=0.9)
    p.add_argument("--val-frac-of-train", type=float, default=0.1)
    p.set_defaults(func=cmd_build_dataset)

    p = sub.add_parser("score", help="score sentence instances with a backend")
    p.add_argument("--backend", required=True,
                   choices=["oracle", "constant", "lexical", "file", "remote"])
    p.add_argument("--input", required=True, help="sentence instance JSONL")
    p.add_argument("--output", required=True, help="score record JSONL")
    p.add_argument("--value", type=float, default=0.5, help="constant backend value")
    p.add_argument("--scores", help="file backend: precomputed score records")
    p.add_argument("--url", help="remote backend: service base URL")
    p.add_argument("--timeout", type=float, default=30.0)
    p.add_argument("--retries", type=int, default=2)
    p.add_argument("--max-in-flight", type=int, default=1)
    p.add_argument("--no-resume", action="store_true",
                   help="overwrite instead of resuming a partial output")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("aggregate", help="aggregate scores into ranking decisions")
    p.add_argument("--scores", required=True)
    p.add_argument("--rankings", required=True)
    p.add_argument("--passage-fn", choices=["max", "mean"], default="max")
    p.add_argument("--ranking-fn", choices=["max", "mean"], default="mean")
    p.add_argument("--passage-threshold", type=float, default=None)
    p.add_argument("--ranking-threshold", type=float, default=None)
    p.add_argument("--all-configs", action="store_true",
                   help="emit all four max/mean combinations")
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_aggregate)

    p = sub.add_parser("aggregate-binary",
                       help="aggregate binary passage predictions per ranking")
    p.add_argument("--predictions", required=True,
                   help="passage-level binary prediction JSONL")
    p.add_argument("--rankings", required=True)
    p.add_argument("--mode", required=True, choices=list(aggregation.BINARY_MODES))
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_aggregate_binary)

    p = sub.add_parser("calibrate", help="select thresholds on validation data")
    p.add_argument("--scores", required=True)
    p.add_argument("--instances", required=True,
                   help="passage instances or ranking instances JSONL")
    p.add_argument("--fn", required=True, choices=["max", "mean"])
    p.add_argument("--level", required=True, choices=["passage", "ranking"])
    p.add_argument("--passage-fn", choices=["max", "mean"], default=None,
                   help="ranking level only: passage-stage function (default --fn)")
    p.add_argument("--step", type=float, default=0.05)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("predict-external", help="run a black-box predictor")
    p.add_argument("--spec", required=True, help="predictor spec JSON")
    p.add_argument("--instances", required=True)
    p.add_argument("--corpus", help="corpus JSONL for ranking-mode text lookup")
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_predict_external)

    p = sub.add_parser("evaluate", help="accuracy report with McNemar tests")
    p.add_argument("--predictions", required=True, nargs="+")
    p.add_argument("--labels", required=True)
    p.add_argument("--output", required=True, help="report directory")
    p.add_argument("--skip-unpredicted", action="store_true",
                   help="evaluate on the predicted subset instead of failing")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("pipeline", help="run build/score/aggregate/evaluate end to end")
    p.add_argument("--config", required=True, help="pipeline TOML config")
    p.set_defaults(func=cmd_pipeline)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as e:
        return _fail_json("cli", str(e), e.code, **e.details)
    except ValidationError as e:
        return _fail_json(
            "validation", str(e), EXIT_VALIDATION,
            violations=[str(v) for v in e.violations],
        )
    except DatasetLoadError as e:
        return _fail_json("load", str(e), EXIT_MISSING_INPUT)
    except FileNotFoundError as e:
        return _fail_json("missing-file", str(e), EXIT_MISSING_INPUT, path=str(e.filename))
    except (scoring.ScoringError, aggregation.MissingScoreError,
            evaluation.IdentityMismatchError, external.PredictorError, ValueError) as e:
        return _fail_json(type(e).__name__, str(e), EXIT_ERROR)


if __name__ == "__main__":
    sys.exit(main())
