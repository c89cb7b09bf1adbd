import json
from pathlib import Path

import pytest

from answerability import cli, interchange

from conftest import TOY_DIR


def run_cli(args, capsys):
    code = cli.main(args)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def pipeline_config(tmp_path, corpus=None, seed=7):
    corpus = corpus or (TOY_DIR / "corpus.jsonl")
    out_dir = tmp_path / "out"
    config = tmp_path / "pipeline.toml"
    config.write_text(f"""\
[corpus]
input = "{corpus}"

[output]
dir = "{out_dir}"

[dataset]
n = 3

[split]
seed = {seed}
train_fraction = 0.5
validation_fraction_of_train = 0.34

[scorer]
backend = "oracle"

[aggregation]
all_configs = true
""", encoding="utf-8")
    return config, out_dir


def test_pipeline_smoke_on_toy_fixture(tmp_path, capsys):
    config, out_dir = pipeline_config(tmp_path)
    code, out, err = run_cli(["pipeline", "--config", str(config)], capsys)
    assert code == 0, err
    assert (out_dir / "report" / "report.json").exists()
    assert (out_dir / "report" / "report.txt").exists()
    assert (out_dir / "pipeline.manifest.json").exists()
    report = json.loads((out_dir / "report" / "report.json").read_text())
    by_config = {
        r["config"]: r["accuracy"] for r in report["levels"][0]["rows"]
    }
    assert by_config["max-mean"] == 1.0
    assert "ranking level" in out


def test_pipeline_determinism_byte_identical(tmp_path, capsys):
    def run_once(base):
        base.mkdir()
        config, out_dir = pipeline_config(base)
        code, _, err = run_cli(["pipeline", "--config", str(config)], capsys)
        assert code == 0, err
        digests = {}
        for path in sorted(out_dir.rglob("*")):
            if path.is_file() and "manifest" not in path.name:
                digests[str(path.relative_to(out_dir))] = path.read_bytes()
        return digests

    first = run_once(tmp_path / "a")
    second = run_once(tmp_path / "b")
    assert first.keys() == second.keys()
    for name in first:
        assert first[name] == second[name], f"{name} differs between runs"


def test_missing_input_exits_3_with_json_error(tmp_path, capsys):
    code, out, err = run_cli([
        "score", "--backend", "constant",
        "--input", str(tmp_path / "nope.jsonl"),
        "--output", str(tmp_path / "scores.jsonl"),
    ], capsys)
    assert code == 3
    payload = json.loads(err.strip())
    assert "nope.jsonl" in payload["message"]


def test_validation_failure_exits_4(tmp_path, capsys):
    corpus = tmp_path / "bad.jsonl"
    corpus.write_text("\n".join([
        json.dumps({"kind": "question", "id": "q1", "text": "what?"}),
        json.dumps({"kind": "passage", "id": "p1", "question_id": "q1",
                    "text": "Some text.", "relevant": True, "sentences": []}),
        json.dumps({"kind": "nugget", "question_id": "q1", "passage_id": "p1",
                    "span": [0, 400]}),
    ]) + "\n", encoding="utf-8")
    code, out, err = run_cli([
        "build-dataset", "--input", str(corpus), "--output", str(tmp_path / "out"),
    ], capsys)
    assert code == 4
    payload = json.loads(err.strip())
    assert payload["error"] == "validation"
    assert any("p1" in v for v in payload["violations"])


def test_unknown_flag_exits_2(capsys):
    with pytest.raises(SystemExit) as excinfo:
        cli.main(["score", "--no-such-flag"])
    assert excinfo.value.code == 2


def test_help_exits_zero(capsys):
    with pytest.raises(SystemExit) as excinfo:
        cli.main(["--help"])
    assert excinfo.value.code == 0
    assert "JSONL" in capsys.readouterr().out


def build_toy(tmp_path, capsys):
    out = tmp_path / "dataset"
    code, _, err = run_cli([
        "build-dataset",
        "--input", str(TOY_DIR / "corpus.jsonl"),
        "--output", str(out),
        "--n", "3", "--seed", "7",
        "--train-frac", "0.5", "--val-frac-of-train", "0.34",
    ], capsys)
    assert code == 0, err
    return out


def test_build_then_score_then_aggregate_then_evaluate(tmp_path, capsys):
    dataset_dir = build_toy(tmp_path, capsys)
    for name in ("sentences.test.jsonl", "passages.test.jsonl",
                 "rankings.test.jsonl", "stats.json", "manifest.json"):
        assert (dataset_dir / name).exists()

    scores = tmp_path / "scores.jsonl"
    code, _, err = run_cli([
        "score", "--backend", "oracle",
        "--input", str(dataset_dir / "sentences.test.jsonl"),
        "--output", str(scores),
    ], capsys)
    assert code == 0, err

    predictions = tmp_path / "pred.jsonl"
    code, _, err = run_cli([
        "aggregate", "--scores", str(scores),
        "--rankings", str(dataset_dir / "rankings.test.jsonl"),
        "--all-configs", "--output", str(predictions),
    ], capsys)
    assert code == 0, err
    produced = sorted(p.name for p in tmp_path.glob("pred.*.jsonl"))
    assert produced == [
        "pred.max-max.jsonl", "pred.max-mean.jsonl",
        "pred.mean-max.jsonl", "pred.mean-mean.jsonl",
    ]

    report_dir = tmp_path / "report"
    code, out, err = run_cli([
        "evaluate",
        "--predictions", *[str(tmp_path / name) for name in produced],
        "--labels", str(dataset_dir / "rankings.test.jsonl"),
        "--output", str(report_dir),
    ], capsys)
    assert code == 0, err
    report = json.loads((report_dir / "report.json").read_text())
    rows = report["levels"][0]["rows"]
    assert [r["config"] for r in rows] == [
        "max-max", "max-mean", "mean-max", "mean-mean",
    ]


def test_single_config_aggregate_honors_threshold_flags(tmp_path, capsys):
    dataset_dir = build_toy(tmp_path, capsys)
    scores = tmp_path / "scores.jsonl"
    run_cli([
        "score", "--backend", "constant", "--value", "0.4",
        "--input", str(dataset_dir / "sentences.test.jsonl"),
        "--output", str(scores),
    ], capsys)
    predictions = tmp_path / "pred.jsonl"
    code, _, err = run_cli([
        "aggregate", "--scores", str(scores),
        "--rankings", str(dataset_dir / "rankings.test.jsonl"),
        "--passage-fn", "max", "--ranking-fn", "max",
        "--passage-threshold", "0.4", "--ranking-threshold", "0.39",
        "--output", str(predictions),
    ], capsys)
    assert code == 0, err
    rows = interchange.load_predictions(predictions)
    assert all(r["decision"] == 1 for r in rows)


def test_calibrate_cli(tmp_path, capsys):
    dataset_dir = build_toy(tmp_path, capsys)
    scores = tmp_path / "scores.validation.jsonl"
    run_cli([
        "score", "--backend", "oracle",
        "--input", str(dataset_dir / "sentences.validation.jsonl"),
        "--output", str(scores),
    ], capsys)
    out = tmp_path / "calibration.json"
    code, _, err = run_cli([
        "calibrate", "--scores", str(scores),
        "--instances", str(dataset_dir / "passages.validation.jsonl"),
        "--fn", "max", "--level", "passage", "--step", "0.05",
        "--output", str(out),
    ], capsys)
    assert code == 0, err
    result = json.loads(out.read_text())
    assert result["accuracy"] == 1.0
    assert result["chosen_threshold"] == 0.05
    assert len(result["curve"]) == 21


def test_aggregate_binary_cli(tmp_path, capsys):
    dataset_dir = build_toy(tmp_path, capsys)
    passage_rows = interchange.load_predictions(dataset_dir / "passages.test.jsonl")
    predictions = tmp_path / "passage_pred.jsonl"
    interchange.write_jsonl(predictions, (
        {"question_id": r["question_id"], "passage_id": r["passage_id"],
         "prediction": r["label"]}
        for r in passage_rows
    ))
    out = tmp_path / "binary.jsonl"
    code, _, err = run_cli([
        "aggregate-binary", "--predictions", str(predictions),
        "--rankings", str(dataset_dir / "rankings.test.jsonl"),
        "--mode", "t33", "--output", str(out),
    ], capsys)
    assert code == 0, err
    rows = interchange.load_predictions(out)
    labels = {
        (r.question_id, r.passage_ids): r.label
        for r in interchange.load_rankings(dataset_dir / "rankings.test.jsonl")
    }
    # Oracle passage predictions + t33 reproduce OR ground truth exactly.
    for row in rows:
        key = (row["question_id"], tuple(row["passage_ids"]))
        assert row["decision"] == labels[key]


def test_evaluate_fails_on_unpredicted_without_flag(tmp_path, capsys):
    dataset_dir = build_toy(tmp_path, capsys)
    rankings = interchange.load_rankings(dataset_dir / "rankings.test.jsonl")
    predictions = tmp_path / "partial.jsonl"
    rows = []
    for i, r in enumerate(rankings):
        row = {"question_id": r.question_id, "passage_ids": list(r.passage_ids),
               "config": "external-ranking"}
        if i > 0:
            row["prediction"] = r.label
        else:
            row["error"] = "timeout"
        rows.append(row)
    interchange.write_jsonl(predictions, rows)

    code, _, err = run_cli([
        "evaluate", "--predictions", str(predictions),
        "--labels", str(dataset_dir / "rankings.test.jsonl"),
        "--output", str(tmp_path / "report"),
    ], capsys)
    assert code == 1
    assert "skip-unpredicted" in json.loads(err.strip())["message"]

    code, out, err = run_cli([
        "evaluate", "--predictions", str(predictions),
        "--labels", str(dataset_dir / "rankings.test.jsonl"),
        "--output", str(tmp_path / "report"),
        "--skip-unpredicted",
    ], capsys)
    assert code == 0, err
    report = json.loads((tmp_path / "report" / "report.json").read_text())
    assert report["levels"][0]["rows"][0]["n_instances"] == len(rankings) - 1


def test_skip_unpredicted_with_differing_gaps_uses_common_subset(tmp_path, capsys):
    dataset_dir = build_toy(tmp_path, capsys)
    rankings = interchange.load_rankings(dataset_dir / "rankings.test.jsonl")

    def partial_file(name, config, missing_index):
        rows = []
        for i, r in enumerate(rankings):
            row = {"question_id": r.question_id,
                   "passage_ids": list(r.passage_ids), "config": config}
            if i == missing_index:
                row["error"] = "timeout"
            else:
                row["prediction"] = r.label
            rows.append(row)
        path = tmp_path / name
        interchange.write_jsonl(path, rows)
        return path

    a = partial_file("a.jsonl", "external-a", missing_index=0)
    b = partial_file("b.jsonl", "external-b", missing_index=3)
    code, _, err = run_cli([
        "evaluate", "--predictions", str(a), str(b),
        "--labels", str(dataset_dir / "rankings.test.jsonl"),
        "--output", str(tmp_path / "report"),
        "--skip-unpredicted",
    ], capsys)
    assert code == 0, err
    report = json.loads((tmp_path / "report" / "report.json").read_text())
    rows = report["levels"][0]["rows"]
    # Both configs evaluated on the common predicted subset.
    assert all(r["n_instances"] == len(rankings) - 2 for r in rows)
    assert all(r["accuracy"] == 1.0 for r in rows)


def test_score_resume_via_cli(tmp_path, capsys):
    dataset_dir = build_toy(tmp_path, capsys)
    sentences = dataset_dir / "sentences.test.jsonl"
    scores = tmp_path / "scores.jsonl"
    run_cli(["score", "--backend", "constant", "--value", "0.5",
             "--input", str(sentences), "--output", str(scores)], capsys)
    before = scores.read_text()
    code, out, _ = run_cli(["score", "--backend", "constant", "--value", "0.9",
                            "--input", str(sentences), "--output", str(scores)], capsys)
    assert code == 0
    assert "0 new score record(s)" in out
    assert scores.read_text() == before
