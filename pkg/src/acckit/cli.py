"""Command-line surface: import, validate, annotate, score, pipeline, silver, report.

Exit codes: 0 success, 2 input/validation error, 3 backend or protocol
failure. All outputs are deterministic given (inputs, seed, backend
behavior); timestamps go only to the sidecar run.log.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

from . import analysis, dataio, silverlabel
from .backends import (
    BackendClient,
    BackendError,
    FilePredictionsReader,
    IdentityClassifier,
    IdentityCorrector,
    OracleClassifier,
    OracleCorrector,
    ProcessTransport,
    TcpTransport,
    WireClassifier,
    WireCorrector,
    WireEmbedder,
    WireReader,
)
from .metrics import PRF, aggregate_micro, em_counts, pm_counts
from .pipeline import BackendSet, PipelineMode, run_dataset
from .similarity import HashEmbedder
from .taxonomy import Thresholds, classify_prediction

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_BACKEND = 3


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_INPUT):
        super().__init__(message)
        self.code = code


def _log(out_dir: Path | None, message: str) -> None:
    if out_dir is None:
        return
    out_dir.mkdir(parents=True, exist_ok=True)
    stamp = time.strftime("%Y-%m-%dT%H:%M:%S")
    with (out_dir / "run.log").open("a", encoding="utf-8") as fh:
        fh.write(f"{stamp} {message}\n")


def _read_dataset(path: str) -> dataio.DatasetFile:
    try:
        return dataio.read_dataset(path)
    except (OSError, dataio.DatasetError) as e:
        raise CliError(str(e))


def _read_predictions(path: str) -> dict[str, list[str]]:
    try:
        return dataio.read_predictions(path)
    except (OSError, dataio.DatasetError) as e:
        raise CliError(str(e))


def _check_known_ids(preds: dict[str, list[str]], ds: dataio.DatasetFile) -> None:
    unknown = sorted(set(preds) - {ex.id for ex in ds.examples})
    if unknown:
        raise CliError(f"predictions reference unknown example ids: {', '.join(unknown)}")


def _thresholds(args, ds: dataio.DatasetFile | None = None) -> Thresholds:
    alpha = args.alpha if args.alpha is not None else (ds.alpha if ds and ds.alpha is not None else 0.25)
    beta = args.beta if args.beta is not None else (ds.beta if ds and ds.beta is not None else 0.6)
    try:
        return Thresholds(alpha, beta)
    except ValueError as e:
        raise CliError(str(e))


def _prf_csv_lines(scores: dict[str, PRF]) -> list[str]:
    lines = ["metric,precision,recall,f1"]
    for name, prf in scores.items():
        lines.append(f"{name},{prf.precision:.6f},{prf.recall:.6f},{prf.f1:.6f}")
    return lines


# ---------------------------------------------------------------------------
# Commands


def cmd_import(args) -> int:
    try:
        ds, repairs = dataio.import_bio(args.bio, name=args.name or Path(args.bio).stem)
    except (OSError, dataio.DatasetError) as e:
        raise CliError(str(e))
    dataio.write_dataset(ds, args.out)
    print(f"imported {len(ds.examples)} examples -> {args.out} (orphan-I repairs: {repairs})")
    return EXIT_OK


def cmd_validate(args) -> int:
    ds = _read_dataset(args.dataset)
    diag = dataio.validate_dataset(ds)
    prop = diag.answer_proportions
    print(f"examples: {diag.n_examples}")
    print(
        "answer number proportions: >=2: {:.4f}  1: {:.4f}  0: {:.4f}".format(
            prop["multi"], prop["single"], prop["none"]
        )
    )
    print(f"average answer number: {diag.avg_answer_number:.4f}")
    print(f"average context length: {diag.avg_context_length:.4f}")
    print(f"average question length: {diag.avg_question_length:.4f}")
    for name, items in (
        ("duplicate ids", diag.duplicate_ids),
        ("bad gold offsets", diag.bad_offsets),
        ("empty contexts", diag.empty_contexts),
    ):
        if items:
            print(f"{name}: {', '.join(items)}")
    print("status: " + ("ok" if diag.ok else "problems found"))
    return EXIT_OK


def cmd_annotate(args) -> int:
    ds = _read_dataset(args.dataset)
    preds = _read_predictions(args.predictions)
    _check_known_ids(preds, ds)
    t = _thresholds(args, ds)
    provider = HashEmbedder()
    by_id = ds.by_id()
    counts = {"correct": 0, "partially": 0, "wrong": 0}
    records = []
    for eid in sorted(preds):
        ex = by_id[eid]
        labeled = [classify_prediction(p, ex.gold_texts, t, provider) for p in preds[eid]]
        for lp in labeled:
            counts[lp.label.value] += 1
        records.append(
            {
                "id": eid,
                "predictions": [lp.prediction for lp in labeled],
                "labels": [lp.label.value for lp in labeled],
                "best_gold": [lp.best_gold for lp in labeled],
                "wo": [round(lp.wo, 6) for lp in labeled],
                "bs": [round(lp.bs, 6) for lp in labeled],
            }
        )
    out = sys.stdout
    if args.out:
        out = open(args.out, "w", encoding="utf-8")
    try:
        for rec in records:
            out.write(json.dumps(rec, ensure_ascii=False) + "\n")
    finally:
        if args.out:
            out.close()
    print(
        f"# alpha={t.alpha} beta={t.beta} correct={counts['correct']} "
        f"partially={counts['partially']} wrong={counts['wrong']}",
        file=sys.stderr,
    )
    return EXIT_OK


def _score(ds: dataio.DatasetFile, preds: dict[str, list[str]]) -> dict[str, PRF]:
    pairs = [(preds.get(ex.id, []), ex.gold_texts) for ex in ds.examples]
    em = aggregate_micro(em_counts(p, g) for p, g in pairs)
    pm = aggregate_micro(pm_counts(p, g) for p, g in pairs)
    return {"em": em, "pm": pm}


def cmd_score(args) -> int:
    ds = _read_dataset(args.dataset)
    preds = _read_predictions(args.predictions)
    _check_known_ids(preds, ds)
    scores = _score(ds, preds)
    lines = _prf_csv_lines(scores)
    print("\n".join(lines))
    if args.out:
        Path(args.out).write_text(
            json.dumps(
                {name: vars(prf) for name, prf in scores.items()}, indent=2, sort_keys=True
            )
            + "\n",
            encoding="utf-8",
        )
    return EXIT_OK


def _make_backend_factory(args, ds: dataio.DatasetFile, thresholds: Thresholds):
    """Build a per-worker backend-set factory from the command-line specs."""
    preds = _read_predictions(args.predictions) if args.predictions else None
    if preds is not None:
        _check_known_ids(preds, ds)
    if preds is None and not args.reader_cmd:
        raise CliError("pipeline needs --predictions or --reader-cmd")

    def transport(cmd: str):
        if cmd.startswith("tcp:"):
            _, host, port = cmd.split(":", 2)
            return TcpTransport(host, int(port))
        return ProcessTransport(cmd)

    def factory() -> BackendSet:
        if args.embedder_cmd:
            provider = WireEmbedder(BackendClient(transport(args.embedder_cmd)))
        else:
            provider = HashEmbedder()
        if preds is not None:
            reader = FilePredictionsReader(preds)
        else:
            reader = WireReader(BackendClient(transport(args.reader_cmd)))
        classifier = None
        if args.classifier_cmd == "oracle":
            classifier = OracleClassifier(thresholds, provider)
        elif args.classifier_cmd == "identity":
            classifier = IdentityClassifier()
        elif args.classifier_cmd:
            classifier = WireClassifier(BackendClient(transport(args.classifier_cmd)))
        corrector = None
        if args.corrector_cmd == "oracle":
            corrector = OracleCorrector(provider)
        elif args.corrector_cmd == "identity":
            corrector = IdentityCorrector()
        elif args.corrector_cmd:
            corrector = WireCorrector(
                BackendClient(transport(args.corrector_cmd)), args.max_span_words
            )
        return BackendSet(reader, classifier, corrector)

    return factory


def cmd_pipeline(args) -> int:
    ds = _read_dataset(args.dataset)
    t = _thresholds(args, ds)
    try:
        mode = PipelineMode(args.mode)
    except ValueError:
        raise CliError(f"unknown mode: {args.mode}")
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    _log(out_dir, f"pipeline start mode={mode.value} dataset={args.dataset}")

    factory = _make_backend_factory(args, ds, t)
    workers = args.workers or os.cpu_count() or 1
    try:
        run = run_dataset(ds.examples, factory, mode, workers=workers)
    except ValueError as e:
        raise CliError(str(e))

    with (out_dir / "final.ndjson").open("w", encoding="utf-8") as fh:
        dataio.write_predictions(run.final_predictions(), fh)
    with (out_dir / "trace.ndjson").open("w", encoding="utf-8") as fh:
        for r in run.results:
            fh.write(
                json.dumps(
                    {
                        "id": r.example_id,
                        "predictions": r.predictions,
                        "labels": [l.value if l else None for l in r.labels],
                        "corrected": r.corrected,
                    },
                    ensure_ascii=False,
                )
                + "\n"
            )
    if run.failures:
        with (out_dir / "failures.ndjson").open("w", encoding="utf-8") as fh:
            for eid, err in run.failures:
                fh.write(json.dumps({"id": eid, "error": err}, ensure_ascii=False) + "\n")

    by_result = {r.example_id: r for r in run.results}
    before = {eid: r.predictions for eid, r in by_result.items()}
    scores_before = _score(ds, before)
    scores_after = _score(ds, run.final_predictions())
    report = {
        "seed": args.seed,
        "mode": mode.value,
        "alpha": t.alpha,
        "beta": t.beta,
        "examples": len(ds.examples),
        "failures": len(run.failures),
        "failure_rate": run.failure_rate,
        "before": {name: vars(prf) for name, prf in scores_before.items()},
        "after": {name: vars(prf) for name, prf in scores_after.items()},
    }
    (out_dir / "report.json").write_text(
        json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    print(f"# seed={args.seed} mode={mode.value} alpha={t.alpha} beta={t.beta}")
    for stage, scores in (("before", scores_before), ("after", scores_after)):
        for line in _prf_csv_lines(scores)[1:]:
            print(f"{stage},{line}")
    _log(out_dir, f"pipeline done failures={len(run.failures)}")
    if run.failure_rate > args.max_failure_rate:
        print(
            f"backend failure rate {run.failure_rate:.4f} exceeds cap {args.max_failure_rate}",
            file=sys.stderr,
        )
        return EXIT_BACKEND
    return EXIT_OK


def cmd_silver(args) -> int:
    ds = _read_dataset(args.dataset)
    out_dir = Path(args.out)
    try:
        plan = silverlabel.split_folds(ds.examples, args.k, args.seed)
    except ValueError as e:
        raise CliError(str(e))
    if args.phase == "split":
        written = silverlabel.write_fold_manifests(plan, out_dir)
        print(f"# seed={args.seed} k={args.k}")
        for path in written:
            print(f"wrote {path}")
        return EXIT_OK

    # build phase: consume per-fold heldout predictions
    if not args.predictions:
        raise CliError("silver --phase build needs --predictions (file or template with {fold})")
    merged: dict[str, list[str]] = {}
    paths = (
        [args.predictions.format(fold=f) for f in range(args.k)]
        if "{fold}" in args.predictions
        else [args.predictions]
    )
    for fold, path in enumerate(paths):
        if not Path(path).exists():
            raise CliError(f"missing predictions for fold {fold}: {path}")
        fold_preds = _read_predictions(path)
        dup = sorted(set(fold_preds) & set(merged))
        if dup:
            raise CliError(f"duplicate example ids across fold predictions: {', '.join(dup)}")
        merged.update(fold_preds)
    t = _thresholds(args, ds)
    provider = HashEmbedder()
    try:
        records = silverlabel.annotate_fold_predictions(merged, ds, t, provider)
    except dataio.DatasetError as e:
        raise CliError(str(e))
    cls_data, cls_report = silverlabel.build_classifier_dataset(records, args.seed)
    cor_data, cor_report = silverlabel.build_corrector_dataset(records, ds, args.seed)
    out_dir.mkdir(parents=True, exist_ok=True)
    with (out_dir / "classifier.ndjson").open("w", encoding="utf-8") as fh:
        silverlabel.write_records(cls_data, fh)
    with (out_dir / "corrector.ndjson").open("w", encoding="utf-8") as fh:
        silverlabel.write_records(cor_data, fh)
    summary = {
        "seed": args.seed,
        "k": args.k,
        "alpha": t.alpha,
        "beta": t.beta,
        "annotated_records": len(records),
        "classifier": {
            "input_counts": cls_report.input_counts,
            "output_counts": cls_report.output_counts,
            "empty_classes": cls_report.empty_classes,
        },
        "corrector": {
            "n_modify": cor_report.n_modify,
            "n_no_modify": cor_report.n_no_modify,
            "skipped_gold_not_in_context": cor_report.skipped_gold_not_in_context,
            "skipped_prediction_not_in_context": cor_report.skipped_prediction_not_in_context,
            "diagnostics": cor_report.diagnostics,
        },
    }
    (out_dir / "summary.json").write_text(
        json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    print(f"# seed={args.seed} k={args.k} alpha={t.alpha} beta={t.beta}")
    print(f"classifier records: {len(cls_data)} {cls_report.output_counts}")
    if cls_report.empty_classes:
        print(f"classifier empty classes: {', '.join(cls_report.empty_classes)}")
    print(f"corrector records: {len(cor_data)} (modify={cor_report.n_modify}, no_modify={cor_report.n_no_modify})")
    return EXIT_OK


def _labeled_run_from_file(path: str) -> list:
    from .taxonomy import Label, LabeledPrediction

    run = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                for pred, label in zip(rec["predictions"], rec["labels"]):
                    run.append(LabeledPrediction(pred, Label(label)))
            except (json.JSONDecodeError, KeyError, ValueError) as e:
                raise CliError(f"{path}:{lineno}: bad labeled record: {e}")
    return run


def cmd_report(args) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    report: dict = {"seed": args.seed}
    csv_files: dict[str, list[str]] = {}

    labeled_runs = {}
    for spec_item in args.labeled or []:
        if "=" not in spec_item:
            raise CliError(f"--labeled expects NAME=FILE, got {spec_item!r}")
        name, path = spec_item.split("=", 1)
        labeled_runs[name] = _labeled_run_from_file(path)

    if args.trace and not args.dataset:
        raise CliError("--trace needs --dataset for gold answers")

    if args.dataset and args.trace:
        ds = _read_dataset(args.dataset)
        t = _thresholds(args, ds)
        provider = HashEmbedder()
        by_id = ds.by_id()
        trace = []
        with open(args.trace, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    rec = json.loads(line)
                    trace.append(rec)
                except json.JSONDecodeError as e:
                    raise CliError(f"{args.trace}:{lineno}: bad trace record: {e}")
        unknown = sorted({r["id"] for r in trace} - set(by_id))
        if unknown:
            raise CliError(f"trace references unknown example ids: {', '.join(unknown)}")

        report["alpha"], report["beta"] = t.alpha, t.beta
        # Confusion: taxonomy truth vs classifier-assigned labels.
        pairs = []
        change_before, change_after, change_golds = [], [], []
        initial_labeled = []
        for rec in trace:
            ex = by_id[rec["id"]]
            for i, pred in enumerate(rec["predictions"]):
                true_lp = classify_prediction(pred, ex.gold_texts, t, provider)
                initial_labeled.append(true_lp)
                assigned = rec.get("labels", [None] * len(rec["predictions"]))[i]
                if assigned is not None:
                    pairs.append((true_lp.label, assigned))
                corrected = rec.get("corrected", [None] * len(rec["predictions"]))[i]
                if corrected is not None:
                    change_before.append(pred)
                    change_after.append(corrected)
                    change_golds.append(ex.gold_texts)
        confusion = analysis.classifier_confusion(pairs) if pairs else None
        change = (
            analysis.corrector_change_matrix(change_before, change_after, change_golds)
            if change_before
            else None
        )
        labeled_runs.setdefault("initial", initial_labeled)

        if confusion:
            report["confusion"] = confusion.to_rows()
            csv_files["confusion.csv"] = ["true,wrong,partially,correct,wrong_pct,partially_pct,correct_pct"] + [
                "{true},{wrong},{partially},{correct},{wrong_pct},{partially_pct},{correct_pct}".format(**row)
                for row in confusion.to_rows()
            ]
        if change:
            report["change_matrix"] = change.to_rows()
            csv_files["change_matrix.csv"] = ["before,incorrect,correct,incorrect_pct,correct_pct"] + [
                "{before},{incorrect},{correct},{incorrect_pct},{correct_pct}".format(**row)
                for row in change.to_rows()
            ]

        if args.final:
            final = _read_predictions(args.final)
            _check_known_ids(final, ds)
            before_preds = {rec["id"]: rec["predictions"] for rec in trace}
            scores = {"before": _score(ds, before_preds), "after": _score(ds, final)}
            report["metrics"] = {
                stage: {name: vars(prf) for name, prf in sc.items()} for stage, sc in scores.items()
            }
            csv_files["metrics.csv"] = ["stage,metric,precision,recall,f1"] + [
                f"{stage},{line}"
                for stage, sc in scores.items()
                for line in _prf_csv_lines(sc)[1:]
            ]
            ordered = sorted(before_preds)
            quality = analysis.quality_report(
                [before_preds[eid] for eid in ordered],
                [final.get(eid, []) for eid in ordered],
                [by_id[eid].gold_texts for eid in ordered],
                t,
                provider,
            )
            report["quality"] = {
                "before_wo": quality.before_wo,
                "before_bs": quality.before_bs,
                "after_wo": quality.after_wo,
                "after_bs": quality.after_bs,
                "delta_wo": quality.delta_wo,
                "delta_bs": quality.delta_bs,
                "n_before": quality.n_before,
                "n_after": quality.n_after,
            }
            csv_files["quality.csv"] = [
                "stage,avg_wo,avg_bs,n",
                f"before,{quality.before_wo:.6f},{quality.before_bs:.6f},{quality.n_before}",
                f"after,{quality.after_wo:.6f},{quality.after_bs:.6f},{quality.n_after}",
            ]

    if labeled_runs:
        dist = analysis.distribution_report(labeled_runs)
        report["distribution"] = dist
        csv_files["distribution.csv"] = ["run,correct,partially,wrong"] + [
            f"{name},{c['correct']},{c['partially']},{c['wrong']}" for name, c in dist.items()
        ]

    (out_dir / "report.json").write_text(
        json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    for name, lines in csv_files.items():
        (out_dir / name).write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"# seed={args.seed}")
    for name in sorted(["report.json", *csv_files]):
        print(f"wrote {out_dir / name}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="acckit",
        description="Post-processing toolkit for multi-span QA predictions",
    )
    parser.add_argument("--config", help="JSON config file; explicit flags win")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_thresholds(p):
        p.add_argument("--alpha", type=float, default=None, help="word-overlap floor (default 0.25)")
        p.add_argument("--beta", type=float, default=None, help="embedding-score floor (default 0.6)")

    p = sub.add_parser("import", help="convert BIO-tagged records to the canonical format")
    p.add_argument("--bio", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--name", default=None)
    p.set_defaults(func=cmd_import)

    p = sub.add_parser("validate", help="check a canonical dataset and print statistics")
    p.add_argument("--dataset", required=True)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("annotate", help="label a predictions file against gold answers")
    p.add_argument("--dataset", required=True)
    p.add_argument("--predictions", required=True)
    p.add_argument("--out", default=None)
    add_thresholds(p)
    p.set_defaults(func=cmd_annotate)

    p = sub.add_parser("score", help="EM and PM precision/recall/F1")
    p.add_argument("--dataset", required=True)
    p.add_argument("--predictions", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("pipeline", help="run answer-classify-correct post-processing")
    p.add_argument("--dataset", required=True)
    p.add_argument("--predictions", default=None, help="pre-computed reader output")
    p.add_argument("--mode", default=PipelineMode.STANDARD.value,
                   choices=[m.value for m in PipelineMode])
    p.add_argument("--reader-cmd", default=None)
    p.add_argument("--classifier-cmd", default=None,
                   help="backend command, or the built-ins 'oracle' / 'identity'")
    p.add_argument("--corrector-cmd", default=None,
                   help="backend command, or the built-ins 'oracle' / 'identity'")
    p.add_argument("--embedder-cmd", default=None)
    p.add_argument("--max-span-words", type=int, default=30)
    p.add_argument("--workers", type=int, default=None, help="default: logical CPU count")
    p.add_argument("--max-failure-rate", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    add_thresholds(p)
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("silver", help="fold manifests and silver-labeled training data")
    p.add_argument("--phase", choices=["split", "build"], required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--predictions", default=None,
                   help="heldout predictions file, or template with {fold}")
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    add_thresholds(p)
    p.set_defaults(func=cmd_silver)

    p = sub.add_parser("report", help="analysis report from a pipeline trace")
    p.add_argument("--dataset", default=None)
    p.add_argument("--trace", default=None)
    p.add_argument("--final", default=None)
    p.add_argument("--labeled", action="append", default=None, metavar="NAME=FILE",
                   help="annotated run for the distribution table (repeatable)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    add_thresholds(p)
    p.set_defaults(func=cmd_report)

    return parser


def _apply_config(args: argparse.Namespace, argv: list[str]) -> None:
    if not args.config:
        return
    try:
        config = json.loads(Path(args.config).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise CliError(f"bad config file: {e}")
    if not isinstance(config, dict):
        raise CliError("config file must hold a JSON object")
    explicit = {tok.split("=", 1)[0].lstrip("-").replace("-", "_") for tok in argv if tok.startswith("--")}
    for key, value in config.items():
        attr = key.replace("-", "_")
        if hasattr(args, attr) and attr not in explicit and getattr(args, attr) in (None,):
            setattr(args, attr, value)


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _apply_config(args, argv)
        return args.func(args)
    except CliError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.code
    except BackendError as e:
        print(f"backend error: {e}", file=sys.stderr)
        return EXIT_BACKEND


if __name__ == "__main__":
    sys.exit(main())
