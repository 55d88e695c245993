"""Command-line driver: ``bcddo select | oracle | report``.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 runtime failure.
Reports are written to ``--output``, else into ``$BCDDO_OUTPUT_DIR``, else
into the current directory.
"""
from __future__ import annotations

import argparse
import datetime as _dt
import json
import os
import sys
from dataclasses import fields
from pathlib import Path

import numpy as np

from . import __version__
from .binary import FitnessWeights, check_selectable
from .config import ConfigError, RunConfig, build_config, coerce, dump_config, load_config_file
from .data import DataError, resolve_dataset, validate
from .harness import OracleLimitError, evaluate_mask, exhaustive_ranking, prepare, run_experiment

SCHEMA = "bcddo.report"
SCHEMA_VERSION = 1
OUTPUT_ENV = "BCDDO_OUTPUT_DIR"

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_RUNTIME = 0, 2, 3, 4

# RunConfig fields whose flag name differs from the kebab-cased field name
_FLAG_NAMES = {"dataset": "--dataset", "label_column": "--label", "output": "--output"}


class CliError(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


def _flag(name):
    return _FLAG_NAMES.get(name, "--" + name.replace("_", "-"))


def _add_run_flags(p: argparse.ArgumentParser):
    for f in fields(RunConfig):
        if str(f.type) == "bool":
            p.add_argument(_flag(f.name), dest=f.name, action=argparse.BooleanOptionalAction, default=None,
                           help=f"(default: {f.default})")
        else:
            p.add_argument(_flag(f.name), dest=f.name, default=None, metavar=f.name.upper(),
                           help=f"(default: {f.default})")
    p.add_argument("--config", help="flat 'key = value' file; flags override its values")
    p.add_argument("--dump-config", metavar="PATH",
                   help="write the effective configuration to PATH ('-' for stdout) and exit")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bcddo", description="Binary CDDO wrapper feature selection")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    _add_run_flags(sub.add_parser("select", help="run feature selection over one or more seeds"))
    p = sub.add_parser("oracle", help="exhaustively rank every non-empty feature subset")
    _add_run_flags(p)
    p = sub.add_parser("report", help="merge report files into one comparison table")
    p.add_argument("paths", nargs="+")
    p.add_argument("--json", dest="json_out", help="also write the merged table as JSON")
    return parser


def config_from_args(args) -> RunConfig:
    file_values = load_config_file(args.config) if args.config else {}
    overrides = {}
    for f in fields(RunConfig):
        v = getattr(args, f.name, None)
        if v is not None:
            overrides[f.name] = coerce(f.name, v)
    return build_config(file_values, overrides)


def _label_spec(label: str):
    try:
        return int(label)
    except ValueError:
        return label


def load_dataset(config: RunConfig):
    if not config.dataset:
        raise CliError("no dataset given (use --dataset PATH or --dataset builtin:iris)", EXIT_CONFIG)
    try:
        ds = resolve_dataset(config.dataset, _label_spec(config.label_column))
    except DataError as exc:
        raise CliError(str(exc), EXIT_DATA) from None
    findings = validate(ds)
    for fd in findings:
        if fd.severity == "warning":
            print(f"warning: {fd.message}", file=sys.stderr)
    errors = [fd for fd in findings if fd.severity == "error"]
    if errors:
        raise CliError(f"{config.dataset}: " + "; ".join(fd.message for fd in errors[:5]), EXIT_DATA)
    try:
        check_selectable(ds)
    except ValueError as exc:
        raise CliError(f"{config.dataset}: {exc}", EXIT_DATA) from None
    return ds


def _provenance(config: RunConfig, ds) -> dict:
    return {
        "package_version": __version__,
        "config": config.as_dict(),
        "dataset": {
            "source": config.dataset,
            "sha256": ds.digest(),
            "n_samples": ds.n_samples,
            "n_features": ds.n_features,
            "feature_names": list(ds.feature_names),
            "class_names": list(ds.class_names),
        },
        "split_seed": config.seed,
    }


def _names(mask, feature_names):
    return [n for n, b in zip(feature_names, mask) if b]


def _now():
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


def _output_path(config: RunConfig, kind: str) -> Path:
    if config.output:
        return Path(config.output)
    stem = Path(config.dataset.split(":", 1)[-1]).stem
    base = Path(os.environ.get(OUTPUT_ENV) or ".")
    return base / f"{stem}_{kind}_seed{config.seed}.json"


def _write(doc: dict, path: Path):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def select_report(config: RunConfig, ds) -> dict:
    rep = run_experiment(ds, config)
    w = FitnessWeights(config.weight_a)
    runs = []
    for r in rep.runs:
        s = r.selection
        runs.append({
            "seed": s.seed,
            "mask": [int(b) for b in s.mask],
            "selected_features": _names(s.mask, ds.feature_names),
            "fitness": s.fitness,
            "classifier_error": s.classifier_error,
            "selected_count": s.selected_count,
            "weights": {"a": w.a, "b": w.b},
            "evaluations": s.evaluations,
            "metrics": r.metrics,
            "confusion": r.confusion,
            "support": r.support,
            "fitness_history": [float(v) for v in s.fitness_history],
        })
    return {
        "schema": SCHEMA,
        "schema_version": SCHEMA_VERSION,
        "kind": "select",
        "provenance": _provenance(config, ds),
        "summary": rep.summary,
        "runs": runs,
        "timing": {"created": _now(), "wall_seconds": [r.wall_seconds for r in rep.runs]},
    }


def oracle_report(config: RunConfig, ds) -> dict:
    if ds.n_features > config.oracle_limit:
        raise OracleLimitError(
            f"refusing exhaustive search: D={ds.n_features} exceeds oracle limit {config.oracle_limit} "
            f"(raise it with --oracle-limit)"
        )
    prep = prepare(ds, config)
    ranking = exhaustive_ranking(prep.evaluator, config.oracle_limit)
    rows = [{
        "rank": i + 1,
        "mask": [int(b) for b in m],
        "selected_features": _names(m, ds.feature_names),
        "fitness": f,
        "classifier_error": err,
        "selected_count": n,
    } for i, (m, f, err, n) in enumerate(ranking)]
    best_mask = ranking[0][0]
    cm, met = evaluate_mask(prep.train, prep.test, best_mask, config.knn_k)
    optimum = dict(rows[0], metrics=met.as_dict(), confusion=cm.tolist(), support=cm.total)
    return {
        "schema": SCHEMA,
        "schema_version": SCHEMA_VERSION,
        "kind": "oracle",
        "provenance": _provenance(config, ds),
        "optimum": optimum,
        "ranking": rows,
        "timing": {"created": _now()},
    }


def summary_line(name: str, doc: dict) -> str:
    if doc["kind"] == "select":
        s = doc["summary"]
        support = doc["runs"][0]["support"]
        return (f"{name:<24} acc={s['accuracy']['mean']:.4f} prec={s['precision']['mean']:.3f} "
                f"rec={s['recall']['mean']:.3f} f1={s['f1']['mean']:.3f} support={support} "
                f"selected={s['selected_count_mean']:.1f} fitness={s['fitness']['mean']:.4f} "
                f"seeds={s['num_seeds']}")
    o = doc["optimum"]
    m = o["metrics"]
    return (f"{name:<24} acc={m['accuracy']:.4f} prec={m['precision']:.3f} rec={m['recall']:.3f} "
            f"f1={m['f1']:.3f} support={o['support']} selected={o['selected_count']} "
            f"fitness={o['fitness']:.4f} subsets={len(doc['ranking'])}")


_REQUIRED = {"select": ("provenance", "summary", "runs"), "oracle": ("provenance", "optimum", "ranking")}


def read_report(path) -> dict:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise CliError(f"{path}: cannot read report: {exc}", EXIT_DATA) from None
    except json.JSONDecodeError as exc:
        raise CliError(f"{path}: invalid JSON: {exc}", EXIT_DATA) from None
    if not isinstance(doc, dict) or doc.get("schema") != SCHEMA:
        raise CliError(f"{path}: not a {SCHEMA} document", EXIT_DATA)
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise CliError(f"{path}: schema_version {doc.get('schema_version')!r}, expected {SCHEMA_VERSION}", EXIT_DATA)
    missing = [k for k in _REQUIRED.get(doc.get("kind"), ("kind",)) if k not in doc]
    if doc.get("kind") not in _REQUIRED or missing:
        raise CliError(f"{path}: malformed report (kind={doc.get('kind')!r}, missing {missing})", EXIT_DATA)
    return doc


def comparison_rows(docs) -> list:
    rows = []
    for path, doc in docs:
        prov = doc["provenance"]
        row = {"file": str(path), "kind": doc["kind"], "dataset": prov["dataset"]["source"],
               "dataset_sha256": prov["dataset"]["sha256"], "split_seed": prov["split_seed"]}
        if doc["kind"] == "select":
            s = doc["summary"]
            row.update(accuracy=s["accuracy"]["mean"], accuracy_std=s["accuracy"]["std"],
                       f1=s["f1"]["mean"], selected=s["selected_count_mean"],
                       fitness=s["fitness"]["mean"], seeds=s["num_seeds"])
        else:
            o = doc["optimum"]
            row.update(accuracy=o["metrics"]["accuracy"], accuracy_std=0.0, f1=o["metrics"]["f1"],
                       selected=float(o["selected_count"]), fitness=o["fitness"], seeds=1)
        rows.append(row)
    return rows


def format_table(rows) -> str:
    head = f"{'dataset':<28} {'method':<8} {'accuracy':>9} {'std':>7} {'f1':>6} {'selected':>8} {'fitness':>8} {'seeds':>5}"
    lines = [head, "-" * len(head)]
    for r in rows:
        method = "bcddo" if r["kind"] == "select" else "oracle"
        lines.append(f"{str(r['dataset']):<28} {method:<8} {r['accuracy']:>9.4f} {r['accuracy_std']:>7.4f} "
                     f"{r['f1']:>6.3f} {r['selected']:>8.2f} {r['fitness']:>8.4f} {r['seeds']:>5}")
    return "\n".join(lines)


def _run_config_command(args, kind: str) -> int:
    config = config_from_args(args)
    if args.dump_config:
        text = dump_config(config)
        if args.dump_config == "-":
            sys.stdout.write(text)
        else:
            Path(args.dump_config).write_text(text, encoding="utf-8")
        return EXIT_OK
    ds = load_dataset(config)
    try:
        doc = select_report(config, ds) if kind == "select" else oracle_report(config, ds)
    except OracleLimitError as exc:
        raise CliError(str(exc), EXIT_DATA) from None
    except Exception as exc:
        raise CliError(f"{kind} failed: {exc}", EXIT_RUNTIME) from exc
    path = _output_path(config, kind)
    _write(doc, path)
    print(summary_line(Path(config.dataset).stem, doc))
    print(f"report written to {path}")
    return EXIT_OK


def _report_command(args) -> int:
    docs = [(p, read_report(p)) for p in args.paths]
    rows = comparison_rows(docs)
    print(format_table(rows))
    if args.json_out:
        _write({"schema": SCHEMA + ".comparison", "schema_version": SCHEMA_VERSION, "rows": rows},
               Path(args.json_out))
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "report":
            return _report_command(args)
        return _run_config_command(args, args.command)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CliError as exc:
        label = {EXIT_CONFIG: "config error", EXIT_DATA: "data error"}.get(exc.code, "error")
        print(f"{label}: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
