"""Command line front-end: ``vest features|experiment|importance|sample-size``."""
from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .evaluation import (SAMPLE_SIZES, ExperimentSettings, importance_study, prepare_window,
                         run_experiment, sample_size_study)
from .importance import rank_features
from .pipeline import METHODS, SelectionConfig, apply_selection, canonical_method, fit_selection
from .series import TimeSeries, load_series, single_holdout
from .synthetic import synthetic_corpus

log = logging.getLogger("vest")

DEFAULTS = {
    "input": [],
    "synthetic": 0,
    "synthetic_length": 2000,
    "frequency": None,
    "no_frequency": False,
    "delimiter": ",",
    "methods": ",".join(METHODS),
    "na_perc": 70.0,
    "u_perc": 1.0,
    "corr_perc": 95.0,
    "repetitions": 10,
    "train_frac": 0.6,
    "test_frac": 0.1,
    "p_min": 10,
    "p_max": 30,
    "p": None,
    "seed": 0,
    "random_origins": False,
    "draws": 100_000,
    "sizes": None,
    "out": "vest-out",
    "jobs": 1,
}
_TYPES = {k: type(v) for k, v in DEFAULTS.items() if v is not None and not isinstance(v, list)}
_TYPES.update({"frequency": str, "p": int, "sizes": str})


def read_config(path) -> dict:
    """Flat ``key = value`` file; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in DEFAULTS:
            raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
        if key == "input":
            out[key] = [v.strip() for v in value.split(",") if v.strip()]
        elif _TYPES.get(key) is bool:
            out[key] = value.lower() in ("1", "true", "yes", "on")
        else:
            out[key] = _TYPES[key](value)
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vest", description=__doc__)
    parser.add_argument("--version", action="version", version=f"vest {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    a = common.add_argument
    a("--config", help="flat key = value file; flags override it")
    a("--input", action="append", help="series file (repeatable)")
    a("--synthetic", type=int, help="add K bundled synthetic series")
    a("--synthetic-length", type=int)
    a("--frequency", help="seasonal frequency, one value or one per input (comma separated)")
    a("--no-frequency", action="store_true", default=None, help="ignore any frequency (drops SIN/COS)")
    a("--delimiter")
    a("--methods", help=f"comma separated, from {', '.join(METHODS)}")
    a("--na-perc", type=float)
    a("--u-perc", type=float)
    a("--corr-perc", type=float)
    a("--repetitions", type=int)
    a("--train-frac", type=float)
    a("--test-frac", type=float)
    a("--p-min", type=int)
    a("--p-max", type=int)
    a("--seed", type=int)
    a("--random-origins", action="store_true", default=None)
    a("--draws", type=int)
    a("--out")
    a("--jobs", type=int)
    a("-v", "--verbose", action="store_true")
    f = sub.add_parser("features", parents=[common], help="generate and select features")
    f.add_argument("--p", type=int, help="embedding dimension (default: validation search)")
    sub.add_parser("experiment", parents=[common], help="repeated-holdout method comparison")
    sub.add_parser("importance", parents=[common], help="RReliefF rank tables")
    s = sub.add_parser("sample-size", parents=[common], help="average rank versus sample size")
    s.add_argument("--sizes", help="comma list or start:stop:step (inclusive)")
    return parser


def resolve(args: argparse.Namespace) -> dict:
    cfg = dict(DEFAULTS)
    if args.config:
        cfg.update(read_config(args.config))
    for key in DEFAULTS:
        v = getattr(args, key, None)
        if v is not None:
            cfg[key] = v
    cfg["methods"] = [canonical_method(m) for m in str(cfg["methods"]).split(",") if m.strip()]
    return cfg


def parse_sizes(text) -> tuple:
    if not text:
        return SAMPLE_SIZES
    if ":" in text:
        start, stop, step = (int(x) for x in text.split(":"))
        return tuple(range(start, stop + 1, step))
    return tuple(int(x) for x in text.split(","))


def load_inputs(cfg):
    paths = cfg["input"]
    freqs = [None] * len(paths)
    if cfg["frequency"] and not cfg["no_frequency"]:
        parts = [int(x) for x in str(cfg["frequency"]).split(",")]
        if len(parts) == 1:
            freqs = parts * len(paths)
        elif len(parts) == len(paths):
            freqs = parts
        else:
            raise ValueError("--frequency needs one value or one per input")
    series = [load_series(p, f, cfg["delimiter"]) for p, f in zip(paths, freqs)]
    if cfg["synthetic"]:
        corpus = synthetic_corpus(cfg["synthetic"], cfg["synthetic_length"], cfg["seed"])
        if cfg["no_frequency"]:
            corpus = [TimeSeries(ts.values, None, ts.name) for ts in corpus]
        series.extend(corpus)
    if not series:
        raise ValueError("no input series (use --input or --synthetic)")
    names = [ts.name for ts in series]
    if len(set(names)) != len(names):
        raise ValueError("input series names must be unique")
    return series


def settings_from(cfg) -> ExperimentSettings:
    return ExperimentSettings(
        methods=tuple(cfg["methods"]), repetitions=cfg["repetitions"],
        train_frac=cfg["train_frac"], test_frac=cfg["test_frac"],
        p_min=cfg["p_min"], p_max=cfg["p_max"],
        selection=SelectionConfig(cfg["na_perc"], cfg["u_perc"], cfg["corr_perc"]),
        seed=cfg["seed"], random_origins=cfg["random_origins"], draws=cfg["draws"],
        jobs=cfg["jobs"])


def config_hash(command, cfg, series) -> str:
    doc = {k: v for k, v in cfg.items() if k not in ("out", "jobs")}
    doc["command"] = command
    doc["data"] = {ts.name: hashlib.sha256(ts.values.tobytes()).hexdigest() for ts in series}
    blob = json.dumps(doc, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def _meta(command, digest):
    return {"tool": "vest", "version": __version__, "command": command, "config_hash": digest}


def _header(meta):
    return [f"{k}={v}" for k, v in meta.items()]


def _write_json(path, text):
    Path(path).write_text(text + "\n")


def _write_table(path, meta, columns, rows):
    with open(path, "w") as fh:
        for line in _header(meta):
            fh.write(f"# {line}\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(repr(v) if isinstance(v, float) else str(v) for v in row) + "\n")


def cmd_features(cfg, series, out: Path, meta):
    settings = settings_from(cfg)
    for ts in series:
        # fit on the leading train_frac of the series, emit features for every row
        w = single_holdout(len(ts), settings.train_frac, settings.validation_frac)
        wd = prepare_window(ts, w, settings, cfg.get("p"))
        log.info("%s: p=%d, %d rows x %d generated features", ts.name, wd.p, *wd.features.shape)
        model = fit_selection(wd.features.rows(wd.train_rows), settings.selection)
        wd.features.to_csv(out / f"{ts.name}.features.csv", _header(meta))
        apply_selection(model, wd.features).to_csv(out / f"{ts.name}.selected.csv", _header(meta))
        _write_json(out / f"{ts.name}.selection.json",
                    model.to_json(metadata=dict(meta, series=ts.name, p=wd.p)))
        log.info("%s: kept %d of %d features", ts.name, len(model.kept_columns), wd.features.shape[1])


def cmd_experiment(cfg, series, out: Path, meta):
    report = run_experiment(series, settings_from(cfg))
    report.to_csv(out / "experiment.csv", _header(meta))
    _write_json(out / "experiment.json", report.to_json(metadata=meta))
    for m, (mean, sd) in report.ranks().items():
        log.info("%-8s average rank %.2f (sd %.2f)", m, mean, sd)


def cmd_importance(cfg, series, out: Path, meta):
    reports = importance_study(series, settings_from(cfg))
    doc = {"metadata": meta}
    for scope, fname in (("ALL", "importance_all.csv"),
                         ("BY_TRANSFORM", "importance_by_transform.csv"),
                         ("BY_SUMMARY", "importance_by_summary.csv")):
        rows = [(name, n, score, rank) for name, rep in reports.items()
                for n, score, rank in rank_features(rep, scope)]
        _write_table(out / fname, meta, ("series", "name", "score", "rank"), rows)
        doc[scope.lower()] = {name: {n: {"score": s, "rank": r} for n, s, r in rank_features(rep, scope)}
                              for name, rep in reports.items()}
    _write_json(out / "importance.json", json.dumps(doc, indent=2))


def cmd_sample_size(cfg, series, out: Path, meta):
    sizes = parse_sizes(cfg["sizes"])
    methods = cfg["methods"] if cfg["methods"] != list(METHODS) else ["AR", "AR+VEST"]
    res = sample_size_study(series, sizes, methods, settings_from(cfg))
    for name in res.excluded:
        log.warning("excluded %s: fewer than %d observations", name, max(sizes))
    _write_table(out / "sample_size.csv", meta, ("size", "method", "mean_rank"), res.rows())
    doc = {"metadata": meta, "sizes": list(res.sizes), "methods": list(res.methods),
           "included": list(res.included), "excluded": list(res.excluded),
           "mean_rank": [{"size": s, "method": m, "mean_rank": r} for s, m, r in res.rows()],
           "mase": [{"size": s, "series": n, "method": m, "mase": v}
                    for (s, n, m), v in res.mase.items()]}
    _write_json(out / "sample_size.json", json.dumps(doc, indent=2))


COMMANDS = {"features": cmd_features, "experiment": cmd_experiment,
            "importance": cmd_importance, "sample-size": cmd_sample_size}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve(args)
        series = load_inputs(cfg)
        out = Path(cfg["out"])
        out.mkdir(parents=True, exist_ok=True)
        meta = _meta(args.command, config_hash(args.command, cfg, series))
        COMMANDS[args.command](cfg, series, out, meta)
    except (ValueError, KeyError, OSError) as exc:
        print(f"vest {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
