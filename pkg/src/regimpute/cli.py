"""Command-line interface: individual stage subcommands plus a pipeline
orchestrator running ingest -> train -> impute-category -> build-gazetteer
-> impute-location -> geocode -> report.

Configuration is a flat key=value file; REGIMPUTE_<KEY> environment
variables override the file and command-line flags override both. Exit
codes: 0 ok, 1 stage failure, 2 configuration error. Stage timings go to
the log and timings.tsv only, so every other artifact is byte-stable for
a fixed configuration and seed.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
import time
from dataclasses import dataclass, fields as dc_fields
from pathlib import Path

from . import classify, evaluate, gazetteer, geocode, locimpute, spatial
from .records import GroundTruth, ingest, missingness, write_records
from .segmenter import Lexicon, address_nouns, segment
from .synth import SynthConfig, synth, synth_labeled_points, synth_world
from .vectorizer import DEFAULT_DIM, build_labeled, vectorize_name, write_vectors

log = logging.getLogger("regimpute")

EXIT_OK = 0
EXIT_STAGE_FAILURE = 1
EXIT_CONFIG_ERROR = 2

PIPELINE_STAGES = ("ingest", "train", "impute-category", "build-gazetteer", "impute-location", "geocode", "report")


class ConfigError(Exception):
    pass


class StageError(Exception):
    pass


@dataclass
class PipelineConfig:
    corpus: str = ""
    lexicon: str = ""
    gazetteer: str = ""
    keys: str = ""
    model: str = ""
    output_dir: str = "out"
    method: str = "logistic_regression"
    dim: int = DEFAULT_DIM
    workers: int = 1
    seed: int = 7
    alpha: float = 1.0
    iters: int = 100
    step: float = 1.0
    l2: float = 0.01
    rate: float = 0.0  # requests/second; 0 disables pacing
    provider: str = "mock"
    url_template: str = ""

    @classmethod
    def load(cls, path: str | None, overrides: dict | None = None) -> "PipelineConfig":
        values: dict[str, str] = {}
        if path:
            try:
                with open(path, encoding="utf-8") as fh:
                    for line_no, line in enumerate(fh, start=1):
                        line = line.strip()
                        if not line or line.startswith("#"):
                            continue
                        if "=" not in line:
                            raise ConfigError(f"{path}:{line_no}: expected key=value")
                        key, _, value = line.partition("=")
                        values[key.strip()] = value.strip()
            except OSError as exc:
                raise ConfigError(f"cannot read config {path}: {exc}") from exc
        config = cls()
        known = {f.name for f in dc_fields(cls)}
        for source in (values, _env_overrides(), overrides or {}):
            for key, value in source.items():
                if value is None:
                    continue
                if key not in known:
                    raise ConfigError(f"unknown config key {key!r}")
                current = getattr(config, key)
                try:
                    setattr(config, key, type(current)(value))
                except ValueError as exc:
                    raise ConfigError(f"bad value for {key}: {value!r}") from exc
        return config


def _env_overrides() -> dict[str, str]:
    out = {}
    prefix = "REGIMPUTE_"
    for name, value in os.environ.items():
        if name.startswith(prefix):
            out[name[len(prefix):].lower()] = value
    return out


def _require_file(path: str, what: str) -> Path:
    if not path:
        raise ConfigError(f"{what} path not configured")
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"{what} file not found: {p}")
    return p


def _load_records(path: str, what: str = "corpus"):
    result = ingest(_require_file(path, what))
    if result.diagnostics:
        log.info("stage=%s skipped_rows=%d", what, result.error_count)
    return result.records


def _train_params(config: PipelineConfig) -> dict:
    if config.method == "naive_bayes":
        return {"alpha": config.alpha}
    if config.method == "logistic_regression":
        return {"iters": config.iters, "step": config.step, "l2": config.l2}
    return {}


def _make_provider(config: PipelineConfig):
    if config.provider == "mock":
        return geocode.MockGeocoder()
    if config.provider == "http":
        if not config.url_template:
            raise ConfigError("http provider needs url_template")
        return geocode.HttpGeocoder(config.url_template)
    raise ConfigError(f"unknown provider {config.provider!r}")


# --- stage subcommands -------------------------------------------------


def cmd_synth(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    config = SynthConfig(
        n=args.n,
        seed=args.seed,
        lexicon_seed=args.lexicon_seed,
        missing_category=args.missing_category,
        missing_postcode=args.missing_postcode,
        missing_data_source=args.missing_data_source,
        ambiguity=args.ambiguity,
    )
    world = synth_world(config)
    records, truth = synth(config)
    write_records(records, out / "corpus.tsv")
    truth.write(out / "truth.tsv")
    world.lexicon.to_tsv(out / "lexicon.tsv")
    gazetteer.write_gazetteer(world.gazetteer, out / "gazetteer.tsv")
    print(f"wrote {len(records)} records, {len(truth)} truth rows, "
          f"{len(world.lexicon)} lexicon words, {len(world.gazetteer)} gazetteer rows to {out}")
    return EXIT_OK


def cmd_ingest(args) -> int:
    result = ingest(_require_file(args.corpus, "corpus"))
    report = missingness(result.records)
    print(f"records\t{len(result.records)}")
    print(f"skipped_rows\t{result.error_count}")
    for field_name, fraction in report.missing.items():
        print(f"missing_{field_name}\t{fraction:.4f}")
    if args.out:
        write_records(result.records, args.out)
    return EXIT_OK


def cmd_segment(args) -> int:
    lexicon = Lexicon.from_tsv(_require_file(args.lexicon, "lexicon"))
    if args.text is not None:
        texts = [("-", args.text)]
    else:
        records = _load_records(args.corpus)
        texts = [(r.id, r.name or "") for r in records]
    sink = open(args.out, "w", encoding="utf-8", newline="") if args.out else sys.stdout
    try:
        for rec_id, text in texts:
            for token in segment(text, lexicon):
                sink.write(f"{rec_id}\t{token.surface}\t{token.pos}\t{token.span[0]}\t{token.span[1]}\n")
    finally:
        if args.out:
            sink.close()
    return EXIT_OK


def cmd_vectorize(args) -> int:
    lexicon = Lexicon.from_tsv(_require_file(args.lexicon, "lexicon"))
    records = _load_records(args.corpus)
    rows = []
    for rec in records:
        if not rec.name:
            continue
        rows.append((rec.id, rec.category or "", vectorize_name(rec.name, lexicon, args.dim)))
    write_vectors(rows, args.out)
    print(f"vectorized\t{len(rows)}")
    return EXIT_OK


def cmd_train(args) -> int:
    config = PipelineConfig.load(None, _config_overrides(args))
    lexicon = Lexicon.from_tsv(_require_file(config.lexicon, "lexicon"))
    records = _load_records(config.corpus)
    points, skipped = build_labeled(records, lexicon, config.dim)
    if not points:
        raise StageError("no labeled records to train on")
    t0 = time.perf_counter()
    model = classify.train(config.method, points, _train_params(config), workers=config.workers)
    log.info("stage=train records=%d duration=%.3f", len(points), time.perf_counter() - t0)
    classify.save_model(model, args.model)
    print(f"trained\t{config.method}\t{len(points)}\tskipped_no_name\t{skipped}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    config = PipelineConfig.load(None, _config_overrides(args))
    lexicon = Lexicon.from_tsv(_require_file(config.lexicon, "lexicon"))
    records = _load_records(config.corpus)
    points, _ = build_labeled(records, lexicon, config.dim)
    plan = evaluate.kfold(len(points), args.k, config.seed)
    report = evaluate.cross_validate(
        config.method, points, plan, _train_params(config),
        workers=config.workers, measure_alloc=args.measure_alloc,
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    report.write(out)
    print(f"overall_accuracy\t{report.overall_accuracy:.4f}")
    print(f"mean_train_seconds\t{report.train_seconds:.3f}")
    print(f"mean_predict_seconds\t{report.predict_seconds:.3f}")
    if report.alloc_peak_bytes is not None:
        print(f"alloc_peak_bytes\t{report.alloc_peak_bytes}")
    return EXIT_OK


def cmd_speedup(args) -> int:
    overrides = _config_overrides(args)
    overrides.pop("workers", None)  # speedup's --workers is a list, not the config int
    config = PipelineConfig.load(None, overrides)
    worker_counts = [int(w) for w in args.workers.split(",")]
    if args.synthetic:
        points = synth_labeled_points(args.synthetic, dim=config.dim, seed=config.seed)
    else:
        lexicon = Lexicon.from_tsv(_require_file(config.lexicon, "lexicon"))
        points, _ = build_labeled(_load_records(config.corpus), lexicon, config.dim)
    curve = evaluate.speedup(config.method, points, worker_counts, _train_params(config))
    curve.write(args.out)
    for p in curve.points:
        print(f"workers={p.workers}\tseconds={p.seconds:.3f}\tspeedup={p.ratio:.2f}")
    return EXIT_OK


def cmd_impute_category(args) -> int:
    config = PipelineConfig.load(None, _config_overrides(args))
    lexicon = Lexicon.from_tsv(_require_file(config.lexicon, "lexicon"))
    records = _load_records(config.corpus)
    model = classify.load_model(_require_file(config.model, "model"))
    report = classify.impute_categories(records, model, lexicon, model.dim)
    write_records(records, args.out)
    print(f"missing\t{report.missing}")
    print(f"filled\t{report.filled}")
    print(f"skipped_no_name\t{report.skipped_no_name}")
    if args.truth and args.report:
        truth = GroundTruth.read(_require_file(args.truth, "truth"))
        rows = evaluate.category_accuracy(records, truth, model.classes)
        evaluate.write_category_accuracy(rows, args.report)
    return EXIT_OK


def cmd_build_gazetteer(args) -> int:
    entries, diagnostics = gazetteer.read_gazetteer(_require_file(args.gazetteer, "gazetteer"))
    tree = gazetteer.build(entries)
    print(f"entries\t{len(tree)}")
    print(f"postcodes\t{len(tree.postcodes())}")
    print(f"rejected_rows\t{len(diagnostics)}")
    return EXIT_OK


def cmd_validate_gazetteer(args) -> int:
    entries, _ = gazetteer.read_gazetteer(_require_file(args.gazetteer, "gazetteer"))
    tree = gazetteer.build(entries)
    lexicon = Lexicon.from_tsv(_require_file(args.lexicon, "lexicon"))
    records = _load_records(args.corpus)
    # validate() expects complete-AD records; an address that yields fewer
    # than three address nouns is street-only or coarser and is screened out
    complete = [
        r for r in records
        if r.postcode and r.address and len(address_nouns(segment(r.address, lexicon))) >= 3
    ]
    report = gazetteer.validate(tree, complete, lexicon)
    print(f"evaluated\t{report.evaluated}")
    print(f"match_rate\t{report.match_rate:.4f}")
    print(f"presence_rate\t{report.presence_rate:.4f}")
    return EXIT_OK


def _location_setup(args):
    config = PipelineConfig.load(None, _config_overrides(args))
    entries, _ = gazetteer.read_gazetteer(_require_file(config.gazetteer, "gazetteer"))
    tree = gazetteer.build(entries)
    lexicon = Lexicon.from_tsv(_require_file(config.lexicon, "lexicon"))
    records = _load_records(config.corpus)
    return config, tree, lexicon, records


def cmd_impute_postcode(args) -> int:
    _, tree, lexicon, records = _location_setup(args)
    evidence = locimpute.PostcodeEvidence.from_records(records, lexicon)
    filled = failed = 0
    for rec in records:
        if rec.postcode:
            continue
        result = locimpute.impute_postcode(rec, tree, evidence, lexicon)
        if result is None:
            failed += 1
            continue
        rec.postcode = result.postcode
        rec.mark_imputed("postcode")
        filled += 1
    write_records(records, args.out)
    print(f"filled\t{filled}")
    print(f"failed\t{failed}")
    return EXIT_OK


def cmd_impute_ad(args) -> int:
    _, tree, lexicon, records = _location_setup(args)
    assigned = failed = 0
    for rec in records:
        if not rec.postcode:
            continue
        loc = locimpute.impute_ad(rec, tree, lexicon)
        if loc is None:
            failed += 1
        elif loc.source != locimpute.SOURCE_ORIGINAL:
            if rec.address is None:
                rec.mark_imputed("address")
            else:
                rec.mark_imputed("ad")
            rec.address = loc.full_address
            assigned += 1
    write_records(records, args.out)
    print(f"assigned\t{assigned}")
    print(f"failed\t{failed}")
    return EXIT_OK


def cmd_impute_location(args) -> int:
    config, tree, lexicon, records = _location_setup(args)
    report = locimpute.impute_locations(records, tree, lexicon, workers=config.workers)
    write_records(records, args.out)
    if args.report:
        report.write(args.report)
    for key, value in report.rows():
        print(f"{key}\t{value}")
    return EXIT_OK


def cmd_geocode(args) -> int:
    config = PipelineConfig.load(None, _config_overrides(args))
    records = _load_records(config.corpus)
    keys = geocode.read_keys(_require_file(config.keys, "keys"))
    provider = _make_provider(config)
    shards = geocode.shard(records, keys)
    rate = config.rate if config.rate > 0 else None
    results = geocode.geocode_batch(shards, provider, keys, rate=rate)
    geocode.write_results(results, args.out)
    if args.merged_out:
        geocode.apply_results(records, results)
        write_records(records, args.merged_out)
    print(f"ok_rate\t{geocode.ok_rate(results):.4f}")
    return EXIT_OK


def cmd_kfunction(args) -> int:
    records = _load_records(args.corpus)
    coords = [r.coordinates for r in records if r.coordinates is not None]
    if len(coords) < 2:
        raise StageError("need at least two records with coordinates")
    points = spatial.PointSet.from_points(spatial.project_equirectangular(coords))
    radii = [float(r) for r in args.radii.split(",")]
    curve = spatial.ripley_k(points, radii)
    curve.write(args.out)
    for r, k in zip(curve.radii, curve.k):
        print(f"r={r}\tK={k:.6g}")
    return EXIT_OK


def cmd_export(args) -> int:
    records = _load_records(args.corpus)
    year_range = None
    if args.from_year is not None or args.to_year is not None:
        year_range = (args.from_year, args.to_year)
    report = spatial.export_geojson(records, args.out, category=args.category, year_range=year_range)
    print(f"written\t{report.written}")
    print(f"skipped_no_coordinates\t{report.skipped_no_coordinates}")
    return EXIT_OK


# --- pipeline ----------------------------------------------------------


class _StageTimer:
    def __init__(self):
        self.rows: list[tuple[str, int, float]] = []

    def record(self, stage: str, count: int, seconds: float) -> None:
        self.rows.append((stage, count, seconds))
        log.info("stage=%s records=%d duration=%.3f", stage, count, seconds)

    def write(self, path: Path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write("stage\trecords\tseconds\n")
            for stage, count, seconds in self.rows:
                fh.write(f"{stage}\t{count}\t{seconds:.3f}\n")


def run_pipeline(config: PipelineConfig, skip: set[str] = frozenset()) -> int:
    """Execute the two-track workflow; artifacts land in output_dir."""
    unknown = skip - set(PIPELINE_STAGES)
    if unknown:
        raise ConfigError(f"unknown pipeline stages in --skip: {sorted(unknown)}")
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    timer = _StageTimer()
    stage = "ingest"
    try:
        t0 = time.perf_counter()
        records = _load_records(config.corpus)
        _write_missingness(records, out / "missingness_before.tsv")
        timer.record("ingest", len(records), time.perf_counter() - t0)

        lexicon = Lexicon.from_tsv(_require_file(config.lexicon, "lexicon"))

        stage = "train"
        model = None
        if "train" not in skip:
            points, _ = build_labeled(records, lexicon, config.dim)
            if points:
                t0 = time.perf_counter()
                model = classify.train(config.method, points, _train_params(config), workers=config.workers)
                timer.record("train", len(points), time.perf_counter() - t0)
                model_path = config.model or str(out / "model.json")
                classify.save_model(model, model_path)
        if model is None and config.model and Path(config.model).is_file():
            model = classify.load_model(config.model)

        stage = "impute-category"
        if "impute-category" not in skip:
            if model is None:
                raise StageError("no model available for category imputation")
            t0 = time.perf_counter()
            report = classify.impute_categories(records, model, lexicon, model.dim)
            timer.record("impute-category", report.filled, time.perf_counter() - t0)

        stage = "build-gazetteer"
        tree = None
        if "build-gazetteer" not in skip:
            entries, _ = gazetteer.read_gazetteer(_require_file(config.gazetteer, "gazetteer"))
            t0 = time.perf_counter()
            tree = gazetteer.build(entries)
            timer.record("build-gazetteer", len(tree), time.perf_counter() - t0)

        stage = "impute-location"
        if "impute-location" not in skip:
            if tree is None:
                raise StageError("impute-location needs the gazetteer stage")
            t0 = time.perf_counter()
            location_report = locimpute.impute_locations(records, tree, lexicon, workers=config.workers)
            timer.record("impute-location", location_report.postcode_filled, time.perf_counter() - t0)
            location_report.write(out / "location_report.tsv")

        stage = "geocode"
        if "geocode" not in skip:
            keys = geocode.read_keys(_require_file(config.keys, "keys"))
            provider = _make_provider(config)
            t0 = time.perf_counter()
            shards = geocode.shard(records, keys)
            rate = config.rate if config.rate > 0 else None
            results = geocode.geocode_batch(shards, provider, keys, rate=rate)
            geocode.apply_results(records, results)
            timer.record("geocode", len(results), time.perf_counter() - t0)
            geocode.write_results(results, out / "coordinates.tsv")

        stage = "report"
        write_records(records, out / "records_final.tsv")
        if "report" not in skip:
            _write_missingness(records, out / "missingness_after.tsv")
            _write_summary(records, out / "summary.tsv")
        timer.write(out / "timings.tsv")
    except (OSError, ValueError, StageError) as exc:
        timer.write(out / "timings.tsv")
        log.error("stage=%s failed: %s", stage, exc)
        print(f"pipeline failed at stage {stage}: {exc}", file=sys.stderr)
        return EXIT_STAGE_FAILURE
    return EXIT_OK


def _write_missingness(records, path: Path) -> None:
    report = missingness(records)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("field\tmissing_fraction\n")
        for field_name, fraction in report.missing.items():
            fh.write(f"{field_name}\t{fraction!r}\n")


def _write_summary(records, path: Path) -> None:
    total = len(records)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("field\toriginal\timputed\tmissing\ttotal\n")
        for field_name in ("category", "postcode", "address", "coordinates"):
            imputed = sum(1 for r in records if r.provenance_of(field_name) == "imputed")
            if field_name == "coordinates":
                absent = sum(1 for r in records if r.coordinates is None)
            else:
                absent = sum(1 for r in records if getattr(r, field_name) is None)
            original = total - imputed - absent
            fh.write(f"{field_name}\t{original}\t{imputed}\t{absent}\t{total}\n")


def cmd_pipeline(args) -> int:
    config = PipelineConfig.load(args.config, _config_overrides(args))
    skip = set(filter(None, (args.skip or "").split(",")))
    return run_pipeline(config, skip)


# --- argument parsing ---------------------------------------------------

_CONFIG_FLAGS = (
    "corpus", "lexicon", "gazetteer", "keys", "model", "output_dir", "method",
    "dim", "workers", "seed", "alpha", "iters", "step", "l2", "rate",
    "provider", "url_template",
)


def _config_overrides(args) -> dict:
    return {name: getattr(args, name, None) for name in _CONFIG_FLAGS if getattr(args, name, None) is not None}


def _add_config_flags(parser: argparse.ArgumentParser, *names: str) -> None:
    types = {"dim": int, "workers": int, "seed": int, "alpha": float, "iters": int,
             "step": float, "l2": float, "rate": float}
    for name in names:
        parser.add_argument(f"--{name.replace('_', '-')}", dest=name, type=types.get(name, str), default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="regimpute", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic corpus with ground truth")
    p.add_argument("--out", required=True)
    p.add_argument("--n", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--lexicon-seed", dest="lexicon_seed", type=int, default=101)
    p.add_argument("--missing-category", type=float, default=0.4364)
    p.add_argument("--missing-postcode", type=float, default=0.2575)
    p.add_argument("--missing-data-source", type=float, default=0.3106)
    p.add_argument("--ambiguity", type=float, default=0.30)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("ingest", help="read a record TSV and report missingness")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("segment", help="tokenize text or corpus names")
    p.add_argument("--lexicon", required=True)
    p.add_argument("--text")
    p.add_argument("--corpus")
    p.add_argument("--out")
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("vectorize", help="hash record names to sparse vectors")
    p.add_argument("--corpus", required=True)
    p.add_argument("--lexicon", required=True)
    p.add_argument("--dim", type=int, default=DEFAULT_DIM)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_vectorize)

    p = sub.add_parser("train", help="train a classifier on labeled records")
    p.add_argument("--model", required=True)
    _add_config_flags(p, "corpus", "lexicon", "method", "dim", "workers", "alpha", "iters", "step", "l2")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="k-fold cross-validation")
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--out", required=True)
    p.add_argument("--measure-alloc", action="store_true")
    _add_config_flags(p, "corpus", "lexicon", "method", "dim", "workers", "seed",
                      "alpha", "iters", "step", "l2")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("speedup", help="training wall-time versus worker count")
    p.add_argument("--workers", required=True, help="comma-separated counts, must include 1")
    p.add_argument("--synthetic", type=int, help="benchmark on N generated vectors")
    p.add_argument("--out", required=True)
    _add_config_flags(p, "corpus", "lexicon", "method", "dim", "seed", "alpha", "iters", "step", "l2")
    p.set_defaults(func=cmd_speedup)

    p = sub.add_parser("impute-category", help="fill missing categories from names")
    p.add_argument("--out", required=True)
    p.add_argument("--truth")
    p.add_argument("--report")
    _add_config_flags(p, "corpus", "lexicon", "model")
    p.set_defaults(func=cmd_impute_category)

    p = sub.add_parser("build-gazetteer", help="build and summarize the address tree")
    p.add_argument("--gazetteer", required=True)
    p.set_defaults(func=cmd_build_gazetteer)

    p = sub.add_parser("validate-gazetteer", help="coverage of the tree on complete records")
    p.add_argument("--gazetteer", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--lexicon", required=True)
    p.set_defaults(func=cmd_validate_gazetteer)

    for name, func in (
        ("impute-postcode", cmd_impute_postcode),
        ("impute-ad", cmd_impute_ad),
        ("impute-location", cmd_impute_location),
    ):
        p = sub.add_parser(name, help=f"{name.replace('-', ' ')} stage")
        p.add_argument("--out", required=True)
        if name == "impute-location":
            p.add_argument("--report")
        _add_config_flags(p, "corpus", "lexicon", "gazetteer", "workers")
        p.set_defaults(func=func)

    p = sub.add_parser("geocode", help="geocode record addresses")
    p.add_argument("--out", required=True)
    p.add_argument("--merged-out", dest="merged_out")
    _add_config_flags(p, "corpus", "keys", "provider", "rate", "url_template")
    p.set_defaults(func=cmd_geocode)

    p = sub.add_parser("kfunction", help="Ripley K curve over record coordinates")
    p.add_argument("--corpus", required=True)
    p.add_argument("--radii", required=True, help="comma-separated, increasing, km")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_kfunction)

    p = sub.add_parser("export", help="GeoJSON point export with filters")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--category")
    p.add_argument("--from-year", dest="from_year", type=int)
    p.add_argument("--to-year", dest="to_year", type=int)
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("pipeline", help="run the full workflow")
    p.add_argument("--config")
    p.add_argument("--skip", help="comma-separated stage names")
    _add_config_flags(p, *_CONFIG_FLAGS)
    p.set_defaults(func=cmd_pipeline)

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(message)s", stream=sys.stderr)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    except (StageError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_STAGE_FAILURE


if __name__ == "__main__":
    sys.exit(main())
