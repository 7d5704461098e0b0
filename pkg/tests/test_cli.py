from __future__ import annotations

import json
from pathlib import Path

import pytest

from regimpute.cli import main
from regimpute.records import ingest

DIM = "2048"


@pytest.fixture(scope="module")
def synth_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("synth")
    code = main(["synth", "--out", str(out), "--n", "800", "--seed", "5"])
    assert code == 0
    return out


def corpus_args(synth_dir):
    return [
        "--corpus", str(synth_dir / "corpus.tsv"),
        "--lexicon", str(synth_dir / "lexicon.tsv"),
    ]


def test_synth_writes_all_artifacts(synth_dir):
    for name in ("corpus.tsv", "truth.tsv", "lexicon.tsv", "gazetteer.tsv"):
        assert (synth_dir / name).is_file()


def test_ingest_reports_counts(synth_dir, capsys):
    assert main(["ingest", "--corpus", str(synth_dir / "corpus.tsv")]) == 0
    out = capsys.readouterr().out
    assert "records\t800" in out
    assert "missing_category" in out


def test_segment_text_mode(synth_dir, capsys, demo_lexicon_path):
    code = main(["segment", "--lexicon", str(demo_lexicon_path), "--text", "武汉物业管理有限公司"])
    assert code == 0
    lines = capsys.readouterr().out.splitlines()
    assert any("\t武汉\tns\t" in line for line in lines)


def test_vectorize_subcommand(synth_dir, tmp_path, capsys):
    out = tmp_path / "vectors.tsv"
    code = main(["vectorize", *corpus_args(synth_dir), "--dim", DIM, "--out", str(out)])
    assert code == 0
    assert out.is_file()
    first = out.read_text(encoding="utf-8").splitlines()[0]
    assert first.count("\t") == 2


def test_train_evaluate_impute_flow(synth_dir, tmp_path, capsys):
    model = tmp_path / "model.json"
    code = main(["train", *corpus_args(synth_dir), "--method", "naive_bayes",
                 "--dim", DIM, "--model", str(model)])
    assert code == 0
    assert model.is_file()

    eval_dir = tmp_path / "eval"
    code = main(["evaluate", *corpus_args(synth_dir), "--method", "naive_bayes",
                 "--dim", DIM, "--k", "4", "--seed", "1", "--out", str(eval_dir)])
    assert code == 0
    summary = (eval_dir / "eval_summary.tsv").read_text(encoding="utf-8")
    accuracy = float(summary.splitlines()[1].split("\t")[1])
    assert accuracy >= 0.9

    imputed = tmp_path / "imputed.tsv"
    report = tmp_path / "per_class.tsv"
    code = main(["impute-category", *corpus_args(synth_dir), "--model", str(model),
                 "--out", str(imputed),
                 "--truth", str(synth_dir / "truth.tsv"), "--report", str(report)])
    assert code == 0
    assert report.is_file()
    records = ingest(imputed).records
    assert all(r.category is not None for r in records if r.name)


def test_gazetteer_subcommands(synth_dir, capsys):
    code = main(["build-gazetteer", "--gazetteer", str(synth_dir / "gazetteer.tsv")])
    assert code == 0
    out = capsys.readouterr().out
    assert "entries\t480" in out

    code = main(["validate-gazetteer", "--gazetteer", str(synth_dir / "gazetteer.tsv"),
                 *corpus_args(synth_dir)])
    assert code == 0
    out = capsys.readouterr().out
    match_rate = float(next(l for l in out.splitlines() if l.startswith("match_rate")).split("\t")[1])
    assert match_rate >= 0.95


def test_impute_location_subcommand(synth_dir, tmp_path, capsys):
    out = tmp_path / "located.tsv"
    report = tmp_path / "location_report.tsv"
    code = main(["impute-location", *corpus_args(synth_dir),
                 "--gazetteer", str(synth_dir / "gazetteer.tsv"),
                 "--out", str(out), "--report", str(report)])
    assert code == 0
    assert report.is_file()
    records = ingest(out).records
    assert sum(1 for r in records if r.postcode is None) < 20


def test_impute_postcode_and_ad_split_stages(synth_dir, tmp_path):
    mid = tmp_path / "postcoded.tsv"
    code = main(["impute-postcode", *corpus_args(synth_dir),
                 "--gazetteer", str(synth_dir / "gazetteer.tsv"), "--out", str(mid)])
    assert code == 0
    done = tmp_path / "ad.tsv"
    code = main(["impute-ad", "--corpus", str(mid), "--lexicon", str(synth_dir / "lexicon.tsv"),
                 "--gazetteer", str(synth_dir / "gazetteer.tsv"), "--out", str(done)])
    assert code == 0
    records = ingest(done).records
    with_pc = [r for r in records if r.postcode]
    assert all(" " in (r.address or "") or r.address is None or
               r.provenance_of("ad") == "original" for r in with_pc[:50])


def test_speedup_subcommand(tmp_path, capsys):
    out = tmp_path / "speedup.tsv"
    code = main(["speedup", "--workers", "1,2", "--synthetic", "5000",
                 "--method", "naive_bayes", "--dim", "256", "--out", str(out)])
    assert code == 0
    lines = out.read_text(encoding="utf-8").splitlines()
    assert lines[1].startswith("1\t")
    assert lines[1].endswith("\t1.0")


def write_keys(path: Path, n=2, quota=6000):
    path.write_text("".join(f"key{i}\t{quota}\n" for i in range(n)), encoding="utf-8")
    return path


def test_geocode_and_spatial_flow(synth_dir, tmp_path, capsys):
    keys = write_keys(tmp_path / "keys.tsv")
    coords = tmp_path / "coords.tsv"
    merged = tmp_path / "merged.tsv"
    code = main(["geocode", "--corpus", str(synth_dir / "corpus.tsv"), "--keys", str(keys),
                 "--provider", "mock", "--out", str(coords), "--merged-out", str(merged)])
    assert code == 0
    assert coords.is_file()

    kfile = tmp_path / "k.tsv"
    code = main(["kfunction", "--corpus", str(merged), "--radii", "50,200,800", "--out", str(kfile)])
    assert code == 0
    assert kfile.read_text(encoding="utf-8").splitlines()[0] == "r\tK\tpi_r2"

    geojson = tmp_path / "points.geojson"
    code = main(["export", "--corpus", str(merged), "--out", str(geojson),
                 "--from-year", "1995", "--to-year", "2015"])
    assert code == 0
    doc = json.loads(geojson.read_text(encoding="utf-8"))
    assert doc["features"], "year-window export should keep most records"


def pipeline_args(synth_dir, out_dir, keys):
    return [
        "pipeline",
        "--corpus", str(synth_dir / "corpus.tsv"),
        "--lexicon", str(synth_dir / "lexicon.tsv"),
        "--gazetteer", str(synth_dir / "gazetteer.tsv"),
        "--keys", str(keys),
        "--output-dir", str(out_dir),
        "--method", "naive_bayes",
        "--dim", DIM,
    ]


def test_pipeline_end_to_end(synth_dir, tmp_path):
    keys = write_keys(tmp_path / "keys.tsv")
    out = tmp_path / "run"
    assert main(pipeline_args(synth_dir, out, keys)) == 0
    for artifact in (
        "missingness_before.tsv", "model.json", "location_report.tsv",
        "coordinates.tsv", "records_final.tsv", "missingness_after.tsv",
        "summary.tsv", "timings.tsv",
    ):
        assert (out / artifact).is_file(), artifact

    records = ingest(out / "records_final.tsv").records
    assert len(records) == 800
    # every record ends with a category or had no name to classify from
    assert all(r.category is not None for r in records if r.name)

    # provenance reconciliation: original + imputed + missing = total
    for line in (out / "summary.tsv").read_text(encoding="utf-8").splitlines()[1:]:
        _, original, imputed, missing, total = line.split("\t")
        assert int(original) + int(imputed) + int(missing) == int(total)


def test_pipeline_skip_geocode(synth_dir, tmp_path):
    keys = write_keys(tmp_path / "keys.tsv")
    out = tmp_path / "run_nogeo"
    assert main(pipeline_args(synth_dir, out, keys) + ["--skip", "geocode"]) == 0
    assert not (out / "coordinates.tsv").exists()
    records = ingest(out / "records_final.tsv").records
    assert all(r.coordinates is None for r in records)


def test_pipeline_rerun_is_idempotent(synth_dir, tmp_path):
    keys = write_keys(tmp_path / "keys.tsv")
    out1, out2 = tmp_path / "r1", tmp_path / "r2"
    assert main(pipeline_args(synth_dir, out1, keys)) == 0
    # second pipeline consumes the completed output of the first
    args = pipeline_args(synth_dir, out2, keys)
    args[args.index("--corpus") + 1] = str(out1 / "records_final.tsv")
    assert main(args + ["--skip", "train,impute-category"]) == 0
    a = (out1 / "records_final.tsv").read_bytes()
    b = (out2 / "records_final.tsv").read_bytes()
    assert a == b


def test_pipeline_deterministic_artifacts(synth_dir, tmp_path):
    keys = write_keys(tmp_path / "keys.tsv")
    outs = [tmp_path / "d1", tmp_path / "d2"]
    for out in outs:
        assert main(pipeline_args(synth_dir, out, keys)) == 0
    for name in ("model.json", "records_final.tsv", "coordinates.tsv",
                 "location_report.tsv", "summary.tsv", "missingness_after.tsv"):
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes(), name


def test_config_file_and_env_overrides(synth_dir, tmp_path, monkeypatch):
    keys = write_keys(tmp_path / "keys.tsv")
    out = tmp_path / "cfg_run"
    config = tmp_path / "pipeline.conf"
    config.write_text(
        "\n".join([
            "# pipeline configuration",
            f"corpus={synth_dir / 'corpus.tsv'}",
            f"lexicon={synth_dir / 'lexicon.tsv'}",
            f"gazetteer={synth_dir / 'gazetteer.tsv'}",
            f"keys={keys}",
            "method=naive_bayes",
            f"dim={DIM}",
            "output_dir=/nonexistent/overridden/by/env",
        ]) + "\n",
        encoding="utf-8",
    )
    monkeypatch.setenv("REGIMPUTE_OUTPUT_DIR", str(out))
    assert main(["pipeline", "--config", str(config)]) == 0
    assert (out / "records_final.tsv").is_file()


def test_exit_code_2_on_config_error(tmp_path):
    code = main(["pipeline", "--corpus", str(tmp_path / "missing.tsv"),
                 "--lexicon", "x", "--gazetteer", "y", "--keys", "z",
                 "--output-dir", str(tmp_path / "o")])
    assert code == 2


def test_exit_code_2_on_unknown_config_key(tmp_path):
    bad = tmp_path / "bad.conf"
    bad.write_text("no_such_key=1\n", encoding="utf-8")
    assert main(["pipeline", "--config", str(bad)]) == 2


def test_exit_code_1_on_stage_failure(synth_dir, tmp_path):
    keys = write_keys(tmp_path / "keys.tsv")
    broken = tmp_path / "broken_gazetteer.tsv"
    broken.write_text("wrong\theader\n", encoding="utf-8")
    args = pipeline_args(synth_dir, tmp_path / "fail_run", keys)
    args[args.index("--gazetteer") + 1] = str(broken)
    assert main(args) == 1
    # artifacts from completed stages are retained
    assert (tmp_path / "fail_run" / "missingness_before.tsv").is_file()
