import csv
import json
from pathlib import Path

import numpy as np
import pytest

from wilddistort.cli import main
from wilddistort.pipeline import read_manifest
from wilddistort.image import save_png

from conftest import synth_image


def make_corpus(tmp_path, n=6, size=24):
    src = tmp_path / "src"
    src.mkdir(exist_ok=True)
    rows = []
    for i in range(n):
        path = src / f"img{i}.png"
        save_png(synth_image(200 + i, size, size), path)
        rows.append((f"img{i:03d}", str(path), i % 2))
    listing = tmp_path / "listing.csv"
    with listing.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["image_id", "path", "label"])
        writer.writerows(rows)
    return listing


def run_distort(tmp_path, listing, out_name, extra=()):
    out = tmp_path / out_name
    code = main([
        "distort", "--input", str(listing), "--output-dir", str(out),
        "--seed", "11", "--robust-fraction", "0.5", *extra,
    ])
    return code, out


def test_distort_evaluate_replay_flow(tmp_path, capsys):
    listing = make_corpus(tmp_path)
    code, out = run_distort(tmp_path, listing, "run")
    assert code == 0
    stdout = capsys.readouterr().out
    assert "clean: 3" in stdout and "robust: 3" in stdout
    manifest = out / "manifest.jsonl"
    assert manifest.exists()
    assert (out / "run_config.json").exists()
    echoed = json.loads((out / "run_config.json").read_text())
    assert echoed["seed"] == 11 and echoed["scheme"] == "challenge"

    # deterministic rerun: byte-identical manifest modulo the run directory
    code2, out2 = run_distort(tmp_path, listing, "run2")
    assert code2 == 0
    text1 = manifest.read_text()
    text2 = (out2 / "manifest.jsonl").read_text().replace(str(out2), str(out))
    assert text1 == text2

    # perfect predictions give a perfect report
    records = read_manifest(manifest)
    preds = tmp_path / "preds.csv"
    with preds.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["image_id", "score"])
        for rec in records:
            writer.writerow([rec.image_id, rec.label])
    report_path = tmp_path / "report.json"
    code = main(["evaluate", "--manifest", str(manifest), "--predictions",
                 str(preds), "--output", str(report_path)])
    assert code == 0
    report = json.loads(report_path.read_text())
    assert report["clean_auc"] == 1.0
    assert report["robust_auc"] == 1.0
    assert report["combined"] == 1.0
    assert report["run_config"]["manifest"] == str(manifest)

    # shuffled predictions produce the identical report
    shuffled = tmp_path / "shuffled.csv"
    lines = preds.read_text().splitlines()
    shuffled.write_text("\n".join([lines[0]] + list(reversed(lines[1:]))) + "\n")
    code = main(["evaluate", "--manifest", str(manifest), "--predictions",
                 str(shuffled), "--output", str(tmp_path / "report2.json")])
    assert code == 0
    r1 = json.loads(report_path.read_text())
    r2 = json.loads((tmp_path / "report2.json").read_text())
    r2["run_config"] = r1["run_config"]
    assert r1 == r2

    capsys.readouterr()
    code = main(["replay", "--manifest", str(manifest)])
    assert code == 0
    assert "0 mismatched" in capsys.readouterr().out

    # corrupting one output makes replay report a mismatch with exit 2
    robust = [r for r in records if r.track == "robust"][0]
    Path(robust.output_path).write_bytes(b"\x89PNG broken")
    assert main(["replay", "--manifest", str(manifest)]) == 2


def test_evaluate_csv_format(tmp_path, capsys):
    listing = make_corpus(tmp_path, n=4)
    _, out = run_distort(tmp_path, listing, "run")
    manifest = out / "manifest.jsonl"
    records = read_manifest(manifest)
    preds = tmp_path / "p.csv"
    with preds.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["image_id", "score"])
        for rec in records:
            writer.writerow([rec.image_id, 0.5 + 0.1 * rec.label])
    capsys.readouterr()
    code = main(["evaluate", "--manifest", str(manifest), "--predictions",
                 str(preds), "--format", "csv"])
    assert code == 0
    out_text = capsys.readouterr().out
    assert out_text.startswith("metric,value")


def test_evaluate_id_mismatch_exits_1(tmp_path, capsys):
    listing = make_corpus(tmp_path, n=4)
    _, out = run_distort(tmp_path, listing, "run")
    preds = tmp_path / "p.csv"
    preds.write_text("image_id,score\nimg000,0.5\n")
    code = main(["evaluate", "--manifest", str(out / "manifest.jsonl"),
                 "--predictions", str(preds)])
    assert code == 1
    assert "misaligned" in capsys.readouterr().err


def test_distort_partial_failure_exits_2(tmp_path, capsys):
    listing = make_corpus(tmp_path, n=3)
    lines = listing.read_text().splitlines()
    lines.append(f"ghost,{tmp_path}/src/nope.png,1")
    listing.write_text("\n".join(lines) + "\n")
    code, out = run_distort(tmp_path, listing, "run")
    assert code == 2
    assert "FAILED ghost" in capsys.readouterr().err


def test_robust_fraction_zero_clean_manifest(tmp_path):
    listing = make_corpus(tmp_path, n=4)
    code, out = run_distort(tmp_path, listing, "run", extra=("--robust-fraction", "0"))
    assert code == 0
    assert all(r.track == "clean" for r in read_manifest(out / "manifest.jsonl"))


def test_ant_heavy_plans_have_six_steps(tmp_path):
    listing = make_corpus(tmp_path, n=4, size=20)
    code, out = run_distort(tmp_path, listing, "run",
                            extra=("--scheme", "ant_heavy", "--robust-fraction", "1"))
    assert code == 0
    for rec in read_manifest(out / "manifest.jsonl"):
        assert len(rec.plan) == 6


def test_fuse_command(tmp_path, capsys):
    scores = tmp_path / "scores.csv"
    with scores.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["image_id", "a", "b"])
        writer.writerow(["x", "0.4", "0.4"])
        writer.writerow(["y", "0.9", "0.7"])
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"scheme": "average", "columns": ["a", "b"]}))
    out = tmp_path / "fused.csv"
    code = main(["fuse", "--scores", str(scores), "--scheme-config", str(cfg),
                 "--output", str(out)])
    assert code == 0
    rows = {r["image_id"]: float(r["score"]) for r in csv.DictReader(out.open())}
    assert rows == {"x": pytest.approx(0.4), "y": pytest.approx(0.8)}


def test_fuse_missing_column_exits_1(tmp_path, capsys):
    scores = tmp_path / "scores.csv"
    scores.write_text("image_id,a\nx,0.5\n")
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"scheme": "average", "columns": ["a", "missing_col"]}))
    code = main(["fuse", "--scores", str(scores), "--scheme-config", str(cfg),
                 "--output", str(tmp_path / "o.csv")])
    assert code == 1
    assert "missing_col" in capsys.readouterr().err


def test_severity_table_show_and_validate(tmp_path, capsys):
    assert main(["severity-table", "show", "--kind", "gaussian_blur"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["kinds"]["gaussian_blur"][0] == {"sigma": 0.8}

    cfg = tmp_path / "sev.json"
    cfg.write_text(json.dumps({
        "kinds": {"white_noise": [{"sigma": s} for s in (1, 2, 3, 4, 5)]}
    }))
    assert main(["severity-table", "validate", "--severity-config", str(cfg)]) == 0
    capsys.readouterr()

    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"kinds": {"white_noise": [{"sigma": 1}]}}))
    assert main(["severity-table", "validate", "--severity-config", str(bad)]) == 1

    assert main(["severity-table", "show", "--kind", "organic_moire"]) == 1


def test_severity_config_env_var(tmp_path, capsys, monkeypatch):
    cfg = tmp_path / "sev.json"
    cfg.write_text(json.dumps({
        "kinds": {"gaussian_blur": [{"sigma": s} for s in (9, 10, 11, 12, 13)]}
    }))
    monkeypatch.setenv("WILDDISTORT_CONFIG", str(cfg))
    assert main(["severity-table", "show", "--kind", "gaussian_blur"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["kinds"]["gaussian_blur"][0] == {"sigma": 9}


def test_unknown_flag_is_a_hard_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["evaluate", "--manifest", "m", "--predictions", "p", "--bogus"])
    assert exc.value.code == 1


def test_bad_seed_value(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["distort", "--input", "x.csv", "--output-dir", "o", "--seed", "abc"])
    assert exc.value.code == 1


def test_help_lists_commands(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--help"])
    assert exc.value.code == 0
    text = capsys.readouterr().out
    for command in ("distort", "evaluate", "fuse", "replay", "severity-table"):
        assert command in text


def test_seed_random_accepted(tmp_path):
    listing = make_corpus(tmp_path, n=2, size=16)
    out = tmp_path / "rand"
    code = main(["distort", "--input", str(listing), "--output-dir", str(out),
                 "--seed", "random", "--robust-fraction", "1"])
    assert code == 0
    records = read_manifest(out / "manifest.jsonl")
    assert all(r.track == "robust" for r in records)
