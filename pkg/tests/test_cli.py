import csv
import json

import pytest

from mwkrescale.cli import EXIT_CONFIG, EXIT_DATA, EXIT_OK, EXIT_PARTIAL, build_parser, main, resolve


def test_precedence_flags_over_file_over_defaults(tmp_path):
    cfg = tmp_path / "c.yaml"
    cfg.write_text("runs: 7\nseed: 3\nnorm: zscore\ndatasets: [iris]\n")
    args = build_parser().parse_args(["bench", "--config", str(cfg), "--seed", "9"])
    s = resolve(args)
    assert s["runs"] == 7 and s["seed"] == 9 and s["norm"] == ["zscore"]
    assert s["datasets"] == ["iris"] and s["workers"] == 1


def test_json_config_and_unknown_key(tmp_path):
    good = tmp_path / "c.json"
    good.write_text(json.dumps({"kmeanspp_runs": 4, "arms": ["kmeans++"]}))
    s = resolve(build_parser().parse_args(["bench", "--config", str(good)]))
    assert s["runs"] == 4 and s["arm"] == ["kmeans++"]
    bad = tmp_path / "b.yaml"
    bad.write_text("colour: blue\n")
    assert main(["bench", "iris", "--config", str(bad)]) == EXIT_CONFIG
    nested = tmp_path / "n.yaml"
    nested.write_text("runs: {a: 1}\n")
    assert main(["bench", "iris", "--config", str(nested)]) == EXIT_CONFIG


def test_cluster_command(capsys):
    assert main(["cluster", "iris", "--arm", "imwk", "--p", "2"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "ARI" in out and "criterion" in out
    assert main(["cluster", "iris", "--arm", "rescaled-kmeans++", "--p1", "2", "--runs", "3"]) == EXIT_OK


def test_exit_codes(tmp_path):
    assert main(["cluster", str(tmp_path / "missing.csv")]) == EXIT_DATA
    assert main(["cluster", "iris", "--norm", "l2"]) == EXIT_CONFIG
    assert main(["cluster", "iris", "--arm", "rescaled-imwk"]) == EXIT_CONFIG
    assert main(["bench"]) == EXIT_CONFIG
    blocker = tmp_path / "f"
    blocker.write_text("")
    assert main(["bench", "iris", "--out", str(blocker / "x")]) == EXIT_CONFIG
    dup = tmp_path / "dup.csv"
    dup.write_text("a,label\n" + "".join(f"{i % 2},{i % 4}\n" for i in range(12)))
    assert main(["cluster", str(dup), "--arm", "imwk", "--p", "2"]) == EXIT_PARTIAL
    out = tmp_path / "o"
    assert main(["bench", str(dup), "--arm", "imwk", "--p-step", "1", "--out", str(out)]) == EXIT_PARTIAL
    assert (out / "raw.csv").exists()


def test_generate_and_bench_roundtrip(tmp_path, capsys):
    gen = tmp_path / "gen"
    assert main(["generate", "100x3-2 +2NF", "--count", "2", "--out", str(gen)]) == EXIT_OK
    files = sorted(gen.glob("*.csv"))
    assert len(files) == 2
    with open(files[0], newline="") as f:
        header = next(csv.reader(f))
    assert len(header) == 6 and header[-1] == "label"
    assert main(["generate", "iris", "--out", str(gen)]) == EXIT_CONFIG
    out = tmp_path / "bench"
    code = main(["bench", str(files[0]), "--arm", "kmeans++,imwk", "--runs", "2", "--p-step", "1.5",
                 "--norm", "range,zscore", "--out", str(out)])
    assert code == EXIT_OK
    with open(out / "summary.csv", newline="") as f:
        rows = list(csv.DictReader(f))
    assert {r["normalization"] for r in rows} == {"range", "zscore"}
    assert {r["arm"] for r in rows} == {"kmeans++", "imwk"}


def test_sweep_command(tmp_path, capsys):
    out = tmp_path / "sw"
    code = main(["sweep", "iris", "--runs", "2", "--p-step", "1.5", "--out", str(out)])
    assert code == EXIT_OK
    assert (out / "grid_iris_range.csv").exists() and (out / "mask_iris_range.csv").exists()
    assert "best cell" in capsys.readouterr().out
