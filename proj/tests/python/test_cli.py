"""End-to-end checks of the command-line binary (path in $HDC_CLI):
exit-code contract, cache behavior, config echo, metrics files, eval
refusals, and compare/sweep consistency."""

import json
import os
import random
import re
import subprocess
import sys
import tempfile

CLI = os.environ["HDC_CLI"]


def run(args, env, expect=0):
    proc = subprocess.run(
        [CLI] + args, capture_output=True, text=True, env=env, timeout=600
    )
    if proc.returncode != expect:
        raise AssertionError(
            f"{args}: expected exit {expect}, got {proc.returncode}\n"
            f"stdout:\n{proc.stdout}\nstderr:\n{proc.stderr}"
        )
    return proc


def write_csv(path, rows, labels):
    with open(path, "w") as f:
        for row, label in zip(rows, labels):
            f.write(",".join(f"{v:.6f}" for v in row) + f",{label}\n")


def make_clusters(n_per_class, n_features, seed):
    rng = random.Random(seed)
    rows, labels = [], []
    for label, (lo, hi) in enumerate([(0.0, 0.4), (0.6, 1.0)]):
        for _ in range(n_per_class):
            rows.append([rng.uniform(lo, hi) for _ in range(n_features)])
            labels.append(label)
    return rows, labels


def one_key(stdout):
    keys = re.findall(r"\(key ([0-9a-f]{16})\)", stdout)
    assert len(keys) == 1, stdout
    return keys[0]


def main():
    tmp = tempfile.mkdtemp(prefix="hdc_cli_test_")
    env = dict(os.environ)
    env["HDC_CACHE_DIR"] = os.path.join(tmp, "cache")

    train_csv = os.path.join(tmp, "train.csv")
    test_csv = os.path.join(tmp, "test.csv")
    rows, labels = make_clusters(30, 8, seed=0)
    write_csv(train_csv, rows, labels)
    rows_t, labels_t = make_clusters(10, 8, seed=1)
    write_csv(test_csv, rows_t, labels_t)

    # --- exit-code contract -------------------------------------------------
    run(["--help"], env, expect=0)
    run([], env, expect=2)  # a subcommand is required
    run(["encode"], env, expect=2)  # no dataset source
    run(["encode", "--data", train_csv, "--dim", "0"], env, expect=2)
    run(["train", "--data", train_csv, "--strategy", "bogus"], env, expect=2)
    run(["encode", "--data", os.path.join(tmp, "missing.csv")], env, expect=1)

    # --- encode + cache hit ---------------------------------------------------
    encode_args = ["encode", "--data", train_csv, "--dim", "512", "--levels", "16",
                   "--seed", "3"]
    first = run(encode_args, env)
    assert "D=512" in first.stdout and "N=60" in first.stdout, first.stdout
    assert "Q=16" in first.stdout and "L=8" in first.stdout, first.stdout
    assert "wrote" in first.stdout, first.stdout
    second = run(encode_args, env)
    assert "cache hit" in second.stdout, second.stdout
    assert one_key(first.stdout) == one_key(second.stdout)

    # --- train baseline + eval equality --------------------------------------
    model_path = os.path.join(tmp, "baseline.hdcm")
    metrics_path = os.path.join(tmp, "baseline.jsonl")
    trained = run(
        ["train", "--data", train_csv, "--strategy", "baseline", "--dim", "512",
         "--levels", "16", "--seed", "3", "--model-out", model_path,
         "--metrics-out", metrics_path],
        env,
    )
    assert "config strategy=baseline" in trained.stdout, trained.stdout
    assert "using encoded cache" in trained.stdout, trained.stdout  # reuses the encode above
    records = [json.loads(line) for line in open(metrics_path)]
    assert [r["type"] for r in records] == ["epoch", "summary"]
    summary = records[-1]
    assert summary["config"]["dim"] == "512"
    tsv_path = metrics_path.replace(".jsonl", ".tsv")
    tsv_lines = open(tsv_path).read().splitlines()
    assert tsv_lines[0].split("\t") == ["epoch", "train_loss", "train_acc", "val_acc", "lr",
                                        "wall_ms"]
    assert len(tsv_lines) == 2  # header + the single averaging pass

    evaluated = run(["eval", "--model", model_path, "--data", train_csv], env)
    assert "accuracy:" in evaluated.stdout, evaluated.stdout
    record = json.loads(evaluated.stdout.strip().splitlines()[-1])
    assert record["type"] == "evaluation"
    # Same code path: eval on the training set reproduces the recorded value.
    assert record["accuracy"] == summary["final_train_acc"]
    assert len(record["confusion"]) == 2

    # --- preset echo ----------------------------------------------------------
    fashion = run(
        ["train", "--data", train_csv, "--strategy", "lehdc", "--preset", "fashion-mnist",
         "--dim", "256", "--levels", "16", "--epochs", "2",
         "--model-out", os.path.join(tmp, "f.hdcm"),
         "--metrics-out", os.path.join(tmp, "f.jsonl")],
        env,
    )
    for line in ["config weight_decay=0.03", "config learning_rate=0.1",
                 "config batch_size=256", "config dropout_rate=0.3"]:
        assert line in fashion.stdout, fashion.stdout
    mnist = run(
        ["train", "--data", train_csv, "--strategy", "lehdc", "--preset", "mnist",
         "--dim", "256", "--levels", "16", "--epochs", "2",
         "--model-out", os.path.join(tmp, "m.hdcm"),
         "--metrics-out", os.path.join(tmp, "m.jsonl")],
        env,
    )
    for line in ["config weight_decay=0.05", "config learning_rate=0.01",
                 "config batch_size=64", "config dropout_rate=0.5"]:
        assert line in mnist.stdout, mnist.stdout

    # --- eval refusal on mismatched encodings ---------------------------------
    other_cache = os.path.join(tmp, "other.hdce")
    run(["encode", "--data", train_csv, "--dim", "256", "--levels", "16", "--seed", "3",
         "--out", other_cache], env)
    refused = run(["eval", "--model", model_path, "--cache", other_cache], env, expect=1)
    assert "mismatched dim" in refused.stderr, refused.stderr
    assert "512" in refused.stderr and "256" in refused.stderr, refused.stderr

    # --- compare --------------------------------------------------------------
    compare = run(
        ["compare", "--data", train_csv, "--test-data", test_csv,
         "--strategies", "baseline,retrain", "--seeds", "4,5", "--dim", "256",
         "--levels", "16"],
        env,
    )
    assert "cell strategy=baseline seed=4" in compare.stdout, compare.stdout
    assert "cell strategy=retrain seed=5" in compare.stdout, compare.stdout
    table = [l for l in compare.stdout.splitlines() if "±" in l and "std" not in l]
    assert len(table) == 2, compare.stdout
    single = run(
        ["compare", "--data", train_csv, "--test-data", test_csv,
         "--strategies", "baseline", "--seeds", "9", "--dim", "256", "--levels", "16"],
        env,
    )
    assert "±0.00" in single.stdout, single.stdout  # one seed -> zero spread

    # --- sweep-dim + consistency with compare ----------------------------------
    sweep = run(
        ["sweep-dim", "--data", train_csv, "--test-data", test_csv, "--dims", "64,128",
         "--strategies", "baseline", "--seed", "4", "--levels", "16",
         "--metrics-out", os.path.join(tmp, "sweep.jsonl")],
        env,
    )
    assert "dim=64 strategy=baseline accuracy=" in sweep.stdout, sweep.stdout
    sweep_acc = re.search(r"dim=128 strategy=baseline accuracy=([0-9.]+)", sweep.stdout)
    assert sweep_acc, sweep.stdout
    consistency = run(
        ["compare", "--data", train_csv, "--test-data", test_csv,
         "--strategies", "baseline", "--seeds", "4", "--dim", "128", "--levels", "16"],
        env,
    )
    compare_acc = re.search(r"cell strategy=baseline seed=4 accuracy=([0-9.]+)",
                            consistency.stdout)
    assert compare_acc, consistency.stdout
    assert sweep_acc.group(1) == compare_acc.group(1)
    sweep_records = [json.loads(line) for line in open(os.path.join(tmp, "sweep.jsonl"))]
    assert [r["dim"] for r in sweep_records] == [64, 128]
    run(["sweep-dim", "--data", train_csv, "--test-data", test_csv, "--dims", "8",
         "--strategies", "baseline", "--levels", "16"], env, expect=2)  # dim < levels

    print("cli: all checks passed")


if __name__ == "__main__":
    main()
