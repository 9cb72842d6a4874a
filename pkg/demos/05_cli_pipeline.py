"""The full command-line pipeline, end to end, in a temporary directory.

Writes a small conversation corpus and external QA file, then drives every
CLI command in order: index, build-data, train, rank, eval and expand.
Each command is also available from a shell, e.g.

    convmatch index --qa-file qa.tsv --index-file qa.index
"""

import tempfile
from pathlib import Path

import numpy as np

from convmatch.cli import main

work = Path(tempfile.mkdtemp(prefix="convmatch-demo-"))
print(f"working directory: {work}\n")

rng = np.random.default_rng(3)
topics = [f"top{i}" for i in range(8)]
partners = [f"par{i}" for i in range(8)]

# Positive-only conversations: context mentions a topic term, the true
# response replies with that topic's partner term.
with open(work / "dialogs.tsv", "w", encoding="utf-8") as fh:
    for n in range(30):
        t = int(rng.integers(0, 8))
        filler = " ".join(f"cf{int(i)}" for i in rng.integers(0, 10, 3))
        context = f"my {topics[t]} is broken {filler} __eot__ tell me more about {topics[t]}"
        response = f"try the {partners[t]} fix rf{int(rng.integers(0, 10))}"
        fh.write(f"1\t{context}\t{response}\n")

# External QA collection linking partner terms back to topic terms.
with open(work / "qa.tsv", "w", encoding="utf-8") as fh:
    for i in range(8):
        fh.write(f"q{i}\t{topics[i]} {topics[i]} trouble\t{partners[i]} {topics[i]} {topics[i]}\n")


def run(*argv):
    print(f"$ convmatch {' '.join(argv)}")
    code = main(list(argv))
    assert code == 0, f"exit code {code}"
    print()


run("index", "--qa-file", str(work / "qa.tsv"),
    "--index-file", str(work / "qa.index"))

run("build-data", "--train-file", str(work / "dialogs.tsv"),
    "--output", str(work / "train.tsv"), "--n-neg", "4", "--seed", "5", "--c", "2")

# Reuse the sampled data as a validation split for this small demo.
run("train", "--train-file", str(work / "train.tsv"),
    "--valid-file", str(work / "train.tsv"),
    "--checkpoint", str(work / "model.ckpt"),
    "--min-count", "1", "--l-u", "8", "--l-r", "8", "--c", "2",
    "--embed-dim", "8", "--gru-hidden", "4", "--conv-kernels", "4",
    "--conv-kernel-shape", "2,2", "--pool-shape", "2,2", "--mlp-hidden", "8",
    "--dropout", "0.0", "--epochs", "4", "--batch-size", "16",
    "--learning-rate", "0.01", "--seed", "3",
    "--log-file", str(work / "train.log.tsv"))

run("rank", "--test-file", str(work / "train.tsv"),
    "--checkpoint", str(work / "model.ckpt"),
    "--output", str(work / "ranking.tsv"))

run("eval", "--test-file", str(work / "train.tsv"),
    "--checkpoint", str(work / "model.ckpt"),
    "--output", str(work / "report.tsv"))

run("expand", "--test-file", str(work / "train.tsv"),
    "--qa-file", str(work / "qa.tsv"), "--index-file", str(work / "qa.index"),
    "--output", str(work / "expanded.tsv"), "--prf-docs", "3", "--prf-terms", "2",
    "--c", "2")

print("artifacts:")
for path in sorted(work.iterdir()):
    print(f"  {path.name}  ({path.stat().st_size} bytes)")

print("\nfirst ranking rows:")
for line in (work / "ranking.tsv").read_text().splitlines()[:5]:
    print(" ", line)

print("\nfirst expansion rows:")
for line in (work / "expanded.tsv").read_text().splitlines()[:3]:
    print(" ", line)
