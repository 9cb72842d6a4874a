"""Train the neural ranker on a synthetic conversation corpus.

Generates conversations where the correct response repeats a distinctive
context token, trains the base two-channel model for a few epochs, and
compares its ranking quality against the BM25 baseline.

Runs in well under a minute on a laptop CPU.
"""

import numpy as np

from convmatch.corpus import DialogExample
from convmatch.metrics import RankedLabels, evaluate_rankings
from convmatch.model import ConvLayerConfig, ModelConfig
from convmatch.retrieval import bm25_rank_responses
from convmatch.text import build_vocab
from convmatch.training import TrainConfig, train


def make_dataset(n_examples, n_neg, seed, prefix):
    """Each positive shares a cue token with its context; negatives do not."""
    rng = np.random.default_rng(seed)
    cues = [f"cue{i}" for i in range(20)]
    ctx_fill = [f"cf{i}" for i in range(15)]
    resp_fill = [f"rf{i}" for i in range(15)]
    examples = []
    for n in range(n_examples):
        cue = cues[int(rng.integers(0, len(cues)))]
        context = []
        for _ in range(2):
            utt = [str(t) for t in rng.choice(ctx_fill, size=4)]
            utt.insert(int(rng.integers(0, 5)), cue)
            context.append(utt)

        def response(c):
            resp = [str(t) for t in rng.choice(resp_fill, size=4)]
            resp.insert(int(rng.integers(0, 5)), c)
            return resp

        others = [c for c in cues if c != cue]
        negs = rng.choice(len(others), size=n_neg, replace=False)
        cands = [(response(cue), 1)] + [(response(others[int(i)]), 0) for i in negs]
        order = rng.permutation(len(cands))
        examples.append(DialogExample(dialog_id=f"{prefix}{n}",
                                      context=context,
                                      candidates=[cands[int(i)] for i in order]))
    return examples


train_set = make_dataset(120, n_neg=9, seed=11, prefix="train")
valid_set = make_dataset(30, n_neg=9, seed=22, prefix="valid")

streams = []
for example in train_set + valid_set:
    streams.extend(example.context)
    streams.extend(tokens for tokens, _ in example.candidates)
vocab = build_vocab(streams, min_count=1)
print(f"{len(train_set)} training conversations, vocabulary of {len(vocab)} tokens")

# Lexical baseline first: the context is the query, candidates the documents.
groups = []
for example in valid_set:
    order = bm25_rank_responses(example)
    groups.append(RankedLabels(labels=[example.candidates[i][1] for i, _ in order],
                               group_id=example.dialog_id))
baseline = evaluate_rankings(groups)
print(f"BM25 baseline:  MAP {baseline.map:.3f}  R@1 {baseline.recall_at(1):.3f}")

# A small two-channel model: word-embedding grid plus encoder-state grid.
model_cfg = ModelConfig(variant="dmn", channels=("m1", "m2"), interaction="dot",
                        l_u=6, l_r=6, c=2, embed_dim=8, gru_hidden=4,
                        conv=ConvLayerConfig(kernel_shape=(2, 2), kernel_count=4,
                                             pool_shape=(2, 2)),
                        mlp_hidden=8, dropout=0.0)
train_cfg = TrainConfig(margin=1.0, learning_rate=0.01, batch_size=32,
                        epochs=8, seed=7, patience=8)
result = train(train_set, valid_set, vocab, model_cfg, train_cfg)

print("\nepoch  train_loss  valid_MAP  valid_R@1")
for epoch, loss, valid_map, valid_r1, seconds in result.log:
    print(f"{epoch:5d}  {loss:10.4f}  {valid_map:9.4f}  {valid_r1:9.4f}")
print(f"\nbest validation MAP {result.best_valid_map:.3f} at epoch {result.best_epoch}")
