"""BM25 retrieval over a toy QA collection.

Builds an inverted index over a handful of question/answer pairs, walks
through how one document is scored, then runs a ranked search.
"""

from convmatch.corpus import QAPair
from convmatch.retrieval import bm25_score, build_index, idf, search
from convmatch.text import Tokenizer, tokenize

tok = Tokenizer()

raw_pairs = [
    ("p1", "excel dates revert to american format", "change the date format under regional settings in control panel"),
    ("p2", "how do i stop windows update restarting", "disable automatic restart in group policy settings"),
    ("p3", "printer driver missing after update", "reinstall the driver from the vendor site"),
    ("p4", "excel formulas not recalculating", "check that calculation is set to automatic in options"),
]
pairs = [QAPair(id=pid, question=tokenize(q, tok), answer=tokenize(a, tok))
         for pid, q, a in raw_pairs]

# Index the answer field; each pair id becomes a document id.
index = build_index(pairs, "answer")
print(f"indexed {index.n_docs} answers, average length {index.avg_doc_len:.2f} tokens")

# Term statistics drive the score: rare terms get a high idf weight.
for term in ("settings", "driver", "the"):
    print(f"  idf({term!r}) = {idf(index, term):.4f}")

query = tokenize("excel date format settings", tok)
print(f"\nquery tokens: {query}")

# Scoring one document by hand-picked id:
print(f"score of p1 for the query: {bm25_score(index, query, 'p1'):.4f}")

# Ranked search only visits documents sharing at least one query term.
print("\ntop results:")
for doc_id, score in search(index, query, k=3):
    print(f"  {doc_id}  {score:.4f}")
