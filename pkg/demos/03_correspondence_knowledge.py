"""Question/answer correspondence statistics as a matching signal.

Terms like ("restart", "leftovers") never match lexically or by embedding
similarity, but they co-occur across question/answer pairs. The positive
pointwise mutual information of (response term, utterance term) over
retrieved pairs captures exactly that, and becomes an extra input channel
for the neural ranker.
"""

import numpy as np

from convmatch.corpus import QAPair
from convmatch.knowledge import ppmi_matrix, retrieve_qa_pairs
from convmatch.retrieval import build_index
from convmatch.text import Tokenizer, tokenize

tok = Tokenizer()

# A tiny external collection where "leftovers" answers "restart" questions.
raw_pairs = [
    ("p1", "update fails on restart every time", "norton leftovers block the installer remove them"),
    ("p2", "restart loop during upgrade", "clean the leftovers of the old antivirus first"),
    ("p3", "printer offline after sleep", "power cycle the printer and the router"),
    ("p4", "restart hangs at ninety percent", "leftovers from symantec products are the usual cause"),
]
pairs = [QAPair(id=pid, question=tokenize(q, tok), answer=tokenize(a, tok))
         for pid, q, a in raw_pairs]
index = build_index(pairs, "concatenated")
by_id = {p.id: p for p in pairs}

utterance = tokenize("my update fails on restart", tok)
response = tokenize("remove the norton leftovers first", tok)

retrieved = retrieve_qa_pairs(response, index, by_id, top_pairs=3)
print("retrieved pairs:", [p.id for p in retrieved])

matrix = ppmi_matrix(response, utterance, retrieved)
print(f"\ncorrespondence matrix, shape {matrix.shape} (rows=response, cols=utterance):")
header = " ".join(f"{u:>9s}" for u in utterance)
print(f"{'':12s}{header}")
for token, row in zip(response, matrix):
    cells = " ".join(f"{v:9.3f}" for v in row)
    print(f"{token:12s}{cells}")

strongest = np.unravel_index(matrix.argmax(), matrix.shape)
print(f"\nstrongest association: response {response[strongest[0]]!r} with "
      f"utterance {utterance[strongest[1]]!r} = {matrix.max():.3f}")
