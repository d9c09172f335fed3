#!/usr/bin/env python3
# Bridging mismatched emotion vocabularies three ways.
#
# A text corpus says "guilt", a music corpus says "sad": before any
# retrieval metric makes sense, the text taxonomy has to be mapped onto the
# music taxonomy. Three routes: hand-curated tables, nearest neighbors in
# valence/arousal space, nearest neighbors in word-embedding space.

import numpy as np

from moodbridge.features import MUSIC, TEXT, VadLexicon, Vocabulary, WordEmbeddingTable
from moodbridge.taxonomy import (
    ALM,
    ISEAR,
    manual_map,
    map_va,
    map_w2v,
    relevant_set,
    w2v_golden_map,
)

print("=== built-in manual tables ===")
for dataset in (ALM, ISEAR):
    m = manual_map(dataset)
    print(f"\n{dataset} -> AudioSet moods:")
    for tag, targets in m.map.items():
        print(f"  {tag:12s} -> {', '.join(targets)}")

print("\nrelevance set for ISEAR 'guilt':", sorted(relevant_set(manual_map(ISEAR), "guilt")))

# --- valence/arousal route -------------------------------------------------
# a tiny illustrative lexicon; with a real NRC-style file the call is identical
lex = VadLexicon({
    "cheerful": (0.92, 0.75), "mournful": (0.12, 0.30), "panicked": (0.10, 0.95),
    "happy": (0.90, 0.70), "sad": (0.15, 0.25), "scary": (0.20, 0.90),
    "tender": (0.70, 0.20),
})
text_vocab = Vocabulary(TEXT, ("cheerful", "mournful", "panicked"))
music_vocab = Vocabulary(MUSIC, ("happy", "sad", "scary", "tender"))
va = map_va(text_vocab, music_vocab, lex)
print("\n=== VA nearest-neighbor map (toy lexicon) ===")
for tag, targets in va.map.items():
    v, a = lex.va(tag)
    print(f"  {tag:10s} ({v:.2f},{a:.2f}) -> {targets[0]}")

# --- word-embedding route ----------------------------------------------------
rng = np.random.default_rng(0)
emb = WordEmbeddingTable(8)
base = {t: rng.standard_normal(8) for t in music_vocab.tags}
for t, v in base.items():
    emb.add(t, v)
# synthetic "synonyms": each text tag is a jittered copy of one music vector
for text_tag, near in (("cheerful", "happy"), ("mournful", "sad"),
                       ("panicked", "scary")):
    emb.add(text_tag, base[near] + 0.15 * rng.standard_normal(8))
w2v = map_w2v(text_vocab, music_vocab, emb)
print("\n=== W2V nearest-neighbor map (toy embeddings) ===")
for tag, targets in w2v.map.items():
    print(f"  {tag:10s} -> {targets[0]}")

# the published W2V column ships as golden data for regression-testing the
# computed mapper against the original embedding space
print("\npublished W2V mapping for ISEAR (golden data):")
for tag, targets in w2v_golden_map(ISEAR).map.items():
    print(f"  {tag:10s} -> {targets[0]}")
