"""The unified lattice graph: character and word nodes, intra-source masks,
inter-source adjacency, and the edge-construction variants."""

import numpy as np

from lexner import build_graph, build_trie, graph_variant, match_sentence
from lexner.graph import serialize_graph

sentence = "北京人民大会堂"
trie = build_trie(["北京", "北京人", "人民", "人民大会堂"])
words, _ = match_sentence(trie, sentence)

graph = build_graph(len(sentence), words)
print(f"graph: n={graph.n} characters, m={graph.m} words")

print("\ncharacter mask M_c (fully connected):")
print(graph.char_mask)

print("\nword mask M_w (1 where spans share a character):")
print(graph.word_mask)
for j, w in enumerate(graph.words):
    print(f"  word {j}: {w.surface} [{w.head},{w.tail}]")

print("\ninter-source adjacency (characters x words):")
print(graph.inter_matrix(dtype=np.int64))

# ablation variants rewire the edges without touching the nodes
for variant in ("wo_word_edge", "fc_intra", "fc_inter"):
    v = graph_variant(graph, variant)
    print(f"\nvariant {variant}:")
    print("  M_w:")
    print("  " + str(v.word_mask).replace("\n", "\n  "))
    print(f"  words per character: {[len(ws) for ws in v.words_of_char]}")

print("\nserialized form (standard):")
print(serialize_graph(graph))
