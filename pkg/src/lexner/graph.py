"""Unified multi-source lattice graph: character nodes, word nodes, and masks.

Characters form a fully connected source; words are connected to each other
when their spans overlap (they are assigned to a common character), and every
character is connected to each word whose span contains it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .matching import MatchedWord

GRAPH_VARIANTS = ("standard", "wo_word_edge", "fc_intra", "fc_inter")


@dataclass
class LatticeGraph:
    """Immutable node/edge structure of one sentence's lattice.

    char_mask is the n x n intra-source mask (all ones), word_mask the m x m
    intra-source mask (ones where spans overlap, ones on the diagonal).
    words_of_char[i] lists word ids adjacent to character i; chars_of_word[j]
    lists character ids adjacent to word j. The two adjacency directions are
    transposes of each other.
    """

    n: int
    m: int
    words: list[MatchedWord]
    char_mask: np.ndarray
    word_mask: np.ndarray
    words_of_char: list[list[int]]
    chars_of_word: list[list[int]]

    def inter_matrix(self, dtype=np.float64) -> np.ndarray:
        """Dense n x m character-word adjacency."""
        adj = np.zeros((self.n, self.m), dtype=dtype)
        for i, ws in enumerate(self.words_of_char):
            adj[i, ws] = 1
        return adj


def build_graph(n: int, words: list[MatchedWord]) -> LatticeGraph:
    """Assemble the graph for a sentence of n characters and its matched words."""
    if n <= 0:
        raise ValueError("sentence length must be positive")
    for w in words:
        if not (0 <= w.head <= w.tail < n):
            raise ValueError(f"word span ({w.head},{w.tail}) out of range for n={n}")
    m = len(words)
    char_mask = np.ones((n, n), dtype=np.uint8)
    word_mask = np.zeros((m, m), dtype=np.uint8)
    heads = np.array([w.head for w in words], dtype=np.int64).reshape(m, 1)
    tails = np.array([w.tail for w in words], dtype=np.int64).reshape(m, 1)
    if m:
        # spans overlap iff neither ends before the other starts
        word_mask = ((heads <= tails.T) & (heads.T <= tails)).astype(np.uint8)
    words_of_char: list[list[int]] = [[] for _ in range(n)]
    chars_of_word: list[list[int]] = []
    for j, w in enumerate(words):
        span = list(range(w.head, w.tail + 1))
        chars_of_word.append(span)
        for i in span:
            words_of_char[i].append(j)
    return LatticeGraph(n, m, list(words), char_mask, word_mask, words_of_char, chars_of_word)


def graph_variant(graph: LatticeGraph, variant: str) -> LatticeGraph:
    """Derive an edge-construction ablation of the graph.

    standard: unchanged copy. wo_word_edge: word-word edges removed (mask is
    the identity). fc_intra: all word pairs connected. fc_inter: every
    character adjacent to every word.
    """
    if variant not in GRAPH_VARIANTS:
        raise ValueError(f"unknown graph variant {variant!r}; expected one of {GRAPH_VARIANTS}")
    n, m = graph.n, graph.m
    word_mask = graph.word_mask.copy()
    words_of_char = [list(ws) for ws in graph.words_of_char]
    chars_of_word = [list(cs) for cs in graph.chars_of_word]
    if variant == "wo_word_edge":
        word_mask = np.eye(m, dtype=np.uint8)
    elif variant == "fc_intra":
        word_mask = np.ones((m, m), dtype=np.uint8)
    elif variant == "fc_inter":
        words_of_char = [list(range(m)) for _ in range(n)]
        chars_of_word = [list(range(n)) for _ in range(m)]
    return LatticeGraph(
        n, m, list(graph.words), graph.char_mask.copy(), word_mask, words_of_char, chars_of_word
    )


def serialize_graph(graph: LatticeGraph) -> str:
    """Render the graph as a line-oriented text document (debugging, fixtures)."""
    lines = [f"n {graph.n}", f"m {graph.m}"]
    for j, w in enumerate(graph.words):
        lines.append(f"word {j} {w.head} {w.tail} {w.surface}")
    for j in range(graph.m):
        for k in range(j + 1, graph.m):
            if graph.word_mask[j, k]:
                lines.append(f"word_edge {j} {k}")
    for i, ws in enumerate(graph.words_of_char):
        lines.append("char_words " + " ".join(str(x) for x in [i] + list(ws)))
    return "\n".join(lines) + "\n"
