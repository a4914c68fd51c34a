"""Synthetic corpora for end-to-end exercises.

Sentences are built from two disjoint alphabets: entity surfaces use a-l,
filler runs use contiguous slices of "tuvwxyz". The lexicon is constructed so
that every gold entity has an exact-match lexicon word, some words sit
strictly inside entities, and filler or boundary-crossing words disturb.
"""

from __future__ import annotations

import numpy as np

from .data import Corpus, Sentence, spans_to_tags
from .matching import DISTURB, build_trie, label_lec, match_sentence

FILLER = "tuvwxyz"

# surface -> entity type; constant across every generated corpus
ENTITY_TYPES = {
    "abc": "PER", "ad": "PER",
    "efg": "LOC", "eh": "LOC",
    "ijk": "ORG", "il": "ORG",
}

COVER_WORDS = ["ab", "bc", "ef", "fg", "ij", "jk"]
FILLER_WORDS = ["tu", "uv", "vw", "wx", "xy", "yz", "tuv", "wxy", "uvw", "xyz"]
# filler char + entity head, or entity tail + filler char
CROSSING_WORDS = ["za", "ze", "zi", "ct", "dt", "gt", "ht", "kt"]

OVERFIT_LEXICON = list(ENTITY_TYPES) + COVER_WORDS + FILLER_WORDS + CROSSING_WORDS


def _filler(rng: np.random.Generator, lo: int = 2, hi: int = 4) -> str:
    length = int(rng.integers(lo, hi + 1))
    start = int(rng.integers(0, len(FILLER) - length + 1))
    return FILLER[start : start + length]


def make_overfit_corpus(
    seed: int = 7, sentences: int = 50
) -> tuple[Corpus, list[str]]:
    """Corpus an expressive-enough model can memorize perfectly.

    Every entity surface is in the lexicon (a Match word per entity), cover
    and crossing/filler words are present, and at least five distinct
    surfaces match only as disturbances.
    """
    rng = np.random.default_rng(seed)
    surfaces = list(ENTITY_TYPES)
    sents: list[Sentence] = []
    for k in range(sentences):
        parts: list[str] = []
        spans: list[tuple[int, int, str]] = []
        n_entities = 1 + int(rng.integers(0, 2))
        for e in range(n_entities):
            surface = surfaces[int(rng.integers(0, len(surfaces)))]
            # every few sentences, pin the neighboring filler so that a
            # boundary-crossing lexicon word actually occurs
            if k % 3 == 0:
                before, after = "xyz", "tuv"
            else:
                before, after = _filler(rng), _filler(rng)
            start = sum(len(p) for p in parts) + len(before)
            parts.extend([before, surface])
            spans.append((start, start + len(surface) - 1, ENTITY_TYPES[surface]))
            if e == n_entities - 1:
                parts.append(after)
        chars = list("".join(parts))
        sents.append(Sentence(chars, spans_to_tags(spans, len(chars))))
    corpus = Corpus(sents)
    _check_word_roles(corpus, OVERFIT_LEXICON, min_disturb=5)
    return corpus, list(OVERFIT_LEXICON)


def _check_word_roles(corpus: Corpus, lexicon: list[str], min_disturb: int) -> None:
    trie = build_trie(lexicon)
    disturb: set[str] = set()
    matched_entities = 0
    total_entities = 0
    for sent, spans in zip(corpus.sentences, corpus.gold_spans()):
        words, _ = match_sentence(trie, sent.chars)
        labels = label_lec(words, spans)
        for w, lab in zip(words, labels):
            if lab == DISTURB:
                disturb.add(w.surface)
        exact = {w.span() for w in words}
        matched_entities += sum(1 for h, t, _ in spans if (h, t) in exact)
        total_entities += len(spans)
    if matched_entities != total_entities:
        raise AssertionError("some gold entity has no exact lexicon match")
    if len(disturb) < min_disturb:
        raise AssertionError(f"only {len(disturb)} distinct disturb words, need {min_disturb}")


# ambiguous families: the short surface alone is a PER entity, but inside the
# extended surface it is merely covered by a LOC entity
AMBIGUOUS_FAMILIES = [("gh", "ghi"), ("mn", "mno")]
ANCHOR_ENTITY = ("pq", "ORG")

AMBIGUOUS_LEXICON = (
    [short for short, _ in AMBIGUOUS_FAMILIES]
    + [long for _, long in AMBIGUOUS_FAMILIES]
    + [ANCHOR_ENTITY[0]]
    + FILLER_WORDS
)


def make_ambiguous_corpus(
    seed: int = 11, per_case: int = 9
) -> tuple[Corpus, Corpus, list[str]]:
    """Train/held-out corpora whose entities are positionally ambiguous.

    The same surface is a gold entity in stand-alone contexts and a
    non-entity (covered by a longer entity) elsewhere, so resolving it needs
    the lattice context. Returns (train, heldout, lexicon); contexts differ
    between the two splits only by filler choice and position.
    """
    rng = np.random.default_rng(seed)
    cases: list[tuple[str, str, str]] = []  # (surface, type, kind)
    for short, long in AMBIGUOUS_FAMILIES:
        cases.append((short, "PER", "standalone"))
        cases.append((long, "LOC", "extended"))
    cases.append((ANCHOR_ENTITY[0], ANCHOR_ENTITY[1], "anchor"))

    sents: list[Sentence] = []
    for surface, etype, _ in cases:
        for _ in range(per_case):
            before, mid, after = _filler(rng), _filler(rng), _filler(rng)
            # one extra filler word region keeps several disturb words per sentence
            head = len(before)
            chars = list(before + surface + mid + after)
            spans = [(head, head + len(surface) - 1, etype)]
            sents.append(Sentence(chars, spans_to_tags(spans, len(chars))))
    order = rng.permutation(len(sents))
    split = (2 * len(sents)) // 3
    train = Corpus([sents[i] for i in order[:split]])
    heldout = Corpus([sents[i] for i in order[split:]])
    return train, heldout, list(AMBIGUOUS_LEXICON)
