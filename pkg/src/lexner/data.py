"""Corpus ingestion, tag/span conversion, strict-match evaluation, statistics.

Corpus files are UTF-8, one `character<TAB>tag` pair per line, blank line
between sentences. Both the BIO and BMES tag schemes are supported; BIO is
the default everywhere.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .matching import COVER, MATCH, LexiconTrie, label_lec, match_sentence

SCHEMES = ("bio", "bmes")


class CorpusError(ValueError):
    """Malformed corpus input (bad line, unknown tag, length mismatch)."""


@dataclass
class Sentence:
    chars: list[str]
    tags: list[str]

    def __len__(self) -> int:
        return len(self.chars)


@dataclass
class Corpus:
    sentences: list[Sentence]
    scheme: str = "bio"
    repaired_tags: int = 0

    def __len__(self) -> int:
        return len(self.sentences)

    def entity_types(self) -> list[str]:
        types = set()
        for sent in self.sentences:
            for _, _, t in tags_to_spans(sent.tags, self.scheme):
                types.add(t)
        return sorted(types)

    def gold_spans(self) -> list[list[tuple[int, int, str]]]:
        return [tags_to_spans(s.tags, self.scheme) for s in self.sentences]


def make_tagset(entity_types: Sequence[str], scheme: str = "bio") -> list[str]:
    """Label inventory for a set of entity types; outside tag first (id 0)."""
    if scheme not in SCHEMES:
        raise ValueError(f"unknown tag scheme {scheme!r}")
    tags = ["O"]
    prefixes = ("B", "I") if scheme == "bio" else ("B", "M", "E", "S")
    for t in sorted(entity_types):
        tags.extend(f"{p}-{t}" for p in prefixes)
    return tags


def spans_to_tags(spans: Sequence[tuple[int, int, str]], n: int, scheme: str = "bio") -> list[str]:
    """Render entity spans as a per-character tag sequence."""
    tags = ["O"] * n
    for head, tail, etype in spans:
        if not (0 <= head <= tail < n):
            raise ValueError(f"span ({head},{tail}) out of range for length {n}")
        if scheme == "bio":
            tags[head] = f"B-{etype}"
            for i in range(head + 1, tail + 1):
                tags[i] = f"I-{etype}"
        else:
            if head == tail:
                tags[head] = f"S-{etype}"
            else:
                tags[head] = f"B-{etype}"
                for i in range(head + 1, tail):
                    tags[i] = f"M-{etype}"
                tags[tail] = f"E-{etype}"
    return tags


def tags_to_spans(tags: Sequence[str], scheme: str = "bio") -> list[tuple[int, int, str]]:
    """Extract (head, tail, type) entity spans; inverse of spans_to_tags."""
    spans: list[tuple[int, int, str]] = []
    head: int | None = None
    etype: str | None = None

    def flush(end: int) -> None:
        nonlocal head, etype
        if head is not None:
            spans.append((head, end, etype))
        head = etype = None

    for i, tag in enumerate(tags):
        if tag == "O":
            flush(i - 1)
            continue
        prefix, _, t = tag.partition("-")
        if scheme == "bio":
            if prefix == "B" or (head is not None and t != etype) or head is None:
                flush(i - 1)
                head, etype = i, t
        else:
            if prefix in ("B", "S") or head is None or t != etype:
                flush(i - 1)
                head, etype = i, t
            if prefix in ("E", "S"):
                spans.append((head, i, etype))
                head = etype = None
                continue
    flush(len(tags) - 1)
    return spans


def load_corpus(path: str | Path, scheme: str = "bio") -> Corpus:
    """Parse a two-column corpus file.

    Raises CorpusError with the line number for malformed lines or tags not
    matching the scheme. A sentence-initial or type-switching inside tag (for
    BIO: I- without a matching B-) is repaired by promoting it to B-, counted
    in Corpus.repaired_tags.
    """
    if scheme not in SCHEMES:
        raise ValueError(f"unknown tag scheme {scheme!r}")
    prefixes = {"B", "I"} if scheme == "bio" else {"B", "M", "E", "S"}
    sentences: list[Sentence] = []
    chars: list[str] = []
    tags: list[str] = []
    repaired = 0

    def flush() -> None:
        nonlocal chars, tags, repaired
        if chars:
            repaired += _repair_tags(tags, scheme)
            sentences.append(Sentence(chars, tags))
            chars, tags = [], []

    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip():
                flush()
                continue
            parts = line.split("\t")
            if len(parts) != 2 or not parts[0] or not parts[1]:
                raise CorpusError(f"{path}:{lineno}: expected `char<TAB>tag`, got {line!r}")
            char, tag = parts
            if tag != "O":
                prefix, sep, etype = tag.partition("-")
                if not sep or prefix not in prefixes or not etype:
                    raise CorpusError(f"{path}:{lineno}: unknown tag {tag!r} for scheme {scheme}")
            chars.append(char)
            tags.append(tag)
    flush()
    return Corpus(sentences, scheme, repaired)


def _repair_tags(tags: list[str], scheme: str) -> int:
    """Promote continuation tags with no open entity to begin tags, in place."""
    cont = {"I"} if scheme == "bio" else {"M", "E"}
    repaired = 0
    open_type: str | None = None
    for i, tag in enumerate(tags):
        if tag == "O":
            open_type = None
            continue
        prefix, _, etype = tag.partition("-")
        if prefix in cont and open_type != etype:
            tags[i] = f"B-{etype}"
            repaired += 1
            open_type = etype
        elif prefix in ("B", "I", "M"):
            open_type = etype
        else:  # E or S closes the entity
            open_type = None
    return repaired


@dataclass
class EvalReport:
    precision: float
    recall: float
    f1: float
    gold_entities: int
    predicted_entities: int
    correct_entities: int
    per_type: dict[str, tuple[float, float, float]] = field(default_factory=dict)

    def format(self) -> str:
        lines = [
            f"entities gold={self.gold_entities} predicted={self.predicted_entities} "
            f"correct={self.correct_entities}",
            f"precision={self.precision:.4f} recall={self.recall:.4f} f1={self.f1:.4f}",
        ]
        for etype, (p, r, f1) in sorted(self.per_type.items()):
            lines.append(f"type {etype}: precision={p:.4f} recall={r:.4f} f1={f1:.4f}")
        return "\n".join(lines)


def _prf(correct: int, predicted: int, gold: int) -> tuple[float, float, float]:
    p = correct / predicted if predicted else 0.0
    r = correct / gold if gold else 0.0
    f1 = 2 * p * r / (p + r) if p + r else 0.0
    return p, r, f1


def evaluate(pred_tags: Sequence[Sequence[str]], gold: Corpus) -> EvalReport:
    """Strict span+type matching: an entity is correct only on exact equality."""
    if len(pred_tags) != len(gold.sentences):
        raise CorpusError(
            f"prediction has {len(pred_tags)} sentences, gold has {len(gold.sentences)}"
        )
    total_gold = total_pred = total_correct = 0
    by_type: dict[str, list[int]] = {}
    for pred, sent in zip(pred_tags, gold.sentences):
        if len(pred) != len(sent.chars):
            raise CorpusError("prediction/gold sentence length mismatch")
        gold_spans = set(tags_to_spans(sent.tags, gold.scheme))
        pred_spans = set(tags_to_spans(pred, gold.scheme))
        total_gold += len(gold_spans)
        total_pred += len(pred_spans)
        total_correct += len(gold_spans & pred_spans)
        for spans, slot in ((gold_spans, 0), (pred_spans, 1), (gold_spans & pred_spans, 2)):
            for _, _, etype in spans:
                by_type.setdefault(etype, [0, 0, 0])[slot] += 1
    p, r, f1 = _prf(total_correct, total_pred, total_gold)
    per_type = {
        etype: _prf(c, pr, g) for etype, (g, pr, c) in by_type.items()
    }
    return EvalReport(p, r, f1, total_gold, total_pred, total_correct, per_type)


@dataclass
class CorpusStats:
    sentences: int
    entities: int
    entity_avg: float
    matched_words: int
    effective_words: int
    rate_word_ent: float

    def format(self) -> str:
        return "\n".join(
            [
                f"sentences {self.sentences}",
                f"entities {self.entities}",
                f"entity_avg {self.entity_avg:.4f}",
                f"matched_words {self.matched_words}",
                f"effective_words {self.effective_words}",
                f"rate_word_ent {self.rate_word_ent:.2f}",
                "# rate_word_ent counts matched words whose span equals or sits strictly",
                "# inside a gold entity (Match or Cover), per 100 gold entities.",
            ]
        )


def corpus_stats(corpus: Corpus, trie: LexiconTrie) -> CorpusStats:
    """Sentence count, entities per sentence, and lexicon coverage of entities."""
    n_sent = len(corpus.sentences)
    n_ent = 0
    n_matched = 0
    n_effective = 0
    for sent in corpus.sentences:
        spans = tags_to_spans(sent.tags, corpus.scheme)
        n_ent += len(spans)
        words, _ = match_sentence(trie, sent.chars)
        n_matched += len(words)
        labels = label_lec(words, spans)
        n_effective += sum(1 for lab in labels if lab in (MATCH, COVER))
    entity_avg = n_ent / n_sent if n_sent else 0.0
    rate = 100.0 * n_effective / n_ent if n_ent else 0.0
    return CorpusStats(n_sent, n_ent, entity_avg, n_matched, n_effective, rate)


def allowed_transitions(tagset: Sequence[str], scheme: str = "bio") -> np.ndarray:
    """Boolean (K+2, K+2) matrix of well-formed tag bigrams for constrained decoding."""
    k = len(tagset)
    start, stop = k, k + 1
    allowed = np.zeros((k + 2, k + 2), dtype=bool)

    def parse(tag: str) -> tuple[str, str]:
        prefix, _, etype = tag.partition("-")
        return prefix, etype

    for i, a in enumerate(tagset):
        pa, ta = parse(a)
        # sequence boundaries
        if scheme == "bio":
            allowed[start, i] = pa in ("O", "B")
            allowed[i, stop] = True
        else:
            allowed[start, i] = pa in ("O", "B", "S")
            allowed[i, stop] = pa in ("O", "E", "S")
        for j, b in enumerate(tagset):
            pb, tb = parse(b)
            if scheme == "bio":
                ok = pb in ("O", "B") or (pb == "I" and pa in ("B", "I") and ta == tb)
            else:
                if pa in ("B", "M"):
                    ok = pb in ("M", "E") and ta == tb
                else:  # O, E, S may be followed by any opener
                    ok = pb in ("O", "B", "S")
            allowed[i, j] = ok
    return allowed
