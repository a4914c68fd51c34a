"""End-to-end model: parameter registry, forward pass, losses, checkpoints.

A sentence flows through: initial node states (embeddings + positions), the
stacked fusion layers, then the CRF head on character states for tagging and
a 3-way linear head on word states for the word-property auxiliary task.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import crf, fusion
from .autograd import Tensor, dropout, logsumexp
from .data import Corpus, make_tagset, tags_to_spans
from .encoding import EmbeddingTable, PositionCodec, WordProjection, initial_states
from .graph import LatticeGraph, build_graph, graph_variant
from .matching import LexiconTrie, MatchedWord, label_lec, match_sentence

CHECKPOINT_MAGIC = b"LEXNERCKPT1\n"


@dataclass
class ModelDims:
    d_c: int = 300
    d_w: int = 200
    d_ff: int = 0  # 0 means 4 * d_c
    heads: int = 8
    layers: int = 2
    max_sentence_len: int = 512

    def __post_init__(self) -> None:
        if self.d_ff == 0:
            self.d_ff = 4 * self.d_c
        if self.d_c % 2 or self.d_w % 2:
            raise ValueError("embedding dimensions must be even for position encodings")
        if self.d_c % self.heads:
            raise ValueError(f"d_c={self.d_c} not divisible by heads={self.heads}")


class ModelParams:
    """All learnable tensors, each registered exactly once under a unique name."""

    def __init__(
        self,
        dims: ModelDims,
        char_table: EmbeddingTable,
        word_table: EmbeddingTable,
        projection: WordProjection,
        layers: list[fusion.FusionLayerParams],
        crf_params: crf.CrfParams,
        lec_weight: Tensor,
        lec_bias: Tensor,
        tagset: list[str],
        scheme: str,
    ):
        self.dims = dims
        self.char_table = char_table
        self.word_table = word_table
        self.projection = projection
        self.layers = layers
        self.crf = crf_params
        self.lec_weight = lec_weight
        self.lec_bias = lec_bias
        self.tagset = tagset
        self.scheme = scheme
        # position tables are fixed, not learned
        self.char_codec = PositionCodec(dims.max_sentence_len, dims.d_c, dtype=self.dtype)
        self.word_codec = PositionCodec(2 * dims.max_sentence_len, dims.d_w, dtype=self.dtype)

    @property
    def dtype(self):
        return self.char_table.rows.data.dtype

    @classmethod
    def build(
        cls,
        dims: ModelDims,
        char_vocab: Sequence[str],
        word_vocab: Sequence[str],
        entity_types: Sequence[str],
        rng: np.random.Generator,
        scheme: str = "bio",
        dtype=np.float32,
        char_table: EmbeddingTable | None = None,
        word_table: EmbeddingTable | None = None,
    ) -> "ModelParams":
        tagset = make_tagset(entity_types, scheme)
        if char_table is None:
            char_table = EmbeddingTable.random(char_vocab, dims.d_c, rng, dtype=dtype)
        if word_table is None:
            word_table = EmbeddingTable.random(word_vocab, dims.d_w, rng, dtype=dtype)
        projection = WordProjection.init(dims.d_w, dims.d_c, rng, dtype=dtype)
        layers = [
            fusion.FusionLayerParams.init(dims.d_c, dims.d_ff, dims.heads, rng, dtype=dtype)
            for _ in range(dims.layers)
        ]
        crf_params = crf.CrfParams.init(dims.d_c, len(tagset), rng, dtype=dtype)
        limit = np.sqrt(6.0 / (dims.d_c + 3))
        lec_weight = Tensor(rng.uniform(-limit, limit, size=(dims.d_c, 3)).astype(dtype))
        lec_bias = Tensor(np.zeros(3, dtype=dtype))
        return cls(
            dims, char_table, word_table, projection, layers, crf_params,
            lec_weight, lec_bias, tagset, scheme,
        )

    def parameters(self) -> dict[str, Tensor]:
        named: dict[str, Tensor] = {
            "char_embeddings": self.char_table.rows,
            "word_embeddings": self.word_table.rows,
        }
        named.update(self.projection.named("projection"))
        for l, layer in enumerate(self.layers):
            named.update(layer.named(f"layer{l}"))
        named.update(self.crf.named("crf"))
        named["lec.weight"] = self.lec_weight
        named["lec.bias"] = self.lec_bias
        return named

    def zero_grads(self) -> None:
        for t in self.parameters().values():
            t.grad = None

    # -- checkpoint format: magic, u64 header length, JSON header, raw f32 LE --

    def save(self, path: str | Path) -> None:
        params = self.parameters()
        manifest = [
            {"name": name, "shape": list(t.data.shape)} for name, t in params.items()
        ]
        header = {
            "dims": {
                "d_c": self.dims.d_c,
                "d_w": self.dims.d_w,
                "d_ff": self.dims.d_ff,
                "heads": self.dims.heads,
                "layers": self.dims.layers,
                "max_sentence_len": self.dims.max_sentence_len,
            },
            "char_vocab": self.char_table.tokens,
            "word_vocab": self.word_table.tokens,
            "tagset": self.tagset,
            "scheme": self.scheme,
            "tensors": manifest,
        }
        blob = json.dumps(header, ensure_ascii=False).encode("utf-8")
        with open(path, "wb") as fh:
            fh.write(CHECKPOINT_MAGIC)
            fh.write(struct.pack("<Q", len(blob)))
            fh.write(blob)
            for t in params.values():
                fh.write(t.data.astype("<f4").tobytes())

    @classmethod
    def load(cls, path: str | Path, dtype=np.float32) -> "ModelParams":
        with open(path, "rb") as fh:
            magic = fh.read(len(CHECKPOINT_MAGIC))
            if magic != CHECKPOINT_MAGIC:
                raise ValueError(f"{path}: not a model checkpoint")
            (hlen,) = struct.unpack("<Q", fh.read(8))
            header = json.loads(fh.read(hlen).decode("utf-8"))
            dims = ModelDims(**header["dims"])
            entity_types = sorted(
                {t.partition("-")[2] for t in header["tagset"] if t != "O"}
            )
            model = cls.build(
                dims,
                header["char_vocab"],
                header["word_vocab"],
                entity_types,
                np.random.default_rng(0),
                scheme=header["scheme"],
                dtype=dtype,
            )
            model.tagset = header["tagset"]
            params = model.parameters()
            for entry in header["tensors"]:
                shape = tuple(entry["shape"])
                count = int(np.prod(shape)) if shape else 1
                raw = fh.read(4 * count)
                arr = np.frombuffer(raw, dtype="<f4").reshape(shape).astype(dtype)
                tensor = params[entry["name"]]
                if tensor.data.shape != shape:
                    raise ValueError(
                        f"{path}: tensor {entry['name']} has shape {shape}, "
                        f"expected {tensor.data.shape}"
                    )
                tensor.data = arr
        return model


@dataclass
class EncodedSentence:
    """A sentence with everything the forward pass needs precomputed."""

    chars: list[str]
    words: list[MatchedWord]
    graph: LatticeGraph
    tags: np.ndarray | None = None           # gold label ids, length n
    lec_labels: np.ndarray | None = None      # gold word properties, length m
    gold_spans: list[tuple[int, int, str]] = field(default_factory=list)


def prepare_sentence(
    chars: Sequence[str],
    trie: LexiconTrie,
    tagset: Sequence[str] | None = None,
    gold_tags: Sequence[str] | None = None,
    scheme: str = "bio",
    variant: str = "standard",
) -> EncodedSentence:
    words, _ = match_sentence(trie, chars)
    graph = build_graph(len(chars), words)
    if variant != "standard":
        graph = graph_variant(graph, variant)
    tags = None
    lec = None
    spans: list[tuple[int, int, str]] = []
    if gold_tags is not None:
        if tagset is None:
            raise ValueError("tagset required when gold tags are given")
        tag_ids = {t: i for i, t in enumerate(tagset)}
        try:
            tags = np.array([tag_ids[t] for t in gold_tags], dtype=np.int64)
        except KeyError as exc:
            raise ValueError(f"tag {exc.args[0]!r} not in tagset") from None
        spans = tags_to_spans(gold_tags, scheme)
        lec = np.array(label_lec(words, spans), dtype=np.int64)
    return EncodedSentence(list(chars), words, graph, tags, lec, spans)


def prepare_corpus(
    corpus: Corpus,
    trie: LexiconTrie,
    tagset: Sequence[str],
    variant: str = "standard",
) -> list[EncodedSentence]:
    return [
        prepare_sentence(s.chars, trie, tagset, s.tags, corpus.scheme, variant)
        for s in corpus.sentences
    ]


def forward_states(
    model: ModelParams,
    sent: EncodedSentence,
    embed_dropout: float = 0.0,
    fusion_dropout: float = 0.0,
    rng: np.random.Generator | None = None,
    multiplicative_mask: bool = False,
) -> tuple[Tensor, Tensor]:
    """Final node states (H_c, H_w) after the fusion stack."""
    h_c, h_w = initial_states(
        sent.chars, sent.words, model.char_table, model.word_table,
        model.projection, model.char_codec, model.word_codec,
    )
    h_c = dropout(h_c, embed_dropout, rng)
    if sent.words:
        h_w = dropout(h_w, embed_dropout, rng)
    return fusion.encode(
        sent.graph, h_c, h_w, model.layers, model.dims.heads,
        fusion_dropout, rng, multiplicative_mask,
    )


def lec_loss(h_w: Tensor, model: ModelParams, gold_properties: np.ndarray) -> Tensor:
    """Mean cross-entropy of the 3-way word-property head; 0 for empty word sets."""
    m = h_w.data.shape[0]
    if m == 0:
        return Tensor(np.asarray(0.0, dtype=model.dtype))
    if gold_properties.shape != (m,):
        raise ValueError(f"expected {m} word property labels, got {gold_properties.shape}")
    logits = h_w @ model.lec_weight + model.lec_bias
    per_word = logsumexp(logits, axis=1) - logits[np.arange(m), gold_properties]
    return per_word.mean()


def sentence_losses(
    model: ModelParams,
    sent: EncodedSentence,
    embed_dropout: float = 0.0,
    fusion_dropout: float = 0.0,
    rng: np.random.Generator | None = None,
    multiplicative_mask: bool = False,
) -> tuple[Tensor, Tensor]:
    """(tagging NLL, word-property cross-entropy) for one gold-labeled sentence."""
    if sent.tags is None:
        raise ValueError("sentence has no gold tags")
    h_c, h_w = forward_states(
        model, sent, embed_dropout, fusion_dropout, rng, multiplicative_mask
    )
    emissions = crf.emission_scores(h_c, model.crf)
    l_ner = crf.nll_loss(emissions, model.crf.transitions, sent.tags)
    l_lec = lec_loss(h_w, model, sent.lec_labels)
    return l_ner, l_lec


def decode_tags(
    model: ModelParams,
    sent: EncodedSentence,
    allowed: np.ndarray | None = None,
    multiplicative_mask: bool = False,
) -> list[str]:
    """Viterbi-decoded tag strings for one sentence (no dropout)."""
    h_c, _ = forward_states(model, sent, multiplicative_mask=multiplicative_mask)
    emissions = crf.emission_scores(h_c, model.crf)
    ids = crf.viterbi_decode(emissions.data, model.crf.transitions.data, allowed)
    return [model.tagset[i] for i in ids]


def predict_lec(
    model: ModelParams, sent: EncodedSentence, multiplicative_mask: bool = False
) -> np.ndarray:
    """Most likely word-property label per matched word."""
    _, h_w = forward_states(model, sent, multiplicative_mask=multiplicative_mask)
    if h_w.data.shape[0] == 0:
        return np.zeros(0, dtype=np.int64)
    logits = h_w.data @ model.lec_weight.data + model.lec_bias.data
    return logits.argmax(axis=1)
