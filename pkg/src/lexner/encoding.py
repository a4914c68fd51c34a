"""Initial node states: embeddings plus absolute/relative position encodings.

Characters get their embedding plus the sinusoidal encoding of their absolute
position. Words get their embedding plus a learned nonlinear combination of
the encodings of head, tail, tail-head and tail+head, then a two-layer
projection onto the character dimension so both sources share one space.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import numpy as np

from .autograd import Tensor, concat
from .matching import MatchedWord


def encode_position(pos: int, dim: int) -> np.ndarray:
    """Sinusoidal position vector: sin at even slots, cos at odd slots.

    Slots 2k and 2k+1 share the frequency 1/10000^(2k/dim).
    """
    if pos < 0:
        raise ValueError("position must be non-negative")
    if dim <= 0 or dim % 2 != 0:
        raise ValueError("encoding dimension must be a positive even number")
    out = np.empty(dim, dtype=np.float64)
    for k in range(dim // 2):
        angle = pos / (10000.0 ** (2 * k / dim))
        out[2 * k] = np.sin(angle)
        out[2 * k + 1] = np.cos(angle)
    return out


class PositionCodec:
    """Precomputed sinusoidal encodings for positions 0..max_position."""

    def __init__(self, max_position: int, dim: int, dtype=np.float64):
        if dim <= 0 or dim % 2 != 0:
            raise ValueError("encoding dimension must be a positive even number")
        self.max_position = max_position
        self.dim = dim
        pos = np.arange(max_position + 1, dtype=np.float64).reshape(-1, 1)
        k2 = np.arange(0, dim, 2, dtype=np.float64)
        div = np.power(10000.0, k2 / dim)
        table = np.empty((max_position + 1, dim), dtype=np.float64)
        table[:, 0::2] = np.sin(pos / div)
        table[:, 1::2] = np.cos(pos / div)
        self.table = table.astype(dtype)

    def encode(self, pos: int) -> np.ndarray:
        if not 0 <= pos <= self.max_position:
            raise ValueError(f"position {pos} outside codec range 0..{self.max_position}")
        return self.table[pos]


class EmbeddingTable:
    """Token -> vector lookup with a trailing UNK row for unknown tokens."""

    def __init__(self, tokens: Sequence[str], matrix: np.ndarray):
        if matrix.shape[0] != len(tokens) + 1:
            raise ValueError("matrix must have one row per token plus an UNK row")
        self.tokens = list(tokens)
        self.index = {tok: i for i, tok in enumerate(self.tokens)}
        self.unk_id = len(self.tokens)
        self.rows = Tensor(matrix)

    @property
    def dim(self) -> int:
        return self.rows.data.shape[1]

    def lookup_index(self, token: str) -> int:
        return self.index.get(token, self.unk_id)

    def indices(self, tokens: Sequence[str]) -> np.ndarray:
        return np.array([self.lookup_index(t) for t in tokens], dtype=np.int64)

    @classmethod
    def random(
        cls,
        tokens: Sequence[str],
        dim: int,
        rng: np.random.Generator,
        scale: float = 0.1,
        dtype=np.float64,
    ) -> "EmbeddingTable":
        matrix = rng.uniform(-scale, scale, size=(len(tokens) + 1, dim)).astype(dtype)
        return cls(tokens, matrix)

    @classmethod
    def from_file(
        cls,
        path: str | Path,
        vocab: Sequence[str] | None = None,
        rng: np.random.Generator | None = None,
        scale: float = 0.1,
        dtype=np.float64,
    ) -> "EmbeddingTable":
        """Load `token v1 .. vd` lines; an optional `count dim` header is skipped.

        When ``vocab`` is given, the table covers exactly those tokens and
        tokens missing from the file are initialized uniformly in
        [-scale, scale] (requires ``rng``).
        """
        vectors: dict[str, np.ndarray] = {}
        dim: int | None = None
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        start = 0
        if lines:
            head = lines[0].split()
            if len(head) == 2 and all(p.isdigit() for p in head):
                start = 1
        for lineno, line in enumerate(lines[start:], start=start + 1):
            parts = line.rstrip().split(" ")
            if len(parts) < 2:
                if line.strip():
                    raise ValueError(f"{path}:{lineno}: malformed embedding line")
                continue
            token, values = parts[0], parts[1:]
            vec = np.array([float(v) for v in values], dtype=dtype)
            if dim is None:
                dim = vec.size
            elif vec.size != dim:
                raise ValueError(f"{path}:{lineno}: expected {dim} values, got {vec.size}")
            vectors[token] = vec
        if dim is None:
            raise ValueError(f"{path}: no embedding vectors found")
        tokens = list(vocab) if vocab is not None else list(vectors)
        matrix = np.zeros((len(tokens) + 1, dim), dtype=dtype)
        for i, tok in enumerate(tokens):
            if tok in vectors:
                matrix[i] = vectors[tok]
            else:
                if rng is None:
                    raise ValueError(f"token {tok!r} missing from {path} and no rng given")
                matrix[i] = rng.uniform(-scale, scale, size=dim).astype(dtype)
        return cls(tokens, matrix)


class WordProjection:
    """Relative-position mixer plus the two-layer map from d_w to d_c.

    All matrices act on row vectors: w_r combines the four stacked position
    encodings (4*d_w -> d_w), then tanh(v @ w1 + b1) @ w2 + b2 lands in d_c.
    """

    def __init__(self, w_r: Tensor, w1: Tensor, b1: Tensor, w2: Tensor, b2: Tensor):
        self.w_r = w_r
        self.w1 = w1
        self.b1 = b1
        self.w2 = w2
        self.b2 = b2

    @classmethod
    def init(
        cls, d_w: int, d_c: int, rng: np.random.Generator, dtype=np.float64
    ) -> "WordProjection":
        return cls(
            Tensor(_glorot(rng, 4 * d_w, d_w, dtype)),
            Tensor(_glorot(rng, d_w, d_c, dtype)),
            Tensor(np.zeros(d_c, dtype=dtype)),
            Tensor(_glorot(rng, d_c, d_c, dtype)),
            Tensor(np.zeros(d_c, dtype=dtype)),
        )

    def named(self, prefix: str) -> dict[str, Tensor]:
        return {
            f"{prefix}.w_r": self.w_r,
            f"{prefix}.w1": self.w1,
            f"{prefix}.b1": self.b1,
            f"{prefix}.w2": self.w2,
            f"{prefix}.b2": self.b2,
        }


def _glorot(rng: np.random.Generator, fan_in: int, fan_out: int, dtype) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out)).astype(dtype)


def relative_position_features(
    words: Sequence[MatchedWord], codec: PositionCodec
) -> np.ndarray:
    """Constant (m, 4*d_w) matrix of stacked head/tail/tail-head/tail+head encodings."""
    m = len(words)
    out = np.empty((m, 4 * codec.dim), dtype=codec.table.dtype)
    d = codec.dim
    for j, w in enumerate(words):
        out[j, 0:d] = codec.encode(w.head)
        out[j, d : 2 * d] = codec.encode(w.tail)
        out[j, 2 * d : 3 * d] = codec.encode(w.tail - w.head)
        out[j, 3 * d :] = codec.encode(w.tail + w.head)
    return out


def char_states(
    chars: Sequence[str], table: EmbeddingTable, codec: PositionCodec
) -> Tensor:
    """Initial character node states: embedding + absolute position encoding."""
    idx = table.indices(chars)
    positions = codec.table[: len(chars)]
    return table.rows[idx] + positions


def encode_char(
    char: str, position: int, table: EmbeddingTable, codec: PositionCodec
) -> Tensor:
    return table.rows[table.lookup_index(char)] + codec.encode(position)


def word_states(
    words: Sequence[MatchedWord],
    table: EmbeddingTable,
    proj: WordProjection,
    codec: PositionCodec,
) -> Tensor:
    """Initial word node states, projected to the character dimension.

    Two occurrences of one surface encode differently unless their spans
    coincide: the relative-position mix depends on (head, tail) only.
    """
    idx = table.indices([w.surface for w in words])
    p4 = relative_position_features(words, codec)
    rel = (p4 @ proj.w_r).relu()
    v = table.rows[idx] + rel
    return (v @ proj.w1 + proj.b1).tanh() @ proj.w2 + proj.b2


def encode_word(
    word: MatchedWord,
    table: EmbeddingTable,
    proj: WordProjection,
    codec: PositionCodec,
) -> Tensor:
    states = word_states([word], table, proj, codec)
    return states.reshape((states.data.shape[1],))


def initial_states(
    chars: Sequence[str],
    words: Sequence[MatchedWord],
    char_table: EmbeddingTable,
    word_table: EmbeddingTable,
    proj: WordProjection,
    char_codec: PositionCodec,
    word_codec: PositionCodec,
) -> tuple[Tensor, Tensor]:
    """Initial (H_c, H_w) node state matrices for one sentence."""
    h_c = char_states(chars, char_table, char_codec)
    if words:
        h_w = word_states(words, word_table, proj, word_codec)
    else:
        h_w = Tensor(np.zeros((0, char_table.dim), dtype=char_table.rows.data.dtype))
    return h_c, h_w
