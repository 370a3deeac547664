"""Token vocabulary and skip-gram node embeddings.

Embeddings are trained with gensim's skip-gram (negative sampling, single worker) over
node-label sequences and then re-indexed into our own :class:`Vocabulary`, whose index 0
is the all-zero unknown row.
"""

from __future__ import annotations

import io
import logging
import struct
import zlib
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from gensim.models import Word2Vec
from gensim.models.callbacks import CallbackAny2Vec

from simast_review.errors import ConfigError, ReviewDataError
from simast_review.nn.tensor import Array


logger = logging.getLogger(__name__)

UNKNOWN_TOKEN = "<unk>"
MAGIC = b"SIMASTEM"


@dataclass(frozen=True)
class Vocabulary:
    """Token list in first-occurrence order with the unknown token at index 0."""

    tokens: tuple[str, ...]
    _index: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not self.tokens or self.tokens[0] != UNKNOWN_TOKEN:
            raise ReviewDataError("vocabulary must start with the unknown token")
        index = {token: position for position, token in enumerate(self.tokens)}
        if len(index) != len(self.tokens):
            raise ReviewDataError("vocabulary contains duplicate tokens")
        object.__setattr__(self, "_index", index)

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, token: object) -> bool:
        return token in self._index

    def index_of(self, token: str) -> int:
        return self._index.get(token, 0)

    def indices(self, labels: Sequence[str]) -> np.ndarray:
        return np.fromiter((self.index_of(label) for label in labels), dtype=np.intp, count=len(labels))


def build_vocab(corpus: Iterable[Sequence[str]]) -> Vocabulary:
    """Vocabulary over every label in first-occurrence order, behind the unknown token."""
    seen: dict[str, None] = {}
    sequences = 0
    for sequence in corpus:
        sequences += 1
        for token in sequence:
            if token != UNKNOWN_TOKEN:
                seen.setdefault(token, None)
    if not sequences or not seen:
        raise ReviewDataError("cannot build a vocabulary from an empty corpus")
    vocab = Vocabulary((UNKNOWN_TOKEN, *seen))
    logger.info("Built vocabulary of %d tokens from %d sequences", len(vocab), sequences)
    return vocab


@dataclass(frozen=True, eq=False)
class EmbeddingTable:
    """Vectors aligned with a vocabulary, plus the per-epoch skip-gram loss when trained."""

    vocab: Vocabulary
    vectors: Array
    loss_history: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if self.vectors.ndim != 2 or self.vectors.shape[0] != len(self.vocab):
            raise ReviewDataError(
                f"embedding matrix {self.vectors.shape} does not match vocabulary of {len(self.vocab)}"
            )
        if not np.all(np.isfinite(self.vectors)):
            raise ReviewDataError("embedding matrix contains non-finite values")
        self.vectors.flags.writeable = False

    @property
    def dim(self) -> int:
        return int(self.vectors.shape[1])

    def lookup(self, labels: Sequence[str]) -> Array:
        return lookup(labels, self.vocab, self.vectors)


def lookup(labels: Sequence[str], vocab: Vocabulary, vectors: Array) -> Array:
    """Stack the rows for ``labels``; unknown labels take row 0."""
    return np.array(vectors[vocab.indices(labels)], dtype=np.float64).reshape(
        len(labels), vectors.shape[1]
    )


def _stable_hash(text: str) -> int:
    return zlib.crc32(text.encode("utf-8"))


class _EpochLoss(CallbackAny2Vec):  # type: ignore[misc]
    """Record per-epoch loss from gensim's running total."""

    def __init__(self) -> None:
        self.previous = 0.0
        self.losses: list[float] = []

    def on_epoch_end(self, model: Word2Vec) -> None:
        total = float(model.get_latest_training_loss())
        self.losses.append(total - self.previous)
        self.previous = total
        logger.debug("Skip-gram epoch %d loss %.4f", len(self.losses), self.losses[-1])


def train_skipgram(
    corpus: Sequence[Sequence[str]],
    dim: int = 300,
    window: int = 5,
    negatives: int = 5,
    epochs: int = 5,
    seed: int = 0,
    vocab: Vocabulary | None = None,
) -> EmbeddingTable:
    """Train skip-gram vectors over label sequences.

    Deterministic for a given seed: one worker thread and a process-independent hash for
    vector initialisation.
    """
    if dim <= 0:
        raise ConfigError(f"embedding dim must be positive, got {dim}")
    if window <= 0:
        raise ConfigError(f"skip-gram window must be positive, got {window}")
    if negatives <= 0 or epochs < 0:
        raise ConfigError(f"invalid skip-gram settings: negatives={negatives}, epochs={epochs}")
    vocab = vocab if vocab is not None else build_vocab(corpus)
    sentences = [list(sequence) for sequence in corpus if sequence]

    recorder = _EpochLoss()
    model = Word2Vec(
        vector_size=dim,
        window=window,
        min_count=1,
        sg=1,
        hs=0,
        negative=negatives,
        workers=1,
        seed=seed,
        hashfxn=_stable_hash,
        compute_loss=True,
    )
    model.build_vocab(sentences)
    if epochs:
        model.train(
            sentences,
            total_examples=model.corpus_count,
            epochs=epochs,
            compute_loss=True,
            callbacks=[recorder],
        )

    vectors = np.zeros((len(vocab), dim), dtype=np.float64)
    for position, token in enumerate(vocab.tokens[1:], start=1):
        if token in model.wv.key_to_index:
            vectors[position] = model.wv[token]
    logger.info("Trained %d-dimensional embeddings for %d tokens", dim, len(vocab))
    return EmbeddingTable(vocab, vectors, tuple(recorder.losses))


def save_embeddings(path: str | Path, table: EmbeddingTable) -> None:
    """Write ``magic | u32 |V| | u32 m | float64 rows | |V| x (u32 n + UTF-8 token)``."""
    buffer = io.BytesIO()
    buffer.write(MAGIC)
    buffer.write(struct.pack("<II", len(table.vocab), table.dim))
    buffer.write(np.ascontiguousarray(table.vectors, dtype="<f8").tobytes(order="C"))
    for token in table.vocab.tokens:
        encoded = token.encode("utf-8")
        buffer.write(struct.pack("<I", len(encoded)))
        buffer.write(encoded)
    Path(path).write_bytes(buffer.getvalue())
    logger.info("Saved embeddings (%d x %d) to %s", len(table.vocab), table.dim, path)


def load_embeddings(path: str | Path) -> EmbeddingTable:
    raw = Path(path).read_bytes()
    header = len(MAGIC) + 8
    if raw[: len(MAGIC)] != MAGIC or len(raw) < header:
        raise ReviewDataError(f"{path} is not an embedding file")
    size, dim = struct.unpack_from("<II", raw, len(MAGIC))
    offset = header + size * dim * 8
    if len(raw) < offset:
        raise ReviewDataError(f"{path} is truncated")
    vectors = np.frombuffer(raw, dtype="<f8", count=size * dim, offset=header)
    tokens: list[str] = []
    for _ in range(size):
        if len(raw) < offset + 4:
            raise ReviewDataError(f"{path} is truncated")
        (length,) = struct.unpack_from("<I", raw, offset)
        offset += 4
        try:
            tokens.append(raw[offset : offset + length].decode("utf-8"))
        except UnicodeDecodeError as exc:
            raise ReviewDataError(f"{path}: token {len(tokens)} is not valid UTF-8") from exc
        offset += length
    return EmbeddingTable(
        Vocabulary(tuple(tokens)), vectors.astype(np.float64).reshape(size, dim)
    )
