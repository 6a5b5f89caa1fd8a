"""Loading, saving and indexing of dense word embeddings.

Vectors are kept exactly as read. Nothing here normalizes: subspace
debiasing is only sound on the raw vectors, and vector length carries
frequency information the association measures depend on.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import EmbeddingFormatError, MissingTokenError

FORMATS = ("word2vec-text", "glove-text")


@dataclass(frozen=True)
class Vocabulary:
    words: tuple[str, ...]
    index: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        words = tuple(self.words)
        object.__setattr__(self, "words", words)
        index: dict[str, int] = {}
        for i, w in enumerate(words):
            if not w:
                raise EmbeddingFormatError(f"empty token at row {i}")
            if w in index:
                raise EmbeddingFormatError(f"duplicate token {w!r} at rows {index[w]} and {i}")
            index[w] = i
        object.__setattr__(self, "index", index)

    def __len__(self) -> int:
        return len(self.words)

    def __contains__(self, token: object) -> bool:
        return token in self.index

    def __iter__(self):
        return iter(self.words)


@dataclass(frozen=True, eq=False)
class EmbeddingSet:
    """Vocabulary plus an ``(n, d)`` float64 matrix, one row per word.

    The matrix is marked read-only so rows handed out by :func:`lookup`
    cannot be modified in place.
    """

    vocab: Vocabulary
    matrix: np.ndarray

    def __post_init__(self):
        if not isinstance(self.vocab, Vocabulary):
            object.__setattr__(self, "vocab", Vocabulary(tuple(self.vocab)))
        m = np.array(self.matrix, dtype=np.float64)
        if m.ndim != 2:
            raise EmbeddingFormatError(f"embedding matrix must be 2-D, got shape {m.shape}")
        if m.shape[0] != len(self.vocab):
            raise EmbeddingFormatError(
                f"dimension mismatch: {m.shape[0]} rows for {len(self.vocab)} tokens"
            )
        if m.shape[1] < 1:
            raise EmbeddingFormatError("embedding dimension must be >= 1")
        if not np.all(np.isfinite(m)):
            bad = int(np.argwhere(~np.isfinite(m))[0, 0])
            raise EmbeddingFormatError(f"non-finite value in vector for {self.vocab.words[bad]!r}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]

    def __len__(self) -> int:
        return len(self.vocab)

    def __contains__(self, token: object) -> bool:
        return token in self.vocab

    def __getitem__(self, token: str) -> np.ndarray:
        try:
            return self.matrix[self.vocab.index[token]]
        except KeyError:
            raise MissingTokenError(token) from None

    def vectors(self, tokens: Iterable[str]) -> np.ndarray:
        """Stack the rows for ``tokens``; raises naming the first missing one."""
        rows = []
        for t in tokens:
            if t not in self.vocab.index:
                raise MissingTokenError(t)
            rows.append(self.vocab.index[t])
        return self.matrix[rows]

    def with_matrix(self, matrix: np.ndarray) -> "EmbeddingSet":
        return EmbeddingSet(self.vocab, matrix)

    @classmethod
    def from_dict(cls, vectors: dict[str, Sequence[float]]) -> "EmbeddingSet":
        words = list(vectors)
        return cls(Vocabulary(tuple(words)), np.array([vectors[w] for w in words], dtype=float))


def lookup(emb: EmbeddingSet, token: str) -> np.ndarray | None:
    """Return the stored row for ``token`` (a read-only view) or ``None``."""
    i = emb.vocab.index.get(token)
    return None if i is None else emb.matrix[i]


def _parse_row(line: str, lineno: int, path) -> tuple[str, list[float]]:
    parts = line.split(" ")
    token, raw = parts[0], parts[1:]
    if not token:
        raise EmbeddingFormatError(f"{path}:{lineno}: empty token")
    try:
        values = [float(v) for v in raw]
    except ValueError as exc:
        raise EmbeddingFormatError(f"{path}:{lineno}: {exc}") from None
    if not all(math.isfinite(v) for v in values):
        raise EmbeddingFormatError(f"{path}:{lineno}: non-finite value for {token!r}")
    return token, values


def load_embeddings(path: str | Path, format: str = "word2vec-text") -> EmbeddingSet:
    """Read a word2vec or GloVe text file.

    ``word2vec-text`` requires an ``"<n> <d>"`` header; ``glove-text`` has
    none and takes ``d`` from the first row. Tokens are case-preserved and
    may not contain spaces.
    """
    if format not in FORMATS:
        raise ValueError(f"unknown embedding format {format!r}; expected one of {FORMATS}")
    path = Path(path)
    with path.open("r", encoding="utf-8") as fh:
        lines = [(i, ln.rstrip()) for i, ln in enumerate(fh, start=1)]
    lines = [(i, ln) for i, ln in lines if ln]
    if not lines:
        raise EmbeddingFormatError(f"{path}: empty file")

    expected_n = None
    dim = None
    if format == "word2vec-text":
        lineno, header = lines[0]
        fields = header.split()
        try:
            expected_n, dim = (int(x) for x in fields)
        except ValueError:
            raise EmbeddingFormatError(
                f"{path}:{lineno}: word2vec-text needs an '<n> <d>' header, got {header!r}"
            ) from None
        lines = lines[1:]
        if not lines and expected_n:
            raise EmbeddingFormatError(f"{path}: header promises {expected_n} rows, file has none")

    words: list[str] = []
    rows: list[list[float]] = []
    for lineno, line in lines:
        token, values = _parse_row(line, lineno, path)
        if dim is None:
            dim = len(values)
        if len(values) != dim:
            raise EmbeddingFormatError(
                f"{path}:{lineno}: dimension mismatch for {token!r}: {len(values)} values, expected {dim}"
            )
        words.append(token)
        rows.append(values)

    if expected_n is not None and expected_n != len(words):
        raise EmbeddingFormatError(f"{path}: header promises {expected_n} rows, found {len(words)}")
    if not words:
        raise EmbeddingFormatError(f"{path}: no vectors")
    return EmbeddingSet(Vocabulary(tuple(words)), np.array(rows, dtype=np.float64))


def save_embeddings(emb: EmbeddingSet, path: str | Path, format: str = "word2vec-text") -> None:
    # repr() of a float is the shortest string that round-trips exactly.
    if format not in FORMATS:
        raise ValueError(f"unknown embedding format {format!r}; expected one of {FORMATS}")
    with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
        if format == "word2vec-text":
            fh.write(f"{len(emb)} {emb.dim}\n")
        for word, row in zip(emb.vocab.words, emb.matrix.tolist()):
            fh.write(word + " " + " ".join(map(repr, row)) + "\n")
