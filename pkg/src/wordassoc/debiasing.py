"""Subspace-projection debiasing with protected words."""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .embedding_store import EmbeddingSet
from .errors import WordAssocError
from .relations import (
    BiasSubspace,
    WordPairSet,
    difference_vectors,
    first_principal_component,
    project_onto,
    span_basis,
)

SUBSPACE_MODES = ("span", "pc1")
SELECTORS = ("none", "list", "unsupervised")


@dataclass(frozen=True)
class DebiasConfig:
    """What to remove and what to leave alone.

    ``appropriate_pairs`` define the bias subspace (and ``b*`` for the
    unsupervised selector); ``biased_pairs`` define ``b'``. Protected
    words are always kept; the unsupervised selector adds to them.
    """

    appropriate_pairs: WordPairSet
    subspace_mode: str = "span"
    protected: frozenset[str] = field(default_factory=frozenset)
    selector: str = "none"
    biased_pairs: WordPairSet | None = None
    tol: float = 1e-8

    def __post_init__(self):
        object.__setattr__(self, "protected", frozenset(self.protected))
        if self.subspace_mode not in SUBSPACE_MODES:
            raise WordAssocError(f"subspace_mode must be one of {SUBSPACE_MODES}")
        if self.selector not in SELECTORS:
            raise WordAssocError(f"selector must be one of {SELECTORS}")
        if self.selector == "unsupervised" and self.biased_pairs is None:
            raise WordAssocError("the unsupervised selector needs biased_pairs")
        if self.selector == "list" and not self.protected:
            raise WordAssocError("selector 'list' needs a non-empty protected word list")


@dataclass(frozen=True)
class DebiasResult:
    embeddings: EmbeddingSet
    subspace: BiasSubspace
    protected: frozenset[str]
    debiased: tuple[str, ...]
    max_residual: float


def debias_word(w: np.ndarray, subspace: BiasSubspace) -> np.ndarray:
    """``w`` minus its projection on ``subspace`` (row-wise for 2-D input)."""
    w = np.asarray(w, dtype=np.float64)
    return w - project_onto(w, subspace)


def build_subspace(emb: EmbeddingSet, cfg: DebiasConfig) -> BiasSubspace:
    diffs = difference_vectors(emb, cfg.appropriate_pairs)
    if cfg.subspace_mode == "pc1":
        return first_principal_component(diffs).as_subspace()
    return span_basis(diffs, tol=cfg.tol)


def select_appropriate(emb: EmbeddingSet, cfg: DebiasConfig) -> frozenset[str]:
    """Words to protect: ``|<w, b*>| >= |<w, b'>|`` (ties protect).

    ``b*`` and ``b'`` are the first principal components of the appropriate
    and biased pair differences.
    """
    if cfg.biased_pairs is None:
        raise WordAssocError("select_appropriate needs biased_pairs")
    b_star = first_principal_component(difference_vectors(emb, cfg.appropriate_pairs))
    b_prime = first_principal_component(difference_vectors(emb, cfg.biased_pairs))
    keep = protect_mask(emb.matrix @ b_star.direction, emb.matrix @ b_prime.direction)
    return frozenset(w for w, k in zip(emb.vocab.words, keep) if k)


def protect_mask(beta_star: np.ndarray, beta_prime: np.ndarray) -> np.ndarray:
    return np.abs(beta_star) >= np.abs(beta_prime)


def debias_embedding(emb: EmbeddingSet, cfg: DebiasConfig) -> DebiasResult:
    """Debias every word that is neither protected nor part of a defining pair.

    Untouched rows are copied bit-for-bit. ``max_residual`` is the largest
    ``|<w_d, x - y>| / (||w|| ||x - y||)`` over debiased words and pairs.
    """
    cfg.appropriate_pairs.check_vocabulary(emb)
    subspace = build_subspace(emb, cfg)
    protected = set(cfg.protected)
    if cfg.selector == "unsupervised":
        protected |= select_appropriate(emb, cfg)
    skip = protected | cfg.appropriate_pairs.words()
    rows = np.array([i for i, w in enumerate(emb.vocab.words) if w not in skip], dtype=np.intp)

    matrix = emb.matrix.copy()
    if rows.size:
        matrix[rows] = debias_word(emb.matrix[rows], subspace)
    out = emb.with_matrix(matrix)
    return DebiasResult(
        out,
        subspace,
        frozenset(w for w in protected if w in emb),
        tuple(emb.vocab.words[i] for i in rows),
        orthogonality_residual(emb, out, rows, cfg.appropriate_pairs),
    )


def orthogonality_residual(
    before: EmbeddingSet, after: EmbeddingSet, rows: np.ndarray, pairs: WordPairSet
) -> float:
    if rows.size == 0:
        return 0.0
    diffs = difference_vectors(before, pairs)
    dn = np.linalg.norm(diffs, axis=1)
    wn = np.linalg.norm(before.matrix[rows], axis=1)
    inner = np.abs(after.matrix[rows] @ diffs.T)
    scale = np.outer(wn, dn)
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(scale > 0, inner / np.where(scale > 0, scale, 1), 0.0)
    return float(ratio.max())


def load_word_list(path: str | Path) -> list[str]:
    words = []
    with Path(path).open(encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line and not line.startswith("#"):
                words.append(line)
    return words
