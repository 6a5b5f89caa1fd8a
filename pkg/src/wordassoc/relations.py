"""Relation vectors and bias subspaces built from ordered word pairs."""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .embedding_store import EmbeddingSet
from .errors import DegenerateError, MissingTokenError, WordAssocError

# Gender-defining pairs, female word first, so positive RIPA reads "female".
GENDER_DEFINING_PAIRS = (
    ("woman", "man"),
    ("girl", "boy"),
    ("she", "he"),
    ("mother", "father"),
    ("daughter", "son"),
    ("gal", "guy"),
    ("female", "male"),
    ("her", "his"),
    ("herself", "himself"),
    ("mary", "john"),
)


@dataclass(frozen=True)
class WordPairSet:
    pairs: tuple[tuple[str, str], ...]

    def __post_init__(self):
        pairs = tuple((str(x), str(y)) for x, y in self.pairs)
        if not pairs:
            raise WordAssocError("word pair set must be non-empty")
        for x, y in pairs:
            if x == y:
                raise WordAssocError(f"pair ({x!r}, {y!r}) has identical members")
        object.__setattr__(self, "pairs", pairs)

    def __iter__(self):
        return iter(self.pairs)

    def __len__(self) -> int:
        return len(self.pairs)

    def words(self) -> set[str]:
        return {t for p in self.pairs for t in p}

    def check_vocabulary(self, emb: EmbeddingSet) -> None:
        for x, y in self.pairs:
            for t in (x, y):
                if t not in emb:
                    raise MissingTokenError(t)


def load_pairs(path: str | Path) -> WordPairSet:
    """Read ``x<TAB>y`` lines; ``#`` starts a comment, blank lines are skipped."""
    pairs = []
    with Path(path).open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            fields = line.split("\t")
            if len(fields) != 2:
                raise WordAssocError(f"{path}:{lineno}: expected 'x<TAB>y', got {line!r}")
            pairs.append((fields[0].strip(), fields[1].strip()))
    return WordPairSet(tuple(pairs))


@dataclass(frozen=True, eq=False)
class RelationVector:
    direction: np.ndarray

    def __post_init__(self):
        v = np.array(self.direction, dtype=np.float64).reshape(-1)
        if abs(np.linalg.norm(v) - 1.0) > 1e-12:
            raise WordAssocError(f"relation vector must be unit norm, got {np.linalg.norm(v)!r}")
        v.setflags(write=False)
        object.__setattr__(self, "direction", v)

    @property
    def dim(self) -> int:
        return self.direction.shape[0]

    def as_subspace(self) -> "BiasSubspace":
        return BiasSubspace(self.direction[None, :])


@dataclass(frozen=True, eq=False)
class BiasSubspace:
    """Orthonormal basis stored as the rows of a ``(rank, d)`` array."""

    basis: np.ndarray

    def __post_init__(self):
        q = np.array(self.basis, dtype=np.float64)
        if q.ndim != 2 or q.shape[0] < 1:
            raise WordAssocError("bias subspace needs at least one basis vector")
        if q.shape[0] > q.shape[1]:
            raise WordAssocError(f"rank {q.shape[0]} exceeds dimension {q.shape[1]}")
        gram = q @ q.T
        if np.max(np.abs(np.diag(gram) - 1.0)) > 1e-12:
            raise WordAssocError("bias subspace basis vectors must be unit norm")
        off = gram - np.diag(np.diag(gram))
        if off.size and np.max(np.abs(off)) > 1e-10:
            raise WordAssocError("bias subspace basis vectors must be mutually orthogonal")
        q.setflags(write=False)
        object.__setattr__(self, "basis", q)

    @property
    def rank(self) -> int:
        return self.basis.shape[0]

    @property
    def dim(self) -> int:
        return self.basis.shape[1]


def difference_vectors(emb: EmbeddingSet, pairs: WordPairSet) -> np.ndarray:
    """Rows ``x - y`` for each ``(x, y)`` in order."""
    xs = emb.vectors(x for x, _ in pairs)
    ys = emb.vectors(y for _, y in pairs)
    return xs - ys


def first_principal_component(vectors: Sequence[Sequence[float]] | np.ndarray) -> RelationVector:
    """Top right-singular vector of the stacked, *uncentered* input.

    The sign is chosen so the direction has a non-negative inner product
    with the mean input vector. Raises :class:`DegenerateError` when the
    input is all zeros or the top two singular values agree to a relative
    1e-9, since the direction is then not determined.
    """
    a = np.atleast_2d(np.asarray(vectors, dtype=np.float64))
    if a.size == 0 or not np.any(a):
        raise DegenerateError("first principal component of all-zero vectors is undefined")
    _, s, vt = np.linalg.svd(a, full_matrices=False)
    if s.shape[0] > 1 and s[0] - s[1] <= 1e-9 * s[0]:
        raise DegenerateError("ambiguous principal direction: top singular values tie")
    v = vt[0]
    ref = a.mean(axis=0) @ v
    if ref < 0 or (ref == 0 and v[np.argmax(np.abs(v))] < 0):
        v = -v
    return RelationVector(v / np.linalg.norm(v))


def span_basis(vectors: Sequence[Sequence[float]] | np.ndarray, tol: float = 1e-8) -> BiasSubspace:
    """Orthonormal basis for the span of ``vectors``.

    Gram-Schmidt in input order with a second re-orthogonalization pass, so
    the first basis vector is always parallel to the first independent input.
    A vector whose residual norm falls below ``tol * max input norm`` is
    treated as dependent and dropped.
    """
    a = np.atleast_2d(np.asarray(vectors, dtype=np.float64))
    if a.shape[0] == 0:
        raise WordAssocError("span_basis needs at least one vector")
    scale = np.max(np.linalg.norm(a, axis=1))
    if scale == 0:
        raise DegenerateError("all vectors are zero; span is trivial")
    cutoff = tol * scale
    basis: list[np.ndarray] = []
    for v in a:
        r = v.copy()
        for _ in range(2):
            for q in basis:
                r -= (q @ r) * q
        norm = np.linalg.norm(r)
        if norm >= cutoff:
            basis.append(r / norm)
    if not basis:
        raise DegenerateError("all vectors fall below the rank tolerance")
    return BiasSubspace(np.array(basis))


def _check_dim(w: np.ndarray, d: int) -> None:
    if w.shape[-1] != d:
        raise WordAssocError(f"dimension mismatch: vector has {w.shape[-1]}, expected {d}")


def project_onto(w: np.ndarray, subspace: BiasSubspace) -> np.ndarray:
    """Orthogonal projection onto the subspace. Works row-wise on 2-D input."""
    w = np.asarray(w, dtype=np.float64)
    _check_dim(w, subspace.dim)
    q = subspace.basis
    return (w @ q.T) @ q


def scalar_projection(w: np.ndarray, b: RelationVector) -> float | np.ndarray:
    w = np.asarray(w, dtype=np.float64)
    _check_dim(w, b.dim)
    out = w @ b.direction
    return float(out) if np.ndim(out) == 0 else out


def relation_vector(emb: EmbeddingSet, pairs: WordPairSet | Iterable[tuple[str, str]]) -> RelationVector:
    """PC1 of the pair difference vectors in ``emb``."""
    if not isinstance(pairs, WordPairSet):
        pairs = WordPairSet(tuple(pairs))
    return first_principal_component(difference_vectors(emb, pairs))


def bias_subspace(emb: EmbeddingSet, pairs: WordPairSet, tol: float = 1e-8) -> BiasSubspace:
    return span_basis(difference_vectors(emb, pairs), tol=tol)
