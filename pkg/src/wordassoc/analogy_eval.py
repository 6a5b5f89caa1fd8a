"""Analogy strength and before/after preservation curves."""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .embedding_store import EmbeddingSet
from .errors import DegenerateError, WordAssocError
from .relations import RelationVector

LABELS = ("appropriate", "biased")
DEFAULT_THRESHOLDS = tuple(round(0.1 * i, 10) for i in range(21))
DEFAULT_TOL = 0.25


@dataclass(frozen=True)
class AnalogyQuad:
    """``a:b::x:y``, i.e. ``a + (y - x) = b``."""

    a: str
    b: str
    x: str
    y: str
    label: str

    def __post_init__(self):
        if len({self.a, self.b, self.x, self.y}) != 4:
            raise WordAssocError(f"analogy tokens must be distinct: {self.tokens}")
        if self.label not in LABELS:
            raise WordAssocError(f"analogy label must be one of {LABELS}, got {self.label!r}")

    @property
    def tokens(self) -> tuple[str, str, str, str]:
        return (self.a, self.b, self.x, self.y)


@dataclass(frozen=True)
class PreservationCurve:
    label: str
    thresholds: tuple[float, ...]
    counts_before: tuple[int, ...]
    counts_after: tuple[int, ...]

    def __post_init__(self):
        t = np.asarray(self.thresholds)
        if np.any(t < 0) or np.any(np.diff(t) <= 0):
            raise WordAssocError("thresholds must be non-negative and strictly ascending")
        for counts in (self.counts_before, self.counts_after):
            if np.any(np.diff(counts) > 0):
                raise WordAssocError("curve counts must be non-increasing in threshold")

    def preserved_fraction(self, threshold: float) -> float | None:
        """After/before at the first grid point ``>= threshold``; None if nothing qualifies."""
        i = int(np.searchsorted(np.asarray(self.thresholds), threshold - 1e-12))
        if i >= len(self.thresholds) or self.counts_before[i] == 0:
            return None
        return self.counts_after[i] / self.counts_before[i]


def load_analogies(path: str | Path) -> list[AnalogyQuad]:
    quads = []
    with Path(path).open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            fields = [f.strip() for f in line.split("\t")]
            if len(fields) != 5:
                raise WordAssocError(f"{path}:{lineno}: expected a<TAB>b<TAB>x<TAB>y<TAB>label")
            quads.append(AnalogyQuad(*fields))
    return quads


def analogy_strength(quad: AnalogyQuad, emb: EmbeddingSet, b: RelationVector) -> float:
    """``|<a - b, direction>|``: how strongly the first pair lies along ``b``."""
    return abs(float((emb[quad.a] - emb[quad.b]) @ b.direction))


def analogy_holds(quad: AnalogyQuad, emb: EmbeddingSet, tol: float = DEFAULT_TOL) -> bool:
    """True iff ``cos(b - a, y - x) >= 1 - tol`` and
    ``||a + y - x - b|| <= tol * ||y - x||``."""
    if not 0 < tol <= 1:
        raise WordAssocError(f"tol must be in (0, 1], got {tol}")
    a, b, x, y = (emb[t] for t in quad.tokens)
    ab, xy = b - a, y - x
    n_ab, n_xy = np.linalg.norm(ab), np.linalg.norm(xy)
    if n_ab == 0 or n_xy == 0:
        raise DegenerateError(f"zero difference vector in analogy {quad.tokens}")
    cos = float(ab @ xy) / (n_ab * n_xy)
    return bool(cos >= 1 - tol and float(np.linalg.norm(a + xy - b)) <= tol * n_xy)


def _holds_or_false(quad: AnalogyQuad, emb: EmbeddingSet, tol: float) -> bool:
    # Debiasing can collapse b - a to zero; such an analogy no longer holds.
    try:
        return analogy_holds(quad, emb, tol)
    except DegenerateError:
        return False


def preservation_curves(
    quads: Sequence[AnalogyQuad],
    before: EmbeddingSet,
    after: EmbeddingSet,
    b: RelationVector,
    thresholds: Sequence[float] = DEFAULT_THRESHOLDS,
    tol: float = DEFAULT_TOL,
) -> dict[str, PreservationCurve]:
    """Per label: how many analogies of at least each strength hold before,
    and how many of those still hold after debiasing."""
    thr = np.asarray(thresholds, dtype=float)
    curves = {}
    for label in LABELS:
        sub = [q for q in quads if q.label == label]
        strength = np.array([analogy_strength(q, before, b) for q in sub])
        held = np.array([_holds_or_false(q, before, tol) for q in sub], dtype=bool)
        kept = held & np.array([_holds_or_false(q, after, tol) for q in sub], dtype=bool)
        if sub:
            meets = strength[None, :] >= thr[:, None]
            cb = (meets & held).sum(axis=1)
            ca = (meets & kept).sum(axis=1)
        else:
            cb = ca = np.zeros(len(thr), dtype=int)
        curves[label] = PreservationCurve(
            label, tuple(float(t) for t in thr), tuple(int(c) for c in cb), tuple(int(c) for c in ca)
        )
    return curves
