"""Association measures: RIPA, its corpus-expected counterpart, genderedness
breakdown quantities, and WEAT.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from itertools import combinations
from typing import Mapping, Sequence

import numpy as np

from .corpus_stats import CooccurrenceTable, ModelConstants, cspmi, log_conditional_ratio
from .embedding_store import EmbeddingSet
from .errors import DegenerateError, UnobservedPairError, WordAssocError
from .relations import RelationVector, WordPairSet, scalar_projection


class LevyBiasWarning(UserWarning):
    """GloVe bias terms were missing and replaced by log counts."""


def ripa(w: np.ndarray, b: RelationVector) -> float:
    return scalar_projection(w, b)


def _scale(table: CooccurrenceTable, consts: ModelConstants, x: str, y: str) -> float:
    denom = -cspmi(table, x, y) + consts.alpha
    if denom <= 0:
        raise DegenerateError(
            f"degenerate pair separation for ({x!r}, {y!r}): -csPMI + alpha = {denom:.6g} <= 0"
        )
    return (1.0 / math.sqrt(consts.lambda_)) / math.sqrt(denom)


def ripa_expected_sgns(
    table: CooccurrenceTable, consts: ModelConstants, w: str, x: str, y: str
) -> float:
    """RIPA of ``w`` on the ``(x, y)`` relation implied by corpus counts
    for an SGNS model with no reconstruction error."""
    return _scale(table, consts, x, y) * log_conditional_ratio(table, w, x, y)


def ripa_expected_glove(
    table: CooccurrenceTable,
    consts: ModelConstants,
    glove_biases: Mapping[str, float] | None,
    w: str,
    x: str,
    y: str,
) -> float:
    """GloVe counterpart of :func:`ripa_expected_sgns`.

    Missing bias terms fall back to the log center count of the word, with a
    :class:`LevyBiasWarning`; under that fallback the result equals the SGNS
    value.
    """
    biases = dict(glove_biases or {})
    for t in (x, y):
        if t not in biases:
            warnings.warn(f"no GloVe bias for {t!r}; using log count", LevyBiasWarning, stacklevel=2)
            n = table.center_marginals.get(t, 0)
            if n == 0:
                raise UnobservedPairError(t, "*")
            biases[t] = math.log(n)
    log_joint = math.log(table.joint(x, w) / table.joint(y, w))
    return _scale(table, consts, x, y) * (log_joint - biases[x] + biases[y])


def genderedness_per_pair(emb: EmbeddingSet, w: str, pairs: WordPairSet) -> list[float]:
    """``<w, x - y> / ||x - y||`` for every pair."""
    wv = emb[w]
    out = []
    for x, y in pairs:
        diff = emb[x] - emb[y]
        norm = np.linalg.norm(diff)
        if norm == 0:
            raise DegenerateError(f"zero difference vector for pair ({x!r}, {y!r})")
        out.append(float(wv @ diff) / norm)
    return out


def genderedness(emb: EmbeddingSet, w: str, pairs: WordPairSet) -> float:
    return float(np.mean(genderedness_per_pair(emb, w, pairs)))


def expected_genderedness_per_pair(
    table: CooccurrenceTable, consts: ModelConstants, w: str, pairs: WordPairSet
) -> list[float]:
    return [ripa_expected_sgns(table, consts, w, x, y) for x, y in pairs]


def delta_genderedness(g_values: Sequence[float], g_hat_values: Sequence[float]) -> float:
    """``|mean g| - |mean g_hat|``: positive when the embedding is more
    strongly associated than the corpus implies."""
    if len(g_values) != len(g_hat_values):
        raise WordAssocError(f"length mismatch: {len(g_values)} vs {len(g_hat_values)}")
    if not g_values:
        raise WordAssocError("need at least one pair")
    return abs(float(np.mean(g_values))) - abs(float(np.mean(g_hat_values)))


@dataclass(frozen=True)
class AssociationRow:
    word: str
    g: float
    g_hat: float | None = None
    delta_g: float | None = None
    category: str = ""
    flags: tuple[str, ...] = ()

    def __post_init__(self):
        if (self.g_hat is None) != (self.delta_g is None):
            raise WordAssocError("delta_g must be present exactly when g_hat is")
        for v in (self.g, self.g_hat, self.delta_g):
            if v is not None and not math.isfinite(v):
                raise WordAssocError(f"non-finite association value for {self.word!r}")


def association_row(
    emb: EmbeddingSet,
    table: CooccurrenceTable | None,
    consts: ModelConstants,
    w: str,
    pairs: WordPairSet,
    category: str = "",
) -> AssociationRow:
    """Embedding and corpus genderedness for one word.

    Corpus-side failures (unobserved counts, degenerate pairs) leave
    ``g_hat``/``delta_g`` absent and set the ``insufficient counts`` flag.
    """
    g_list = genderedness_per_pair(emb, w, pairs)
    g = float(np.mean(g_list))
    if table is None:
        return AssociationRow(w, g, category=category, flags=("no corpus",))
    try:
        gh_list = expected_genderedness_per_pair(table, consts, w, pairs)
    except (UnobservedPairError, DegenerateError):
        return AssociationRow(w, g, category=category, flags=("insufficient counts",))
    return AssociationRow(
        w, g, float(np.mean(gh_list)), delta_genderedness(g_list, gh_list), category=category
    )


# --- WEAT -----------------------------------------------------------------


@dataclass(frozen=True)
class WeatInput:
    targets1: tuple[str, ...]
    targets2: tuple[str, ...]
    attrs1: tuple[str, ...]
    attrs2: tuple[str, ...]

    def __post_init__(self):
        sets = {}
        for name in ("targets1", "targets2", "attrs1", "attrs2"):
            vals = tuple(getattr(self, name))
            if not vals:
                raise WordAssocError(f"WEAT {name} must be non-empty")
            if len(set(vals)) != len(vals):
                raise WordAssocError(f"WEAT {name} has duplicate words")
            object.__setattr__(self, name, vals)
            sets[name] = set(vals)
        names = list(sets)
        for i, a in enumerate(names):
            for b in names[i + 1 :]:
                common = sets[a] & sets[b]
                if common:
                    raise WordAssocError(f"WEAT sets {a} and {b} overlap: {sorted(common)}")


@dataclass(frozen=True)
class WeatResult:
    statistic: float
    effect_size: float
    p_value: float
    n_partitions: int
    exhaustive: bool
    convention: str = "strictly-greater"


def _unit_rows(m: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(m, axis=-1, keepdims=True)
    if np.any(norms == 0):
        raise DegenerateError("cosine undefined for a zero vector")
    return m / norms


def weat_s(w: np.ndarray, X: np.ndarray, Y: np.ndarray) -> float:
    """Mean cosine of ``w`` with ``X`` minus mean cosine with ``Y``."""
    w = np.asarray(w, dtype=float)
    X, Y = np.atleast_2d(X).astype(float), np.atleast_2d(Y).astype(float)
    if X.shape[0] == 0 or Y.shape[0] == 0:
        raise WordAssocError("attribute sets must be non-empty")
    u = _unit_rows(w)
    return float(np.mean(_unit_rows(X) @ u) - np.mean(_unit_rows(Y) @ u))


def _target_scores(inp: WeatInput, emb: EmbeddingSet) -> tuple[np.ndarray, np.ndarray]:
    X, Y = emb.vectors(inp.attrs1), emb.vectors(inp.attrs2)
    s1 = np.array([weat_s(v, X, Y) for v in emb.vectors(inp.targets1)])
    s2 = np.array([weat_s(v, X, Y) for v in emb.vectors(inp.targets2)])
    return s1, s2


def effect_size_from_scores(s1: np.ndarray, s2: np.ndarray) -> float:
    # Population std. With one word per side it is sqrt(diff**2) / 2, and
    # sqrt(fl(x*x)) == |x| in IEEE arithmetic, so the ratio is exactly +-2.
    allv = np.concatenate([s1, s2])
    diff = float(np.mean(s1) - np.mean(s2))
    if allv.size == 2:
        sd = math.sqrt(diff * diff) / 2
    else:
        sd = float(np.std(allv))
    if sd == 0:
        if diff == 0:
            raise DegenerateError("effect size is 0/0: all association scores are equal")
        raise DegenerateError("degenerate effect size: zero spread with unequal means")
    return diff / sd


def weat_effect_size(inp: WeatInput, emb: EmbeddingSet) -> float:
    return effect_size_from_scores(*_target_scores(inp, emb))


def _partition_stats(scores: np.ndarray, first: np.ndarray) -> np.ndarray:
    """Sum over the first half minus sum over the rest, per row of ``first``."""
    n = scores.shape[0]
    mask = np.zeros((first.shape[0], n), dtype=bool)
    np.put_along_axis(mask, first, True, axis=1)
    rest = np.nonzero(~mask)[1].reshape(first.shape[0], -1)
    return scores[first].sum(axis=1) - scores[rest].sum(axis=1)


def permutation_p_value(
    s1: np.ndarray,
    s2: np.ndarray,
    max_exhaustive: int = 100_000,
    n_samples: int = 10_000,
    seed: int = 0,
) -> tuple[float, float, int, bool]:
    """One-sided permutation test on ``sum(s1) - sum(s2)``.

    Returns ``(statistic, p_value, n_partitions, exhaustive)``. The p-value
    is the fraction of equal-size splits whose statistic is strictly greater
    than the observed one. All ``C(2n, n)`` splits are enumerated when that
    count is at most ``max_exhaustive``; otherwise ``n_samples`` uniformly
    random splits are drawn from a generator seeded with ``seed``.
    """
    s1, s2 = np.asarray(s1, float), np.asarray(s2, float)
    n = s1.shape[0]
    if s2.shape[0] != n:
        raise WordAssocError(f"unequal target sizes: {n} vs {s2.shape[0]}")
    scores = np.concatenate([s1, s2])
    identity = np.arange(n)[None, :]
    observed = float(_partition_stats(scores, identity)[0])
    total = math.comb(2 * n, n)
    if total <= max_exhaustive:
        first = np.array(list(combinations(range(2 * n), n)), dtype=np.intp)
        stats = _partition_stats(scores, first)
        return observed, float(np.mean(stats > observed)), total, True
    rng = np.random.default_rng(seed)
    first = np.sort(rng.permuted(np.tile(np.arange(2 * n), (n_samples, 1)), axis=1)[:, :n], axis=1)
    stats = _partition_stats(scores, first)
    return observed, float(np.mean(stats > observed)), n_samples, False


def weat_p_value(
    inp: WeatInput, emb: EmbeddingSet, max_exhaustive: int = 100_000, n_samples: int = 10_000, seed: int = 0
) -> float:
    s1, s2 = _target_scores(inp, emb)
    return permutation_p_value(s1, s2, max_exhaustive, n_samples, seed)[1]


def weat(
    inp: WeatInput, emb: EmbeddingSet, max_exhaustive: int = 100_000, n_samples: int = 10_000, seed: int = 0
) -> WeatResult:
    s1, s2 = _target_scores(inp, emb)
    stat, p, n_parts, exhaustive = permutation_p_value(s1, s2, max_exhaustive, n_samples, seed)
    return WeatResult(stat, effect_size_from_scores(s1, s2), p, n_parts, exhaustive)


def bootstrap_mean_p_value(values: Sequence[float], n_resamples: int = 10_000, seed: int = 0) -> float | None:
    """Two-sided bootstrap p-value for ``mean(values) == 0``.

    The sample is shifted to mean zero and resampled with replacement; the
    p-value is the fraction of resampled means at least as far from zero as
    the observed mean. ``None`` for fewer than two values.
    """
    v = np.asarray(values, dtype=float)
    if v.size < 2:
        return None
    observed = abs(float(v.mean()))
    centered = v - v.mean()
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, v.size, size=(n_resamples, v.size))
    means = centered[idx].mean(axis=1)
    return float(np.mean(np.abs(means) >= observed - 1e-15))
