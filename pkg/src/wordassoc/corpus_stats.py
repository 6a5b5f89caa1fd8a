"""Windowed co-occurrence counting and the PMI-family statistics.

Events are directional: every position ``i`` and every ``j`` with
``0 < |i - j| <= window`` inside the same document yields one
``(token_i, token_j)`` event. No distance weighting, no subsampling.
Natural logarithms throughout.
"""
from __future__ import annotations

import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import DegenerateError, UnobservedPairError, WordAssocError


@dataclass(frozen=True)
class ModelConstants:
    lambda_: float = 1.0
    alpha: float = -1.0
    k: int = 1

    def __post_init__(self):
        if not self.lambda_ > 0:
            raise WordAssocError(f"lambda must be positive, got {self.lambda_}")
        if not self.alpha < 0:
            raise WordAssocError(f"alpha must be negative, got {self.alpha}")
        if int(self.k) != self.k or self.k < 1:
            raise WordAssocError(f"k must be a positive integer, got {self.k}")


@dataclass
class CooccurrenceTable:
    window: int
    counts: Counter = field(default_factory=Counter)
    center_marginals: Counter = field(default_factory=Counter)
    context_marginals: Counter = field(default_factory=Counter)
    total_events: int = 0

    def __post_init__(self):
        if self.window < 1:
            raise WordAssocError(f"window must be >= 1, got {self.window}")

    @classmethod
    def from_counts(cls, window: int, counts: dict[tuple[str, str], int]) -> "CooccurrenceTable":
        table = cls(window)
        for (c, o), n in counts.items():
            if n < 0:
                raise WordAssocError(f"negative count for ({c!r}, {o!r})")
            if n:
                table.counts[c, o] += n
                table.center_marginals[c] += n
                table.context_marginals[o] += n
                table.total_events += n
        return table

    def __add__(self, other: "CooccurrenceTable") -> "CooccurrenceTable":
        if self.window != other.window:
            raise WordAssocError("cannot merge tables with different windows")
        return CooccurrenceTable(
            self.window,
            self.counts + other.counts,
            self.center_marginals + other.center_marginals,
            self.context_marginals + other.context_marginals,
            self.total_events + other.total_events,
        )

    def count(self, center: str, context: str) -> int:
        return self.counts.get((center, context), 0)

    def _require_events(self) -> None:
        if self.total_events == 0:
            raise DegenerateError("co-occurrence table has no events")

    def joint(self, center: str, context: str) -> float:
        self._require_events()
        n = self.count(center, context)
        if n == 0:
            raise UnobservedPairError(center, context)
        return n / self.total_events

    def center_prob(self, token: str) -> float:
        self._require_events()
        return self.center_marginals.get(token, 0) / self.total_events

    def context_prob(self, token: str) -> float:
        self._require_events()
        return self.context_marginals.get(token, 0) / self.total_events


def _count_document(tokens: Sequence[str], window: int) -> Counter:
    n = len(tokens)
    if n < 2:
        return Counter()
    vocab, ids = np.unique(np.asarray(tokens, dtype=object).astype(str), return_inverse=True)
    v = len(vocab)
    codes = []
    for off in range(1, min(window, n - 1) + 1):
        left, right = ids[:-off].astype(np.int64), ids[off:].astype(np.int64)
        codes.append(left * v + right)
        codes.append(right * v + left)
    uniq, cnt = np.unique(np.concatenate(codes), return_counts=True)
    return Counter(
        {(str(vocab[c // v]), str(vocab[c % v])): int(k) for c, k in zip(uniq.tolist(), cnt.tolist())}
    )


def _count_shard(args) -> Counter:
    docs, window = args
    total = Counter()
    for doc in docs:
        total.update(_count_document(doc, window))
    return total


def _as_documents(corpus) -> list[list[str]]:
    if isinstance(corpus, str):
        return [ln.split() for ln in corpus.splitlines()]
    corpus = list(corpus)
    if corpus and all(isinstance(t, str) for t in corpus):
        return [corpus]
    return [list(d) for d in corpus]


def count_cooccurrences(corpus, window: int, n_jobs: int = 1) -> CooccurrenceTable:
    """Count co-occurrence events.

    ``corpus`` is either a string (one document per line, whitespace
    tokens), a flat sequence of tokens (one document), or an iterable of
    token sequences. Windows never cross document boundaries. With
    ``n_jobs > 1`` documents are sharded over processes and the partial
    tables merged by addition, which gives identical counts.
    """
    if window < 1:
        raise WordAssocError(f"window must be >= 1, got {window}")
    docs = _as_documents(corpus)
    if not any(docs):
        raise WordAssocError("empty corpus")
    if n_jobs > 1 and len(docs) > 1:
        shards = [(docs[i::n_jobs], window) for i in range(n_jobs)]
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            parts = list(pool.map(_count_shard, shards))
        counts = Counter()
        for p in parts:
            counts.update(p)
    else:
        counts = _count_shard((docs, window))
    return CooccurrenceTable.from_counts(window, counts)


def read_corpus(path: str | Path, lowercase: bool = False) -> list[list[str]]:
    """One document per line, whitespace-tokenized."""
    docs = []
    with Path(path).open(encoding="utf-8") as fh:
        for line in fh:
            if lowercase:
                line = line.lower()
            toks = line.split()
            if toks:
                docs.append(toks)
    return docs


def pmi(table: CooccurrenceTable, x: str, w: str) -> float:
    """``ln p(x,w) / (p(x) p(w))`` with center marginal for ``x``, context for ``w``."""
    p_xw = table.joint(x, w)
    return math.log(p_xw / (table.center_prob(x) * table.context_prob(w)))


def cspmi(table: CooccurrenceTable, x: str, y: str) -> float:
    return pmi(table, x, y) + math.log(table.joint(x, y))


def log_conditional_ratio(table: CooccurrenceTable, w: str, x: str, y: str) -> float:
    """``ln p(w|x) / p(w|y)`` where ``p(w|x) = count(x, w) / count(x, .)``."""
    table._require_events()
    cxw, cyw = table.count(x, w), table.count(y, w)
    if cxw == 0:
        raise UnobservedPairError(x, w)
    if cyw == 0:
        raise UnobservedPairError(y, w)
    return math.log((cxw / table.center_marginals[x]) / (cyw / table.center_marginals[y]))


def shifted_pmi_matrix(table: CooccurrenceTable, words: Sequence[str], k: int = 1) -> np.ndarray:
    """``PMI(w_i, w_j) - ln k`` over ``words`` from symmetrized counts."""
    table._require_events()
    if k < 1:
        raise WordAssocError(f"k must be >= 1, got {k}")
    n = len(words)
    total = table.total_events
    out = np.empty((n, n))
    marg = [(table.center_marginals[w] + table.context_marginals[w]) / 2 for w in words]
    for i, a in enumerate(words):
        for j, b in enumerate(words):
            c = (table.count(a, b) + table.count(b, a)) / 2
            if c == 0:
                raise UnobservedPairError(a, b)
            out[i, j] = math.log(c * total / (marg[i] * marg[j]))
    return out - math.log(k)


def save_table(table: CooccurrenceTable, path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# window={table.window}\ttotal_events={table.total_events}\n")
        for (c, o), n in sorted(table.counts.items()):
            fh.write(f"{c}\t{o}\t{n}\n")


def load_table(path: str | Path) -> CooccurrenceTable:
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        header = fh.readline()
        if not header.startswith("#"):
            raise WordAssocError(f"{path}: missing '# window=..' header")
        meta = dict(f.split("=", 1) for f in header[1:].split())
        counts: dict[tuple[str, str], int] = {}
        for lineno, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            fields = line.split("\t")
            if len(fields) != 3:
                raise WordAssocError(f"{path}:{lineno}: expected center<TAB>context<TAB>count")
            counts[fields[0], fields[1]] = counts.get((fields[0], fields[1]), 0) + int(fields[2])
    table = CooccurrenceTable.from_counts(int(meta["window"]), counts)
    if "total_events" in meta and int(meta["total_events"]) != table.total_events:
        raise WordAssocError(
            f"{path}: header total_events={meta['total_events']} but rows sum to {table.total_events}"
        )
    return table
