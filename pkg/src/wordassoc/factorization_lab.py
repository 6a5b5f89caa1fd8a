"""Exact synthetic factorizations for checking the debiasing guarantee and
the WEAT frequency dependence.

Everything here is seeded and deterministic.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import WordAssocError
from .relations import BiasSubspace, project_onto, span_basis

Pairs = Sequence[tuple[int, int]]


@dataclass(frozen=True, eq=False)
class SyntheticFactorization:
    """``M = W C^T`` with ``C = lambda * W``."""

    W: np.ndarray
    lambda_: float
    C: np.ndarray = field(init=False)
    M: np.ndarray = field(init=False)

    def __post_init__(self):
        W = np.array(self.W, dtype=np.float64)
        if W.ndim != 2:
            raise WordAssocError("W must be 2-D")
        C = self.lambda_ * W
        M = W @ C.T
        # exact symmetry; the product can differ from its transpose in the last ulp
        M = (M + M.T) / 2
        for a in (W, C, M):
            a.setflags(write=False)
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "M", M)

    @property
    def n(self) -> int:
        return self.W.shape[0]

    @property
    def d(self) -> int:
        return self.W.shape[1]


def make_synthetic(n: int, d: int, lambda_: float = 1.0, seed: int = 0) -> SyntheticFactorization:
    if not 1 <= d <= n:
        raise WordAssocError(f"need 1 <= d <= n, got n={n}, d={d}")
    if not lambda_ > 0:
        raise WordAssocError(f"lambda must be positive, got {lambda_}")
    rng = np.random.default_rng(seed)
    return SyntheticFactorization(rng.standard_normal((n, d)), lambda_)


def _check_pairs(n: int, pairs: Pairs) -> None:
    if not pairs:
        raise WordAssocError("pair list must be non-empty")
    for x, y in pairs:
        for i in (x, y):
            if not 0 <= i < n:
                raise WordAssocError(f"index {i} out of range for n={n}")


def bias_residual(M: np.ndarray | SyntheticFactorization, pairs: Pairs, w: int) -> float:
    """``max |M[w, x] - M[w, y]|`` over the pairs; zero means ``w`` is unbiased."""
    if isinstance(M, SyntheticFactorization):
        M = M.M
    M = np.asarray(M)
    _check_pairs(M.shape[0], pairs)
    if not 0 <= w < M.shape[0]:
        raise WordAssocError(f"index {w} out of range for n={M.shape[0]}")
    if any(w in p for p in pairs):
        raise WordAssocError(f"word {w} belongs to a defining pair")
    return max(abs(float(M[w, x] - M[w, y])) for x, y in pairs)


Projector = Callable[[np.ndarray, BiasSubspace], np.ndarray]


def debias_and_reconstruct(
    f: SyntheticFactorization, pairs: Pairs, projector: Projector = project_onto
) -> np.ndarray:
    """Remove the span of the pair differences from every word row outside
    the pairs and return ``W_d C^T``. Context vectors are left alone.

    ``projector`` exists so a deliberately broken projection can be plugged
    in as a negative control.
    """
    _check_pairs(f.n, pairs)
    subspace = span_basis(np.array([f.W[x] - f.W[y] for x, y in pairs]))
    in_pairs = {i for p in pairs for i in p}
    rows = [i for i in range(f.n) if i not in in_pairs]
    Wd = f.W.copy()
    if rows:
        Wd[rows] = Wd[rows] - projector(Wd[rows], subspace)
    return Wd @ f.C.T


@dataclass(frozen=True)
class TheoremInstance:
    seed: int
    n: int
    d: int
    n_pairs: int
    lambda_: float
    max_residual: float
    threshold: float
    untouched_error: float

    @property
    def passed(self) -> bool:
        return self.max_residual <= self.threshold and self.untouched_error <= 1e-10


def check_debiasing_instance(
    seed: int,
    n: int,
    d: int,
    n_pairs: int,
    lambda_: float,
    projector: Projector = project_onto,
    rel_tol: float = 1e-8,
) -> TheoremInstance:
    f = make_synthetic(n, d, lambda_, seed)
    rng = np.random.default_rng([seed, 1])
    idx = rng.choice(n, size=2 * n_pairs, replace=False)
    pairs = [(int(idx[2 * i]), int(idx[2 * i + 1])) for i in range(n_pairs)]
    Md = debias_and_reconstruct(f, pairs, projector)
    in_pairs = {i for p in pairs for i in p}
    others = [w for w in range(n) if w not in in_pairs]
    worst = max((bias_residual(Md, pairs, w) for w in others), default=0.0)
    rows = sorted(in_pairs)
    untouched = float(np.max(np.abs(Md[rows] - f.M[rows])))
    return TheoremInstance(
        seed, n, d, n_pairs, lambda_, worst, rel_tol * float(np.max(np.abs(f.M))), untouched
    )


def debiasing_theorem_suite(
    n_instances: int = 200,
    seed: int = 0,
    max_n: int = 32,
    max_d: int = 16,
    max_pairs: int = 4,
    lambda_range: tuple[float, float] = (0.5, 4.0),
    lambdas: Sequence[float] | None = None,
    projector: Projector = project_onto,
) -> list[TheoremInstance]:
    """Random instances with ``n <= max_n``, ``d <= max_d``, ``|S| <= max_pairs``.

    ``lambdas`` overrides the random draw and cycles through the given grid.
    """
    rng = np.random.default_rng(seed)
    out = []
    for i in range(n_instances):
        n_pairs = int(rng.integers(1, max_pairs + 1))
        n = int(rng.integers(max(2 * n_pairs + 1, 2), max_n + 1))
        d = int(rng.integers(1, min(max_d, n) + 1))
        lam = float(rng.uniform(*lambda_range)) if lambdas is None else float(lambdas[i % len(lambdas)])
        out.append(check_debiasing_instance(int(rng.integers(2**31)), n, d, n_pairs, lam, projector))
    return out


@dataclass(frozen=True)
class Prop1Result:
    cos_diff: float
    equal_freq: bool


def prop1_check(
    p_x: float, p_y: float, alpha1: float, alpha2: float, seed: int = 0, dim: int = 8, w_scale: float = 1.0
) -> Prop1Result:
    """Cosine gap ``cos(w, x) - cos(w, y)`` for a word with ``<w, x> = <w, y>``.

    The attribute vectors get random unit directions and squared norms
    ``alpha1 * ln p + alpha2``; ``w`` has unit inner product with both
    plus a random component orthogonal to both.
    """
    sq = []
    for p in (p_x, p_y):
        if not 0 < p <= 1:
            raise WordAssocError(f"probability must be in (0, 1], got {p}")
        v = alpha1 * math.log(p) + alpha2
        if v <= 0:
            raise WordAssocError(f"alpha1 * ln p + alpha2 = {v:.6g} must be positive")
        sq.append(v)
    rng = np.random.default_rng(seed)
    ux, uy = rng.standard_normal((2, dim))
    x = ux / np.linalg.norm(ux) * math.sqrt(sq[0])
    y = uy / np.linalg.norm(uy) * math.sqrt(sq[1])
    A = np.stack([x, y])
    coef = np.linalg.solve(A @ A.T, np.ones(2))
    r = rng.standard_normal(dim)
    r -= A.T @ np.linalg.solve(A @ A.T, A @ r)
    w = w_scale * (coef @ A + r)
    nw = np.linalg.norm(w)
    cos_diff = float(w @ x) / (nw * np.linalg.norm(x)) - float(w @ y) / (nw * np.linalg.norm(y))
    return Prop1Result(cos_diff, math.isclose(p_x, p_y, rel_tol=1e-15, abs_tol=0.0))


PROP1_RATIOS = tuple(math.exp(k) for k in (-2, -1, 0, 1, 2))


def prop1_suite(
    p_y: float = 0.01, alpha1: float = -1.0, alpha2: float = 10.0, seed: int = 0
) -> list[tuple[float, Prop1Result, bool]]:
    """Check the dichotomy over ``PROP1_RATIOS``: zero gap iff equal frequency."""
    out = []
    for ratio in PROP1_RATIOS:
        res = prop1_check(ratio * p_y, p_y, alpha1, alpha2, seed)
        ok = abs(res.cos_diff) <= 1e-12 if res.equal_freq else abs(res.cos_diff) > 1e-6
        out.append((ratio, res, ok))
    return out
