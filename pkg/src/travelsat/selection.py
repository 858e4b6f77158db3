"""Support-set selection and representativeness checks.

Support records for few-shot prompts are picked from the training pool
either by mean similarity to the query set or uniformly at random. The
similarity between two encoded vectors is 1 / sqrt(squared distance + 1),
which is 1 exactly for identical vectors and falls toward 0 with distance.
Random draws are screened with two-sample Kolmogorov-Smirnov tests per
variable against the full dataset.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.random import default_rng
from scipy.spatial.distance import cdist
from scipy.special import kolmogorov

from .dataset import Dataset, RespondentRecord
from .encoding import EncodingSpec, encode_matrix
from .errors import DatasetError
from .schema import VariableSchema


def similarity(a: Sequence[float], b: Sequence[float]) -> float:
    """Similarity of two feature vectors: 1 / sqrt(||a - b||^2 + 1)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    d2 = float(np.sum((a - b) ** 2))
    return 1.0 / math.sqrt(d2 + 1.0)


def similarity_matrix(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Pairwise similarities between the rows of A and the rows of B."""
    d2 = cdist(np.asarray(A, dtype=float), np.asarray(B, dtype=float), "sqeuclidean")
    return 1.0 / np.sqrt(d2 + 1.0)


@dataclass(frozen=True)
class SupportSet:
    """Labeled records chosen for few-shot prompting."""

    records: tuple[RespondentRecord, ...]
    provenance: str  # "similarity" | "random" | "none"

    @property
    def k(self) -> int:
        return len(self.records)

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(r.record_id for r in self.records)


def empty_support() -> SupportSet:
    return SupportSet(records=(), provenance="none")


def rank_support(train: Dataset, query: Dataset, spec: EncodingSpec, k: int) -> SupportSet:
    """Top-k training records by mean similarity to the whole query set.

    Ties break toward the lower training index. k = 0 gives an empty
    support set (the zero-context case).
    """
    if k < 0:
        raise DatasetError("k must be non-negative")
    if k > len(train):
        raise DatasetError(f"k={k} exceeds training pool size {len(train)}")
    if k == 0:
        return empty_support()
    sims = similarity_matrix(encode_matrix(train, spec), encode_matrix(query, spec))
    scores = sims.mean(axis=1)
    order = sorted(range(len(train)), key=lambda i: (-scores[i], i))
    chosen = sorted(order[:k])
    return SupportSet(records=tuple(train[i] for i in chosen), provenance="similarity")


def random_support(train: Dataset, k: int, seed: int) -> SupportSet:
    """k training records drawn uniformly without replacement."""
    if k < 0:
        raise DatasetError("k must be non-negative")
    if k > len(train):
        raise DatasetError(f"k={k} exceeds training pool size {len(train)}")
    if k == 0:
        return empty_support()
    rng = default_rng(seed)
    chosen = sorted(int(i) for i in rng.choice(len(train), size=k, replace=False))
    return SupportSet(records=tuple(train[i] for i in chosen), provenance="random")


@dataclass(frozen=True)
class KsResult:
    variable: str
    d: float
    p_value: float

    @property
    def stars(self) -> str:
        if self.p_value < 0.01:
            return "**"
        if self.p_value < 0.05:
            return "*"
        return ""

    @property
    def significant(self) -> bool:
        return self.p_value < 0.05


def ks_two_sample(sample: Sequence[float], population: Sequence[float],
                  variable: str = "") -> KsResult:
    """Two-sample Kolmogorov-Smirnov test.

    D is the largest absolute gap between the two empirical CDFs; the
    p-value uses the asymptotic Kolmogorov distribution with effective size
    n1*n2 / (n1 + n2).
    """
    a = np.sort(np.asarray(sample, dtype=float))
    b = np.sort(np.asarray(population, dtype=float))
    n1, n2 = len(a), len(b)
    if n1 == 0 or n2 == 0:
        raise DatasetError("ks_two_sample needs non-empty samples")
    xs = np.concatenate([a, b])
    cdf1 = np.searchsorted(a, xs, side="right") / n1
    cdf2 = np.searchsorted(b, xs, side="right") / n2
    d = float(np.max(np.abs(cdf1 - cdf2)))
    effective = n1 * n2 / (n1 + n2)
    p = float(kolmogorov(math.sqrt(effective) * d))
    return KsResult(variable=variable, d=d, p_value=min(1.0, max(0.0, p)))


def representativeness_report(
    support: SupportSet, full: Dataset, schema: VariableSchema | None = None
) -> list[KsResult]:
    """Per-variable K-S comparison of the support records against the full
    dataset. Categorical variables are compared on their numeric codes."""
    if support.k == 0:
        raise DatasetError("representativeness needs a non-empty support set")
    schema = schema or full.schema
    results = []
    for var in schema.predictors:
        sample = [r.values[var.name] for r in support.records]
        results.append(ks_two_sample(sample, full.column(var.name), variable=var.name))
    return results


def significant_variables(results: Sequence[KsResult]) -> list[KsResult]:
    return [r for r in results if r.significant]


def summarize_ks_repeats(per_repeat: Sequence[Sequence[KsResult]]) -> str:
    """Collapse repeat-level K-S results into one report cell.

    "ns" when no repeat flagged anything; otherwise each flagged variable
    with its strongest star level and the number of repeats that flagged it,
    e.g. "public_transit_station* (1)".
    """
    counts: dict[str, int] = {}
    stars: dict[str, str] = {}
    for results in per_repeat:
        for r in significant_variables(results):
            counts[r.variable] = counts.get(r.variable, 0) + 1
            if len(r.stars) > len(stars.get(r.variable, "")):
                stars[r.variable] = r.stars
    if not counts:
        return "ns"
    parts = [f"{name}{stars[name]} ({counts[name]})" for name in sorted(counts)]
    return "; ".join(parts)
