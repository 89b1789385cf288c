"""Representational geometries: pairwise rank-correlation dissimilarity
matrices and second-order similarities between them.

All arithmetic runs in float64 on average ranks centered by their exact mean
(d+1)/2. Centered ranks are multiples of 0.5 and every sum involved fits
exactly in float64, so geometries are bit-identical under dimension
permutations, per-vector monotone transforms, and any parallel evaluation
order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConfigurationError, UndefinedCorrelationError
from .stats import rank_average

CONSTANT_POLICIES = ("error", "zero")


@dataclass(frozen=True)
class Geometry:
    """Symmetric n x n dissimilarity matrix over one sample of sentences."""

    sentence_ids: tuple[int, ...]
    matrix: np.ndarray

    def __post_init__(self):
        n = len(self.sentence_ids)
        if self.matrix.shape != (n, n):
            raise ConfigurationError(
                f"geometry matrix shape {self.matrix.shape} does not match {n} ids")

    @property
    def n(self) -> int:
        return len(self.sentence_ids)


@dataclass(frozen=True)
class SimilarityScore:
    value: float
    hypothesis: str
    sample_index: int


def _centered_ranks(x: np.ndarray) -> np.ndarray:
    r = rank_average(x)
    # total rank sum is always d(d+1)/2, ties included, so the mean is exact
    return r - (r.size + 1) / 2.0


def spearman_rho(x: np.ndarray, y: np.ndarray, on_constant: str = "error") -> float:
    """Tie-aware Spearman rank correlation: Pearson on average ranks."""
    a = np.asarray(x, dtype=np.float64).ravel()
    b = np.asarray(y, dtype=np.float64).ravel()
    if a.size != b.size:
        raise ConfigurationError(f"length mismatch: {a.size} vs {b.size}")
    if a.size < 2:
        raise ConfigurationError("spearman_rho requires vectors of length >= 2")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise ConfigurationError("spearman_rho requires finite values")
    ra = _centered_ranks(a)
    rb = _centered_ranks(b)
    saa = float(ra @ ra)
    sbb = float(rb @ rb)
    if saa == 0.0 or sbb == 0.0:
        if on_constant == "zero":
            return 0.0
        raise UndefinedCorrelationError(
            "rank variance is zero (constant input vector)")
    rho = float(ra @ rb) / np.sqrt(saa * sbb)
    return float(min(1.0, max(-1.0, rho)))


def compute_geometry(model, sample_ids: Sequence[int], on_constant: str = "error") -> Geometry:
    """Dissimilarity matrix D = 1 - Spearman's rho over every pair of the
    sample's representations; upper triangle computed, then mirrored.
    """
    if on_constant not in CONSTANT_POLICIES:
        raise ConfigurationError(f"unknown constant-vector policy {on_constant!r}")
    ids = tuple(int(i) for i in sample_ids)
    if len(ids) < 3:
        raise ConfigurationError("a geometry needs a sample of at least 3 sentences")
    if len(set(ids)) != len(ids):
        raise ConfigurationError("sample contains repeated sentence ids")
    rows = model.rows_for(ids)

    ranks = np.vstack([_centered_ranks(row) for row in rows])
    sums = ranks @ ranks.T
    norms2 = np.diag(sums).copy()
    degenerate = norms2 == 0.0
    if degenerate.any():
        if on_constant == "error":
            bad = ids[int(np.flatnonzero(degenerate)[0])]
            raise UndefinedCorrelationError(
                f"representation of sentence {bad} is constant; rho undefined")
        norms2[degenerate] = 1.0  # rho forced to 0 for these pairs below
    denom = np.sqrt(np.outer(norms2, norms2))
    rho = sums / denom
    if degenerate.any():
        rho[degenerate, :] = 0.0
        rho[:, degenerate] = 0.0
    np.clip(rho, -1.0, 1.0, out=rho)

    n = len(ids)
    upper = np.triu(1.0 - rho, k=1)
    matrix = upper + upper.T
    return Geometry(sentence_ids=ids, matrix=matrix)


def upper_triangle(g: Geometry | np.ndarray) -> np.ndarray:
    """Row-major strict upper triangle as a vector of length n(n-1)/2."""
    m = g.matrix if isinstance(g, Geometry) else np.asarray(g)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ConfigurationError("upper_triangle expects a square matrix")
    iu = np.triu_indices(m.shape[0], k=1)
    return m[iu]


def write_geometry_csv(g: Geometry, path) -> None:
    """Dump for external inspection: one header row of sentence ids, then the
    matrix rows."""
    import csv
    from pathlib import Path

    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(g.sentence_ids)
        for row in g.matrix:
            w.writerow([f"{v:.12g}" for v in row])


def geometry_similarity(
    g_ref: Geometry,
    g_hyp: Geometry,
    hypothesis: str = "",
    sample_index: int = 0,
    on_constant: str = "error",
) -> SimilarityScore:
    """Spearman correlation of the two geometries' upper triangles.

    The two geometries must cover the same sentences in the same order;
    misaligned samples are an error, never silently reordered.
    """
    if g_ref.sentence_ids != g_hyp.sentence_ids:
        raise ConfigurationError(
            "geometries are not aligned: sample sentence ids differ")
    value = spearman_rho(upper_triangle(g_ref), upper_triangle(g_hyp),
                         on_constant=on_constant)
    return SimilarityScore(value=value, hypothesis=hypothesis, sample_index=sample_index)
