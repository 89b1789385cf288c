"""Repeated-sample RSA: draw m samples of n sentences, score every hypothesis
model against the reference on identical samples, and compare score series
with an exact two-sided sign test.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConfigurationError, PairingError
from .geometry import compute_geometry, geometry_similarity
from .grammar import Corpus
from .models import RepresentationalModel
from .stats import sign_test_pvalue


@dataclass(frozen=True)
class RSAConfig:
    n: int
    m: int
    seed: int
    on_constant: str = "error"
    reference_name: str | None = None
    hypothesis_names: tuple[str, ...] | None = None

    def validate(self, corpus_size: int) -> None:
        if self.m < 1:
            raise ConfigurationError(f"sample count m must be >= 1, got {self.m}")
        if not 3 <= self.n <= corpus_size:
            raise ConfigurationError(
                f"sample size n={self.n} must satisfy 3 <= n <= corpus size "
                f"({corpus_size})")


@dataclass(frozen=True)
class ScoreSeries:
    hypothesis: str
    scores: np.ndarray  # (m,)
    samples: tuple[tuple[int, ...], ...]  # audit trail: ids per sample

    @property
    def m(self) -> int:
        return self.scores.size

    @property
    def mean(self) -> float:
        return float(self.scores.mean())


@dataclass(frozen=True)
class ComparisonResult:
    hypothesis_a: str
    hypothesis_b: str
    mean_a: float
    mean_b: float
    positives: int
    negatives: int
    zeros: int
    p_value: float
    median_difference: float
    direction: str  # "positive" (a > b), "negative", or "zero"


def _check_alignment(corpus: Corpus, model: RepresentationalModel) -> None:
    if model.sentence_ids != corpus.sentence_ids:
        raise ConfigurationError(
            f"model {model.name!r} is not aligned to the corpus "
            f"({len(model.sentence_ids)} vectors vs {len(corpus)} sentences)")


def run_rsa(corpus: Corpus, reference: RepresentationalModel,
            hypotheses: Sequence[RepresentationalModel],
            config: RSAConfig) -> dict[str, ScoreSeries]:
    """Per-hypothesis m-length score series, paired: every hypothesis is scored
    on the same m samples (drawn without replacement within a sample,
    independently across samples). Per-sample seeds are derived from the
    master seed, so parallel and serial evaluation agree.
    """
    config.validate(len(corpus))
    _check_alignment(corpus, reference)
    names = []
    for h in hypotheses:
        _check_alignment(corpus, h)
        if h.name in names or h.name == reference.name:
            raise ConfigurationError(f"duplicate model name {h.name!r}")
        names.append(h.name)
    if not hypotheses:
        raise ConfigurationError("run_rsa needs at least one hypothesis model")

    ids = np.array(corpus.sentence_ids)
    sample_seeds = np.random.SeedSequence(int(config.seed)).spawn(config.m)
    samples: list[tuple[int, ...]] = []
    scores = {h.name: np.empty(config.m) for h in hypotheses}
    for j in range(config.m):
        rng = np.random.default_rng(sample_seeds[j])
        sample = tuple(int(i) for i in ids[rng.choice(ids.size, size=config.n,
                                                      replace=False)])
        samples.append(sample)
        g_ref = compute_geometry(reference, sample, on_constant=config.on_constant)
        for h in hypotheses:
            g_hyp = compute_geometry(h, sample, on_constant=config.on_constant)
            s = geometry_similarity(g_ref, g_hyp, hypothesis=h.name,
                                    sample_index=j,
                                    on_constant=config.on_constant)
            scores[h.name][j] = s.value

    trail = tuple(samples)
    return {h.name: ScoreSeries(hypothesis=h.name, scores=scores[h.name],
                                samples=trail)
            for h in hypotheses}


def compare(series_a: ScoreSeries, series_b: ScoreSeries) -> ComparisonResult:
    """Sign test on paired differences a - b. Zero differences are excluded
    from the test; the p-value is the exact two-sided binomial tail."""
    if series_a.m != series_b.m:
        raise PairingError(
            f"series have different lengths: {series_a.m} vs {series_b.m}")
    if series_a.samples != series_b.samples:
        raise PairingError(
            f"series {series_a.hypothesis!r} and {series_b.hypothesis!r} were "
            f"not scored on the same samples")
    diffs = series_a.scores - series_b.scores
    positives = int(np.sum(diffs > 0))
    negatives = int(np.sum(diffs < 0))
    zeros = int(np.sum(diffs == 0))
    median = float(np.median(diffs))
    direction = "positive" if median > 0 else "negative" if median < 0 else "zero"
    return ComparisonResult(
        hypothesis_a=series_a.hypothesis,
        hypothesis_b=series_b.hypothesis,
        mean_a=series_a.mean,
        mean_b=series_b.mean,
        positives=positives,
        negatives=negatives,
        zeros=zeros,
        p_value=sign_test_pvalue(positives, negatives),
        median_difference=median,
        direction=direction,
    )


def difference_histogram(series_a: ScoreSeries, series_b: ScoreSeries,
                         bins: int = 30) -> tuple[np.ndarray, np.ndarray]:
    """Histogram of paired differences over `bins` bins spanning the observed
    range, symmetric around 0. Returns (edges, counts)."""
    if series_a.samples != series_b.samples:
        raise PairingError("cannot histogram differences of unpaired series")
    diffs = series_a.scores - series_b.scores
    bound = float(np.max(np.abs(diffs))) if diffs.size else 0.0
    if bound == 0.0:
        bound = 1e-12
    edges = np.linspace(-bound, bound, bins + 1)
    counts, _ = np.histogram(diffs, bins=edges)
    return edges, counts
