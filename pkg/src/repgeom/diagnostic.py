"""Diagnostic-classifier baseline: logistic-regression probes over
[static word vector || contextual target vector] features, scored against
majority-class accuracy.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from sklearn.linear_model import LogisticRegression

from .embedstore import EmbeddingDataset, StaticLexicon
from .errors import ConfigurationError
from .grammar import Corpus
from .models import _lookup, _role_binding


@dataclass(frozen=True)
class ProbeInstance:
    features: np.ndarray
    label: int  # 1 iff the candidate word fills the probed role
    sentence_id: int
    candidate: str


@dataclass(frozen=True)
class ProbeReport:
    accuracy: float
    precision: float
    recall: float
    majority_accuracy: float
    train_size: int
    test_size: int


def build_probe_dataset(corpus: Corpus, dataset: EmbeddingDataset,
                        lexicon: StaticLexicon, target_role: str,
                        positive_role: str) -> list[ProbeInstance]:
    """One instance per (sentence, token position != target position):
    [lexicon(candidate) || contextual(target)], labeled positive only at the
    positive role's position. Exactly one positive per sentence.
    """
    dataset.validate_against(corpus)
    instances = []
    for s in corpus.sentences:
        target_idx = _role_binding(s, target_role).index
        positive_idx = _role_binding(s, positive_role).index
        if positive_idx == target_idx:
            raise ConfigurationError(
                f"sentence {s.id}: positive role {positive_role!r} coincides "
                f"with target role {target_role!r}")
        if not dataset.has(s.id, target_role):
            raise ConfigurationError(
                f"dataset has no {target_role!r} vector for sentence {s.id}")
        ctx = np.asarray(dataset.vector(s.id, target_role), dtype=np.float64)
        for pos, word in enumerate(s.tokens):
            if pos == target_idx:
                continue
            feats = np.concatenate([_lookup(lexicon, word, s.id), ctx])
            instances.append(ProbeInstance(
                features=feats,
                label=int(pos == positive_idx),
                sentence_id=s.id,
                candidate=word,
            ))
    return instances


def train_probe(instances: Sequence[ProbeInstance], split_seed) -> ProbeReport:
    """80/20 sentence-level split (no sentence straddles the split), then an
    L2 logistic regression with conventional default strength (C=1.0), driven
    to convergence. Precision/recall are for the positive class and reported
    as 0 when the classifier never predicts positive.
    """
    if not instances:
        raise ConfigurationError("no probe instances to train on")
    dims = {inst.features.size for inst in instances}
    if len(dims) != 1:
        raise ConfigurationError(f"mixed feature dimensions: {sorted(dims)}")

    sentence_ids = sorted({inst.sentence_id for inst in instances})
    if len(sentence_ids) < 2:
        raise ConfigurationError("need at least 2 sentences to split 80/20")
    rng = np.random.default_rng(np.random.SeedSequence(int(split_seed)))
    order = rng.permutation(len(sentence_ids))
    cut = max(1, int(round(0.8 * len(sentence_ids))))
    if cut == len(sentence_ids):
        cut -= 1
    train_ids = {sentence_ids[i] for i in order[:cut]}

    train = [i for i in instances if i.sentence_id in train_ids]
    test = [i for i in instances if i.sentence_id not in train_ids]
    y_train = np.array([i.label for i in train])
    if len(set(y_train.tolist())) < 2:
        raise ConfigurationError(
            "degenerate split: training data contains a single class")

    X_train = np.vstack([i.features for i in train])
    X_test = np.vstack([i.features for i in test])
    y_test = np.array([i.label for i in test])

    clf = LogisticRegression(penalty="l2", C=1.0, solver="lbfgs",
                             tol=1e-6, max_iter=1000)
    clf.fit(X_train, y_train)
    pred = clf.predict(X_test)

    tp = int(np.sum((pred == 1) & (y_test == 1)))
    fp = int(np.sum((pred == 1) & (y_test == 0)))
    fn = int(np.sum((pred == 0) & (y_test == 1)))
    accuracy = float(np.mean(pred == y_test))
    precision = tp / (tp + fp) if (tp + fp) > 0 else 0.0
    recall = tp / (tp + fn) if (tp + fn) > 0 else 0.0
    majority = float(np.mean(y_test == 0))
    return ProbeReport(
        accuracy=accuracy,
        precision=precision,
        recall=recall,
        majority_accuracy=majority,
        train_size=len(train),
        test_size=len(test),
    )
