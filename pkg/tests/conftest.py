"""Shared fixtures and the acceptance-criteria reporting hook."""

from __future__ import annotations

import numpy as np
import pytest

from repgeom.embedstore import EmbeddingDataset
from repgeom.grammar import AnnotatedSentence, Corpus, RoleBinding
from repgeom.models import RepresentationalModel


def make_corpus(k: int, roles=("verb", "subject", "non_argument")) -> Corpus:
    """Synthetic corpus of k sentences with distinct token sequences; role r
    sits at token position i for the i-th role."""
    sentences = []
    for i in range(k):
        tokens = tuple(f"w{i}_{j}" for j in range(len(roles)))
        bound = {r: RoleBinding(index=j, word=tokens[j])
                 for j, r in enumerate(roles)}
        sentences.append(AnnotatedSentence(id=i, tokens=tokens, roles=bound,
                                           template_id="synthetic"))
    return Corpus(grammar_fingerprint="synthetic", seed=0,
                  sentences=tuple(sentences))


def make_model(name: str, corpus: Corpus, vectors: np.ndarray) -> RepresentationalModel:
    return RepresentationalModel(name=name, sentence_ids=corpus.sentence_ids,
                                 vectors=np.asarray(vectors, dtype=np.float64),
                                 provenance={"kind": "synthetic"})


def make_dataset(corpus: Corpus, role: str, vectors) -> EmbeddingDataset:
    ds = EmbeddingDataset(corpus_fingerprint=corpus.fingerprint())
    for s, vec in zip(corpus.sentences, vectors):
        ds.add(s.id, role, vec)
    return ds


# ---------------------------------------------------------------------------
# acceptance reporting: tests marked @pytest.mark.acceptance(n, "text") get a
# one-line PASS/FAIL per criterion in the terminal summary


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "acceptance(number, description): acceptance criterion")


_ACCEPTANCE_RESULTS: dict[int, tuple[str, str]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when != "call":
        return
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    number, description = marker.args
    status = "PASS" if report.passed else "FAIL"
    _ACCEPTANCE_RESULTS[number] = (status, description)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for number in sorted(_ACCEPTANCE_RESULTS):
        status, description = _ACCEPTANCE_RESULTS[number]
        terminalreporter.write_line(f"[{status}] criterion {number}: {description}")
