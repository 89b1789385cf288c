"""Assemble reference and hypothesis representational models: one vector per
corpus sentence, aligned to corpus order.

Reference models pull contextual vectors from an EmbeddingDataset; hypothesis
models are built from static lexicon lookups, either a single word's vector or
[anchor || context] concatenations whose anchor half is shared across all
hypotheses for the same corpus.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Any, Mapping, Sequence

import numpy as np

from .embedstore import EmbeddingDataset, StaticLexicon
from .errors import ConfigurationError
from .grammar import Corpus, ROLE_LABELS, SENTENCE_ROLE

RECIPE_KINDS = ("contextual_role", "static_concat", "static_single",
                "null_concat", "null_single")


@dataclass(frozen=True)
class RepresentationalModel:
    name: str
    sentence_ids: tuple[int, ...]
    vectors: np.ndarray  # (n, d) float64
    provenance: Mapping[str, Any]

    def __post_init__(self):
        if self.vectors.ndim != 2 or self.vectors.shape[0] != len(self.sentence_ids):
            raise ConfigurationError(
                f"model {self.name!r}: expected one vector per sentence, got "
                f"shape {self.vectors.shape} for {len(self.sentence_ids)} ids")
        if not np.all(np.isfinite(self.vectors)):
            raise ConfigurationError(
                f"model {self.name!r} contains non-finite components")

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    @cached_property
    def _positions(self) -> dict[int, int]:
        return {sid: i for i, sid in enumerate(self.sentence_ids)}

    def rows_for(self, ids: Sequence[int]) -> np.ndarray:
        try:
            rows = [self._positions[int(i)] for i in ids]
        except KeyError as exc:
            raise ConfigurationError(
                f"model {self.name!r} has no vector for sentence {exc.args[0]}"
            ) from None
        return self.vectors[rows]


def _role_binding(sentence, role: str):
    if role not in sentence.roles:
        raise ConfigurationError(
            f"sentence {sentence.id} has no role {role!r} "
            f"(available: {sorted(sentence.roles)})")
    return sentence.roles[role]


def _check_role(role: str) -> None:
    if role not in ROLE_LABELS:
        raise ConfigurationError(f"unknown role label {role!r}")


def _lookup(lexicon: StaticLexicon, word: str, sentence_id: int) -> np.ndarray:
    if word not in lexicon:
        raise ConfigurationError(
            f"word {word!r} (sentence {sentence_id}) is missing from the "
            f"static lexicon")
    return np.asarray(lexicon.vector(word), dtype=np.float64)


def build_reference(corpus: Corpus, dataset: EmbeddingDataset,
                    role: str, name: str | None = None) -> RepresentationalModel:
    """Contextual vectors for one role, in corpus order. The synthetic
    ``sentence`` role selects whole-sentence vectors."""
    _check_role(role)
    dataset.validate_against(corpus)
    rows = []
    for s in corpus.sentences:
        if role != SENTENCE_ROLE:
            _role_binding(s, role)
        if not dataset.has(s.id, role):
            raise ConfigurationError(
                f"dataset has no ({role!r}) vector for sentence {s.id}")
        rows.append(np.asarray(dataset.vector(s.id, role), dtype=np.float64))
    return RepresentationalModel(
        name=name or f"reference[{role}]",
        sentence_ids=corpus.sentence_ids,
        vectors=np.vstack(rows) if rows else np.zeros((0, 0)),
        provenance={"kind": "contextual_role", "role": role},
    )


def build_concat_hypothesis(corpus: Corpus, lexicon: StaticLexicon,
                            anchor_role: str, context_role: str,
                            name: str | None = None) -> RepresentationalModel:
    """[anchor || context] static lookups; the anchor half is identical across
    sentences sharing the anchor word, which controls for anchor identity."""
    _check_role(anchor_role)
    _check_role(context_role)
    rows = []
    for s in corpus.sentences:
        anchor = _role_binding(s, anchor_role).word
        context = _role_binding(s, context_role).word
        rows.append(np.concatenate([_lookup(lexicon, anchor, s.id),
                                    _lookup(lexicon, context, s.id)]))
    return RepresentationalModel(
        name=name or f"concat[{anchor_role}+{context_role}]",
        sentence_ids=corpus.sentence_ids,
        vectors=np.vstack(rows) if rows else np.zeros((0, 0)),
        provenance={"kind": "static_concat", "anchor_role": anchor_role,
                    "context_role": context_role},
    )


def _draw_distractors(corpus: Corpus, distractor_vocab: Sequence[str],
                      seed) -> list[str]:
    pool = list(dict.fromkeys(distractor_vocab))
    if not pool:
        raise ConfigurationError("distractor vocabulary is empty")
    rng = np.random.default_rng(np.random.SeedSequence(int(seed)))
    picks = []
    for s in corpus.sentences:
        present = set(s.tokens)
        eligible = [w for w in pool if w not in present]
        if not eligible:
            raise ConfigurationError(
                f"sentence {s.id} exhausts the distractor pool: every pool "
                f"word appears in the sentence")
        picks.append(eligible[int(rng.integers(len(eligible)))])
    return picks


def build_null_hypothesis(corpus: Corpus, lexicon: StaticLexicon,
                          anchor_role: str, distractor_vocab: Sequence[str],
                          seed, name: str | None = None) -> RepresentationalModel:
    """[anchor || random pool word absent from the sentence]; distractors are
    fixed per (corpus, seed) so reruns reproduce the model exactly."""
    _check_role(anchor_role)
    picks = _draw_distractors(corpus, distractor_vocab, seed)
    rows = []
    for s, distractor in zip(corpus.sentences, picks):
        anchor = _role_binding(s, anchor_role).word
        rows.append(np.concatenate([_lookup(lexicon, anchor, s.id),
                                    _lookup(lexicon, distractor, s.id)]))
    return RepresentationalModel(
        name=name or f"null[{anchor_role}+random]",
        sentence_ids=corpus.sentence_ids,
        vectors=np.vstack(rows) if rows else np.zeros((0, 0)),
        provenance={"kind": "null_concat", "anchor_role": anchor_role,
                    "seed": int(seed), "pool_size": len(set(distractor_vocab))},
    )


def build_single_hypothesis(corpus: Corpus, lexicon: StaticLexicon,
                            role: str, name: str | None = None
                            ) -> RepresentationalModel:
    """The static vector of one role's word per sentence (no concatenation)."""
    _check_role(role)
    rows = []
    for s in corpus.sentences:
        word = _role_binding(s, role).word
        rows.append(_lookup(lexicon, word, s.id))
    return RepresentationalModel(
        name=name or f"single[{role}]",
        sentence_ids=corpus.sentence_ids,
        vectors=np.vstack(rows) if rows else np.zeros((0, 0)),
        provenance={"kind": "static_single", "role": role},
    )


def build_single_null_hypothesis(corpus: Corpus, lexicon: StaticLexicon,
                                 distractor_vocab: Sequence[str], seed,
                                 name: str | None = None) -> RepresentationalModel:
    """The static vector of a random pool word absent from each sentence."""
    picks = _draw_distractors(corpus, distractor_vocab, seed)
    rows = [_lookup(lexicon, w, s.id)
            for s, w in zip(corpus.sentences, picks)]
    return RepresentationalModel(
        name=name or "single[null]",
        sentence_ids=corpus.sentence_ids,
        vectors=np.vstack(rows) if rows else np.zeros((0, 0)),
        provenance={"kind": "null_single", "seed": int(seed),
                    "pool_size": len(set(distractor_vocab))},
    )


# ---------------------------------------------------------------------------
# declarative recipes (used by experiment spec files)


@dataclass(frozen=True)
class ModelRecipe:
    kind: str
    name: str
    role: str | None = None
    anchor_role: str | None = None
    context_role: str | None = None
    distractor_pool: tuple[str, ...] | None = None
    seed: int | None = None

    def __post_init__(self):
        if self.kind not in RECIPE_KINDS:
            raise ConfigurationError(f"unknown recipe kind {self.kind!r}")
        needs = {
            "contextual_role": ("role",),
            "static_concat": ("anchor_role", "context_role"),
            "static_single": ("role",),
            "null_concat": ("anchor_role", "distractor_pool", "seed"),
            "null_single": ("distractor_pool", "seed"),
        }[self.kind]
        for attr in needs:
            if getattr(self, attr) is None:
                raise ConfigurationError(
                    f"recipe {self.name!r} (kind {self.kind}) requires {attr!r}")


def recipe_from_dict(doc: Mapping, default_name: str = "model") -> ModelRecipe:
    pool = doc.get("distractor_pool")
    return ModelRecipe(
        kind=str(doc.get("kind", "")),
        name=str(doc.get("name", default_name)),
        role=doc.get("role"),
        anchor_role=doc.get("anchor_role"),
        context_role=doc.get("context_role"),
        distractor_pool=tuple(pool) if pool is not None else None,
        seed=doc.get("seed"),
    )


def build_model(recipe: ModelRecipe, corpus: Corpus,
                dataset: EmbeddingDataset | None = None,
                lexicon: StaticLexicon | None = None) -> RepresentationalModel:
    if recipe.kind == "contextual_role":
        if dataset is None:
            raise ConfigurationError(
                f"recipe {recipe.name!r} needs an embedding dataset")
        return build_reference(corpus, dataset, recipe.role, name=recipe.name)
    if lexicon is None:
        raise ConfigurationError(f"recipe {recipe.name!r} needs a static lexicon")
    if recipe.kind == "static_concat":
        return build_concat_hypothesis(corpus, lexicon, recipe.anchor_role,
                                       recipe.context_role, name=recipe.name)
    if recipe.kind == "static_single":
        return build_single_hypothesis(corpus, lexicon, recipe.role,
                                       name=recipe.name)
    if recipe.kind == "null_concat":
        return build_null_hypothesis(corpus, lexicon, recipe.anchor_role,
                                     recipe.distractor_pool, recipe.seed,
                                     name=recipe.name)
    return build_single_null_hypothesis(corpus, lexicon, recipe.distractor_pool,
                                        recipe.seed, name=recipe.name)


def dump_model(model: RepresentationalModel, path,
               corpus_fingerprint: str = "") -> None:
    """Debug dump of a model's vectors in the EMB1 container, keyed by the
    model name as the role class. Models are re-derivable; this exists for
    external inspection only."""
    from .embedstore import EmbeddingDataset, write_dataset

    ds = EmbeddingDataset(corpus_fingerprint=corpus_fingerprint)
    for sid, vec in zip(model.sentence_ids, model.vectors):
        ds.add(sid, model.name, vec.astype(np.float32))
    write_dataset(ds, path)
