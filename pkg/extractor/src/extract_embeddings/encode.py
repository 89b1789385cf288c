"""Run a transformer encoder over a role-annotated corpus and collect one
vector per (sentence, role): the hidden state of each role's token (mean of
its wordpieces when a word splits) plus the sentence-initial token's vector
under the synthetic ``sentence`` role.

Sentences are batched by identical subword length, so no padding is ever
introduced and batch size cannot affect the numbers.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch

from .corpus_io import CorpusFile, read_corpus
from .emb1 import write_emb1


class AlignmentError(ValueError):
    pass


@dataclass(frozen=True)
class ExtractionManifest:
    corpus_fingerprint: str
    encoder_id: str
    layer: int  # resolved index into hidden_states; last layer by default
    num_layers: int
    hidden_size: int
    lowercase: bool
    roles: tuple[str, ...]
    subword_merge: str = "mean"
    append_period: bool = True

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), indent=2, sort_keys=True)


def _load_encoder(model_id: str, device: str):
    from transformers import AutoModel, AutoTokenizer

    tokenizer = AutoTokenizer.from_pretrained(model_id)
    if not getattr(tokenizer, "is_fast", False):
        raise AlignmentError(
            f"tokenizer for {model_id!r} does not expose word alignment; "
            f"a fast tokenizer is required")
    model = AutoModel.from_pretrained(model_id)
    model.eval()
    model.to(device)
    return tokenizer, model


def _reconstruct(pieces: list[str]) -> str:
    return "".join(p[2:] if p.startswith("##") else p for p in pieces)


def _word_spans(word_ids: list[int | None]) -> dict[int, list[int]]:
    spans: dict[int, list[int]] = {}
    for pos, wid in enumerate(word_ids):
        if wid is not None:
            spans.setdefault(wid, []).append(pos)
    return spans


def extract(corpus_path: str | Path, model_id: str, out_path: str | Path,
            layer: int = -1, batch_size: int = 32, append_period: bool = True,
            device: str = "cpu") -> ExtractionManifest:
    """Encode every corpus sentence and write the EMB1 dataset plus a
    ``<out>.manifest.json`` sidecar describing how it was produced."""
    corpus = read_corpus(corpus_path)
    tokenizer, model = _load_encoder(str(model_id), device)
    lowercase = bool(getattr(tokenizer, "do_lower_case", False))

    encoded = []
    for s in corpus.sentences:
        words = list(s.tokens) + (["."] if append_period else [])
        enc = tokenizer(words, is_split_into_words=True)
        ids = enc["input_ids"]
        word_ids = enc.word_ids()
        pieces = tokenizer.convert_ids_to_tokens(ids)
        spans = _word_spans(word_ids)
        for label, (index, word) in s.roles.items():
            span = spans.get(index, [])
            if not span:
                raise AlignmentError(
                    f"sentence {s.id}: role word {word!r} produced no "
                    f"subword span")
            rebuilt = _reconstruct([pieces[p] for p in span])
            expected = word.lower() if lowercase else word
            if rebuilt != expected:
                raise AlignmentError(
                    f"sentence {s.id}: role word {word!r} does not align "
                    f"with its subword span (got {rebuilt!r})")
        encoded.append((s, ids, spans))

    # bucket by subword length: no padding, batch size is a pure
    # performance knob
    buckets: dict[int, list[tuple]] = {}
    for item in encoded:
        buckets.setdefault(len(item[1]), []).append(item)

    records: dict[tuple[int, str], np.ndarray] = {}
    roles_seen: set[str] = set()
    num_layers = hidden_size = 0
    with torch.no_grad():
        for length in sorted(buckets):
            group = buckets[length]
            for start in range(0, len(group), batch_size):
                chunk = group[start:start + batch_size]
                input_ids = torch.tensor([ids for _, ids, _ in chunk],
                                         dtype=torch.long, device=device)
                out = model(input_ids=input_ids,
                            attention_mask=torch.ones_like(input_ids),
                            output_hidden_states=True)
                states = out.hidden_states
                num_layers = len(states)
                resolved = layer if layer >= 0 else len(states) + layer
                if not 0 <= resolved < len(states):
                    raise AlignmentError(
                        f"layer {layer} outside the encoder's "
                        f"{len(states)} hidden states")
                hidden = states[resolved].cpu()
                hidden_size = hidden.shape[-1]
                for b, (s, _, spans) in enumerate(chunk):
                    records[(s.id, "sentence")] = \
                        hidden[b, 0].numpy().astype(np.float32)
                    for label, (index, _) in s.roles.items():
                        span = spans[index]
                        vec = hidden[b, span].mean(dim=0)
                        records[(s.id, label)] = vec.numpy().astype(np.float32)
                        roles_seen.add(label)

    write_emb1(out_path, corpus.fingerprint(), records)
    manifest = ExtractionManifest(
        corpus_fingerprint=corpus.fingerprint(),
        encoder_id=str(model_id),
        layer=(layer if layer >= 0 else num_layers + layer),
        num_layers=num_layers,
        hidden_size=hidden_size,
        lowercase=lowercase,
        roles=tuple(sorted(roles_seen)),
        append_period=append_period,
    )
    Path(str(out_path) + ".manifest.json").write_text(
        manifest.to_json() + "\n", encoding="utf-8")
    return manifest
