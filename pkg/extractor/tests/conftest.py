"""Fixtures: a tiny randomly-initialized BERT saved locally, so every test
runs offline; real checkpoints slot in through the same paths."""

from __future__ import annotations

import json

import pytest
import torch

SPECIALS = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"]

BASE_WORDS = ["the", "a", "doctor", "doctors", "car", "cars", "by", "near",
              "is", "are", "ugly", "tall", ".", "paint", "##er", "law",
              "##yer", "swims", "talks", "person", "nurse", "teacher"]


def build_model_dir(path, words, hidden_size=32, layers=2, seed=0):
    from transformers import BertConfig, BertModel, BertTokenizerFast

    path.mkdir(parents=True, exist_ok=True)
    vocab = SPECIALS + sorted(set(words))
    vocab_file = path / "vocab.txt"
    vocab_file.write_text("\n".join(vocab) + "\n", encoding="utf-8")
    tokenizer = BertTokenizerFast(vocab=str(vocab_file), do_lower_case=True)
    tokenizer.save_pretrained(str(path))
    config = BertConfig(
        vocab_size=len(vocab),
        hidden_size=hidden_size,
        num_hidden_layers=layers,
        num_attention_heads=2,
        intermediate_size=2 * hidden_size,
        max_position_embeddings=64,
    )
    torch.manual_seed(seed)
    model = BertModel(config)
    model.eval()
    model.save_pretrained(str(path))
    return path


@pytest.fixture(scope="session")
def model_dir(tmp_path_factory):
    return build_model_dir(tmp_path_factory.mktemp("tiny-bert"), BASE_WORDS)


def write_corpus(path, sentences, grammar_fingerprint="g-fp", seed=7):
    """Write the corpus interchange format by hand."""
    lines = [json.dumps({"grammar_fingerprint": grammar_fingerprint,
                         "seed": seed}, sort_keys=True,
                        separators=(",", ":"))]
    for rec in sentences:
        lines.append(json.dumps(rec, sort_keys=True, separators=(",", ":")))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def pp_sentence(sid, subject, non_argument, copula="is", adj="ugly"):
    tokens = ["the", subject, "by", "the", non_argument, copula, adj]
    return {
        "id": sid,
        "tokens": tokens,
        "roles": {
            "subject": {"index": 1, "word": subject},
            "non_argument": {"index": 4, "word": non_argument},
            "verb": {"index": 5, "word": copula},
        },
        "template_id": "pp",
    }


@pytest.fixture
def pp_corpus_file(tmp_path):
    sentences = [
        pp_sentence(0, "doctor", "car"),
        pp_sentence(1, "car", "doctor"),
        pp_sentence(2, "doctors", "cars", copula="are"),
        pp_sentence(3, "nurse", "teacher", adj="tall"),
        pp_sentence(4, "painter", "car"),  # splits into paint + ##er
    ]
    return write_corpus(tmp_path / "corpus.jsonl", sentences)
