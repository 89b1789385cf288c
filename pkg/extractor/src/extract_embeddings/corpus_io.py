"""Reader for the role-annotated corpus interchange format: UTF-8 JSON lines,
one header record (grammar fingerprint + seed) followed by one object per
sentence.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path


class CorpusFormatError(ValueError):
    pass


@dataclass(frozen=True)
class Sentence:
    id: int
    tokens: tuple[str, ...]
    roles: dict[str, tuple[int, str]]  # role -> (token index, word)
    template_id: str


@dataclass(frozen=True)
class CorpusFile:
    grammar_fingerprint: str
    seed: int | None
    sentences: tuple[Sentence, ...]

    def fingerprint(self) -> str:
        """SHA-256 over the canonical JSON of header values plus sentence
        records, exactly as the consuming toolkit computes it."""
        doc = {
            "grammar_fingerprint": self.grammar_fingerprint,
            "seed": self.seed,
            "sentences": [
                {
                    "id": s.id,
                    "tokens": list(s.tokens),
                    "roles": {r: {"index": i, "word": w}
                              for r, (i, w) in s.roles.items()},
                    "template_id": s.template_id,
                }
                for s in self.sentences
            ],
        }
        blob = json.dumps(doc, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()

    def vocabulary(self) -> list[str]:
        return sorted({w for s in self.sentences for w in s.tokens})


def read_corpus(path: str | Path) -> CorpusFile:
    p = Path(path)
    if not p.exists():
        raise CorpusFormatError(f"corpus file not found: {p}")
    lines = p.read_text(encoding="utf-8").splitlines()
    if not lines:
        raise CorpusFormatError(f"corpus file {p} is empty")
    try:
        header = json.loads(lines[0])
        fingerprint = header["grammar_fingerprint"]
        seed = header["seed"]
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise CorpusFormatError(f"{p}: bad header line: {exc}") from exc

    sentences = []
    for line_no, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
            roles = {str(label): (int(b["index"]), str(b["word"]))
                     for label, b in rec["roles"].items()}
            sent = Sentence(id=int(rec["id"]),
                            tokens=tuple(str(t) for t in rec["tokens"]),
                            roles=roles,
                            template_id=str(rec["template_id"]))
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise CorpusFormatError(f"{p}: line {line_no}: {exc}") from exc
        for label, (index, word) in sent.roles.items():
            if not 0 <= index < len(sent.tokens) or sent.tokens[index] != word:
                raise CorpusFormatError(
                    f"{p}: sentence {sent.id}: role {label!r} does not point "
                    f"at its word")
        sentences.append(sent)
    return CorpusFile(grammar_fingerprint=str(fingerprint), seed=seed,
                      sentences=tuple(sentences))
