"""Weighted template grammars and deterministic corpus generation.

A grammar is a set of flat token templates whose slots draw from weighted,
number-marked vocabularies. Generation draws a template, then slot words,
i.i.d. from the declared weights; sentences violating declarative
constraints (slot inequality, number agreement) are dropped, and duplicates
are removed on the full token sequence.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from functools import cached_property
from itertools import product
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .errors import ConfigurationError, IntegrityError

# closed role enum; "sentence" is reserved for the synthetic [CLS]-style role
# and may not be assigned to a template slot
ROLE_LABELS = (
    "verb", "subject", "non_argument", "pronoun", "antecedent",
    "non_antecedent", "object", "subj_adj", "obj_adj", "sentence",
)
SENTENCE_ROLE = "sentence"

CONSTRAINT_KINDS = ("distinct_words", "number_agreement")


@dataclass(frozen=True)
class VocabEntry:
    word: str
    number: str | None = None  # "singular" | "plural" | None
    weight: float = 1.0


@dataclass(frozen=True)
class Slot:
    """Either a literal token (text set) or a draw from a vocabulary class."""

    text: str | None = None
    vocab_class: str | None = None
    role: str | None = None


@dataclass(frozen=True)
class Template:
    id: str
    slots: tuple[Slot, ...]
    weight: float = 1.0


@dataclass(frozen=True)
class Constraint:
    kind: str
    roles: tuple[str, ...]


@dataclass(frozen=True)
class TemplateGrammar:
    name: str
    templates: tuple[Template, ...]
    vocabularies: Mapping[str, tuple[VocabEntry, ...]]
    constraints: tuple[Constraint, ...] = ()

    def validate(self) -> None:
        if not self.templates:
            raise ConfigurationError(f"grammar {self.name!r} has no templates")
        seen_words: dict[str, str] = {}
        for cls, entries in self.vocabularies.items():
            if not entries:
                raise ConfigurationError(f"vocabulary class {cls!r} is empty")
            for e in entries:
                if not (e.weight > 0 and np.isfinite(e.weight)):
                    raise ConfigurationError(
                        f"word {e.word!r} in class {cls!r} has non-positive weight")
                if e.number not in (None, "singular", "plural"):
                    raise ConfigurationError(
                        f"word {e.word!r} has invalid number {e.number!r}")
                if e.word in seen_words:
                    raise ConfigurationError(
                        f"word {e.word!r} appears in classes "
                        f"{seen_words[e.word]!r} and {cls!r}")
                seen_words[e.word] = cls
        for t in self.templates:
            if not (t.weight > 0 and np.isfinite(t.weight)):
                raise ConfigurationError(f"template {t.id!r} has non-positive weight")
            roles_here = []
            for s in t.slots:
                if (s.text is None) == (s.vocab_class is None):
                    raise ConfigurationError(
                        f"template {t.id!r}: each slot needs exactly one of text/class")
                if s.vocab_class is not None and s.vocab_class not in self.vocabularies:
                    raise ConfigurationError(
                        f"template {t.id!r} references missing vocabulary "
                        f"{s.vocab_class!r}")
                if s.role is not None:
                    if s.role not in ROLE_LABELS or s.role == SENTENCE_ROLE:
                        raise ConfigurationError(
                            f"template {t.id!r} uses invalid role {s.role!r}")
                    roles_here.append(s.role)
            if len(roles_here) != len(set(roles_here)):
                raise ConfigurationError(f"template {t.id!r} repeats a role label")
        for c in self.constraints:
            if c.kind not in CONSTRAINT_KINDS:
                raise ConfigurationError(f"unknown constraint kind {c.kind!r}")
            if len(c.roles) < 2:
                raise ConfigurationError(f"constraint {c.kind} needs >= 2 roles")

    def word_number(self, word: str) -> str | None:
        for entries in self.vocabularies.values():
            for e in entries:
                if e.word == word:
                    return e.number
        return None

    def class_words(self, vocab_class: str) -> tuple[str, ...]:
        return tuple(e.word for e in self.vocabularies[vocab_class])

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "templates": [
                {
                    "id": t.id,
                    "weight": t.weight,
                    "slots": [
                        {"text": s.text} if s.text is not None else
                        ({"class": s.vocab_class, "role": s.role}
                         if s.role is not None else {"class": s.vocab_class})
                        for s in t.slots
                    ],
                }
                for t in self.templates
            ],
            "vocabularies": {
                cls: [
                    {"word": e.word, "number": e.number, "weight": e.weight}
                    for e in entries
                ]
                for cls, entries in self.vocabularies.items()
            },
            "constraints": [
                {"type": c.kind, "roles": list(c.roles)} for c in self.constraints
            ],
        }

    def fingerprint(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def grammar_from_dict(doc: Mapping) -> TemplateGrammar:
    try:
        templates = []
        for t in doc["templates"]:
            slots = []
            for s in t["slots"]:
                if "text" in s:
                    slots.append(Slot(text=str(s["text"])))
                else:
                    slots.append(Slot(vocab_class=str(s["class"]),
                                      role=s.get("role")))
            templates.append(Template(id=str(t["id"]), slots=tuple(slots),
                                      weight=float(t.get("weight", 1.0))))
        vocabularies = {}
        for cls, entries in doc["vocabularies"].items():
            parsed = []
            for e in entries:
                if isinstance(e, str):
                    parsed.append(VocabEntry(word=e))
                else:
                    parsed.append(VocabEntry(word=str(e["word"]),
                                             number=e.get("number"),
                                             weight=float(e.get("weight", 1.0))))
            vocabularies[str(cls)] = tuple(parsed)
        constraints = tuple(
            Constraint(kind=str(c["type"]), roles=tuple(c["roles"]))
            for c in doc.get("constraints", [])
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigurationError(f"malformed grammar document: {exc}") from exc
    g = TemplateGrammar(name=str(doc.get("name", "grammar")),
                        templates=tuple(templates),
                        vocabularies=vocabularies,
                        constraints=constraints)
    g.validate()
    return g


def load_grammar(path: str | Path) -> TemplateGrammar:
    p = Path(path)
    if not p.exists():
        raise ConfigurationError(f"grammar file not found: {p}")
    try:
        doc = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"grammar file {p} is not valid JSON: {exc}") from exc
    return grammar_from_dict(doc)


# ---------------------------------------------------------------------------
# sentences and corpora


@dataclass(frozen=True)
class RoleBinding:
    index: int
    word: str


@dataclass(frozen=True)
class AnnotatedSentence:
    id: int
    tokens: tuple[str, ...]
    roles: Mapping[str, RoleBinding]
    template_id: str

    def text(self) -> str:
        return " ".join(self.tokens)


@dataclass(frozen=True)
class Corpus:
    grammar_fingerprint: str
    seed: int | None
    sentences: tuple[AnnotatedSentence, ...]

    def __len__(self) -> int:
        return len(self.sentences)

    @property
    def sentence_ids(self) -> tuple[int, ...]:
        return tuple(s.id for s in self.sentences)

    def by_id(self, sentence_id: int) -> AnnotatedSentence:
        try:
            return self._index[sentence_id]
        except KeyError:
            raise ConfigurationError(f"no sentence with id {sentence_id}") from None

    @cached_property
    def _index(self) -> dict[int, AnnotatedSentence]:
        return {s.id: s for s in self.sentences}

    def to_records(self) -> list[dict]:
        return [
            {
                "id": s.id,
                "tokens": list(s.tokens),
                "roles": {r: {"index": b.index, "word": b.word}
                          for r, b in s.roles.items()},
                "template_id": s.template_id,
            }
            for s in self.sentences
        ]

    def fingerprint(self) -> str:
        doc = {
            "grammar_fingerprint": self.grammar_fingerprint,
            "seed": self.seed,
            "sentences": self.to_records(),
        }
        blob = json.dumps(doc, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def _satisfies_constraints(grammar: TemplateGrammar,
                           roles: Mapping[str, RoleBinding]) -> bool:
    for c in grammar.constraints:
        bound = [roles[r] for r in c.roles if r in roles]
        if len(bound) < 2:
            continue
        if c.kind == "distinct_words":
            words = [b.word for b in bound]
            if len(set(words)) != len(words):
                return False
        elif c.kind == "number_agreement":
            numbers = {grammar.word_number(b.word) for b in bound}
            if len(numbers) != 1 or None in numbers:
                return False
    return True


def _dedupe(raw: Iterable[tuple[tuple[str, ...], dict, str]]):
    seen: set[tuple[str, ...]] = set()
    for tokens, roles, template_id in raw:
        if tokens in seen:
            continue
        seen.add(tokens)
        yield tokens, roles, template_id


def _assemble(grammar: TemplateGrammar, seed: int | None, raw) -> Corpus:
    kept = []
    for tokens, roles, template_id in _dedupe(raw):
        if not _satisfies_constraints(grammar, roles):
            continue
        kept.append((tokens, roles, template_id))
    sentences = tuple(
        AnnotatedSentence(id=i, tokens=tokens, roles=roles, template_id=template_id)
        for i, (tokens, roles, template_id) in enumerate(kept)
    )
    return Corpus(grammar_fingerprint=grammar.fingerprint(), seed=seed,
                  sentences=sentences)


def generate_corpus(grammar: TemplateGrammar, target_count: int, seed: int) -> Corpus:
    """Draw up to ``target_count`` sentences, then drop constraint violations
    and duplicate token sequences. Identical (grammar, count, seed) inputs
    produce identical corpora.
    """
    grammar.validate()
    if target_count < 0:
        raise ConfigurationError("target_count must be >= 0")
    rng = np.random.default_rng(np.random.SeedSequence(int(seed)))
    t_weights = np.array([t.weight for t in grammar.templates], dtype=float)
    t_probs = t_weights / t_weights.sum()
    word_tables = {
        cls: (np.array([e.weight for e in entries], dtype=float)
              / sum(e.weight for e in entries),
              [e.word for e in entries])
        for cls, entries in grammar.vocabularies.items()
    }

    raw = []
    for _ in range(target_count):
        t = grammar.templates[int(rng.choice(len(grammar.templates), p=t_probs))]
        tokens = []
        roles: dict[str, RoleBinding] = {}
        for pos, slot in enumerate(t.slots):
            if slot.text is not None:
                word = slot.text
            else:
                probs, words = word_tables[slot.vocab_class]
                word = words[int(rng.choice(len(words), p=probs))]
            if slot.role is not None:
                roles[slot.role] = RoleBinding(index=pos, word=word)
            tokens.append(word)
        raw.append((tuple(tokens), roles, t.id))
    return _assemble(grammar, int(seed), raw)


def enumerate_corpus(grammar: TemplateGrammar) -> Corpus:
    """Every sentence the grammar can produce, in declaration order, with
    constraint violations and duplicates removed.
    """
    grammar.validate()

    def all_raw():
        for t in grammar.templates:
            choices = []
            for slot in t.slots:
                if slot.text is not None:
                    choices.append([slot.text])
                else:
                    choices.append(list(grammar.class_words(slot.vocab_class)))
            for combo in product(*choices):
                roles = {
                    slot.role: RoleBinding(index=pos, word=combo[pos])
                    for pos, slot in enumerate(t.slots)
                    if slot.role is not None
                }
                yield tuple(combo), roles, t.id

    return _assemble(grammar, None, all_raw())


def scan_constraints(corpus: Corpus, grammar: TemplateGrammar) -> list[int]:
    """Sentence ids violating any grammar constraint (should always be empty
    for generated corpora)."""
    return [s.id for s in corpus.sentences
            if not _satisfies_constraints(grammar, s.roles)]


# ---------------------------------------------------------------------------
# corpus files: one JSON object per line, header first


def save_corpus(corpus: Corpus, path: str | Path) -> None:
    p = Path(path)
    lines = [json.dumps({"grammar_fingerprint": corpus.grammar_fingerprint,
                         "seed": corpus.seed},
                        sort_keys=True, separators=(",", ":"))]
    for rec in corpus.to_records():
        lines.append(json.dumps(rec, sort_keys=True, separators=(",", ":")))
    p.write_text("\n".join(lines) + "\n", encoding="utf-8")


_SENTENCE_KEYS = {"id", "tokens", "roles", "template_id"}


def _parse_sentence_record(rec: dict, line_no: int) -> AnnotatedSentence:
    if set(rec) != _SENTENCE_KEYS:
        raise IntegrityError(
            f"line {line_no}: sentence record keys {sorted(rec)} != "
            f"{sorted(_SENTENCE_KEYS)}")
    sid = rec["id"]
    if not isinstance(sid, int) or sid < 0:
        raise IntegrityError(f"line {line_no}: invalid sentence id {sid!r}")
    tokens = rec["tokens"]
    if (not isinstance(tokens, list) or not tokens
            or not all(isinstance(t, str) for t in tokens)):
        raise IntegrityError(f"sentence {sid}: tokens must be a non-empty string list")
    roles = {}
    if not isinstance(rec["roles"], dict):
        raise IntegrityError(f"sentence {sid}: roles must be an object")
    for label, binding in rec["roles"].items():
        if label not in ROLE_LABELS or label == SENTENCE_ROLE:
            raise IntegrityError(f"sentence {sid}: unknown role label {label!r}")
        try:
            index, word = int(binding["index"]), str(binding["word"])
        except (KeyError, TypeError, ValueError):
            raise IntegrityError(
                f"sentence {sid}: malformed binding for role {label!r}") from None
        if not 0 <= index < len(tokens):
            raise IntegrityError(
                f"sentence {sid}: role {label!r} index {index} outside "
                f"{len(tokens)} tokens")
        if tokens[index] != word:
            raise IntegrityError(
                f"sentence {sid}: role {label!r} word {word!r} does not match "
                f"token {tokens[index]!r}")
        roles[label] = RoleBinding(index=index, word=word)
    return AnnotatedSentence(id=sid, tokens=tuple(tokens), roles=roles,
                             template_id=str(rec["template_id"]))


def load_corpus(path: str | Path) -> Corpus:
    p = Path(path)
    if not p.exists():
        raise ConfigurationError(f"corpus file not found: {p}")
    lines = p.read_text(encoding="utf-8").splitlines()
    if not lines:
        raise IntegrityError(f"corpus file {p} is empty")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise IntegrityError(f"line 1: header is not valid JSON: {exc}") from exc
    if not isinstance(header, dict) or "grammar_fingerprint" not in header \
            or "seed" not in header:
        raise IntegrityError("line 1: header must carry grammar_fingerprint and seed")

    sentences = []
    ids_seen: set[int] = set()
    tokens_seen: set[tuple[str, ...]] = set()
    for line_no, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise IntegrityError(f"line {line_no}: invalid JSON: {exc}") from exc
        s = _parse_sentence_record(rec, line_no)
        if s.id in ids_seen:
            raise IntegrityError(f"line {line_no}: duplicate sentence id {s.id}")
        if s.tokens in tokens_seen:
            raise IntegrityError(
                f"line {line_no}: sentence {s.id} duplicates an earlier token sequence")
        ids_seen.add(s.id)
        tokens_seen.add(s.tokens)
        sentences.append(s)
    return Corpus(grammar_fingerprint=str(header["grammar_fingerprint"]),
                  seed=header["seed"], sentences=tuple(sentences))
