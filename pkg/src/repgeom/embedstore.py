"""EMB1: a bit-exact little-endian binary container for per-(sentence, role)
float32 embedding vectors, plus the whitespace text loader for static
300-d word vectors.

Layout (all integers little-endian):

    magic      4 bytes   b"EMB1"
    version    u16       currently 1
    fp_len     u16       byte length of the corpus fingerprint string
    fp         fp_len    UTF-8 corpus fingerprint
    n_roles    u16       role-class dictionary size
      per role class (role id = position):
        name_len u16, name UTF-8, dim u32
    n_records  u32
      per record (sorted by sentence id, then role id):
        sentence_id u32, role_id u16, offset u64  # into the payload
    payload    raw float32 vectors, concatenated
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Mapping

import numpy as np

from .errors import ConfigurationError, IntegrityError, LexiconMissError
from .grammar import Corpus, SENTENCE_ROLE

MAGIC = b"EMB1"
VERSION = 1


@dataclass
class EmbeddingDataset:
    """In-memory map (sentence id, role) -> float32 vector, with one declared
    dimension per role class."""

    corpus_fingerprint: str
    dims: dict[str, int] = field(default_factory=dict)
    records: dict[tuple[int, str], np.ndarray] = field(default_factory=dict)

    def add(self, sentence_id: int, role: str, vector: np.ndarray) -> None:
        vec = np.asarray(vector, dtype=np.float32).ravel()
        if not np.all(np.isfinite(vec)):
            raise IntegrityError(
                f"non-finite component in vector for ({sentence_id}, {role})")
        dim = self.dims.setdefault(role, vec.size)
        if vec.size != dim:
            raise IntegrityError(
                f"vector for ({sentence_id}, {role}) has dim {vec.size}, "
                f"role class declares {dim}")
        key = (int(sentence_id), role)
        if key in self.records:
            raise IntegrityError(f"duplicate record for {key}")
        self.records[key] = vec

    def vector(self, sentence_id: int, role: str) -> np.ndarray:
        try:
            return self.records[(sentence_id, role)]
        except KeyError:
            raise ConfigurationError(
                f"dataset has no vector for sentence {sentence_id}, "
                f"role {role!r}") from None

    def has(self, sentence_id: int, role: str) -> bool:
        return (sentence_id, role) in self.records

    def validate_against(self, corpus: Corpus) -> None:
        """Fingerprint and key check; run before any analysis."""
        actual = corpus.fingerprint()
        if self.corpus_fingerprint != actual:
            raise IntegrityError(
                f"dataset was built for corpus {self.corpus_fingerprint[:12]}..., "
                f"got corpus {actual[:12]}...")
        for sid, role in self.records:
            try:
                sent = corpus.by_id(sid)
            except ConfigurationError:
                raise IntegrityError(
                    f"dataset record references unknown sentence id {sid}") from None
            if role != SENTENCE_ROLE and role not in sent.roles:
                raise IntegrityError(
                    f"dataset record ({sid}, {role!r}) names a role absent "
                    f"from the sentence")


# ---------------------------------------------------------------------------
# binary writer / reader


def write_dataset(dataset: EmbeddingDataset, path: str | Path) -> None:
    roles = sorted(dataset.dims)
    role_ids = {r: i for i, r in enumerate(roles)}
    keys = sorted(dataset.records, key=lambda k: (k[0], role_ids[k[1]]))

    out = bytearray()
    out += MAGIC
    out += struct.pack("<H", VERSION)
    fp = dataset.corpus_fingerprint.encode("utf-8")
    out += struct.pack("<H", len(fp))
    out += fp
    out += struct.pack("<H", len(roles))
    for r in roles:
        name = r.encode("utf-8")
        out += struct.pack("<H", len(name))
        out += name
        out += struct.pack("<I", dataset.dims[r])
    out += struct.pack("<I", len(keys))
    offset = 0
    payload = bytearray()
    for sid, role in keys:
        out += struct.pack("<IHQ", sid, role_ids[role], offset)
        raw = dataset.records[(sid, role)].astype("<f4", copy=False).tobytes()
        payload += raw
        offset += len(raw)
    out += payload
    Path(path).write_bytes(bytes(out))


class _Reader:
    """Tracks the absolute byte offset so errors can cite it."""

    def __init__(self, fh, path: Path):
        self.fh = fh
        self.pos = 0
        self.path = path

    def take(self, n: int, what: str) -> bytes:
        chunk = self.fh.read(n)
        if len(chunk) != n:
            raise IntegrityError(
                f"{self.path}: truncated while reading {what} at byte offset "
                f"{self.pos} (need {n} bytes, got {len(chunk)})")
        self.pos += n
        return chunk

    def unpack(self, fmt: str, what: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt), what))


def iter_records(path: str | Path) -> Iterator[tuple[str, object, object]]:
    """Streaming reader. Yields ("header", fingerprint, dims) once, then one
    ("record", (sentence_id, role), vector) per entry; only the index plus the
    current record's vector are held in memory at any time.
    """
    p = Path(path)
    if not p.exists():
        raise ConfigurationError(f"dataset file not found: {p}")
    with p.open("rb") as fh:
        cur = _Reader(fh, p)

        magic = cur.take(4, "magic")
        if magic != MAGIC:
            raise IntegrityError(f"{p}: bad magic {magic!r} at byte offset 0")
        (version,) = cur.unpack("<H", "version")
        if version != VERSION:
            raise IntegrityError(
                f"{p}: unsupported version {version} at byte offset 4")
        (fp_len,) = cur.unpack("<H", "fingerprint length")
        fingerprint = cur.take(fp_len, "fingerprint").decode("utf-8")
        (n_roles,) = cur.unpack("<H", "role count")
        roles: list[str] = []
        dims: dict[str, int] = {}
        for _ in range(n_roles):
            (name_len,) = cur.unpack("<H", "role name length")
            name = cur.take(name_len, "role name").decode("utf-8")
            (dim,) = cur.unpack("<I", "role dimension")
            if name in dims:
                raise IntegrityError(f"{p}: duplicate role class {name!r}")
            roles.append(name)
            dims[name] = dim
        (n_records,) = cur.unpack("<I", "record count")

        index = []
        seen: set[tuple[int, int]] = set()
        for i in range(n_records):
            sid, role_id, offset = cur.unpack("<IHQ", f"index entry {i}")
            if role_id >= len(roles):
                raise IntegrityError(
                    f"{p}: index entry {i} has unknown role id {role_id} "
                    f"at byte offset {cur.pos - 14}")
            if (sid, role_id) in seen:
                raise IntegrityError(
                    f"{p}: duplicate record for sentence {sid}, "
                    f"role {roles[role_id]!r}")
            seen.add((sid, role_id))
            index.append((sid, role_id, offset))

        payload_start = cur.pos
        yield ("header", fingerprint, dims)

        expected = 0
        for sid, role_id, offset in index:
            role = roles[role_id]
            if offset != expected:
                raise IntegrityError(
                    f"{p}: record ({sid}, {role!r}) offset {offset} != expected "
                    f"{expected} (payload starts at byte {payload_start})")
            start = payload_start + offset
            raw = cur.take(4 * dims[role], f"vector for ({sid}, {role!r})")
            vec = np.frombuffer(raw, dtype="<f4")
            if not np.all(np.isfinite(vec)):
                raise IntegrityError(
                    f"{p}: non-finite component in vector for ({sid}, {role!r}) "
                    f"at byte offset {start}")
            expected += len(raw)
            yield ("record", (sid, role), vec)
        if fh.read(1):
            raise IntegrityError(
                f"{p}: trailing bytes after payload (payload ends at byte "
                f"{payload_start + expected})")


def read_dataset(path: str | Path) -> EmbeddingDataset:
    it = iter_records(path)
    _, fingerprint, dims = next(it)
    ds = EmbeddingDataset(corpus_fingerprint=fingerprint, dims=dict(dims))
    for _, key, vec in it:
        sid, role = key
        ds.records[(sid, role)] = vec
    return ds


# ---------------------------------------------------------------------------
# static lexicon (whitespace text format: word v1 ... vd)


@dataclass
class StaticLexicon:
    dim: int
    source: str
    table: dict[str, np.ndarray]

    def __len__(self) -> int:
        return len(self.table)

    def __contains__(self, word: str) -> bool:
        return word in self.table

    def vector(self, word: str) -> np.ndarray:
        try:
            return self.table[word]
        except KeyError:
            raise LexiconMissError(
                f"word {word!r} is not in the static lexicon "
                f"({self.source})") from None


def load_static_lexicon(path: str | Path, expected_dim: int) -> StaticLexicon:
    p = Path(path)
    if not p.exists():
        raise ConfigurationError(f"lexicon file not found: {p}")
    table: dict[str, np.ndarray] = {}
    with p.open("r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            parts = line.rstrip("\n").split(" ")
            word, values = parts[0], parts[1:]
            if len(values) != expected_dim:
                raise IntegrityError(
                    f"{p}: line {line_no} has {len(values)} components, "
                    f"expected {expected_dim}")
            try:
                vec = np.array(values, dtype=np.float32)
            except ValueError as exc:
                raise IntegrityError(
                    f"{p}: line {line_no}: non-numeric component: {exc}") from exc
            if not np.all(np.isfinite(vec)):
                raise IntegrityError(f"{p}: line {line_no}: non-finite component")
            if word in table:
                raise IntegrityError(
                    f"{p}: line {line_no}: duplicate word {word!r}")
            table[word] = vec
    return StaticLexicon(dim=expected_dim, source=str(p), table=table)
