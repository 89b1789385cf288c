"""Writer for the EMB1 binary container (little-endian):

    magic "EMB1", version u16 = 1,
    fingerprint (u16 length + UTF-8),
    role dictionary (u16 count; per class: u16 name length, name, u32 dim),
    index (u32 count; per record: u32 sentence id, u16 role id, u64 offset),
    payload of raw float32 vectors.

This is an independent implementation of the documented interchange format;
the consuming toolkit's reader is the compatibility oracle in the tests.
"""

from __future__ import annotations

import os
import struct
import tempfile
from pathlib import Path

import numpy as np


class Emb1Error(ValueError):
    pass


def write_emb1(path: str | Path,
               corpus_fingerprint: str,
               records: dict[tuple[int, str], np.ndarray]) -> None:
    """Atomically write records (sentence id, role) -> float32 vector."""
    dims: dict[str, int] = {}
    for (sid, role), vec in records.items():
        vec = np.asarray(vec)
        if vec.ndim != 1:
            raise Emb1Error(f"vector for ({sid}, {role!r}) is not 1-d")
        if not np.all(np.isfinite(vec)):
            raise Emb1Error(f"non-finite component in ({sid}, {role!r})")
        dim = dims.setdefault(role, vec.size)
        if vec.size != dim:
            raise Emb1Error(
                f"({sid}, {role!r}) has dim {vec.size}, class declares {dim}")

    roles = sorted(dims)
    role_ids = {r: i for i, r in enumerate(roles)}
    keys = sorted(records, key=lambda k: (k[0], role_ids[k[1]]))

    out = bytearray()
    out += b"EMB1"
    out += struct.pack("<H", 1)
    fp = corpus_fingerprint.encode("utf-8")
    out += struct.pack("<H", len(fp))
    out += fp
    out += struct.pack("<H", len(roles))
    for r in roles:
        name = r.encode("utf-8")
        out += struct.pack("<H", len(name))
        out += name
        out += struct.pack("<I", dims[r])
    out += struct.pack("<I", len(keys))
    payload = bytearray()
    offset = 0
    for sid, role in keys:
        out += struct.pack("<IHQ", sid, role_ids[role], offset)
        raw = np.ascontiguousarray(records[(sid, role)],
                                   dtype="<f4").tobytes()
        payload += raw
        offset += len(raw)
    out += payload

    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=target.parent, suffix=".emb1.tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(bytes(out))
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_emb1(path: str | Path):
    """Minimal reader used for self-checks; returns (fingerprint, records)."""
    buf = Path(path).read_bytes()
    pos = 0

    def take(n):
        nonlocal pos
        if pos + n > len(buf):
            raise Emb1Error(f"truncated at byte {pos}")
        chunk = buf[pos:pos + n]
        pos += n
        return chunk

    if take(4) != b"EMB1":
        raise Emb1Error("bad magic")
    (version,) = struct.unpack("<H", take(2))
    if version != 1:
        raise Emb1Error(f"unsupported version {version}")
    (fp_len,) = struct.unpack("<H", take(2))
    fingerprint = take(fp_len).decode("utf-8")
    (n_roles,) = struct.unpack("<H", take(2))
    roles = []
    dims = {}
    for _ in range(n_roles):
        (name_len,) = struct.unpack("<H", take(2))
        name = take(name_len).decode("utf-8")
        (dim,) = struct.unpack("<I", take(4))
        roles.append(name)
        dims[name] = dim
    (n_records,) = struct.unpack("<I", take(4))
    index = [struct.unpack("<IHQ", take(14)) for _ in range(n_records)]
    records = {}
    for sid, role_id, offset in index:
        role = roles[role_id]
        vec = np.frombuffer(buf, dtype="<f4", count=dims[role],
                            offset=pos + offset).copy()
        records[(sid, role)] = vec
    return fingerprint, records
