"""Filter a large static word-vector table down to a corpus vocabulary."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable


@dataclass(frozen=True)
class LexiconExport:
    kept: int
    misses: tuple[str, ...]


def export_lexicon(words: Iterable[str], source_path: str | Path,
                   out_path: str | Path,
                   miss_report_path: str | Path | None = None) -> LexiconExport:
    """Copy the rows of ``source_path`` (whitespace `word v1 ... vd` format)
    whose word is in ``words``; absent words go to the miss report. Streaming,
    single pass, source order preserved.
    """
    wanted = set(words)
    found: set[str] = set()
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with Path(source_path).open("r", encoding="utf-8") as src, \
            out_path.open("w", encoding="utf-8") as dst:
        for line in src:
            if not line.strip():
                continue
            word = line.split(" ", 1)[0]
            if word in wanted and word not in found:
                dst.write(line if line.endswith("\n") else line + "\n")
                found.add(word)
    misses = tuple(sorted(wanted - found))
    if miss_report_path is not None:
        Path(miss_report_path).write_text(
            "".join(w + "\n" for w in misses), encoding="utf-8")
    return LexiconExport(kept=len(found), misses=misses)
