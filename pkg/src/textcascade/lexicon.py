"""Lexicon and gazetteer loading.

All word lists share one flat format: UTF-8 TSV, one entry per line,

    surface<TAB>class[,class...]

Multiword entries use spaces in the surface.  A class of the form
``key=value`` is an annotation rather than a membership label
(``lemma=club``, ``month=1``, ``code=NT$``, ``nationality=Japan``,
``alias=gm``).  Lines starting with ``#`` and blank lines are skipped.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

# Core word-class labels; files may introduce finer labels (verb-past,
# quantifier, ...) which the phrase grammars reference by name.
UNKNOWN = "unknown"


@dataclass
class LexEntry:
    surface: str  # lowercased
    classes: frozenset[str]
    annotations: dict[str, str] = field(default_factory=dict)


class Lexicon:
    """Immutable after load; safe to share across pipelines."""

    def __init__(self) -> None:
        self._entries: dict[str, LexEntry] = {}
        # multiword surfaces as lowercased token tuples -> entry
        self._multi: dict[tuple[str, ...], LexEntry] = {}
        self._multi_first: dict[str, int] = {}  # first word -> max length
        self._abbreviations: set[str] = set()

    @classmethod
    def load(cls, paths: Iterable[str | Path]) -> "Lexicon":
        lex = cls()
        for path in paths:
            lex._read(Path(path))
        return lex

    @classmethod
    def from_lines(cls, lines: Iterable[str]) -> "Lexicon":
        lex = cls()
        lex._add_lines(lines, "<memory>")
        return lex

    def _read(self, path: Path) -> None:
        if path.is_dir():
            for child in sorted(path.glob("*.tsv")):
                self._read(child)
            return
        self._add_lines(path.read_text(encoding="utf-8").splitlines(), str(path))

    def _add_lines(self, lines: Iterable[str], source: str) -> None:
        for lineno, raw in enumerate(lines, 1):
            line = raw.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            if "\t" not in line:
                raise ValueError(f"{source}:{lineno}: expected TAB-separated entry")
            surface, classfield = line.split("\t", 1)
            surface = surface.strip()
            classes: set[str] = set()
            annotations: dict[str, str] = {}
            for item in classfield.split(","):
                item = item.strip()
                if not item:
                    continue
                if "=" in item:
                    key, value = item.split("=", 1)
                    annotations[key.strip()] = value.strip()
                else:
                    classes.add(item)
            self._add(surface, classes, annotations)

    def _add(self, surface: str, classes: set[str], annotations: dict[str, str]) -> None:
        key = surface.lower()
        existing = self._entries.get(key)
        if existing is not None:
            classes = set(existing.classes) | classes
            merged = dict(existing.annotations)
            merged.update(annotations)
            annotations = merged
        entry = LexEntry(key, frozenset(classes), annotations)
        self._entries[key] = entry
        words = tuple(key.split(" "))
        if len(words) > 1:
            self._multi[words] = entry
            best = self._multi_first.get(words[0], 0)
            self._multi_first[words[0]] = max(best, len(words))
        if "abbreviation" in classes:
            self._abbreviations.add(key)

    # -- lookup ------------------------------------------------------------

    def entry(self, word: str) -> LexEntry | None:
        return self._entries.get(word.lower())

    def classes(self, word: str) -> frozenset[str]:
        entry = self._entries.get(word.lower())
        return entry.classes if entry else frozenset()

    def has(self, word: str, cls: str) -> bool:
        return cls in self.classes(word)

    def annotation(self, word: str, key: str) -> str | None:
        entry = self._entries.get(word.lower())
        return entry.annotations.get(key) if entry else None

    def lemma(self, word: str) -> str:
        """Lexicon lemma when annotated, else the lowercased word."""
        return self.annotation(word, "lemma") or word.lower()

    def alias(self, word: str) -> str:
        """Canonical alias for gazetteer names ("General Motors" -> "gm")."""
        return self.annotation(word, "alias") or self.lemma(word)

    def is_abbreviation(self, word: str) -> bool:
        return word.lower() in self._abbreviations

    def multiword_at(self, words: list[str], i: int,
                     require_class: str | None = None) -> tuple[int, LexEntry] | None:
        """Longest multiword entry starting at words[i]; words are lowercased."""
        limit = self._multi_first.get(words[i], 0)
        for length in range(min(limit, len(words) - i), 1, -1):
            entry = self._multi.get(tuple(words[i:i + length]))
            if entry is not None and (require_class is None or require_class in entry.classes):
                return length, entry
        return None

    def words_in_class(self, cls: str) -> list[str]:
        return sorted(k for k, e in self._entries.items() if cls in e.classes)
