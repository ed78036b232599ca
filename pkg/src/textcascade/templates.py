"""Template structures: typed slot-filler records built by stages 3-5."""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field, replace

from .rules import TemplateSchema
from .values import CurrencyValue, DateValue

EMPTY_RENDER = "--"

_ARTICLES = ("the ", "a ", "an ")
_QUOTES = "\"'‘’“”`"


def normalize_text(text: str) -> str:
    """Comparison form of a slot fill: case, quotes, and articles removed."""
    out = text.strip().lower()
    out = out.strip(_QUOTES + " ")
    for article in _ARTICLES:
        if out.startswith(article):
            out = out[len(article):]
            break
    out = re.sub(r"[\"'‘’“”`]", "", out)
    return re.sub(r"\s+", " ", out).strip()


@dataclass(frozen=True)
class Fill:
    """One slot value with everything merging/scoring needs to compare it."""

    text: str
    kind: str = "text"  # text | name | symbol | date | currency | ref
    keys: tuple[str, ...] = ()  # lemma-normalized description keys (per conjunct)
    alias: str = ""             # canonical identity for proper names

    @property
    def norm(self) -> str:
        return normalize_text(self.text)

    @property
    def is_name(self) -> bool:
        return self.kind == "name"

    def identity(self) -> str:
        if self.kind == "name" and self.alias:
            return self.alias
        return self.norm

    def name_words(self) -> frozenset[str]:
        stop = {"co.", "corp.", "inc.", "ltd.", "co", "corp", "inc", "ltd", "the"}
        return frozenset(w for w in self.norm.split() if w not in stop)

    def __str__(self) -> str:
        return self.text


def symbol_fill(text: str) -> Fill:
    return Fill(text, kind="symbol")


def ref_fill(target_id: str) -> Fill:
    return Fill(f"ref:{target_id}", kind="ref")


def date_fill(value: DateValue, prefix: str = "DURING") -> Fill:
    return Fill(f"{prefix}: {value.format()}", kind="date")


def currency_fill(value: CurrencyValue) -> Fill:
    return Fill(value.format(), kind="currency")


SlotValue = object  # None | Fill | list[Fill]


@dataclass(frozen=True)
class Provenance:
    sentence: int
    rule: str
    span: tuple[int, int]
    flags: tuple[str, ...] = ()


@dataclass
class TemplateStructure:
    template_type: str
    schema: TemplateSchema
    slots: dict[str, SlotValue] = field(default_factory=dict)
    provenance: list[Provenance] = field(default_factory=list)
    id: str = ""

    @classmethod
    def fresh(cls, schema: TemplateSchema, rule: str, sentence: int,
              span: tuple[int, int], flags: tuple[str, ...] = ()) -> "TemplateStructure":
        t = cls(schema.name, schema,
                provenance=[Provenance(sentence, rule, span, flags)])
        for slot in schema.slots:
            if slot.fixed is not None:
                t.slots[slot.name] = symbol_fill(slot.fixed)
        return t

    def value(self, slot: str) -> SlotValue:
        return self.slots.get(slot)

    def set(self, slot: str, value: SlotValue) -> None:
        if value is None:
            return
        if isinstance(value, list) and not value:
            return
        self.slots[slot] = value

    def filled_slots(self) -> list[str]:
        return [s.name for s in self.schema.slots if self.slots.get(s.name) is not None]

    def variable_fill_count(self) -> int:
        """Fills beyond the schema's fixed values."""
        count = 0
        for slot in self.schema.slots:
            if slot.fixed is not None:
                continue
            value = self.slots.get(slot.name)
            if value is None:
                continue
            count += len(value) if isinstance(value, list) else 1
        return count

    def first_position(self) -> tuple[int, int]:
        p = min(self.provenance, key=lambda p: (p.sentence, p.span))
        return (p.sentence, p.span[0])

    # -- rendering ---------------------------------------------------------

    def slot_strings(self) -> list[tuple[str, list[str]]]:
        rows = []
        for slot in self.schema.slots:
            value = self.slots.get(slot.name)
            if value is None:
                rows.append((slot.name, [EMPTY_RENDER]))
            elif isinstance(value, list):
                rows.append((slot.name, [_render(v) for v in value]))
            else:
                rows.append((slot.name, [_render(value)]))
        return rows

    def to_json_dict(self, include_provenance: bool = True) -> dict:
        slots: dict[str, object] = {}
        for slot in self.schema.slots:
            value = self.slots.get(slot.name)
            if value is None:
                continue  # empty slots omitted
            if isinstance(value, list):
                slots[slot.name] = [v.text for v in value]
            else:
                slots[slot.name] = value.text
        out: dict[str, object] = {"type": self.template_type, "slots": slots}
        if self.id:
            out["id"] = self.id
        if include_provenance:
            out["provenance"] = [
                {"sentence": p.sentence, "rule": p.rule, "span": list(p.span),
                 **({"flags": list(p.flags)} if p.flags else {})}
                for p in self.provenance
            ]
        return out


def _render(fill: Fill) -> str:
    if fill.kind in ("symbol", "ref", "currency", "date"):
        return fill.text
    return f'"{fill.text}"'


def canonical_json(structures: list[TemplateStructure],
                   include_provenance: bool = False) -> str:
    docs = [t.to_json_dict(include_provenance) for t in structures]
    return json.dumps(docs, indent=2, sort_keys=True, ensure_ascii=False)


def render_text_table(structures: list[TemplateStructure]) -> str:
    lines: list[str] = []
    for t in structures:
        lines.append(f"{t.id or t.template_type}:")
        rows = t.slot_strings()
        width = max((len(name) for name, _ in rows), default=0) + 1
        for name, values in rows:
            label = f"{name}:".ljust(width + 1)
            lines.append(f"  {label} {values[0]}")
            for extra in values[1:]:
                lines.append(f"  {'':{width + 1}} {extra}")
        lines.append("")
    return "\n".join(lines)
