"""Stage 5: merging structures.

Document-scope agglomeration of template structures by internal noun-group
structure, nearness (sentence distance), and slot-by-slot compatibility;
identity coreference for entities, and inferential coreference links
(a tie-up implies an activity) via structure references.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .complex_phrases import EntityStructure
from .lexicon import Lexicon
from .rules import RuleSet
from .templates import Fill, TemplateStructure, normalize_text, ref_fill


@dataclass(frozen=True)
class MergeDecision:
    left: str
    right: str
    verdict: str  # "merge" | "block"
    reason: str

    def to_json_dict(self) -> dict:
        return {"left": self.left, "right": self.right,
                "verdict": self.verdict, "reason": self.reason}


class MergeConfig:
    """Compatibility machinery configured by the MERGE rule-file section."""

    def __init__(self, rules: RuleSet, lexicon: Lexicon):
        self.rules = rules
        self.settings = rules.merge
        self.lexicon = lexicon

    def key_at_most(self, child: str, parent: str) -> bool:
        return child == parent or parent in self.settings.ancestors(child)

    def description_at_most(self, a: Fill, b: Fill) -> bool:
        """Every reading of a is equal to or more specific than one of b."""
        a_keys = a.keys or (a.norm,)
        b_keys = b.keys or (b.norm,)
        specific = [k for k in a_keys if k not in _vague_tail(a_keys)] or list(a_keys)
        return all(any(self.key_at_most(ka, kb) for kb in b_keys) for ka in specific)

    def synonyms(self, a: Fill, b: Fill) -> bool:
        for ka in a.keys or (a.norm,):
            for kb in b.keys or (b.norm,):
                if self.settings.synonym_of(ka, kb):
                    return True
        return False


def _vague_tail(keys) -> set[str]:
    # the bare-head key is the vaguest reading; ignore it when a more
    # specific modifier+head key exists
    return {keys[-1]} if len(keys) > 1 else set()


def _names_overlap(a: Fill, b: Fill) -> bool:
    if a.identity() == b.identity():
        return True
    wa, wb = a.name_words(), b.name_words()
    if not wa or not wb:
        return False
    return wa <= wb or wb <= wa


def _fill_compatible(a: Fill, b: Fill, cfg: MergeConfig) -> tuple[bool, Fill | None, str]:
    if a.kind in ("symbol", "ref", "currency") or b.kind in ("symbol", "ref", "currency"):
        if a.text == b.text or a.norm == b.norm:
            return True, a, "equal"
        return False, None, f"fixed values differ: {a.text!r} vs {b.text!r}"
    if a.kind == "date" or b.kind == "date":
        if a.norm == b.norm:
            return True, a, "equal"
        return False, None, f"dates differ: {a.text!r} vs {b.text!r}"
    if a.is_name and b.is_name:
        if a.identity() == b.identity():
            return True, _more_precise_text(a, b), "same name"
        return False, None, f"distinct names: {a.text!r} vs {b.text!r}"
    if a.is_name != b.is_name:
        # a name corefers with a compatible description; the name wins
        return True, (a if a.is_name else b), "name absorbs description"
    if a.norm == b.norm:
        return True, _more_precise_text(a, b), "equal"
    if cfg.description_at_most(a, b):
        return True, a, "more precise description wins"
    if cfg.description_at_most(b, a):
        return True, b, "more precise description wins"
    if cfg.synonyms(a, b):
        return True, _more_precise_text(a, b), "synonymous descriptions"
    return False, None, f"incompatible descriptions: {a.text!r} vs {b.text!r}"


def _more_precise_text(a: Fill, b: Fill) -> Fill:
    return max((a, b), key=lambda f: (len(f.norm), f.norm, f.text))


def _as_list(value) -> list[Fill]:
    if value is None:
        return []
    return list(value) if isinstance(value, list) else [value]


def _list_compatible(a: list[Fill], b: list[Fill],
                     cfg: MergeConfig) -> tuple[bool, list[Fill] | None, str]:
    names_a = [f for f in a if f.is_name]
    names_b = [f for f in b if f.is_name]
    if names_a and names_b:
        if not any(_names_overlap(x, y) for x in names_a for y in names_b):
            return False, None, "no overlap between proper-name sets"
    merged = list(a)
    for item in b:
        replaced = False
        for i, existing in enumerate(merged):
            if existing.identity() == item.identity():
                merged[i] = _more_precise_text(existing, item)
                replaced = True
                break
        if not replaced:
            merged.append(item)
    return True, merged, "union"


def compatible(a: TemplateStructure, b: TemplateStructure, cfg: MergeConfig) -> bool:
    ok, _, _ = _compatibility(a, b, cfg)
    return ok


def _compatibility(a: TemplateStructure, b: TemplateStructure,
                   cfg: MergeConfig) -> tuple[bool, dict, str]:
    if a.template_type != b.template_type:
        raise ValueError("compatibility is defined within one template type")
    merged: dict[str, object] = {}
    for slot in a.schema.slots:
        va, vb = a.slots.get(slot.name), b.slots.get(slot.name)
        if va is None and vb is None:
            continue
        if va is None or vb is None:
            merged[slot.name] = va if va is not None else vb
            continue
        if isinstance(va, list) or isinstance(vb, list) or slot.kind == "list":
            ok, value, reason = _list_compatible(_as_list(va), _as_list(vb), cfg)
        else:
            ok, value, reason = _fill_compatible(va, vb, cfg)
        if not ok:
            return False, {}, f"{slot.name}: {reason}"
        merged[slot.name] = value
    return True, merged, "all co-filled slots compatible"


def merge_pair(a: TemplateStructure, b: TemplateStructure,
               cfg: MergeConfig) -> TemplateStructure:
    ok, merged_slots, reason = _compatibility(a, b, cfg)
    if not ok:
        raise ValueError(f"merge_pair on incompatible structures: {reason}")
    out = TemplateStructure(a.template_type, a.schema,
                            provenance=list(a.provenance) + [p for p in b.provenance
                                                             if p not in a.provenance])
    for slot in a.schema.slots:
        if slot.name in merged_slots:
            out.slots[slot.name] = merged_slots[slot.name]
    return out


def merge_document(structures: list[TemplateStructure],
                   entities: list[EntityStructure],
                   cfg: MergeConfig) -> tuple[list[TemplateStructure],
                                              list[EntityStructure],
                                              list[MergeDecision]]:
    decisions: list[MergeDecision] = []
    merged: list[TemplateStructure] = []
    labels: dict[int, str] = {}

    ordered = sorted(structures, key=lambda s: s.first_position())
    for serial, s in enumerate(ordered):
        label = f"{s.template_type.lower()}@{s.first_position()[0]}.{serial}"
        candidates = [m for m in merged if m.template_type == s.template_type]
        candidates.sort(key=lambda m: (abs(_last_sentence(m) - s.first_position()[0]),
                                       m.first_position()))
        target = None
        for m in candidates:
            distance = abs(_last_sentence(m) - s.first_position()[0])
            if cfg.settings.nearness_limit is not None and \
                    distance > cfg.settings.nearness_limit:
                decisions.append(MergeDecision(labels[id(m)], label, "block",
                                               f"distance {distance} over limit"))
                continue
            ok, _, reason = _compatibility(m, s, cfg)
            decisions.append(MergeDecision(labels[id(m)], label,
                                           "merge" if ok else "block", reason))
            if ok:
                target = m
                break
        if target is None:
            merged.append(s)
            labels[id(s)] = label
        else:
            combined = merge_pair(target, s, cfg)
            labels[id(combined)] = labels.pop(id(target))
            merged[merged.index(target)] = combined

    merged.sort(key=lambda t: (t.template_type, t.first_position()))
    counters: dict[str, int] = {}
    for t in merged:
        counters[t.template_type] = counters.get(t.template_type, 0) + 1
        t.id = f"{t.template_type}-{counters[t.template_type]}"

    _apply_links(merged, cfg)
    out_entities = _merge_entities(entities, cfg)
    return merged, out_entities, decisions


def _last_sentence(t: TemplateStructure) -> int:
    return max(p.sentence for p in t.provenance)


def _apply_links(merged: list[TemplateStructure], cfg: MergeConfig) -> None:
    """Inferential coreference: fill declared ref slots with pointers."""
    for template, slot, target_type in cfg.settings.links:
        attached: set[str] = set()
        for t in merged:
            value = t.slots.get(slot) if t.template_type == template else None
            if isinstance(value, Fill) and value.kind == "ref":
                attached.add(value.text.removeprefix("ref:"))
        for t in merged:
            if t.template_type != template or t.slots.get(slot) is not None:
                continue
            for candidate in merged:
                if candidate.template_type != target_type or candidate.id in attached:
                    continue
                t.slots[slot] = ref_fill(candidate.id)
                attached.add(candidate.id)
                break


def _desc_key(text: str, lexicon: Lexicon) -> str:
    words = normalize_text(text).split()
    return " ".join(lexicon.lemma(w) for w in words)


def _merge_entities(entities: list[EntityStructure],
                    cfg: MergeConfig) -> list[EntityStructure]:
    out: list[EntityStructure] = []
    for entity in entities:
        target = None
        for existing in out:
            if existing.entity_type != entity.entity_type:
                continue
            if entity.alias and existing.alias:
                if entity.alias == existing.alias:
                    target = existing
                    break
                continue
            if entity.name or existing.name:
                named, described = (existing, entity) if existing.name else (entity, existing)
                if described.name:
                    continue
                if _entity_descriptions_consistent(named, described, cfg):
                    target = existing
                    break
                continue
            if {normalize_text(d) for d in entity.descriptions} & \
                    {normalize_text(d) for d in existing.descriptions}:
                target = existing
                break
        if target is None:
            out.append(EntityStructure(entity.entity_type, entity.name,
                                       list(entity.descriptions),
                                       dict(entity.attributes),
                                       entity.sentence, entity.alias))
        else:
            _absorb(target, entity, cfg)
    return out


def _entity_descriptions_consistent(named: EntityStructure,
                                    described: EntityStructure,
                                    cfg: MergeConfig) -> bool:
    if not named.descriptions:
        return True
    have = [_desc_key(d, cfg.lexicon) for d in named.descriptions]
    want = [_desc_key(d, cfg.lexicon) for d in described.descriptions]
    for k in want:
        for h in have:
            if k == h or cfg.key_at_most(k, h) or cfg.key_at_most(h, k) \
                    or cfg.settings.synonym_of(k, h):
                return True
    return False


def _absorb(target: EntityStructure, extra: EntityStructure, cfg: MergeConfig) -> None:
    if extra.name and not target.name:
        target.name = extra.name
        target.alias = extra.alias
    for desc in extra.descriptions:
        if normalize_text(desc) not in {normalize_text(d) for d in target.descriptions}:
            target.descriptions.append(desc)
    for key, value in extra.attributes.items():
        target.attributes.setdefault(key, value)
