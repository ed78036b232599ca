"""Stage 3: complex phrases.

Builds complex noun groups (appositives, measure phrases, of/for
attachment, conjunction) and complex verb groups (equivalence classes
carrying a modality), then constructs the entity and template structures
that this level alone can recognize.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .binding import constraint_matches, eval_fill_expr, head_in_class, make_fill
from .chunker import COMMA, COMPANY, CONJ, NG, NG_LIKE, PREP, VG, Phrase, VerbFeatures
from .lexicon import Lexicon
from .rules import PhraseConstraint, RuleSet, VgClass
from .templates import Fill, TemplateStructure

EXISTING = "Existing"
PLANNED = "Planned"


@dataclass
class Measure:
    quantity: int | float | None
    unit: str
    per_unit: str | None = None


@dataclass
class ComplexPhrase:
    base: Phrase
    appositives: list["ComplexPhrase"] = field(default_factory=list)
    pp_complements: list[tuple[str, "ComplexPhrase"]] = field(default_factory=list)
    measure: Measure | None = None
    conjuncts: list["ComplexPhrase"] = field(default_factory=list)
    modality: str = EXISTING
    equivalence_class: str | None = None
    core: Phrase | None = None           # collapsed verb chains: the final verb group
    consumed: list[Phrase] = field(default_factory=list)

    @property
    def kind(self) -> str:
        return self.base.kind

    @property
    def head_phrase(self) -> Phrase:
        return self.core if self.core is not None else self.base

    @property
    def head_lemma(self) -> str:
        return self.head_phrase.head.lemma_key

    def verb_features(self) -> VerbFeatures | None:
        return self.head_phrase.verb_features

    def span(self) -> tuple[int, int]:
        lo = self.base.span.start
        hi = self.base.span.end
        for group in (self.appositives, self.conjuncts,
                      [c for _, c in self.pp_complements]):
            for cp in group:
                s = cp.span()
                lo, hi = min(lo, s[0]), max(hi, s[1])
        for p in self.consumed:
            lo, hi = min(lo, p.span.start), max(hi, p.span.end)
        return lo, hi

    def constituents(self) -> list[Phrase]:
        """Every Stage 2 phrase folded into this complex phrase."""
        out = [self.base]
        for cp in self.appositives + self.conjuncts + [c for _, c in self.pp_complements]:
            out.extend(cp.constituents())
        out.extend(self.consumed)
        return out

    def conjunct_list(self) -> list["ComplexPhrase"]:
        return self.conjuncts if self.conjuncts else [self]

    def head_is_name(self) -> bool:
        if self.kind == COMPANY:
            return True
        head = self.base.head
        return head.capitalized_unknown or head.kind == "PersonName"

    def name_part(self) -> "ComplexPhrase | None":
        if self.kind == COMPANY or self.head_is_name():
            return self
        for appos in self.appositives:
            if appos.head_is_name():
                return appos
        return None

    def surface(self) -> str:
        return self.base.surface

    def full_surface(self) -> str:
        lo, hi = self.span()
        return self.base.slice(lo, hi)

    def fill_surface(self) -> str:
        """Slot-fill rendering: drops a leading quantity and any per-unit."""
        units = self.base.units
        start = 0
        if self.measure is not None and self.measure.quantity is not None:
            while start < len(units) - 1 and (
                    units[start].surface[0].isdigit()
                    or units[start].classes & {"nummod", "quantifier"}):
                start += 1
        return self.base.slice(units[start].span.start, units[-1].span.end)

    def modifier_surface(self) -> str:
        """Prenominal modifiers without determiners/numbers ("car" of "a car maker")."""
        units = [u for u in self.base.units[:-1]
                 if not (u.classes & {"determiner", "quantifier", "nummod"})
                 and not u.surface[0].isdigit() and u.is_word_like()]
        if not units:
            return ""
        return self.base.slice(units[0].span.start, units[-1].span.end)


@dataclass
class EntityStructure:
    entity_type: str
    name: str | None = None
    descriptions: list[str] = field(default_factory=list)
    attributes: dict[str, str] = field(default_factory=dict)
    sentence: int = 0
    alias: str = ""

    def to_json_dict(self) -> dict:
        out: dict[str, object] = {"type": self.entity_type}
        if self.name:
            out["name"] = self.name
        if self.descriptions:
            out["descriptions"] = self.descriptions
        if self.attributes:
            out["attributes"] = dict(sorted(self.attributes.items()))
        return out


# --------------------------------------------------------------------------
# Attachment passes.  Order: verb conjunction, verb-chain collapse,
# appositives, measures, of/for attachment, noun conjunction.
# --------------------------------------------------------------------------

def build_complex_phrases(phrases: list[Phrase], rules: RuleSet,
                          lexicon: Lexicon) -> list[ComplexPhrase]:
    items = _wrap(phrases)
    items = _conjoin_verb_groups(items)
    items = _collapse_verb_chains(items, rules, lexicon)
    items = _attach_appositives(items)
    items = _attach_measures(items, rules, lexicon)
    items = _attach_pp_complements(items, lexicon)
    items = _conjoin_noun_groups(items)
    items = _drop_shadowed(items)
    for cp in items:
        if cp.kind == VG and cp.equivalence_class is None:
            cp.equivalence_class, cp.modality = _classify_single(cp, rules, lexicon)
    return items


def _wrap(phrases: list[Phrase]) -> list[ComplexPhrase]:
    return [ComplexPhrase(p) for p in phrases]


def _is_plain(cp: ComplexPhrase) -> bool:
    return not (cp.appositives or cp.pp_complements or cp.conjuncts
                or cp.consumed or cp.measure or cp.equivalence_class)


def _drop_shadowed(items: list[ComplexPhrase]) -> list[ComplexPhrase]:
    """Drop plain same-span alternates whose twin got built into a larger phrase."""
    kept = []
    for i, cp in enumerate(items):
        if _is_plain(cp):
            shadowed = any(
                other is not cp and not _is_plain(other)
                and other.span()[0] <= cp.base.span.start
                and cp.base.span.end <= other.span()[1]
                for other in items)
            if shadowed:
                continue
        kept.append(cp)
    return kept


def _conjoin_verb_groups(items: list[ComplexPhrase]) -> list[ComplexPhrase]:
    out: list[ComplexPhrase] = []
    i = 0
    while i < len(items):
        if (i + 2 < len(items) and items[i].kind == VG
                and items[i + 1].kind == CONJ and items[i + 2].kind == VG):
            conjuncts = [items[i], items[i + 2]]
            consumed = [items[i + 1].base]
            j = i + 3
            while j + 1 < len(items) and items[j].kind == CONJ and items[j + 1].kind == VG:
                consumed.append(items[j].base)
                conjuncts.append(items[j + 1])
                j += 2
            out.append(ComplexPhrase(items[i].base, conjuncts=conjuncts,
                                     consumed=consumed))
            i = j
        else:
            out.append(items[i])
            i += 1
    return out


class _SeqMatcher:
    """Backtracking matcher for VERBGROUPS sequences over complex phrases."""

    def __init__(self, vg: VgClass, rules: RuleSet, lexicon: Lexicon):
        self.vg = vg
        self.rules = rules
        self.lexicon = lexicon

    def _element_ok(self, element: PhraseConstraint, cp: ComplexPhrase) -> bool:
        if element.core:
            if cp.kind != VG:
                return False
            from .binding import voice_accepts
            ok, _ = voice_accepts(element.voice, cp)
            if not ok:
                return False
            if cp.equivalence_class == self.vg.name:
                return True
            return any(head_in_class(c, self.vg.core_class, self.rules, self.lexicon)
                       for c in cp.conjunct_list())
        ok, _ = constraint_matches(cp, element, self.rules, self.lexicon)
        return ok

    def match(self, items: list[ComplexPhrase], start: int,
              elements: list, k: int = 0) -> int | None:
        """Return end index (exclusive) of a full-sequence match, else None."""
        if k == len(elements):
            return start
        element = elements[k]
        if element.optional:
            if start < len(items) and self._element_ok(element, items[start]):
                longer = self.match(items, start + 1, elements, k + 1)
                if longer is not None:
                    return longer
            return self.match(items, start, elements, k + 1)
        if start < len(items) and self._element_ok(element, items[start]):
            return self.match(items, start + 1, elements, k + 1)
        return None


def _collapse_verb_chains(items: list[ComplexPhrase], rules: RuleSet,
                          lexicon: Lexicon) -> list[ComplexPhrase]:
    changed = True
    guard = 0
    while changed and guard < 100:
        changed = False
        guard += 1
        for vg in rules.vgclasses:
            matcher = _SeqMatcher(vg, rules, lexicon)
            for seq in vg.sequences:
                for start in range(len(items) - 1, -1, -1):
                    end = matcher.match(items, start, seq.elements)
                    if end is None or end - start < 2:
                        continue
                    covered = items[start:end]
                    core_cp = covered[-1]
                    modality = _sequence_modality(seq.modality, core_cp)
                    collapsed = ComplexPhrase(
                        core_cp.base,
                        conjuncts=core_cp.conjuncts,
                        equivalence_class=vg.name,
                        modality=modality,
                        core=core_cp.head_phrase,
                        consumed=[p for cp in covered[:-1] for p in cp.constituents()]
                                 + core_cp.consumed,
                    )
                    items = items[:start] + [collapsed] + items[end:]
                    changed = True
                    break
                if changed:
                    break
            if changed:
                break
    return items


def _sequence_modality(declared: str | None, core: ComplexPhrase) -> str:
    if declared:
        return declared
    if core.equivalence_class is not None:
        return core.modality
    features = core.verb_features()
    if features is not None and features.future:
        return PLANNED
    return EXISTING


def _classify_single(cp: ComplexPhrase, rules: RuleSet,
                     lexicon: Lexicon) -> tuple[str | None, str]:
    features = cp.verb_features()
    modality = PLANNED if features is not None and features.future else EXISTING
    for vg in rules.vgclasses:
        if any(head_in_class(c, vg.core_class, rules, lexicon)
               for c in cp.conjunct_list()):
            return vg.name, modality
    return None, modality


def classify_complex_verb_group(phrases: list[Phrase], rules: RuleSet,
                                lexicon: Lexicon) -> tuple[str | None, str]:
    """(equivalence class, modality) for a verb-group-initiated sequence."""
    items = _collapse_verb_chains(_conjoin_verb_groups(_wrap(phrases)), rules, lexicon)
    for cp in items:
        if cp.kind == VG:
            if cp.equivalence_class is None:
                return _classify_single(cp, rules, lexicon)
            return cp.equivalence_class, cp.modality
    return None, EXISTING


def _attach_appositives(items: list[ComplexPhrase]) -> list[ComplexPhrase]:
    out = list(items)
    i = 0
    while i + 2 < len(out):
        head, comma, appos = out[i], out[i + 1], out[i + 2]
        closer = out[i + 3] if i + 3 < len(out) else None
        # appositive must be name-like or the head description-like, and
        # name,name comma pairs are conjunction-list territory, not apposition
        if (head.kind in NG_LIKE and comma.kind == COMMA and appos.kind in NG_LIKE
                and (appos.head_is_name() or not head.head_is_name())
                and not (appos.head_is_name() and head.head_is_name())):
            consumed = [comma.base]
            end = i + 3
            if closer is not None and closer.kind == COMMA:
                consumed.append(closer.base)
                end = i + 4
            merged = ComplexPhrase(head.base, appositives=head.appositives + [appos],
                                   pp_complements=head.pp_complements,
                                   measure=head.measure, conjuncts=head.conjuncts,
                                   consumed=head.consumed + consumed)
            out = out[:i] + [merged] + out[end:]
            continue
        i += 1
    return out


_PER_WORDS = {"a", "an", "per"}


def _attach_measures(items: list[ComplexPhrase], rules: RuleSet,
                     lexicon: Lexicon) -> list[ComplexPhrase]:
    out = []
    i = 0
    while i < len(items):
        cp = items[i]
        if cp.kind == NG and cp.base.units[0].surface[0].isdigit() and cp.measure is None:
            quantity = _leading_quantity(cp)
            per = None
            consumed = list(cp.consumed)
            nxt = items[i + 1] if i + 1 < len(items) else None
            if (nxt is not None and nxt.kind == NG and len(nxt.base.units) == 2
                    and nxt.base.units[0].lower in _PER_WORDS
                    and "temporal" in nxt.base.head.classes):
                per = nxt.base.head.lemma_key
                consumed.extend(nxt.constituents())
                i += 1
            measured = ComplexPhrase(cp.base, appositives=cp.appositives,
                                     pp_complements=cp.pp_complements,
                                     conjuncts=cp.conjuncts,
                                     measure=Measure(quantity, lexicon.lemma(cp.head_lemma), per),
                                     consumed=consumed)
            out.append(measured)
        else:
            out.append(cp)
        i += 1
    return out


def _leading_quantity(cp: ComplexPhrase):
    from .values import parse_decimal, SCALE_WORDS
    units = cp.base.units
    value = parse_decimal(units[0].surface)
    if value is None:
        return None
    k = 1
    while k < len(units) and units[k].lower in SCALE_WORDS:
        value *= SCALE_WORDS[units[k].lower]
        k += 1
    return int(value) if value == int(value) else value


def _attach_pp_complements(items: list[ComplexPhrase],
                           lexicon: Lexicon) -> list[ComplexPhrase]:
    out = list(items)
    i = 0
    while i + 2 < len(out):
        head, prep, comp = out[i], out[i + 1], out[i + 2]
        if head.kind in NG_LIKE and prep.kind == PREP and comp.kind in NG_LIKE:
            surface = prep.base.surface.lower()
            subcat = (lexicon.annotation(head.head_lemma, "subcat") or "").split("/")
            if surface in ("of", "for") or surface in subcat:
                merged = ComplexPhrase(head.base, appositives=head.appositives,
                                       pp_complements=head.pp_complements + [(surface, comp)],
                                       measure=head.measure, conjuncts=head.conjuncts,
                                       consumed=head.consumed + [prep.base])
                out = out[:i] + [merged] + out[i + 3:]
                continue
        i += 1
    return out


def _kinds_conjoinable(a: ComplexPhrase, b: ComplexPhrase) -> bool:
    nominal = {NG, COMPANY}
    if a.kind in nominal and b.kind in nominal:
        return True
    return a.kind == b.kind and a.kind in NG_LIKE


def _conjoin_noun_groups(items: list[ComplexPhrase]) -> list[ComplexPhrase]:
    out = []
    i = 0
    while i < len(items):
        cp = items[i]
        if cp.kind not in NG_LIKE:
            out.append(cp)
            i += 1
            continue
        conjuncts = [cp]
        consumed: list[Phrase] = []
        j = i + 1
        while j + 1 < len(items):
            sep, nxt = items[j], items[j + 1]
            if sep.kind not in (CONJ, COMMA) or nxt.kind not in NG_LIKE:
                break
            if not _kinds_conjoinable(conjuncts[0], nxt):
                break
            if sep.kind == COMMA and not (j + 2 < len(items)
                                          and items[j + 2].kind in (CONJ, COMMA)):
                break  # plain comma without a following list: appositive territory
            conjuncts.append(nxt)
            consumed.append(sep.base)
            j += 2
        if len(conjuncts) > 1:
            flat: list[ComplexPhrase] = []
            for c in conjuncts:
                flat.extend(c.conjunct_list())
            out.append(ComplexPhrase(cp.base, conjuncts=flat, consumed=consumed))
            i = j
        else:
            out.append(cp)
            i += 1
    return out


# --------------------------------------------------------------------------
# Structures recognized at this level.
# --------------------------------------------------------------------------

def seed_structures(items: list[ComplexPhrase], rules: RuleSet, lexicon: Lexicon,
                    sentence: int = 0) -> tuple[list[EntityStructure], list[TemplateStructure]]:
    entities: list[EntityStructure] = []
    seen_spans: set[tuple[int, int, str]] = set()
    for cp in items:
        for part in cp.conjunct_list():
            parts = [part] + part.appositives
            for rule in rules.entities:
                target = next((p for p in parts
                               if constraint_matches(p, rule.constraint, rules, lexicon)[0]),
                              None)
                if target is None:
                    continue
                key = (part.span()[0], part.span()[1], rule.entity_type)
                if key in seen_spans:
                    continue
                seen_spans.add(key)
                entities.append(_entity_from(part, rule.entity_type, lexicon, sentence))
                break

    structures: list[TemplateStructure] = []
    for cp in items:
        for seed in rules.seeds:
            ok, _ = constraint_matches(cp, seed.base, rules, lexicon)
            if not ok:
                continue
            env: dict[str, object] = {"self": cp}
            satisfied = True
            for req, var, cls in seed.needs:
                if req == "of":
                    comp = next((c for p, c in cp.pp_complements if p == "of"), None)
                    if comp is not None and cls is not None:
                        if not all(head_in_class(x, cls, rules, lexicon)
                                   for x in comp.conjunct_list()):
                            comp = None
                    if comp is None:
                        satisfied = False
                        break
                    env[var] = comp
                elif req == "name":
                    named = None
                    for appos in cp.appositives:
                        if appos.head_is_name():
                            named = appos
                            break
                    if named is None and cp.kind == COMPANY:
                        named = cp
                    if named is None:
                        satisfied = False
                        break
                    env[var] = named
            if not satisfied:
                continue
            schema = rules.templates[seed.template]
            structure = TemplateStructure.fresh(schema, seed.name, sentence, cp.span())
            for slot, expr in seed.fills:
                structure.set(slot, eval_fill_expr(expr, env, lexicon))
            if structure.variable_fill_count() > 0:
                structures.append(structure)
    return entities, structures


def _entity_from(cp: ComplexPhrase, entity_type: str, lexicon: Lexicon,
                 sentence: int) -> EntityStructure:
    entity = EntityStructure(entity_type, sentence=sentence)
    named = cp.name_part()
    if named is not None:
        fill = make_fill(named, lexicon)
        entity.name = fill.text
        entity.alias = fill.identity()
        if named is not cp:
            entity.descriptions.append(cp.surface())
    else:
        entity.descriptions.append(cp.surface())
    for appos in cp.appositives:
        if appos is not named and not appos.head_is_name():
            entity.descriptions.append(appos.surface())
    for unit in cp.base.units:
        nationality = lexicon.annotation(unit.lemma_key, "nationality")
        if nationality:
            entity.attributes["nationality"] = nationality
    return entity
