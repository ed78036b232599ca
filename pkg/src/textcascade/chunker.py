"""Stage 2: basic phrases.

Token/mention sequences become noun groups, verb groups, and particle
phrases.  The noun-group and verb-group grammars are data: productions
from the rule file compile onto the grammar engine, and scanning is
longest-match left to right.  Phrases subsumed by larger phrases are
discarded; same-span pairs of different kinds are both kept.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .grammar import GrammarError, Machine, Predicate, inline, parse_expr
from .lexicon import Lexicon
from .tokenizer import (
    COMPANY, CURRENCY, DATE, LOCATION, MULTIWORD, PERSON, TIME,
    EntityMention, Span, Token,
)

# Phrase kinds
NG = "NounGroup"
VG = "VerbGroup"
PREP = "Preposition"
CONJ = "Conjunction"
RELPRO = "RelativePronoun"
AGO = "Particle-ago"
THAT = "Particle-that"
COMMA = "Comma"

# Special kinds of noun group: accepted wherever NounGroup is.
SPECIAL_NG = frozenset({COMPANY, LOCATION, DATE, CURRENCY})
NG_LIKE = SPECIAL_NG | {NG}


@dataclass(frozen=True)
class Unit:
    """One chunker input item: a token, or a Stage 1 mention fused whole."""

    surface: str
    lower: str
    span: Span
    classes: frozenset[str]
    kind: str | None = None      # special mention kind, if any
    lexeme: str | None = None    # multiword lexicon surface
    normalized: object = None
    capitalized_unknown: bool = False

    @property
    def lemma_key(self) -> str:
        return self.lexeme or self.lower

    def is_word_like(self) -> bool:
        return self.surface[0].isalnum()


@dataclass(frozen=True)
class VerbFeatures:
    voice_tag: str  # Active | Passive | ActivePassive | Gerund | Infinitive
    is_predicate_adjective: bool = False
    negated: bool = False
    future: bool = False    # modal will/shall, or be-to
    be_to: bool = False     # "is to <verb>" shape

    def __post_init__(self) -> None:
        allowed = {"Active", "Passive", "ActivePassive", "Gerund", "Infinitive"}
        if self.voice_tag not in allowed:
            raise ValueError(f"bad voice tag {self.voice_tag!r}")


@dataclass
class Phrase:
    kind: str
    span: Span
    units: tuple[Unit, ...]
    head: Unit
    verb_features: VerbFeatures | None = None
    source: str | None = None  # document text, for exact surface slices

    @property
    def surface(self) -> str:
        if self.source is not None:
            return self.source[self.span.start:self.span.end]
        return " ".join(u.surface for u in self.units)

    def slice(self, start: int, end: int) -> str:
        if self.source is not None:
            return self.source[start:end]
        return " ".join(u.surface for u in self.units
                        if u.span.start >= start and u.span.end <= end)

    @property
    def head_lemma(self) -> str:
        return self.head.lemma_key

    def is_ng_like(self) -> bool:
        return self.kind in NG_LIKE


class PhraseGrammar:
    """Compiled noun-group/verb-group productions plus particle map."""

    def __init__(self, productions: list[tuple[str, str]], lexicon: Lexicon):
        self.lexicon = lexicon
        defs: dict[str, object] = {}
        rules: dict[str, list[object]] = {}
        for name, expr_text in productions:
            expr = parse_expr(expr_text)
            if name.startswith("def "):
                defs[name[4:].strip()] = expr
            else:
                rules.setdefault(name, []).append(expr)
        self.machines: dict[str, list[Machine]] = {}
        for name, exprs in rules.items():
            self.machines[name] = [
                Machine(inline(e, defs), self._resolve) for e in exprs
            ]
        for required in ("noungroup", "verbgroup"):
            if required not in self.machines:
                raise GrammarError(f"missing phrase production {required!r}")

    def _resolve(self, name: str, literal: bool) -> Predicate:
        if literal:
            return lambda u, w=name.lower(): u.lower == w
        builtin = _BUILTIN_ATOMS.get(name)
        if builtin is not None:
            return builtin
        return lambda u, c=name: c in u.classes

    def longest(self, name: str, units: list[Unit], start: int) -> int:
        return max((m.match(units, start) for m in self.machines[name]), default=0)


def _is_nominal(u: Unit) -> bool:
    if u.kind == PERSON:
        return True
    return "noun" in u.classes and "pronoun" not in u.classes


_BUILTIN_ATOMS: dict[str, Predicate] = {
    "nominal": _is_nominal,
    "capname": lambda u: u.capitalized_unknown,
    "quote": lambda u: u.surface in ('"', "'", "“", "”", "‘", "’", "``", "''"),
    "num": lambda u: u.surface[0].isdigit() or "number" in u.classes,
    "vfinite": lambda u: bool(u.classes & {"verb-3sg", "verb-past", "verb-base"}),
    "vbase": lambda u: "verb-base" in u.classes,
    "participle": lambda u: "verb-participle" in u.classes,
    "gerund": lambda u: "verb-gerund" in u.classes,
    "neg": lambda u: "negation" in u.classes,
    "be": lambda u: "aux-be" in u.classes,
    "have": lambda u: "aux-have" in u.classes,
    "do": lambda u: "aux-do" in u.classes,
}


def build_units(tokens: list[Token], mentions: list[EntityMention],
                lexicon: Lexicon) -> list[Unit]:
    units: list[Unit] = []
    by_start = {m.first: m for m in mentions}
    i = 0
    while i < len(tokens):
        mention = by_start.get(i)
        if mention is not None:
            toks = tokens[mention.first:mention.last]
            surface = " ".join(t.surface for t in toks)
            if mention.kind == MULTIWORD:
                entry = lexicon.entry(mention.normalized)
                units.append(Unit(surface, surface.lower(), mention.span,
                                  entry.classes if entry else frozenset(),
                                  lexeme=mention.normalized))
            else:
                kind = None if mention.kind in (TIME,) else mention.kind
                units.append(Unit(surface, surface.lower(), mention.span,
                                  frozenset({"noun"}), kind=kind,
                                  normalized=mention.normalized))
            i = mention.last
            continue
        tok = tokens[i]
        units.append(Unit(tok.surface, tok.lower, tok.span, tok.lexical_classes,
                          capitalized_unknown=tok.is_unknown and tok.capitalized))
        i += 1
    return units


_PARTICLE_KINDS = [
    ("preposition", PREP),
    ("conjunction", CONJ),
    ("relative-pronoun", RELPRO),
    ("particle-ago", AGO),
]


def chunk(tokens: list[Token], mentions: list[EntityMention],
          grammar: PhraseGrammar, text: str | None = None) -> list[Phrase]:
    """Chunk one sentence of Stage 1 output into phrases."""
    units = build_units(tokens, mentions, grammar.lexicon)
    phrases: list[Phrase] = []
    i = 0
    n = len(units)
    while i < n:
        unit = units[i]
        candidates: list[Phrase] = []
        if unit.kind in SPECIAL_NG:
            candidates.append(Phrase(unit.kind, unit.span, (unit,), unit, source=text))
        else:
            ng_len = grammar.longest("noungroup", units, i)
            vg_len = grammar.longest("verbgroup", units, i)
            if ng_len:
                seg = tuple(units[i:i + ng_len])
                candidates.append(Phrase(NG, _cover(seg), seg, seg[-1], source=text))
            if vg_len:
                seg = tuple(units[i:i + vg_len])
                candidates.append(Phrase(VG, _cover(seg), seg, _verb_head(seg),
                                         verb_features=tag_verb_group(seg),
                                         source=text))
            for cls, kind in _PARTICLE_KINDS:
                if cls in unit.classes:
                    candidates.append(Phrase(kind, unit.span, (unit,), unit, source=text))
            if unit.lower == "that":
                candidates.append(Phrase(THAT, unit.span, (unit,), unit, source=text))
            if unit.surface == ",":
                candidates.append(Phrase(COMMA, unit.span, (unit,), unit, source=text))
            if not candidates and unit.capitalized_unknown:
                # unknown capitalized word in phrase position: name-promotable
                candidates.append(Phrase(NG, unit.span, (unit,), unit, source=text))
        if not candidates:
            i += 1  # token belongs to no phrase; ignored downstream
            continue
        longest = max(len(c.units) for c in candidates)
        kept = [c for c in candidates if len(c.units) == longest]
        kept.sort(key=lambda p: p.kind)
        phrases.extend(kept)
        i += longest
    return phrases


def verb_group_features(units: tuple[Unit, ...], grammar: PhraseGrammar) -> VerbFeatures:
    """Features for a candidate verb group; rejects grammar violations."""
    if grammar.longest("verbgroup", list(units), 0) != len(units):
        raise ValueError(f"not a verb group: {' '.join(u.surface for u in units)!r}")
    return tag_verb_group(units)


def _cover(units: tuple[Unit, ...]) -> Span:
    return Span(units[0].span.start, units[-1].span.end)


def _verb_head(units: tuple[Unit, ...]) -> Unit:
    for u in reversed(units):
        if u.classes & {"verb", "verb-base", "verb-3sg", "verb-past",
                        "verb-participle", "verb-gerund", "adjective"}:
            return u
    return units[-1]


def tag_verb_group(units: tuple[Unit, ...]) -> VerbFeatures:
    """Voice/negation features for a unit sequence accepted by the VG grammar."""
    lowers = [u.lower for u in units]
    classes = [u.classes for u in units]
    negated = any("negation" in c for c in classes)
    head = units[-1]
    has_to = "to" in lowers
    has_modal = any("modal" in c for c in classes)
    be_before_to = has_to and any(
        "aux-be" in classes[k] for k in range(lowers.index("to")))
    aux_be = any("aux-be" in c for c in classes[:-1])
    aux_have = any("aux-have" in c for c in classes[:-1])
    head_part = "verb-participle" in head.classes
    head_ger = "verb-gerund" in head.classes
    head_past = "verb-past" in head.classes
    pred_adj = "adjective" in head.classes and not (head_part or head_ger)

    if pred_adj:
        return VerbFeatures("Active", is_predicate_adjective=True, negated=negated)

    if be_before_to:
        # "is to <verb>" / "are to be <verb>ed"
        be_after_to = any("aux-be" in classes[k] for k in range(lowers.index("to") + 1, len(units) - 1))
        voice = "Passive" if (head_part and be_after_to) else "Active"
        return VerbFeatures(voice, negated=negated, future=True, be_to=True)

    if has_to:
        if head_part and aux_be:
            return VerbFeatures("Passive", negated=negated)
        return VerbFeatures("Infinitive", negated=negated)

    if has_modal:
        future = any(w in ("will", "shall") for w in lowers)
        if head_part and aux_be:
            return VerbFeatures("Passive", negated=negated, future=future)
        return VerbFeatures("Active", negated=negated, future=future)

    if aux_be:
        if head_ger:
            return VerbFeatures("Active", negated=negated)
        if head_part:
            return VerbFeatures("Passive", negated=negated)
        return VerbFeatures("Active", negated=negated)

    if aux_have:
        been = "been" in lowers
        if head_part and been:
            return VerbFeatures("Passive", negated=negated)
        return VerbFeatures("Active", negated=negated)

    if len(units) > 1 and any("aux-do" in c for c in classes[:-1]):
        return VerbFeatures("Active", negated=negated)

    # bare verb forms
    if head_ger and not head_past:
        return VerbFeatures("Gerund", negated=negated)
    if head_part and head_past:
        return VerbFeatures("ActivePassive", negated=negated)
    if head_part:
        return VerbFeatures("Passive", negated=negated)
    if len(units) == 1 and "aux-be" in head.classes:
        return VerbFeatures("Active", negated=negated)
    return VerbFeatures("Active", negated=negated)
