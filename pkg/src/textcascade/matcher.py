"""Stage 4: domain events.

Runs the compiled nondeterministic machines over one sentence's complex
phrases.  State transitions are driven by (head word, phrase kind)
lookups; pseudo-syntax reads over prepositional phrases, relative
clauses, reduced relatives, parentheticals, and conjoined verb phrases
between a subject and its verb group.  Every accepting branch yields a
structure, except passive matches subsumed by larger active matches.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, replace

from .binding import constraint_matches, eval_fill_expr, make_fill
from .chunker import COMMA, CONJ, DATE, LOCATION, RELPRO, THAT, VG
from .compiler import CompiledPatternBase, CompiledRule
from .complex_phrases import ComplexPhrase
from .lexicon import Lexicon
from .rules import LiteralParticle, PhraseConstraint, SkipStar
from .templates import Fill, TemplateStructure

MAX_BRANCHES = 20000
_OTHER_EXCLUDED = (VG, CONJ, RELPRO)  # "Other" = any phrase kind but these


@dataclass(frozen=True)
class MatchBranch:
    variant: int
    element: int
    pos: int
    env: tuple[tuple[str, object], ...]
    start_char: int
    end_char: int
    skipped: int = 0          # phrases consumed by the current skip element
    flags: tuple[str, ...] = ()
    modality: str | None = None  # from the last matched verb group

    def bind(self, name: str, value: object) -> "MatchBranch":
        return replace(self, env=self.env + ((name, value),))

    def lookup(self) -> dict:
        return dict(self.env)


def phrase_keys(cp: ComplexPhrase, lexicon: Lexicon) -> set[tuple[str, str]]:
    """Index keys a phrase can activate: (head word | *, kind tag | *)."""
    keys: set[tuple[str, str]] = set()
    for part in cp.conjunct_list():
        if part.kind == VG:
            features = part.verb_features()
            kindtag = f"{features.voice_tag}VerbGroup" if features else "VerbGroup"
        else:
            kindtag = part.kind
        words = {part.head_lemma, lexicon.lemma(part.head_lemma), "*"}
        if part.head_is_name():
            words.add("@cap")
        if "aux-be" in part.head_phrase.head.classes:
            words.add("@be")
        if len(part.base.units) == 1:
            words.add(part.base.units[0].lower)
        for w in words:
            keys.add((w, kindtag))
            keys.add((w, "*"))
    return keys


def match_sentence(phrases: list[ComplexPhrase], base: CompiledPatternBase,
                   lexicon: Lexicon, sentence: int = 0) -> list[TemplateStructure]:
    """All surviving accepting branches for one sentence, as structures."""
    rules = base.rules
    work: deque[MatchBranch] = deque()
    for pos, cp in enumerate(phrases):
        for vid, k in base.activations(phrase_keys(cp, lexicon)):
            work.append(MatchBranch(vid, k, pos, (), cp.span()[0], cp.span()[0]))

    accepted: list[tuple[CompiledRule, MatchBranch]] = []
    explored = 0
    while work:
        branch = work.popleft()
        explored += 1
        if explored > MAX_BRANCHES:
            break
        rule = base.variants[branch.variant]
        if branch.element >= len(rule.elements):
            accepted.append((rule, branch))
            continue
        element = rule.elements[branch.element]
        if isinstance(element, SkipStar):
            work.extend(_skip_alternatives(element, branch, phrases))
            continue
        if getattr(element, "optional", False):
            work.append(replace(branch, element=branch.element + 1, skipped=0))
        if branch.pos >= len(phrases):
            if all(_skippable_tail(rule.elements[k])
                   for k in range(branch.element, len(rule.elements))):
                accepted.append((rule, branch))
            continue
        cp = phrases[branch.pos]
        if isinstance(element, LiteralParticle):
            if len(cp.base.units) == 1 and cp.base.units[0].lower in element.surfaces:
                work.append(_advance(branch, cp))
            continue
        assert isinstance(element, PhraseConstraint)
        if element.kind == "vg" and branch.element in rule.gap_ok:
            work.extend(_gap_alternatives(branch, phrases))
        matched = _match_constraint(element, cp, branch, rules, lexicon)
        if matched is not None:
            work.append(matched)

    structures = _finalize(accepted, base, lexicon, sentence)
    return structures


def _skippable_tail(element) -> bool:
    return isinstance(element, SkipStar) or getattr(element, "optional", False)


def _advance(branch: MatchBranch, cp: ComplexPhrase) -> MatchBranch:
    return replace(branch, element=branch.element + 1, pos=branch.pos + 1,
                   end_char=max(branch.end_char, cp.span()[1]), skipped=0)


def _match_constraint(element: PhraseConstraint, cp: ComplexPhrase,
                      branch: MatchBranch, rules, lexicon) -> MatchBranch | None:
    if element.conjoined or not cp.conjuncts:
        ok, resolution = constraint_matches(cp, element, rules, lexicon)
        target: object = cp
    else:
        # a conjoined phrase satisfies a singular constraint through any
        # one conjunct: one nondeterministic read per conjunct is folded
        # into "first conjunct that fits" for determinism
        target = None
        ok, resolution = False, None
        for part in cp.conjunct_list():
            ok, resolution = constraint_matches(part, element, rules, lexicon)
            if ok:
                target = part
                break
        if target is None:
            return None
    if not ok:
        return None
    out = _advance(branch, cp)
    if element.binding:
        out = out.bind(element.binding, target)
    if resolution:
        out = replace(out, flags=out.flags + (f"voice:{resolution}",))
    if element.kind == "vg":
        out = replace(out, modality=cp.modality)
    return out


# -- adjunct skipping ---------------------------------------------------------

def _temporal_ng(cp: ComplexPhrase) -> bool:
    return cp.kind == "NounGroup" and "temporal" in cp.base.head.classes


def _skip_alternatives(star: SkipStar, branch: MatchBranch,
                       phrases: list[ComplexPhrase]):
    yield replace(branch, element=branch.element + 1, skipped=0)
    if branch.skipped >= star.max_phrases or branch.pos >= len(phrases):
        return
    cp = phrases[branch.pos]
    env = branch.lookup()

    def consumed(count: int, captures: dict | None = None) -> MatchBranch:
        out = replace(branch, pos=branch.pos + count,
                      skipped=branch.skipped + count,
                      end_char=max(branch.end_char,
                                   phrases[branch.pos + count - 1].span()[1]))
        for key, value in (captures or {}).items():
            if key not in env:
                out = out.bind(key, value)
        return out

    if cp.kind == DATE:
        yield consumed(1, {"@date": make_fill_for_skip(cp)})
    elif _temporal_ng(cp):
        yield consumed(1, {"@date": Fill(cp.surface(), kind="date")})
    elif cp.kind == LOCATION:
        yield consumed(1, {"@place": make_fill_for_skip(cp)})
    elif cp.kind == "Preposition" and branch.pos + 1 < len(phrases):
        nxt = phrases[branch.pos + 1]
        if nxt.kind == LOCATION or (
                nxt.conjuncts and all(c.kind == LOCATION for c in nxt.conjuncts)):
            yield consumed(2, {"@place": make_fill_for_skip(nxt)})
        elif nxt.kind == DATE:
            yield consumed(2, {"@date": make_fill_for_skip(nxt)})
        elif nxt.kind in ("NounGroup", "CompanyName", "Currency"):
            yield consumed(2)
    elif cp.kind == COMMA:
        # parenthetical: read to the closing comma
        for j in range(branch.pos + 1, min(len(phrases),
                                           branch.pos + 1 + star.max_phrases)):
            if phrases[j].kind == COMMA:
                yield consumed(j - branch.pos + 1)
                break


def make_fill_for_skip(cp: ComplexPhrase) -> Fill:
    if cp.conjuncts:
        return Fill(cp.full_surface(), kind="name")
    if cp.kind == DATE:
        value = cp.base.head.normalized
        from .values import DateValue
        if isinstance(value, DateValue):
            return Fill(value.format(), kind="date")
    return Fill(cp.surface(), kind="name" if cp.kind == LOCATION else "date")


# -- pseudo-syntax between subject and verb -----------------------------------

def _other_ok(cp: ComplexPhrase) -> bool:
    return cp.kind not in _OTHER_EXCLUDED


def _gap_alternatives(branch: MatchBranch, phrases: list[ComplexPhrase]):
    """Skip schemata launched where a rule expects the subject's verb."""
    pos = branch.pos
    n = len(phrases)

    def at(j):
        return phrases[j] if j < n else None

    def jump(j: int) -> MatchBranch:
        return replace(branch, pos=j, skipped=0,
                       end_char=max(branch.end_char, phrases[j - 1].span()[1]))

    # relative clause: optional comma then a relative pronoun
    k = pos
    if at(k) is not None and at(k).kind == COMMA:
        k += 1
    rel = at(k)
    if rel is not None and rel.kind in (RELPRO, THAT):
        k += 1
        # content capture: the clause's own verb group can satisfy the rule
        j = k
        while j < n and _other_ok(phrases[j]):
            j += 1
        if j < n and phrases[j].kind == VG:
            yield jump(j)
            # skip over the embedded clause to the main verb
            j2 = j + 1
            while j2 < n and _other_ok(phrases[j2]):
                j2 += 1
            if j2 < n and phrases[j2].kind == VG:
                yield jump(j2)

    # reduced relative: a participial verb group right after the subject
    cp = at(pos)
    if cp is not None and cp.kind == VG:
        features = cp.verb_features()
        voice = features.voice_tag if features else ""
        if voice in ("Passive", "ActivePassive", "Gerund"):
            j = pos + 1
            while j < n and _other_ok(phrases[j]):
                j += 1
            if j < n and phrases[j].kind == VG:
                yield jump(j)
        # conjoined verb phrases: associate the subject with the verb
        # group after the conjunction
        j = pos + 1
        while j < n and _other_ok(phrases[j]):
            j += 1
        if j < n and phrases[j].kind == CONJ and j + 1 < n and \
                phrases[j + 1].kind == VG:
            yield jump(j + 1)


# -- acceptance ----------------------------------------------------------------

def _finalize(accepted, base: CompiledPatternBase, lexicon: Lexicon,
              sentence: int) -> list[TemplateStructure]:
    built: list[tuple[CompiledRule, TemplateStructure]] = []
    seen: set = set()
    ordered = sorted(
        accepted,
        key=lambda pair: (pair[1].start_char, -(pair[1].end_char), pair[0].name))
    for rule, branch in ordered:
        env = branch.lookup()
        structure = _build_structure(rule, branch, env, base, lexicon, sentence)
        if structure is None:
            continue
        key = (structure.template_type, _fill_key(structure),
               (branch.start_char, branch.end_char))
        if key in seen:
            continue
        seen.add(key)
        built.append((rule, structure))

    survivors: list[TemplateStructure] = []
    for i, (rule, structure) in enumerate(built):
        if _subsumed(i, built):
            continue
        survivors.append(structure)
    return survivors


def _fill_key(structure: TemplateStructure) -> frozenset:
    items = set()
    for name, value in structure.slots.items():
        if isinstance(value, list):
            for v in value:
                items.add((name, v.identity()))
        elif value is not None:
            items.add((name, value.identity()))
    return frozenset(items)


def _span_of(structure: TemplateStructure) -> tuple[int, int]:
    return structure.provenance[0].span


def _subsumed(i: int, built) -> bool:
    rule, structure = built[i]
    fills = _fill_key(structure)
    span = _span_of(structure)
    for j, (other_rule, other) in enumerate(built):
        if j == i or other.template_type != structure.template_type:
            continue
        other_fills = _fill_key(other)
        other_span = _span_of(other)
        if not fills <= other_fills:
            continue
        covers = other_span[0] <= span[0] and span[1] <= other_span[1]
        strictly = covers and other_span != span
        if rule.family == "passive" and other_rule.family == "active" and strictly:
            return True  # passive clause subsumed by a larger active clause
        if rule.source == other_rule.source and rule.subjectless \
                and not other_rule.subjectless and covers and fills < other_fills:
            return True  # verb+object partial of this rule's own fuller match
    return False


def _build_structure(rule: CompiledRule, branch: MatchBranch, env: dict,
                     base: CompiledPatternBase, lexicon: Lexicon,
                     sentence: int) -> TemplateStructure | None:
    if rule.modality_filter and branch.modality != rule.modality_filter:
        return None
    schema = base.rules.templates[rule.template]
    flags = tuple(branch.flags)
    if rule.subjectless:
        flags += ("subject_missing",)
    structure = TemplateStructure.fresh(
        schema, rule.name, sentence, (branch.start_char, branch.end_char), flags)
    for slot, expr in rule.fills:
        structure.set(slot, eval_fill_expr(expr, env, lexicon))
    if structure.variable_fill_count() == 0:
        return None
    return structure


def apply_pseudo_syntax(branch: MatchBranch,
                        phrases: list[ComplexPhrase]) -> list[MatchBranch]:
    """Skip-schema branches for a branch sitting after a subject noun group."""
    return list(_gap_alternatives(branch, phrases))
