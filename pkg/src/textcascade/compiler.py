"""Pattern compilation: variant expansion, adjunct tolerance, indexing.

An S-V-O rule marked ``expand`` generates its full variant family at
compile time (passive, relatives, reduced relative, "is to" forms,
agentive nominal, bare verb+object).  The runtime matcher only walks
transition tables indexed by (head word, phrase kind) pairs; no
transformation logic runs during matching.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

from .lexicon import Lexicon
from .rules import (
    FillExpr, LiteralParticle, PatternRule, PhraseConstraint, RuleError, RuleSet, SkipStar,
)

NG_KINDTAGS = ("NounGroup", "CompanyName", "Location", "Date", "Currency")
VG_VOICES = {
    "active": ("Active", "ActivePassive"),
    "passive": ("Passive", "ActivePassive"),
    "nonpassive": ("Active", "ActivePassive", "Infinitive", "Gerund"),
    "inf": ("Infinitive",),
    "ger": ("Gerund",),
    "any": ("Active", "Passive", "ActivePassive", "Infinitive", "Gerund"),
}


class ExpandError(ValueError):
    pass


@dataclass
class CompiledRule:
    name: str
    elements: list
    template: str
    fills: list[tuple[str, FillExpr]]
    source: str            # base rule name
    family: str            # active | passive | vo | nominal | plain
    subjectless: bool
    modality_filter: str | None = None
    gap_ok: frozenset[int] = frozenset()  # element indices where pseudo-syntax applies

    def render(self) -> str:
        parts = " ".join(e.render() for e in self.elements)
        fills = ", ".join(f"{slot} = {expr.render()}" for slot, expr in self.fills)
        return f"{self.name} [{self.family}]: {parts} => {self.template}: {fills}"


@dataclass
class CompiledPatternBase:
    rules: RuleSet
    variants: list[CompiledRule] = field(default_factory=list)
    index: dict[tuple[str, str], list[tuple[int, int]]] = field(default_factory=dict)
    word_classes: dict[str, frozenset[str]] = field(default_factory=dict)

    def canonical_text(self) -> str:
        lines = [v.render() for v in self.variants]
        lines.append(f"# variants: {len(self.variants)}")
        lines += [f"# index {word}-{kind}: {len(entries)}"
                  for (word, kind), entries in sorted(self.index.items())]
        return "\n".join(lines)

    def activations(self, keys) -> list[tuple[int, int]]:
        found: list[tuple[int, int]] = []
        for key in keys:
            found.extend(self.index.get(key, ()))
        return sorted(set(found))


# -- transformation expansion -------------------------------------------------

def _svo_parts(rule: PatternRule):
    constraints = [e for e in rule.elements if isinstance(e, PhraseConstraint)]
    if len(constraints) != 3 or len(rule.elements) != 3:
        raise ExpandError(
            f"pattern {rule.name!r}: expansion needs exactly Subject VerbGroup Object")
    subj, verb, obj = constraints
    if subj.kind != "ng" or verb.kind != "vg" or obj.kind != "ng":
        raise ExpandError(
            f"pattern {rule.name!r}: expansion needs the canonical NG VG NG shape")
    if not subj.binding or not obj.binding:
        raise ExpandError(f"pattern {rule.name!r}: subject and object must be bound")
    return subj, verb, obj


def expand_transformations(rule: PatternRule, rules: RuleSet) -> list[PatternRule]:
    """Variant family for one rule; identity for rules without expand."""
    if not rule.expand:
        return [rule]
    subj, verb, obj = _svo_parts(rule)
    comma = LiteralParticle((",",), optional=True)
    relpro = PhraseConstraint("rel")
    by = LiteralParticle(("by",))

    def v(voice: str, be_to: bool = False) -> PhraseConstraint:
        return replace(verb, voice=voice, be_to=be_to)

    def make(suffix: str, elements: list, fills=None) -> PatternRule:
        return PatternRule(
            name=f"{rule.name}/{suffix}", elements=elements,
            template=rule.template, fills=fills or rule.fills,
            expand=False, modality_filter=rule.modality_filter, source=rule.name)

    variants = [
        make("active", [subj, v("active"), obj]),
        make("vo", [v("nonpassive"), obj]),
        make("passive", [obj, v("passive"), by, subj]),
        make("passive-na", [obj, v("passive")]),
        make("subjrel", [subj, comma, relpro, v("active"), obj]),
        make("objrel", [obj, comma, relpro, v("passive"), by, subj]),
        make("redrel", [obj, v("passive"), by, subj]),
        make("is-to-active", [subj, v("active", be_to=True), obj]),
        make("is-to-passive", [obj, v("passive", be_to=True), by, subj]),
    ]

    nominal_forms = rules.nominals.get(verb.head_class or "")
    if nominal_forms:
        nominal_ng = PhraseConstraint(
            "ng", head_class=f"@nominal:{verb.head_class}", binding=obj.binding)
        be_vg = PhraseConstraint("vg", head_class="@be", voice="active")
        fills = [(slot, _rebind_to_mods(expr, obj.binding)) for slot, expr in rule.fills]
        variants.append(make("nominal", [subj, be_vg, nominal_ng], fills))
    return variants


def _rebind_to_mods(expr: FillExpr, obj_var: str) -> FillExpr:
    terms = tuple(
        ("attr", f"{obj_var}.mods") if term == ("var", obj_var) else term
        for term in expr.terms)
    return FillExpr(terms)


def insert_adjunct_tolerance(rule: PatternRule) -> PatternRule:
    """Interleave adjunct skips at every inter-element position."""
    elements: list = []
    for i, element in enumerate(rule.elements):
        if i > 0:
            elements.append(SkipStar())
        elements.append(element)
    return replace(rule, elements=elements)


# -- compilation ---------------------------------------------------------------

def _family_of(rule: PatternRule) -> tuple[str, bool]:
    constraints = [e for e in rule.elements if isinstance(e, PhraseConstraint)]
    vgs = [e for e in constraints if e.kind == "vg"]
    first_vg = next((i for i, e in enumerate(constraints) if e.kind == "vg"), None)
    has_subject = first_vg is not None and first_vg > 0 and \
        constraints[0].kind in ("ng", "cn", "loc", "date", "cur")
    if rule.source:
        suffix = rule.name.rsplit("/", 1)[-1]
        if suffix in ("active", "subjrel", "is-to-active"):
            return "active", False
        if suffix in ("passive", "objrel", "redrel", "is-to-passive"):
            return "passive", False
        if suffix == "passive-na":
            return "passive", True
        if suffix == "vo":
            return "vo", True
        if suffix == "nominal":
            return "nominal", False
    if any(e.voice == "passive" for e in vgs):
        return "passive", not has_subject
    if not vgs or has_subject:
        return ("active" if vgs else "plain"), False
    return "vo", True


def _gap_positions(elements: list) -> frozenset[int]:
    """VG elements directly preceded by a noun-group constraint get
    pseudo-syntax treatment (prepositional, relative, reduced-relative,
    and conjoined-VP skips between subject and verb)."""
    out = set()
    last_constraint: PhraseConstraint | None = None
    for i, element in enumerate(elements):
        if isinstance(element, SkipStar):
            continue
        if isinstance(element, LiteralParticle):
            if not element.optional:
                last_constraint = None
            continue
        if element.kind == "vg" and last_constraint is not None and \
                last_constraint.kind in ("ng", "cn", "loc", "date", "cur"):
            out.add(i)
        last_constraint = element
    return frozenset(out)


def _first_positions(elements: list) -> list[int]:
    """Element indices a match may start at (leading optionals skippable)."""
    positions = []
    for i, element in enumerate(elements):
        if isinstance(element, SkipStar):
            continue
        positions.append(i)
        if not getattr(element, "optional", False):
            break
    return positions


def _index_keys(element, rules: RuleSet, lexicon: Lexicon) -> list[tuple[str, str]]:
    if isinstance(element, LiteralParticle):
        return [(s, "*") for s in element.surfaces]
    if isinstance(element, SkipStar):
        return []
    if element.kind == "vg":
        kindtags = [f"{v}VerbGroup" for v in VG_VOICES[element.voice]]
    elif element.kind == "ng":
        kindtags = list(NG_KINDTAGS)
    elif element.kind == "any":
        kindtags = ["*"]
    else:
        from .binding import KIND_MAP
        kindtags = [KIND_MAP[element.kind]]
    words: set[str] = set()
    cls = element.head_class
    if not cls:
        words.add("*")
    elif cls.startswith("@nominal:"):
        words.update(rules.nominals.get(cls[len("@nominal:"):], []))
    elif cls == "@be":
        words.add("@be")
    elif cls == "@capitalized":
        words.add("@cap")
    else:
        members = rules.class_words(cls)
        for w in members:
            if w == "@capitalized":
                words.add("@cap")
            elif w == "@company-name":
                pass  # covered by the CompanyName kind tag below
            elif w == "@location":
                pass
            else:
                words.add(w)
        if "@company-name" in members:
            return ([(w, k) for w in words for k in kindtags]
                    + [("*", "CompanyName")])
        if "@location" in members:
            return ([(w, k) for w in words for k in kindtags]
                    + [("*", "Location")])
    return [(w, k) for w in words for k in kindtags]


def compile_rules(rules: RuleSet, lexicon: Lexicon) -> CompiledPatternBase:
    base = CompiledPatternBase(rules)
    names: set[str] = set()
    for pattern in rules.patterns:
        for variant in expand_transformations(pattern, rules):
            if variant.name in names:
                raise RuleError(0, f"duplicate rule name after expansion: {variant.name!r}")
            names.add(variant.name)
            tolerant = insert_adjunct_tolerance(variant)
            family, subjectless = _family_of(variant)
            compiled = CompiledRule(
                name=tolerant.name, elements=tolerant.elements,
                template=tolerant.template, fills=tolerant.fills,
                source=tolerant.base_name(), family=family, subjectless=subjectless,
                modality_filter=tolerant.modality_filter,
                gap_ok=_gap_positions(tolerant.elements))
            vid = len(base.variants)
            base.variants.append(compiled)
            for k in _first_positions(tolerant.elements):
                for key in _index_keys(tolerant.elements[k], rules, lexicon):
                    base.index.setdefault(key, []).append((vid, k))
    for name, members in rules.classes.items():
        base.word_classes[name] = frozenset(members)
    return base
