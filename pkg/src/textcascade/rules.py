"""Declarative rule language: parsing and printing.

One UTF-8 text file declares everything a domain needs:

    PHRASES    noun-group/verb-group grammar productions
    CLASSES    head-word classes ("set-up = set up, form, establish")
    VERBGROUPS complex verb-group equivalence classes with modality
    TEMPLATES  output template schemas (slot names, order, kinds)
    PATTERNS   event patterns, seed rules, and entity rules
    MERGE      description hierarchy, synonyms, cross-type links

Lines starting with ``#`` are comments.  ``parse_rules`` reports syntax
errors with line numbers; ``format_rules`` prints a parsed rule set back
out so that parse -> print -> parse is a fixpoint.
"""
from __future__ import annotations

from dataclasses import dataclass, field

VOICE_NAMES = {"active", "passive", "nonpassive", "inf", "ger", "any"}
KIND_NAMES = {"ng", "vg", "cn", "loc", "date", "cur", "prep", "conj", "rel", "comma", "any"}


class RuleError(ValueError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


# -- element and fill structures --------------------------------------------

@dataclass(frozen=True)
class PhraseConstraint:
    kind: str                 # one of KIND_NAMES
    head_class: str | None = None
    voice: str = "any"
    binding: str | None = None
    conjoined: bool = False   # "+": accept conjoined lists, bind all conjuncts
    optional: bool = False
    core: bool = False        # vgclass CORE element
    be_to: bool = False       # generated "is to <verb>" variants only

    def render(self) -> str:
        if self.core:
            text = "CORE"
            if self.voice != "any":
                text += f"/{self.voice}"
            return text
        text = self.kind + ("+" if self.conjoined else "")
        if self.head_class:
            text += f":{self.head_class}"
        if self.voice != "any":
            text += f"/{self.voice}"
        if self.be_to:
            text += "~be-to"
        if self.binding:
            text += f"={self.binding}"
        if self.optional:
            text += "?"
        return text


@dataclass(frozen=True)
class LiteralParticle:
    surfaces: tuple[str, ...]
    optional: bool = False

    def render(self) -> str:
        text = "|".join(f'"{s}"' for s in self.surfaces)
        return text + ("?" if self.optional else "")


@dataclass(frozen=True)
class SkipStar:
    """Adjunct tolerance: inserted by the compiler, never written by hand."""

    max_phrases: int = 15

    def render(self) -> str:
        return "..."


Element = object  # PhraseConstraint | LiteralParticle | SkipStar


@dataclass(frozen=True)
class FillExpr:
    """One slot assignment: terms joined by '+' (list concatenation)."""

    terms: tuple[tuple[str, str], ...]
    # term forms: ("var", name) ("attr", "name.of") ("during", var)
    #             ("adjunct", "date"/"place") ("symbol", text) ("literal", text)

    def render(self) -> str:
        out = []
        for op, value in self.terms:
            if op == "var":
                out.append(value)
            elif op == "attr":
                out.append(value)
            elif op == "during":
                out.append(f"during({value})")
            elif op == "adjunct":
                out.append(f"@{value}")
            elif op == "symbol":
                out.append(value)
            else:
                out.append(f'"{value}"')
        return " + ".join(out)

    def variables(self) -> list[str]:
        names = []
        for op, value in self.terms:
            if op == "var":
                names.append(value)
            elif op == "attr":
                names.append(value.split(".", 1)[0])
            elif op == "during":
                names.append(value)
        return names


@dataclass
class PatternRule:
    name: str
    elements: list
    template: str
    fills: list[tuple[str, FillExpr]]
    expand: bool = False
    modality_filter: str | None = None
    source: str = ""  # base rule name for generated variants

    def base_name(self) -> str:
        return self.source or self.name


@dataclass
class SeedRule:
    """Stage 3 structure seed: a single complex-phrase condition."""

    name: str
    base: PhraseConstraint
    needs: list[tuple[str, str, str | None]]  # (requirement, var, class) req in {of, name}
    template: str = ""
    fills: list[tuple[str, FillExpr]] = field(default_factory=list)


@dataclass
class EntityRule:
    entity_type: str
    constraint: PhraseConstraint


@dataclass
class VgSequence:
    elements: list
    modality: str | None = None  # "Planned" | "Existing" | None = inherit


@dataclass
class VgClass:
    name: str
    core_class: str
    sequences: list[VgSequence] = field(default_factory=list)


@dataclass
class SlotDef:
    name: str
    kind: str = "text"  # text | list | ref | name | date | currency | symbol
    fixed: str | None = None


@dataclass
class TemplateSchema:
    name: str
    slots: list[SlotDef]

    def slot(self, name: str) -> SlotDef | None:
        for s in self.slots:
            if s.name == name:
                return s
        return None


@dataclass
class MergeSettings:
    # child key -> parent key (lemma-normalized description phrases)
    hierarchy: dict[str, str] = field(default_factory=dict)
    synonyms: list[set[str]] = field(default_factory=list)
    links: list[tuple[str, str, str]] = field(default_factory=list)  # (template, slot, target template)
    nearness_limit: int | None = None

    def synonym_of(self, a: str, b: str) -> bool:
        return any(a in group and b in group for group in self.synonyms)

    def ancestors(self, key: str) -> list[str]:
        out = []
        while key in self.hierarchy:
            key = self.hierarchy[key]
            out.append(key)
        return out


@dataclass
class RuleSet:
    productions: list[tuple[str, str]] = field(default_factory=list)
    classes: dict[str, list[str]] = field(default_factory=dict)
    nominals: dict[str, list[str]] = field(default_factory=dict)  # class -> nominal forms
    vgclasses: list[VgClass] = field(default_factory=list)
    templates: dict[str, TemplateSchema] = field(default_factory=dict)
    patterns: list[PatternRule] = field(default_factory=list)
    seeds: list[SeedRule] = field(default_factory=list)
    entities: list[EntityRule] = field(default_factory=list)
    merge: MergeSettings = field(default_factory=MergeSettings)

    def class_words(self, name: str) -> list[str]:
        return self.classes.get(name, [])


# -- element / fill parsing ---------------------------------------------------

def parse_element(text: str, lineno: int, allow_core: bool = False):
    optional = text.endswith("?") and not text.endswith('"?')
    if text.endswith("?"):
        optional, text = True, text[:-1]
    if text.startswith('"'):
        parts = text.split("|")
        surfaces = []
        for part in parts:
            if not (part.startswith('"') and part.endswith('"') and len(part) >= 2):
                raise RuleError(lineno, f"bad literal {text!r}")
            surfaces.append(part[1:-1].lower())
        return LiteralParticle(tuple(surfaces), optional=optional)
    if text == "CORE" or text.startswith("CORE/"):
        if not allow_core:
            raise RuleError(lineno, "CORE only allowed in VERBGROUPS sequences")
        voice = text[5:] if text.startswith("CORE/") else "any"
        if voice not in VOICE_NAMES:
            raise RuleError(lineno, f"unknown voice {voice!r}")
        return PhraseConstraint("vg", voice=voice, core=True, optional=optional)
    binding = None
    if "=" in text:
        text, binding = text.split("=", 1)
        if not binding.isidentifier():
            raise RuleError(lineno, f"bad binding name {binding!r}")
    voice = "any"
    if "/" in text:
        text, voice = text.split("/", 1)
        if voice not in VOICE_NAMES:
            raise RuleError(lineno, f"unknown voice {voice!r}")
    head_class = None
    if ":" in text:
        text, head_class = text.split(":", 1)
    conjoined = text.endswith("+")
    if conjoined:
        text = text[:-1]
    if text not in KIND_NAMES:
        raise RuleError(lineno, f"unknown phrase kind {text!r}")
    return PhraseConstraint(text, head_class=head_class, voice=voice, binding=binding,
                            conjoined=conjoined, optional=optional)


def parse_elements(text: str, lineno: int, allow_core: bool = False) -> list:
    items = text.split()
    if not items:
        raise RuleError(lineno, "empty element list")
    return [parse_element(item, lineno, allow_core) for item in items]


def parse_fill_expr(text: str, lineno: int) -> FillExpr:
    terms = []
    for raw in text.split("+"):
        term = raw.strip()
        if not term:
            raise RuleError(lineno, f"empty term in fill expression {text!r}")
        if term.startswith('"') and term.endswith('"'):
            terms.append(("literal", term[1:-1]))
        elif term.startswith("@"):
            if term[1:] not in ("date", "place"):
                raise RuleError(lineno, f"unknown adjunct capture {term!r}")
            terms.append(("adjunct", term[1:]))
        elif term.startswith("during(") and term.endswith(")"):
            terms.append(("during", term[7:-1].strip()))
        elif "." in term:
            var, attr = term.split(".", 1)
            if attr not in ("name", "of", "mods", "surface"):
                raise RuleError(lineno, f"unknown accessor .{attr}")
            terms.append(("attr", term))
        elif term.isidentifier() and not term.isupper():
            terms.append(("var", term))
        elif term and (term.isupper() or term.replace("-", "").isupper()):
            terms.append(("symbol", term))
        else:
            raise RuleError(lineno, f"bad fill term {term!r}")
    return FillExpr(tuple(terms))


def parse_fill_line(body: str, lineno: int) -> tuple[str, list[tuple[str, FillExpr]]]:
    if ":" not in body:
        raise RuleError(lineno, "fill needs 'TEMPLATE: Slot = expr, ...'")
    template, rest = body.split(":", 1)
    fills = []
    for assignment in rest.split(","):
        assignment = assignment.strip()
        if not assignment:
            continue
        if "=" not in assignment:
            raise RuleError(lineno, f"fill assignment {assignment!r} needs '='")
        slot, expr = assignment.split("=", 1)
        fills.append((slot.strip(), parse_fill_expr(expr.strip(), lineno)))
    if not fills:
        raise RuleError(lineno, "fill line assigns nothing")
    return template.strip(), fills


# -- file parsing -------------------------------------------------------------

SECTIONS = ("PHRASES", "CLASSES", "VERBGROUPS", "TEMPLATES", "PATTERNS", "MERGE")


def parse_rules(text: str) -> RuleSet:
    rs = RuleSet()
    section = None
    block: object = None  # current pattern/seed/vgclass/template block
    seen_names: set[str] = set()

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].rstrip() if not raw.lstrip().startswith("#") else ""
        if raw.lstrip().startswith("#"):
            continue
        line = line.strip()
        if not line:
            continue
        if line in SECTIONS:
            section, block = line, None
            continue
        if section is None:
            raise RuleError(lineno, f"content before any section header: {line!r}")

        if section == "PHRASES":
            if "=" not in line:
                raise RuleError(lineno, "phrase production needs 'name = expression'")
            name, expr = line.split("=", 1)
            rs.productions.append((name.strip(), expr.strip()))

        elif section == "CLASSES":
            if "=" not in line:
                raise RuleError(lineno, "class needs 'name = word, word, ...'")
            name, body = line.split("=", 1)
            name = name.strip()
            nominal_part = None
            if ";" in body:
                body, extra = body.split(";", 1)
                extra = extra.strip()
                if not extra.startswith("nominal:"):
                    raise RuleError(lineno, f"unknown class qualifier {extra!r}")
                nominal_part = extra[len("nominal:"):]
            words = [w.strip().lower() for w in body.split(",") if w.strip()]
            if not words:
                raise RuleError(lineno, f"class {name!r} has no members")
            if name in rs.classes:
                raise RuleError(lineno, f"duplicate class {name!r}")
            rs.classes[name] = words
            if nominal_part is not None:
                forms = [w.strip().lower() for w in nominal_part.split(",") if w.strip()]
                if not forms:
                    raise RuleError(lineno, "empty nominal list")
                rs.nominals[name] = forms

        elif section == "VERBGROUPS":
            if line.startswith("vgclass "):
                head = line[len("vgclass "):].split()
                if len(head) != 2 or not head[1].startswith("core="):
                    raise RuleError(lineno, "expected 'vgclass NAME core=CLASS'")
                block = VgClass(head[0], head[1][len("core="):])
                rs.vgclasses.append(block)
            elif line.startswith("seq"):
                if not isinstance(block, VgClass):
                    raise RuleError(lineno, "seq outside vgclass block")
                header, _, body = line.partition("=")
                words = header.split()
                modality = None
                if len(words) == 2 and words[1] in ("planned", "existing"):
                    modality = words[1].capitalize()
                elif len(words) != 1:
                    raise RuleError(lineno, f"bad seq header {header!r}")
                elements = parse_elements(body.strip(), lineno, allow_core=True)
                if not any(isinstance(e, PhraseConstraint) and e.core for e in elements):
                    raise RuleError(lineno, "seq needs a CORE element")
                block.sequences.append(VgSequence(elements, modality))
            else:
                raise RuleError(lineno, f"unexpected VERBGROUPS line: {line!r}")

        elif section == "TEMPLATES":
            if line.startswith("template "):
                name = line[len("template "):].strip()
                if name in rs.templates:
                    raise RuleError(lineno, f"duplicate template {name!r}")
                block = TemplateSchema(name, [])
                rs.templates[name] = block
            elif line.startswith("slot "):
                if not isinstance(block, TemplateSchema):
                    raise RuleError(lineno, "slot outside template block")
                body = line[len("slot "):].strip()
                fixed = None
                if "=" in body:
                    body, fixed = body.split("=", 1)
                    fixed = fixed.strip()
                words = body.strip().split()
                kind = "text"
                if words and words[-1] in ("list", "ref", "name", "date", "currency",
                                           "symbol", "text"):
                    kind = words[-1]
                    words = words[:-1]
                slot_name = " ".join(words)
                if not slot_name:
                    raise RuleError(lineno, "slot needs a name")
                block.slots.append(SlotDef(slot_name, kind, fixed))
            else:
                raise RuleError(lineno, f"unexpected TEMPLATES line: {line!r}")

        elif section == "PATTERNS":
            if line.startswith("pattern "):
                words = line[len("pattern "):].split()
                if not words:
                    raise RuleError(lineno, "pattern needs a name")
                name = words[0]
                if name in seen_names:
                    raise RuleError(lineno, f"duplicate rule name {name!r}")
                seen_names.add(name)
                expand = False
                modality = None
                for flag in words[1:]:
                    if flag == "expand":
                        expand = True
                    elif flag.startswith("modality="):
                        modality = flag[len("modality="):]
                    else:
                        raise RuleError(lineno, f"unknown pattern flag {flag!r}")
                block = PatternRule(name, [], "", [], expand=expand,
                                    modality_filter=modality)
                rs.patterns.append(block)
            elif line.startswith("seed "):
                name = line[len("seed "):].strip()
                if name in seen_names:
                    raise RuleError(lineno, f"duplicate rule name {name!r}")
                seen_names.add(name)
                block = SeedRule(name, PhraseConstraint("ng"), [])
                rs.seeds.append(block)
            elif line.startswith("entity "):
                body = line[len("entity "):]
                if "=" not in body:
                    raise RuleError(lineno, "entity needs 'entity Type = constraint'")
                etype, constraint = body.split("=", 1)
                elements = parse_elements(constraint.strip(), lineno)
                if len(elements) != 1 or not isinstance(elements[0], PhraseConstraint):
                    raise RuleError(lineno, "entity takes one phrase constraint")
                rs.entities.append(EntityRule(etype.strip(), elements[0]))
            elif line.startswith("match"):
                if not isinstance(block, PatternRule):
                    raise RuleError(lineno, "match outside pattern block")
                _, _, body = line.partition("=")
                if block.elements:
                    raise RuleError(lineno, f"pattern {block.name!r} has two match lines")
                block.elements = parse_elements(body.strip(), lineno)
            elif line.startswith("base"):
                if not isinstance(block, SeedRule):
                    raise RuleError(lineno, "base outside seed block")
                _, _, body = line.partition("=")
                elements = parse_elements(body.strip(), lineno)
                if len(elements) != 1 or not isinstance(elements[0], PhraseConstraint):
                    raise RuleError(lineno, "seed base takes one phrase constraint")
                block.base = elements[0]
            elif line.startswith("need "):
                if not isinstance(block, SeedRule):
                    raise RuleError(lineno, "need outside seed block")
                body = line[len("need "):]
                if "=" not in body:
                    raise RuleError(lineno, "need syntax: 'need of = var[:class]' or 'need name = var'")
                req, target = body.split("=", 1)
                req = req.strip()
                if req not in ("of", "name"):
                    raise RuleError(lineno, f"unknown requirement {req!r}")
                target = target.strip()
                cls = None
                if ":" in target:
                    target, cls = target.split(":", 1)
                block.needs.append((req, target.strip(), cls))
            elif line.startswith("fill "):
                if not isinstance(block, (PatternRule, SeedRule)):
                    raise RuleError(lineno, "fill outside pattern/seed block")
                template, fills = parse_fill_line(line[len("fill "):], lineno)
                if block.template and block.template != template:
                    raise RuleError(lineno, f"rule {block.name!r} fills two templates")
                block.template = template
                block.fills.extend(fills)
            else:
                raise RuleError(lineno, f"unexpected PATTERNS line: {line!r}")

        elif section == "MERGE":
            if line.startswith("hierarchy "):
                body = line[len("hierarchy "):]
                if ">" not in body:
                    raise RuleError(lineno, "hierarchy syntax: 'parent > child, child'")
                parent, children = body.split(">", 1)
                parent = parent.strip().lower()
                for child in children.split(","):
                    child = child.strip().lower()
                    if child:
                        rs.merge.hierarchy[child] = parent
            elif line.startswith("synonym "):
                group = {w.strip().lower() for w in line[len("synonym "):].split(",") if w.strip()}
                if len(group) < 2:
                    raise RuleError(lineno, "synonym needs at least two members")
                rs.merge.synonyms.append(group)
            elif line.startswith("link "):
                body = line[len("link "):]
                if "=" not in body or "." not in body.split("=", 1)[0]:
                    raise RuleError(lineno, "link syntax: 'link TEMPLATE.Slot = TARGET'")
                left, target = body.split("=", 1)
                template, slot = left.strip().split(".", 1)
                rs.merge.links.append((template.strip(), slot.strip(), target.strip()))
            elif line.startswith("nearness-limit "):
                try:
                    rs.merge.nearness_limit = int(line.split()[1])
                except (IndexError, ValueError):
                    raise RuleError(lineno, "nearness-limit needs an integer")
            else:
                raise RuleError(lineno, f"unexpected MERGE line: {line!r}")

    _validate(rs)
    return rs


def _validate(rs: RuleSet) -> None:
    for rule in rs.patterns:
        if not rule.elements:
            raise RuleError(0, f"pattern {rule.name!r} has no match line")
        if not rule.template:
            raise RuleError(0, f"pattern {rule.name!r} has no fill line")
        bound = {e.binding for e in rule.elements
                 if isinstance(e, PhraseConstraint) and e.binding}
        for slot, expr in rule.fills:
            for var in expr.variables():
                if var not in bound:
                    raise RuleError(0, f"pattern {rule.name!r}: unbound variable "
                                       f"{var!r} in fill of slot {slot!r}")
        _check_schema(rs, rule.name, rule.template, rule.fills)
    for seed in rs.seeds:
        bound = {"self"} | {var for _, var, _ in seed.needs}
        for slot, expr in seed.fills:
            for var in expr.variables():
                if var not in bound:
                    raise RuleError(0, f"seed {seed.name!r}: unbound variable {var!r}")
        _check_schema(rs, seed.name, seed.template, seed.fills)
    for vg in rs.vgclasses:
        if vg.core_class not in rs.classes:
            raise RuleError(0, f"vgclass {vg.name!r}: unknown core class {vg.core_class!r}")


def _check_schema(rs: RuleSet, rule_name: str, template: str,
                  fills: list[tuple[str, FillExpr]]) -> None:
    if not template:
        raise RuleError(0, f"rule {rule_name!r} has no fill line")
    schema = rs.templates.get(template)
    if schema is None:
        raise RuleError(0, f"rule {rule_name!r}: unknown template {template!r}")
    for slot, _ in fills:
        if schema.slot(slot) is None:
            raise RuleError(0, f"rule {rule_name!r}: template {template!r} "
                               f"has no slot {slot!r}")


# -- printing -----------------------------------------------------------------

def format_rules(rs: RuleSet) -> str:
    out: list[str] = []
    if rs.productions:
        out.append("PHRASES")
        for name, expr in rs.productions:
            out.append(f"{name} = {expr}")
        out.append("")
    if rs.classes:
        out.append("CLASSES")
        for name, words in rs.classes.items():
            line = f"{name} = {', '.join(words)}"
            if name in rs.nominals:
                line += f" ; nominal: {', '.join(rs.nominals[name])}"
            out.append(line)
        out.append("")
    if rs.vgclasses:
        out.append("VERBGROUPS")
        for vg in rs.vgclasses:
            out.append(f"vgclass {vg.name} core={vg.core_class}")
            for seq in vg.sequences:
                tag = f" {seq.modality.lower()}" if seq.modality else ""
                rendered = " ".join(e.render() for e in seq.elements)
                out.append(f"seq{tag} = {rendered}")
        out.append("")
    if rs.templates:
        out.append("TEMPLATES")
        for schema in rs.templates.values():
            out.append(f"template {schema.name}")
            for slot in schema.slots:
                line = f"slot {slot.name}"
                if slot.kind != "text":
                    line += f" {slot.kind}"
                if slot.fixed is not None:
                    line += f" = {slot.fixed}"
                out.append(line)
        out.append("")
    if rs.patterns or rs.seeds or rs.entities:
        out.append("PATTERNS")
        for rule in rs.patterns:
            flags = " expand" if rule.expand else ""
            if rule.modality_filter:
                flags += f" modality={rule.modality_filter}"
            out.append(f"pattern {rule.name}{flags}")
            out.append("match = " + " ".join(e.render() for e in rule.elements))
            fills = ", ".join(f"{slot} = {expr.render()}" for slot, expr in rule.fills)
            out.append(f"fill {rule.template}: {fills}")
        for seed in rs.seeds:
            out.append(f"seed {seed.name}")
            out.append(f"base = {seed.base.render()}")
            for req, var, cls in seed.needs:
                target = f"{var}:{cls}" if cls else var
                out.append(f"need {req} = {target}")
            fills = ", ".join(f"{slot} = {expr.render()}" for slot, expr in seed.fills)
            out.append(f"fill {seed.template}: {fills}")
        for ent in rs.entities:
            out.append(f"entity {ent.entity_type} = {ent.constraint.render()}")
        out.append("")
    if rs.merge.hierarchy or rs.merge.synonyms or rs.merge.links or \
            rs.merge.nearness_limit is not None:
        out.append("MERGE")
        parents: dict[str, list[str]] = {}
        for child, parent in rs.merge.hierarchy.items():
            parents.setdefault(parent, []).append(child)
        for parent, children in parents.items():
            out.append(f"hierarchy {parent} > {', '.join(children)}")
        for group in rs.merge.synonyms:
            out.append(f"synonym {', '.join(sorted(group))}")
        for template, slot, target in rs.merge.links:
            out.append(f"link {template}.{slot} = {target}")
        if rs.merge.nearness_limit is not None:
            out.append(f"nearness-limit {rs.merge.nearness_limit}")
        out.append("")
    return "\n".join(out)
