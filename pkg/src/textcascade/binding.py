"""Constraint tests and slot-fill construction shared by stages 3 and 4."""
from __future__ import annotations

from .chunker import COMPANY, CURRENCY, DATE, LOCATION, NG, NG_LIKE, VG
from .lexicon import Lexicon
from .rules import FillExpr, PhraseConstraint, RuleSet
from .templates import Fill, date_fill, currency_fill
from .values import DateValue

KIND_MAP = {
    "ng": None,  # any noun-group-like kind
    "cn": COMPANY,
    "loc": LOCATION,
    "date": DATE,
    "cur": CURRENCY,
    "vg": VG,
    "prep": "Preposition",
    "conj": "Conjunction",
    "rel": "RelativePronoun",
    "comma": "Comma",
    "any": "*",
}

# pseudo-members usable inside CLASSES definitions
PSEUDO_COMPANY = "@company-name"
PSEUDO_CAP = "@capitalized"
PSEUDO_LOCATION = "@location"


def kind_accepts(kind_name: str, phrase_kind: str) -> bool:
    if kind_name == "any":
        return True
    if kind_name == "ng":
        return phrase_kind in NG_LIKE
    return KIND_MAP.get(kind_name) == phrase_kind


def head_in_class(cp, class_name: str, rules: RuleSet, lexicon: Lexicon) -> bool:
    if class_name == "@be":
        return "aux-be" in cp.head_phrase.head.classes
    if class_name == PSEUDO_CAP:
        return cp.head_is_name()
    if class_name.startswith("@nominal:"):
        forms = rules.nominals.get(class_name[len("@nominal:"):], [])
        return cp.head_lemma in forms or lexicon.lemma(cp.head_lemma) in forms
    words = rules.class_words(class_name)
    if not words:
        return False
    if PSEUDO_COMPANY in words and cp.kind == COMPANY:
        return True
    if PSEUDO_LOCATION in words and cp.kind == LOCATION:
        return True
    if PSEUDO_CAP in words and cp.head_is_name():
        return True
    lemma = lexicon.lemma(cp.head_lemma)
    return cp.head_lemma in words or lemma in words


def voice_accepts(voice: str, cp, be_to: bool = False) -> tuple[bool, str | None]:
    """Whether a verb-group satisfies the voice constraint.

    Returns (ok, resolution) where resolution names the voice an
    Active/Passive-ambiguous group was read as, for provenance.
    """
    features = cp.verb_features()
    if be_to and (features is None or not features.be_to):
        return False, None
    if voice == "any" or features is None:
        return True, None
    tag = features.voice_tag
    if voice == "active":
        if tag == "Active":
            return True, None
        if tag == "ActivePassive":
            return True, "Active"
        return False, None
    if voice == "passive":
        if tag == "Passive":
            return True, None
        if tag == "ActivePassive":
            return True, "Passive"
        return False, None
    if voice == "nonpassive":
        if tag in ("Active", "Infinitive", "Gerund"):
            return True, None
        if tag == "ActivePassive":
            return True, "Active"
        return False, None
    if voice == "inf":
        return tag == "Infinitive", None
    if voice == "ger":
        return tag == "Gerund", None
    return False, None


def constraint_matches(cp, constraint: PhraseConstraint, rules: RuleSet,
                       lexicon: Lexicon) -> tuple[bool, str | None]:
    """Test a complex phrase against one PhraseConstraint."""
    parts = cp.conjunct_list()
    if len(parts) > 1 and not constraint.conjoined:
        return False, None
    for part in parts:
        if not kind_accepts(constraint.kind, part.kind):
            return False, None
        if constraint.head_class and not head_in_class(part, constraint.head_class,
                                                       rules, lexicon):
            return False, None
    ok, resolution = voice_accepts(constraint.voice, cp, constraint.be_to)
    if not ok:
        return False, None
    return True, resolution


# -- fill construction -------------------------------------------------------

_SKIP_LEAD = {"determiner", "quantifier", "nummod"}


def make_fill(cp, lexicon: Lexicon) -> Fill:
    """Render one (non-conjoined) complex phrase as a slot fill."""
    if cp.kind == COMPANY:
        surface = cp.surface()
        return Fill(surface, kind="name", alias=lexicon.alias(surface),
                    keys=(Fill(surface).norm,))
    if cp.kind == LOCATION:
        surface = cp.surface()
        return Fill(surface, kind="name", alias=lexicon.alias(surface))
    if cp.kind == DATE:
        value = cp.base.head.normalized
        return Fill(value.format() if isinstance(value, DateValue) else cp.surface(),
                    kind="date")
    if cp.kind == CURRENCY:
        return currency_fill(cp.base.head.normalized)
    surface = cp.fill_surface()
    if cp.head_is_name():
        return Fill(surface, kind="name", alias=lexicon.alias(cp.head_lemma),
                    keys=description_keys(cp, lexicon))
    return Fill(surface, kind="text", keys=description_keys(cp, lexicon))


def fills_for(value, lexicon: Lexicon):
    """Binding value -> Fill or list of Fill (conjoined bindings)."""
    if value is None or isinstance(value, Fill):
        return value
    if isinstance(value, list):
        return [make_fill(v, lexicon) for v in value]
    parts = value.conjunct_list()
    if len(parts) > 1:
        return [make_fill(p, lexicon) for p in parts]
    return make_fill(parts[0], lexicon)


def description_keys(cp, lexicon: Lexicon) -> tuple[str, ...]:
    """Lemma-normalized modifier+head keys, one per prenominal conjunct."""
    units = cp.base.units
    head = cp.base.head
    body = [u for u in units[:-1] if not (u.classes & _SKIP_LEAD)
            and not u.surface[0].isdigit() and u.is_word_like()]
    groups: list[list] = [[]]
    for u in body:
        if "conjunction" in u.classes or u.surface == ",":
            groups.append([])
        else:
            groups[-1].append(u)
    head_lemma = lexicon.lemma(head.lemma_key)
    keys = []
    for group in groups:
        mods = " ".join(lexicon.lemma(u.lemma_key) for u in group)
        keys.append(f"{mods} {head_lemma}".strip())
    # always include the bare head as the vaguest key
    if head_lemma not in keys:
        keys.append(head_lemma)
    return tuple(dict.fromkeys(keys))


class FillEvalError(ValueError):
    pass


def eval_fill_expr(expr: FillExpr, env: dict, lexicon: Lexicon):
    """Evaluate a fill expression; None when every term is unbound."""
    values: list[Fill] = []
    saw_list = False
    for op, arg in expr.terms:
        if op == "symbol":
            values.append(Fill(arg, kind="symbol"))
        elif op == "literal":
            values.append(Fill(arg))
        elif op == "adjunct":
            fill = env.get("@" + arg)
            if fill is not None:
                values.append(fill)
        elif op == "var":
            got = fills_for(env.get(arg), lexicon)
            if isinstance(got, list):
                saw_list = True
                values.extend(got)
            elif got is not None:
                values.append(got)
        elif op == "during":
            cp = env.get(arg)
            if cp is not None:
                value = getattr(cp.base.head, "normalized", None)
                if isinstance(value, DateValue):
                    values.append(date_fill(value))
                else:
                    values.append(Fill(f"DURING: {cp.surface()}", kind="date"))
        elif op == "attr":
            var, attr = arg.split(".", 1)
            cp = env.get(var)
            if cp is None:
                continue
            got = _eval_attr(cp, attr, lexicon)
            if got is not None:
                values.append(got)
        else:
            raise FillEvalError(f"unknown fill term {op!r}")
    if not values:
        return None
    if len(values) > 1 or saw_list or len(expr.terms) > 1:
        return values
    return values[0]


def _eval_attr(cp, attr: str, lexicon: Lexicon) -> Fill | None:
    if attr == "surface":
        return Fill(cp.surface())
    if attr == "name":
        named = cp.name_part()
        return make_fill(named, lexicon) if named is not None else None
    if attr == "of":
        for prep, comp in cp.pp_complements:
            if prep == "of":
                return make_fill(comp, lexicon)
        return None
    if attr == "mods":
        text = cp.modifier_surface()
        return Fill(text) if text else None
    raise FillEvalError(f"unknown accessor .{attr}")
