"""Stage 1: complex words.

Segments raw text into tokens, then recognizes multiwords, company and
person names, locations, dates, times, and currency amounts with small
microgrammars over the token sequence.  Unknown capitalized words get
typed by context where the surroundings reveal a type.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field, replace

from .lexicon import Lexicon, UNKNOWN
from .values import (
    CurrencyValue, DateValue, TimeValue, SCALE_WORDS, expand_year, parse_decimal, parse_int,
)

COMPANY = "CompanyName"
PERSON = "PersonName"
LOCATION = "Location"
DATE = "Date"
TIME = "Time"
CURRENCY = "Currency"
MULTIWORD = "Multiword"

# Equal-span ties between candidate mentions resolve in this order.
KIND_PRECEDENCE = [COMPANY, PERSON, LOCATION, DATE, TIME, CURRENCY, MULTIWORD]
_RANK = {kind: i for i, kind in enumerate(KIND_PRECEDENCE)}


@dataclass(frozen=True, order=True)
class Span:
    start: int
    end: int

    def __post_init__(self) -> None:
        if self.start >= self.end:
            raise ValueError(f"empty span {self.start}..{self.end}")

    def contains(self, other: "Span") -> bool:
        return self.start <= other.start and other.end <= self.end

    def overlaps(self, other: "Span") -> bool:
        return self.start < other.end and other.start < self.end


@dataclass(frozen=True)
class Token:
    surface: str
    lower: str
    span: Span
    lexical_classes: frozenset[str]

    @property
    def is_word(self) -> bool:
        return self.surface[0].isalnum()

    @property
    def capitalized(self) -> bool:
        return self.surface[0].isupper()

    @property
    def is_unknown(self) -> bool:
        return self.lexical_classes == frozenset({UNKNOWN})


@dataclass(frozen=True)
class EntityMention:
    kind: str
    span: Span
    first: int  # token index range, inclusive start
    last: int   # exclusive end
    normalized: object  # str, DateValue, TimeValue, or CurrencyValue

    def token_count(self) -> int:
        return self.last - self.first


_TOKEN_RE = re.compile(
    r"""
    \d[\d,\.]*\d | \d                      # numbers, keeping , and . inside
    | [A-Za-z][A-Za-z0-9\-]*               # words, hyphenated kept whole
    | '(?:s|t|re|ve|ll|d|m)\b              # clitics
    | \S                                    # any other single character
    """,
    re.VERBOSE,
)

_PUNCT_CLASSES = frozenset({"punctuation"})


def tokenize(text: str, lexicon: Lexicon) -> list[Token]:
    """Split text into word/number/punctuation tokens with lexicon classes.

    Known abbreviations ("Co.", "Mr.") keep their period as one token so
    that designator lookups and sentence handling see the written form.
    """
    tokens: list[Token] = []
    for m in _TOKEN_RE.finditer(text):
        surface = m.group(0)
        span = Span(m.start(), m.end())
        if tokens and surface == ".":
            prev = tokens[-1]
            if prev.span.end == span.start and lexicon.is_abbreviation(prev.surface + "."):
                fused = prev.surface + "."
                tokens[-1] = Token(fused, fused.lower(), Span(prev.span.start, span.end),
                                   _classes_for(fused, lexicon))
                continue
        tokens.append(Token(surface, surface.lower(), span, _classes_for(surface, lexicon)))
    return tokens


def _classes_for(surface: str, lexicon: Lexicon) -> frozenset[str]:
    classes = lexicon.classes(surface)
    if classes:
        return classes
    if surface[0].isdigit():
        return frozenset({"number"})
    if not surface[0].isalnum():
        return _PUNCT_CLASSES
    return frozenset({UNKNOWN})


# --------------------------------------------------------------------------
# Microgrammars.  Each returns candidate mentions; maximal non-overlapping
# candidates win, longest first, ties by kind precedence.
# --------------------------------------------------------------------------

def recognize_entities(tokens: list[Token], lexicon: Lexicon) -> list[EntityMention]:
    candidates: list[EntityMention] = []
    lowers = [t.lower for t in tokens]
    candidates += _multiword_candidates(tokens, lowers, lexicon)
    candidates += _company_candidates(tokens, lexicon)
    candidates += _person_candidates(tokens, lexicon)
    candidates += _date_candidates(tokens, lexicon)
    candidates += _time_candidates(tokens)
    candidates += _currency_candidates(tokens, lowers, lexicon)
    return _select(candidates)


def _select(candidates: list[EntityMention]) -> list[EntityMention]:
    ordered = sorted(
        candidates,
        key=lambda m: (m.first, -(m.last - m.first), _RANK.get(m.kind, len(_RANK))),
    )
    chosen: list[EntityMention] = []
    taken_until = -1
    for mention in ordered:
        if mention.first > taken_until:
            chosen.append(mention)
            taken_until = mention.last - 1
    return chosen


def _span_of(tokens: list[Token], first: int, last: int) -> Span:
    return Span(tokens[first].span.start, tokens[last - 1].span.end)


def _surface_of(tokens: list[Token], first: int, last: int) -> str:
    return " ".join(t.surface for t in tokens[first:last])


def _multiword_candidates(tokens, lowers, lexicon) -> list[EntityMention]:
    found = []
    for i in range(len(tokens)):
        hit = lexicon.multiword_at(lowers, i)
        if hit is None:
            continue
        length, entry = hit
        if "location" in entry.classes:
            kind, norm = LOCATION, _surface_of(tokens, i, i + length)
        elif "company-name" in entry.classes:
            kind, norm = COMPANY, _surface_of(tokens, i, i + length)
        elif "first-name" in entry.classes:
            continue
        else:
            kind, norm = MULTIWORD, entry.surface
        found.append(EntityMention(kind, _span_of(tokens, i, i + length), i, i + length, norm))
    return found


def _namey(token: Token) -> bool:
    return token.is_word and token.capitalized


def _company_candidates(tokens, lexicon) -> list[EntityMention]:
    found = []
    for i, tok in enumerate(tokens):
        if "location" in tok.lexical_classes and tok.is_word:
            found.append(EntityMention(LOCATION, tok.span, i, i + 1, tok.surface))
        if "company-name" in tok.lexical_classes:
            found.append(EntityMention(COMPANY, tok.span, i, i + 1, tok.surface))
        if "corp-designator" not in tok.lexical_classes:
            continue
        # walk left over the capitalized run preceding the designator
        start = i
        while start > 0 and _namey(tokens[start - 1]) and \
                "corp-designator" not in tokens[start - 1].lexical_classes:
            start -= 1
        if start < i:
            found.append(EntityMention(
                COMPANY, _span_of(tokens, start, i + 1), start, i + 1,
                _surface_of(tokens, start, i + 1)))
    return found


def _person_candidates(tokens, lexicon) -> list[EntityMention]:
    found = []
    for i, tok in enumerate(tokens):
        if "first-name" not in tok.lexical_classes or not tok.capitalized:
            continue
        j = i + 1
        while j < len(tokens) and _namey(tokens[j]) and (
                tokens[j].is_unknown or "first-name" in tokens[j].lexical_classes):
            j += 1
        if j > i + 1:
            found.append(EntityMention(
                PERSON, _span_of(tokens, i, j), i, j, _surface_of(tokens, i, j)))
    return found


def _month_of(token: Token, lexicon: Lexicon) -> int | None:
    value = lexicon.annotation(token.lower, "month")
    return int(value) if value else None


def _date_candidates(tokens, lexicon) -> list[EntityMention]:
    found = []
    n = len(tokens)

    def num(i):
        return parse_int(tokens[i].surface) if i < n and tokens[i].surface[0].isdigit() else None

    for i in range(n):
        month = _month_of(tokens[i], lexicon) if tokens[i].is_word else None
        if month is not None:
            day = num(i + 1)
            if day is not None and 1 <= day <= 31:
                # Month day [, year]
                j = i + 2
                year = None
                if j < n and tokens[j].surface == "," and num(j + 1):
                    year, j = expand_year(num(j + 1)), j + 2
                elif num(j) and num(j) > 31:
                    year, j = expand_year(num(j)), j + 1
                if year is not None:
                    found.append(EntityMention(DATE, _span_of(tokens, i, j), i, j,
                                               DateValue(year, month, day)))
                else:
                    found.append(EntityMention(DATE, _span_of(tokens, i, i + 2), i, i + 2,
                                               DateValue(0, month, day)))
            else:
                year = num(i + 1)
                if year is not None and year >= 100:
                    # Month year
                    found.append(EntityMention(DATE, _span_of(tokens, i, i + 2), i, i + 2,
                                               DateValue(year, month)))
        day = num(i)
        if day is not None and 1 <= day <= 31 and i + 1 < n and tokens[i + 1].is_word:
            month2 = _month_of(tokens[i + 1], lexicon)
            if month2 is not None:
                year = num(i + 2)
                if year is not None:
                    found.append(EntityMention(
                        DATE, _span_of(tokens, i, i + 3), i, i + 3,
                        DateValue(expand_year(year), month2, day)))
    return found


_TIME_RE = re.compile(r"^(\d{1,2})[:.](\d{2})$")


def _time_candidates(tokens) -> list[EntityMention]:
    found = []
    for i, tok in enumerate(tokens):
        m = _TIME_RE.match(tok.surface)
        if not m:
            continue
        hour, minute = int(m.group(1)), int(m.group(2))
        if hour > 23 or minute > 59:
            continue
        last, suffix = i + 1, ""
        if i + 1 < len(tokens) and tokens[i + 1].lower in ("am", "pm", "a.m.", "p.m."):
            suffix = tokens[i + 1].lower[0].upper() + "M"
            last = i + 2
        found.append(EntityMention(TIME, _span_of(tokens, i, last), i, last,
                                   TimeValue(hour, minute, suffix)))
    return found


def _currency_candidates(tokens, lowers, lexicon) -> list[EntityMention]:
    found = []
    n = len(tokens)
    for i in range(n):
        tok = tokens[i]
        # symbol-prefixed amounts: $12,000 / NT$20000000
        if tok.surface == "$" or "currency-code" in tok.lexical_classes:
            code, j = tok.surface, i + 1
            if tok.surface != "$" and j < n and tokens[j].surface == "$" and \
                    tokens[j].span.start == tok.span.end:
                code, j = tok.surface + "$", j + 1
            amount, j2 = _read_amount(tokens, lowers, j, lexicon)
            if amount is not None:
                found.append(EntityMention(CURRENCY, _span_of(tokens, i, j2), i, j2,
                                           CurrencyValue(amount, code)))
        # amount followed by a currency-unit word or multiword
        if tok.surface[0].isdigit():
            amount, j = _read_amount(tokens, lowers, i, lexicon)
            if amount is None or j >= n:
                continue
            unit = lexicon.multiword_at(lowers, j, require_class="currency-unit")
            if unit is not None:
                length, entry = unit
                code = entry.annotations.get("code", entry.surface)
                found.append(EntityMention(CURRENCY, _span_of(tokens, i, j + length),
                                           i, j + length, CurrencyValue(amount, code)))
            elif "currency-unit" in tokens[j].lexical_classes:
                code = lexicon.annotation(lowers[j], "code") or tokens[j].surface
                found.append(EntityMention(CURRENCY, _span_of(tokens, i, j + 1),
                                           i, j + 1, CurrencyValue(amount, code)))
    return found


def _read_amount(tokens, lowers, i, lexicon) -> tuple[int | None, int]:
    if i >= len(tokens) or not tokens[i].surface[0].isdigit():
        return None, i
    value = parse_decimal(tokens[i].surface)
    if value is None:
        return None, i
    j = i + 1
    while j < len(tokens) and lowers[j] in SCALE_WORDS:
        value *= SCALE_WORDS[lowers[j]]
        j += 1
    return int(value), j


# --------------------------------------------------------------------------
# Contextual typing of unknown capitalized words.
# --------------------------------------------------------------------------

def contextual_name_typing(tokens: list[Token], mentions: list[EntityMention],
                           lexicon: Lexicon) -> list[EntityMention]:
    """Promote unknown capitalized tokens whose context reveals a type.

    Existing mentions are never retyped; promotions fill gaps only.
    """
    covered = [False] * len(tokens)
    for m in mentions:
        for k in range(m.first, m.last):
            covered[k] = True

    promoted: list[EntityMention] = []

    def free_caps_run(i: int) -> int:
        j = i
        while j < len(tokens) and not covered[j] and tokens[j].is_unknown \
                and tokens[j].capitalized:
            j += 1
        return j

    i = 0
    n = len(tokens)
    while i < n:
        if covered[i] or not (tokens[i].is_unknown and tokens[i].capitalized):
            i += 1
            continue
        j = free_caps_run(i)
        # possessive before a company-revealing noun: <Cap>'s sales
        if j == i + 1 and j + 1 < n and tokens[j].surface == "'s" \
                and "company-context" in tokens[j + 1].lexical_classes:
            promoted.append(EntityMention(COMPANY, tokens[i].span, i, i + 1,
                                          tokens[i].surface))
            i = j
            continue
        # name, <age>, <title> appositive
        if j + 2 < n and tokens[j].surface == "," and tokens[j + 1].surface[0].isdigit():
            k = j + 2
            if k < n and tokens[k].surface == ",":
                k += 1
                if k < n and "determiner" in tokens[k].lexical_classes:
                    k += 1
                if k < n and "title" in tokens[k].lexical_classes:
                    promoted.append(EntityMention(
                        PERSON, _span_of(tokens, i, j), i, j, _surface_of(tokens, i, j)))
                    i = j
                    continue
        i = j if j > i else i + 1

    if not promoted:
        return mentions
    return _select(list(mentions) + promoted)
