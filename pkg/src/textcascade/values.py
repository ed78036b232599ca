"""Normalized values for dates, times, and currency amounts.

Each value type round-trips: parsing the canonical rendering of a value
yields an equal value.
"""
from __future__ import annotations

from dataclasses import dataclass

MONTH_NAMES = [
    "January", "February", "March", "April", "May", "June",
    "July", "August", "September", "October", "November", "December",
]

# Two-digit years at or above the pivot are 19xx, below it 20xx.
TWO_DIGIT_YEAR_PIVOT = 50

# Multipliers for written number scales.
SCALE_WORDS = {"thousand": 1_000, "million": 1_000_000, "billion": 1_000_000_000}

NUMBER_WORDS = {
    "one": 1, "two": 2, "three": 3, "four": 4, "five": 5, "six": 6,
    "seven": 7, "eight": 8, "nine": 9, "ten": 10, "eleven": 11,
    "twelve": 12, "twenty": 20, "thirty": 30, "forty": 40, "fifty": 50,
    "sixty": 60, "seventy": 70, "eighty": 80, "ninety": 90,
    "hundred": 100,
}


@dataclass(frozen=True)
class DateValue:
    """Calendar date, possibly known only to month or year granularity."""

    year: int
    month: int | None = None
    day: int | None = None

    def format(self) -> str:
        if self.month is None:
            return str(self.year)
        name = MONTH_NAMES[self.month - 1]
        if self.day is None:
            return f"{name} {self.year}"
        return f"{self.day} {name} {self.year}"

    def __str__(self) -> str:
        return self.format()


@dataclass(frozen=True)
class TimeValue:
    hour: int
    minute: int
    suffix: str = ""  # "AM"/"PM" when stated

    def format(self) -> str:
        text = f"{self.hour}:{self.minute:02d}"
        return f"{text} {self.suffix}" if self.suffix else text

    def __str__(self) -> str:
        return self.format()


@dataclass(frozen=True)
class CurrencyValue:
    amount: int
    code: str  # symbol-like code: "$", "NT$", ...

    def format(self) -> str:
        return f"{self.code}{self.amount}"

    def __str__(self) -> str:
        return self.format()


def expand_year(value: int) -> int:
    if value >= 100:
        return value
    if value >= TWO_DIGIT_YEAR_PIVOT:
        return 1900 + value
    return 2000 + value


def parse_int(text: str) -> int | None:
    """Digits with optional thousands separators; None when not a number."""
    cleaned = text.replace(",", "")
    if not cleaned:
        return None
    try:
        return int(cleaned)
    except ValueError:
        try:
            f = float(cleaned)
        except ValueError:
            return None
        return int(f) if f == int(f) else None


def parse_decimal(text: str) -> float | None:
    cleaned = text.replace(",", "")
    try:
        return float(cleaned)
    except ValueError:
        return None
