"""Final-answer values shared by solution rendering and grading.

A value is one of three kinds:

* ``RATIONAL``: an exact ``fractions.Fraction``. Integers, terminating
  decimals and simple ``a/b`` fractions all normalize here.
* ``DECIMAL``: a digit string kept verbatim (used for truncated decimal
  source forms); numerically it compares as the exact fraction it spells.
* ``EXPRESSION``: anything symbolic, stored as normalized text.

Numeric kinds compare by exact value, so ``Decimal("0.5")`` equals
``Rational(1, 2)``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

_DEVANAGARI_DIGITS = {0x0966 + i: ord("0") + i for i in range(10)}


def map_devanagari_digits(text: str) -> str:
    """Translate the ten digit codepoints U+0966..U+096F to ASCII 0-9."""
    return text.translate(_DEVANAGARI_DIGITS)


class AnswerKind(Enum):
    RATIONAL = "Rational"
    DECIMAL = "Decimal"
    EXPRESSION = "Expression"


_INT_RE = re.compile(r"[-+]?(?:\d{1,3}(?:,\d{3})+|\d+)$")
_DECIMAL_RE = re.compile(r"[-+]?(?:\d{1,3}(?:,\d{3})+|\d+)\.\d+$")
_SLASH_FRACTION_RE = re.compile(r"([-+]?\d+)\s*/\s*(-?\d+)$")
_MIXED_RE = re.compile(r"(\d+)\s*\+\s*(\d+)\s*/\s*(\d+)$")
_LATEX_FRACTION_RE = re.compile(
    r"([-+]?)\\[dt]?frac\s*\{\s*(-?\d+)\s*\}\s*\{\s*(-?\d+)\s*\}$"
)
_WS_RE = re.compile(r"\s+")


def as_fraction(text: str) -> Fraction | None:
    """Parse ``text`` as an exact rational, or return None.

    Accepts integers (with thousands commas), terminating decimals,
    ``a/b`` and ``\\frac{a}{b}`` forms.
    """
    s = text.strip()
    if not s:
        return None
    if _INT_RE.fullmatch(s) or _DECIMAL_RE.fullmatch(s):
        return Fraction(s.replace(",", ""))
    m = _SLASH_FRACTION_RE.fullmatch(s)
    if m:
        num, den = int(m.group(1)), int(m.group(2))
        return Fraction(num, den) if den != 0 else None
    m = _MIXED_RE.fullmatch(s)
    if m:
        whole, num, den = (int(m.group(i)) for i in (1, 2, 3))
        return whole + Fraction(num, den) if den != 0 else None
    m = _LATEX_FRACTION_RE.fullmatch(s)
    if m:
        sign = -1 if m.group(1) == "-" else 1
        num, den = int(m.group(2)), int(m.group(3))
        return sign * Fraction(num, den) if den != 0 else None
    return None


def format_exact(value: Fraction | int) -> str:
    """Render an exact rational without floating point.

    Integers render bare, terminating decimals as decimal strings
    ("121/2" -> "60.5"), anything else as a fraction with the whole part
    split off ("10/3" -> "3 + 1/3").
    """
    value = Fraction(value)
    if value < 0:
        positive = format_exact(-value)
        if " + " in positive:
            # "-3 + 1/3" would read as addition; keep negatives as one fraction.
            return f"{value.numerator}/{value.denominator}"
        return "-" + positive
    if value.denominator == 1:
        return str(value.numerator)
    den = value.denominator
    twos = fives = 0
    d = den
    while d % 2 == 0:
        d //= 2
        twos += 1
    while d % 5 == 0:
        d //= 5
        fives += 1
    if d == 1:
        k = max(twos, fives)
        digits = str(value.numerator * 10**k // den).rjust(k + 1, "0")
        return f"{digits[:-k]}.{digits[-k:]}"
    whole = value.numerator // den
    part = value - whole
    if whole == 0:
        return f"{part.numerator}/{part.denominator}"
    return f"{whole} + {part.numerator}/{part.denominator}"


def normalize_expression(text: str) -> str:
    """Collapse whitespace and strip LaTeX wrappers (\\boxed, \\( \\), $)."""
    s = text.strip()
    while True:
        prev = s
        if s.startswith("\\boxed{") and s.endswith("}"):
            s = s[len("\\boxed{"):-1].strip()
        for open_, close in (("\\(", "\\)"), ("\\[", "\\]"), ("$", "$")):
            if s.startswith(open_) and s.endswith(close) and len(s) > len(open_) + len(close) - 1:
                s = s[len(open_):-len(close)].strip()
        if s == prev:
            break
    return _WS_RE.sub(" ", s).strip()


@dataclass(frozen=True, eq=False)
class AnswerValue:
    kind: AnswerKind
    rational: Fraction | None = None
    decimal_text: str | None = None
    expression: str | None = None

    def __post_init__(self):
        if self.kind is AnswerKind.RATIONAL:
            if not isinstance(self.rational, Fraction):
                raise ValueError("rational kind requires a Fraction")
        elif self.kind is AnswerKind.DECIMAL:
            if not self.decimal_text or as_fraction(self.decimal_text) is None:
                raise ValueError(f"not a decimal digit string: {self.decimal_text!r}")
        elif not self.expression:
            raise ValueError("expression kind requires nonempty text")

    @classmethod
    def from_rational(cls, value) -> "AnswerValue":
        return cls(kind=AnswerKind.RATIONAL, rational=Fraction(value))

    @classmethod
    def from_decimal(cls, text: str) -> "AnswerValue":
        return cls(kind=AnswerKind.DECIMAL, decimal_text=text.strip())

    @classmethod
    def from_expression(cls, text: str) -> "AnswerValue":
        return cls(kind=AnswerKind.EXPRESSION, expression=normalize_expression(text))

    @property
    def is_numeric(self) -> bool:
        return self.kind in (AnswerKind.RATIONAL, AnswerKind.DECIMAL)

    @property
    def numeric_value(self) -> Fraction:
        if self.kind is AnswerKind.RATIONAL:
            return self.rational
        if self.kind is AnswerKind.DECIMAL:
            return as_fraction(self.decimal_text)
        raise ValueError("expression values have no numeric value")

    def render(self) -> str:
        if self.kind is AnswerKind.RATIONAL:
            return format_exact(self.rational)
        if self.kind is AnswerKind.DECIMAL:
            return self.decimal_text
        return self.expression

    def __eq__(self, other):
        if not isinstance(other, AnswerValue):
            return NotImplemented
        if self.is_numeric and other.is_numeric:
            return self.numeric_value == other.numeric_value
        if self.kind is AnswerKind.EXPRESSION and other.kind is AnswerKind.EXPRESSION:
            return self.expression == other.expression
        return False

    def __hash__(self):
        if self.is_numeric:
            return hash(("num", self.numeric_value))
        return hash(("expr", self.expression))

    def to_dict(self) -> dict:
        out = {"kind": self.kind.value}
        if self.kind is AnswerKind.RATIONAL:
            out["rational"] = f"{self.rational.numerator}/{self.rational.denominator}"
        elif self.kind is AnswerKind.DECIMAL:
            out["decimal_text"] = self.decimal_text
        else:
            out["expression"] = self.expression
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "AnswerValue":
        kind = AnswerKind(data["kind"])
        if kind is AnswerKind.RATIONAL:
            num, den = data["rational"].split("/")
            return cls.from_rational(Fraction(int(num), int(den)))
        if kind is AnswerKind.DECIMAL:
            return cls.from_decimal(data["decimal_text"])
        return cls.from_expression(data["expression"])


def parse_value(candidate: str) -> AnswerValue | None:
    """Parse a candidate answer string into a value, numeric when possible."""
    s = map_devanagari_digits(candidate)
    s = normalize_expression(s)
    s = s.rstrip("।").rstrip()
    if s.endswith(".") and as_fraction(s[:-1]) is not None:
        s = s[:-1]
    if not s:
        return None
    frac = as_fraction(s)
    if frac is not None:
        return AnswerValue.from_rational(frac)
    return AnswerValue.from_expression(s)
