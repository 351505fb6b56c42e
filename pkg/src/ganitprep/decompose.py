"""Exact place-value decomposition of integer multiplication and division.

Multiplication splits the first operand into its nonzero place-value parts
(543 -> 500 + 40 + 3), multiplies each by the second operand, and sums the
products. Division emits one segment per nonzero long-division quotient
digit (segment = digit * place * divisor) plus, when the division is
inexact, a final remainder segment whose partial is an exact fraction. All
arithmetic is integer/rational; no floats touch the result.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import NamedTuple, Sequence

from ganitprep.answers import format_exact, map_devanagari_digits
from ganitprep.corpus import (
    CorpusManifest,
    Language,
    Operation,
    Problem,
    replace_records,
    update_problem,
)

log = logging.getLogger(__name__)

OPERAND_LIMIT = 10**18


class TraceKind(Enum):
    MULTIPLICATION = "Multiplication"
    DIVISION = "Division"


@dataclass(frozen=True)
class DecompositionTrace:
    kind: TraceKind
    operand_a: int
    operand_b: int
    components: tuple[tuple[int, Fraction], ...]  # (segment, partial)
    total: Fraction

    @property
    def segments(self) -> tuple[int, ...]:
        return tuple(segment for segment, _ in self.components)

    @property
    def partials(self) -> tuple[Fraction, ...]:
        return tuple(partial for _, partial in self.components)


def _check_operand(name: str, value, minimum: int) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValueError(f"{name} must be an integer, got {value!r}")
    if value < minimum:
        raise ValueError(f"{name} must be >= {minimum}, got {value}")
    if value >= OPERAND_LIMIT:
        raise ValueError(f"{name} must be < 10^18, got {value}")
    return value


def _place_parts(n: int) -> list[int]:
    """Nonzero place-value parts of n, descending (507 -> [500, 7]); [0] for 0."""
    if n == 0:
        return [0]
    text = str(n)
    width = len(text)
    return [int(ch) * 10 ** (width - 1 - pos)
            for pos, ch in enumerate(text) if ch != "0"]


def decompose_mul(a: int, b: int) -> DecompositionTrace:
    """Decompose a * b by splitting ``a`` into place-value components."""
    a = _check_operand("multiplicand", a, 0)
    b = _check_operand("multiplier", b, 0)
    components = tuple((segment, Fraction(segment * b)) for segment in _place_parts(a))
    return DecompositionTrace(
        kind=TraceKind.MULTIPLICATION,
        operand_a=a,
        operand_b=b,
        components=components,
        total=Fraction(a * b),
    )


def decompose_div(a: int, b: int) -> DecompositionTrace:
    """Decompose a / b into long-division quotient-digit segments.

    Each nonzero quotient digit q at place p contributes segment q*p*b with
    partial q*p; a nonzero remainder r contributes the final segment r with
    the exact partial r/b.
    """
    a = _check_operand("dividend", a, 0)
    if isinstance(b, bool) or not isinstance(b, int):
        raise ValueError(f"divisor must be an integer, got {b!r}")
    if b == 0:
        raise ZeroDivisionError("division by zero")
    _check_operand("divisor", b, 1)
    quotient, remainder = divmod(a, b)
    components = [(part * b, Fraction(part)) for part in _place_parts(quotient) if part]
    if remainder:
        components.append((remainder, Fraction(remainder, b)))
    if not components:
        components = [(0, Fraction(0))]
    return DecompositionTrace(
        kind=TraceKind.DIVISION,
        operand_a=a,
        operand_b=b,
        components=tuple(components),
        total=Fraction(a, b),
    )


class _Wording(NamedTuple):
    breakdown: str
    step_mul: str
    step_div: str
    sum_mul: str
    sum_div: str
    final_mul: str
    final_div: str


_WORDING = {
    Language.ENGLISH: _Wording(
        breakdown="Break down {a} into place value components:",
        step_mul="Multiply each component by {b}:",
        step_div="Divide each component by {b}:",
        sum_mul="Add the products:",
        sum_div="Add the quotients:",
        final_mul="Final Answer: {a} multiplied by {b} equals {total}.",
        final_div="Final Answer: {a} divided by {b} equals {total}.",
    ),
    Language.HINDI: _Wording(
        breakdown="{a} को स्थानीय मान घटकों में विभाजित करें:",
        step_mul="प्रत्येक घटक को {b} से गुणा करें:",
        step_div="प्रत्येक घटक को {b} से भाग दें:",
        sum_mul="गुणनफलों को जोड़ें:",
        sum_div="भागफलों को जोड़ें:",
        final_mul="अंतिम उत्तर: {a} गुणा {b} बराबर {total} है।",
        final_div="अंतिम उत्तर: {a} भागा {b} बराबर {total} है।",
    ),
}


def render_trace(trace: DecompositionTrace, language: Language = Language.ENGLISH) -> str:
    """Render a trace as multi-line solution text; pure and deterministic."""
    words = _WORDING[language]
    mul = trace.kind is TraceKind.MULTIPLICATION
    symbol = "×" if mul else "÷"
    total = format_exact(trace.total)
    lines = [
        words.breakdown.format(a=trace.operand_a),
        "",
        f"{trace.operand_a} = " + " + ".join(str(s) for s in trace.segments),
        "",
        (words.step_mul if mul else words.step_div).format(b=trace.operand_b),
        "",
    ]
    for segment, partial in trace.components:
        lines.append(f"{segment} {symbol} {trace.operand_b} = {format_exact(partial)}")
        lines.append("")
    lines.append(words.sum_mul if mul else words.sum_div)
    lines.append(" + ".join(format_exact(p) for p in trace.partials) + f" = {total}")
    lines.append("")
    lines.append((words.final_mul if mul else words.final_div).format(
        a=trace.operand_a, b=trace.operand_b, total=total))
    return "\n".join(lines) + "\n"


_CALC_LINE_RE = re.compile(
    r"(\d+)\s*([×x*÷/])\s*(\d+)\s*=\s*[0-9.,/ ]+\s*$"
)
_MUL_SYMBOLS = {"×", "x", "*"}


class OperandPair(NamedTuple):
    a: int
    b: int
    operation: Operation


def extract_operands(problem: Problem) -> OperandPair | None:
    """Find the operand pair for a Mul/Div problem.

    Explicit ``extras["operand_a"/"operand_b"]`` win; otherwise the last
    line of the raw solution matching ``<int> <op> <int> = <number>`` is
    used, with Devanagari digits accepted. Returns None when nothing
    matches or the line's operator disagrees with the problem's tag.
    """
    extras = problem.extras
    if "operand_a" in extras and "operand_b" in extras:
        try:
            return OperandPair(int(extras["operand_a"]), int(extras["operand_b"]),
                               problem.operation)
        except (TypeError, ValueError):
            return None
    if not problem.raw_solution:
        return None
    for line in reversed(map_devanagari_digits(problem.raw_solution).splitlines()):
        match = _CALC_LINE_RE.search(line.strip())
        if not match:
            continue
        op = Operation.MUL if match.group(2) in _MUL_SYMBOLS else Operation.DIV
        if op is not problem.operation:
            return None
        return OperandPair(int(match.group(1)), int(match.group(3)), op)
    return None


class DecompositionOutcome(NamedTuple):
    manifest: CorpusManifest
    rewritten: int
    skipped: int
    flagged_ids: tuple[str, ...]


def apply_decomposition(
    manifest: CorpusManifest,
    operations: Sequence[Operation] = (Operation.MUL, Operation.DIV),
    language: Language | None = None,
) -> DecompositionOutcome:
    """Rewrite Mul/Div problems' solutions as decomposition text.

    Problems whose operands cannot be extracted are flagged and kept
    unchanged; everything else passes through untouched. Manifest size,
    order, and ids are preserved.
    """
    wanted = {op for op in operations if op in (Operation.MUL, Operation.DIV)}
    records = []
    rewritten = 0
    flagged = []
    for problem in manifest:
        if problem.operation not in wanted:
            records.append(problem)
            continue
        pair = extract_operands(problem)
        if pair is None:
            log.warning("operand extraction failed for problem %s", problem.id)
            flagged.append(problem.id)
            records.append(problem)
            continue
        if pair.operation is Operation.MUL:
            trace = decompose_mul(pair.a, pair.b)
        else:
            trace = decompose_div(pair.a, pair.b)
        text = render_trace(trace, language or problem.language)
        records.append(update_problem(problem, raw_solution=text))
        rewritten += 1
    return DecompositionOutcome(
        manifest=replace_records(manifest, records),
        rewritten=rewritten,
        skipped=len(flagged),
        flagged_ids=tuple(flagged),
    )
