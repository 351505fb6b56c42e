"""Answer extraction, grading, accuracy tables, and rater agreement.

Extraction searches model output in priority order: a LaTeX ``\\boxed{...}``
(last one wins), then the last line beginning "Final Answer" or its fixed
Hindi equivalents, then the last "#### " marker line, then the last
standalone number anywhere. Devanagari digits are mapped to ASCII before
parsing and thousands commas are stripped.

Grading compares exact rationals first and falls back to a symmetric
relative tolerance of 1e-6 for numeric pairs; expressions grade by
normalized text equality. Mixed kinds are Incorrect.
"""

from __future__ import annotations

import csv
import io
import json
import re
import unicodedata
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping, NamedTuple, Sequence

from ganitprep.answers import (
    AnswerKind,
    AnswerValue,
    as_fraction,
    map_devanagari_digits,
    parse_value,
)
from ganitprep.corpus import CorpusManifest, Difficulty, Language, Problem, Source
from ganitprep.errors import PipelineError

RELATIVE_TOLERANCE = Fraction(1, 10**6)

FINAL_ANSWER_MARKERS = ("Final Answer", "अंतिम उत्तर", "उत्तर")


class EvaluationError(PipelineError):
    pass


class Verdict(Enum):
    CORRECT = "Correct"
    INCORRECT = "Incorrect"
    UNPARSEABLE = "Unparseable"


_MARKER_LINE_RE = re.compile(
    r"^\s*(?:" + "|".join(re.escape(m) for m in FINAL_ANSWER_MARKERS) + r")\s*[:\-]?\s*(.*)$",
    re.IGNORECASE,
)
_HASH_LINE_RE = re.compile(r"^\s*####\s+(.*)$")
_ANY_NUMBER_RE = re.compile(
    r"[-+]?\\[dt]?frac\s*\{\s*-?\d+\s*\}\s*\{\s*-?\d+\s*\}"
    r"|[-+]?\d+\s*/\s*\d+"
    r"|[-+]?(?:\d{1,3}(?:,\d{3})+|\d+)(?:\.\d+)?"
)
_TOKEN_TRIM = ".,;:!?()[]{}%₹$€"


def _last_boxed(text: str) -> str | None:
    starts = [m.start() for m in re.finditer(r"\\boxed", text)]
    for idx in reversed(starts):
        scan = idx + len("\\boxed")
        while scan < len(text) and text[scan].isspace():
            scan += 1
        if scan >= len(text) or text[scan] != "{":
            continue
        depth = 1
        scan += 1
        begin = scan
        while scan < len(text):
            if text[scan] == "{":
                depth += 1
            elif text[scan] == "}":
                depth -= 1
                if depth == 0:
                    return text[begin:scan]
            scan += 1
    return None


def _is_word(token: str) -> bool:
    # Letters plus combining marks; isalpha() alone rejects Devanagari matras.
    return all(unicodedata.category(ch)[0] in ("L", "M") for ch in token)


def _prose_tail_number(text: str) -> Fraction | None:
    """Last number of a prose sentence, or None if the text is not prose.

    Prose means every token is either a plain word or a number, so
    "543 multiplied by 27 equals 14661." yields 14661 while
    "100y^2 - 44x^2 = 275" yields None and stays an expression.
    """
    last: Fraction | None = None
    for raw in text.replace("।", " ").split():
        token = raw.strip(_TOKEN_TRIM)
        if not token:
            continue
        value = as_fraction(token)
        if value is not None:
            last = value
            continue
        if not _is_word(token):
            return None
    return last


def _value_from_line(remainder: str) -> AnswerValue | None:
    value = parse_value(remainder)
    if value is None:
        return None
    if value.kind is AnswerKind.EXPRESSION:
        tail = _prose_tail_number(map_devanagari_digits(remainder))
        if tail is not None:
            return AnswerValue.from_rational(tail)
    return value


def extract_answer(text: str, language: Language | None = None) -> AnswerValue | None:
    """Extract the final answer value from free-form solution text.

    ``language`` is accepted as a hint for symmetry with the rest of the
    pipeline; markers for both languages are always recognized.
    """
    if not text or not text.strip():
        return None
    mapped = map_devanagari_digits(text)

    boxed = _last_boxed(mapped)
    if boxed is not None:
        return parse_value(boxed)

    for line in reversed(mapped.splitlines()):
        match = _MARKER_LINE_RE.match(line)
        if match:
            value = _value_from_line(match.group(1))
            if value is not None:
                return value
            break

    for line in reversed(mapped.splitlines()):
        match = _HASH_LINE_RE.match(line)
        if match:
            value = parse_value(match.group(1))
            if value is not None:
                return value
            break

    matches = list(_ANY_NUMBER_RE.finditer(mapped))
    if matches:
        return parse_value(matches[-1].group(0))
    return None


def grade(predicted: AnswerValue | None, reference: AnswerValue) -> Verdict:
    """Grade one prediction against its reference value."""
    if predicted is None:
        return Verdict.UNPARSEABLE
    if predicted.is_numeric and reference.is_numeric:
        a, b = predicted.numeric_value, reference.numeric_value
        if a == b:
            return Verdict.CORRECT
        scale = max(abs(a), abs(b))
        if scale and abs(a - b) / scale <= RELATIVE_TOLERANCE:
            return Verdict.CORRECT
        return Verdict.INCORRECT
    if predicted.kind is AnswerKind.EXPRESSION and reference.kind is AnswerKind.EXPRESSION:
        return Verdict.CORRECT if predicted == reference else Verdict.INCORRECT
    return Verdict.INCORRECT


@dataclass(frozen=True)
class GradeRecord:
    problem_id: str
    model_name: str
    predicted: AnswerValue | None
    reference: AnswerValue
    verdict: Verdict

    def __post_init__(self):
        if (self.verdict is Verdict.UNPARSEABLE) != (self.predicted is None):
            raise EvaluationError(
                f"{self.problem_id}: Unparseable verdict must pair with an "
                "absent prediction"
            )

    def to_dict(self) -> dict:
        return {
            "problem_id": self.problem_id,
            "model_name": self.model_name,
            "predicted": self.predicted.to_dict() if self.predicted else None,
            "reference": self.reference.to_dict(),
            "verdict": self.verdict.value,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GradeRecord":
        predicted = data.get("predicted")
        return cls(
            problem_id=data["problem_id"],
            model_name=data["model_name"],
            predicted=AnswerValue.from_dict(predicted) if predicted else None,
            reference=AnswerValue.from_dict(data["reference"]),
            verdict=Verdict(data["verdict"]),
        )


def reference_answer(problem: Problem) -> AnswerValue | None:
    """The reference value for a problem, preferring the structured solution."""
    structured = problem.structured_solution
    if structured is not None:
        if structured.final_answer is not None:
            return structured.final_answer
        value = extract_answer(structured.answer, problem.language)
        if value is not None:
            return value
    if problem.raw_solution:
        return extract_answer(problem.raw_solution, problem.language)
    return None


def grade_predictions(
    predictions: Iterable[tuple[str, str]],
    manifest: CorpusManifest,
    model_name: str,
) -> list[GradeRecord]:
    """Grade (problem_id, model_output_text) pairs against the corpus."""
    records = []
    for problem_id, output in predictions:
        problem = manifest.by_id(problem_id)
        reference = reference_answer(problem)
        if reference is None:
            raise EvaluationError(f"{problem_id}: no extractable reference answer")
        predicted = extract_answer(output, problem.language)
        records.append(GradeRecord(
            problem_id=problem_id,
            model_name=model_name,
            predicted=predicted,
            reference=reference,
            verdict=grade(predicted, reference),
        ))
    return records


def half_up_percent(correct: int, total: int) -> int:
    """Integer percentage, rounding halves up (2/3 -> 67)."""
    if total <= 0:
        raise EvaluationError("percentage of an empty cell")
    return (200 * correct + total) // (2 * total)


class CellStats(NamedTuple):
    correct: int
    incorrect: int
    unparseable: int

    @property
    def total(self) -> int:
        return self.correct + self.incorrect + self.unparseable

    @property
    def percent(self) -> int:
        return half_up_percent(self.correct, self.total)


CellKey = tuple[str, Language, Source, Difficulty]

EMPTY_CELL = "—"

# Column plan mirroring the published table: English benchmarks first, then
# Hindi, with per-difficulty sub-columns for the curated corpus.
_COLUMN_PLAN: tuple[tuple[Language, tuple[tuple[Source, bool], ...]], ...] = (
    (Language.ENGLISH, ((Source.GSM8K, False), (Source.MATH, False),
                        (Source.INDIMATHQA, True))),
    (Language.HINDI, ((Source.HAWP, False), (Source.INDIMATHQA, True))),
)
_SUB_DIFFICULTIES = (Difficulty.EASY, Difficulty.MEDIUM, Difficulty.HARD)


@dataclass(frozen=True)
class EvaluationReport:
    cells: Mapping[CellKey, CellStats]

    def models(self) -> list[str]:
        return sorted({model for model, _, _, _ in self.cells})

    def cell(self, model: str, language: Language, source: Source,
             difficulty: Difficulty | None = None) -> CellStats | None:
        """One table cell; difficulty None aggregates over all difficulties."""
        if difficulty is not None:
            return self.cells.get((model, language, source, difficulty))
        parts = [stats for (m, l, s, _), stats in self.cells.items()
                 if m == model and l is language and s is source]
        if not parts:
            return None
        return CellStats(
            correct=sum(p.correct for p in parts),
            incorrect=sum(p.incorrect for p in parts),
            unparseable=sum(p.unparseable for p in parts),
        )

    def _columns(self):
        columns = []  # (group label, column label, language, source, difficulty|None)
        planned = set()
        for language, sources in _COLUMN_PLAN:
            group = f"{language.value} Benchmarks"
            for source, split_difficulty in sources:
                if split_difficulty:
                    for difficulty in _SUB_DIFFICULTIES:
                        columns.append((group, f"{source.value} {difficulty.value}",
                                        language, source, difficulty))
                        planned.add((language, source))
                else:
                    columns.append((group, source.value, language, source, None))
                    planned.add((language, source))
        extra = sorted(
            {(l, s) for _, l, s, _ in self.cells if (l, s) not in planned},
            key=lambda item: (item[0].value, item[1].value),
        )
        for language, source in extra:
            columns.append((f"{language.value} Benchmarks", source.value,
                            language, source, None))
        return columns

    def render_table(self) -> str:
        columns = self._columns()
        rows = []
        for model in self.models():
            row = [model]
            for _, _, language, source, difficulty in columns:
                stats = self.cell(model, language, source, difficulty)
                row.append(f"{stats.percent}%" if stats else EMPTY_CELL)
            rows.append(row)
        label_row = ["Model"] + [label for _, label, *_ in columns]
        widths = [max(len(str(cell)) for cell in col)
                  for col in zip(label_row, *rows)]

        def fmt(cells):
            return "  ".join(str(c).ljust(w) for c, w in zip(cells, widths)).rstrip()

        # Group labels span their run of columns.
        group_cells = [" " * widths[0]]
        run_start = 0
        groups = [group for group, *_ in columns]
        for i in range(len(groups) + 1):
            if i == len(groups) or (i > run_start and groups[i] != groups[run_start]):
                span = sum(widths[run_start + 1:i + 1]) + 2 * (i - run_start - 1)
                group_cells.append(groups[run_start].ljust(span))
                run_start = i
        group_line = "  ".join(group_cells).rstrip()
        lines = [group_line, fmt(label_row), fmt(["-" * w for w in widths])]
        lines.extend(fmt(row) for row in rows)
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer)
        writer.writerow(["model", "language", "source", "difficulty",
                         "correct", "incorrect", "unparseable", "total", "percent"])
        for (model, language, source, difficulty), stats in sorted(
            self.cells.items(),
            key=lambda item: (item[0][0], item[0][1].value, item[0][2].value,
                              item[0][3].value),
        ):
            writer.writerow([model, language.value, source.value, difficulty.value,
                             stats.correct, stats.incorrect, stats.unparseable,
                             stats.total, stats.percent])
        return buffer.getvalue()


def accuracy_report(grades: Sequence[GradeRecord], manifest: CorpusManifest) -> EvaluationReport:
    """Aggregate grade records into per-cell accuracy statistics."""
    tallies: dict[CellKey, list[int]] = {}
    for record in grades:
        try:
            problem = manifest.by_id(record.problem_id)
        except KeyError:
            raise EvaluationError(
                f"grade references unknown problem id {record.problem_id!r}"
            ) from None
        key = (record.model_name, problem.language, problem.source, problem.difficulty)
        cell = tallies.setdefault(key, [0, 0, 0])
        if record.verdict is Verdict.CORRECT:
            cell[0] += 1
        elif record.verdict is Verdict.INCORRECT:
            cell[1] += 1
        else:
            cell[2] += 1
    return EvaluationReport(cells={
        key: CellStats(*counts) for key, counts in tallies.items()
    })


def save_grades(grades: Sequence[GradeRecord], path) -> None:
    lines = [json.dumps(g.to_dict(), sort_keys=True, ensure_ascii=False,
                        separators=(",", ":")) for g in grades]
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")


def load_grades(path) -> list[GradeRecord]:
    records = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.strip():
            records.append(GradeRecord.from_dict(json.loads(line)))
    return records


def read_predictions(path) -> list[tuple[str, str]]:
    r"""Read a ``problem_id<TAB>model_output`` file; ``\n`` unescapes to newlines."""
    pairs = []
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            if "\t" not in line:
                raise EvaluationError(f"{path}:{lineno}: expected problem_id<TAB>output")
            problem_id, text = line.split("\t", 1)
            pairs.append((problem_id, text.replace("\\n", "\n")))
    return pairs


@dataclass(frozen=True)
class KappaInput:
    items: int
    categories: int
    counts: tuple[tuple[int, ...], ...]
    raters_per_item: int

    def __post_init__(self):
        if self.raters_per_item < 2:
            raise EvaluationError("at least two raters per item required")
        if self.items < 1 or self.categories < 1:
            raise EvaluationError("counts matrix must be nonempty")
        for index, row in enumerate(self.counts):
            if len(row) != self.categories:
                raise EvaluationError(f"row {index} has {len(row)} categories, "
                                      f"expected {self.categories}")
            if any(n < 0 for n in row):
                raise EvaluationError(f"row {index} has negative counts")
            if sum(row) != self.raters_per_item:
                raise EvaluationError(
                    f"row {index} sums to {sum(row)}, expected {self.raters_per_item}"
                )

    @classmethod
    def from_counts(cls, counts: Sequence[Sequence[int]]) -> "KappaInput":
        rows = tuple(tuple(int(n) for n in row) for row in counts)
        if not rows:
            raise EvaluationError("counts matrix must be nonempty")
        return cls(
            items=len(rows),
            categories=len(rows[0]),
            counts=rows,
            raters_per_item=sum(rows[0]),
        )


def fleiss_kappa(data: KappaInput | Sequence[Sequence[int]]) -> float:
    """Chance-corrected multi-rater agreement, computed in exact rationals.

    With n raters over N items and k categories, per-item agreement is
    P_i = sum_j n_ij (n_ij - 1) / (n (n - 1)), chance agreement is
    P_e = sum_j p_j^2 over the category marginals, and
    kappa = (mean(P_i) - P_e) / (1 - P_e).
    """
    if not isinstance(data, KappaInput):
        data = KappaInput.from_counts(data)
    n = data.raters_per_item
    total = data.items * n
    p_bar = Fraction(
        sum(sum(c * (c - 1) for c in row) for row in data.counts),
        data.items * n * (n - 1),
    )
    marginals = [
        Fraction(sum(row[j] for row in data.counts), total)
        for j in range(data.categories)
    ]
    p_expected = sum(p * p for p in marginals)
    if p_expected == 1:
        if p_bar == 1:
            return 1.0
        raise EvaluationError("degenerate marginals")
    return float((p_bar - p_expected) / (1 - p_expected))


def read_counts_matrix(path) -> list[list[int]]:
    """Read a rater-counts matrix: one row per item, whitespace or commas."""
    rows = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(),
                                  start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            rows.append([int(tok) for tok in line.replace(",", " ").split()])
        except ValueError:
            raise EvaluationError(f"{path}:{lineno}: non-integer count") from None
    return rows
