#!/usr/bin/env python3
"""Extract answers from messy model output, grade them, and audit raters.

Extraction honors boxed LaTeX first, then "Final Answer" lines (English or
Hindi), then "#### " markers, then the last standalone number. Numeric
grading is exact-rational with a 1e-6 relative-tolerance fallback; the
rater-agreement statistic runs in exact arithmetic.
"""

from fractions import Fraction

from ganitprep.answers import AnswerValue
from ganitprep.corpus import (
    CorpusManifest,
    Language,
    Problem,
    Source,
    SourceFormat,
)
from ganitprep.evaluate import (
    accuracy_report,
    extract_answer,
    fleiss_kappa,
    grade,
    grade_predictions,
)

print("=== extraction across formats ===")
samples = [
    "After simplifying we get \\boxed{\\frac{2}{3}}",
    "Final Answer: 543 multiplied by 27 equals 14661.",
    "2 + 2 = 4\n#### 4",
    "अंतिम उत्तर: १२.५",
    "\\boxed{100y^2 - 44x^2 = 275}",
    "I could not solve this one.",
]
for text in samples:
    value = extract_answer(text)
    rendered = value.render() if value else "(unparseable)"
    print(f"{text.splitlines()[0][:50]:<52} -> {rendered}")

print()
print("=== grading semantics ===")
third = AnswerValue.from_rational(Fraction(1, 3))
print("1/3 vs 0.333333 (1e-6 boundary):",
      grade(third, AnswerValue.from_decimal("0.333333")).value)
print("1/3 vs 0.333:",
      grade(third, AnswerValue.from_decimal("0.333")).value)
print("expression vs number:",
      grade(AnswerValue.from_expression("x+1"), AnswerValue.from_rational(2)).value)

print()
print("=== a small accuracy table ===")
problems = [
    Problem(id=f"q{i}", language=Language.ENGLISH, source=Source.GSM8K,
            question="?", raw_solution=f"#### {i}")
    for i in range(4)
]
manifest = CorpusManifest.from_records(problems, SourceFormat.GSM8K,
                                       created_at="2024-01-01T00:00:00+00:00")
predictions = [("q0", "#### 0"), ("q1", "#### 1"), ("q2", "#### 99"),
               ("q3", "no idea")]
grades = grade_predictions(predictions, manifest, "toy-model")
print(accuracy_report(grades, manifest).render_table())

print("=== rater agreement ===")
print("unanimous raters:", fleiss_kappa([[4, 0], [0, 4], [4, 0]]))
print("mixed raters [[3,0],[2,1]]:", fleiss_kappa([[3, 0], [2, 1]]))
