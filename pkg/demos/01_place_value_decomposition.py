#!/usr/bin/env python3
"""Walk through the place-value decomposition of multiplication and division.

Multiplication splits the first operand into its nonzero place-value parts
and sums the partial products; division emits one segment per long-division
quotient digit plus an exact-fraction remainder segment. Everything is
integer/rational arithmetic, so the partial sums reproduce the direct result
exactly at any size.
"""

import random
from fractions import Fraction

from ganitprep.corpus import Language
from ganitprep.decompose import decompose_div, decompose_mul, render_trace

print("=== 543 x 27, decomposed ===")
trace = decompose_mul(543, 27)
print("segments:", trace.segments)
print("partials:", [int(p) for p in trace.partials])
print("total:   ", int(trace.total))
print()
print(render_trace(trace))

print("=== 968 / 16, decomposed ===")
trace = decompose_div(968, 16)
print("segments:", trace.segments, "(sum:", sum(trace.segments), ")")
print("partials:", [str(p) for p in trace.partials])
print("total:   ", trace.total, "=", float(trace.total))
print()
print("Hindi rendering of the same trace:")
print(render_trace(trace, Language.HINDI))

print("=== exactness sweep ===")
rng = random.Random(7)
checked = 0
for _ in range(5000):
    a, b = rng.randrange(10**9), rng.randrange(1, 10**4)
    assert sum(decompose_mul(a, b).partials) == a * b
    assert sum(decompose_div(a, b).partials) == Fraction(a, b)
    checked += 1
print(f"{checked} random multiplication and division pairs: all partial sums exact")
