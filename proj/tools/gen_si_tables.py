#!/usr/bin/env python3
"""Regenerates include/assure/detail/si_tables.hpp.

Coefficients for the sine integral:
  * Maclaurin coefficients of Si(x)/x in powers of x^2 (used for |x| <= 4),
  * Chebyshev expansions of F(x) = x f(x) and G(x) = x^2 g(x) on the pieces in
    PIECES, where Si(x) = pi/2 - f(x) cos x - g(x) sin x. Both expansions of a
    piece are padded to a common length so they can share one Clenshaw loop.

Requires mpmath. Run from the repository root:
    python3 tools/gen_si_tables.py > include/assure/detail/si_tables.hpp
"""
from mpmath import mp, mpf, si, ci, sin, cos, pi, factorial
import mpmath

mp.dps = 50
TOL = mpf("5e-18")
PIECES = [(4, 5), (5, 6), (6, 7), (7, 8), (8, 10), (10, 12), (12, 14), (14, 16), (16, 20), (20, 24), (24, 28), (28, 34), (34, 40)]


def f_aux(x):
    return ci(x) * sin(x) - (si(x) - pi / 2) * cos(x)


def g_aux(x):
    return -ci(x) * cos(x) - (si(x) - pi / 2) * sin(x)


def chebyshev(fun, a, b, n=60):
    nodes = [mpmath.cos(pi * (k + mpf(1) / 2) / n) for k in range(n)]
    vals = [fun((b - a) / 2 * t + (a + b) / 2) for t in nodes]
    coeffs = []
    for j in range(n):
        s = sum(vals[k] * mpmath.cos(pi * j * (k + mpf(1) / 2) / n) for k in range(n))
        coeffs.append(2 * s / n)
    coeffs[0] /= 2
    last = max(j for j in range(n) if abs(coeffs[j]) > TOL)
    return coeffs[: last + 1]


def fmt(v):
    return mpmath.nstr(v, 20, min_fixed=0, max_fixed=0)


def emit_array(name, values):
    body = ",\n    ".join(fmt(v) for v in values)
    print(f"inline constexpr double {name}[] = {{\n    {body}}};")


print("// si_tables.hpp -- generated by tools/gen_si_tables.py; do not edit.")
print("#pragma once\n")
print("namespace assure::specfun::detail {\n")

series = []
k = 0
while True:
    c = (-1) ** k / ((2 * k + 1) * factorial(2 * k + 1))
    series.append(mpf(c))
    if abs(c) * mpf(4) ** (2 * k) < TOL:
        break
    k += 1
print("// Si(x) = x * sum_k si_series[k] x^(2k), |x| <= 4")
emit_array("si_series", series)
print()

print("struct AuxPiece {")
print("    double lo;")
print("    double hi;")
print("    int terms;")
print("    double f[24];")
print("    double g[24];")
print("};\n")
print("// Chebyshev coefficients of x f(x) and x^2 g(x) per piece (c0 already halved)")
print("inline constexpr AuxPiece aux_pieces[] = {")
for (a, b) in PIECES:
    cf = chebyshev(lambda x: x * f_aux(x), mpf(a), mpf(b))
    cg = chebyshev(lambda x: x * x * g_aux(x), mpf(a), mpf(b))
    n = max(len(cf), len(cg))
    assert n <= 24
    cf += [mpf(0)] * (n - len(cf))
    cg += [mpf(0)] * (n - len(cg))
    print(f"    {{{a}.0, {b}.0, {n},")
    print("     {" + ", ".join(fmt(v) for v in cf) + "},")
    print("     {" + ", ".join(fmt(v) for v in cg) + "}},")
print("};\n")

print("} // namespace assure::specfun::detail")
