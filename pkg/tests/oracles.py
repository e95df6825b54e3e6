"""Independent reference computations used to freeze expected values.

Nothing here imports the package's arithmetic, LP or Bessel code: exact values
come from sympy, special functions from mpmath at 50 digits, enumeration from
plain brute force, and fractional LPs from scipy in floating point.
"""

from __future__ import annotations

import cmath
import itertools
import math
from fractions import Fraction
from pathlib import Path

import mpmath
import numpy as np
import sympy as sp
from scipy.optimize import linprog

DATA = Path(__file__).resolve().parents[1] / "src" / "moserlp" / "data"
BASIS = (sp.Integer(1), sp.sqrt(3), sp.sqrt(11), sp.sqrt(33))


def sym_from_tokens(tokens) -> sp.Expr:
    return sum(sp.Rational(t) * b for t, b in zip(tokens, BASIS))


def sym_points(name: str) -> list[tuple[sp.Expr, sp.Expr]]:
    lines = [l.split("#")[0].strip() for l in (DATA / f"{name}.pts").read_text().splitlines()]
    lines = [l for l in lines if l]
    n = int(lines[0].split()[1])
    pts = []
    for l in lines[1:1 + n]:
        t = l.split()
        pts.append((sym_from_tokens(t[:4]), sym_from_tokens(t[4:])))
    return pts


def sym_dist_sq(p, q) -> sp.Expr:
    return sp.nsimplify(sp.expand((p[0] - q[0]) ** 2 + (p[1] - q[1]) ** 2))


def sym_distance_table(pts):
    n = len(pts)
    return {(i, j): sp.expand(sym_dist_sq(pts[i], pts[j])) for i in range(n) for j in range(i + 1, n)}


def brute_independent_sets(n: int, edges) -> list[int]:
    E = {tuple(sorted(e)) for e in edges}
    out = []
    for mask in range(1 << n):
        members = [i for i in range(n) if mask >> i & 1]
        if all((a, b) not in E for a, b in itertools.combinations(members, 2)):
            out.append(mask)
    return out


def float_fractional_chromatic(n: int, edges) -> float:
    sets = [m for m in brute_independent_sets(n, edges) if m]
    A = np.array([[-(m >> v & 1) for m in sets] for v in range(n)], dtype=float)
    res = linprog(np.ones(len(sets)), A_ub=A, b_ub=-np.ones(n), bounds=(0, None), method="highs")
    return float(res.fun)


def congruent_by_bijection(dist, I, J) -> bool:
    """Distance-preserving bijection test (equivalent to planar congruence)."""
    def d(a, b):
        return 0 if a == b else dist[(min(a, b), max(a, b))]
    for perm in itertools.permutations(J):
        if all(d(I[a], I[b]) == d(perm[a], perm[b]) for a in range(len(I)) for b in range(a + 1, len(I))):
            return True
    return False


def mp_j0(x) -> mpmath.mpf:
    with mpmath.workdps(50):
        return mpmath.besselj(0, mpmath.mpf(x))


def mp_j1(x) -> mpmath.mpf:
    with mpmath.workdps(50):
        return mpmath.besselj(1, mpmath.mpf(x))


def mp_j1_zero(k: int) -> mpmath.mpf:
    with mpmath.workdps(50):
        return mpmath.besseljzero(1, k)


def as_fraction(x: float) -> Fraction:
    return Fraction(x)


def polar_children(points, min_sep=0.1, tol=1e-9):
    """Unit-circle intersections via the angle at the first centre."""
    out = []
    for a, b in itertools.combinations(points, 2):
        d = abs(b - a)
        if not 0 < d < 2:
            continue
        theta = math.acos(d / 2)
        for s in (1, -1):
            p = a + cmath.exp(1j * s * theta) * (b - a) / d
            if min(abs(p - q) for q in points) < min_sep:
                continue
            if any(abs(p - q) <= tol for q in out):
                continue
            out.append(p)
    return out
