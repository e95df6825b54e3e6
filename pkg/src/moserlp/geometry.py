"""Planar point sets (exact or floating), squared distances and congruence of subsets."""

from __future__ import annotations

import itertools
import math
from collections import defaultdict
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

from .algebra import FieldElement, high_value, to_float

FLOAT_TOL = 1e-9
MIN_SEPARATION = 1e-6


class ExactPoint:
    """The complex number re + i*im with exact field coordinates."""

    __slots__ = ("re", "im", "_hash")

    def __init__(self, re, im=None):
        self.re = FieldElement.coerce(re) if not hasattr(re, "tower") else re
        if im is None:
            im = FieldElement()
        self.im = FieldElement.coerce(im) if not hasattr(im, "tower") else im
        self._hash = None

    def __add__(self, o: ExactPoint) -> ExactPoint:
        return ExactPoint(self.re + o.re, self.im + o.im)

    def __sub__(self, o: ExactPoint) -> ExactPoint:
        return ExactPoint(self.re - o.re, self.im - o.im)

    def __neg__(self):
        return ExactPoint(-self.re, -self.im)

    def __mul__(self, o):
        if not isinstance(o, ExactPoint):
            return ExactPoint(self.re * o, self.im * o)
        return ExactPoint(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def conj(self) -> ExactPoint:
        return ExactPoint(self.re, -self.im)

    def abs2(self):
        return self.re * self.re + self.im * self.im

    def inverse(self) -> ExactPoint:
        n = self.abs2()
        if n.is_zero():
            raise ZeroDivisionError("inverse of the zero point")
        inv = n.inverse()
        return ExactPoint(self.re * inv, -self.im * inv)

    def __truediv__(self, o):
        if isinstance(o, ExactPoint):
            return self * o.inverse()
        return ExactPoint(self.re / o, self.im / o)

    def is_zero(self) -> bool:
        return self.re.is_zero() and self.im.is_zero()

    def __eq__(self, o):
        if not isinstance(o, ExactPoint):
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.re, self.im))
        return self._hash

    def to_complex(self) -> complex:
        return complex(to_float(self.re), to_float(self.im))

    def __repr__(self):
        return f"ExactPoint({self.re}, {self.im})"


Point = "ExactPoint | complex"


def dist_sq(p, q):
    """|p - q|^2, exact for ExactPoints and a double for complex numbers."""
    if isinstance(p, ExactPoint) and isinstance(q, ExactPoint):
        return (p - q).abs2()
    if isinstance(p, ExactPoint) or isinstance(q, ExactPoint):
        raise TypeError("cannot mix exact and floating points")
    d = complex(p) - complex(q)
    return d.real * d.real + d.imag * d.imag


class PointSet:
    """Ordered, pairwise distinct planar points (all exact or all floating)."""

    def __init__(self, points: Iterable):
        pts = list(points)
        if not pts:
            raise ValueError("empty point set")
        self.exact = isinstance(pts[0], ExactPoint)
        if self.exact:
            if not all(isinstance(p, ExactPoint) for p in pts):
                raise TypeError("mixed exact and floating points")
            if len(set(pts)) != len(pts):
                raise ValueError("points are not pairwise distinct")
        else:
            pts = [complex(p) for p in pts]
            for p in pts:
                if not (math.isfinite(p.real) and math.isfinite(p.imag)):
                    raise ValueError("non-finite coordinate")
            for a, b in itertools.combinations(pts, 2):
                if abs(a - b) < MIN_SEPARATION:
                    raise ValueError("points closer than 1e-6")
        self.points = tuple(pts)

    def __len__(self):
        return len(self.points)

    def __getitem__(self, i):
        return self.points[i]

    def __iter__(self):
        return iter(self.points)

    @cached_property
    def floats(self) -> tuple[complex, ...]:
        if self.exact:
            return tuple(p.to_complex() for p in self.points)
        return self.points

    def to_float(self) -> PointSet:
        return PointSet(self.floats)

    @cached_property
    def dist_sq_table(self) -> list[list]:
        n = len(self)
        tab = [[None] * n for _ in range(n)]
        for i in range(n):
            for j in range(i, n):
                tab[i][j] = tab[j][i] = dist_sq(self.points[i], self.points[j])
        return tab

    @cached_property
    def distance_ids(self) -> list[list[int]]:
        """Matrix of ids of distinct squared distances (exact equality or 1e-9 clustering)."""
        n = len(self)
        tab = self.dist_sq_table
        ids = [[0] * n for _ in range(n)]
        if self.exact:
            lookup: dict = {}
            for i in range(n):
                for j in range(n):
                    ids[i][j] = lookup.setdefault(tab[i][j], len(lookup))
            return ids
        vals = sorted({tab[i][j] for i in range(n) for j in range(n)})
        reps: list[float] = []
        for v in vals:
            if not reps or v - reps[-1] > FLOAT_TOL:
                reps.append(v)
        import bisect

        for i in range(n):
            for j in range(n):
                k = bisect.bisect_left(reps, tab[i][j] - FLOAT_TOL)
                ids[i][j] = k
        return ids

    def is_unit(self, i: int, j: int) -> bool:
        d = self.dist_sq_table[i][j]
        if self.exact:
            return d == 1
        return abs(d - 1.0) <= FLOAT_TOL

    def distance(self, i: int, j: int) -> float:
        """|x_i - x_j| as a double (square root taken in high precision for exact sets)."""
        d = self.dist_sq_table[i][j]
        if self.exact:
            import mpmath

            with mpmath.workdps(40):
                return float(mpmath.sqrt(high_value(d)))
        return math.sqrt(d)

    @cached_property
    def _index(self) -> dict:
        return {p: i for i, p in enumerate(self.points)}

    def index_of(self, p) -> int | None:
        if self.exact:
            return self._index.get(p)
        for i, q in enumerate(self.points):
            if abs(q - p) <= FLOAT_TOL:
                return i
        return None

    def digest(self) -> str:
        import hashlib

        h = hashlib.sha256()
        for p in self.points:
            if self.exact:
                toks = [" ".join(x.to_tokens()) if isinstance(x, FieldElement) else repr(x) for x in (p.re, p.im)]
                h.update((" ".join(toks) + "\n").encode())
            else:
                h.update(f"{p.real!r} {p.imag!r}\n".encode())
        return h.hexdigest()[:16]


def distinct_distances(X: PointSet) -> int:
    """Number of distinct values among |x_i - x_j|^2, i < j."""
    ids = X.distance_ids
    n = len(X)
    return len({ids[i][j] for i in range(n) for j in range(i + 1, n)})


@dataclass(frozen=True)
class Isometry:
    """z -> u * (conj(z) if reflect else z) + v with |u| = 1."""

    u: object
    v: object
    reflect: bool = False

    def __call__(self, p):
        if isinstance(p, ExactPoint):
            z = p.conj() if self.reflect else p
            return self.u * z + self.v
        z = complex(p)
        z = z.conjugate() if self.reflect else z
        return self.u * z + self.v

    def inverse(self) -> Isometry:
        # z = u w' + v  =>  w' = conj(u) (z - v), w = conj(w') if reflecting
        if isinstance(self.u, ExactPoint):
            uc = self.u.conj()
            if self.reflect:
                return Isometry(self.u, -(self.u * self.v.conj()), True)
            return Isometry(uc, -(uc * self.v), False)
        uc = complex(self.u).conjugate()
        if self.reflect:
            return Isometry(self.u, -(self.u * complex(self.v).conjugate()), True)
        return Isometry(uc, -(uc * self.v), False)

    def compose(self, first: Isometry) -> Isometry:
        """self after first."""
        exact = isinstance(self.u, ExactPoint)

        def conj(z):
            return z.conj() if exact else complex(z).conjugate()

        u1 = conj(first.u) if self.reflect else first.u
        v1 = conj(first.v) if self.reflect else first.v
        return Isometry(self.u * u1, self.u * v1 + self.v, self.reflect != first.reflect)


def _sorted_key(X: PointSet, S: Sequence[int]) -> tuple:
    ids = X.distance_ids
    return tuple(sorted(ids[a][b] for a, b in itertools.combinations(S, 2)))


def congruent(X: PointSet, I: Sequence[int], J: Sequence[int]) -> Isometry | None:
    """A witness isometry mapping X|I onto X|J (as sets), or None."""
    I, J = sorted(I), sorted(J)
    if len(I) != len(J):
        raise ValueError("index sets differ in size")
    if not I:
        raise ValueError("empty index sets")
    return _congruent_sorted(X, I, J)


def _exact_witness(X: PointSet, I, J, p1, p2, a, b, reflect) -> Isometry | None:
    pts = X.points
    dp = pts[p2] - pts[p1]
    base = dp.conj() if reflect else dp
    u = (pts[b] - pts[a]) * base.inverse()
    if u.abs2() != 1:
        return None
    src1 = pts[p1].conj() if reflect else pts[p1]
    iso = Isometry(u, pts[a] - u * src1, reflect)
    hit = set()
    target = set(J)
    for m in I:
        k = X.index_of(iso(pts[m]))
        if k is None or k not in target or k in hit:
            return None
        hit.add(k)
    return iso


def _congruent_sorted(X: PointSet, I: Sequence[int], J: Sequence[int], check_key: bool = True):
    pts = X.points
    if len(I) == 1:
        one = ExactPoint(1) if X.exact else 1.0 + 0j
        return Isometry(one, pts[J[0]] - pts[I[0]], False)
    if check_key and _sorted_key(X, I) != _sorted_key(X, J):
        return None
    ids = X.distance_ids
    # candidates are screened in doubles; exact sets then confirm the witness in the field
    fl = X.floats
    tol = 1e-7 if X.exact else FLOAT_TOL
    p1, p2 = I[0], I[1]
    d12 = ids[p1][p2]
    dp = fl[p2] - fl[p1]
    for reflect in (False, True):
        base = dp.conjugate() if reflect else dp
        src1 = fl[p1].conjugate() if reflect else fl[p1]
        for a in J:
            for b in J:
                if a == b or ids[a][b] != d12:
                    continue
                u = (fl[b] - fl[a]) / base
                if abs(abs(u) ** 2 - 1.0) > tol:
                    continue
                v = fl[a] - u * src1
                hit = set()
                for m in I:
                    z = fl[m].conjugate() if reflect else fl[m]
                    w = u * z + v
                    k = next((j for j in J if abs(fl[j] - w) <= tol and j not in hit), None)
                    if k is None:
                        break
                    hit.add(k)
                else:
                    if not X.exact:
                        return Isometry(u, v, reflect)
                    iso = _exact_witness(X, I, J, p1, p2, a, b, reflect)
                    if iso is not None:
                        return iso
    return None


def _subsets(n: int, k: int, independent_only: bool, G=None):
    if not independent_only:
        yield from itertools.combinations(range(n), k)
        return
    from .udgraph import independent_sets

    # grow from the independent sets, which is far cheaper than filtering all k-subsets
    found = [tuple(v for v in range(n) if S >> v & 1) for S in independent_sets(G) if S.bit_count() == k]
    yield from sorted(found)


def congruence_classes(X: PointSet, k_min: int, k_max: int, independent_only: bool = True,
                       G=None) -> list[list[tuple[int, ...]]]:
    """Congruence classes of the subsets of sizes k_min..k_max, in canonical order."""
    n = len(X)
    if not 1 <= k_min <= k_max:
        raise ValueError("need 1 <= k_min <= k_max")
    k_max = min(k_max, n)
    if independent_only and G is None:
        from .udgraph import build_udg

        G = build_udg(X)
    out: list[list[tuple[int, ...]]] = []
    for k in range(k_min, k_max + 1):
        groups: dict[tuple, list[list[tuple[int, ...]]]] = defaultdict(list)
        order: list[list[tuple[int, ...]]] = []
        for S in _subsets(n, k, independent_only, G):
            classes = groups[_sorted_key(X, S)]
            for cls in classes:
                if _congruent_sorted(X, cls[0], S, check_key=False) is not None:
                    cls.append(S)
                    break
            else:
                cls = [S]
                classes.append(cls)
                order.append(cls)
        out.extend(order)
    return out


def congruence_pairs(X: PointSet, k_min: int = 1, k_max: int | None = None, independent_only: bool = True,
                     G=None, form: str = "chain") -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    """Equal-density pairs from each congruence class [S1, ..., Sm].

    ``form="chain"`` gives (S1,S2), ..., (S_{m-1},S_m); ``form="all"`` gives every pair (Si,Sj), i < j.
    Both span the same equalities. ``k_max=None`` means all sizes up to len(X).
    """
    if form not in ("chain", "all"):
        raise ValueError(f"unknown form {form!r}")
    pairs = []
    for cls in congruence_classes(X, k_min, len(X) if k_max is None else k_max, independent_only, G):
        pairs.extend(zip(cls[:-1], cls[1:]) if form == "chain" else itertools.combinations(cls, 2))
    return pairs
