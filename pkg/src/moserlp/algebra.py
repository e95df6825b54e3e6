"""Exact arithmetic in Q(sqrt3, sqrt11) and in towers of real quadratic extensions above it.

Elements of the base field are stored as four rational coordinates in the
basis {1, sqrt3, sqrt11, sqrt33}.  A :class:`Tower` adjoins further square
roots on top of the base field; its elements are pairs ``a + b*sqrt(r)`` with
``a, b`` taken from the parent field.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Union

import mpmath

Rational = Fraction

_HIGH_DPS = 60
_ENCLOSURE_WIDTH = mpmath.mpf("1e-30")


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"cannot convert {type(x).__name__} to an exact rational")


def rational_sqrt(q: Fraction) -> Fraction | None:
    """Exact square root of a non-negative rational, or None."""
    if q < 0:
        return None
    n, d = q.numerator, q.denominator
    rn, rd = math.isqrt(n), math.isqrt(d)
    if rn * rn == n and rd * rd == d:
        return Fraction(rn, rd)
    return None


class _Q3:
    """p + q*sqrt3 with rational p, q (internal helper for square-root extraction)."""

    __slots__ = ("p", "q")

    def __init__(self, p, q=0):
        self.p = Fraction(p)
        self.q = Fraction(q)

    def __add__(self, o):
        return _Q3(self.p + o.p, self.q + o.q)

    def __sub__(self, o):
        return _Q3(self.p - o.p, self.q - o.q)

    def __mul__(self, o):
        if isinstance(o, (int, Fraction)):
            return _Q3(self.p * o, self.q * o)
        return _Q3(self.p * o.p + 3 * self.q * o.q, self.p * o.q + self.q * o.p)

    __rmul__ = __mul__

    def inverse(self):
        n = self.p * self.p - 3 * self.q * self.q
        return _Q3(self.p / n, -self.q / n)

    def __truediv__(self, o):
        if isinstance(o, (int, Fraction)):
            return _Q3(self.p / o, self.q / o)
        return self * o.inverse()

    def is_zero(self):
        return self.p == 0 and self.q == 0

    def sqrt(self):
        return _sqrt_quadratic(
            self.p, self.q, Fraction(3), rational_sqrt, _Q3,
            zero=Fraction(0), is_zero=lambda x: x == 0,
        )


def _sqrt_quadratic(a, b, r, sqrt_base, make, zero, is_zero):
    """Square root of ``a + b*sqrt(r)`` inside the same quadratic extension.

    ``sqrt_base`` extracts square roots in the parent field (returning None when
    impossible).  The returned root may be the negative one; callers fix the sign.
    """
    if is_zero(b):
        s = sqrt_base(a)
        if s is not None:
            return make(s, zero)
        t = sqrt_base(a / r)
        if t is not None:
            return make(zero, t)
        return None
    sd = sqrt_base(a * a - r * b * b)
    if sd is None:
        return None
    for x2 in ((a + sd) / 2, (a - sd) / 2):
        x = sqrt_base(x2)
        if x is not None and not is_zero(x):
            return make(x, b / (2 * x))
    return None


class FieldElement:
    """Element c0 + c1*sqrt3 + c2*sqrt11 + c3*sqrt33 of Q(sqrt3, sqrt11)."""

    __slots__ = ("c", "_hash")

    def __init__(self, c0=0, c1=0, c2=0, c3=0):
        self.c = (_frac(c0), _frac(c1), _frac(c2), _frac(c3))
        self._hash = None

    @classmethod
    def _raw(cls, c: tuple) -> FieldElement:
        obj = cls.__new__(cls)
        obj.c = c
        obj._hash = None
        return obj

    @classmethod
    def coerce(cls, x) -> FieldElement:
        if isinstance(x, FieldElement):
            return x
        return cls(_frac(x))

    # ring operations -------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, FieldElement):
            if isinstance(other, (int, Fraction)):
                other = FieldElement(other)
            else:
                return NotImplemented
        a, b = self.c, other.c
        return FieldElement._raw((a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]))

    __radd__ = __add__

    def __neg__(self):
        a = self.c
        return FieldElement._raw((-a[0], -a[1], -a[2], -a[3]))

    def __sub__(self, other):
        if not isinstance(other, FieldElement):
            if isinstance(other, (int, Fraction)):
                other = FieldElement(other)
            else:
                return NotImplemented
        a, b = self.c, other.c
        return FieldElement._raw((a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, FieldElement):
            if isinstance(other, (int, Fraction)):
                o = _frac(other)
                a = self.c
                return FieldElement._raw((a[0] * o, a[1] * o, a[2] * o, a[3] * o))
            return NotImplemented
        a0, a1, a2, a3 = self.c
        b0, b1, b2, b3 = other.c
        return FieldElement._raw((
            a0 * b0 + 3 * a1 * b1 + 11 * a2 * b2 + 33 * a3 * b3,
            a0 * b1 + a1 * b0 + 11 * (a2 * b3 + a3 * b2),
            a0 * b2 + a2 * b0 + 3 * (a1 * b3 + a3 * b1),
            a0 * b3 + a3 * b0 + a1 * b2 + a2 * b1,
        ))

    __rmul__ = __mul__

    def _split(self) -> tuple[_Q3, _Q3]:
        # self = A + B*sqrt11 with A, B in Q(sqrt3)
        c0, c1, c2, c3 = self.c
        return _Q3(c0, c1), _Q3(c2, c3)

    @staticmethod
    def _join(A: _Q3, B: _Q3) -> FieldElement:
        return FieldElement._raw((A.p, A.q, B.p, B.q))

    def inverse(self) -> FieldElement:
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero in Q(sqrt3, sqrt11)")
        A, B = self._split()
        norm = A * A - (B * B) * 11
        inv = norm.inverse()
        return FieldElement._join(A * inv, _Q3(-B.p, -B.q) * inv)

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            o = _frac(other)
            if o == 0:
                raise ZeroDivisionError("division by zero")
            a = self.c
            return FieldElement._raw((a[0] / o, a[1] / o, a[2] / o, a[3] / o))
        if not isinstance(other, FieldElement):
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        return FieldElement.coerce(other) * self.inverse()

    # comparisons ------------------------------------------------------
    def is_zero(self) -> bool:
        return not any(self.c)

    def is_rational(self) -> bool:
        return not (self.c[1] or self.c[2] or self.c[3])

    def __eq__(self, other):
        if isinstance(other, FieldElement):
            return self.c == other.c
        if isinstance(other, (int, Fraction)):
            return self.is_rational() and self.c[0] == other
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.c)
        return self._hash

    def sort_key(self) -> tuple:
        return self.c

    def __bool__(self):
        return not self.is_zero()

    # evaluation -------------------------------------------------------
    def __float__(self):
        return to_float(self)

    def sqrt(self) -> FieldElement | None:
        """Exact square root within Q(sqrt3, sqrt11) (non-negative), or None."""
        A, B = self._split()
        root = _sqrt_quadratic(
            A, B, _Q3(11), lambda q: q.sqrt(), FieldElement._join,
            zero=_Q3(0), is_zero=lambda q: q.is_zero(),
        )
        if root is None:
            return None
        return -root if to_float(root) < 0 else root

    def __repr__(self):
        return f"FieldElement({', '.join(str(x) for x in self.c)})"

    def __str__(self):
        parts = []
        for coef, name in zip(self.c, ("", "√3", "√11", "√33")):
            if coef == 0:
                continue
            if name == "":
                parts.append(str(coef))
            elif coef == 1:
                parts.append(name)
            elif coef == -1:
                parts.append("-" + name)
            else:
                parts.append(f"({coef}){name}")
        return " + ".join(parts).replace("+ -", "- ") or "0"

    def to_tokens(self) -> list[str]:
        return [f"{x.numerator}/{x.denominator}" for x in self.c]

    @classmethod
    def from_tokens(cls, tokens) -> FieldElement:
        if len(tokens) != 4:
            raise ValueError(f"expected 4 rational tokens, got {len(tokens)}")
        return cls(*(Fraction(t) for t in tokens))


SQRT3 = FieldElement(0, 1, 0, 0)
SQRT11 = FieldElement(0, 0, 1, 0)
SQRT33 = FieldElement(0, 0, 0, 1)
ZERO = FieldElement()
ONE = FieldElement(1)


def field_arith(op: str, a: FieldElement, b: FieldElement) -> FieldElement:
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise ValueError(f"unknown operation {op!r}")


def field_inverse(a: FieldElement) -> FieldElement:
    return a.inverse()


# ---------------------------------------------------------------------------
# towers


class Tower:
    """A chain of square roots adjoined above Q(sqrt3, sqrt11).

    ``Tower.BASE`` is the base field itself (no generators).
    """

    def __init__(self, parent: Tower | None, radicand=None):
        self.parent = parent
        self.radicand = radicand
        self.depth = 0 if parent is None else parent.depth + 1

    @property
    def generators(self) -> list:
        out = []
        t = self
        while t.parent is not None:
            out.append(t.radicand)
            t = t.parent
        return out[::-1]

    def is_ancestor_of(self, other: Tower) -> bool:
        t = other
        while t is not None:
            if t is self:
                return True
            t = t.parent
        return False

    def zero(self):
        return self.embed(ZERO)

    def one(self):
        return self.embed(ONE)

    def generator(self) -> TowerElement:
        if self.parent is None:
            raise ValueError("the base field has no adjoined generator")
        return TowerElement(self, self.parent.zero(), self.parent.one())

    def embed(self, x):
        """Lift ``x`` (from this tower or any ancestor) into this tower."""
        if isinstance(x, (int, Fraction)):
            x = FieldElement(x)
        src = x.tower if isinstance(x, TowerElement) else Tower.BASE
        if src is self:
            return x
        if self.parent is None:
            raise ValueError("element does not belong to an ancestor of this tower")
        return TowerElement(self, self.parent.embed(x), self.parent.zero())

    def __repr__(self):
        return f"Tower(depth={self.depth})"


Tower.BASE = Tower(None)


def tower_of(x) -> Tower:
    return x.tower if isinstance(x, TowerElement) else Tower.BASE


def _common(x, y):
    tx, ty = tower_of(x), tower_of(y)
    if tx is ty:
        return x, y
    if tx.is_ancestor_of(ty):
        return ty.embed(x), y
    if ty.is_ancestor_of(tx):
        return x, tx.embed(y)
    raise ValueError("elements live in unrelated towers")


class TowerElement:
    """a + b*sqrt(r) where r is the tower's top radicand and a, b lie in the parent."""

    __slots__ = ("tower", "a", "b")

    def __init__(self, tower: Tower, a, b):
        self.tower = tower
        self.a = a
        self.b = b

    def _coerce(self, other):
        if isinstance(other, (int, Fraction)):
            other = FieldElement(other)
        if not isinstance(other, (FieldElement, TowerElement)):
            return None
        return other

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        x, y = _common(self, other)
        if isinstance(x, FieldElement):
            return x + y
        return TowerElement(x.tower, x.a + y.a, x.b + y.b)

    __radd__ = __add__

    def __neg__(self):
        return TowerElement(self.tower, -self.a, -self.b)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        x, y = _common(self, other)
        if isinstance(x, FieldElement):
            return x * y
        r = x.tower.radicand
        return TowerElement(x.tower, x.a * y.a + r * x.b * y.b, x.a * y.b + x.b * y.a)

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return self.a.is_zero() and self.b.is_zero()

    def __bool__(self):
        return not self.is_zero()

    def inverse(self):
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero tower element")
        r = self.tower.radicand
        norm = self.a * self.a - r * self.b * self.b
        inv = norm.inverse()
        return TowerElement(self.tower, self.a * inv, -self.b * inv)

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        x, y = _common(self, other)
        return x * y.inverse()

    def __rtruediv__(self, other):
        other = self._coerce(other)
        x, y = _common(other, self)
        return x * y.inverse()

    def __eq__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        x, y = _common(self, other)
        return (x - y).is_zero()

    def __hash__(self):
        return hash(self.simplify_key())

    def simplify_key(self):
        s = self.lower()
        if isinstance(s, FieldElement):
            return s.c
        return (id(s.tower), s.a.__hash__(), s.b.__hash__())

    def lower(self):
        """Drop to the lowest tower level that still represents the value."""
        if self.b.is_zero():
            a = self.a
            return a.lower() if isinstance(a, TowerElement) else a
        return self

    def sqrt(self):
        r = self.tower.radicand
        parent_sqrt = _sqrt_in
        root = _sqrt_quadratic(
            self.a, self.b, r, parent_sqrt,
            lambda x, y: TowerElement(self.tower, self.tower.parent.embed(x), self.tower.parent.embed(y)),
            zero=self.tower.parent.zero(), is_zero=lambda v: v.is_zero(),
        )
        if root is None:
            return None
        return -root if to_float(root) < 0 else root

    def __float__(self):
        return to_float(self)

    def __repr__(self):
        return f"TowerElement(depth={self.tower.depth}, a={self.a!r}, b={self.b!r})"

    def __str__(self):
        return f"({self.a}) + ({self.b})·√[{self.tower.radicand}]"


Exact = Union[FieldElement, TowerElement]


def _sqrt_in(x):
    return x.sqrt()


def adjoin_sqrt(base: Tower, radicand) -> tuple[Tower, Exact]:
    """Return a tower containing sqrt(radicand) together with that square root.

    When the radicand already has a square root in ``base`` the tower is
    returned unchanged.
    """
    radicand = base.embed(radicand)
    val = to_float(radicand, "high")
    if val.b < 0:
        raise ValueError("cannot adjoin the square root of a negative number")
    root = radicand.sqrt()
    if root is not None:
        return base, root
    new = Tower(base, radicand)
    return new, new.generator()


# ---------------------------------------------------------------------------
# numerical evaluation

_S3, _S11, _S33 = math.sqrt(3), math.sqrt(11), math.sqrt(33)


def _eval_working(x) -> float:
    if isinstance(x, FieldElement):
        c0, c1, c2, c3 = x.c
        return float(c0) + float(c1) * _S3 + float(c2) * _S11 + float(c3) * _S33
    r = _eval_working(x.tower.radicand)
    return _eval_working(x.a) + _eval_working(x.b) * math.sqrt(max(r, 0.0))


def _eval_interval(x):
    iv = mpmath.iv
    if isinstance(x, FieldElement):
        c0, c1, c2, c3 = (iv.mpf(c.numerator) / c.denominator for c in x.c)
        return c0 + c1 * iv.sqrt(3) + c2 * iv.sqrt(11) + c3 * iv.sqrt(33)
    r = _eval_interval(x.tower.radicand)
    if r.a < 0:
        r = iv.mpf([0, r.b])
    return _eval_interval(x.a) + _eval_interval(x.b) * iv.sqrt(r)


def to_float(x, precision: str = "working"):
    """Evaluate an exact element.

    ``working`` returns a double.  ``high`` returns an ``mpmath.iv`` interval,
    computed at 200+ bits, guaranteed to contain the exact value.
    """
    if isinstance(x, (int, Fraction)):
        x = FieldElement(x)
    if precision == "working":
        return _eval_working(x)
    if precision != "high":
        raise ValueError(f"unknown precision {precision!r}")
    iv = mpmath.iv
    saved = iv.prec
    try:
        for prec in (256, 1024, 4096):
            iv.prec = prec
            enc = _eval_interval(x)
            if enc.delta <= _ENCLOSURE_WIDTH:
                break
    finally:
        iv.prec = saved
    return enc


def high_value(x) -> mpmath.mpf:
    """Midpoint of the high-precision enclosure as an mpf."""
    enc = to_float(x, "high")
    lo, hi = enc._mpi_
    with mpmath.workprec(4096):
        mid = (mpmath.mpf(lo) + mpmath.mpf(hi)) / 2
    with mpmath.workdps(_HIGH_DPS):
        return +mid
