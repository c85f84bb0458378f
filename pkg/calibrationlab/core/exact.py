"""
exact arithmetic in the quadratic field Q[sqrt(3)]

every lattice-aligned construction of the package (hexagon vertices, junction
tangents, miter corners, field tables) is algebraic over sqrt(3), so storing a
coordinate as a + b*sqrt(3) with rational a, b makes norms, dot products and
residuals exact. Mixing a QSqrt3 with a float degrades the result to float.
"""
import math
import re

from fractions import Fraction
from numbers import Rational
from .errors import InvalidInput


_TERM = re.compile(r'\s*([+-]?)\s*([0-9./]*)\s*(\*?\s*sqrt\(?3\)?)?\s*')


def _to_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise InvalidInput(f"non-finite value {value} has no exact representation")
        # the shortest decimal text is what the user wrote, e.g. 0.1 -> 1/10
        return Fraction(repr(value))
    if isinstance(value, str):
        return Fraction(value)
    raise TypeError(f"unsupported type for an exact coordinate: {type(value)}")


def _rational_sqrt(q: Fraction):
    if q < 0:
        return None
    num, den = q.numerator, q.denominator
    rn, rd = math.isqrt(num), math.isqrt(den)
    if rn * rn == num and rd * rd == den:
        return Fraction(rn, rd)
    return None


class QSqrt3(object):
    """
    the number a + b * sqrt(3), a and b rational
    """
    __slots__ = ('a', 'b')

    def __init__(self, a=0, b=0):
        if isinstance(a, QSqrt3):
            a, b = a.a, a.b + _to_fraction(b)
        object.__setattr__(self, 'a', _to_fraction(a))
        object.__setattr__(self, 'b', _to_fraction(b))

    def __setattr__(self, key, value):
        raise AttributeError("QSqrt3 is immutable")

    @classmethod
    def parse(cls, text: str) -> 'QSqrt3':
        """
        parse strings such as "1/2", "-sqrt3", "3/4*sqrt3", "1/2 + 3/2*sqrt(3)"
        """
        text = text.strip()
        if not text:
            raise InvalidInput("empty exact number")
        a, b, pos = Fraction(0), Fraction(0), 0
        while pos < len(text):
            match = _TERM.match(text, pos)
            if match is None or match.end() == pos:
                raise InvalidInput(f"cannot parse exact number {text!r} at position {pos}")
            sign, coef, root = match.groups()
            if not coef and not root:
                raise InvalidInput(f"cannot parse exact number {text!r} at position {pos}")
            try:
                value = Fraction(coef) if coef else Fraction(1)
            except (ValueError, ZeroDivisionError):
                raise InvalidInput(f"bad coefficient {coef!r} in {text!r}")
            if sign == '-':
                value = -value
            if root:
                b += value
            else:
                a += value
            pos = match.end()
        return cls(a, b)

    # ---- conversions

    def __float__(self):
        return float(self.a) + float(self.b) * math.sqrt(3.)

    def __bool__(self):
        return self.a != 0 or self.b != 0

    def is_rational(self):
        return self.b == 0

    def __repr__(self):
        return f"QSqrt3({self.a}, {self.b})"

    def __str__(self):
        if self.b == 0:
            return str(self.a)
        root = 'sqrt3' if abs(self.b) == 1 else f"{abs(self.b)}*sqrt3"
        if self.a == 0:
            return f"-{root}" if self.b < 0 else root
        return f"{self.a}{'-' if self.b < 0 else '+'}{root}"

    def __hash__(self):
        if self.b == 0:
            return hash(self.a)
        return hash((self.a, self.b))

    # ---- field operations

    @staticmethod
    def _coerce(other):
        if isinstance(other, QSqrt3):
            return other
        if isinstance(other, (int, Fraction)):
            return QSqrt3(other)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return float(self) + other if isinstance(other, float) else NotImplemented
        return QSqrt3(self.a + o.a, self.b + o.b)

    __radd__ = __add__

    def __neg__(self):
        return QSqrt3(-self.a, -self.b)

    def __pos__(self):
        return self

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return float(self) - other if isinstance(other, float) else NotImplemented
        return QSqrt3(self.a - o.a, self.b - o.b)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return other - float(self) if isinstance(other, float) else NotImplemented
        return QSqrt3(o.a - self.a, o.b - self.b)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return float(self) * other if isinstance(other, float) else NotImplemented
        return QSqrt3(self.a * o.a + 3 * self.b * o.b, self.a * o.b + self.b * o.a)

    __rmul__ = __mul__

    def conjugate(self):
        return QSqrt3(self.a, -self.b)

    def field_norm(self) -> Fraction:
        return self.a * self.a - 3 * self.b * self.b

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return float(self) / other if isinstance(other, float) else NotImplemented
        n = o.field_norm()
        if n == 0:
            raise ZeroDivisionError("division by zero in Q[sqrt3]")
        p = self * o.conjugate()
        return QSqrt3(p.a / n, p.b / n)

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return other / float(self) if isinstance(other, float) else NotImplemented
        return o / self

    def __pow__(self, power):
        if not isinstance(power, int) or power < 0:
            return float(self) ** power
        out = QSqrt3(1)
        for _ in range(power):
            out = out * self
        return out

    # ---- order

    def sign(self) -> int:
        sa = (self.a > 0) - (self.a < 0)
        sb = (self.b > 0) - (self.b < 0)
        if sb == 0:
            return sa
        if sa == 0 or sa == sb:
            return sb
        # opposite signs: compare a^2 with 3 b^2
        d = self.a * self.a - 3 * self.b * self.b
        sd = (d > 0) - (d < 0)
        return sa * sd

    def __abs__(self):
        return -self if self.sign() < 0 else self

    def _cmp(self, other):
        o = self._coerce(other)
        if o is None:
            if isinstance(other, float):
                f = float(self)
                return (f > other) - (f < other)
            return None
        return (self - o).sign()

    def __eq__(self, other):
        c = self._cmp(other)
        return NotImplemented if c is None else c == 0

    def __lt__(self, other):
        c = self._cmp(other)
        return NotImplemented if c is None else c < 0

    def __le__(self, other):
        c = self._cmp(other)
        return NotImplemented if c is None else c <= 0

    def __gt__(self, other):
        c = self._cmp(other)
        return NotImplemented if c is None else c > 0

    def __ge__(self, other):
        c = self._cmp(other)
        return NotImplemented if c is None else c >= 0

    def sqrt(self) -> 'QSqrt3':
        """
        exact square root inside Q[sqrt3], raises InvalidInput when it leaves the field
        """
        if self.sign() < 0:
            raise InvalidInput(f"square root of negative number {self}")
        if not self:
            return QSqrt3(0)
        # (p + q sqrt3)^2 = a + b sqrt3  <=>  p^2 + 3 q^2 = a, 2 p q = b
        r = _rational_sqrt(self.field_norm())
        if r is not None:
            for p2 in ((self.a + r) / 2, (self.a - r) / 2):
                p = _rational_sqrt(p2)
                if p is None:
                    continue
                if p == 0:
                    q = _rational_sqrt(self.a / 3)
                    if q is not None and self.b == 0:
                        return QSqrt3(0, q)
                    continue
                q = self.b / (2 * p)
                cand = QSqrt3(p, q)
                if cand * cand == self:
                    return cand if cand.sign() >= 0 else -cand
        raise InvalidInput(f"sqrt({self}) is not an element of Q[sqrt3]")


SQRT3 = QSqrt3(0, 1)
EXACT_TYPES = (int, Fraction, QSqrt3)


def is_exact(*values) -> bool:
    return all(isinstance(v, EXACT_TYPES) for v in values)


def exact(value):
    """
    lift an int, Fraction, numeric string or decimal float into QSqrt3
    """
    if isinstance(value, QSqrt3):
        return value
    if isinstance(value, str):
        return QSqrt3.parse(value)
    return QSqrt3(value)


def sqrt(value, strict: bool = True):
    """
    square root that stays in Q[sqrt3] when it can; with strict=False values
    outside the field fall back to float instead of raising
    """
    if isinstance(value, (QSqrt3, int, Fraction)):
        try:
            return QSqrt3(value).sqrt()
        except InvalidInput:
            if strict:
                raise
            return math.sqrt(float(value))
    return math.sqrt(value)


def sqrt3(exact_mode: bool):
    return SQRT3 if exact_mode else math.sqrt(3.)


def to_float(value) -> float:
    return float(value)
