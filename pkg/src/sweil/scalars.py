"""Exact Gaussian-rational scalars a + b*i used as the ground field."""

from __future__ import annotations

import re
from fractions import Fraction


class QI:
    """A Gaussian rational, stored as a pair of exact fractions.

    Instances are immutable and canonical (Fraction keeps numerator and
    denominator reduced with positive denominator), so equality is syntactic
    and hashing is safe.
    """

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        object.__setattr__(self, "re", Fraction(re))
        object.__setattr__(self, "im", Fraction(im))

    def __setattr__(self, name, value):
        raise AttributeError("QI is immutable")

    # -- constructors -------------------------------------------------

    @staticmethod
    def i():
        return QI(0, 1)

    @staticmethod
    def of(x) -> "QI":
        if isinstance(x, QI):
            return x
        return QI(x)

    # -- field operations ---------------------------------------------

    def __add__(self, other):
        other = QI.of(other)
        return QI(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        other = QI.of(other)
        return QI(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        return QI.of(other) - self

    def __mul__(self, other):
        other = QI.of(other)
        return QI(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = QI.of(other)
        n = other.re * other.re + other.im * other.im
        if n == 0:
            raise ZeroDivisionError("division by zero in QI")
        return QI(
            (self.re * other.re + self.im * other.im) / n,
            (self.im * other.re - self.re * other.im) / n,
        )

    def __rtruediv__(self, other):
        return QI.of(other) / self

    def __neg__(self):
        return QI(-self.re, -self.im)

    def conj(self) -> "QI":
        return QI(self.re, -self.im)

    # -- predicates ----------------------------------------------------

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def is_rational(self) -> bool:
        return self.im == 0

    def __bool__(self):
        return not self.is_zero()

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = QI(other)
        if not isinstance(other, QI):
            return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        return hash((self.re, self.im))

    # -- text ----------------------------------------------------------

    def __str__(self):
        return format_qi(self)

    def __repr__(self):
        return f"QI({self.re!r}, {self.im!r})"


ZERO = QI(0)
ONE = QI(1)
I = QI(0, 1)


def _frac_str(f: Fraction) -> str:
    return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"


def format_qi(z: QI) -> str:
    """Serialize exactly, e.g. ``0``, ``-3/2``, ``i``, ``-3/2+1/4i``."""
    if z.im == 0:
        return _frac_str(z.re)
    if z.im == 1:
        im = "i"
    elif z.im == -1:
        im = "-i"
    else:
        im = _frac_str(z.im) + "i"
    if z.re == 0:
        return im
    if not im.startswith("-"):
        im = "+" + im
    return _frac_str(z.re) + im


_TERM_RE = re.compile(r"([+-]?[^+-]*)")


def parse_qi(text: str) -> QI:
    """Parse ``p/q+r/s*i`` or the compact ``-3/2+1/4i`` form."""
    s = text.strip().replace(" ", "").replace("*i", "i")
    if not s:
        raise ValueError("empty scalar")
    re_part = Fraction(0)
    im_part = Fraction(0)
    pos = 0
    for m in _TERM_RE.finditer(s):
        term = m.group(1)
        if not term:
            continue
        pos += 1
        if term.endswith("i"):
            body = term[:-1]
            if body in ("", "+"):
                im_part += 1
            elif body == "-":
                im_part -= 1
            else:
                im_part += Fraction(body)
        else:
            re_part += Fraction(term)
    if pos == 0:
        raise ValueError(f"cannot parse scalar {text!r}")
    return QI(re_part, im_part)
