"""Exact arithmetic in the Hurwitz quaternion order.

A Hurwitz integer is a quaternion a + bi + cj + dk whose coordinates are
either all rational integers or all half-odd integers (the Lipschitz
lattice Z^4 together with its translate by omega = (1+i+j+k)/2).  Every
element is stored in *doubled* coordinates (A, B, C, D) = (2a, 2b, 2c, 2d):
four integers of equal parity.  All ring operations are exact integer
arithmetic on the doubled tuple; nothing in this module ever rounds.

The module also provides the exact companions used throughout the package:
rational and floating quaternions, quotients p * q^-1 of Hurwitz integers,
nearest-point division with remainder, one-sided gcds, enumeration by norm,
reduction to the fundamental domain Delta = [0,1)^3 x [0,1/2), and the
separation inequality for distinct quotients.
"""

from __future__ import annotations

import itertools
import math
import re
from fractions import Fraction

from sympy import isprime

from .errors import InternalInvariantError, ValidationError

#: Largest allowed magnitude of a doubled coordinate.  Arithmetic is exact
#: (Python integers), but results beyond this width are refused so that a
#: runaway computation fails loudly instead of silently leaving the range
#: the numpy-backed scan engines can mirror.
MAX_DOUBLED_COORD = 1 << 62

#: enumerate_by_norm refuses norms above this bound.
ENUM_NORM_LIMIT = 1_000_000


def _check_doubled(A, B, C, D):
    if (A ^ B) & 1 or (A ^ C) & 1 or (A ^ D) & 1:
        raise ValidationError(
            f"doubled coordinates must share parity, got {(A, B, C, D)}"
        )
    for v in (A, B, C, D):
        if abs(v) > MAX_DOUBLED_COORD:
            raise OverflowError(
                f"doubled coordinate {v} exceeds the configured width "
                f"(|.| <= {MAX_DOUBLED_COORD})"
            )


def _qmul(x, y):
    """Hamilton product of two coordinate 4-tuples (ij = k)."""
    a1, b1, c1, d1 = x
    a2, b2, c2, d2 = y
    return (
        a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
        a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
        a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
        a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
    )


def _qmul_doubled(X, Y):
    """Product of two doubled tuples, again as a doubled tuple (exact)."""
    p = _qmul(X, Y)
    # (X/2)(Y/2) = XY/4, so the doubled result is XY/2; closure of the
    # order guarantees every entry is even.
    return (p[0] >> 1, p[1] >> 1, p[2] >> 1, p[3] >> 1)


class HurwitzInt:
    """An element of the Hurwitz order, in doubled coordinates."""

    __slots__ = ("A", "B", "C", "D")

    def __init__(self, a=0, b=0, c=0, d=0):
        """Build the quaternion a + bi + cj + dk from *integer* coordinates."""
        for v in (a, b, c, d):
            if not isinstance(v, int):
                raise ValidationError(
                    "integer coordinates required; use from_doubled()/from_coords()"
                    " for half-integer elements"
                )
        _check_doubled(2 * a, 2 * b, 2 * c, 2 * d)
        self.A, self.B, self.C, self.D = 2 * a, 2 * b, 2 * c, 2 * d

    @classmethod
    def from_doubled(cls, A, B, C, D):
        _check_doubled(A, B, C, D)
        q = object.__new__(cls)
        q.A, q.B, q.C, q.D = A, B, C, D
        return q

    @classmethod
    def from_coords(cls, coords):
        """Exact construction from four rationals (integers or half-odd)."""
        doubled = []
        for v in coords:
            f = Fraction(v) * 2
            if f.denominator != 1:
                raise ValidationError(f"{v} is not integral or half-integral")
            doubled.append(f.numerator)
        return cls.from_doubled(*doubled)

    # -- basic structure ---------------------------------------------------

    @property
    def doubled(self):
        return (self.A, self.B, self.C, self.D)

    def coords(self):
        """Coordinates as exact ``Fraction`` values."""
        return tuple(Fraction(v, 2) for v in self.doubled)

    def to_floats(self):
        return (self.A / 2.0, self.B / 2.0, self.C / 2.0, self.D / 2.0)

    def is_zero(self):
        return not (self.A or self.B or self.C or self.D)

    def is_unit(self):
        return self.norm_sq() == 1

    def is_lipschitz(self):
        """True when all coordinates are rational integers."""
        return self.A % 2 == 0

    def sort_key(self):
        return self.doubled

    # -- ring operations ---------------------------------------------------

    def __add__(self, other):
        if not isinstance(other, HurwitzInt):
            return NotImplemented
        return HurwitzInt.from_doubled(
            self.A + other.A, self.B + other.B, self.C + other.C, self.D + other.D
        )

    def __sub__(self, other):
        if not isinstance(other, HurwitzInt):
            return NotImplemented
        return HurwitzInt.from_doubled(
            self.A - other.A, self.B - other.B, self.C - other.C, self.D - other.D
        )

    def __neg__(self):
        return HurwitzInt.from_doubled(-self.A, -self.B, -self.C, -self.D)

    def __mul__(self, other):
        if isinstance(other, int):
            return HurwitzInt.from_doubled(
                self.A * other, self.B * other, self.C * other, self.D * other
            )
        if not isinstance(other, HurwitzInt):
            return NotImplemented
        return HurwitzInt.from_doubled(*_qmul_doubled(self.doubled, other.doubled))

    def __rmul__(self, other):
        if isinstance(other, int):
            return self.__mul__(other)
        return NotImplemented

    def conjugate(self):
        return HurwitzInt.from_doubled(self.A, -self.B, -self.C, -self.D)

    def norm_sq(self):
        """The reduced norm a^2+b^2+c^2+d^2, always a non-negative integer."""
        s = self.A * self.A + self.B * self.B + self.C * self.C + self.D * self.D
        assert s % 4 == 0  # forced by the parity invariant
        return s // 4

    # -- comparisons / hashing / text --------------------------------------

    def __eq__(self, other):
        return isinstance(other, HurwitzInt) and self.doubled == other.doubled

    def __hash__(self):
        return hash(self.doubled)

    def __repr__(self):
        return f"HurwitzInt.parse({str(self)!r})"

    def __str__(self):
        if self.is_zero():
            return "0"
        parts = []
        for v, sym in zip(self.doubled, ("", "i", "j", "k")):
            if v == 0:
                continue
            sign = "-" if v < 0 else "+"
            mag = abs(v)
            if mag % 2 == 0:
                num = str(mag // 2)
                if num == "1" and sym:
                    num = ""
            else:
                num = f"{mag}/2"
            parts.append((sign, num + sym))
        out = []
        for idx, (sign, body) in enumerate(parts):
            if idx == 0:
                out.append(("-" if sign == "-" else "") + body)
            else:
                out.append(sign + body)
        return "".join(out)

    _TERM_RE = re.compile(r"([+-])([0-9]+(?:/2)?)?([ijk])?")

    @classmethod
    def parse(cls, text):
        """Parse the canonical format, e.g. ``"1/2+1/2i+1/2j+1/2k"``."""
        s = text.replace(" ", "")
        if not s:
            raise ValidationError("empty quaternion literal")
        if s[0] not in "+-":
            s = "+" + s
        pos = 0
        doubled = {"": 0, "i": 0, "j": 0, "k": 0}
        seen = set()
        while pos < len(s):
            m = cls._TERM_RE.match(s, pos)
            if not m or m.end() == pos or (m.group(2) is None and m.group(3) is None):
                raise ValidationError(f"cannot parse quaternion literal {text!r}")
            sign = -1 if m.group(1) == "-" else 1
            num = m.group(2)
            sym = m.group(3) or ""
            if sym in seen:
                raise ValidationError(f"duplicate {sym or 'real'} term in {text!r}")
            seen.add(sym)
            if num is None:
                dval = 2
            elif num.endswith("/2"):
                dval = int(num[:-2])
            else:
                dval = 2 * int(num)
            doubled[sym] = sign * dval
            pos = m.end()
        return cls.from_doubled(doubled[""], doubled["i"], doubled["j"], doubled["k"])


ZERO = HurwitzInt(0, 0, 0, 0)
ONE = HurwitzInt(1, 0, 0, 0)
I = HurwitzInt(0, 1, 0, 0)
J = HurwitzInt(0, 0, 1, 0)
K = HurwitzInt(0, 0, 0, 1)
OMEGA = HurwitzInt.from_doubled(1, 1, 1, 1)

#: The 24 units: +-1, +-i, +-j, +-k and (+-1 +- i +- j +- k)/2.
UNITS = tuple(
    [HurwitzInt.from_doubled(*u) for u in (
        (2, 0, 0, 0), (-2, 0, 0, 0), (0, 2, 0, 0), (0, -2, 0, 0),
        (0, 0, 2, 0), (0, 0, -2, 0), (0, 0, 0, 2), (0, 0, 0, -2),
    )]
    + [HurwitzInt.from_doubled(*s) for s in itertools.product((1, -1), repeat=4)]
)


# ---------------------------------------------------------------------------
# nearest lattice point and division with remainder
# ---------------------------------------------------------------------------

def nearest_hurwitz_doubled(Y, n):
    """Doubled coordinates of a Hurwitz integer nearest to (Y/2)/n.

    ``Y`` is an integer 4-tuple and ``n`` a positive integer, so the target
    point has exact coordinates Y_i/(2n).  Among all nearest lattice points
    the one with lexicographically smallest doubled tuple is returned, which
    makes every consumer of this routine deterministic.
    """
    best = None
    four_n = 4 * n
    for coset in (0, 1):
        axis_choices = []
        for y in Y:
            z = y - coset * n
            num = 2 * z + 2 * n
            t0 = num // four_n
            cands = [coset + 2 * t0]
            if num % four_n == 0:
                # exact tie between two integers of this parity
                cands.append(coset + 2 * (t0 - 1))
            axis_choices.append(cands)
        for combo in itertools.product(*axis_choices):
            d2 = sum((y - n * c) ** 2 for y, c in zip(Y, combo))
            key = (d2, combo)
            if best is None or key < best:
                best = key
    return best[1]


def div_rem_right(p, q):
    """Split p = s*q + r with norm_sq(r) < norm_sq(q).

    The quotient s is a Hurwitz integer nearest to p*q^-1 (lex-smallest
    doubled tuple on ties); the covering radius of the order is 1/sqrt(2),
    so the remainder bound is strict and the assertion below can never fire
    for a correct implementation.
    """
    if q.is_zero():
        raise ValidationError("division by zero quaternion")
    n = q.norm_sq()
    Y = _qmul_doubled(p.doubled, q.conjugate().doubled)
    s = HurwitzInt.from_doubled(*nearest_hurwitz_doubled(Y, n))
    r = p - s * q
    if r.norm_sq() >= n:
        raise InternalInvariantError("remainder not reduced in div_rem_right")
    return s, r


def div_rem_left(p, q):
    """Split p = q*s + r with norm_sq(r) < norm_sq(q) (left division)."""
    if q.is_zero():
        raise ValidationError("division by zero quaternion")
    n = q.norm_sq()
    Y = _qmul_doubled(q.conjugate().doubled, p.doubled)
    s = HurwitzInt.from_doubled(*nearest_hurwitz_doubled(Y, n))
    r = p - q * s
    if r.norm_sq() >= n:
        raise InternalInvariantError("remainder not reduced in div_rem_left")
    return s, r


# ---------------------------------------------------------------------------
# gcd and primality
# ---------------------------------------------------------------------------

def canonical_associate_left(d):
    """The left associate u*d whose doubled tuple is lexicographically largest.

    gcds are only defined up to a unit; picking the lex-max associate gives
    every caller (and every golden file) one canonical representative.
    """
    return max((u * d for u in UNITS), key=HurwitzInt.sort_key)


def canonical_associate_right(d):
    """Right-unit version of :func:`canonical_associate_left`."""
    return max((d * u for u in UNITS), key=HurwitzInt.sort_key)


def gcd_right(a, b):
    """Greatest common right divisor, canonicalized by a left unit.

    Euclid's algorithm with :func:`div_rem_right`; the result d satisfies
    a = a'*d and b = b'*d for Hurwitz a', b'.
    """
    if a.is_zero() and b.is_zero():
        raise ValidationError("gcd_right(0, 0) is undefined")
    while not b.is_zero():
        _, r = div_rem_right(a, b)
        a, b = b, r
    return canonical_associate_left(a)


def gcd_left(a, b):
    """Greatest common left divisor (a = d*a', b = d*b'), canonicalized."""
    if a.is_zero() and b.is_zero():
        raise ValidationError("gcd_left(0, 0) is undefined")
    while not b.is_zero():
        _, r = div_rem_left(a, b)
        a, b = b, r
    return canonical_associate_right(a)


def exact_right_div(p, g):
    """Return p * g^-1, raising unless g exactly right-divides p."""
    n = g.norm_sq()
    if n == 0:
        raise ValidationError("division by zero quaternion")
    Y = _qmul_doubled(p.doubled, g.conjugate().doubled)
    if any(v % n for v in Y):
        raise ValidationError("not an exact right divisor")
    return HurwitzInt.from_doubled(*(v // n for v in Y))


def is_prime(a):
    """A Hurwitz integer is prime exactly when its norm is a rational prime."""
    return bool(isprime(a.norm_sq()))


# ---------------------------------------------------------------------------
# enumeration by norm
# ---------------------------------------------------------------------------

def _doubled_tuples_with_norm(m, parity):
    """All doubled 4-tuples of the given parity with sum of squares 4m."""
    total = 4 * m
    out = []
    lim = math.isqrt(total)
    start = -lim if (lim % 2 == parity % 2) else -lim + 1
    rng0 = range(start, lim + 1, 2)
    for A in rng0:
        rem_a = total - A * A
        lim_b = math.isqrt(rem_a)
        start_b = -lim_b if (lim_b % 2 == parity % 2) else -lim_b + 1
        for B in range(start_b, lim_b + 1, 2):
            rem_b = rem_a - B * B
            lim_c = math.isqrt(rem_b)
            start_c = -lim_c if (lim_c % 2 == parity % 2) else -lim_c + 1
            for C in range(start_c, lim_c + 1, 2):
                rem_c = rem_b - C * C
                D = math.isqrt(rem_c)
                if D * D != rem_c or (D % 2) != (parity % 2):
                    continue
                out.append((A, B, C, D))
                if D != 0:
                    out.append((A, B, C, -D))
    return out


def enumerate_by_norm(m, order="hurwitz"):
    """All elements of the requested order with norm_sq exactly m.

    ``order`` is ``"hurwitz"`` (the full order) or ``"lipschitz"`` (integer
    coordinates only).  The result is sorted lexicographically on doubled
    coordinates, so repeated runs produce identical golden files.
    """
    if order not in ("hurwitz", "lipschitz"):
        raise ValidationError(f"unknown order {order!r}")
    if m < 1:
        raise ValidationError("norm must be a positive integer")
    if m > ENUM_NORM_LIMIT:
        raise ValidationError(f"norm {m} exceeds enumeration bound {ENUM_NORM_LIMIT}")
    tuples = _doubled_tuples_with_norm(m, parity=0)
    if order == "hurwitz":
        tuples += _doubled_tuples_with_norm(m, parity=1)
    tuples.sort()
    return [HurwitzInt.from_doubled(*t) for t in tuples]


def lipschitz_count_formula(m):
    """Jacobi's four-square count 8 * sum of divisors d of m with 4 ∤ d."""
    from sympy import divisors

    return 8 * sum(d for d in divisors(m) if d % 4 != 0)


# ---------------------------------------------------------------------------
# rational and floating quaternions
# ---------------------------------------------------------------------------

class RationalQuaternion:
    """A quaternion with exact rational coordinates."""

    __slots__ = ("coords",)

    def __init__(self, a, b, c, d):
        self.coords = (Fraction(a), Fraction(b), Fraction(c), Fraction(d))

    def __add__(self, other):
        return RationalQuaternion(*(x + y for x, y in zip(self.coords, other.coords)))

    def __sub__(self, other):
        return RationalQuaternion(*(x - y for x, y in zip(self.coords, other.coords)))

    def __neg__(self):
        return RationalQuaternion(*(-x for x in self.coords))

    def __mul__(self, other):
        if isinstance(other, RationalQuaternion):
            return RationalQuaternion(*_qmul(self.coords, other.coords))
        return NotImplemented

    def norm_sq(self):
        return sum(x * x for x in self.coords)

    def to_floats(self):
        return tuple(float(x) for x in self.coords)

    def in_closed_delta(self):
        a, b, c, d = self.coords
        return (
            0 <= a <= 1 and 0 <= b <= 1 and 0 <= c <= 1
            and 0 <= d <= Fraction(1, 2)
        )

    def __eq__(self, other):
        return isinstance(other, RationalQuaternion) and self.coords == other.coords

    def __hash__(self):
        return hash(self.coords)

    def __repr__(self):
        return f"RationalQuaternion{self.coords}"


class RealQuaternion:
    """A quaternion with finite double-precision coordinates."""

    __slots__ = ("coords",)

    def __init__(self, a, b, c, d):
        coords = (float(a), float(b), float(c), float(d))
        if not all(math.isfinite(v) for v in coords):
            raise ValidationError(f"non-finite quaternion coordinates {coords}")
        self.coords = coords

    @classmethod
    def from_iterable(cls, vals):
        vals = tuple(vals)
        if len(vals) != 4:
            raise ValidationError("a quaternion needs exactly 4 coordinates")
        return cls(*vals)

    def to_floats(self):
        return self.coords

    def in_delta(self):
        a, b, c, d = self.coords
        return 0 <= a < 1 and 0 <= b < 1 and 0 <= c < 1 and 0 <= d < 0.5

    def __repr__(self):
        return f"RealQuaternion{self.coords}"

    def __eq__(self, other):
        return isinstance(other, RealQuaternion) and self.coords == other.coords


def fractional_part(xi):
    """Reduce xi into Delta = [0,1)^3 x [0,1/2), returning (frac, lattice).

    Delta is an exact fundamental domain for the additive group of the
    Hurwitz order, so the decomposition xi = lattice + frac is unique.
    """
    a, b, c, d = (xi.coords if isinstance(xi, (RealQuaternion,)) else tuple(xi))
    fa, fb, fc, fd = (a - math.floor(a), b - math.floor(b),
                      c - math.floor(c), d - math.floor(d))
    la, lb, lc, ld = (math.floor(a), math.floor(b), math.floor(c), math.floor(d))
    if fd >= 0.5:
        # shift by omega and re-reduce the first three coordinates mod 1
        fd -= 0.5
        adj = [1 if f < 0.5 else 0 for f in (fa, fb, fc)]
        fa, fb, fc = (fa - 0.5 + adj[0], fb - 0.5 + adj[1], fc - 0.5 + adj[2])
        lattice = HurwitzInt.from_doubled(
            2 * la + 1 - 2 * adj[0], 2 * lb + 1 - 2 * adj[1],
            2 * lc + 1 - 2 * adj[2], 2 * ld + 1,
        )
    else:
        lattice = HurwitzInt(la, lb, lc, ld)
    frac = RealQuaternion(fa, fb, fc, fd)
    if not frac.in_delta():
        raise InternalInvariantError(f"fractional part {frac} escaped Delta")
    return frac, lattice


# ---------------------------------------------------------------------------
# Hurwitz rationals p * q^-1
# ---------------------------------------------------------------------------

class HurwitzRational:
    """The quotient p * q^-1 of Hurwitz integers (q nonzero)."""

    __slots__ = ("p", "q")

    def __init__(self, p, q):
        if q.is_zero():
            raise ValidationError("denominator must be nonzero")
        self.p = p
        self.q = q

    def value(self):
        """Exact value p * conj(q) / norm_sq(q) as a RationalQuaternion."""
        n = self.q.norm_sq()
        Y = _qmul_doubled(self.p.doubled, self.q.conjugate().doubled)
        return RationalQuaternion(*(Fraction(y, 2 * n) for y in Y))

    def value_doubled_numerators(self):
        """Integer 4-tuple Y with value coordinates Y_i / (2 * norm_sq(q))."""
        return _qmul_doubled(self.p.doubled, self.q.conjugate().doubled)

    def reduced(self):
        """Cancel the greatest common right divisor of p and q."""
        if self.p.is_zero():
            return HurwitzRational(ZERO, ONE)
        g = gcd_right(self.p, self.q)
        return HurwitzRational(exact_right_div(self.p, g), exact_right_div(self.q, g))

    def __eq__(self, other):
        return isinstance(other, HurwitzRational) and self.value() == other.value()

    def __hash__(self):
        return hash(self.value())

    def __str__(self):
        return f"{self.p} | {self.q}"

    def __repr__(self):
        return f"HurwitzRational.parse({str(self)!r})"

    @classmethod
    def parse(cls, text):
        try:
            p_txt, q_txt = text.split("|")
        except ValueError as exc:
            raise ValidationError(f"expected 'p | q', got {text!r}") from exc
        return cls(HurwitzInt.parse(p_txt), HurwitzInt.parse(q_txt))


def to_rational(x):
    """Exact value of a HurwitzRational (separating the name for the CLI)."""
    return x.value()


def separation_gap(x, y):
    """Exact squared distance between two distinct Hurwitz rationals.

    Returns |value(x) - value(y)|^2 as a Fraction and checks the separation
    inequality gap^2 >= 1/(norm_sq(q) * norm_sq(s)); the inequality is a
    theorem, so a violation raises :class:`InternalInvariantError`.
    """
    nq = x.q.norm_sq()
    ns = y.q.norm_sq()
    Y = x.value_doubled_numerators()
    Z = y.value_doubled_numerators()
    cross = [yi * ns - zi * nq for yi, zi in zip(Y, Z)]
    num = sum(v * v for v in cross)
    if num == 0:
        raise ValidationError("separation_gap requires distinct values")
    gap_sq = Fraction(num, 4 * nq * nq * ns * ns)
    if num < 4 * nq * ns:  # gap^2 < 1/(nq*ns) after clearing denominators
        raise InternalInvariantError(
            f"separation bound violated for {x} vs {y}: gap^2 = {gap_sq}"
        )
    return gap_sq
