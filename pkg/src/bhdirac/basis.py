"""Phase x exponential x quarter-power radial functions and the three trial bases.

A :class:`PhasedRadialFunction` is the finite sum

    u(r) = exp(i sqrt(2 alpha r)) * sum_t c_t r^(q_t / 4) exp(-lambda_t r)

with integer quarter powers ``q_t``.  The set is closed under d/dr, 1/r and the
black-hole interaction, so all matrix elements reduce to Gamma moments.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

import mpmath as mp

from bhdirac.errors import DomainError
from bhdirac.moments import is_mp, sesquilinear


class Family(str, Enum):
    PHI1 = "Phi1"
    PHI2 = "Phi2"
    PHI3 = "Phi3"

    @classmethod
    def parse(cls, value) -> "Family":
        if isinstance(value, cls):
            return value
        text = str(value).strip().lower().replace("φ", "phi")
        for member in cls:
            if member.value.lower() == text or member.name.lower() == text:
                return member
        if text in {"1", "2", "3"}:
            return list(cls)[int(text) - 1]
        raise DomainError(f"unknown basis family {value!r}")


def _is_zero(c) -> bool:
    return c == 0


@dataclass(frozen=True)
class PhasedRadialFunction:
    """Symbolic radial function; ``terms`` holds ``(quarter_power, decay, coeff)``.

    The shared phase exp(i sqrt(2 alpha r)) is implied.  Terms are kept merged
    (one entry per ``(quarter_power, decay)``) and exact zeros are dropped.
    """

    alpha: object
    terms: tuple = ()

    @classmethod
    def from_terms(cls, alpha, terms) -> "PhasedRadialFunction":
        merged: dict = {}
        for q, lam, c in terms:
            if not lam > 0:
                raise DomainError(f"decay must be positive, got {lam}")
            key = (int(q), lam)
            merged[key] = merged.get(key, 0) + c
        items = sorted(
            ((q, lam, c) for (q, lam), c in merged.items() if not _is_zero(c)),
            key=lambda t: (t[1], t[0]),
        )
        return cls(alpha, tuple(items))

    @classmethod
    def monomial(cls, alpha, power, decay, coeff=1) -> "PhasedRadialFunction":
        q = Fraction(power) * 4
        if q.denominator != 1:
            raise DomainError(f"power {power} is not on the quarter-integer grid")
        return cls.from_terms(alpha, [(int(q), decay, coeff)])

    @property
    def powers(self) -> list[Fraction]:
        return [Fraction(q, 4) for q, _, _ in self.terms]

    @property
    def decays(self) -> list:
        return [lam for _, lam, _ in self.terms]

    def is_zero(self) -> bool:
        return not self.terms

    def _check(self, other):
        if self.alpha != other.alpha:
            raise DomainError("functions carry different couplings")

    def __add__(self, other):
        self._check(other)
        return PhasedRadialFunction.from_terms(self.alpha, self.terms + other.terms)

    def __sub__(self, other):
        return self + other.scale(-1)

    def __neg__(self):
        return self.scale(-1)

    def scale(self, factor) -> "PhasedRadialFunction":
        return PhasedRadialFunction.from_terms(
            self.alpha, [(q, lam, c * factor) for q, lam, c in self.terms]
        )

    def __mul__(self, factor):
        return self.scale(factor)

    __rmul__ = __mul__

    def times_power(self, quarters: int, factor=1) -> "PhasedRadialFunction":
        """Multiply by ``factor * r**(quarters/4)``."""
        return PhasedRadialFunction.from_terms(
            self.alpha, [(q + quarters, lam, c * factor) for q, lam, c in self.terms]
        )

    def over_r(self) -> "PhasedRadialFunction":
        return self.times_power(-4)

    def derivative(self) -> "PhasedRadialFunction":
        """d/dr, including the phase derivative i sqrt(alpha / (2 r))."""
        half_gamma = _sqrt(2 * self.alpha) / 2
        out = []
        for q, lam, c in self.terms:
            if q:
                out.append((q - 4, lam, c * q / 4))
            out.append((q, lam, -lam * c))
            out.append((q - 2, lam, 1j * half_gamma * c))
        return PhasedRadialFunction.from_terms(self.alpha, out)

    def inner(self, other):
        return sesquilinear(self, other)

    def __call__(self, r):
        return evaluate(self, r)


def _sqrt(x):
    return mp.sqrt(x) if is_mp(x) else math.sqrt(x)


def evaluate(u: PhasedRadialFunction, r) -> complex:
    """Numerical value u(r) for r > 0 (double precision)."""
    r = float(r)
    if not r > 0:
        raise DomainError(f"evaluate needs r > 0, got {r}")
    total = 0j
    for q, lam, c in u.terms:
        total += complex(c) * r ** (q / 4) * math.exp(-float(lam) * r)
    return total * cmath.exp(1j * math.sqrt(2 * float(u.alpha) * r))


@dataclass(frozen=True)
class BasisSpec:
    """Family, order and nonlinear decay parameters of a trial basis.

    ``n`` is the upper summation index of the family's power series.  ``a`` is
    the decay of the small component f, ``b`` that of the large component g.
    """

    family: Family
    n: int
    a: object
    b: object
    alpha: object
    k: int

    def __post_init__(self):
        object.__setattr__(self, "family", Family.parse(self.family))
        if int(self.n) != self.n or self.n < 0:
            raise DomainError(f"order n must be a nonnegative integer, got {self.n}")
        if not (self.a > 0 and self.b > 0):
            raise DomainError(f"decay parameters must be positive, got a={self.a}, b={self.b}")
        if self.alpha < 0:
            raise DomainError(f"coupling must be nonnegative, got {self.alpha}")
        if self.k == 0 or int(self.k) != self.k:
            raise DomainError(f"angular index k must be a nonzero integer, got {self.k}")

    def quarter_powers(self) -> list[int]:
        return family_quarter_powers(self.family, self.n)


def family_quarter_powers(family, n: int) -> list[int]:
    """Quarter powers of one component for ``family`` at order ``n``.

    Phi1: r^-3/4 head then r^0 .. r^(n-1).  Phi2: r^(-3/4 + j/4), j = 0..n.
    Phi3: r^-3/4, r^-1/2, r^-1/4 then integer powers r^0 .. r^n.
    """
    family = Family.parse(family)
    if n < 0:
        raise DomainError("negative order")
    if family is Family.PHI1:
        return [-3] + [4 * (j - 1) for j in range(1, n + 1)]
    if family is Family.PHI2:
        return [-3 + j for j in range(n + 1)]
    return [-3, -2, -1] + [4 * j for j in range(n + 1)]


@dataclass(frozen=True)
class BasisSet:
    g: tuple
    f: tuple
    spec: BasisSpec

    @property
    def size(self) -> int:
        return len(self.g)


def normalized_monomial(alpha, quarters: int, decay) -> PhasedRadialFunction:
    raw = PhasedRadialFunction.from_terms(alpha, [(quarters, decay, 1)])
    norm2 = sesquilinear(raw, raw).real
    one = mp.mpf(1) if is_mp(decay) else 1.0
    return raw.scale(one / _sqrt(norm2))


def build_basis(spec: BasisSpec, quarter_powers=None) -> BasisSet:
    """Unit-normalized g (decay b) and f (decay a) lists for ``spec``.

    ``quarter_powers`` overrides the family grid (used for head-free checks).
    """
    qs = spec.quarter_powers() if quarter_powers is None else list(quarter_powers)
    if len(set(qs)) != len(qs):
        raise DomainError("duplicate powers make the basis linearly dependent")
    if min(qs) < -3:
        raise DomainError("powers below r^-3/4 are not normalizable with the r^2 weight")
    g = tuple(normalized_monomial(spec.alpha, q, spec.b) for q in qs)
    f = tuple(normalized_monomial(spec.alpha, q, spec.a) for q in qs)
    return BasisSet(g, f, spec)
