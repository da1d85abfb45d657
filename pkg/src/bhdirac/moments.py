"""Radial moment integrals.

Every inner product between basis functions reduces to

    M(p, c) = int_0^inf r^p exp(-c r) dr = Gamma(p + 1) / c^(p + 1),

because the common phase exp(i sqrt(2 alpha r)) cancels in u* v.  Powers live
on the quarter-integer grid, so ``p`` is carried as a :class:`fractions.Fraction`.

Float arguments are evaluated in double precision; :mod:`mpmath` arguments are
evaluated at the ambient ``mp.dps``.  The adaptive quadrature in
:func:`quadrature_oracle` is kept independent of the Gamma route and is only
meant for validation.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

import mpmath as mp

from bhdirac.errors import DomainError, QuadratureError


def _as_fraction(p) -> Fraction:
    if isinstance(p, Fraction):
        return p
    if isinstance(p, int):
        return Fraction(p)
    return Fraction(p).limit_denominator(1 << 20)


def is_mp(x) -> bool:
    return isinstance(x, (mp.mpf, mp.mpc))


@lru_cache(maxsize=65536)
def _moment_mp(p: Fraction, c, dps: int):
    pp = mp.mpf(p.numerator) / p.denominator
    return mp.exp(mp.loggamma(pp + 1) - (pp + 1) * mp.log(c))


def moment(p, c):
    """Return ``Gamma(p+1) / c**(p+1)`` computed through log-Gamma.

    Raises :class:`DomainError` unless ``p > -1`` and ``c > 0``.
    """
    p = _as_fraction(p)
    if p <= -1:
        raise DomainError(f"moment diverges at the origin for p={p}")
    if not c > 0:
        raise DomainError(f"moment needs a positive decay, got c={c}")
    if is_mp(c):
        return _moment_mp(p, c, mp.mp.dps)
    pf = float(p)
    return math.exp(math.lgamma(pf + 1.0) - (pf + 1.0) * math.log(c))


def sesquilinear(u, v):
    """Exact ``int_0^inf conj(u) v r^2 dr`` for two phased radial functions."""
    if u.alpha != v.alpha:
        raise DomainError("inner product of functions with different couplings")
    total = 0
    for q1, lam1, c1 in u.terms:
        c1 = c1.conjugate()
        for q2, lam2, c2 in v.terms:
            if q1 + q2 <= -12:
                raise DomainError(
                    f"divergent inner product: combined power {Fraction(q1 + q2, 4)}"
                )
            total = total + c1 * c2 * moment(Fraction(q1 + q2, 4) + 2, lam1 + lam2)
    return total


def quadrature_oracle(integrand, *, scale=1.0, tol=1e-13, dps=30):
    """Adaptive tanh-sinh quadrature of ``integrand`` over (0, inf).

    The substitution r = x^4 turns every quarter-power endpoint singularity
    (and the sqrt(r) phase) into a smooth integrand.  ``scale`` is a
    characteristic length (inverse decay) used to place subdivision points.
    Returns ``(value, error_estimate)``.
    """
    with mp.workdps(dps):
        s = mp.mpf(scale)
        points = [0] + [mp.root(s * m, 4) for m in (mp.mpf(1) / 16, 1, 4, 16, 64)] + [mp.inf]
        value, err = mp.quad(lambda x: 4 * x ** 3 * integrand(x ** 4), points,
                             error=True, maxdegree=10)
        if err > tol * max(abs(value), 1):
            raise QuadratureError(
                f"quadrature did not reach tol={tol:g} (estimate {float(err):.3g})",
                estimate=float(err),
            )
        return value, err
