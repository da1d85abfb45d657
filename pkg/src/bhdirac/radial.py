"""Radial Dirac operator in the Schwarzschild background.

Units are hbar = m = c = 1: r in Compton wavelengths, E in mc^2, and the
coupling alpha = GMm / (hbar c) puts the horizon at r = 2 alpha.

The first-order system is written for w = (r f, r g):

    dw/dr = C(r) w,   C(r) = N(r) / (r - 2 alpha)

with the 2x2 numerator N(r) of :func:`c_matrix`.  Three boundary expansions
seed the shooting integration: the analytic Frobenius branch at the horizon,
the regular branch at the origin for the Coulomb validation problem, and the
recessive asymptotic series at infinity

    w ~ exp(-lam r + beta sqrt(r)) r^sigma sum_n w_n r^(-n/2).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from bhdirac.basis import PhasedRadialFunction, _sqrt
from bhdirac.errors import BranchError, DomainError, FrobeniusDegenerateError

BLACKHOLE = "blackhole"
COULOMB = "coulomb"
INTERACTIONS = (BLACKHOLE, COULOMB)


def check_interaction(interaction: str) -> str:
    if interaction not in INTERACTIONS:
        raise DomainError(f"interaction must be one of {INTERACTIONS}, got {interaction!r}")
    return interaction


def horizon_radius(alpha) -> float:
    return 2 * alpha


def decay_constant(E) -> complex:
    """sqrt(1 - E^2) on the branch with positive real part."""
    E = complex(E)
    if E.imag == 0 and abs(E.real) >= 1:
        raise BranchError(f"|E| >= 1 on the real axis has no bound state (E={E.real})")
    lam = cmath.sqrt(1 - E * E)
    if lam.real < 0:
        lam = -lam
    if not lam.real > 0:
        raise BranchError(f"sqrt(1 - E^2) has no decaying branch at E={E}")
    return lam


def c_matrix(alpha, k, E, r) -> np.ndarray:
    """Coefficient matrix C(r) of dw/dr = C w for the black-hole problem."""
    r = float(r)
    alpha = float(alpha)
    if not r > 0:
        raise DomainError(f"C(r) is singular at r <= 0 (r={r})")
    if abs(r - 2 * alpha) <= 1e-14 * max(1.0, r):
        raise DomainError(f"C(r) is singular at the horizon r = 2 alpha = {2 * alpha}")
    E = complex(E)
    gamma = math.sqrt(2 * alpha)
    s = math.sqrt(r)
    num = np.array(
        [
            [k - alpha / (2 * r) + 1j * gamma * s * (1 + E),
             1j * (-k - 0.25) * gamma / s + r * (1 - E)],
            [1j * (-k + 0.25) * gamma / s + r * (1 + E),
             -k - alpha / (2 * r) - 1j * gamma * s * (1 - E)],
        ],
        dtype=complex,
    )
    return num / (r - 2 * alpha)


def coulomb_c_matrix(alpha, k, E, r) -> np.ndarray:
    """Same system with the interaction replaced by the Coulomb potential -alpha/r."""
    r = float(r)
    if not r > 0:
        raise DomainError(f"C(r) is singular at r <= 0 (r={r})")
    E = complex(E)
    return np.array(
        [[k / r, 1 - E - alpha / r], [1 + E + alpha / r, -k / r]], dtype=complex
    )


def system_matrix(interaction, alpha, k, E, r) -> np.ndarray:
    if check_interaction(interaction) == BLACKHOLE:
        return c_matrix(alpha, k, E, r)
    return coulomb_c_matrix(alpha, k, E, r)


# --- operators on the symbolic function algebra -----------------------------


def apply_interaction(alpha, u: PhasedRadialFunction) -> PhasedRadialFunction:
    """Black-hole interaction i sqrt(2 alpha / r) (d/dr + 3 / (4 r)) applied to u.

    Written term by term so that the r^-3/4 power is annihilated exactly by
    (d/dr + 3/(4r)); only the phase and decay derivatives survive on it.
    """
    if alpha != u.alpha:
        raise DomainError("interaction coupling differs from the function's coupling")
    gamma = _sqrt(2 * alpha)
    out = []
    for q, lam, c in u.terms:
        if q != -3:
            out.append((q - 6, lam, 1j * gamma * c * (q + 3) / 4))
        out.append((q - 2, lam, -1j * gamma * lam * c))
        out.append((q - 4, lam, -alpha * c))
    return PhasedRadialFunction.from_terms(u.alpha, out)


def apply_coulomb(alpha, u: PhasedRadialFunction) -> PhasedRadialFunction:
    """Coulomb validation interaction -alpha / r."""
    return u.times_power(-4, -alpha)


def interaction_operator(interaction: str):
    if check_interaction(interaction) == BLACKHOLE:
        return apply_interaction
    return apply_coulomb


def upper_offdiagonal(k, u: PhasedRadialFunction) -> PhasedRadialFunction:
    """((k - 1)/r - d/dr) u, the g-row / f-column entry of H."""
    return u.times_power(-4, k - 1) - u.derivative()


def lower_offdiagonal(k, u: PhasedRadialFunction) -> PhasedRadialFunction:
    """((k + 1)/r + d/dr) u, the f-row / g-column entry of H."""
    return u.times_power(-4, k + 1) + u.derivative()


# --- boundary expansions -----------------------------------------------------


@dataclass(frozen=True)
class BoundaryExpansion:
    """Truncated local solution of dw/dr = C w around a singular point.

    ``location`` is ``"horizon"``, ``"origin"`` or ``"infinity"``.  At the
    regular points ``w = (r - r0)^exponent sum_n c_n (r - r0)^n`` (``r0`` is 0 at
    the origin); at infinity ``w = exp(-decay r + phase_coeff sqrt r) r^power
    sum_n c_n r^(-n/2)``.
    """

    location: str
    exponents: tuple
    exponent: complex
    coefficients: tuple
    order: int
    center: float = 0.0
    decay: complex = 0j
    phase_coeff: complex = 0j
    power: complex = 0j
    residue: np.ndarray | None = field(default=None, compare=False, repr=False)

    def series(self, r) -> np.ndarray:
        if self.location == "infinity":
            t = float(r) ** -0.5
        else:
            t = float(r) - self.center
        total = np.zeros(2, dtype=complex)
        for c in reversed(self.coefficients):
            total = total * t + c
        return total

    def envelope(self, r) -> complex:
        r = float(r)
        if self.location == "infinity":
            return cmath.exp(-self.decay * r + self.phase_coeff * math.sqrt(r)
                             + self.power * math.log(r))
        return complex(r - self.center) ** self.exponent if self.exponent else 1.0

    def value(self, r, include_envelope=True) -> np.ndarray:
        w = self.series(r)
        return w * self.envelope(r) if include_envelope else w

    def derivative(self, r) -> np.ndarray:
        """Exact derivative of the truncated expansion (envelope included)."""
        r = float(r)
        env = self.envelope(r)
        if self.location == "infinity":
            t = r ** -0.5
            w = self.series(r)
            dw = sum(-n / 2 * c * t ** (n + 2) for n, c in enumerate(self.coefficients))
            ds = -self.decay + self.phase_coeff * t / 2 + self.power / r
            return env * (ds * w + dw)
        x = r - self.center
        w = self.series(r)
        dw = sum(n * c * x ** (n - 1) for n, c in enumerate(self.coefficients) if n)
        lead = self.exponent / x if self.exponent else 0
        return env * (lead * w + dw)

    def truncation_estimate(self, r) -> float:
        """Relative size of the last retained term at radius r."""
        c0 = np.linalg.norm(self.coefficients[0])
        cl = np.linalg.norm(self.coefficients[-1])
        t = float(r) ** -0.5 if self.location == "infinity" else abs(float(r) - self.center)
        return float(cl * t ** (len(self.coefficients) - 1) / c0)


def _binomial(p, m: int) -> float:
    out = 1.0
    for i in range(m):
        out *= (p - i) / (i + 1)
    return out


def _power_taylor(p, r0, m: int) -> float:
    """m-th Taylor coefficient of r^p about r0."""
    return r0 ** p * _binomial(p, m) * r0 ** (-m)


def horizon_residue_series(alpha, k, E, order: int) -> list[np.ndarray]:
    """Taylor coefficients A_m of (r - 2 alpha) C(r) about the horizon."""
    alpha = float(alpha)
    E = complex(E)
    r0 = 2 * alpha
    gamma = math.sqrt(2 * alpha)
    out = []
    for m in range(order + 1):
        inv = _power_taylor(-1.0, r0, m)
        sq = _power_taylor(0.5, r0, m)
        isq = _power_taylor(-0.5, r0, m)
        lin = r0 if m == 0 else (1.0 if m == 1 else 0.0)
        const = 1.0 if m == 0 else 0.0
        out.append(np.array(
            [
                [k * const - alpha / 2 * inv + 1j * gamma * (1 + E) * sq,
                 -1j * (k + 0.25) * gamma * isq + (1 - E) * lin],
                [1j * (0.25 - k) * gamma * isq + (1 + E) * lin,
                 -k * const - alpha / 2 * inv - 1j * gamma * (1 - E) * sq],
            ],
            dtype=complex,
        ))
    return out


def _eig2(A) -> tuple[complex, complex]:
    tr = A[0, 0] + A[1, 1]
    det = A[0, 0] * A[1, 1] - A[0, 1] * A[1, 0]
    disc = cmath.sqrt(tr * tr - 4 * det)
    return (tr + disc) / 2, (tr - disc) / 2


def _check_gap(selected, other, where):
    gap = other - selected
    if abs(gap.imag) < 1e-12 and abs(gap.real - round(gap.real)) < 1e-12:
        raise FrobeniusDegenerateError(
            f"Frobenius exponents at the {where} differ by an integer ({gap}); "
            "logarithmic solutions are not implemented"
        )


def horizon_expansion(alpha, k, E, order: int = 8) -> BoundaryExpansion:
    """Analytic Frobenius branch at r = 2 alpha.

    The residue matrix A_0 has det A_0 = 0 identically, so its exponents are 0
    and tr A_0 = -1/2 + 4 i alpha E.  The physical solution is the analytic one
    (exponent 0); the other branch behaves as (r - 2 alpha)^(-1/2 + 4 i alpha E).
    """
    if not alpha > 0:
        raise DomainError("the horizon expansion needs alpha > 0")
    A = horizon_residue_series(alpha, k, E, order)
    A0 = A[0]
    e1, e2 = _eig2(A0)
    selected, other = (e1, e2) if abs(e1) <= abs(e2) else (e2, e1)
    _check_gap(selected, other, "horizon")
    c0 = np.array([-A0[0, 1], A0[0, 0]])
    if np.linalg.norm(c0) < 1e-14 * max(1.0, np.abs(A0).max()):
        c0 = np.array([A0[1, 1], -A0[1, 0]])
    coeffs = [c0]
    eye = np.eye(2)
    for n in range(1, order + 1):
        rhs = sum(A[m] @ coeffs[n - m] for m in range(1, n + 1))
        coeffs.append(np.linalg.solve(n * eye - A0, rhs))
    return BoundaryExpansion(
        location="horizon",
        exponents=(selected, other),
        exponent=0,
        coefficients=tuple(coeffs),
        order=order,
        center=2 * float(alpha),
        residue=A0,
    )


def origin_expansion(alpha, k, E, order: int = 8) -> BoundaryExpansion:
    """Regular Frobenius branch r^gamma, gamma = sqrt(k^2 - alpha^2), of the Coulomb system."""
    alpha = float(alpha)
    E = complex(E)
    A0 = np.array([[k, -alpha], [alpha, -k]], dtype=complex)
    A1 = np.array([[0, 1 - E], [1 + E, 0]], dtype=complex)
    e1, e2 = _eig2(A0)
    selected, other = (e1, e2) if e1.real >= e2.real else (e2, e1)
    _check_gap(selected, other, "origin")
    c0 = np.array([-A0[0, 1], A0[0, 0] - selected])
    if np.linalg.norm(c0) < 1e-14:
        c0 = np.array([A0[1, 1] - selected, -A0[1, 0]])
    coeffs = [c0]
    eye = np.eye(2)
    for n in range(1, order + 1):
        coeffs.append(np.linalg.solve((n + selected) * eye - A0, A1 @ coeffs[n - 1]))
    return BoundaryExpansion(
        location="origin",
        exponents=(selected, other),
        exponent=selected,
        coefficients=tuple(coeffs),
        order=order,
        center=0.0,
        residue=A0,
    )


def _infinity_coefficients(interaction, alpha, k, E, count: int) -> list[np.ndarray]:
    """Coefficients C_m of C(r) = sum_m C_m t^m with t = r^(-1/2)."""
    alpha = float(alpha)
    E = complex(E)
    zero = np.zeros((2, 2), dtype=complex)
    if interaction == COULOMB:
        out = [zero.copy() for _ in range(count + 1)]
        out[0] = np.array([[0, 1 - E], [1 + E, 0]], dtype=complex)
        if count >= 2:
            out[2] = np.array([[k, -alpha], [alpha, -k]], dtype=complex)
        return out
    gamma = math.sqrt(2 * alpha)
    num = [zero.copy() for _ in range(max(count, 4) + 1)]
    num[0] = np.array([[0, 1 - E], [1 + E, 0]], dtype=complex)
    num[1] = np.array([[1j * gamma * (1 + E), 0], [0, -1j * gamma * (1 - E)]])
    num[2] = np.array([[k, 0], [0, -k]], dtype=complex)
    num[3] = np.array([[0, -1j * (k + 0.25) * gamma], [1j * (0.25 - k) * gamma, 0]])
    num[4] = np.array([[-alpha / 2, 0], [0, -alpha / 2]], dtype=complex)
    out = []
    for m in range(count + 1):
        acc = zero.copy()
        for j in range(0, m + 1, 2):
            if m - j <= 4:
                acc = acc + num[m - j] * (2 * alpha) ** (j // 2)
        out.append(acc)
    return out


def infinity_expansion(alpha, k, E, order: int = 8, interaction: str = BLACKHOLE) -> BoundaryExpansion:
    """Recessive asymptotic solution at r -> infinity.

    Substituting w = exp(S) sum_n w_n t^n, t = r^(-1/2), S' = -lam + beta t / 2 + sigma t^2
    gives at order t^N:  sum_{m<=N} D_m w_{N-m} + (N-2)/2 w_{N-2} = 0 with
    D_0 = C_0 + lam, D_1 = C_1 - beta/2, D_2 = C_2 - sigma.  D_0 is singular; the
    solvability conditions fix beta (N=1), sigma (N=2) and the free component of
    w_{N-2} along w_0 (N>=3).
    """
    check_interaction(interaction)
    lam = decay_constant(E)
    E = complex(E)
    M = order + 2
    C = _infinity_coefficients(interaction, alpha, k, E, M)
    eye = np.eye(2)
    w0 = np.array([1 - E, -lam])          # null vector of C_0 + lam
    v1 = np.array([1 - E, lam])           # eigenvector of C_0 with eigenvalue +lam
    u0 = np.array([lam, -(1 - E)])        # left null vector of C_0 + lam
    u1 = np.array([lam, 1 - E])
    u0 = u0 / (u0 @ w0)
    u1 = u1 / (u1 @ v1)
    beta = 2 * (u0 @ C[1] @ w0)
    D = [C[0] + lam * eye, C[1] - beta / 2 * eye] + [c.copy() for c in C[2:]]
    q1 = -(u1 @ D[1] @ w0) / (2 * lam)
    sigma = (u0 @ C[1] @ v1) * q1 + u0 @ C[2] @ w0
    D[2] = C[2] - sigma * eye

    def residual(N, ws):
        s = sum(D[m] @ ws[N - m] for m in range(1, N + 1))
        if N >= 2:
            s = s + (N - 2) / 2 * ws[N - 2]
        return s

    ws = [w0, q1 * v1]
    dq = -(u1 @ D[1] @ w0) / (2 * lam)
    for N in range(2, M + 1):
        if N >= 3:
            s0 = u0 @ residual(N, ws)
            delta = (u0 @ D[1] @ (dq * v1)) + u0 @ D[2] @ w0 + (N - 2) / 2 * (u0 @ w0)
            p = -s0 / delta
            ws[N - 2] = ws[N - 2] + p * w0
            ws[N - 1] = ws[N - 1] + p * dq * v1
        qN = -(u1 @ residual(N, ws)) / (2 * lam)
        ws.append(qN * v1)
    return BoundaryExpansion(
        location="infinity",
        exponents=(-lam, lam),
        exponent=0,
        coefficients=tuple(ws[: order + 1]),
        order=order,
        decay=lam,
        phase_coeff=beta,
        power=sigma,
    )


def asymptotic_power(alpha, E) -> complex:
    """Closed-form r-power of the recessive black-hole solution, alpha (2E^2 - 1) / lam."""
    E = complex(E)
    return alpha * (-1 + 2 * E * E) / decay_constant(E)
