"""Independent shooting solver for the complex eigenvalue of the radial system.

The horizon (or, for the Coulomb check, origin) Frobenius solution is
integrated outward and the recessive asymptotic solution inward; E is a root
of the Wronskian-type determinant of the two solutions at a matching radius.

For root finding the determinant is made holomorphic in E by fixing each
solution's normalization with a linear functional chosen once at the seed,
so the secant iteration sees an analytic function.  The reported residual is
the modulus-normalized determinant |det[w_in, w_out]| / (|w_in| |w_out|).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.integrate import solve_ivp

from bhdirac.errors import BranchError, DomainError, ShootingError
from bhdirac.radial import (
    BLACKHOLE,
    COULOMB,
    check_interaction,
    decay_constant,
    horizon_expansion,
    infinity_expansion,
    origin_expansion,
    system_matrix,
)

#: accepted truncation estimate of the asymptotic seed
SEED_TRUNCATION_TOL = 1e-6


@dataclass(frozen=True)
class ShootingConfig:
    """Integration and iteration settings.

    ``r_max`` and ``r_match`` default to 40 / Re(lam) and max(6, 4 alpha + 2)
    evaluated at the seed energy and then held fixed for the whole iteration.
    """

    epsilon_h: float = 1e-5
    r_max: float | None = None
    r_match: float | None = None
    ode_tol: float = 1e-11
    series_order: int = 8
    newton_tol: float = 1e-10
    max_iters: int = 40
    interaction: str = BLACKHOLE
    r_origin: float = 1e-3
    renorm_threshold: float = 1e100
    max_step: float = 0.02

    def resolved(self, alpha, E) -> "ShootingConfig":
        check_interaction(self.interaction)
        lam = decay_constant(E)
        r_max = self.r_max if self.r_max is not None else 40.0 / lam.real
        r_match = self.r_match if self.r_match is not None else max(6.0, 4 * alpha + 2)
        start = self.start_radius(alpha)
        if not start < r_match < r_max:
            raise DomainError(
                f"need start < r_match < r_max, got {start:g}, {r_match:g}, {r_max:g}"
            )
        return replace(self, r_max=float(r_max), r_match=float(r_match))

    def start_radius(self, alpha) -> float:
        if self.interaction == COULOMB:
            return self.r_origin
        return 2 * alpha * (1 + self.epsilon_h)


@dataclass(frozen=True)
class ShootingResult:
    energy: complex
    error_estimate: float
    iterations: int
    determinant: float
    config: ShootingConfig

    @property
    def converged(self) -> bool:
        return self.determinant <= self.config.newton_tol


def _integrate(interaction, alpha, k, E, r0, r1, y0, cfg) -> np.ndarray:
    """Integrate dw/dr = C w from r0 to r1, rescaling whenever |w| grows large.

    The overall scale is irrelevant for the unit-normalized rays used in the
    matching, so it is simply dropped.
    """

    def rhs(r, y):
        return system_matrix(interaction, alpha, k, E, r) @ y

    y = np.asarray(y0, dtype=complex)
    y = y / np.linalg.norm(y)
    span = (r0, r1)
    while True:
        sol = solve_ivp(
            rhs, span, y, method="DOP853", rtol=cfg.ode_tol, atol=cfg.ode_tol * 1e-6,
            events=_overflow_event(cfg.renorm_threshold),
        )
        if sol.status == -1:
            raise ShootingError(f"integrator failed: {sol.message}", radius=float(sol.t[-1]),
                                last_energy=E)
        y = sol.y[:, -1]
        if not np.all(np.isfinite(y)):
            raise ShootingError("non-finite solution", radius=float(sol.t[-1]), last_energy=E)
        if sol.status == 0:
            return y / np.linalg.norm(y)
        r_stop = float(sol.t_events[0][0]) if len(sol.t_events[0]) else float(sol.t[-1])
        y = sol.y_events[0][0] if len(sol.y_events[0]) else y
        y = y / np.linalg.norm(y)
        span = (r_stop, r1)


def _overflow_event(threshold):
    def event(r, y):
        return threshold - np.linalg.norm(y)

    event.terminal = True
    return event


def inner_solution(alpha, k, E, cfg: ShootingConfig) -> np.ndarray:
    """Unit ray of the horizon- (or origin-) regular solution at r_match."""
    if cfg.interaction == COULOMB:
        ex = origin_expansion(alpha, k, E, cfg.series_order)
    else:
        ex = horizon_expansion(alpha, k, E, cfg.series_order)
    r0 = cfg.start_radius(alpha)
    return _integrate(cfg.interaction, alpha, k, E, r0, cfg.r_match, ex.value(r0), cfg)


def outer_solution(alpha, k, E, cfg: ShootingConfig) -> np.ndarray:
    """Unit ray of the recessive solution at r_match, integrated inward from r_max."""
    ex = infinity_expansion(alpha, k, E, cfg.series_order, cfg.interaction)
    trunc = ex.truncation_estimate(cfg.r_max)
    if not trunc < SEED_TRUNCATION_TOL:
        raise ShootingError(
            f"asymptotic series not converged at r_max={cfg.r_max:g} (estimate {trunc:.2e})",
            radius=cfg.r_max, last_energy=E,
        )
    return _integrate(cfg.interaction, alpha, k, E, cfg.r_max, cfg.r_match,
                      ex.value(cfg.r_max, include_envelope=False), cfg)


def _det(u, v) -> complex:
    return u[0] * v[1] - u[1] * v[0]


def match_determinant(alpha, k, E, cfg: ShootingConfig | None = None) -> float:
    """|det[w_in, w_out]| at r_match for unit-norm rays (0 at an eigenvalue)."""
    cfg = (cfg or ShootingConfig()).resolved(alpha, E)
    return abs(_det(inner_solution(alpha, k, E, cfg), outer_solution(alpha, k, E, cfg)))


class _GaugedDeterminant:
    """det(phi_in / (g_in . phi_in), phi_out / (g_out . phi_out)), analytic in E."""

    def __init__(self, alpha, k, E0, cfg):
        self.alpha, self.k, self.cfg = alpha, k, cfg
        a, b = inner_solution(alpha, k, E0, cfg), outer_solution(alpha, k, E0, cfg)
        self.g_in = a.conj() / np.vdot(a, a).real
        self.g_out = b.conj() / np.vdot(b, b).real

    def __call__(self, E):
        a = inner_solution(self.alpha, self.k, E, self.cfg)
        b = outer_solution(self.alpha, self.k, E, self.cfg)
        da, db = self.g_in @ a, self.g_out @ b
        if abs(da) < 1e-8 or abs(db) < 1e-8:
            raise ShootingError("normalization gauge became singular", last_energy=E)
        return _det(a / da, b / db), abs(_det(a, b))


def _inside_strip(E) -> bool:
    try:
        decay_constant(E)
    except BranchError:
        return False
    return abs(E.real) < 1


def find_energy(alpha, k, E0, cfg: ShootingConfig | None = None, *, max_iters=None) -> ShootingResult:
    """Root of the matching determinant nearest the seed ``E0`` (secant iteration).

    Raises :class:`ShootingError` if the iterate leaves the bound-state strip
    |Re E| < 1 or the residual does not drop below ``newton_tol`` in time.
    """
    E0 = complex(E0)
    if not _inside_strip(E0):
        raise ShootingError(f"seed {E0} lies outside the bound-state strip", last_energy=E0)
    cfg = (cfg or ShootingConfig()).resolved(alpha, E0)
    iters = cfg.max_iters if max_iters is None else max_iters
    f = _GaugedDeterminant(alpha, k, E0, cfg)
    prev = E0
    f_prev, _ = f(prev)
    cur = E0 + 1e-8 * (1 + 1j)
    f_cur, res = f(cur)
    step = abs(cur - prev)
    for it in range(1, iters + 1):
        denom = f_cur - f_prev
        if denom == 0:
            break
        delta = -f_cur * (cur - prev) / denom
        if abs(delta) > cfg.max_step:
            delta *= cfg.max_step / abs(delta)
        nxt = cur + delta
        if not _inside_strip(nxt):
            raise ShootingError(f"iterate left the bound-state strip at E={nxt}", last_energy=nxt)
        prev, f_prev = cur, f_cur
        cur = nxt
        f_cur, res = f(cur)
        step = abs(delta)
        if res <= cfg.newton_tol and step < 1e-6:
            # distance to the root predicted by the next secant step
            slope = (f_cur - f_prev) / (cur - prev)
            err = abs(f_cur / slope) if slope != 0 else step
            return ShootingResult(cur, float(err), it, res, cfg)
    raise ShootingError(
        f"no convergence after {iters} iterations (|det|={res:.2e})", last_energy=cur
    )


def continuation(alpha_values, k, E0, cfg: ShootingConfig | None = None) -> list[ShootingResult]:
    """Follow one level through a coupling sweep, seeding each step with the previous root."""
    out = []
    E = complex(E0)
    for alpha in alpha_values:
        res = find_energy(alpha, k, E, cfg)
        out.append(res)
        E = res.energy
    return out

