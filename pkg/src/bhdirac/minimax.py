"""Minimax selection of the decay parameters and the top-level spectrum driver.

The nonlinear parameters (a for f, b for g) are fixed at the saddle of the
head-free two-function Rayleigh value E(a, b): a maximum along a (the small
component) and a minimum along b (the large component).  With one
normalized exponential per component the 2x2 problem is in closed form:

    h11 = 1 - alpha b     h22 = -1 - alpha a     O = I
    h12 = 4 (ab)^(3/2) [ (k-1)/s^2 + 2a/s^3 - i sqrt(2 alpha) (3 sqrt(pi) / 8) / s^(5/2) ]
    h21 = conj(h12),  s = a + b

and E(a, b) is its positive eigenvalue.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import mpmath as mp
import numpy as np
from scipy.optimize import minimize_scalar

from bhdirac.assembly import assemble
from bhdirac.basis import BasisSpec, Family, build_basis
from bhdirac.eigen import SpectrumResult, classify, generalized_eig
from bhdirac.errors import (
    ConditioningError,
    DomainError,
    EigenConvergenceError,
    NoBoundStateError,
    SaddleError,
    ShootingError,
)
from bhdirac.radial import BLACKHOLE, check_interaction
from bhdirac.shooting import ShootingConfig, find_energy

GRADIENT_TOL = 1e-9
SADDLE_DPS = 30
DEFAULT_DPS = 60
#: shooting iterations allowed before a level is declared unconfirmed
SPURIOUS_ITERS = 20


def _lib(x):
    return mp if isinstance(x, (mp.mpf, mp.mpc)) else None


def offdiagonal(alpha, k, a, b):
    """Closed-form h12 of the head-free two-function problem as (real, imag)."""
    lib = mp if (_lib(a) or _lib(b) or _lib(alpha)) else math
    s = a + b
    norm = 4 * (a * b) ** 1.5
    real = (k - 1) / s ** 2 + 2 * a / s ** 3
    imag = -lib.sqrt(2 * alpha) * 3 * lib.sqrt(lib.pi) / 8 / s ** 2.5
    return norm * real, norm * imag


def rayleigh(alpha, k, a, b):
    """E(a, b): positive eigenvalue of the head-free 2x2 pencil."""
    if not (a > 0 and b > 0):
        raise DomainError(f"decay parameters must be positive, got a={a}, b={b}")
    re, im = offdiagonal(alpha, k, a, b)
    h11 = 1 - alpha * b
    h22 = -1 - alpha * a
    half = (h11 - h22) / 2
    root = mp.sqrt if _lib(re) else math.sqrt
    return (h11 + h22) / 2 + root(half * half + re * re + im * im)


def fixed_weight_quotient(alpha, k, a, b):
    """Quotient for the fixed equal-weight trial spinor (g + f) / sqrt 2."""
    re, _ = offdiagonal(alpha, k, a, b)
    return ((1 - alpha * b) + (-1 - alpha * a) + 2 * re) / 2


@dataclass(frozen=True)
class SaddleResult:
    a: float
    b: float
    energy: float
    gradient_norm: float
    hessian: tuple
    iterations: int
    method: str

    @property
    def signature_ok(self) -> bool:
        (eaa, eab), (_, ebb) = self.hessian
        return eaa < 0 < ebb

    @property
    def signature(self) -> str:
        (eaa, _), (_, ebb) = self.hessian
        return ("-" if eaa < 0 else "+") + ("-" if ebb < 0 else "+")


def _derivatives(alpha, k, a, b):
    """Central-difference gradient and Hessian of E at (a, b) in mpmath."""
    E = lambda x, y: rayleigh(alpha, k, x, y)  # noqa: E731
    ha, hb = a * mp.mpf("1e-7"), b * mp.mpf("1e-7")
    ga = (E(a + ha, b) - E(a - ha, b)) / (2 * ha)
    gb = (E(a, b + hb) - E(a, b - hb)) / (2 * hb)
    Ha, Hb = a * mp.mpf("1e-5"), b * mp.mpf("1e-5")
    e0 = E(a, b)
    eaa = (E(a + Ha, b) - 2 * e0 + E(a - Ha, b)) / Ha ** 2
    ebb = (E(a, b + Hb) - 2 * e0 + E(a, b - Hb)) / Hb ** 2
    eab = (E(a + Ha, b + Hb) - E(a + Ha, b - Hb) - E(a - Ha, b + Hb) + E(a - Ha, b - Hb)) / (4 * Ha * Hb)
    return (ga, gb), ((eaa, eab), (eab, ebb))


def _newton(alpha, k, a, b, max_iter):
    for it in range(max_iter + 1):
        (ga, gb), ((eaa, eab), (_, ebb)) = _derivatives(alpha, k, a, b)
        gnorm = mp.sqrt(ga ** 2 + gb ** 2)
        if gnorm <= GRADIENT_TOL * 1e-3:
            return a, b, it
        det = eaa * ebb - eab * eab
        if det == 0:
            return None
        da = (ebb * ga - eab * gb) / det
        db = (eaa * gb - eab * ga) / det
        na, nb = a - da, b - db
        if not (na > 0 and nb > 0):
            return None
        if abs(da) + abs(db) < mp.mpf(10) ** (-(mp.mp.dps - 8)) * (a + b):
            return na, nb, it + 1
        a, b = na, nb
    return a, b, max_iter


def _nested_search(alpha, k, lo, hi):
    """min over b of max over a, each a bounded scalar search in double precision."""
    xatol = 1e-12 * alpha

    def inner(b):
        res = minimize_scalar(lambda a: -rayleigh(alpha, k, a, b), bounds=(lo, hi),
                              method="bounded", options={"xatol": xatol, "maxiter": 500})
        return res.x, -res.fun

    res = minimize_scalar(lambda b: inner(b)[1], bounds=(lo, hi), method="bounded",
                          options={"xatol": xatol, "maxiter": 500})
    return inner(res.x)[0], res.x


def find_saddle(alpha, k, init=None, *, max_iter: int = 60, dps: int = SADDLE_DPS) -> SaddleResult:
    """Saddle (a*, b*) of the head-free Rayleigh value.

    Newton on the finite-difference gradient is tried first from ``init``
    (default a = b = alpha); if it fails or lands on a point with the wrong
    curvature signature, a nested bounded search brackets the saddle and
    Newton polishes it.
    """
    alpha = float(alpha)
    if alpha == 0:
        raise NoBoundStateError("no bound state at zero coupling")
    if alpha < 0:
        raise DomainError(f"coupling must be nonnegative, got {alpha}")
    k = int(k)
    if k == 0:
        raise DomainError("angular index k must be nonzero")
    a0, b0 = init if init is not None else (alpha, alpha)
    with mp.workdps(dps):
        A = mp.mpf(alpha)
        out = _newton(A, k, mp.mpf(a0), mp.mpf(b0), max_iter)
        result = _finish(A, k, *out, "newton") if out is not None else None
        if result is None or not (result.signature_ok and result.gradient_norm <= GRADIENT_TOL):
            sa, sb = _nested_search(alpha, k, alpha * 1e-3, 20 * alpha)
            out = _newton(A, k, mp.mpf(sa), mp.mpf(sb), max_iter)
            if out is None:
                raise SaddleError(f"saddle search failed at alpha={alpha}, k={k}")
            result = _finish(A, k, *out, "nested-search")
    if not result.signature_ok:
        raise SaddleError(
            f"stationary point at a={result.a:.6g}, b={result.b:.6g} is not a max-min saddle"
            f" (signature {result.signature})"
        )
    if result.gradient_norm > GRADIENT_TOL:
        raise SaddleError(f"gradient norm {result.gradient_norm:.2e} above tolerance")
    return result


def _finish(alpha, k, a, b, iters, method) -> SaddleResult:
    (ga, gb), hess = _derivatives(alpha, k, a, b)
    return SaddleResult(
        a=float(a), b=float(b), energy=float(rayleigh(alpha, k, a, b)),
        gradient_norm=float(mp.sqrt(ga ** 2 + gb ** 2)),
        hessian=tuple(tuple(float(x) for x in row) for row in hess),
        iterations=iters, method=method,
    )


@dataclass
class SpectrumRun:
    """Spectrum of one basis order together with its saddle and inputs."""

    spectrum: SpectrumResult
    saddle: SaddleResult
    spec: BasisSpec
    interaction: str = BLACKHOLE
    diagnostics: dict = field(default_factory=dict)

    @property
    def ground(self) -> complex:
        return self.spectrum.ground


def spectrum(alpha, k, family, n, *, interaction: str = BLACKHOLE, saddle: SaddleResult | None = None,
             dps: int = DEFAULT_DPS, vectors: bool = False, check_spurious: bool = False,
             levels: int = 2, shooting: ShootingConfig | None = None) -> SpectrumRun:
    """Assemble and solve the pencil for ``family`` at order ``n``.

    With ``check_spurious`` the first ``levels`` bound-window eigenvalues of
    each branch are refined by shooting; a level is flagged spurious when the
    refinement does not converge within a bounded number of iterations or
    lands on a root closer to another eigenvalue of the same branch.
    """
    check_interaction(interaction)
    family = Family.parse(family)
    saddle = saddle or find_saddle(alpha, k)
    with mp.workdps(dps):
        spec = BasisSpec(family, n, mp.mpf(saddle.a), mp.mpf(saddle.b), mp.mpf(float(alpha)), k)
        pair = assemble(build_basis(spec), spec, interaction)
        eig = generalized_eig(pair, vectors=vectors)
    meta = dict(alpha=float(alpha), k=k, family=family.value, n=n, a=saddle.a, b=saddle.b,
                interaction=interaction)
    result = classify(eig, meta=meta)
    if check_spurious:
        cfg = shooting or ShootingConfig(interaction=interaction)
        flag_spurious(result, float(alpha), k, levels, cfg)
    return SpectrumRun(result, saddle, spec, interaction)


def flag_spurious(result: SpectrumResult, alpha, k, levels, cfg: ShootingConfig) -> None:
    """Shooting confirmation of the leading levels of both branches (in place)."""
    for name in ("positive", "negative"):
        idx = result.levels(name)
        vals = [complex(result.values[i]) for i in idx]
        for pos, i in enumerate(idx[:levels]):
            try:
                ref = find_energy(alpha, k, vals[pos], cfg, max_iters=SPURIOUS_ITERS)
            except (ShootingError, DomainError):
                result.spurious[i] = True
                result.refined[i] = None
                continue
            owner = int(np.argmin([abs(ref.energy - v) for v in vals]))
            result.refined[i] = ref
            result.spurious[i] = owner != pos


@dataclass
class ConvergenceTable:
    alpha: float
    k: int
    family: Family
    orders: list
    runs: dict
    skipped: dict

    def level(self, n, name="positive", j=0) -> complex:
        return self.runs[n].spectrum.energies(name)[j]

    def spread(self, name="positive", j=0, last: int = 3) -> float:
        """Max |E_n - E_m| of level j over the last ``last`` successful orders."""
        ns = [n for n in self.orders if n in self.runs][-last:]
        vals = []
        for n in ns:
            try:
                vals.append(self.level(n, name, j))
            except IndexError:
                continue
        if len(vals) < 2:
            return float("nan")
        return max(abs(x - y) for x in vals for y in vals)


def convergence_table(alpha, k, family, orders, *, interaction: str = BLACKHOLE,
                      dps: int = DEFAULT_DPS) -> ConvergenceTable:
    """Spectra over a range of orders sharing one saddle; orders that hit the
    conditioning cap or lack a bound state are recorded in ``skipped``."""
    saddle = find_saddle(alpha, k)
    runs, skipped = {}, {}
    for n in orders:
        try:
            runs[n] = spectrum(alpha, k, family, n, interaction=interaction, saddle=saddle, dps=dps)
        except (ConditioningError, EigenConvergenceError) as exc:
            skipped[n] = str(exc)
    return ConvergenceTable(float(alpha), int(k), Family.parse(family), list(orders), runs, skipped)
