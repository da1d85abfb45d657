"""Dense generalized eigensolver for h c = E O c and spectrum classification.

O is Hermitian positive definite, so the pencil is reduced to the standard
problem A = L^-1 h L^-H with O = L L^H, and A is handed to LAPACK's complex
Hessenberg-QR driver.  For assembled pencils carrying mpmath entries the
reduction runs in the working precision and only A is rounded to double,
which is what keeps the ill-conditioned overlap matrices of the richer
families usable.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import mpmath as mp
import numpy as np
import scipy.linalg

from bhdirac.assembly import MatrixPair, overlap_factors
from bhdirac.errors import ConditioningError, EigenConvergenceError, NoBoundStateError

#: bound-state window: |Re E| < 1 and |Im E| <= BOUND_IM_RATIO * |Re E|
BOUND_IM_RATIO = 0.5


@dataclass
class EigResult:
    values: np.ndarray
    vectors: np.ndarray | None = None
    backward_errors: np.ndarray | None = None
    condition: float = float("nan")


def _blockdiag_mp(A, B):
    n, m = A.rows, B.rows
    out = mp.matrix(n + m, n + m)
    for i in range(n):
        for j in range(n):
            out[i, j] = A[i, j]
    for i in range(m):
        for j in range(m):
            out[n + i, n + j] = B[i, j]
    return out


def _eig_standard(A, vectors):
    try:
        if vectors:
            return scipy.linalg.eig(A, check_finite=True)
        return scipy.linalg.eigvals(A, check_finite=True), None
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise EigenConvergenceError(f"QR iteration failed: {exc}") from exc


def _from_pair(pair: MatrixPair, vectors: bool) -> EigResult:
    N = pair.N
    factors = pair.factors
    if not factors:
        factors, _ = overlap_factors(pair.O, N, pair.precise)
    (_, L1i), (_, L2i) = factors
    if pair.precise:
        Linv = _blockdiag_mp(L1i, L2i)
        A = Linv * pair.h * Linv.H
        A_np = np.array(A.tolist(), dtype=complex)
    else:
        Linv = scipy.linalg.block_diag(L1i, L2i)
        A_np = Linv @ pair.h @ Linv.conj().T
    if not np.all(np.isfinite(A_np)):
        raise ConditioningError("reduced matrix overflowed double precision")
    w, y = _eig_standard(A_np, vectors)
    out = EigResult(values=w, condition=pair.condition)
    if vectors:
        if pair.precise:
            Y = mp.matrix(y.tolist())
            V = Linv.H * Y
            R = pair.h * V - pair.O * V * mp.diag(list(w))
            out.vectors = np.array(V.tolist(), dtype=complex)
            hn = float(mp.mnorm(pair.h, 1))
            on = float(mp.mnorm(pair.O, 1))
            be = []
            for j in range(len(w)):
                col = R[:, j]
                vn = float(mp.norm(V[:, j], 1))
                be.append(float(mp.norm(col, 1)) / ((hn + abs(w[j]) * on) * vn))
            out.backward_errors = np.array(be)
        else:
            V = Linv.conj().T @ y
            out.vectors = V
            out.backward_errors = backward_errors(pair.h, pair.O, w, V)
    return out


def backward_errors(h, O, w, V) -> np.ndarray:
    """Normwise backward error ||h v - E O v|| / ((||h|| + |E| ||O||) ||v||), 1-norms."""
    h = np.asarray(h)
    O = np.asarray(O)
    hn = np.linalg.norm(h, 1)
    on = np.linalg.norm(O, 1)
    R = h @ V - (O @ V) * w[None, :]
    return np.linalg.norm(R, 1, axis=0) / ((hn + np.abs(w) * on) * np.linalg.norm(V, 1, axis=0))


def generalized_eig(h, O=None, *, vectors: bool = False) -> EigResult:
    """Eigenpairs of h c = E O c.

    ``h`` may be a :class:`MatrixPair` (then ``O`` is ignored) or a square
    complex array together with a Hermitian positive definite ``O``.
    """
    if isinstance(h, MatrixPair):
        return _from_pair(h, vectors)
    h = np.asarray(h, dtype=complex)
    O = np.asarray(O, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1] or O.shape != h.shape:
        raise ValueError(f"need square matrices of equal shape, got {h.shape} and {O.shape}")
    try:
        L = np.linalg.cholesky(O)
    except np.linalg.LinAlgError as exc:
        raise ConditioningError(f"overlap matrix is not positive definite: {exc}") from exc
    Linv = scipy.linalg.solve_triangular(L, np.eye(len(O)), lower=True)
    cond = np.linalg.norm(O, 1) * np.linalg.norm(Linv.conj().T @ Linv, 1)
    w, y = _eig_standard(Linv @ h @ Linv.conj().T, vectors)
    out = EigResult(values=w, condition=float(cond))
    if vectors:
        V = Linv.conj().T @ y
        out.vectors = V
        out.backward_errors = backward_errors(h, O, w, V)
    return out


def in_bound_window(E) -> bool:
    E = complex(E)
    return abs(E.real) < 1 and abs(E.imag) <= BOUND_IM_RATIO * abs(E.real)


def _branch_order(values, sign):
    idx = [i for i, z in enumerate(values) if (z.real > 0 if sign > 0 else z.real < 0)]
    return sorted(idx, key=lambda i: (abs(values[i].real), -values[i].imag))


@dataclass
class SpectrumResult:
    """Classified spectrum of one assembled pencil.

    ``positive`` and ``negative`` hold eigenvalue indices ordered by |Re E|
    ascending (ties broken by Im E descending).  ``bound`` marks eigenvalues
    inside the bound-state window and ``spurious`` those rejected by the
    shooting check (all False when the check was not run).
    """

    values: np.ndarray
    positive: list
    negative: list
    bound: np.ndarray
    spurious: np.ndarray
    vectors: np.ndarray | None = None
    backward_errors: np.ndarray | None = None
    condition: float = float("nan")
    meta: dict = field(default_factory=dict)
    refined: dict = field(default_factory=dict)

    def branch(self, name: str) -> list:
        if name in ("positive", "+", "pos"):
            return self.positive
        if name in ("negative", "-", "neg"):
            return self.negative
        raise ValueError(f"unknown branch {name!r}")

    def levels(self, name: str = "positive", include_spurious: bool = True) -> list:
        """Bound-window eigenvalue indices of a branch, innermost first."""
        return [i for i in self.branch(name)
                if self.bound[i] and (include_spurious or not self.spurious[i])]

    @property
    def ground_index(self) -> int:
        good = self.levels("positive", include_spurious=False)
        if not good:
            raise NoBoundStateError("positive branch has no bound-state approximation at this order")
        return good[0]

    @property
    def ground(self) -> complex:
        return complex(self.values[self.ground_index])

    def energies(self, name: str = "positive", include_spurious: bool = True) -> list[complex]:
        return [complex(self.values[i]) for i in self.levels(name, include_spurious)]


def classify(eig, *, meta=None) -> SpectrumResult:
    """Split eigenvalues into branches by the sign of Re E."""
    if isinstance(eig, EigResult):
        values = np.asarray(eig.values, dtype=complex)
        vectors, be, cond = eig.vectors, eig.backward_errors, eig.condition
    else:
        values = np.asarray(eig, dtype=complex)
        vectors = be = None
        cond = float("nan")
    if not np.all(np.isfinite(values)):
        raise EigenConvergenceError("non-finite eigenvalues")
    bound = np.array([in_bound_window(z) for z in values], dtype=bool)
    return SpectrumResult(
        values=values,
        positive=_branch_order(values, +1),
        negative=_branch_order(values, -1),
        bound=bound,
        spurious=np.zeros(len(values), dtype=bool),
        vectors=vectors,
        backward_errors=be,
        condition=cond,
        meta=dict(meta or {}),
    )


def interlaces(smaller, larger, extra: int = 2, tol: float = 1e-10) -> bool:
    """Cauchy interlacing of real spectra of nested Hermitian pencils.

    With ``larger`` obtained by bordering ``smaller`` with ``extra`` rows and
    columns, sorted eigenvalues obey mu_i <= lam_i <= mu_(i+extra).
    """
    lam = np.sort(np.real(np.asarray(smaller)))
    mu = np.sort(np.real(np.asarray(larger)))
    if len(mu) != len(lam) + extra:
        raise ValueError("spectra sizes do not differ by the bordering size")
    scale = tol * max(1.0, float(np.max(np.abs(mu))))
    return bool(np.all(mu[: len(lam)] <= lam + scale) and np.all(lam <= mu[extra:] + scale))
