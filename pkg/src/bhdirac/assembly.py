"""Assembly of the 2N x 2N pencil (h, O) from a trial basis.

Block layout, with every operator applied symbolically to the ket before a
single exact inner product (weight r^2 dr):

    h11 = <g|1 + H1|g>              h12 = <g|(k-1)/r - d/dr|f>
    h21 = <f|(k+1)/r + d/dr|g>      h22 = <f|-1 + H1|f>
    O   = diag(<g|g>, <f|f>)

No integration by parts is used, so the boundary term that makes h
non-Hermitian when r^-3/4 heads are present emerges from the algebra and is
checked against its closed form by :func:`boundary_defect`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import mpmath as mp
import numpy as np

from bhdirac.basis import BasisSet, BasisSpec, _sqrt
from bhdirac.errors import ConditioningError
from bhdirac.moments import is_mp, sesquilinear
from bhdirac.radial import (
    BLACKHOLE,
    check_interaction,
    interaction_operator,
    lower_offdiagonal,
    upper_offdiagonal,
)

#: overlap condition cap for the double-precision path
DOUBLE_CONDITION_CAP = 1e13
#: the extended path must leave this many digits after reducing O, so that
#: rounding the reduced matrix to double is the only loss
RETAINED_DIGITS = 16


def _to_numpy(M) -> np.ndarray:
    if isinstance(M, np.ndarray):
        return M.astype(complex)
    return np.array(M.tolist(), dtype=complex)


@dataclass
class MatrixPair:
    """Assembled pencil.  ``h`` and ``O`` are mpmath matrices in the extended
    precision path and complex numpy arrays in the double-precision path."""

    h: object
    O: object
    N: int
    spec: BasisSpec
    interaction: str = BLACKHOLE
    dps: int | None = None
    condition: float = float("nan")
    factors: tuple = field(default=(), repr=False)

    @property
    def precise(self) -> bool:
        return self.dps is not None

    @property
    def h_numpy(self) -> np.ndarray:
        return _to_numpy(self.h)

    @property
    def O_numpy(self) -> np.ndarray:
        return _to_numpy(self.O)

    def blocks(self):
        """(h11, h12, h21, h22) as numpy arrays."""
        h = self.h_numpy
        N = self.N
        return h[:N, :N], h[:N, N:], h[N:, :N], h[N:, N:]

    def header(self) -> str:
        s = self.spec
        return (f"{self.N} {float(s.alpha)!r} {s.k} {s.family.value} {s.n} "
                f"{float(s.a)!r} {float(s.b)!r}")

    def dump(self, prefix) -> tuple[Path, Path]:
        """Write ``<prefix>.h.txt`` and ``<prefix>.O.txt`` in the plain-text matrix format."""
        prefix = Path(prefix)
        paths = (prefix.with_name(prefix.name + ".h.txt"), prefix.with_name(prefix.name + ".O.txt"))
        write_matrix(paths[0], self.h_numpy, self.header())
        write_matrix(paths[1], self.O_numpy, self.header())
        return paths


def write_matrix(path, M, header: str) -> None:
    """Header line ``N alpha k family n a b``, then one ``re im`` pair per entry, row-major."""
    M = np.asarray(M, dtype=complex)
    lines = [header]
    lines.extend(f"{z.real:.17e} {z.imag:.17e}" for z in M.ravel())
    Path(path).write_text("\n".join(lines) + "\n")


def read_matrix(path) -> tuple[dict, np.ndarray]:
    text = Path(path).read_text().splitlines()
    N, alpha, k, family, n, a, b = text[0].split()
    meta = dict(N=int(N), alpha=float(alpha), k=int(k), family=family, n=int(n),
                a=float(a), b=float(b))
    vals = np.array([complex(float(x), float(y)) for x, y in (ln.split() for ln in text[1:] if ln)])
    size = 2 * meta["N"]
    return meta, vals.reshape(size, size)


def _zeros(size, precise):
    return mp.matrix(size, size) if precise else np.zeros((size, size), dtype=complex)


def _cholesky_block(block, precise):
    """Lower Cholesky factor and its inverse; raises ConditioningError if O is not PD."""
    if precise:
        try:
            L = mp.cholesky(block)
        except (ValueError, ZeroDivisionError) as exc:
            raise ConditioningError(f"overlap matrix is not positive definite: {exc}") from exc
        return L, mp.inverse(L)
    try:
        L = np.linalg.cholesky(block)
    except np.linalg.LinAlgError as exc:
        raise ConditioningError(f"overlap matrix is not positive definite: {exc}") from exc
    return L, np.linalg.inv(L)


def _norm1(M, precise) -> float:
    if precise:
        return float(mp.mnorm(M, 1))
    return float(np.linalg.norm(M, 1))


def overlap_factors(O, N, precise):
    """Cholesky factors of the two diagonal blocks and the 1-norm condition number of O."""
    factors = []
    cond = 0.0
    for lo in (0, N):
        if precise:
            block = O[lo:lo + N, lo:lo + N]
        else:
            block = O[lo:lo + N, lo:lo + N]
        L, Linv = _cholesky_block(block, precise)
        inv = Linv.H * Linv if precise else Linv.conj().T @ Linv
        cond = max(cond, _norm1(block, precise) * _norm1(inv, precise))
        factors.append((L, Linv))
    return tuple(factors), cond


def max_condition(dps) -> float:
    if dps is None:
        return DOUBLE_CONDITION_CAP
    return 10.0 ** (dps - RETAINED_DIGITS)


def assemble(basis: BasisSet, spec: BasisSpec | None = None, interaction: str = BLACKHOLE,
             check_conditioning: bool = True) -> MatrixPair:
    """Build the pencil for ``basis``.  Extended precision is used when the basis
    carries mpmath coefficients (the working ``mp.dps`` is recorded)."""
    check_interaction(interaction)
    spec = spec or basis.spec
    alpha, k = spec.alpha, spec.k
    H1 = interaction_operator(interaction)
    G, F = basis.g, basis.f
    N = len(G)
    precise = is_mp(spec.alpha) or is_mp(spec.a)
    h = _zeros(2 * N, precise)
    O = _zeros(2 * N, precise)

    g_diag = [gj + H1(alpha, gj) for gj in G]
    f_diag = [H1(alpha, fj) - fj for fj in F]
    g_from_f = [upper_offdiagonal(k, fj) for fj in F]
    f_from_g = [lower_offdiagonal(k, gj) for gj in G]
    for l in range(N):
        for j in range(N):
            h[l, j] = sesquilinear(G[l], g_diag[j])
            h[l, N + j] = sesquilinear(G[l], g_from_f[j])
            h[N + l, j] = sesquilinear(F[l], f_from_g[j])
            h[N + l, N + j] = sesquilinear(F[l], f_diag[j])
            O[l, j] = sesquilinear(G[l], G[j])
            O[N + l, N + j] = sesquilinear(F[l], F[j])

    factors, cond = overlap_factors(O, N, precise)
    dps = mp.mp.dps if precise else None
    if check_conditioning and cond > max_condition(dps):
        raise ConditioningError(
            f"overlap condition number {cond:.3e} exceeds the cap {max_condition(dps):.1e} "
            f"for {spec.family.value} at n={spec.n}"
            + ("" if precise else "; use the extended-precision path")
        )
    return MatrixPair(h, O, N, spec, interaction, dps, cond, factors)


def hermiticity_defect(pair: MatrixPair):
    """h11 - h11^H and h22 - h22^H, plus the Frobenius norm of both together."""
    h11, _, _, h22 = pair.blocks()
    d11 = h11 - h11.conj().T
    d22 = h22 - h22.conj().T
    norm = float(np.sqrt(np.linalg.norm(d11) ** 2 + np.linalg.norm(d22) ** 2))
    return (d11, d22), norm


def boundary_defect(basis: BasisSet, interaction: str = BLACKHOLE):
    """Closed form of the diagonal-block defect from the integration-by-parts boundary term.

    (h - h^H)_lj = -i sqrt(2 alpha) lim_{r->0} r^(3/2) conj(u_l) u_j, which is
    nonzero only when both members start as r^-3/4.
    """
    alpha = basis.spec.alpha
    N = basis.size
    out = []
    for funcs in (basis.g, basis.f):
        D = np.zeros((N, N), dtype=complex)
        if check_interaction(interaction) == BLACKHOLE:
            gamma = complex(_sqrt(2 * alpha))
            for l, ul in enumerate(funcs):
                for j, uj in enumerate(funcs):
                    lim = 0j
                    for q1, _, c1 in ul.terms:
                        for q2, _, c2 in uj.terms:
                            if q1 + q2 == -6:
                                lim += complex(c1).conjugate() * complex(c2)
                    D[l, j] = -1j * gamma * lim
        out.append(D)
    return tuple(out)

