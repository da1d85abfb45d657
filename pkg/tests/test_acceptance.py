"""Acceptance suite: one recorded PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -v``; the lines are printed in the
"acceptance criteria" section of the terminal summary.
"""

import math
import random
import sys

import mpmath as mp
import numpy as np
import pytest

from bhdirac.assembly import assemble, boundary_defect, hermiticity_defect
from bhdirac.basis import BasisSpec, build_basis
from bhdirac.cli import main
from bhdirac.eigen import generalized_eig, interlaces
from bhdirac.minimax import spectrum
from bhdirac.moments import moment, quadrature_oracle
from bhdirac.shooting import ShootingConfig, find_energy

ALPHA = 0.1
SHOOT_REF = 0.9946882 - 2.7870824e-5j
EXCITED_REF = {
    -1: {"positive": [0.994686 - 3.06596e-5j, 0.998698 - 3.83240e-6j],
         "negative": [-0.998730 - 1.53600e-8j, -0.999437 - 4.74152e-7j]},
    1: {"positive": [0.998731 - 2.00712e-7j, 0.999438 - 5.22900e-8j],
        "negative": [-0.985823 - 1.55033e-2j, -0.994978 - 1.75747e-3j]},
}


@pytest.fixture(scope="module")
def shoot_ground():
    return find_energy(ALPHA, -1, 0.9946883 - 2.7856e-5j)


@pytest.fixture(scope="module")
def phi2_ground(saddle_m1):
    return spectrum(ALPHA, -1, "Phi2", 16, saddle=saddle_m1, vectors=True)


def test_c01_saddle(capsys, criterion):
    code = main(["saddle", "--alpha", "0.1", "--k", "-1"])
    line = capsys.readouterr().out.splitlines()[1].split(",")
    a, b, sig = float(line[4]), float(line[5]), line[12]
    ok = (code == 0 and abs(a / 8.9186905e-2 - 1) <= 1e-4 and abs(b / 7.8238289e-2 - 1) <= 1e-4
          and sig == "-+")
    criterion("1 saddle reproduction", ok, f"a={a:.8g} b={b:.8g} signature {sig}")
    assert ok


def test_c02_ground_state_values(saddle_m1, phi2_ground, shoot_ground, criterion):
    checks = {
        "Phi1": (spectrum(ALPHA, -1, "Phi1", 15, saddle=saddle_m1).ground, 0.9947208 - 2.0498160e-5j),
        "Phi2 n=16": (phi2_ground.ground, 0.9946883 - 2.7855588e-5j),
        "Phi3 18 functions": (spectrum(ALPHA, -1, "Phi3", 14, saddle=saddle_m1).ground,
                              0.9946858 - 3.0659648e-5j),
    }
    details, ok = [], True
    for name, (got, ref) in checks.items():
        good = abs(got.real - ref.real) <= 2e-7 and abs(got.imag - ref.imag) <= 5e-8
        ok &= good
        details.append(f"{name} {got.real:.9f}{got.imag:+.7e}i")
    E = shoot_ground.energy
    good = abs(E.real - SHOOT_REF.real) <= 1e-7 and abs(E.imag - SHOOT_REF.imag) <= 1e-8
    ok &= good
    details.append(f"shooting {E.real:.9f}{E.imag:+.7e}i")
    criterion("2 ground-state golden values", ok, "; ".join(details))
    assert ok


def test_c03_minimax_vs_shooting(phi2_ground, shoot_ground, criterion):
    d = phi2_ground.ground - shoot_ground.energy
    ok = abs(d.real) <= 5e-6 and abs(d.imag) <= 3e-6
    criterion("3 minimax vs shooting agreement", ok, f"dRe={d.real:.2e} dIm={d.imag:.2e}")
    assert ok


def test_c04_excited_states(phi3_runs, criterion):
    ok, worst_re, worst_ratio = True, 0.0, 1.0
    for k, branches in EXCITED_REF.items():
        sp = phi3_runs[k].spectrum
        for name, refs in branches.items():
            got = sp.energies(name)[: len(refs)]
            for E, ref in zip(got, refs):
                worst_re = max(worst_re, abs(E.real - ref.real))
                ratio = max(E.imag / ref.imag, ref.imag / E.imag) if E.imag * ref.imag > 0 else math.inf
                worst_ratio = max(worst_ratio, ratio)
    ok &= worst_re <= 1e-5 and worst_ratio <= 2
    sp = phi3_runs[1].spectrum
    first_neg = sp.levels("negative")[0]
    refined = sp.refined[first_neg]
    flagged = bool(sp.spurious[first_neg])
    # the shot level either fails or is claimed by a different eigenvalue
    owner_elsewhere = refined is None or abs(refined.energy - sp.values[first_neg]) > 1e-3
    others = [i for name in ("positive", "negative") for k in (-1, 1)
              for i in phi3_runs[k].spectrum.levels(name)[:2]
              if not (k == 1 and i == first_neg) and phi3_runs[k].spectrum.spurious[i]]
    ok &= flagged and owner_elsewhere and not others
    criterion("4 excited-state table and spurious flag", ok,
              f"max dRe={worst_re:.1e} max Im ratio={worst_ratio:.3f} spurious flag={flagged}")
    assert ok


def test_c05_sweep(criterion):
    diffs = {}
    for alpha in (0.05, 0.10, 0.15, 0.20, 0.35):
        E = spectrum(alpha, -1, "Phi2", 16).ground
        # the sweep seeds shooting with the minimax level at the same coupling
        diffs[alpha] = abs(E.real - find_energy(alpha, -1, E).energy.real)
    ok = all(diffs[a] <= 1e-3 for a in (0.05, 0.10, 0.15, 0.20)) and diffs[0.35] > diffs[0.15]
    criterion("5 coupling sweep agreement and loss of accuracy", ok,
              " ".join(f"{a}:{d:.1e}" for a, d in diffs.items()))
    assert ok


def test_c06_structural_non_hermiticity(criterion):
    with mp.workdps(40):
        spec = BasisSpec("Phi2", 10, mp.mpf(0.0891869), mp.mpf(0.0782383), mp.mpf(ALPHA), -1)
        free = assemble(build_basis(spec, quarter_powers=[0, 4, 8, 12]), spec)
        basis = build_basis(spec)
        pair = assemble(basis, spec)
    h = free.h_numpy
    herm = np.linalg.norm(h - h.conj().T) / np.linalg.norm(h)
    (d11, d22), _ = hermiticity_defect(pair)
    f11, f22 = boundary_defect(basis)
    rank_ok, match = True, 0.0
    for d, f in ((d11, f11), (d22, f22)):
        s = np.linalg.svd(d, compute_uv=False)
        rank_ok &= s[1] <= 1e-10 * s[0]
        match = max(match, np.max(np.abs(d - f)) / np.max(np.abs(f)))
    h11, _, _, _ = pair.blocks()
    coul = max(abs(h11[j, j] - 1 + ALPHA * 0.0782383 / (q / 4 + 1))
               for j, q in enumerate(spec.quarter_powers()) if 1 <= j <= 10)
    ok = herm <= 1e-11 and rank_ok and match <= 1e-10 and coul <= 1e-12
    criterion("6 structural non-Hermiticity", ok,
              f"head-free {herm:.1e}, boundary match {match:.1e}, Coulomb diagonal {coul:.1e}")
    assert ok


def test_c07_head_expectation(criterion):
    worst_oracle, worst_im, worst_re = 0.0, 0.0, 0.0
    gamma = mp.sqrt(2 * mp.mpf(ALPHA))
    for decay in (0.0782382901, 0.089186906, 0.3):
        with mp.workdps(30):
            spec = BasisSpec("Phi1", 1, mp.mpf(decay), mp.mpf(decay), mp.mpf(ALPHA), -1)
            pair = assemble(build_basis(spec), spec)
            value = complex(pair.h[0, 0]) - 1
            ref, _ = quadrature_oracle(
                lambda r: (-ALPHA / r - 1j * decay * gamma / mp.sqrt(r)) * mp.sqrt(r) * mp.exp(-2 * decay * r),
                scale=1 / decay, tol=1e-16, dps=30)
            norm = moment(0.5, 2 * decay)
        ref = complex(ref) / norm
        worst_oracle = max(worst_oracle, abs(value - ref) / abs(ref))
        worst_im = max(worst_im, abs(value.imag / (-4 * math.sqrt(ALPHA / math.pi) * decay ** 1.5) - 1))
        worst_re = max(worst_re, abs(value.real / (-4 * ALPHA * decay) - 1))
    ok = worst_oracle <= 1e-10 and worst_im <= 1e-10 and worst_re <= 1e-10
    criterion("7 head expectation values", ok,
              f"oracle {worst_oracle:.1e}, Im {worst_im:.1e}, Re coefficient -4*alpha*decay {worst_re:.1e}")
    assert ok


def test_c08_coulomb_mode(saddle_m1, criterion):
    exact = math.sqrt(1 - ALPHA ** 2)
    shot = find_energy(ALPHA, -1, 0.995, ShootingConfig(interaction="coulomb"))
    runs = {n: spectrum(ALPHA, -1, "Phi1", n, saddle=saddle_m1, interaction="coulomb")
            for n in range(10, 21)}
    imag = max(np.max(np.abs(r.spectrum.values.imag)) for r in runs.values())
    inter = all(interlaces(runs[n].spectrum.values, runs[n + 1].spectrum.values)
                for n in range(10, 20))
    mm = abs(runs[20].ground - exact)
    ok = imag <= 1e-11 and abs(shot.energy - exact) <= 1e-8 and mm <= 1e-6 and inter
    criterion("8 Coulomb validation mode", ok,
              f"max|Im| {imag:.1e}, shooting {abs(shot.energy - exact):.1e}, "
              f"minimax Phi1 n=20 {mm:.1e}, interlacing {inter}")
    assert ok


def test_c09_charge_conjugation(phi3_runs, criterion):
    pairs = []
    for k in (-1, 1):
        pos = phi3_runs[k].spectrum.energies("positive", include_spurious=False)[:2]
        neg = phi3_runs[-k].spectrum.energies("negative", include_spurious=False)[:2]
        # only the two leading levels of each branch are paired
        leading = phi3_runs[-k].spectrum.energies("negative")[:2]
        neg = [E for E in neg if E in leading]
        pairs.extend((k, j, abs(p.real + q.real)) for j, (p, q) in enumerate(zip(pos, neg)))
    worst = max(d for *_, d in pairs)
    ok = len(pairs) >= 3 and worst <= 5e-4
    criterion("9 charge conjugation pairing", ok, f"{len(pairs)} pairs, worst {worst:.1e}")
    assert ok


def test_c10_plumbing(phi2_ground, criterion):
    rng = random.Random(5)
    worst_moment = 0.0
    for _ in range(12):
        q = rng.randrange(-3, 60)
        c = rng.choice([0.05, 0.16, 0.4, 1.0, 2.5])
        with mp.workdps(30):
            p = mp.mpf(q) / 4
            val, _ = quadrature_oracle(lambda r: r ** p * mp.exp(-c * r), scale=max(1, q / 4 + 1) / c,
                                       tol=1e-15, dps=30)
        worst_moment = max(worst_moment, abs(float(val) / moment(q / 4, c) - 1))
    gen = np.random.default_rng(9)
    worst_eig = 0.0
    for n in (2, 3) * 10:
        h = gen.normal(size=(n, n)) + 1j * gen.normal(size=(n, n))
        X = gen.normal(size=(n, n)) + 1j * gen.normal(size=(n, n))
        O = X @ X.conj().T + np.eye(n)
        got = np.sort_complex(generalized_eig(h, O).values)
        with mp.workdps(40):
            H, M = mp.matrix(h.tolist()), mp.matrix(O.tolist())
            # det(h - x O) at n + 1 nodes fixes the characteristic polynomial
            V = mp.matrix([[mp.mpf(x) ** d for d in range(n + 1)] for x in range(n + 1)])
            coef = mp.lu_solve(V, mp.matrix([mp.det(H - x * M) for x in range(n + 1)]))
            roots = mp.polyroots([coef[d] for d in range(n, -1, -1)], maxsteps=200, extraprec=80)
        ref = np.sort_complex(np.array([complex(r) for r in roots]))
        worst_eig = max(worst_eig, np.max(np.abs(got - ref) / np.maximum(1, np.abs(ref))))
    be = float(np.max(phi2_ground.spectrum.backward_errors))
    ok = worst_moment <= 1e-12 and worst_eig <= 1e-10 and be <= 1e-8
    criterion("10 numerical plumbing oracles", ok,
              f"moments {worst_moment:.1e}, pencils {worst_eig:.1e}, backward error {be:.1e}")
    assert ok


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
