"""Command-line front end.

Every subcommand writes rows with the stable leading columns

    alpha,k,family,n,a,b,branch,index,re_E,im_E,status

followed by command-specific diagnostic columns.  Numbers carry 9
significant digits.  The exit code is 0 iff every row has status ``ok``.
Sweeps and convergence tables fan out over ``BHDIRAC_WORKERS`` processes;
rows are always emitted in input order.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from bhdirac.basis import Family
from bhdirac.eigen import interlaces
from bhdirac.errors import BHDiracError
from bhdirac.minimax import find_saddle, spectrum
from bhdirac.radial import BLACKHOLE, INTERACTIONS
from bhdirac.shooting import ShootingConfig, find_energy

COLUMNS = ["alpha", "k", "family", "n", "a", "b", "branch", "index", "re_E", "im_E", "status"]
EXTRA = {
    "saddle": ["gradient_norm", "hessian_signature"],
    "ground": ["condition"],
    "shoot": ["err_E", "iterations"],
    "sweep": ["err_E", "iterations"],
    "converge": ["spread", "interlaced", "spurious"],
}
WORKERS_ENV = "BHDIRAC_WORKERS"

DEFAULTS = dict(alpha=0.1, k=-1, family="Phi2", n=16, n_min=2, n_max=10, alpha_min=0.05,
                alpha_max=0.3, step=0.05, interaction=BLACKHOLE, format="csv", out=None,
                with_shooting=False, seed_re=None, seed_im=None, levels=4)
TYPES = dict(alpha=float, k=int, family=str, n=int, n_min=int, n_max=int, alpha_min=float,
             alpha_max=float, step=float, interaction=str, format=str, out=str,
             with_shooting=lambda v: str(v).strip().lower() in {"1", "true", "yes", "on"},
             seed_re=float, seed_im=float, levels=int)


class UsageError(Exception):
    pass


def fmt(x) -> str:
    if x is None or x == "":
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.9g}"
    return str(x)


def row(cfg, *, family=None, n=None, a=None, b=None, branch="", index=0, E=None,
        status="ok", alpha=None, **extra) -> dict:
    E = complex(E) if E is not None else None
    out = dict(
        alpha=cfg["alpha"] if alpha is None else alpha, k=cfg["k"], family=family or "",
        n="" if n is None else n, a=a, b=b, branch=branch, index=index,
        re_E=None if E is None else E.real, im_E=None if E is None else E.imag, status=status,
    )
    out.update(extra)
    return out


def error_status(exc) -> str:
    return f"error:{type(exc).__name__}"


# --- subcommands ---------------------------------------------------------------


def cmd_saddle(cfg) -> list[dict]:
    s = find_saddle(cfg["alpha"], cfg["k"])
    return [row(cfg, a=s.a, b=s.b, branch="saddle", E=s.energy,
                gradient_norm=s.gradient_norm, hessian_signature=s.signature)]


def cmd_ground(cfg) -> list[dict]:
    run = spectrum(cfg["alpha"], cfg["k"], cfg["family"], cfg["n"],
                   interaction=cfg["interaction"], check_spurious=cfg["with_shooting"])
    sp = run.spectrum
    base = dict(family=run.spec.family.value, n=cfg["n"], a=run.saddle.a, b=run.saddle.b)
    rows = [row(cfg, **base, branch="positive", index=0, E=sp.ground, condition=sp.condition)]
    ref = sp.refined.get(sp.ground_index)
    if ref is not None:
        rows.append(row(cfg, **base, branch="shooting", index=0, E=ref.energy,
                        condition=sp.condition))
    return rows


def _seed(cfg) -> complex:
    if cfg["seed_re"] is None:
        s = find_saddle(cfg["alpha"], cfg["k"])
        return complex(s.energy, cfg["seed_im"] or 0.0)
    return complex(cfg["seed_re"], cfg["seed_im"] or 0.0)


def cmd_shoot(cfg) -> list[dict]:
    seed = _seed(cfg)
    if abs(seed) >= 1:
        raise UsageError(f"seed {seed} has |E| >= 1; bound states lie inside the unit disc")
    res = find_energy(cfg["alpha"], cfg["k"], seed, ShootingConfig(interaction=cfg["interaction"]))
    return [row(cfg, branch="shooting", E=res.energy, err_E=res.error_estimate,
                iterations=res.iterations)]


def alpha_grid(lo, hi, step) -> list[float]:
    if step <= 0 or hi < lo:
        raise UsageError("need alpha_min <= alpha_max and step > 0")
    count = int(round((hi - lo) / step)) + 1
    grid = [round(lo + i * step, 12) for i in range(count)]
    return [a for a in grid if a <= hi + 1e-12]


def _ground_job(args):
    alpha, k, family, n, interaction = args
    try:
        run = spectrum(alpha, k, family, n, interaction=interaction)
        return ("ok", run.saddle.a, run.saddle.b, run.spectrum.ground)
    except BHDiracError as exc:
        return (error_status(exc), None, None, None)


def _pool_map(func, jobs):
    workers = int(os.environ.get(WORKERS_ENV, "1") or 1)
    if workers <= 1 or len(jobs) <= 1:
        return [func(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, jobs))


def cmd_sweep(cfg) -> list[dict]:
    grid = alpha_grid(cfg["alpha_min"], cfg["alpha_max"], cfg["step"])
    family = Family.parse(cfg["family"]).value
    jobs = [(a, cfg["k"], family, cfg["n"], cfg["interaction"]) for a in grid]
    results = _pool_map(_ground_job, jobs)
    rows = []
    previous = None
    shoot_cfg = ShootingConfig(interaction=cfg["interaction"])
    for alpha, (status, a, b, E) in zip(grid, results):
        base = dict(alpha=alpha, family=family, n=cfg["n"], a=a, b=b)
        rows.append(row(cfg, **base, branch="positive", E=E, status=status))
        if not cfg["with_shooting"]:
            continue
        seeds = [s for s in (E, previous) if s is not None]
        res, status = None, "error:NoSeed"
        for seed in seeds:
            try:
                res = find_energy(alpha, cfg["k"], seed, shoot_cfg)
                status = "ok"
                break
            except BHDiracError as exc:
                status = error_status(exc)
        if res is not None:
            previous = res.energy
        rows.append(row(cfg, **base, branch="shooting", E=None if res is None else res.energy,
                        status=status, err_E=None if res is None else res.error_estimate,
                        iterations=None if res is None else res.iterations))
    return rows


def _spectrum_job(args):
    alpha, k, family, n, interaction, levels, check = args
    try:
        run = spectrum(alpha, k, family, n, interaction=interaction, check_spurious=check,
                       levels=levels)
        sp = run.spectrum
        lv = {name: [(complex(sp.values[i]), bool(sp.spurious[i]) if check else None)
                     for i in sp.levels(name)] for name in ("positive", "negative")}
        return ("ok", run.saddle.a, run.saddle.b, sp.values, lv)
    except BHDiracError as exc:
        return (error_status(exc), None, None, None, None)


def cmd_converge(cfg) -> list[dict]:
    if cfg["n_min"] < 0 or cfg["n_max"] < cfg["n_min"]:
        raise UsageError("need 0 <= n_min <= n_max")
    family = Family.parse(cfg["family"]).value
    orders = list(range(cfg["n_min"], cfg["n_max"] + 1))
    jobs = [(cfg["alpha"], cfg["k"], family, n, cfg["interaction"], cfg["levels"],
             cfg["with_shooting"]) for n in orders]
    results = _pool_map(_spectrum_job, jobs)
    rows = []
    prev = None
    for n, (status, a, b, values, levels) in zip(orders, results):
        if status != "ok":
            rows.append(row(cfg, family=family, n=n, status=status))
            prev = None
            continue
        hermitian = cfg["interaction"] != BLACKHOLE
        inter = None
        if hermitian and prev is not None and len(values) == len(prev[0]) + 2:
            inter = interlaces(prev[0], values)
        for name in ("positive", "negative"):
            for j, (E, flag) in enumerate(levels[name][: cfg["levels"]]):
                spread = None
                if prev is not None and j < len(prev[1][name]):
                    spread = abs(E - prev[1][name][j][0])
                rows.append(row(cfg, family=family, n=n, a=a, b=b, branch=name, index=j, E=E,
                                spread=spread, interlaced=inter, spurious=flag))
        prev = (values, levels)
    return rows


COMMANDS = {"saddle": cmd_saddle, "ground": cmd_ground, "shoot": cmd_shoot,
            "sweep": cmd_sweep, "converge": cmd_converge}


# --- plumbing ------------------------------------------------------------------


def read_config(path) -> dict:
    """Plain ``key = value`` lines; ``#`` starts a comment; dashes and underscores are equivalent."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.lstrip("-").replace("-", "_")
        if key not in TYPES:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        out[key] = TYPES[key](value)
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bhdirac", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--alpha", type=float)
        p.add_argument("--k", type=int)
        p.add_argument("--family")
        p.add_argument("--n", type=int)
        p.add_argument("--n-min", type=int)
        p.add_argument("--n-max", type=int)
        p.add_argument("--alpha-min", type=float)
        p.add_argument("--alpha-max", type=float)
        p.add_argument("--step", type=float)
        p.add_argument("--interaction", choices=INTERACTIONS)
        p.add_argument("--format", choices=("csv", "json"))
        p.add_argument("--out")
        p.add_argument("--config")
        p.add_argument("--with-shooting", action="store_const", const=True)
        p.add_argument("--seed-re", type=float)
        p.add_argument("--seed-im", type=float)
        p.add_argument("--levels", type=int)
    return parser


def resolve(args) -> dict:
    cfg = dict(DEFAULTS)
    if args.config:
        cfg.update(read_config(args.config))
    for key in DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    if cfg["interaction"] not in INTERACTIONS:
        raise UsageError(f"interaction must be one of {INTERACTIONS}")
    if cfg["format"] not in ("csv", "json"):
        raise UsageError("format must be csv or json")
    if cfg["n"] < 0:
        raise UsageError("order n must be nonnegative")
    cfg["family"] = Family.parse(cfg["family"]).value
    return cfg


def render(rows, columns, fmt_name) -> str:
    if fmt_name == "json":
        data = [{c: _json_value(r.get(c)) for c in columns} for r in rows]
        return json.dumps(data, indent=1) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for r in rows:
        writer.writerow([fmt(r.get(c)) for c in columns])
    return buf.getvalue()


def _json_value(x):
    if x is None or x == "":
        return None
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return float(fmt(x))
    return x


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve(args)
        rows = COMMANDS[args.command](cfg)
    except (BHDiracError, UsageError, ValueError) as exc:
        print(f"bhdirac {args.command}: {exc}", file=sys.stderr)
        return 2 if isinstance(exc, UsageError) else 1
    text = render(rows, COLUMNS + EXTRA[args.command], cfg["format"])
    if cfg["out"]:
        Path(cfg["out"]).write_text(text)
    else:
        sys.stdout.write(text)
    bad = [r for r in rows if r["status"] != "ok"]
    for r in bad:
        print(f"bhdirac {args.command}: alpha={fmt(r['alpha'])} n={fmt(r['n'])} "
              f"branch={r['branch']}: {r['status']}", file=sys.stderr)
    return 0 if not bad else 1


if __name__ == "__main__":
    sys.exit(main())
