"""Command-line front end: ``trace-census <subcommand> --field spec.txt ...``.

Every failure is reported as ``error [stage]: message`` with exit status 1.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from . import asymptotics as asy
from .counting import CountSeries, count_exact, count_naive, error_series
from .field import Field, load_field
from .lseries import (
    enumerate_principal,
    l_value,
    principal_ideals_bruteforce,
)
from .units import (
    SignCharacter,
    find_units,
    good_characters,
    good_mu_for,
    totally_positive_gens,
)

UNIT_MAX_BOUND = 40.0


class StageError(Exception):
    def __init__(self, stage: str, message: str):
        super().__init__(message)
        self.stage = stage


class _Stage:
    """Context manager that relabels any exception with the running stage."""

    def __init__(self, name: str):
        self.name = name

    def __enter__(self):
        return self

    def __exit__(self, etype, exc, tb):
        if exc is None or isinstance(exc, StageError):
            return False
        if isinstance(exc, (KeyboardInterrupt, SystemExit)):
            return False
        raise StageError(self.name, str(exc) or etype.__name__) from exc


stage = _Stage


# -- configuration ----------------------------------------------------------------

@dataclass
class RunConfig:
    """Pipeline parameters; loadable from a ``key = value`` file."""

    field: str = ""
    xmax: int = 10_000
    k: int = 3
    cutoff: int = 100_000
    outdir: str = "out"
    grid: str = "log20"
    xmin: int = 100
    fit_xmin: int = 1000
    degree: int = 2
    threads: int = 0
    seed: int = 0

    @classmethod
    def from_file(cls, path: str | os.PathLike) -> "RunConfig":
        p = Path(path)
        if not p.is_file():
            raise FileNotFoundError(f"file not found: {p}")
        types = {f.name: f.type for f in fields(cls)}
        cfg = cls()
        for lineno, raw in enumerate(p.read_text().splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{p}:{lineno}: expected key = value")
            key, value = (s.strip() for s in line.split("=", 1))
            if key not in types:
                raise ValueError(f"{p}:{lineno}: unknown key {key!r}")
            if types[key] in ("int", int):
                value = int(float(value))
            setattr(cfg, key, value)
        # resolve relative paths against the config file location
        for key in ("field", "outdir"):
            val = getattr(cfg, key)
            if val and not Path(val).is_absolute():
                setattr(cfg, key, str((p.parent / val).resolve()))
        return cfg


# -- helpers ----------------------------------------------------------------------

def _threads(args) -> int:
    t = getattr(args, "threads", 0) or 0
    return t if t > 0 else (os.cpu_count() or 1)


def _field(args) -> Field:
    with stage("field"):
        if not args.field:
            raise ValueError("no field spec given (use --field)")
        return load_field(args.field)


def _units(fld: Field):
    with stage("units"):
        us = find_units(fld, 2.0, UNIT_MAX_BOUND)
        return us, totally_positive_gens(us)


def _series(fld, args, xmax) -> CountSeries:
    path = getattr(args, "series", None)
    with stage("series"):
        if path:
            s = CountSeries.from_csv(path, fld.kappa)
            if s.X < xmax:
                raise ValueError(f"series file covers a <= {s.X}, need {xmax}")
            return s
        return error_series(fld, int(xmax), threads=_threads(args))


def _grid(spec: str, xmin: float, xmax: float) -> list[int]:
    if spec.startswith("log"):
        per = int(spec[3:] or 20)
        return asy.log_grid(xmin, xmax, per)
    return sorted({int(float(t)) for t in spec.split(",") if t.strip()})


def _fmt_elem(fld, z) -> str:
    c = fld.to_power(z)
    terms = []
    for k, x in enumerate(c):
        if x == 0:
            continue
        mon = ("", "a", "a^2")[k]
        coef = str(x) if (x not in (1, -1) or not mon) else ("-" if x == -1 else "")
        terms.append(f"{coef}{'*' if coef and coef != '-' and mon else ''}{mon}")
    return " + ".join(terms).replace("+ -", "- ") or "0"


def _lvalues(fld, us, B, chars):
    with stage("lvalue"):
        if not chars:
            return {}
        stream = enumerate_principal(fld, us, 2 * 35 * B)
        return {v: l_value(fld, us, v, B, stream=stream) for v in chars}


# -- subcommands ------------------------------------------------------------------

def cmd_info(args) -> int:
    fld = _field(args)
    p = fld.poly
    print(f"polynomial: {p}")
    print(f"D = {fld.discriminant}, κ = {fld.kappa}")
    print(f"polynomial discriminant: {fld.poly_disc}")
    roots = ", ".join(f"{x:.12f}" for x in fld.float_roots)
    print(f"embeddings of a: {roots}")
    tb = fld.trace_basis
    for j, b in enumerate(tb.betas, 1):
        emb = ", ".join(f"{x:.10f}" for x in fld.embed_float(b))
        print(f"beta_{j} = {_fmt_elem(fld, b)}  (Tr = {b.trace()}; embeddings {emb})")
    return 0


def cmd_units(args) -> int:
    fld = _field(args)
    us, tp = _units(fld)
    for j, e in enumerate(us.eps, 1):
        sig = "".join("-" if s else "+" for s in us.signatures[j])
        print(f"eps_{j} = {_fmt_elem(fld, e)}  N = {e.norm()}  signs {sig}")
    print(f"R = {us.regulator:.15g}")
    print(f"[U+ index] = {tp.index}; totally positive generators:")
    for l, (u, ex) in enumerate(zip(tp.u, tp.exponents), 1):
        print(f"  u_{l} = {_fmt_elem(fld, u)}  (eps exponents {ex[0]}, {ex[1]})")
    return 0


def cmd_good_pairs(args) -> int:
    fld = _field(args)
    us, tp = _units(fld)
    with stage("good-pairs"):
        good = good_characters(us)
        nontrivial = [v for v in good if not v.is_trivial]
        print("good sign characters: " + ", ".join(str(v) for v in good))
        print("good nontrivial characters: " + (", ".join(str(v) for v in nontrivial) or "none"))
        if args.radius > 0:
            for v in good:
                mus = good_mu_for(v, tp, us, args.radius)
                print(f"  v = {v}: {len(mus)} good mu with |mu| <= {args.radius:g}")
    return 0


def cmd_count(args) -> int:
    fld = _field(args)
    with stage("count"):
        n = count_naive(fld, args.trace) if args.naive else count_exact(fld, args.trace)
        print(f"N_{args.trace} = {n}")
    return 0


def cmd_series(args) -> int:
    fld = _field(args)
    s = _series(fld, args, args.xmax)
    with stage("series"):
        s.to_csv(args.out)
        print(f"wrote {args.out} (a = 1..{s.X})")
    return 0


def cmd_lvalue(args) -> int:
    fld = _field(args)
    us, _ = _units(fld)
    with stage("lvalue"):
        v = SignCharacter.parse(args.char)
        lv = l_value(fld, us, v, args.cutoff)
        print(f"L(1,v) = {lv.value:.12f} ± {lv.error_estimate:.3g} (B={lv.B_used})")
    return 0


def cmd_coeff(args) -> int:
    fld = _field(args)
    us, _ = _units(fld)
    chars = [v for v in good_characters(us) if not v.is_trivial]
    lv = _lvalues(fld, us, args.cutoff, chars)
    with stage("coeff"):
        c = asy.main_coefficient(fld, us, args.k, lv)
        for v, x in c.lvalues.items():
            print(f"L(1,{v}) = {x.value:.12f} ± {x.error_estimate:.3g}")
        print(f"R = {c.R:.15g}")
        print(f"C (k={c.k}) = {c.value:.12g} ± {c.error:.3g}")
    return 0


def cmd_fit(args) -> int:
    fld = _field(args)
    s = _series(fld, args, args.xmax)
    with stage("fit"):
        table = asy.weighted_sum_table(s, _grid(args.grid, args.xmin, args.xmax), args.k)
        res = asy.fit_coefficients(table, args.degree)
        for p, c in zip(res.powers, res.coefficients):
            print(f"log^{p} X: {c:.10g}")
        print(f"residual = {res.residual:.6g}, condition = {res.condition:.3g}"
              + (" (ill-conditioned)" if res.ill_conditioned else ""))
    return 0


def cmd_report(args) -> int:
    fld = _field(args)
    us, _ = _units(fld)
    chars = [v for v in good_characters(us) if not v.is_trivial]
    lv = _lvalues(fld, us, args.cutoff, chars)
    with stage("coeff"):
        coeff = asy.main_coefficient(fld, us, args.k, lv)
    s = _series(fld, args, args.xmax)
    with stage("report"):
        sub = None
        if args.subleading:
            sub = [float(t) for t in args.subleading.split(",")]
            if len(sub) != 2:
                raise ValueError("--subleading takes two comma-separated coefficients")
        text = asy.compare_report(s, args.k, coeff, _grid(args.grid, args.xmin, args.xmax), sub)
        if args.out:
            Path(args.out).write_text(text)
            print(f"wrote {args.out}")
        else:
            sys.stdout.write(text)
    return 0


def cmd_pipeline(args) -> int:
    with stage("config"):
        cfg = RunConfig.from_file(args.config) if args.config else RunConfig()
        for key in ("field", "xmax", "k", "cutoff", "outdir", "threads"):
            val = getattr(args, key, None)
            if val not in (None, "", 0):
                setattr(cfg, key, val)
        args.field = cfg.field
        args.threads = cfg.threads
        out = Path(cfg.outdir)
        out.mkdir(parents=True, exist_ok=True)
    fld = _field(args)
    us, tp = _units(fld)
    with stage("good-pairs"):
        chars = [v for v in good_characters(us) if not v.is_trivial]
    lv = _lvalues(fld, us, cfg.cutoff, chars)
    with stage("coeff"):
        coeff = asy.main_coefficient(fld, us, cfg.k, lv)
    args.series = None
    s = _series(fld, args, cfg.xmax)
    with stage("series"):
        s.to_csv(out / "series.csv")
    with stage("report"):
        grid = _grid(cfg.grid, min(cfg.xmin, cfg.xmax), cfg.xmax)
        (out / "report.csv").write_text(asy.compare_report(s, cfg.k, coeff, grid))
        fit_grid = [x for x in grid if x >= cfg.fit_xmin]
        fit = None
        if len(fit_grid) >= cfg.degree + 2 and fit_grid[-1] >= 10 * fit_grid[0]:
            fit = asy.fit_coefficients(asy.weighted_sum_table(s, fit_grid, cfg.k), cfg.degree)
    with stage("summary"):
        lines = [
            f"polynomial: {fld.poly}",
            f"D = {fld.discriminant}, κ = {fld.kappa}",
            f"R = {us.regulator:.15g}",
            "good nontrivial characters: " + (", ".join(str(v) for v in chars) or "none"),
        ]
        for v, x in coeff.lvalues.items():
            lines.append(f"L(1,{v}) = {x.value:.12f} ± {x.error_estimate:.3g} (B={x.B_used})")
        if not chars:
            lines[-1] += "; predicted leading coefficient 0"
        lines.append(f"predicted leading coefficient (k={cfg.k}): {coeff.value:.12g}")
        X = cfg.xmax
        S = asy.weighted_sum(s, X, cfg.k) if cfg.k >= 3 else float("nan")
        lines.append(f"S({X})/log^{cfg.k + 1} X = {S / math.log(X) ** (cfg.k + 1):.12g}")
        if fit is not None:
            lines.append(
                f"fitted leading coefficient (degree {cfg.degree}, X in [{fit_grid[0]}, {fit_grid[-1]}]): "
                f"{fit.leading:.12g}"
            )
            if coeff.value:
                lines.append(f"leading coefficient comparison: fitted/predicted = {fit.leading / coeff.value:.6f}")
            else:
                lines.append("leading coefficient comparison: predicted is 0")
        text = "\n".join(lines) + "\n"
        (out / "summary.txt").write_text(text)
        sys.stdout.write(text)
    return 0


def cmd_verify(args) -> int:
    fld = _field(args)
    rng = np.random.default_rng(args.seed)
    with stage("verify"):
        bad = [a for a in range(1, args.amax + 1) if count_exact(fld, a) != count_naive(fld, a)]
        print(f"count_exact vs count_naive, a <= {args.amax}: " + ("ok" if not bad else f"MISMATCH at {bad[:10]}"))
    us, _ = _units(fld)
    with stage("verify"):
        s = enumerate_principal(fld, us, args.norm_max)
        got = {}
        for n in s.norms.tolist():
            got[n] = got.get(n, 0) + 1
        ref = principal_ideals_bruteforce(fld, args.norm_max, args.radius)
        ok_ideals = got == ref
        print(f"principal ideals of norm <= {args.norm_max} vs brute force: " + ("ok" if ok_ideals else "MISMATCH"))
        # random probes: no lattice point of a trace-a plane lies on an embedding hyperplane
        tb = fld.trace_basis
        zero_hits = 0
        for _ in range(args.probes):
            c1, c2 = (int(x) for x in rng.integers(-50, 51, size=2))
            m = int(rng.integers(1, 101))
            z = tb.element(c1, c2, m)
            zero_hits += any(fld.certified_sign(z, i) == 0 for i in range(3))
        print(f"boundary probes: {args.probes} random points, {zero_hits} on an embedding hyperplane")
        if bad or not ok_ideals or zero_hits:
            raise RuntimeError("oracle equivalence failed")
    return 0


# -- parser -----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="trace-census", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--field", help="field spec file (poly = ..., optional basis = ...)")
    common.add_argument("--threads", type=int, default=0, help="worker threads (default: all cores)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--precision", type=int, default=None, help="interval precision in bits")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, fn, **kw):
        p = sub.add_parser(name, parents=[common], **kw)
        p.set_defaults(fn=fn)
        return p

    add("info", cmd_info, help="discriminant, kappa, trace basis")
    add("units", cmd_units, help="fundamental units and regulator")
    p = add("good-pairs", cmd_good_pairs, help="good sign characters")
    p.add_argument("--radius", type=float, default=0.0, help="also list good mu with |mu| <= radius")
    p = add("count", cmd_count, help="N_a for one trace")
    p.add_argument("--trace", type=int, required=True)
    p.add_argument("--naive", action="store_true", help="use the bounding-box counter")
    p = add("series", cmd_series, help="write a,N_a,r_a,E_a for a <= X")
    p.add_argument("--xmax", type=int, required=True)
    p.add_argument("--out", required=True)
    p = add("lvalue", cmd_lvalue, help="L(1, v) for a good character")
    p.add_argument("--char", required=True, help="exponent string such as 011")
    p.add_argument("--cutoff", type=int, default=100_000)
    p = add("coeff", cmd_coeff, help="predicted leading coefficient")
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--cutoff", type=int, default=100_000)
    for name, fn in (("fit", cmd_fit), ("report", cmd_report)):
        p = add(name, fn, help="log-polynomial fit of S(X)" if name == "fit" else "S(X) comparison CSV")
        p.add_argument("--k", type=int, default=3)
        p.add_argument("--xmin", type=float, default=100)
        p.add_argument("--xmax", type=int, default=100_000)
        p.add_argument("--grid", default="log20", help="logN (N points per decade) or a comma list")
        p.add_argument("--series", help="reuse a CSV written by 'series'")
    sub.choices["fit"].add_argument("--degree", type=int, default=2)
    sub.choices["report"].add_argument("--cutoff", type=int, default=100_000)
    sub.choices["report"].add_argument("--subleading", help="two coefficients b,c for C + b/log X + c/log^2 X")
    sub.choices["report"].add_argument("--out")
    p = add("pipeline", cmd_pipeline, help="units -> good pairs -> series -> L-values -> coefficient -> report")
    p.add_argument("--config", help="key = value run configuration")
    p.add_argument("--xmax", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--cutoff", type=int)
    p.add_argument("--outdir")
    p = add("verify", cmd_verify, help="oracle-equivalence checks")
    p.add_argument("--amax", type=int, default=300)
    p.add_argument("--norm-max", type=int, default=200)
    p.add_argument("--radius", type=int, default=8)
    p.add_argument("--probes", type=int, default=10_000)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.precision is not None:
        os.environ["TRACE_CENSUS_PRECISION"] = str(args.precision)
    try:
        with stage(args.command):
            return args.fn(args)
    except StageError as exc:
        print(f"error [{exc.stage}]: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
