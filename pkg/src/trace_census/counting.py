"""Exact counts N_a of totally positive integers of trace a.

With z = c1*beta_1 + c2*beta_2 + m*beta_3 (m = a/kappa) the totally positive
elements of trace a are the lattice points strictly inside the triangle T_a
cut out by the three lines z^{(i)} = 0.  ``count_exact`` sweeps integer
columns c1 and counts the c2 values between the binding constraints in
floating point; any integer that lies within the rounding error of a
boundary is decided by an exact sign computation instead.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import mpmath
import numba
import numpy as np

from .field import Field, TraceBasis
from .intervals import Interval

__all__ = [
    "Triangle",
    "CountSeries",
    "triangle",
    "geometric_estimate",
    "count_exact",
    "count_many",
    "count_naive",
    "error_series",
    "NAIVE_LIMIT",
]

NAIVE_LIMIT = 10_000
# relative rounding allowance for the float stage of the sweep (2^-48, generous)
_REL = 2.0**-48
_AMB_CAP = 1 << 16


@dataclass(frozen=True)
class Triangle:
    """T_a as three linear forms L_i(c1, c2) = c1*B1_i + c2*B2_i + m*B3_i with interval coefficients."""

    field: Field
    basis: TraceBasis
    a: int
    coeffs: tuple  # coeffs[j][i] = interval for beta_{j+1}^{(i)}

    @property
    def m(self) -> int:
        return self.a // self.basis.kappa

    def vertices(self) -> list[tuple]:
        """Interval vertices; vertex k is where the two forms other than k vanish."""
        b1, b2, b3 = self.coeffs
        out = []
        for i, j in ((1, 2), (0, 2), (0, 1)):
            det = b1[i] * b2[j] - b1[j] * b2[i]
            r_i, r_j = b3[i] * -self.m, b3[j] * -self.m
            x = (r_i * b2[j] - r_j * b2[i]) / det
            y = (b1[i] * r_j - b1[j] * r_i) / det
            out.append((x, y))
        return out

    def area(self):
        v = self.vertices()
        s = Interval(0, 0)
        for k in range(3):
            (x0, y0), (x1, y1) = v[k], v[(k + 1) % 3]
            s = s + x0 * y1 - x1 * y0
        return abs(s) / 2

    def float_vertices(self) -> np.ndarray:
        return np.array([[float(x), float(y)] for x, y in self.vertices()])


def triangle(fld: Field, a: int, basis: TraceBasis | None = None, bits: int = 200) -> Triangle:
    tb = basis or fld.trace_basis
    if a % tb.kappa:
        raise ValueError(f"trace {a} is not a multiple of kappa = {tb.kappa}")
    coeffs = tuple(tuple(fld.embed(b, i, bits) for i in range(3)) for b in tb.betas)
    return Triangle(fld, tb, a, coeffs)


def geometric_estimate(fld: Field, a: int) -> float:
    """r_a = kappa * a^2 / (2 sqrt(D))."""
    if a <= 0:
        return 0.0
    return fld.kappa * a * a / (2.0 * math.sqrt(fld.discriminant))


# -- float sweep kernel ------------------------------------------------------------


@numba.njit(cache=True, nogil=True)
def _sweep(b1, b2, b3, xlo, xhi, ms, counts, amb):
    """Count interior points for each multiplier in ``ms``.

    Ambiguous (m, c1, c2) triples go to ``amb``; returns how many were found
    (which may exceed the buffer, in which case the caller retries).
    """
    namb = 0
    cap = amb.shape[0]
    # boundary i is c2 = c1*s[i] + m*t[i]
    s = np.empty(3)
    t3 = np.empty(3)
    for i in range(3):
        s[i] = -b1[i] / b2[i]
        t3[i] = -b3[i] / b2[i]
    for t in range(ms.shape[0]):
        m = ms[t]
        total = 0
        c_start = int(math.floor(m * xlo)) - 1
        c_end = int(math.ceil(m * xhi)) + 1
        for c1 in range(c_start, c_end + 1):
            lo_minus = -1e300
            lo_plus = -1e300
            hi_minus = 1e300
            hi_plus = 1e300
            for i in range(3):
                u = c1 * s[i]
                w = m * t3[i]
                q = u + w
                err = _REL * (abs(u) + abs(w)) + 1e-300
                if b2[i] > 0:
                    if q - err > lo_minus:
                        lo_minus = q - err
                    if q + err > lo_plus:
                        lo_plus = q + err
                else:
                    if q - err < hi_minus:
                        hi_minus = q - err
                    if q + err < hi_plus:
                        hi_plus = q + err
            if lo_minus >= hi_plus:
                continue
            first = math.floor(lo_plus) + 1
            last = math.ceil(hi_minus) - 1
            if last >= first:
                total += int(last - first + 1)
            # integers within rounding distance of a boundary
            k_lo = math.ceil(lo_minus)
            k_hi = math.floor(lo_plus)
            for k in range(int(k_lo), int(k_hi) + 1):
                if k < hi_plus:
                    if namb < cap:
                        amb[namb, 0] = m
                        amb[namb, 1] = c1
                        amb[namb, 2] = k
                    namb += 1
            k2_lo = math.ceil(hi_minus)
            k2_hi = math.floor(hi_plus)
            for k in range(int(k2_lo), int(k2_hi) + 1):
                if k > lo_minus and not (k_lo <= k and k <= k_hi):
                    if namb < cap:
                        amb[namb, 0] = m
                        amb[namb, 1] = c1
                        amb[namb, 2] = k
                    namb += 1
        counts[t] = total
    return namb




@dataclass(frozen=True)
class _SweepSetup:
    b: np.ndarray  # 3x3, row j = beta_{j+1} embeddings
    xlo: float
    xhi: float


def _setup(fld: Field, tb: TraceBasis) -> _SweepSetup:
    b = np.array([[float(fld.embed(beta, i, 80).mid) for i in range(3)] for beta in tb.betas])
    tri = triangle(fld, tb.kappa, tb)
    xs = [x for x, _ in tri.vertices()]
    xlo = min(float(x.lo) for x in xs)
    xhi = max(float(x.hi) for x in xs)
    return _SweepSetup(b, xlo, xhi)


def _resolve(fld: Field, tb: TraceBasis, triples) -> dict[int, int]:
    """Exact decisions for ambiguous points: returns extra count per m."""
    extra: dict[int, int] = {}
    for m, c1, c2 in triples:
        z = tb.element(int(c1), int(c2), int(m))
        if not z.is_zero() and fld.is_totally_positive(z):
            extra[int(m)] = extra.get(int(m), 0) + 1
    return extra


def _count_block(fld, tb, setup, ms: np.ndarray) -> np.ndarray:
    counts = np.zeros(ms.shape[0], dtype=np.int64)
    cap = 256
    while True:
        amb = np.zeros((cap, 3), dtype=np.int64)
        n = _sweep(setup.b[0], setup.b[1], setup.b[2], setup.xlo, setup.xhi, ms, counts, amb)
        if n <= cap:
            break
        cap = max(2 * cap, n)
    extra = _resolve(fld, tb, amb[:n])
    if extra:
        pos = {int(m): t for t, m in enumerate(ms)}
        for m, k in extra.items():
            counts[pos[m]] += k
    return counts


def count_many(fld: Field, a_values, basis: TraceBasis | None = None, threads: int = 1,
               block: int = 512) -> np.ndarray:
    """Exact N_a for every a in ``a_values`` (zero for a <= 0 or non-multiples of kappa)."""
    tb = basis or fld.trace_basis
    a_values = np.asarray(a_values, dtype=np.int64)
    out = np.zeros(a_values.shape[0], dtype=np.int64)
    valid = np.nonzero((a_values > 0) & (a_values % tb.kappa == 0))[0]
    if valid.size == 0:
        return out
    setup = _setup(fld, tb)
    ms = a_values[valid] // tb.kappa
    # interleave blocks so threads see similar work
    chunks = [np.arange(s, min(s + block, ms.size)) for s in range(0, ms.size, block)]
    if threads <= 1 or len(chunks) == 1:
        results = [_count_block(fld, tb, setup, ms[c]) for c in chunks]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda c: _count_block(fld, tb, setup, ms[c]), chunks))
    for c, r in zip(chunks, results):
        out[valid[c]] = r
    return out


def count_exact(fld: Field, a: int, basis: TraceBasis | None = None) -> int:
    """Number of totally positive integers of trace a."""
    return int(count_many(fld, [a], basis)[0])


def count_naive(fld: Field, a: int, basis: TraceBasis | None = None) -> int:
    """Reference count: test every point of the triangle's bounding box.

    Each point's three signs are decided by a float evaluation with a
    rigorous error bound, falling back to certified_sign when the bound does
    not exclude zero.
    """
    if a > NAIVE_LIMIT:
        raise ValueError(f"count_naive is limited to a <= {NAIVE_LIMIT}")
    tb = basis or fld.trace_basis
    if a <= 0 or a % tb.kappa:
        return 0
    m = a // tb.kappa
    tri = triangle(fld, a, tb)
    verts = tri.vertices()
    x0 = math.floor(min(float(x.lo) for x, _ in verts)) - 1
    x1 = math.ceil(max(float(x.hi) for x, _ in verts)) + 1
    y0 = math.floor(min(float(y.lo) for _, y in verts)) - 1
    y1 = math.ceil(max(float(y.hi) for _, y in verts)) + 1
    b = np.array([[float(fld.embed(beta, i, 80).mid) for i in range(3)] for beta in tb.betas])
    eps = 2.0**-50
    total = 0
    cs = np.arange(y0, y1 + 1, dtype=np.float64)
    for c1 in range(x0, x1 + 1):
        inside = np.ones(cs.shape[0], dtype=bool)
        unsure = np.zeros(cs.shape[0], dtype=bool)
        for i in range(3):
            t1 = c1 * b[0, i]
            t2 = cs * b[1, i]
            t3 = m * b[2, i]
            val = t1 + t2 + t3
            bound = eps * (abs(t1) + np.abs(t2) + abs(t3)) + 1e-300
            inside &= val > -bound
            unsure |= np.abs(val) <= bound
        sure = inside & ~unsure
        total += int(np.count_nonzero(sure))
        for c2 in cs[inside & unsure]:
            z = tb.element(c1, int(c2), m)
            if z.is_zero():
                continue
            if all(fld.certified_sign(z, i) > 0 for i in range(3)):
                total += 1
    return total


# -- series ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CountSeries:
    """N_a, r_a, E_a for a = 1..X (index a-1).  r_a and E_a are 0 off multiples of kappa."""

    X: int
    kappa: int
    N: np.ndarray
    r: np.ndarray
    E: np.ndarray

    @property
    def a(self) -> np.ndarray:
        return np.arange(1, self.X + 1)

    def to_csv(self, path) -> None:
        path = Path(path)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["a", "N_a", "r_a", "E_a"])
            for a, n, r, e in zip(range(1, self.X + 1), self.N, self.r, self.E):
                w.writerow([a, int(n), f"{r:.12g}", f"{e:.12g}"])

    @classmethod
    def from_csv(cls, path, kappa: int = 1) -> "CountSeries":
        rows = list(csv.DictReader(Path(path).open()))
        n = np.array([int(r["N_a"]) for r in rows], dtype=np.int64)
        r = np.array([float(r["r_a"]) for r in rows])
        e = np.array([float(r["E_a"]) for r in rows])
        return cls(len(rows), kappa, n, r, e)

    def truncate(self, X: int) -> "CountSeries":
        if X > self.X:
            raise ValueError(f"X = {X} exceeds series range {self.X}")
        return CountSeries(X, self.kappa, self.N[:X], self.r[:X], self.E[:X])


def _exact_errors(fld: Field, a: np.ndarray, n: np.ndarray) -> np.ndarray:
    """E_a = N_a - kappa a^2/(2 sqrt D) with the product formed in scaled integers."""
    shift = 120
    with mpmath.workdps(60):
        scale = int(mpmath.nint(fld.kappa / (2 * mpmath.sqrt(fld.discriminant)) * mpmath.mpf(2) ** shift))
    one = 1 << shift
    out = np.empty(a.shape[0])
    for t, (ai, ni) in enumerate(zip(a.tolist(), n.tolist())):
        out[t] = (ni * one - ai * ai * scale) / one
    return out


def error_series(fld: Field, X: int, threads: int = 1, basis: TraceBasis | None = None) -> CountSeries:
    if X < 1:
        raise ValueError("X must be positive")
    a = np.arange(1, X + 1, dtype=np.int64)
    n = count_many(fld, a, basis, threads=threads)
    mult = a % fld.kappa == 0
    r = np.where(mult, fld.kappa * a.astype(float) ** 2 / (2.0 * math.sqrt(fld.discriminant)), 0.0)
    e = np.where(mult, _exact_errors(fld, a, n), 0.0)
    return CountSeries(X, fld.kappa, n, r, e)
