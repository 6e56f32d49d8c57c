"""Principal ideal enumeration and the partial Hecke L-value L(1, v).

One generator per nonzero principal ideal: among the associates u*z the
enumerator keeps the one whose normalized log vector has coordinates in
[0, 1)^2 with respect to the fundamental units, then the sign with first
nonzero integral-basis coordinate positive.  Candidates whose floating
log coordinates sit within rounding distance of the domain boundary are
re-evaluated at high precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numba
import numpy as np

from .field import Field, FieldElement
from .units import SignCharacter, UnitSystem, good_characters, log_vector

__all__ = [
    "PrincipalIdealStream",
    "LValue",
    "enumerate_principal",
    "smoothed_sum",
    "sharp_partial_sum",
    "l_value",
    "MAX_NORM",
    "TRUNCATION",
    "principal_ideals_bruteforce",
]

MAX_NORM = 10**8
TRUNCATION = 35  # smoothed sums use norms up to 35 * cutoff
_SNAP = mpmath.mpf("1e-30")
_TOL = 1e-9


@dataclass(frozen=True)
class PrincipalIdealStream:
    """Generators (integral-basis coordinates), norms and sign bits sorted by (norm, coords).

    ``sign_bits`` bit i is set when the generator is negative at embedding i.
    """

    field: Field
    B: int
    coords: np.ndarray
    norms: np.ndarray
    sign_bits: np.ndarray

    def __len__(self) -> int:
        return int(self.norms.shape[0])

    def generator(self, k: int) -> FieldElement:
        return self.field.element([int(x) for x in self.coords[k]])

    def __iter__(self):
        for k in range(len(self)):
            yield self.generator(k), int(self.norms[k]), int(self.sign_bits[k])

    def values(self, v: SignCharacter) -> np.ndarray:
        mask = sum(1 << i for i in range(3) if v.e[i])
        par = np.zeros(len(self), dtype=np.int64)
        bits = self.sign_bits.astype(np.int64) & mask
        for i in range(3):
            par ^= (bits >> i) & 1
        return 1 - 2 * par

    def restrict(self, B: int) -> "PrincipalIdealStream":
        keep = self.norms <= B
        return PrincipalIdealStream(self.field, B, self.coords[keep], self.norms[keep], self.sign_bits[keep])


@dataclass(frozen=True)
class LValue:
    value: float
    error_estimate: float
    B_used: int
    s: int = 1
    value_B: float = math.nan
    value_2B: float = math.nan


@numba.njit(cache=True)
def _scan(M, Li, bound, Y, ci, cj, out_c, out_n, out_s, out_f):
    """Candidates with |z^(k)| <= bound[k] and |N(z)| <= Y near the fundamental domain.

    out_f marks entries that need exact re-evaluation.  Returns the number of
    hits, which may exceed the buffer (the caller then retries).
    """
    cap = out_n.shape[0]
    eps = 2.0**-50
    k = 0
    for i in range(0, ci + 1):
        j0 = 0 if i == 0 else -cj
        for j in range(j0, cj + 1):
            l_lo = -1e300
            l_hi = 1e300
            for r in range(3):
                base = i * M[r, 0] + j * M[r, 1]
                a = (-bound[r] - base) / M[r, 2]
                b = (bound[r] - base) / M[r, 2]
                if a > b:
                    a, b = b, a
                if a > l_lo:
                    l_lo = a
                if b < l_hi:
                    l_hi = b
            lo = int(math.ceil(l_lo))
            hi = int(math.floor(l_hi))
            if i == 0 and j == 0 and lo < 1:
                lo = 1
            for l in range(lo, hi + 1):
                z0 = i * M[0, 0] + j * M[0, 1] + l * M[0, 2]
                z1 = i * M[1, 0] + j * M[1, 1] + l * M[1, 2]
                z2 = i * M[2, 0] + j * M[2, 1] + l * M[2, 2]
                e0 = eps * (abs(i * M[0, 0]) + abs(j * M[0, 1]) + abs(l * M[0, 2]))
                e1 = eps * (abs(i * M[1, 0]) + abs(j * M[1, 1]) + abs(l * M[1, 2]))
                e2 = eps * (abs(i * M[2, 0]) + abs(j * M[2, 1]) + abs(l * M[2, 2]))
                a0 = abs(z0)
                a1 = abs(z1)
                a2 = abs(z2)
                flag = 0
                if a0 <= 4 * e0 or a1 <= 4 * e1 or a2 <= 4 * e2:
                    flag = 1
                    n = Y
                    x = 0.5
                    y = 0.5
                else:
                    rel = e0 / a0 + e1 / a1 + e2 / a2
                    n = a0 * a1 * a2
                    if n > Y * (1.0 + 2 * rel) + 0.5:
                        continue
                    if n * rel > 0.25 or n > Y - 0.5:
                        flag = 1
                    t = math.log(n) / 3.0
                    w0 = math.log(a0) - t
                    w1 = math.log(a1) - t
                    x = Li[0, 0] * w0 + Li[0, 1] * w1
                    y = Li[1, 0] * w0 + Li[1, 1] * w1
                    tol = 1e-9 + 8.0 * rel * (abs(Li[0, 0]) + abs(Li[0, 1]) + abs(Li[1, 0]) + abs(Li[1, 1]))
                    if x < -tol or x >= 1.0 + tol or y < -tol or y >= 1.0 + tol:
                        continue
                    if x < tol or x > 1.0 - tol or y < tol or y > 1.0 - tol:
                        flag = 1
                if k < cap:
                    out_c[k, 0] = i
                    out_c[k, 1] = j
                    out_c[k, 2] = l
                    out_n[k] = int(round(n))
                    s = 0
                    if z0 < 0:
                        s |= 1
                    if z1 < 0:
                        s |= 2
                    if z2 < 0:
                        s |= 4
                    out_s[k] = s
                    out_f[k] = flag
                k += 1
    return k


def _domain_inverse(us: UnitSystem):
    """mpmath inverse of [[l1_1, l2_1], [l1_2, l2_2]] (columns = eps log vectors)."""
    (a, b, _), (c, d, _) = us.logs
    with mpmath.workdps(60):
        det = a * d - c * b
        return ((d / det, -c / det), (-b / det, a / det))


def _snap(x):
    n = mpmath.nint(x)
    return n if abs(x - n) < _SNAP else x


def _exact_member(fld: Field, z: FieldElement, Y: int, inv) -> tuple[bool, int, int]:
    """(inside, |N|, sign bits) decided with exact norm and high-precision logs."""
    n = abs(fld.norm(z))
    if n == 0 or n > Y:
        return False, n, 0
    with mpmath.workdps(60):
        lv = log_vector(fld, z, bits=200)
        t = mpmath.log(n) / 3
        w0, w1 = lv[0] - t, lv[1] - t
        x = _snap(inv[0][0] * w0 + inv[0][1] * w1)
        y = _snap(inv[1][0] * w0 + inv[1][1] * w1)
        inside = 0 <= x < 1 and 0 <= y < 1
    sig = fld.signature(z) if inside else (0, 0, 0)
    bits = sum(1 << i for i in range(3) if sig[i])
    return inside, n, bits


def enumerate_principal(fld: Field, us: UnitSystem, B: int) -> PrincipalIdealStream:
    """One generator for each nonzero principal ideal of norm <= B."""
    if B < 1:
        raise ValueError("norm bound B must be at least 1")
    if B > MAX_NORM:
        raise ValueError(f"norm bound {B} exceeds the memory guard {MAX_NORM}")
    M = fld.embedding_matrix()
    L = us.log_matrix[:, :2].T  # columns are eps log vectors
    Li = np.linalg.inv(L)
    corners = [L @ np.array(p, dtype=float) for p in ((0, 0), (1, 0), (0, 1), (1, 1))]
    mx = np.array([
        max(c[0] for c in corners),
        max(c[1] for c in corners),
        max(-(c[0] + c[1]) for c in corners),
    ])
    bound = float(B) ** (1.0 / 3.0) * np.exp(mx) * (1 + 1e-9) + 1e-9
    cb = np.ceil(np.abs(np.linalg.inv(M)) @ bound).astype(np.int64)
    cap = max(1024, B // 2)
    while True:
        out_c = np.zeros((cap, 3), dtype=np.int64)
        out_n = np.zeros(cap, dtype=np.int64)
        out_s = np.zeros(cap, dtype=np.uint8)
        out_f = np.zeros(cap, dtype=np.uint8)
        k = _scan(M, Li, bound, float(B), int(cb[0]), int(cb[1]), out_c, out_n, out_s, out_f)
        if k <= cap:
            break
        cap = k
    out_c, out_n, out_s, out_f = out_c[:k], out_n[:k], out_s[:k], out_f[:k]
    keep = out_f == 0
    flagged = np.nonzero(~keep)[0]
    if flagged.size:
        inv = _domain_inverse(us)
        for idx in flagged:
            z = fld.element([int(x) for x in out_c[idx]])
            inside, n, bits = _exact_member(fld, z, B, inv)
            if inside:
                keep[idx] = True
                out_n[idx] = n
                out_s[idx] = bits
    out_c, out_n, out_s = out_c[keep], out_n[keep], out_s[keep]
    order = np.lexsort((out_c[:, 2], out_c[:, 1], out_c[:, 0], out_n))
    return PrincipalIdealStream(fld, int(B), out_c[order], out_n[order], out_s[order])


def smoothed_sum(stream: PrincipalIdealStream, v: SignCharacter, cutoff: float) -> float:
    """Sum over ideals of v(b) N(b)^-1 exp(-N(b)/cutoff), truncated at N <= 35*cutoff."""
    top = TRUNCATION * cutoff
    if top > stream.B:
        raise ValueError(f"stream bound {stream.B} is below the truncation point {top:g}")
    n = stream.norms
    sel = n <= top
    vals = stream.values(v)[sel]
    nf = n[sel].astype(float)
    return math.fsum((vals / nf * np.exp(-nf / cutoff)).tolist())


def sharp_partial_sum(stream: PrincipalIdealStream, v: SignCharacter, cutoff: int) -> float:
    if cutoff > stream.B:
        raise ValueError("cutoff exceeds stream bound")
    sel = stream.norms <= cutoff
    return math.fsum((stream.values(v)[sel] / stream.norms[sel].astype(float)).tolist())


def _check_character(us: UnitSystem, v: SignCharacter) -> None:
    if v.is_trivial:
        raise ValueError("trivial character: L(s, v0) has a pole at s = 1")
    if v not in good_characters(us):
        raise ValueError(f"character {v} is not good: it is not trivial on units, so not defined on principal ideals")


def l_value(fld: Field, us: UnitSystem, v: SignCharacter, B: int,
            stream: PrincipalIdealStream | None = None) -> LValue:
    """L(1, v) from smoothed sums at cutoffs B and 2B, extrapolated as 2V(2B) - V(B)."""
    _check_character(us, v)
    top = 2 * TRUNCATION * B
    if stream is None or stream.B < top:
        stream = enumerate_principal(fld, us, top)
    v1 = smoothed_sum(stream, v, B)
    v2 = smoothed_sum(stream, v, 2 * B)
    return LValue(2 * v2 - v1, abs(v2 - v1), int(B), 1, v1, v2)


def principal_ideals_bruteforce(fld: Field, B: int, radius: int) -> dict[int, int]:
    """Number of principal ideals of each norm <= B found among elements with |coords| <= radius.

    Associates are merged by mutual divisibility, with no use of units or
    log coordinates, so this serves as an independent check on small B.
    """
    by_norm: dict[int, list[FieldElement]] = {}
    rng = range(-radius, radius + 1)
    for c in ((i, j, l) for i in rng for j in rng for l in rng):
        if c == (0, 0, 0):
            continue
        z = fld.element(c)
        n = abs(fld.norm(z))
        if n > B:
            continue
        reps = by_norm.setdefault(n, [])
        if not any(fld.divides(w, z) for w in reps):
            reps.append(z)
    return {n: len(v) for n, v in sorted(by_norm.items())}
