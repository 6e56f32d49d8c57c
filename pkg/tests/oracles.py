"""Independent reference computations used to freeze test fixtures.

Run as a script to print fixture lines:  python tests/oracles.py
"""

from __future__ import annotations

import math

import numpy as np


def _polymulmod(a, b, f, p):
    # a, b, f: coefficient lists, lowest degree first; f monic cubic
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] = (out[i + j] + x * y) % p
    for d in range(len(out) - 1, 2, -1):
        c = out[d]
        if c:
            for k in range(3):
                out[d - 3 + k] = (out[d - 3 + k] - c * f[k]) % p
            out[d] = 0
    return out[:3]


def _roots_mod_p(f, p) -> int:
    """Number of distinct roots of the monic cubic f (low-first) mod p, via gcd(x^p - x, f)."""
    if p < 50:
        return sum(1 for x in range(p) if (f[0] + f[1] * x + f[2] * x * x + x**3) % p == 0)
    r, base, e = [1, 0, 0], [0, 1, 0], p
    while e:
        if e & 1:
            r = _polymulmod(r, base, f, p)
        base = _polymulmod(base, base, f, p)
        e >>= 1
    g = [(r[0]) % p, (r[1] - 1) % p, r[2] % p]
    # degree of gcd(f, g)
    a = [x % p for x in f] + [1]
    b = g[:]
    while any(b):
        while b and b[-1] == 0:
            b.pop()
        while len(a) >= len(b):
            c = a[-1] * pow(b[-1], -1, p) % p
            sh = len(a) - len(b)
            for i in range(len(b)):
                a[sh + i] = (a[sh + i] - c * b[i]) % p
            a.pop()
            while a and a[-1] == 0:
                a.pop()
            if not a:
                break
        a, b = b, a
    return len(a) - 1


def _primes(n):
    s = np.ones(n + 1, dtype=bool)
    s[:2] = False
    for i in range(2, int(n**0.5) + 1):
        if s[i]:
            s[i * i :: i] = False
    return np.nonzero(s)[0]


def ideal_counts(coeffs, disc, N):
    """a(n) = number of ideals of norm n, n <= N, for the field of a monic cubic of index 1."""
    c3, c2, c1, c0 = coeffs
    f = [c0, c1, c2]
    a = np.ones(N + 1, dtype=np.int64)
    a[0] = 0
    for p in _primes(N).tolist():
        if disc % p == 0:
            # ramified: residue degrees from the roots mod p with multiplicity
            vals = [x for x in range(p) if (c0 + c1 * x + c2 * x * x + x**3) % p == 0]
            # a repeated factor mod p of a cubic is linear, so every prime above p has degree 1
            degs = [1] * len(vals)
        else:
            r = _roots_mod_p(f, p)
            degs = {3: [1, 1, 1], 1: [1, 2], 0: [3]}[r]
        kmax = int(math.log(N) / math.log(p)) + 1
        local = [0] * (kmax + 1)
        local[0] = 1
        for d in degs:
            for k in range(d, kmax + 1):
                local[k] += local[k - d]
        pk, k = p, 1
        while pk <= N:
            idx = np.arange(pk, N + 1, pk)
            nxt = pk * p
            # multiples of p^k but not p^{k+1}
            sel = idx[idx % nxt != 0] if nxt <= N else idx
            a[sel] *= local[k]
            pk, k = nxt, k + 1
    return a


def regulator_from_class_number_formula(coeffs, disc, x=20000.0, h=1):
    """R = residue * w sqrt(D) / (2^r1 h) with the residue from sum a(n) e^{-n/x} / x."""
    N = int(35 * x)
    a = ideal_counts(coeffs, disc, N)
    n = np.arange(N + 1, dtype=float)
    rho = math.fsum((a * np.exp(-n / x)).tolist()) / x
    return rho * 2 * math.sqrt(disc) / (8 * h)


def unit_square_root(fld, u):
    """An element eta of the order with eta^2 = u, or None (checks all sign choices at 50 digits)."""
    import itertools

    import mpmath

    with mpmath.workdps(50):
        def mp(iv):
            return mpmath.mpf(iv.mid.numerator) / iv.mid.denominator

        roots = [mpmath.sqrt(abs(mp(fld.embed(u, i, 200)))) for i in range(3)]
        M = mpmath.matrix(3, 3)
        for j in range(3):
            w = fld.element([int(k == j) for k in range(3)])
            for i in range(3):
                M[i, j] = mp(fld.embed(w, i, 200))
        Mi = M**-1
        for s in itertools.product((1, -1), repeat=3):
            c = Mi * mpmath.matrix([s[i] * roots[i] for i in range(3)])
            if all(abs(x - mpmath.nint(x)) < 1e-20 for x in c):
                eta = fld.element([int(mpmath.nint(x)) for x in c])
                if eta * eta == u:
                    return eta
    return None


def regulator_extrapolated(coeffs, disc, x=20000.0):
    """Two-point extrapolation (x/4, x) removing the 1/x^2 term of the smoothed residue."""
    r1 = regulator_from_class_number_formula(coeffs, disc, x / 4)
    r2 = regulator_from_class_number_formula(coeffs, disc, x)
    return (16 * r2 - r1) / 15


if __name__ == "__main__":
    for coeffs, disc in (((1, 2, -3, -1), 257), ((1, -1, -2, 1), 49), ((1, 0, -3, 1), 81)):
        r = regulator_extrapolated(coeffs, disc)
        print(f"{disc}, {r:.12f}, class number formula (h = 1 by Minkowski bound), smoothed ideal count x = 2e4")
