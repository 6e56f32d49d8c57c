"""Exact arithmetic in totally real cubic fields.

Elements are integer coordinate vectors over an integral basis.  Trace and
norm come from the integer multiplication table; real embeddings are
evaluated on certified rational intervals around the isolated roots of the
defining polynomial, so signs are always decided exactly.
"""

from __future__ import annotations

import math
import os
import threading
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .intervals import Interval, isolate_real_roots, refine_root

__all__ = [
    "CubicPoly",
    "Field",
    "FieldElement",
    "FieldError",
    "TraceBasis",
    "build_field",
    "default_precision",
    "parse_field_spec",
    "load_field",
    "poly_discriminant",
]


class FieldError(ValueError):
    """Invalid field data: reducible or non-totally-real polynomial, bad basis, bad spec file."""


def default_precision() -> int:
    """Interval precision in bits, overridable through TRACE_CENSUS_PRECISION."""
    raw = os.environ.get("TRACE_CENSUS_PRECISION")
    if not raw:
        return 200
    try:
        bits = int(raw)
    except ValueError:
        raise FieldError(f"TRACE_CENSUS_PRECISION must be an integer, got {raw!r}") from None
    if bits < 53:
        raise FieldError("TRACE_CENSUS_PRECISION must be at least 53 bits")
    return bits


@dataclass(frozen=True)
class CubicPoly:
    """Monic cubic x^3 + a x^2 + b x + c with integer coefficients."""

    a: int
    b: int
    c: int

    @property
    def coeffs(self) -> tuple[int, int, int, int]:
        """Degree-descending coefficients, leading 1 included."""
        return (1, self.a, self.b, self.c)

    def __call__(self, x):
        return ((x + self.a) * x + self.b) * x + self.c

    def rational_roots(self) -> list[int]:
        # monic integer polynomial: rational roots are integer divisors of c
        if self.c == 0:
            return [0]
        n = abs(self.c)
        divisors = [d for d in range(1, math.isqrt(n) + 1) if n % d == 0]
        divisors += [n // d for d in divisors]
        return sorted({s * d for d in divisors for s in (1, -1) if self(s * d) == 0})

    def is_irreducible(self) -> bool:
        return not self.rational_roots()

    def __str__(self) -> str:
        terms = ["x^3"]
        for coef, mono in ((self.a, "x^2"), (self.b, "x"), (self.c, "")):
            if coef == 0:
                continue
            sign = "+" if coef > 0 else "-"
            mag = abs(coef)
            body = mono if (mag == 1 and mono) else f"{mag}{mono}"
            terms.append(f"{sign} {body}")
        return " ".join(terms)


def poly_discriminant(p: CubicPoly) -> int:
    a, b, c = p.a, p.b, p.c
    return 18 * a * b * c - 4 * a**3 * c + a * a * b * b - 4 * b**3 - 27 * c * c


def _power_sums(p: CubicPoly, upto: int) -> list[int]:
    """Traces Tr(alpha^k) for k = 0..upto via Newton's identities."""
    a, b, c = p.a, p.b, p.c
    s = [3, -a, a * a - 2 * b]
    while len(s) <= upto:
        k = len(s)
        s.append(-a * s[k - 1] - b * s[k - 2] - c * s[k - 3])
    return s[: upto + 1]


def _reduce_power(coeffs: Sequence[Fraction], p: CubicPoly) -> list[Fraction]:
    """Reduce a polynomial in alpha (ascending coefficients) modulo p."""
    out = list(coeffs)
    for deg in range(len(out) - 1, 2, -1):
        top = out[deg]
        if top:
            # alpha^3 = -a alpha^2 - b alpha - c
            out[deg - 1] -= p.a * top
            out[deg - 2] -= p.b * top
            out[deg - 3] -= p.c * top
        out[deg] = Fraction(0)
    out += [Fraction(0)] * (3 - len(out))
    return out[:3]


def _det3(m) -> object:
    return (
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    )


def _inverse3(m: Sequence[Sequence[Fraction]]) -> list[list[Fraction]]:
    det = _det3(m)
    if det == 0:
        raise FieldError("basis matrix is singular")
    cof = [[None] * 3 for _ in range(3)]
    for i in range(3):
        for j in range(3):
            minor = [[m[r][c] for c in range(3) if c != j] for r in range(3) if r != i]
            cof[i][j] = (-1) ** (i + j) * (minor[0][0] * minor[1][1] - minor[0][1] * minor[1][0])
    # inverse = adjugate / det, adjugate = cofactor transpose
    return [[Fraction(cof[j][i]) / det for j in range(3)] for i in range(3)]


@dataclass(frozen=True)
class FieldElement:
    """Algebraic integer given by integer coordinates over the field's integral basis."""

    field: "Field" = dc_field(repr=False, compare=False)
    coords: tuple[int, int, int]

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(int(c) for c in self.coords))

    def __eq__(self, other):
        if not isinstance(other, FieldElement):
            return NotImplemented
        return self.field is other.field and self.coords == other.coords

    def __hash__(self):
        return hash(self.coords)

    def _coerce(self, other) -> "FieldElement":
        if isinstance(other, FieldElement):
            return other
        if isinstance(other, int):
            return self.field.from_int(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return FieldElement(self.field, tuple(x + y for x, y in zip(self.coords, other.coords)))

    __radd__ = __add__

    def __neg__(self):
        return FieldElement(self.field, tuple(-x for x in self.coords))

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, int):
            return FieldElement(self.field, tuple(other * x for x in self.coords))
        if not isinstance(other, FieldElement):
            return NotImplemented
        return self.field.mul(self, other)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            return self.field.unit_inverse(self) ** (-n)
        result = self.field.one
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def is_zero(self) -> bool:
        return not any(self.coords)

    def trace(self) -> int:
        return self.field.trace(self)

    def norm(self) -> int:
        return self.field.norm(self)

    def signs(self) -> tuple[int, int, int]:
        return tuple(self.field.certified_sign(self, i) for i in range(3))

    def __repr__(self):
        return f"FieldElement{self.coords}"


@dataclass(frozen=True)
class TraceBasis:
    """Integral basis beta_1, beta_2, beta_3 with traces 0, 0, kappa.

    ``change`` holds the beta coordinates as columns over the integral basis.
    """

    betas: tuple[FieldElement, FieldElement, FieldElement]
    kappa: int

    @property
    def change(self) -> tuple[tuple[int, int, int], ...]:
        return tuple(tuple(b.coords[i] for b in self.betas) for i in range(3))

    def element(self, c1: int, c2: int, m: int) -> FieldElement:
        """c1*beta_1 + c2*beta_2 + m*beta_3."""
        b1, b2, b3 = self.betas
        return FieldElement(
            b1.field,
            tuple(c1 * x + c2 * y + m * z for x, y, z in zip(b1.coords, b2.coords, b3.coords)),
        )


class Field:
    """Totally real cubic field Q(alpha) with a chosen order basis.

    Construct through :func:`build_field`.  Instances are immutable apart
    from an internal, lock-protected cache of refined root intervals.
    """

    def __init__(self, poly: CubicPoly, basis: Sequence[Sequence[Fraction]]):
        self.poly = poly
        self.basis = tuple(tuple(Fraction(x) for x in row) for row in basis)
        self.poly_disc = poly_discriminant(poly)
        self._basis_inv = _inverse3(self.basis)
        self._roots: list[Interval] = [Interval(lo, hi) for lo, hi in isolate_real_roots(poly.coeffs)]
        self._root_lock = threading.Lock()
        self.mult_table = self._build_mult_table()
        self.gram = tuple(
            tuple(self._trace_power(self._mul_power(self.basis[i], self.basis[j])) for j in range(3))
            for i in range(3)
        )
        self.discriminant = int(_det3(self.gram))
        self.traces = tuple(int(self._trace_power(row)) for row in self.basis)
        self.one = self._from_power([Fraction(1), Fraction(0), Fraction(0)], what="1")
        self.trace_basis = self._build_trace_basis()
        self.kappa = self.trace_basis.kappa

    # -- construction helpers -------------------------------------------------

    def _mul_power(self, u: Sequence[Fraction], v: Sequence[Fraction]) -> list[Fraction]:
        prod = [Fraction(0)] * 5
        for i, x in enumerate(u):
            for j, y in enumerate(v):
                prod[i + j] += x * y
        return _reduce_power(prod, self.poly)

    def _trace_power(self, u: Sequence[Fraction]) -> Fraction:
        s = _power_sums(self.poly, 2)
        t = sum(Fraction(x) * s[k] for k, x in enumerate(u))
        return t

    def _from_power(self, u: Sequence[Fraction], what: str = "element") -> FieldElement:
        coords = [sum(u[k] * self._basis_inv[k][j] for k in range(3)) for j in range(3)]
        if any(c.denominator != 1 for c in coords):
            raise FieldError(f"{what} is not in the order spanned by the basis")
        return FieldElement(self, tuple(int(c) for c in coords))

    def _build_mult_table(self) -> tuple:
        table = []
        for i in range(3):
            row = []
            for j in range(3):
                prod = self._mul_power(self.basis[i], self.basis[j])
                coords = [sum(prod[k] * self._basis_inv[k][l] for k in range(3)) for l in range(3)]
                if any(c.denominator != 1 for c in coords):
                    raise FieldError(
                        f"multiplication table is not integral (omega_{i + 1} * omega_{j + 1})"
                    )
                row.append(tuple(int(c) for c in coords))
            table.append(tuple(row))
        return tuple(table)

    def _build_trace_basis(self) -> TraceBasis:
        t = [int(x) for x in self.traces]
        u = [[int(i == j) for j in range(3)] for i in range(3)]  # columns are new basis vectors

        def colop(dst, src, k):
            t[dst] -= k * t[src]
            for r in range(3):
                u[r][dst] -= k * u[r][src]

        while sum(1 for x in t if x) > 1:
            piv = min((j for j in range(3) if t[j]), key=lambda j: abs(t[j]))
            for j in range(3):
                if j != piv and t[j]:
                    colop(j, piv, t[j] // t[piv])
        piv = next(j for j in range(3) if t[j])
        order = [j for j in range(3) if j != piv] + [piv]
        cols = [[u[r][j] for r in range(3)] for j in order]
        kappa = t[piv]
        if kappa < 0:
            kappa = -kappa
            cols[2] = [-x for x in cols[2]]
        b1, b2, b3 = (FieldElement(self, tuple(c)) for c in cols)
        b1, b2 = self._gauss_reduce(b1, b2)
        b3 = self._size_reduce(b3, b1, b2)
        basis = TraceBasis((b1, b2, b3), kappa)
        # sweep coordinate c1 is the one with the larger extent at a = kappa
        ext = _triangle_extents(self, basis)
        if ext[1] > ext[0]:
            basis = TraceBasis((b2, b1, b3), kappa)
        return basis

    def _qform(self, x: FieldElement, y: FieldElement) -> int:
        return self.trace(x * y)

    def _gauss_reduce(self, x: FieldElement, y: FieldElement):
        # Lagrange reduction for the positive definite trace form Tr(z^2)
        while True:
            if self._qform(x, x) > self._qform(y, y):
                x, y = y, x
            q = Fraction(self._qform(x, y), self._qform(x, x))
            k = round(q)
            if k == 0:
                return x, y
            y = y - x * k

    def _size_reduce(self, z: FieldElement, x: FieldElement, y: FieldElement) -> FieldElement:
        g = [[self._qform(x, x), self._qform(x, y)], [self._qform(x, y), self._qform(y, y)]]
        r = [self._qform(x, z), self._qform(y, z)]
        det = Fraction(g[0][0] * g[1][1] - g[0][1] * g[1][0])
        s = (r[0] * g[1][1] - r[1] * g[0][1]) / det
        t = (g[0][0] * r[1] - g[1][0] * r[0]) / det
        return z - x * round(s) - y * round(t)

    # -- element arithmetic ---------------------------------------------------

    def element(self, coords: Iterable[int]) -> FieldElement:
        return FieldElement(self, tuple(coords))

    def from_int(self, n: int) -> FieldElement:
        return self.one * n

    def from_power(self, coeffs: Sequence) -> FieldElement:
        """Element given by ascending power-basis coefficients c0 + c1 alpha + c2 alpha^2."""
        u = [Fraction(x) for x in coeffs] + [Fraction(0)] * (3 - len(coeffs))
        return self._from_power(_reduce_power(u, self.poly))

    @cached_property
    def alpha(self) -> FieldElement:
        return self.from_power([0, 1, 0])

    def to_power(self, z: FieldElement) -> tuple[Fraction, Fraction, Fraction]:
        return tuple(sum(z.coords[j] * self.basis[j][k] for j in range(3)) for k in range(3))

    def mul_matrix(self, z: FieldElement) -> tuple[tuple[int, int, int], ...]:
        """Integer matrix of w -> z*w; column j is the product z*omega_j."""
        c = z.coords
        m = self.mult_table
        return tuple(
            tuple(sum(c[i] * m[i][j][k] for i in range(3)) for j in range(3)) for k in range(3)
        )

    def mul(self, z: FieldElement, w: FieldElement) -> FieldElement:
        mz = self.mul_matrix(z)
        return FieldElement(self, tuple(sum(mz[k][j] * w.coords[j] for j in range(3)) for k in range(3)))

    def trace(self, z: FieldElement) -> int:
        return sum(c * t for c, t in zip(z.coords, self.traces))

    def norm(self, z: FieldElement) -> int:
        return int(_det3(self.mul_matrix(z)))

    def unit_inverse(self, z: FieldElement) -> FieldElement:
        inv = _inverse3([[Fraction(x) for x in row] for row in self.mul_matrix(z)])
        coords = [inv[k][0] * self.one.coords[0] + inv[k][1] * self.one.coords[1] + inv[k][2] * self.one.coords[2] for k in range(3)]
        if any(Fraction(c).denominator != 1 for c in coords):
            raise FieldError(f"{z!r} is not a unit")
        return FieldElement(self, tuple(int(c) for c in coords))

    def divides(self, z: FieldElement, w: FieldElement) -> bool:
        """True when w lies in the principal ideal z*O."""
        if z.is_zero():
            return w.is_zero()
        inv = _inverse3([[Fraction(x) for x in row] for row in self.mul_matrix(z)])
        return all(
            sum(inv[k][j] * w.coords[j] for j in range(3)).denominator == 1 for k in range(3)
        )

    # -- embeddings -----------------------------------------------------------

    def root_interval(self, i: int, bits: int) -> Interval:
        """Isolating interval of the i-th largest root with width <= 2^-bits."""
        with self._root_lock:
            iv = self._roots[i]
            if iv.width > Fraction(1, 1 << bits):
                iv = refine_root(self.poly.coeffs, iv, bits)
                self._roots[i] = iv
            return iv

    def root_intervals(self) -> list[Interval]:
        return list(self._roots)

    def embed(self, z: FieldElement, i: int, bits: int | None = None) -> Interval:
        """Certified interval of width <= 2^-bits containing the i-th embedding of z."""
        if bits is None:
            bits = default_precision()
        if bits < 1:
            raise ValueError("precision must be at least 1 bit")
        q0, q1, q2 = self.to_power(z)
        if q1 == 0 and q2 == 0:
            return Interval(q0, q0)
        target = Fraction(1, 1 << bits)
        extra = 4
        while True:
            r = self.root_interval(i, bits + extra)
            val = (r * q2 + q1) * r + q0
            if val.width <= target:
                return val
            extra += 16

    def embedding_matrix(self) -> np.ndarray:
        """Float matrix M with M[i, j] = omega_j^{(i)}; rows ordered by decreasing root."""
        return self._embedding_matrix.copy()

    @cached_property
    def _embedding_matrix(self) -> np.ndarray:
        out = np.empty((3, 3))
        for j in range(3):
            w = self.element([int(k == j) for k in range(3)])
            for i in range(3):
                out[i, j] = float(self.embed(w, i, 80).mid)
        return out

    def embed_float(self, z: FieldElement) -> np.ndarray:
        return self._embedding_matrix @ np.asarray(z.coords, dtype=float)

    def sign_bound_bits(self, z: FieldElement, i: int) -> int:
        """Precision cap for certified_sign from |N(z)| >= 1."""
        logsum = 0.0
        for j in range(3):
            if j == i:
                continue
            iv = self.embed(z, j, 8)
            mag = max(abs(iv.lo), abs(iv.hi), Fraction(1))
            logsum += math.log2(mag)
        return 64 + math.ceil(logsum)

    def certified_sign(self, z: FieldElement, i: int) -> int:
        """Exact sign (+1 or -1) of the i-th embedding of a nonzero z."""
        if z.is_zero():
            raise FieldError("certified_sign called on zero element")
        cap = self.sign_bound_bits(z, i)
        bits = 32
        while True:
            iv = self.embed(z, i, bits)
            if iv.lo > 0:
                return 1
            if iv.hi < 0:
                return -1
            if bits >= cap:
                raise RuntimeError(
                    f"sign of {z!r} at embedding {i} unresolved at {bits} bits (cap {cap})"
                )
            bits = min(2 * bits, cap)

    def signature(self, z: FieldElement) -> tuple[int, int, int]:
        """GF(2) signature: entry 1 where the embedding is negative."""
        return tuple(int(self.certified_sign(z, i) < 0) for i in range(3))

    def is_totally_positive(self, z: FieldElement) -> bool:
        return not z.is_zero() and all(self.certified_sign(z, i) > 0 for i in range(3))

    @cached_property
    def float_roots(self) -> np.ndarray:
        return np.array([float(self.root_interval(i, 80).mid) for i in range(3)])

    def __repr__(self):
        return f"Field({self.poly}, D={self.discriminant}, kappa={self.kappa})"


def _triangle_extents(fld: Field, tb: TraceBasis) -> tuple[float, float]:
    """Float extents (dc1, dc2) of the trace-kappa triangle; only used for orientation."""
    m = fld.embedding_matrix()
    cols = [m @ np.asarray(b.coords, dtype=float) for b in tb.betas]
    verts = []
    for i, j in ((0, 1), (0, 2), (1, 2)):
        a = np.array([[cols[0][i], cols[1][i]], [cols[0][j], cols[1][j]]])
        rhs = -np.array([cols[2][i], cols[2][j]])
        verts.append(np.linalg.solve(a, rhs))
    verts = np.array(verts)
    ext = verts.max(axis=0) - verts.min(axis=0)
    return float(ext[0]), float(ext[1])


def build_field(poly: CubicPoly | Sequence[int], basis: Sequence[Sequence] | None = None) -> Field:
    """Validate a defining polynomial (and optional integral basis) and build the field.

    Without a basis the power basis is taken as the maximal order, so the
    field discriminant equals the polynomial discriminant.
    """
    if not isinstance(poly, CubicPoly):
        coeffs = list(poly)
        if len(coeffs) == 4:
            if coeffs[0] != 1:
                raise FieldError("polynomial must be monic")
            coeffs = coeffs[1:]
        if len(coeffs) != 3:
            raise FieldError("expected a monic cubic: 1, a, b, c")
        poly = CubicPoly(*(int(x) for x in coeffs))
    if not poly.is_irreducible():
        raise FieldError(f"polynomial {poly} is reducible (rational root {poly.rational_roots()[0]})")
    disc = poly_discriminant(poly)
    if disc <= 0:
        raise FieldError(f"polynomial {poly} is not totally real (discriminant {disc})")
    if basis is None:
        basis = [[1, 0, 0], [0, 1, 0], [0, 0, 1]]
    basis = [[Fraction(x) for x in row] for row in basis]
    if len(basis) != 3 or any(len(row) != 3 for row in basis):
        raise FieldError("basis must be a 3x3 matrix")
    fld = Field(poly, basis)
    # Gram determinant must match Delta(p) * det(B)^2
    expected = disc * _det3(basis) ** 2
    if fld.discriminant != expected:
        raise FieldError(
            f"trace-form discriminant {fld.discriminant} disagrees with Delta*det^2 = {expected}"
        )
    return fld


def _parse_rational(tok: str) -> Fraction:
    tok = tok.strip()
    if not tok:
        raise FieldError("empty number in field spec")
    try:
        return Fraction(tok)
    except (ValueError, ZeroDivisionError):
        raise FieldError(f"bad rational {tok!r} in field spec") from None


def parse_field_spec(text: str) -> Field:
    """Parse ``poly = 1,2,-3,-1`` plus optional ``basis = r11,r12,r13; ...`` lines."""
    seen: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise FieldError(f"line {lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.lower()
        if key not in ("poly", "basis"):
            raise FieldError(f"line {lineno}: unknown key {key!r}")
        if key in seen:
            raise FieldError(f"line {lineno}: duplicate key {key!r}")
        seen[key] = value
    if "poly" not in seen:
        raise FieldError("field spec has no 'poly' entry")
    coeffs = [_parse_rational(t) for t in seen["poly"].split(",")]
    if any(c.denominator != 1 for c in coeffs):
        raise FieldError("polynomial coefficients must be integers")
    basis = None
    if "basis" in seen:
        rows = [r for r in seen["basis"].split(";")]
        basis = [[_parse_rational(t) for t in row.split(",")] for row in rows]
    return build_field([int(c) for c in coeffs], basis)


def load_field(path: str | os.PathLike) -> Field:
    p = Path(path)
    if not p.is_file():
        raise FieldError(f"file not found: {p}")
    return parse_field_spec(p.read_text())
