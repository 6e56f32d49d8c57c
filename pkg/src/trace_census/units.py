"""Units, regulator, sign signatures and good sign characters.

Unit search: the region {z : |z^{(i)}| <= e^bound} is covered in log space
by cells of side ``CELL``.  Each cell is a small box in embedding space; the
lattice O_K is rescaled to that box, LLL-reduced, and enumerated exactly.
Because the region is convex in log space, the units it contains generate
the whole unit lattice once they span rank 2 (any coset of the span of two
contained units has a representative in the triangle they cut out).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import mpmath
import numpy as np

from .field import Field, FieldElement

__all__ = [
    "UnitSearchError",
    "UnitSystem",
    "TotallyPositiveGens",
    "SignCharacter",
    "GoodMu",
    "find_units",
    "regulator",
    "log_vector",
    "totally_positive_gens",
    "good_characters",
    "good_mu_for",
    "lll_reduce",
]

CELL = 0.5
HARD_CAP = 40.0
_MP_DPS = 40


class UnitSearchError(RuntimeError):
    pass


def lll_reduce(basis: np.ndarray, delta: float = 0.75) -> tuple[np.ndarray, np.ndarray]:
    """LLL-reduce the columns of a float basis; returns (reduced, unimodular U)."""
    b = np.array(basis, dtype=float)
    n = b.shape[1]
    u = np.eye(n, dtype=np.int64)

    def gso(b):
        bstar = np.zeros_like(b)
        mu = np.zeros((n, n))
        for i in range(n):
            v = b[:, i].copy()
            for j in range(i):
                mu[i, j] = b[:, i] @ bstar[:, j] / (bstar[:, j] @ bstar[:, j])
                v -= mu[i, j] * bstar[:, j]
            bstar[:, i] = v
        return bstar, mu

    bstar, mu = gso(b)
    k = 1
    while k < n:
        for j in range(k - 1, -1, -1):
            q = round(mu[k, j])
            if q:
                b[:, k] -= q * b[:, j]
                u[:, k] -= q * u[:, j]
                bstar, mu = gso(b)
        lhs = bstar[:, k] @ bstar[:, k]
        rhs = (delta - mu[k, k - 1] ** 2) * (bstar[:, k - 1] @ bstar[:, k - 1])
        if lhs >= rhs:
            k += 1
        else:
            b[:, [k - 1, k]] = b[:, [k, k - 1]]
            u[:, [k - 1, k]] = u[:, [k, k - 1]]
            bstar, mu = gso(b)
            k = max(k - 1, 1)
    return b, u


def log_vector(fld: Field, u: FieldElement, bits: int = 160) -> tuple:
    """(log|u^(1)|, log|u^(2)|, log|u^(3)|) as mpmath numbers."""
    with mpmath.workdps(_MP_DPS):
        out = []
        for i in range(3):
            iv = fld.embed(u, i, bits)
            m = mpmath.mpf(iv.mid.numerator) / iv.mid.denominator
            out.append(mpmath.log(abs(m)))
        return tuple(out)


def _cell_centers(bound: float, h: float):
    lo = math.floor(-2 * bound / h) - 1
    hi = math.ceil(bound / h) + 1
    for j in range(lo, hi + 1):
        for k in range(lo, hi + 1):
            t1, t2 = j * h, k * h
            t3 = -t1 - t2
            if max(t1, t2, t3) <= bound + h:
                yield t1, t2, t3


def enumerate_units(fld: Field, bound: float, h: float = CELL) -> list[FieldElement]:
    """All units z (up to sign, first nonzero coordinate positive) with every |z^(i)| <= e^bound.

    A few units slightly outside the region may also be returned.
    """
    m = fld.embedding_matrix()
    rho = math.exp(h) * (1 + 1e-9)
    found: set[tuple[int, int, int]] = set()
    for t in _cell_centers(bound, h):
        scaled = np.exp(-np.asarray(t))[:, None] * m
        red, uni = lll_reduce(scaled)
        inv = np.linalg.inv(red)
        kmax = np.floor(rho * np.abs(inv).sum(axis=1) + 1e-9).astype(int)
        axes = [np.arange(-km, km + 1) for km in kmax]
        grid = np.array(np.meshgrid(*axes, indexing="ij")).reshape(3, -1)
        y = red @ grid
        ok = np.all(np.abs(y) <= rho, axis=0)
        prod = np.abs(np.prod(y[:, ok], axis=0))
        cand = grid[:, ok][:, (prod > 0.5) & (prod < 2.0)]
        coords = uni @ cand
        for col in coords.T:
            c = tuple(int(x) for x in col)
            first = next((x for x in c if x), 0)
            if first < 0:
                c = tuple(-x for x in c)
            if c in found:
                continue
            if abs(fld.norm(fld.element(c))) == 1:
                found.add(c)
    return [fld.element(c) for c in sorted(found)]


@dataclass(frozen=True)
class UnitSystem:
    """Fundamental units with their regulator and GF(2) signature matrix.

    ``signatures`` has rows for -1, eps_1, eps_2; entry 1 marks a negative embedding.
    """

    field: Field
    eps: tuple[FieldElement, FieldElement]
    logs: tuple[tuple, tuple]
    regulator: float
    regulator_err: float
    signatures: tuple[tuple[int, int, int], ...]
    found: tuple[FieldElement, ...]
    bound: float

    @property
    def log_matrix(self) -> np.ndarray:
        """2x3 float matrix of log|eps_k^(i)|."""
        return np.array([[float(x) for x in row] for row in self.logs])

    def unit(self, sign: int, e1: int, e2: int) -> FieldElement:
        u = self.eps[0] ** e1 * self.eps[1] ** e2
        return u if sign > 0 else -u

    def coordinates(self, logvec) -> np.ndarray:
        """Coordinates of a (first two) log vector in the basis of eps log vectors."""
        lm = self.log_matrix[:, :2].T
        return np.linalg.solve(lm, np.asarray(logvec, dtype=float)[:2])


def _mp_det2(l1, l2):
    return l1[0] * l2[1] - l1[1] * l2[0]


def _mp_dot(x, y):
    return sum(a * b for a, b in zip(x, y))


def _lattice_from_units(fld: Field, units: Sequence[FieldElement]):
    """Basis (as units) of the lattice spanned by the log vectors of ``units``."""
    logs = {u: log_vector(fld, u) for u in units}
    vecs = sorted(units, key=lambda u: float(_mp_dot(logs[u], logs[u])))
    b1 = vecs[0]
    b2 = next(
        (u for u in vecs[1:] if abs(_mp_det2(logs[b1], logs[u])) > 1e-8),
        None,
    )
    if b2 is None:
        raise UnitSearchError("bound too small: fewer than two independent units found")
    pool = list(vecs)
    changed = True
    while changed:
        changed = False
        det = _mp_det2(logs[b1], logs[b2])
        for u in pool:
            x1 = _mp_det2(logs[u], logs[b2]) / det
            x2 = _mp_det2(logs[b1], logs[u]) / det
            r1, r2 = round(float(x1)), round(float(x2))
            if abs(x1 - r1) < 1e-8 and abs(x2 - r2) < 1e-8:
                continue
            f1, f2 = math.floor(float(x1)), math.floor(float(x2))
            w = u * b1 ** (-f1) * b2 ** (-f2)
            logs[w] = log_vector(fld, w)
            if abs(x2 - f2) > 1e-8:
                pool.append(b2)
                b2 = w
            else:
                pool.append(b1)
                b1 = w
            changed = True
            break
    return _gauss_reduce_units(fld, b1, b2, logs)


def _gauss_reduce_units(fld, b1, b2, logs):
    while True:
        n1 = _mp_dot(logs[b1], logs[b1])
        n2 = _mp_dot(logs[b2], logs[b2])
        if n1 > n2:
            b1, b2 = b2, b1
            n1, n2 = n2, n1
        mu = _mp_dot(logs[b1], logs[b2]) / n1
        # |mu| = 1/2 occurs for hexagonal unit lattices (cyclic fields)
        if abs(mu) <= 0.5 + 1e-12:
            break
        q = int(mpmath.nint(mu))
        b2 = b2 * b1 ** (-q)
        logs[b2] = log_vector(fld, b2)
    # deterministic orientation: positive determinant, small elements
    if _mp_det2(logs[b1], logs[b2]) < 0:
        b2 = fld.unit_inverse(b2)
        logs[b2] = log_vector(fld, b2)
    return b1, b2


def _normalize_sign(u: FieldElement) -> FieldElement:
    first = next((x for x in u.coords if x), 0)
    return -u if first < 0 else u


def find_units(fld: Field, bound: float = 2.0, max_bound: float | None = None) -> UnitSystem:
    """Fundamental units from an exhaustive search of {|z^(i)| <= e^bound}.

    With ``max_bound`` the bound grows in steps of 2 until two independent
    units appear; otherwise a search that finds fewer than two fails with
    "bound too small".
    """
    cap = min(max_bound if max_bound is not None else bound, HARD_CAP)
    while True:
        units = enumerate_units(fld, bound)
        units = [u for u in units if u != fld.one and u != -fld.one]
        try:
            if not units:
                raise UnitSearchError("bound too small: no nontrivial unit found")
            e1, e2 = _lattice_from_units(fld, units)
            break
        except UnitSearchError:
            if bound + 2 <= cap:
                bound += 2
                continue
            raise UnitSearchError(f"bound too small: fewer than two independent units within e^{bound:g}") from None
    e1, e2 = _normalize_sign(e1), _normalize_sign(e2)
    l1, l2 = log_vector(fld, e1), log_vector(fld, e2)
    if _mp_det2(l1, l2) < 0:
        e1, e2, l1, l2 = e2, e1, l2, l1
    _check_fundamental(fld, units, l1, l2)
    reg, err = _regulator(l1, l2)
    sigs = ((1, 1, 1), fld.signature(e1), fld.signature(e2))
    return UnitSystem(fld, (e1, e2), (l1, l2), reg, err, sigs, tuple(units), float(bound))


def _check_fundamental(fld, units, l1, l2):
    det = _mp_det2(l1, l2)
    for u in units:
        lu = log_vector(fld, u)
        x = (_mp_det2(lu, l2) / det, _mp_det2(l1, lu) / det)
        if all(abs(xi - mpmath.nint(xi)) < 1e-10 for xi in x):
            continue
        for q in (2, 3, 5, 7):
            if all(abs(q * xi - mpmath.nint(q * xi)) < 1e-10 for xi in x):
                raise RuntimeError(f"unit {u!r} lies in (1/{q}) of the unit lattice: basis not fundamental")
        raise RuntimeError(f"unit {u!r} lies outside the generated unit lattice")


def _regulator(l1, l2) -> tuple[float, float]:
    with mpmath.workdps(_MP_DPS):
        r = abs(_mp_det2(l1, l2))
    # logs carry ~2^-150 relative error; report a conservative bound
    return float(r), 1e-30 * max(1.0, float(r))


def regulator(us: UnitSystem) -> float:
    """|det| of the 2x2 matrix of log|eps_k^(j)|, j = 1, 2."""
    return _regulator(*us.logs)[0]


def regulator_of(fld: Field, e1: FieldElement, e2: FieldElement) -> float:
    return _regulator(log_vector(fld, e1), log_vector(fld, e2))[0]


# -- signatures and totally positive generators ----------------------------------


def _xor(s, t):
    return tuple((a + b) % 2 for a, b in zip(s, t))


@dataclass(frozen=True)
class TotallyPositiveGens:
    """Totally positive u_1, u_2 generating U with -1, and the lattices Lambda_U, Lambda_U*.

    ``exponents`` rows give u_l = sign_l * eps_1^{m_l1} * eps_2^{m_l2}.
    ``lam`` rows are lambda_l = (log|u^(1)| - log|u^(3)|, log|u^(2)| - log|u^(3)|);
    ``dual`` rows are the dual basis: dual[i] . lam[j] = delta_ij.
    """

    u: tuple[FieldElement, FieldElement]
    exponents: tuple[tuple[int, int], tuple[int, int]]
    signs: tuple[int, int]
    lam: np.ndarray
    dual: np.ndarray
    index: int

    def lam_of_eps(self) -> tuple[tuple[Fraction, Fraction], tuple[Fraction, Fraction]]:
        """Exact coordinates of lambda(eps_k) in the lambda_l basis (half-integers)."""
        m = self.exponents
        det = m[0][0] * m[1][1] - m[0][1] * m[1][0]
        # eps_k = sum_l x_kl u_l in log space: x = inverse(m)^T rows
        inv = ((Fraction(m[1][1], det), Fraction(-m[0][1], det)), (Fraction(-m[1][0], det), Fraction(m[0][0], det)))
        return inv


def _lam(l) -> np.ndarray:
    return np.array([float(l[0] - l[2]), float(l[1] - l[2])])


def totally_positive_gens(us: UnitSystem) -> TotallyPositiveGens:
    fld = us.field
    s_neg, s1, s2 = us.signatures
    admissible = []
    for a1, a2 in itertools.product((0, 1), repeat=2):
        sig = (0, 0, 0)
        if a1:
            sig = _xor(sig, s1)
        if a2:
            sig = _xor(sig, s2)
        if sig in ((0, 0, 0), s_neg):
            admissible.append((a1, a2))
    adm = set(admissible)
    if len(adm) == 4:
        exps = ((1, 0), (0, 1))
    elif len(adm) == 2:
        (a,) = [x for x in adm if x != (0, 0)]
        if a == (1, 1):
            exps = ((1, 1), (0, 2))
        elif a == (1, 0):
            exps = ((1, 0), (0, 2))
        else:
            exps = ((2, 0), (0, 1))
    else:
        exps = ((2, 0), (0, 2))
    gens, signs = [], []
    for e1, e2 in exps:
        u = us.unit(1, e1, e2)
        if fld.certified_sign(u, 0) < 0:
            u, sgn = -u, -1
        else:
            sgn = 1
        if not fld.is_totally_positive(u):
            raise RuntimeError("signature bookkeeping failed to produce a totally positive unit")
        gens.append(u)
        signs.append(sgn)
    logs = us.logs
    lam_rows = []
    for e1, e2 in exps:
        l = tuple(e1 * logs[0][i] + e2 * logs[1][i] for i in range(3))
        lam_rows.append(_lam(l))
    lam = np.array(lam_rows)
    dual = np.linalg.inv(lam).T
    index = 4 // len(adm)
    return TotallyPositiveGens(tuple(gens), exps, tuple(signs), lam, dual, index)


@dataclass(frozen=True, order=True)
class SignCharacter:
    """v(z) = prod sgn(z^(i))^e_i."""

    e: tuple[int, int, int]

    def __post_init__(self):
        if len(self.e) != 3 or any(x not in (0, 1) for x in self.e):
            raise ValueError(f"sign character exponents must be 0/1 triples, got {self.e}")

    @classmethod
    def parse(cls, text: str) -> "SignCharacter":
        text = text.strip().replace(",", "")
        if len(text) != 3 or set(text) - {"0", "1"}:
            raise ValueError(f"character must look like '011', got {text!r}")
        return cls(tuple(int(ch) for ch in text))

    @property
    def is_trivial(self) -> bool:
        return not any(self.e)

    def on_signature(self, sig) -> int:
        return -1 if sum(a * b for a, b in zip(self.e, sig)) % 2 else 1

    def __call__(self, fld: Field, z: FieldElement) -> int:
        return self.on_signature(fld.signature(z))

    def __str__(self):
        return "".join(str(x) for x in self.e)


def good_characters(us: UnitSystem) -> list[SignCharacter]:
    """Sign characters trivial on every unit (always includes the trivial one)."""
    out = []
    for e in itertools.product((0, 1), repeat=3):
        v = SignCharacter(e)
        if all(v.on_signature(s) == 1 for s in us.signatures):
            out.append(v)
    return out


@dataclass(frozen=True)
class GoodMu:
    coords: tuple[int, int]
    vector: tuple[float, float]

    @property
    def components(self) -> tuple[float, float, float]:
        m1, m2 = self.vector
        return (m1, m2, -m1 - m2)


def good_mu_for(v: SignCharacter, tp: TotallyPositiveGens, us: UnitSystem, radius: float) -> list[GoodMu]:
    """All mu in Lambda_U* with |mu| <= radius for which (mu, v) is good.

    <mu, lambda(eps)> is a half-integer because eps^2 lies in U, so the
    float pairing is rounded to the nearest half-integer (tolerance 0.25)
    and compared with v(eps).
    """
    if v.on_signature(us.signatures[0]) != 1:
        return []
    veps = [v.on_signature(s) for s in us.signatures[1:]]
    lam_eps = [_lam(l) for l in us.logs]
    exact = tp.lam_of_eps()
    dual = tp.dual
    # all dual-lattice points in the ball: bound coordinates via the Gram matrix
    gram = dual @ dual.T
    ginv = np.linalg.inv(gram)
    kmax = [int(math.floor(radius * math.sqrt(ginv[i, i]))) + 1 for i in range(2)]
    out = []
    for m1 in range(-kmax[0], kmax[0] + 1):
        for m2 in range(-kmax[1], kmax[1] + 1):
            mu = m1 * dual[0] + m2 * dual[1]
            if float(np.hypot(*mu)) > radius + 1e-12:
                continue
            good = True
            for k in range(2):
                pairing = float(mu @ lam_eps[k])
                half = round(2 * pairing) / 2
                if abs(pairing - half) > 0.25:
                    raise RuntimeError("pairing with a unit log vector is not a half-integer")
                ex = m1 * exact[k][0] + m2 * exact[k][1]
                if Fraction(half).limit_denominator(2) != ex:
                    raise RuntimeError("float and exact pairings disagree")
                want = 0 if veps[k] == 1 else Fraction(1, 2)
                if (ex - want) % 1 != 0:
                    good = False
                    break
            if good:
                out.append(GoodMu((m1, m2), (float(mu[0]), float(mu[1]))))
    out.sort(key=lambda g: (g.vector[0] ** 2 + g.vector[1] ** 2, g.coords))
    return out
