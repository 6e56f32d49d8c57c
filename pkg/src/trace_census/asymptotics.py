"""Weighted error sums S(X), the predicted leading coefficient, and log-polynomial fits."""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .counting import CountSeries
from .field import Field
from .lseries import LValue
from .units import SignCharacter, UnitSystem, good_characters

__all__ = [
    "SmallKWarning",
    "WeightedSumTable",
    "MainCoefficient",
    "FitResult",
    "weighted_sum",
    "weighted_sum_table",
    "log_grid",
    "main_coefficient",
    "fit_coefficients",
    "compare_report",
    "PUBLISHED_FIT",
]

# three-term fit reported for D = 257, k = 3 (coefficients of log^4, log^3, log^2)
PUBLISHED_FIT = (0.041983745, -0.07792862, -0.35634540)
COND_LIMIT = 1e12


class SmallKWarning(UserWarning):
    """k < 3 lies outside the range where the asymptotic is proved."""


def weighted_sum(series: CountSeries, X: int, k: int = 3) -> float:
    """S(X) = sum_{n <= X} E_n log(X/n)^k, compensated."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    if X < 1:
        raise ValueError("X must be positive")
    if X > series.X:
        raise ValueError(f"X = {X} exceeds the series range {series.X}")
    if k < 3:
        warnings.warn(f"k = {k} < 3: outside the proven range", SmallKWarning, stacklevel=2)
    n = np.arange(1, X + 1, dtype=float)
    w = np.log(X / n) ** k if k else np.ones(X)
    return math.fsum((series.E[:X] * w).tolist())


def log_grid(xmin: float, xmax: float, per_decade: int = 20) -> list[int]:
    """Integer X values log-spaced with ``per_decade`` points per decade, deduplicated."""
    lo, hi = math.log10(xmin), math.log10(xmax)
    steps = int(round((hi - lo) * per_decade))
    pts = sorted({int(round(10 ** (lo + i / per_decade))) for i in range(steps + 1)})
    return [p for p in pts if xmin <= p <= xmax]


@dataclass(frozen=True)
class WeightedSumTable:
    k: int
    X: np.ndarray
    S: np.ndarray

    @property
    def normalized(self) -> np.ndarray:
        return self.S / np.log(self.X.astype(float)) ** (self.k + 1)


def weighted_sum_table(series: CountSeries, grid: Sequence[int], k: int = 3) -> WeightedSumTable:
    with warnings.catch_warnings():
        if k < 3:
            warnings.simplefilter("ignore", SmallKWarning)
        S = [weighted_sum(series, int(x), k) for x in grid]
    return WeightedSumTable(k, np.asarray(grid, dtype=np.int64), np.array(S))


@dataclass(frozen=True)
class MainCoefficient:
    value: float
    error: float
    k: int
    D: int
    R: float
    lvalues: dict = field(default_factory=dict)  # character string -> LValue

    @property
    def prefactor(self) -> float:
        return 3.0 * math.sqrt(self.D) / (8.0 * math.pi**2 * (self.k + 1) * self.R)


def main_coefficient(fld: Field, us: UnitSystem, k: int, lvals: dict[SignCharacter, LValue]) -> MainCoefficient:
    """C = 3 sqrt(D) / (8 pi^2 (k+1) R) * sum of L(1, v) over good nontrivial v."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    if k < 3:
        warnings.warn(f"k = {k} < 3: outside the proven range", SmallKWarning, stacklevel=2)
    wanted = {v for v in good_characters(us) if not v.is_trivial}
    given = set(lvals)
    if given != wanted:
        missing = sorted(str(v) for v in wanted - given)
        extra = sorted(str(v) for v in given - wanted)
        raise ValueError(f"L-values do not match the good nontrivial characters (missing {missing}, unexpected {extra})")
    R, dR = us.regulator, us.regulator_err
    pre = 3.0 * math.sqrt(fld.discriminant) / (8.0 * math.pi**2 * (k + 1) * R)
    total = math.fsum(lv.value for lv in lvals.values())
    value = pre * total
    # |dC/dR| dR + sum |dC/dL| dL
    err = abs(value) / R * dR + pre * math.fsum(lv.error_estimate for lv in lvals.values())
    return MainCoefficient(value, err, k, fld.discriminant, R, {str(v): lv for v, lv in sorted(lvals.items())})


@dataclass(frozen=True)
class FitResult:
    """Coefficients of log^{k+1} X, log^k X, ... (highest first)."""

    coefficients: np.ndarray
    powers: tuple[int, ...]
    residual: float
    condition: float
    ill_conditioned: bool

    @property
    def leading(self) -> float:
        return float(self.coefficients[0])


def fit_coefficients(table: WeightedSumTable, degree: int) -> FitResult:
    """Least squares of S(X) against log^{k+1-j} X, j = 0..degree."""
    if degree < 0:
        raise ValueError("degree must be nonnegative")
    X = table.X.astype(float)
    if X.size < degree + 2:
        raise ValueError(f"need at least {degree + 2} grid points for degree {degree}")
    if X.max() < 10 * X.min():
        raise ValueError("grid must span at least one decade")
    powers = tuple(table.k + 1 - j for j in range(degree + 1))
    lx = np.log(X)
    A = np.column_stack([lx**p for p in powers])
    # column scaling keeps the condition number meaningful
    scale = np.linalg.norm(A, axis=0)
    As = A / scale
    sol, *_ = np.linalg.lstsq(As, table.S, rcond=None)
    coef = sol / scale
    resid = float(np.linalg.norm(A @ coef - table.S))
    cond = float(np.linalg.cond(As))
    ill = cond > COND_LIMIT
    if ill:
        warnings.warn(f"ill-conditioned fit (condition number {cond:.3g})", RuntimeWarning, stacklevel=2)
    return FitResult(coef, powers, resid, cond, ill)


def compare_report(series: CountSeries, k: int, coeff: MainCoefficient | None, grid: Sequence[int],
                   subleading: Sequence[float] | None = None) -> str:
    """CSV text: X, S(X), S/log^{k+1}X, predicted_leading[, predicted_3term].

    ``subleading`` holds the log^k and log^{k-1} coefficients of the three-term curve.
    """
    table = weighted_sum_table(series, grid, k)
    lead = coeff.value if coeff is not None else 0.0
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    head = ["X", "S(X)", f"S/log^{k + 1}X", "predicted_leading"]
    if subleading is not None:
        head.append("predicted_3term")
    w.writerow(head)
    for x, s, q in zip(table.X, table.S, table.normalized):
        row = [int(x), f"{s:.12g}", f"{q:.12g}", f"{lead:.12g}"]
        if subleading is not None:
            lx = math.log(x)
            row.append(f"{lead + subleading[0] / lx + subleading[1] / lx**2:.12g}")
        w.writerow(row)
    return buf.getvalue()
