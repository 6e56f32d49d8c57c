import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from trace_census.asymptotics import (
    PUBLISHED_FIT,
    SmallKWarning,
    WeightedSumTable,
    compare_report,
    fit_coefficients,
    log_grid,
    main_coefficient,
    weighted_sum,
    weighted_sum_table,
)
from trace_census.counting import CountSeries, error_series
from trace_census.lseries import LValue
from trace_census.units import SignCharacter


def _synthetic(E):
    X = len(E)
    z = np.zeros(X)
    return CountSeries(X, 1, np.zeros(X, dtype=np.int64), z, np.asarray(E, dtype=float))


def test_weighted_sum_trivial_cases(k257):
    s = error_series(k257, 50)
    assert weighted_sum(s, 1, 3) == 0.0
    with pytest.warns(SmallKWarning):
        assert weighted_sum(s, 50, 0) == pytest.approx(math.fsum(s.E.tolist()), abs=1e-12)
    with pytest.raises(ValueError):
        weighted_sum(s, 51, 3)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 400), st.integers(3, 6))
def test_weighted_sum_linear(seed, X, k):
    rng = np.random.default_rng(seed)
    e1 = rng.normal(size=X)
    e2 = rng.normal(size=X)
    s12 = weighted_sum(_synthetic(e1 + e2), X, k)
    s1 = weighted_sum(_synthetic(e1), X, k)
    s2 = weighted_sum(_synthetic(e2), X, k)
    scale = weighted_sum(_synthetic(np.abs(e1) + np.abs(e2)), X, k)
    assert abs(s12 - (s1 + s2)) <= 1e-9 * max(scale, 1e-300)


def test_log_grid():
    g = log_grid(100, 100_000)
    assert g[0] == 100 and g[-1] == 100_000
    assert len(g) == 61
    assert g == sorted(set(g))


def test_fit_exact_model():
    X = np.array(log_grid(100, 1e6), dtype=np.int64)
    S = 7 * np.log(X.astype(float)) ** 4
    res = fit_coefficients(WeightedSumTable(3, X, S), 2)
    assert res.leading == pytest.approx(7, rel=1e-10)
    assert np.allclose(res.coefficients[1:], 0, atol=1e-8)
    assert res.residual < 1e-9 * np.linalg.norm(S)
    assert res.powers == (4, 3, 2)
    assert not res.ill_conditioned


def test_fit_preconditions():
    X = np.array([100, 200, 300], dtype=np.int64)
    with pytest.raises(ValueError):
        fit_coefficients(WeightedSumTable(3, X, np.ones(3)), 2)


def test_fit_ill_conditioned_flag():
    X = np.array(log_grid(1e4, 1e5 + 1, 40), dtype=np.int64)
    lx = np.log(X.astype(float))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        res = fit_coefficients(WeightedSumTable(12, X, lx**13), 11)
    assert res.ill_conditioned and res.condition > 1e12


def test_fit_toy_profile_converges():
    # E_n = (k+1) log^k(n) / n: S(X) = sum_{n<=X} E_n log^k(X/n) has leading term
    # c log^{2k+1} X with c = (k+1) B(k+1, k+1)
    k = 1
    c = (k + 1) * math.gamma(k + 1) ** 2 / math.gamma(2 * k + 2)
    n = np.arange(1, 200_001, dtype=float)
    E = (k + 1) * np.log(n) ** k / n
    s = _synthetic(E)
    errs = []
    for xmax in (2_000, 20_000, 200_000):
        grid = log_grid(100, xmax)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", SmallKWarning)
            S = np.array([weighted_sum(s, x, k) for x in grid])
        X = np.array(grid)
        res = fit_coefficients(WeightedSumTable(2 * k, X, S), 2)
        errs.append(abs(res.leading - c))
    assert errs[-1] < errs[0]
    assert errs[-1] < 0.05 * c


def test_main_coefficient(k257, us257, k49, us49):
    lv = LValue(0.5444034309352054, 1e-12, 100_000)
    v = SignCharacter((0, 1, 1))
    c3 = main_coefficient(k257, us257, 3, {v: lv})
    assert c3.value == pytest.approx(0.041983745, rel=1e-3)
    c5 = main_coefficient(k257, us257, 5, {v: lv})
    assert c3.value / c5.value == pytest.approx(6 / 4, rel=1e-14)
    assert c3.error >= c3.value / c3.R * us257.regulator_err + c3.prefactor * lv.error_estimate - 1e-30
    with pytest.raises(ValueError, match="do not match"):
        main_coefficient(k257, us257, 3, {})
    z = main_coefficient(k49, us49, 3, {})
    assert z.value == 0.0
    with pytest.raises(ValueError, match="do not match"):
        main_coefficient(k49, us49, 3, {v: lv})


def test_degree0_biased_low(series257):
    grid = log_grid(1e3, 1e5)
    t = weighted_sum_table(series257, grid, 3)
    f0 = fit_coefficients(t, 0)
    f2 = fit_coefficients(t, 2)
    assert f0.leading < f2.leading
    assert all(c < 0 for c in f2.coefficients[1:])


def test_normalized_increasing(series257):
    t = weighted_sum_table(series257, [1000, 10_000, 100_000], 3)
    q = t.normalized
    assert q[0] < q[1] < q[2] < PUBLISHED_FIT[0]


def test_compare_report(k257, us257, k49, us49, series257):
    lv = LValue(0.5444034309352054, 0.0, 100_000)
    c = main_coefficient(k257, us257, 3, {SignCharacter((0, 1, 1)): lv})
    grid = [1000, 10_000, 100_000]
    a = compare_report(series257, 3, c, grid)
    b = compare_report(series257, 3, c, grid)
    assert a == b
    lines = a.splitlines()
    assert lines[0] == "X,S(X),S/log^4X,predicted_leading"
    assert len(lines) == 4
    r3 = compare_report(series257, 3, c, grid, PUBLISHED_FIT[1:])
    assert r3.splitlines()[0].endswith(",predicted_3term")
    s49 = error_series(k49, 1000)
    z = compare_report(s49, 3, main_coefficient(k49, us49, 3, {}), [100, 1000])
    assert all(row.split(",")[3] == "0" for row in z.splitlines()[1:])
