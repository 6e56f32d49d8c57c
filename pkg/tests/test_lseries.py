import collections
import math
import random

import numpy as np
import pytest

from trace_census.lseries import (
    LValue,
    enumerate_principal,
    l_value,
    principal_ideals_bruteforce,
    sharp_partial_sum,
    smoothed_sum,
)
from trace_census.units import SignCharacter

V011 = SignCharacter((0, 1, 1))


def test_unit_ideal_once(k257, us257):
    s = enumerate_principal(k257, us257, 5)
    norms = s.norms.tolist()
    assert norms.count(1) == 1
    assert s.generator(0) == k257.one
    # (1 + a) has norm 3
    assert 3 in norms


def test_memory_guard(k257, us257):
    with pytest.raises(ValueError, match="memory guard"):
        enumerate_principal(k257, us257, 10**8 + 1)
    with pytest.raises(ValueError):
        enumerate_principal(k257, us257, 0)


@pytest.mark.parametrize("which", ["257", "49"])
def test_matches_bruteforce(which, k257, us257, k49, us49):
    fld, us = (k257, us257) if which == "257" else (k49, us49)
    s = enumerate_principal(fld, us, 200)
    got = dict(sorted(collections.Counter(s.norms.tolist()).items()))
    assert got == principal_ideals_bruteforce(fld, 200, 8)


def test_nondecreasing_count(k257, us257):
    counts = [len(enumerate_principal(k257, us257, b)) for b in (10, 50, 100, 200, 400)]
    assert counts == sorted(counts)


def test_no_double_count_under_units(k257, us257):
    s = enumerate_principal(k257, us257, 50)
    gens = [g for g, _, _ in s]
    e1, e2 = us257.eps
    keys = {g.coords for g in gens} | {(-g).coords for g in gens}
    for g in gens:
        for u in (e1, e2, e1 * e2, k257.unit_inverse(e1)):
            w = g * u
            assert w.coords not in keys or w == g


def test_generators_pairwise_non_associate(k257, us257):
    s = enumerate_principal(k257, us257, 60)
    by_norm = collections.defaultdict(list)
    for g, n, _ in s:
        by_norm[n].append(g)
    for n, gs in by_norm.items():
        for i in range(len(gs)):
            for j in range(i + 1, len(gs)):
                assert not k257.divides(gs[i], gs[j])


def test_character_well_defined_on_ideals(k257, us257):
    s = enumerate_principal(k257, us257, 300)
    rng = random.Random(9)
    idx = rng.sample(range(len(s)), 100)
    for k in idx:
        z = s.generator(k)
        u = us257.unit(rng.choice((1, -1)), rng.randint(-2, 2), rng.randint(-2, 2))
        assert V011(k257, u * z) == V011(k257, z)
        assert V011(k257, -z) == V011(k257, z)
    vals = s.values(V011)
    for k in idx:
        assert vals[k] == V011(k257, s.generator(k))


def test_l_value_rejections(k257, us257, k49, us49):
    with pytest.raises(ValueError, match="pole"):
        l_value(k257, us257, SignCharacter((0, 0, 0)), 1000)
    with pytest.raises(ValueError, match="not good"):
        l_value(k257, us257, SignCharacter((1, 1, 0)), 1000)
    with pytest.raises(ValueError, match="not good"):
        l_value(k49, us49, V011, 1000)


def test_l_value_k257(k257, us257, stream257):
    lv = l_value(k257, us257, V011, 10_000, stream=stream257)
    assert isinstance(lv, LValue) and lv.s == 1 and lv.B_used == 10_000
    assert lv.error_estimate >= abs(lv.value_B - lv.value_2B)
    assert lv.value == pytest.approx(0.5444034309352, abs=1e-10)
    c = 3 * math.sqrt(257) / (32 * math.pi**2 * us257.regulator) * lv.value
    assert c == pytest.approx(0.041983745, rel=1e-3)


def test_smoothing_stability(k257, us257, stream257):
    scaled = []
    for B in (10_000, 20_000, 40_000):
        lv = l_value(k257, us257, V011, B, stream=stream257)
        scaled.append(lv.error_estimate * B)
    # the difference decays at least like 1/B
    assert max(scaled) < 1e-6


def test_sharp_sums_bracket_smoothed(k257, us257, stream257):
    B = 2000
    sm = smoothed_sum(stream257, V011, B)
    sharp = [sharp_partial_sum(stream257, V011, c) for c in range(B // 2, 2 * B + 1, 25)]
    assert min(sharp) <= sm <= max(sharp)


def test_smoothed_sum_needs_range(k257, us257):
    s = enumerate_principal(k257, us257, 1000)
    with pytest.raises(ValueError):
        smoothed_sum(s, V011, 1000)


def test_compensated_sum_order_independent(stream257):
    v = stream257.values(V011)
    n = stream257.norms.astype(float)
    terms = (v / n * np.exp(-n / 1000.0))[n <= 35000]
    perm = np.random.default_rng(0).permutation(terms.size)
    assert math.fsum(terms.tolist()) == math.fsum(terms[perm].tolist())
