import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from partialfourier.classify import (NEITHER, POLY, RAPID, TestBattery, classify_full,
                                     classify_partial_smooth, classify_sequence, decay_table,
                                     pair_with_battery, seminorm_bound_check)
from partialfourier.diophantine import A0Class, forced_solution, nonsolvable_rhs, witnesses
from partialfourier.repr_core import weight_su2, weight_torus
from partialfourier.solver import homogeneous_witness
from partialfourier.su2 import quadrature_for_bandlimit
from partialfourier.transform import (FullCoeff, PartialCoeffField, TimeGrid, analyze_full,
                                      analyze_partial, random_full_coeff, synthesize)


def box(fn, tau_max=8, tw_max=8):
    return FullCoeff({(tau, tw): fn(tau, tw) * np.eye(tw + 1)
                      for tau in range(-tau_max, tau_max + 1) for tw in range(tw_max + 1)})


def test_exponential_is_rapid():
    r = classify_full(box(lambda tau, tw: math.exp(-(abs(tau) + tw / 2)), 10, 20))
    assert r.verdict == RAPID and r.failed_orders == []
    assert all(math.isfinite(C) for C in r.constants.values())


def test_counter_witness_is_poly_not_rapid():
    u = homogeneous_witness(TimeGrid(17), 6)
    r = classify_full(analyze_full(u, 8))
    assert r.verdict == POLY and r.poly_order == 0
    # a long time axis must not hide the missing decay in ell
    r = classify_full(analyze_full(u.resample(65), 32))
    assert r.verdict == POLY and r.poly_order == 0


def test_linear_growth_is_poly_order_one():
    r = classify_full(box(lambda tau, tw: weight_torus(tau) + weight_su2(tw)))
    assert r.verdict == POLY and r.poly_order == 1
    assert r.fitted_exponent == pytest.approx(1.0, abs=1e-9)


def test_empty_input_rejected():
    with pytest.raises(ValueError):
        classify_full(FullCoeff({}))
    with pytest.raises(ValueError):
        classify_sequence([], [])


def test_neither_when_growth_exceeds_cap():
    w = np.linspace(1, 50, 40)
    r = classify_sequence(np.log(w), 5 * np.log(w), poly_cap=3)
    assert r.verdict == NEITHER


def test_partial_examples():
    grid = TimeGrid(9)
    t = grid.points
    blocks = {tw: math.exp(-tw / 2) * np.exp(1j * t)[:, None, None] * np.eye(tw + 1) for tw in range(41)}
    assert classify_partial_smooth(PartialCoeffField(grid, blocks), 3).verdict == RAPID
    ident = {tw: np.broadcast_to(np.eye(tw + 1), (9, tw + 1, tw + 1)) for tw in range(21)}
    r = classify_partial_smooth(PartialCoeffField(grid, ident), 2)
    assert r.verdict == POLY and r.poly_order == 0 and r.failed_orders == [1, 2, 3, 4]


def test_partial_agrees_with_full_on_smooth_random(rng):
    fc = random_full_coeff(rng, 8, 6, decay=2.5)
    pc = fc.to_partial(TimeGrid(13), ell_max=8)
    assert classify_partial_smooth(pc, 2).verdict == RAPID
    assert classify_full(fc).verdict == RAPID


@settings(max_examples=15)
@given(st.integers(0, 10**6))
def test_band_limited_field_is_rapid(seed):
    rng = np.random.default_rng(seed)
    grid, quad = TimeGrid(33), quadrature_for_bandlimit(1)
    f = synthesize(random_full_coeff(rng, 1, 2), quad, grid)
    pc = analyze_partial(f, grid, quad, 1)
    # pad the SU(2) side with empty blocks beyond the band
    pc = PartialCoeffField(grid, {**pc.blocks, **{tw: np.zeros((33, tw + 1, tw + 1)) for tw in range(3, 17)}})
    assert classify_full(analyze_full(pc, 16)).verdict == RAPID


@given(st.floats(0.1, 3.0), st.integers(1, 6), st.integers(0, 10**6))
def test_monotone_under_added_tail(rate, extra, seed):
    rng = np.random.default_rng(seed)
    w = np.arange(1.0, 20.0)
    c = np.exp(-rate * w) * rng.uniform(0.5, 1.0, w.size)
    base = classify_sequence(np.log(w), np.log(c), reference_weight=5.0)
    w2 = np.concatenate([w, np.arange(20.0, 20.0 + extra)])
    c2 = np.concatenate([c, rng.uniform(0, 1, extra)])
    more = classify_sequence(np.log(w2), np.log(c2), reference_weight=5.0)
    assert set(base.failed_orders) <= set(more.failed_orders)


def test_liouville_rhs_rapid_and_forced_solution_not():
    a0 = A0Class.liouville()
    rhs = nonsolvable_rhs(a0, witnesses(a0, 4).witnesses)
    assert classify_full(rhs).verdict == RAPID
    sol = classify_full(forced_solution(a0, rhs))
    assert sol.verdict == POLY and sol.poly_order == 0


def test_seminorm_dirac_passes_k0():
    funcs = {tw: 1.0 for tw in range(41)}
    assert seminorm_bound_check(funcs, 0)


@pytest.mark.parametrize("K0", [1, 2, 3])
def test_seminorm_power_growth(K0):
    funcs = {tw: (tw / 2) ** K0 for tw in range(201)}
    assert seminorm_bound_check(funcs, K0)
    assert not seminorm_bound_check(funcs, K0 - 1)


def test_seminorm_counter_witness_is_a_distribution():
    u = homogeneous_witness(TimeGrid(9), 10)
    pairs = pair_with_battery(u, TestBattery(4))
    assert seminorm_bound_check(pairs, 0, TestBattery(4))


def test_battery_seminorm_values():
    b = TestBattery(2)
    np.testing.assert_array_equal(b.frequencies, [-2, -1, 0, 1, 2])
    np.testing.assert_array_equal(b.seminorm(0), [1, 1, 1, 1, 1])
    np.testing.assert_array_equal(b.seminorm(2), [7, 3, 1, 3, 7])


def test_pairing_is_exact_integral():
    grid = TimeGrid(9)
    t = grid.points
    u = PartialCoeffField(grid, {0: np.exp(-2j * t)[:, None, None]})
    pairs = pair_with_battery(u, TestBattery(3))
    expected = np.zeros(7)
    expected[5] = 2 * np.pi  # phi = e^{2it}
    np.testing.assert_allclose(pairs[0], expected, atol=1e-12)


def test_report_serializable_and_table():
    fc = box(lambda tau, tw: 1.0, 1, 1)
    r = classify_full(fc)
    d = r.to_dict()
    assert d["verdict"] == r.verdict and all(isinstance(k, str) for k in d["constants"])
    rows = decay_table(fc)
    assert len(rows) == len(fc)
    assert rows[0][2] == pytest.approx(weight_torus(-1) + 1)
