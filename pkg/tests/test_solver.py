from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad as scipy_quad

from oracles import mode_solution_fourier, trig_poly
from partialfourier import _trig
from partialfourier.diophantine import A0Class
from partialfourier.solver import (CoefficientA, NoSolutionError, ResonanceError, apply_L,
                                   apply_L_full, compatibility, homogeneous_witness,
                                   homogeneous_witness_coeffs, mode_residual, project_to_K,
                                   resonant, solve, solve_constant, solve_mode_nonresonant,
                                   solve_mode_resonant)
from partialfourier.transform import PartialCoeffField, TimeGrid, analyze_full, random_full_coeff

A_VAR = CoefficientA(1, [1.0])
A_MIX = CoefficientA(Fraction(1, 3), [0.4, -0.2], [0.3])


def test_coefficient_a_basics():
    a = CoefficientA(Fraction(1, 2), [0.3], [0.1, 0.2])
    assert a.degree == 2 and a.cos == (0.3, 0.0)
    t = np.linspace(0, 2 * np.pi, 7)
    np.testing.assert_allclose(a(t), 0.5 + 0.3 * np.cos(t) + 0.1 * np.sin(t) + 0.2 * np.sin(2 * t))
    assert a.primitive(0.0) == 0.0
    assert abs(a.primitive(2 * np.pi)) < 1e-14
    with pytest.raises(ValueError):
        CoefficientA(1, [np.nan])


def test_mean_equals_constant_term():
    mean = scipy_quad(lambda s: float(A_MIX(s)), 0, 2 * np.pi)[0] / (2 * np.pi)
    assert mean == pytest.approx(1 / 3, abs=1e-13)


@given(st.floats(0, 2 * np.pi), st.floats(0, 2 * np.pi))
def test_H_against_quadrature(t, s):
    ref = scipy_quad(lambda th: float(A_MIX(th)), t - s, t, epsabs=1e-13)[0]
    assert float(A_MIX.H(t, s)) == pytest.approx(ref, abs=1e-11)
    assert float(A_MIX.H_diag(t)) == pytest.approx(float(A_MIX.primitive(t)) + t / 3, abs=1e-13)


def test_derivatives_closed_form():
    t = np.linspace(0, 6, 11)
    h = 1e-5
    for k in range(3):
        fd = (A_MIX.derivative(t + h, k) - A_MIX.derivative(t - h, k)) / (2 * h)
        np.testing.assert_allclose(A_MIX.derivative(t, k + 1), fd, atol=1e-7)


def test_resonance_is_exact():
    a = CoefficientA(Fraction(1, 3))
    assert resonant(a, 0) and resonant(a, 3) and resonant(a, Fraction(3, 2)) is False
    assert not resonant(a, 1)
    assert resonant(CoefficientA("liouville"), 0)
    assert not resonant(CoefficientA("liouville"), 7)
    assert CoefficientA(0.5).a0.fraction == Fraction(1, 2)


def test_apply_L_examples():
    grid = TimeGrid(9)
    t = grid.points
    u = homogeneous_witness(grid, 3)
    for a in (A_VAR, A_MIX, CoefficientA(0)):
        assert apply_L(a, u).sup_norm() < 1e-13
    b = np.zeros((9, 3, 3), complex)
    b[:, 2, 2] = np.exp(1j * t)
    Lu = apply_L(CoefficientA(0), PartialCoeffField(grid, {2: b}))
    np.testing.assert_allclose(Lu[1][:, 2, 2], 1j * np.exp(1j * t), atol=1e-13)
    C = np.arange(9.0).reshape(3, 3)
    Lu = apply_L(CoefficientA(Fraction(3, 2)), PartialCoeffField(grid, {2: np.broadcast_to(C, (9, 3, 3))}))
    expected = 1j * 1.5 * np.array([-1, 0, 1])[:, None] * C
    np.testing.assert_allclose(Lu[1], np.broadcast_to(expected, (9, 3, 3)), atol=1e-13)


def test_nonresonant_examples():
    a = CoefficientA(Fraction(1, 2))
    t = TimeGrid(9).points
    np.testing.assert_allclose(solve_mode_nonresonant(a, 1, 1, 1, np.full(9, 3.0)), -6j, atol=1e-13)
    u = solve_mode_nonresonant(a, 1, 1, 1, np.exp(1j * t))
    np.testing.assert_allclose(u, np.exp(1j * t) / 1.5j, atol=1e-13)
    with pytest.raises(ResonanceError):
        solve_mode_nonresonant(a, 1, 0, 0, np.ones(9))
    with pytest.raises(ValueError):
        solve_mode_nonresonant(a, 1, 2, 0, np.ones(9))


@pytest.mark.parametrize("a", [A_VAR, A_MIX, CoefficientA("liouville", [0.5])])
def test_nonresonant_forms_agree_and_solve(a, rng):
    n = 15
    for tm in (1, 3, 5):
        if resonant(a, Fraction(tm, 2)):
            continue
        f, _, _ = trig_poly(rng, 7, n)
        um = solve_mode_nonresonant(a, 3, Fraction(tm, 2), Fraction(1, 2), f, out_n=129, form="minus")
        up = solve_mode_nonresonant(a, 3, Fraction(tm, 2), Fraction(1, 2), f, out_n=129, form="plus")
        assert np.abs(um - up).max() < 1e-10
        fine_f = _trig.resample(f, 129)
        assert mode_residual(a, Fraction(tm, 2), um, fine_f) < 1e-9 * (1 + np.abs(f).max())


def test_nonresonant_against_gauge_oracle(rng):
    # u = exp(-imA) v with v' + i m a0 v = exp(imA) f solved exactly in Fourier space
    a, m = A_MIX, 2.5
    n, N = 15, 512
    f, c, k = trig_poly(rng, 7, n)
    T = 2 * np.pi * np.arange(N) / N
    F = (np.exp(1j * np.outer(T, k)) * c).sum(1)
    g = np.exp(1j * m * a.primitive(T)) * F
    gc = np.fft.fft(g) / N
    kk = np.fft.fftfreq(N, 1 / N)
    v = mode_solution_fourier(1j * m / 3, gc, kk, T)
    expected = np.exp(-1j * m * a.primitive(T)) * v
    got = solve_mode_nonresonant(a, 2.5, 2.5, 0.5, f, out_n=N)
    assert np.abs(got - expected).max() < 1e-11


def test_resonant_examples():
    a = CoefficientA(0)
    t = TimeGrid(9).points
    u = solve_mode_resonant(a, 1, 1, 1, np.exp(1j * t))
    np.testing.assert_allclose(u, (np.exp(1j * t) - 1) / 1j, atol=1e-13)
    np.testing.assert_allclose(solve_mode_resonant(a, 0, 0, 0, np.zeros(9)), 0)
    # m = 0: plain antiderivative of a mean-zero mode
    u = solve_mode_resonant(A_VAR, 1, 0, 0, np.cos(2 * t))
    np.testing.assert_allclose(u, np.sin(2 * t) / 2, atol=1e-13)
    with pytest.raises(NoSolutionError) as exc:
        solve_mode_resonant(a, 0, 0, 0, np.ones(9))
    assert abs(exc.value.modes[0][1] - 2 * np.pi) < 1e-12
    with pytest.raises(ResonanceError):
        solve_mode_resonant(CoefficientA(Fraction(1, 2)), 1, 1, 1, np.ones(9))


def test_compatibility_examples():
    ok, v = compatibility(A_VAR, 1, 1, 0, np.zeros(9))
    assert ok and v == 0
    ok, v = compatibility(CoefficientA(0), 0, 0, 0, np.ones(9))
    assert not ok and v == pytest.approx(2 * np.pi)
    with pytest.raises(ResonanceError):
        compatibility(CoefficientA(Fraction(1, 2)), 1, 1, 1, np.ones(9))


def test_resonant_with_variable_a_residual(rng):
    grid = TimeGrid(15)
    f = random_full_coeff(rng, 2, 7).to_partial(grid, ell_max=2)
    fp = project_to_K(A_VAR, f)
    for tm in (-4, -2, 0, 2, 4):
        row = (tm + 4) // 2
        F = fp[2][:, row, 1]
        ok, _ = compatibility(A_VAR, 2, tm / 2, -1, F)
        assert ok
        u = solve_mode_resonant(A_VAR, 2, tm / 2, -1, F, out_n=257)
        assert mode_residual(A_VAR, tm / 2, u, _trig.resample(F, 257)) < 1e-9 * (1 + np.abs(F).max())


def test_solve_constant_forms(rng):
    t = np.linspace(0, 2 * np.pi, 13)
    for _ in range(10):
        lam = complex(rng.uniform(-2, 2), rng.uniform(-3, 3))
        f, c, k = trig_poly(rng, 4, 9)
        a = solve_constant(lam, f, t, "minus")
        b = solve_constant(lam, f, t, "plus")
        np.testing.assert_allclose(a, b, atol=1e-10)
        np.testing.assert_allclose(a, mode_solution_fourier(lam, c, k, t), atol=1e-10)


def test_solve_constant_zero_form():
    t = np.linspace(0, 2 * np.pi, 9)
    n = 9
    s = 2 * np.pi * np.arange(n) / n
    u = solve_constant(2j, np.exp(1j * s), t, "zero")
    # u' + 2i u = e^{it}, u(0) = 0: u = (e^{it} - e^{-2it}) / (3i)
    np.testing.assert_allclose(u, (np.exp(1j * t) - np.exp(-2j * t)) / 3j, atol=1e-12)
    with pytest.raises(ValueError):
        solve_constant(1.0, np.ones(3), t, "sideways")


def test_solve_projected_field(rng):
    grid = TimeGrid(11)
    f = random_full_coeff(rng, 2, 5).to_partial(grid, ell_max=2)
    out = solve(A_VAR, project_to_K(A_VAR, f))
    assert out.in_range
    assert out.max_residual() < 1e-9 * (1 + f.sup_norm())
    assert set(out.resonance_map.values()) == {"resonant", "nonresonant"}
    # Lu = f independently through apply_L on the solution grid
    fine = project_to_K(A_VAR, f).resample(out.solution.grid.n_t)
    assert (apply_L(A_VAR, out.solution) - fine).sup_norm() < 1e-9 * (1 + f.sup_norm())


def test_solve_detects_incompatible_modes():
    grid = TimeGrid(5)
    b = np.zeros((5, 1, 1), complex)
    b[:] = 0.7
    f = PartialCoeffField(grid, {0: b})
    out = solve(A_VAR, f)
    assert out.skipped_modes == [(0, 0, 0)]
    assert out.compat_values[(0, 0, 0)] == pytest.approx(2 * np.pi * 0.7)
    assert not out.in_range
    with pytest.raises(NoSolutionError):
        solve(A_VAR, f, on_incompatible="raise")


def test_torus_case_is_antiderivative(rng):
    grid = TimeGrid(9)
    t = grid.points
    b = np.zeros((9, 2, 2), complex)
    b[:, 0, 1] = np.cos(3 * t)
    b[:, 1, 0] = np.sin(t)
    out = solve(CoefficientA(0), PartialCoeffField(grid, {1: b}))
    ts = out.solution.grid.points
    np.testing.assert_allclose(out.solution[0.5][:, 0, 1], np.sin(3 * ts) / 3, atol=1e-12)
    np.testing.assert_allclose(out.solution[0.5][:, 1, 0], 1 - np.cos(ts), atol=1e-12)


def test_projection_keeps_nonresonant_modes(rng):
    a = CoefficientA(Fraction(1, 2), [0.5])
    grid = TimeGrid(9)
    f = random_full_coeff(rng, 1, 4).to_partial(grid, ell_max=1)
    fp = project_to_K(a, f)
    np.testing.assert_array_equal(fp[0.5], f[0.5])  # m = +-1/2 nonresonant
    assert solve(a, fp).in_range


def test_liouville_a0_only_m0_resonates():
    a = CoefficientA(A0Class.liouville(), [0.2])
    grid = TimeGrid(5)
    f = PartialCoeffField(grid, {2: np.zeros((5, 3, 3))})
    out = solve(a, f)
    assert out.resonance_map == {(2, -2): "nonresonant", (2, 0): "resonant", (2, 2): "nonresonant"}


def test_fourier_coefficients_of_a():
    t = TimeGrid(15).points
    vals = sum(c * np.exp(1j * k * t) for k, c in A_MIX.fourier().items())
    np.testing.assert_allclose(vals, A_MIX(t), atol=1e-15)


def test_apply_L_full_matches_grid(rng):
    fc = random_full_coeff(rng, 2, 3)
    L1 = apply_L_full(A_MIX, fc)
    assert L1.tau_max == 5
    grid = TimeGrid(11)
    L2 = analyze_full(apply_L(A_MIX, fc.to_partial(grid, ell_max=2)), 5)
    assert L1.keys() == L2.keys()
    assert max(np.abs(L1.entries[k] - L2.entries[k]).max() for k in L2.keys()) < 1e-13


def test_witness_coeffs_exact_kernel():
    w = homogeneous_witness_coeffs(3, 4)
    assert len(w) == 9 * 7
    for a in (A_VAR, A_MIX, CoefficientA("liouville", [0.0, 2.0])):
        assert all(np.all(b == 0) for b in apply_L_full(a, w).entries.values())
    u = homogeneous_witness(TimeGrid(9), 3)
    fc = analyze_full(u, 4)
    assert max(np.abs(fc.entries[k] - w.entries[k]).max() for k in w.keys()) < 1e-15
