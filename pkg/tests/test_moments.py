import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm as scipy_expm

from noise_reg.core import DegenerateSpectrum, MomentVector, NonPositiveSigma, ZeroFrequency
from noise_reg.moments import (
    build_moment_matrix,
    complex_regime_boundary,
    decompose_initial,
    eigen_data,
    eigenvalues,
    evolve_moments_exact,
    evolve_moments_expm,
    expm,
    propagate,
    spectral_abscissa_bound,
    weighted_energy,
)
from oracles import lambda_plus_direct, rk4_moments


@pytest.mark.parametrize(
    "xi, sigma, expected",
    [
        (1.0, math.sqrt(2.0), [[0, 2, 0], [1, -1, 1], [0, 2, 0]]),
        (0.0, 1.0, [[0, 2, 0], [0, 0, 1], [0, 0, 0]]),
        (2.0, 1.0, [[0, 2, 0], [2, -2, 1], [0, 4, 0]]),
    ],
)
def test_build_moment_matrix(xi, sigma, expected):
    np.testing.assert_allclose(build_moment_matrix(xi, sigma), expected, atol=1e-15)


def test_eigen_data_xi2():
    ed = eigen_data(2.0, 1.0)
    assert ed.gamma == 2.0
    assert ed.delta == 6.0
    assert ed.lambda_plus == 2.0
    assert ed.lambda_minus == -4.0


@pytest.mark.parametrize("xi", [0.0, -4.0])
def test_eigen_data_degenerate(xi):
    with pytest.raises(DegenerateSpectrum):
        eigen_data(xi, 1.0)


def test_degenerate_point_matches_regime_boundary():
    assert complex_regime_boundary(1.0) == pytest.approx(-4.0, rel=1e-15)
    assert complex_regime_boundary(2.0) == pytest.approx(-(4.0 ** (1 / 3)), rel=1e-14)


def test_eigen_data_complex_regime():
    ed = eigen_data(-1.0, 1.0)
    assert ed.gamma == 0.5
    assert ed.delta.real == 0.0
    assert ed.delta.imag == pytest.approx(math.sqrt(15.75), rel=1e-15)
    assert ed.lambda_plus.real == pytest.approx(-0.25, rel=1e-14)


def test_eigen_data_requires_noise():
    with pytest.raises(NonPositiveSigma):
        eigen_data(1.0, 0.0)


xis = st.floats(-1e3, 1e3, allow_nan=False).filter(lambda x: abs(x) > 1e-6)
sigmas = st.floats(0.05, 8.0)


@given(xi=xis, sigma=sigmas)
def test_vieta_and_stable_branch(xi, sigma):
    gamma, delta, lp, lm = (complex(v) for v in eigenvalues(xi, sigma))
    assert abs(lp + lm + gamma) <= 1e-12 * (abs(gamma) + abs(lp) + abs(lm))
    assert abs(lp * lm + 4 * xi) <= 1e-12 * abs(4 * xi)
    # stable evaluation agrees with the textbook formula where that one is accurate
    direct = complex(lambda_plus_direct(xi, sigma))
    assert abs(lp - direct) <= 1e-12 * (1 + abs(gamma))
    if xi > 0:
        assert delta.imag == 0 and delta.real > 0


@given(xi=xis, sigma=sigmas)
def test_eigen_residuals(xi, sigma):
    try:
        ed = eigen_data(xi, sigma)
    except DegenerateSpectrum:
        return
    a = build_moment_matrix(xi, sigma)
    for lam, v in ((0.0, ed.v0), (ed.lambda_plus, ed.v_plus), (ed.lambda_minus, ed.v_minus)):
        r = np.abs(a @ v - lam * v).max()
        assert r <= 1e-10 * (1 + abs(lam)) * np.abs(v).max()


def test_decompose_eigenvector_input():
    ed = eigen_data(2.0, 1.0)
    q = decompose_initial(MomentVector(1, 1, 2), ed)
    assert (q.q0, q.q_plus, q.q_minus) == pytest.approx((0, 1, 0), abs=1e-15)


def test_decompose_matches_linear_solve():
    ed = eigen_data(2.0, 1.0)
    q = decompose_initial(MomentVector(1, 0, 0), ed)
    solved = np.linalg.solve(ed.basis(), np.array([1, 0, 0], dtype=complex))
    np.testing.assert_allclose([q.q0, q.q_plus, q.q_minus], solved, rtol=1e-14)
    assert (q.q0, q.q_plus, q.q_minus) == pytest.approx((0.5, 1 / 3, 1 / 6), rel=1e-14)


def test_decompose_zero_frequency():
    ed = eigen_data(1.0, 1.0)
    object.__setattr__(ed, "xi", 0.0)
    with pytest.raises(ZeroFrequency):
        decompose_initial(MomentVector(1, 0, 0), ed)


@given(xi=xis, sigma=sigmas, m=st.tuples(st.floats(0, 10), st.floats(-1, 1), st.floats(0, 10)))
def test_reconstruction(xi, sigma, m):
    m0 = MomentVector(m[0], m[1] * math.sqrt(m[0] * m[2]), m[2])
    try:
        ed = eigen_data(xi, sigma)
    except DegenerateSpectrum:
        return
    q = decompose_initial(m0, ed)
    back = q.reconstruct(ed)
    # eigen-coordinates amplify rounding by roughly the basis condition number
    cond = np.linalg.cond(ed.basis())
    assert np.abs(back - m0.as_array()).max() <= 1e-14 * cond * (1 + np.abs(m0.as_array()).max())


def test_evolve_zero():
    out = evolve_moments_exact(MomentVector(0, 0, 0), 3.0, 1.0, 0.7)
    assert out == MomentVector(0, 0, 0)


def test_evolve_pure_eigenmode():
    out = evolve_moments_exact(MomentVector(1, 1, 2), 2.0, 1.0, 1.0)
    e2 = math.exp(2.0)
    np.testing.assert_allclose(out.as_array(), [e2, e2, 2 * e2], rtol=1e-14)
    ref = rk4_moments(np.array([1.0, 1.0, 2.0]), 2.0, 1.0, 1.0)
    np.testing.assert_allclose(out.as_array(), ref, rtol=1e-9)


def test_evolve_m1_at_xi2_t1():
    out = evolve_moments_exact(MomentVector(1, 0, 0), 2.0, 1.0, 1.0)
    expected = 0.5 + math.exp(2) / 3 + math.exp(-4) / 6
    assert out.m1 == pytest.approx(expected, rel=1e-14)
    assert out.m1 == pytest.approx(2.96607, abs=5e-6)


@pytest.mark.parametrize("t", [0.0, 0.3, 1.0, 2.5])
def test_conservation_law(t):
    out = evolve_moments_exact(MomentVector(1, 0, 0), 2.0, 1.0, t)
    assert out.m3 - 2 * out.m1 == pytest.approx(-2.0, rel=1e-12)


def test_fallback_paths_agree_with_rk4():
    m0 = MomentVector(0.7, 0.2, 1.3)
    for xi in (0.0, -4.0, 1e-9, -4.0 + 1e-10):
        out = evolve_moments_exact(m0, xi, 1.0, 0.8)
        ref = rk4_moments(m0.as_array(), xi, 1.0, 0.8)
        np.testing.assert_allclose(out.as_array(), ref, rtol=1e-9, atol=1e-12)


def test_expm_nilpotent_closed_form():
    m1, m2, m3, t = 0.4, -0.3, 1.7, 1.3
    out = evolve_moments_expm(MomentVector(m1, m2, m3), 0.0, 1.0, t)
    expected = [m1 + 2 * t * m2 + t * t * m3, m2 + t * m3, m3]
    np.testing.assert_allclose(out.as_array(), expected, rtol=1e-15, atol=1e-15)


def test_expm_identity_at_zero():
    m0 = MomentVector(0.1, 0.05, 0.3)
    assert evolve_moments_expm(m0, 3.0, 1.0, 0.0) == m0


def test_expm_deterministic_growth_rate():
    # sigma = 0: lambda_plus = 2 sqrt(xi) = 4 at xi = 4
    ts = np.linspace(3.0, 4.0, 11)
    m1 = np.array([evolve_moments_expm(MomentVector(1, 0, 0), 4.0, 0.0, t).m1 for t in ts])
    slope = np.polyfit(ts, np.log(m1), 1)[0]
    assert slope == pytest.approx(4.0, rel=1e-3)
    ref = rk4_moments(np.array([1.0, 0.0, 0.0]), 4.0, 0.0, 1.0)
    np.testing.assert_allclose(evolve_moments_expm(MomentVector(1, 0, 0), 4.0, 0.0, 1.0).as_array(), ref, rtol=1e-12)


@given(xi=st.floats(-60, 60), sigma=st.floats(0, 4), t=st.floats(0, 2))
@settings(max_examples=60)
def test_expm_matches_scipy(xi, sigma, t):
    a = t * build_moment_matrix(xi, sigma)
    ref = scipy_expm(a)
    assert np.abs(expm(a) - ref).max() <= 1e-10 * np.abs(ref).max()


@given(xi=st.floats(-50, 50), sigma=st.floats(0.1, 4), t=st.floats(0, 2),
       m=st.tuples(st.floats(0, 5), st.floats(-1, 1), st.floats(0, 5)))
@settings(max_examples=150)
def test_cone_preserved(xi, sigma, t, m):
    m0 = MomentVector(m[0], m[1] * math.sqrt(m[0] * m[2]), m[2])
    out = evolve_moments_exact(m0, xi, sigma, t)
    scale = 1 + out.m1 + out.m3
    assert out.m1 >= -1e-9 * scale and out.m3 >= -1e-9 * scale
    assert out.cone_excess() <= 1e-9 * scale


def test_vectorised_propagate_matches_scalar(rng):
    xi = rng.uniform(-30, 30, 50)
    t = rng.uniform(0, 2, 50)
    m0 = np.stack([np.ones(50), np.zeros(50), rng.uniform(0, 3, 50)], axis=-1)
    vec = propagate(m0, xi, 0.8, t)
    for i in range(50):
        s = evolve_moments_exact(MomentVector.from_array(m0[i]), xi[i], 0.8, t[i]).as_array()
        np.testing.assert_allclose(vec[i], s, rtol=1e-10, atol=1e-12)


@pytest.mark.parametrize("m, xi, expected", [((0, 0, 0), 1.7, 0.0), ((1, 0, 1), 0.0, 2.0), ((1, 0, 2), math.sqrt(3), 2.0)])
def test_weighted_energy(m, xi, expected):
    assert weighted_energy(MomentVector(*m), xi) == pytest.approx(expected, rel=1e-15)
    assert weighted_energy(np.array(m, dtype=float), xi) == pytest.approx(expected, rel=1e-15)


def test_spectral_abscissa_bound_values():
    assert spectral_abscissa_bound(1.0) == (2.0, 2.0)
    b, x = spectral_abscissa_bound(8.0)
    assert (b, x) == pytest.approx((0.5, 0.125), rel=1e-15)
    for sigma in (0.25, 1.0, 4.0, 8.0):
        b, x = spectral_abscissa_bound(sigma)
        assert complex(eigenvalues(x, sigma)[2]).real == pytest.approx(b, rel=1e-12)
    with pytest.raises(NonPositiveSigma):
        spectral_abscissa_bound(0.0)


def test_abscissa_bound_brute_force():
    grid = np.arange(-100_000, 100_001) * 1e-3
    re = lambda_plus_direct(grid, 1.0).real
    assert re.max() <= 2.0 + 1e-12
    assert abs(grid[re.argmax()] - 2.0) <= 1e-3


@given(xi=st.floats(-1e3, 0), sigma=sigmas)
def test_nonpositive_for_negative_xi(xi, sigma):
    lp = complex(eigenvalues(xi, sigma)[2])
    assert lp.real <= 0.0
    if xi > complex_regime_boundary(sigma) and xi < 0:
        assert lp.real == pytest.approx(-(sigma**2) * xi**2 / 4, rel=1e-12, abs=1e-300)
