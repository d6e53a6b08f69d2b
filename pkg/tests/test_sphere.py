import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate as sint

from mimolab.errors import InvalidArgument
from mimolab.sphere import (
    Direction,
    build_grid,
    build_sh_basis,
    integrate,
    max_degree_below,
    real_sph_harm,
    sh_index,
    weyl_count,
)


def brute_weyl(E):
    """Count (l, m) pairs with l(l+1) <= E by direct enumeration."""
    count, l = 0, 0
    while l * (l + 1) <= E:
        count += 2 * l + 1
        l += 1
    return count


def test_direction_unit_vector_norm():
    for t, p in [(0.0, 0.0), (np.pi, 1.0), (1.2, 5.9), (0.3, 2 * np.pi - 1e-9)]:
        assert abs(np.linalg.norm(Direction(t, p).unit_vector()) - 1) <= 1e-12


def test_direction_rejects_bad_theta():
    with pytest.raises(InvalidArgument):
        Direction(-0.1, 0.0)
    with pytest.raises(InvalidArgument):
        Direction(4.0, 0.0)


def test_direction_wraps_phi():
    assert 0 <= Direction(1.0, -0.5).phi < 2 * np.pi
    assert Direction(1.0, 2 * np.pi).phi == 0.0


def test_direction_round_trip():
    d = Direction(0.7, 2.1)
    back = Direction.from_vector(d.unit_vector())
    assert abs(back.theta - d.theta) < 1e-12 and abs(back.phi - d.phi) < 1e-12


def test_resolution_8_size_and_area():
    g = build_grid(8)
    assert g.size == 128
    assert abs(g.weights.sum() - 4 * np.pi) <= 1e-10


@pytest.mark.parametrize("res", [2, 3, 5, 8, 13, 20])
def test_weights_positive_and_sum(res):
    g = build_grid(res)
    assert np.all(g.weights > 0)
    assert abs(g.weights.sum() - 4 * np.pi) <= 1e-10
    assert g.size == 2 * res**2


def test_grid_rejects_small_resolution():
    for bad in (0, 1, 2.5, -3):
        with pytest.raises(InvalidArgument):
            build_grid(bad)


def test_node_ordering(grid8):
    # polar index outer, azimuth inner, theta increasing
    th = grid8.theta.reshape(8, 16)
    assert np.all(np.diff(th[:, 0]) > 0)
    assert np.all(th == th[:, :1])
    assert np.allclose(grid8.phi[:16], 2 * np.pi * np.arange(16) / 16)


def test_grid_arrays_read_only(grid8):
    with pytest.raises(ValueError):
        grid8.weights[0] = 1.0


def test_integrate_constant(grid8):
    assert abs(integrate(grid8, np.ones(grid8.size)) - 4 * np.pi) <= 1e-12


def test_integrate_odd_harmonic(grid8):
    y10 = real_sph_harm(1, grid8.theta, grid8.phi)[:, sh_index(1, 0)]
    assert abs(integrate(grid8, y10)) <= 1e-10


def test_integrate_normalization(grid8):
    y21 = real_sph_harm(2, grid8.theta, grid8.phi)[:, sh_index(2, 1)]
    assert abs(integrate(grid8, np.abs(y21) ** 2) - 1) <= 1e-10
    y32 = real_sph_harm(3, grid8.theta, grid8.phi)[:, sh_index(3, 2)]
    assert abs(integrate(grid8, y32 * y32) - 1) <= 1e-10


def test_integrate_rejects_wrong_length(grid8):
    with pytest.raises(InvalidArgument):
        integrate(grid8, np.ones(5))


def test_integrate_against_scipy_dblquad():
    """Independent oracle: adaptive quadrature of a smooth non-polynomial integrand."""
    f = lambda t, p: np.exp(np.sin(t) * np.cos(p)) * np.sin(t)  # noqa: E731
    ref, _ = sint.dblquad(lambda t, p: f(t, p), 0, 2 * np.pi, 0, np.pi)
    u = build_grid(24)
    val = integrate(u, np.exp(np.sin(u.theta) * np.cos(u.phi)))
    assert abs(val - ref) <= 1e-10 * abs(ref)


@pytest.mark.parametrize("res", [3, 6, 9])
def test_quadrature_exactness(res):
    g = build_grid(res)
    sh = build_sh_basis(g, res - 1)
    assert np.abs(sh.gram() - np.eye(sh.size)).max() <= 1e-10


def test_harmonics_match_complex_definition():
    """Real harmonics rebuilt from the textbook complex ones (independent formula)."""
    from math import factorial

    from scipy.special import lpmv

    t, p = np.array([0.3, 1.1, 2.5]), np.array([0.2, 4.0, 1.7])
    Y = real_sph_harm(4, t, p)
    for l in range(5):
        for m in range(-l, l + 1):
            am = abs(m)
            norm = np.sqrt((2 * l + 1) / (4 * np.pi) * factorial(l - am) / factorial(l + am))
            P = lpmv(am, l, np.cos(t))  # includes Condon-Shortley phase
            if m == 0:
                ref = norm * P
            elif m > 0:
                ref = np.sqrt(2) * (-1) ** m * norm * P * np.cos(am * p)
            else:
                ref = np.sqrt(2) * (-1) ** m * norm * P * np.sin(am * p)
            assert np.allclose(Y[:, sh_index(l, m)], ref, atol=1e-12), (l, m)


def test_sh_basis_l0(grid8):
    sh = build_sh_basis(grid8, 0)
    assert sh.size == 1
    assert np.allclose(sh.values[:, 0], 1 / np.sqrt(4 * np.pi), atol=1e-14)


def test_sh_basis_l2_gram(grid8):
    sh = build_sh_basis(grid8, 2)
    assert sh.size == 9
    assert np.abs(sh.gram() - np.eye(9)).max() <= 1e-8


def test_sh_eigenvalue_column(grid8):
    sh = build_sh_basis(grid8, 7)
    assert sh.eigenvalues[sh_index(5, -3)] == 30
    assert np.all(sh.eigenvalues == sh.degrees * (sh.degrees + 1))


def test_sh_basis_rejects_band_beyond_grid(grid8):
    with pytest.raises(InvalidArgument):
        build_sh_basis(grid8, 8)


def test_analyze_synthesize_round_trip(grid8, rng):
    sh = build_sh_basis(grid8, 7)
    c = rng.standard_normal((sh.size, 3))
    assert np.allclose(sh.analyze(sh.synthesize(c)), c, atol=1e-12)


def test_weyl_examples():
    assert weyl_count(0) == (1, 6)
    assert weyl_count(2) == (4, 24)
    assert weyl_count(10000) == (10000, 60000)
    assert max_degree_below(10000) == 99


def test_weyl_ratio_brackets():
    for E, lo, hi in [(100, 0.8, 1.2), (1000, 0.95, 1.05), (10000, 0.99, 1.01)]:
        s, six = weyl_count(E)
        assert s == brute_weyl(E)
        assert lo <= s / E <= hi
    assert 5.94 <= weyl_count(10000)[1] / 10000 <= 6.06


def test_weyl_boundary_inclusive():
    # l(l+1) == E exactly keeps that l
    assert weyl_count(6) == (9, 54)
    assert weyl_count(5.999) == (4, 24)


def test_weyl_rejects_negative():
    with pytest.raises(InvalidArgument):
        weyl_count(-1)


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=0, max_value=5e4, allow_nan=False))
def test_weyl_matches_enumeration(E):
    s, six = weyl_count(E)
    assert s == brute_weyl(E) and six == 6 * s
