import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mimolab.errors import InvalidArgument, PreconditionFailure
from mimolab.sphere import Direction, build_grid, build_sh_basis, sh_index
from mimolab.spread import (
    ScattererSet,
    SmoothSpread,
    SpreadSamples,
    apply_lb_power,
    band_tail,
    harmonic_split,
    hs_norm,
    random_scatterers,
    sample_finite_rank,
    sample_smooth,
)

E11 = np.zeros((6, 6))
E11[0, 0] = 1.0


def single_mode(l, m, l_max, component=0):
    v = np.zeros((1, 6, (l_max + 1) ** 2), dtype=complex)
    v[0, component, sh_index(l, m)] = 1.0
    return v


def test_constant_mode_kernel(grid8):
    f = single_mode(0, 0, 0)
    s = sample_finite_rank(ScattererSet([[1.0]], f, f), grid8)
    assert np.allclose(s.values, np.kron(np.ones((grid8.size,) * 2), E11) / (4 * np.pi))


def test_zero_coefficients(grid8, rng):
    env = random_scatterers(3, 2, rng)
    s = sample_finite_rank(ScattererSet(np.zeros((3, 3)), env.left_modes, env.right_modes), grid8)
    assert np.abs(s.values).max() == 0
    assert hs_norm(s) == 0


def test_rank_of_random_set(grid8):
    s = sample_finite_rank(random_scatterers(3, 3, np.random.default_rng(5)), grid8)
    sv = np.linalg.svd(s.values, compute_uv=False)
    assert sv[3] <= 1e-9 * sv[0]


def test_scatterer_validation():
    with pytest.raises(InvalidArgument):
        ScattererSet(np.eye(2), np.zeros((2, 6, 4)), np.zeros((2, 6, 9)))
    with pytest.raises(InvalidArgument):
        ScattererSet(np.eye(2), np.zeros((2, 6, 5)), np.zeros((2, 6, 5)))
    with pytest.raises(InvalidArgument):
        ScattererSet([[np.nan]], np.zeros((1, 6, 1)), np.zeros((1, 6, 1)))


def test_band_limit_beyond_grid_rejected():
    env = random_scatterers(2, 5, np.random.default_rng(0))
    with pytest.raises(InvalidArgument):
        sample_finite_rank(env, build_grid(4))


def test_smooth_constant_when_kappa_zero(grid8, rng):
    amp = rng.standard_normal((6, 6))
    s = sample_smooth(SmoothSpread(0.0, amp), grid8)
    assert np.allclose(s.block(3, 50), amp)
    assert np.allclose(s.values, np.kron(np.ones((grid8.size,) * 2), amp))


def test_smooth_peak_and_antipode(rng):
    amp = rng.standard_normal((6, 6))
    mr, mt = Direction(0.4, 1.0), Direction(2.0, 3.0)
    sp = SmoothSpread(5.0, amp, mr, mt)
    assert np.allclose(sp.value(mr, mt), amp)
    anti = lambda d: Direction.from_vector(-d.unit_vector())  # noqa: E731
    assert np.allclose(sp.value(anti(mr), anti(mt)), amp * np.exp(-20.0))


def test_smooth_samples_match_pointwise(grid8):
    sp = SmoothSpread(3.0, np.diag(np.arange(1, 7)), Direction(0.2, 0.0), Direction(1.5, 2.0))
    s = sample_smooth(sp, grid8)
    nodes = grid8.nodes
    for q, qp in [(0, 0), (10, 90), (127, 3)]:
        assert np.allclose(s.block(q, qp), sp.value(nodes[q], nodes[qp]), atol=1e-14)
        assert np.all(np.abs(s.block(q, qp)) <= np.abs(sp.amplitude) + 1e-14)


def test_smooth_rejects_bad_parameters():
    with pytest.raises(InvalidArgument):
        SmoothSpread(-1.0, np.eye(6))
    with pytest.raises(InvalidArgument):
        SmoothSpread(1.0, np.eye(3))


def test_hs_norm_constant_e11(grid8):
    s = SpreadSamples.dense(grid8, np.kron(np.ones((grid8.size,) * 2), E11))
    assert abs(hs_norm(s) - 4 * np.pi) <= 1e-10


def test_hs_norm_rank_one(grid8):
    f = single_mode(2, 1, 3, component=2)
    g = single_mode(3, -2, 3, component=5)
    s = sample_finite_rank(ScattererSet([[3.0]], f, g), grid8)
    assert abs(hs_norm(s) - 3) <= 1e-8


def test_hs_norm_dense_matches_factored(grid8):
    s = sample_finite_rank(random_scatterers(2, 3, np.random.default_rng(1)), grid8)
    sw = np.repeat(np.sqrt(grid8.weights), 6)
    dense = np.linalg.norm(sw[:, None] * s.values * sw[None, :])
    assert abs(hs_norm(s) - dense) <= 1e-12 * dense
    assert abs(hs_norm(SpreadSamples.dense(grid8, s.values)) - dense) <= 1e-10 * dense


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 4), st.integers(0, 3), st.integers(0, 2**31 - 1))
def test_hs_triangle_bound(N, l_max, seed):
    env = random_scatterers(N, l_max, np.random.default_rng(seed), normalize=False)
    s = sample_finite_rank(env, build_grid(5))
    nf, ng = env.mode_norms()
    bound = np.sum(np.abs(env.coeffs) * nf[:, None] * ng[None, :])
    assert hs_norm(s) <= bound * (1 + 1e-10)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 4), st.integers(0, 3), st.integers(0, 2**31 - 1))
def test_rank_property(N, l_max, seed):
    s = sample_finite_rank(random_scatterers(N, l_max, np.random.default_rng(seed)),
                           build_grid(5))
    sv = np.linalg.svd(s.values, compute_uv=False)
    assert np.all(sv[N:] <= 1e-9 * sv[0])


def test_lb_power_zero_is_identity(grid8):
    sh = build_sh_basis(grid8, 7)
    s = sample_finite_rank(random_scatterers(2, 3, np.random.default_rng(2)), grid8)
    assert np.abs(apply_lb_power(s, sh, 0).values - s.values).max() <= 1e-10


def test_lb_power_annihilates_constant(grid8):
    sh = build_sh_basis(grid8, 7)
    s = sample_smooth(SmoothSpread(0.0, np.eye(6)), grid8)
    assert np.abs(apply_lb_power(s, sh, 1).values).max() <= 1e-10


def test_lb_power_single_mode_scaling(grid8):
    sh = build_sh_basis(grid8, 7)
    f = single_mode(2, 0, 2)
    g = single_mode(1, 1, 2, component=3)
    s = sample_finite_rank(ScattererSet([[1.0]], f, g), grid8)
    assert np.allclose(apply_lb_power(s, sh, 2).values, 36 * s.values, atol=1e-10)


def test_lb_power_composes(grid8):
    sh = build_sh_basis(grid8, 7)
    s = sample_finite_rank(random_scatterers(3, 5, np.random.default_rng(3)), grid8)
    twice = apply_lb_power(apply_lb_power(s, sh, 1), sh, 1)
    once = apply_lb_power(s, sh, 2)
    diff = SpreadSamples.dense(grid8, twice.values - once.values)
    assert hs_norm(diff) <= 1e-8 * hs_norm(once)


def test_lb_power_matches_finite_difference_laplacian():
    """Independent check: apply the spherical Laplacian to a smooth profile in closed form.

    For f = exp(kappa (cos(theta) - 1)), -Delta f = kappa (2 cos(theta) - kappa sin^2(theta)) f.
    """
    kappa = 2.0
    grid = build_grid(24)
    sh = build_sh_basis(grid, 23)
    sp = SmoothSpread(kappa, np.eye(6), Direction(0, 0), Direction(0, 0))
    s = sample_smooth(sp, grid)
    out = apply_lb_power(s, sh, 1)
    ct = np.cos(grid.theta)
    f = np.exp(kappa * (ct - 1))
    expect = kappa * (2 * ct - kappa * (1 - ct**2)) * f
    left = out.left.reshape(grid.size, 6, 6)[:, 0, 0]
    assert np.allclose(left, expect, atol=1e-9)


def test_lb_power_rejects_unresolved_kernel():
    grid = build_grid(6)
    sh = build_sh_basis(grid, 5)
    s = sample_smooth(SmoothSpread(20.0, np.eye(6), Direction(1.0, 0.5)), grid)
    with pytest.raises(PreconditionFailure) as exc:
        apply_lb_power(s, sh, 1)
    assert exc.value.measured > 1e-8


def test_smooth_spectral_decay():
    grid = build_grid(40)
    s = sample_smooth(SmoothSpread(5.0, np.eye(6), Direction(0.3, 0.2), Direction(1.0, 0.0)),
                      grid)
    tail = band_tail(s, build_sh_basis(grid, 20))
    assert tail <= 1e-6 * hs_norm(s)


def test_harmonic_split_reconstructs(grid8):
    sh = build_sh_basis(grid8, 7)
    s = sample_finite_rank(random_scatterers(2, 4, np.random.default_rng(9)), grid8)
    coeffs, residual = harmonic_split(s, sh)
    assert coeffs.shape == (sh.size, 6, 2)
    assert np.abs(residual).max() <= 1e-12
