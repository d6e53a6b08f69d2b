import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate as sint

from mimolab.antenna import (
    AntennaArray,
    Box,
    box_average_phase,
    continuum_kernel,
    empirical_kernel,
    fill_volume,
    make_array,
    sample_pattern,
)
from mimolab.errors import InvalidArgument
from mimolab.operators import build_A, hermitian_eigvalsh, lift_kernel
from mimolab.sphere import Direction, QuadratureGrid, build_grid

E = np.eye(6, dtype=complex)


def single_node_grid(*dirs):
    th = np.array([d.theta for d in dirs])
    ph = np.array([d.phi for d in dirs])
    return QuadratureGrid(0, th, ph, np.ones(len(dirs)))


def test_lattice_single_point_at_center():
    box = Box.cube(1.0, (0.3, -0.2, 1.0))
    assert np.allclose(fill_volume(box, 1), [box.center])


def test_lattice_eight_points():
    pts = fill_volume(Box.cube(1.0), 8)
    assert pts.shape == (8, 3)
    assert Box.cube(1.0).contains(pts)
    assert np.allclose(np.sort(np.unique(pts[:, 0])), [-0.25, 0.25])
    assert len({tuple(p) for p in pts}) == 8


@pytest.mark.parametrize("M", [1, 2, 7, 13, 27, 64, 100, 343, 1000])
@pytest.mark.parametrize("scheme", ["lattice", "halton"])
def test_fill_inside_and_distinct(M, scheme):
    box = Box((1.0, 2.0, -1.0), (2.0, 1.0, 3.0))
    pts = fill_volume(box, M, scheme)
    assert pts.shape == (M, 3)
    assert box.contains(pts)
    assert len({tuple(np.round(p, 12)) for p in pts}) == M


def test_halton_octant_density():
    pts = fill_volume(Box.cube(1.0), 1000, "halton")
    octant = (pts[:, 0] > 0).astype(int) * 4 + (pts[:, 1] > 0) * 2 + (pts[:, 2] > 0)
    counts = np.bincount(octant, minlength=8)
    assert np.all(np.abs(counts - 125) <= 0.2 * 125)


def test_fill_rejects_bad_input():
    with pytest.raises(InvalidArgument):
        fill_volume(Box.cube(), 0)
    with pytest.raises(InvalidArgument):
        fill_volume(Box.cube(), 4, "random")
    with pytest.raises(InvalidArgument):
        Box((0, 0, 0), (1, 0, 1))


def test_array_validation():
    with pytest.raises(InvalidArgument):
        AntennaArray(np.zeros((2, 3)), np.zeros((2, 6)))  # zero polarization
    with pytest.raises(InvalidArgument):
        AntennaArray(np.zeros((1, 3)), 2 * E[:1])  # norm > 1
    with pytest.raises(InvalidArgument):
        AntennaArray(np.full((1, 3), 5.0), E[:1], box=Box.cube(1.0))  # outside box
    with pytest.raises(InvalidArgument):
        AntennaArray(np.zeros((1, 3)), E[:1], side="up")


def test_single_antenna_at_origin(grid8):
    s = sample_pattern(AntennaArray(np.zeros((1, 3)), E[:1]), grid8)
    assert np.allclose(s.values[:, :, 0], E[0][None, :])


def test_full_wavelength_phase():
    d = Direction(0.9, 0.4)
    x = d.unit_vector()  # k |x| = 2 pi
    s = sample_pattern(AntennaArray(x[None], E[:1]), single_node_grid(d))
    assert abs(s.values[0, 0, 0] - 1) < 1e-12


def test_half_wavelength_pair_north_pole():
    pos = np.array([[0, 0, 0.25], [0, 0, -0.25]])
    s = sample_pattern(AntennaArray(pos, E[[0, 0]]), single_node_grid(Direction(0, 0)))
    assert np.allclose(s.values[0, 0], [1j, -1j], atol=1e-12)


def test_rx_convention_is_conjugate(grid8, rng):
    arr = make_array(Box.cube(1.0), 5, "tx")
    pol = rng.standard_normal((5, 6)) + 1j * rng.standard_normal((5, 6))
    pol /= 2 * np.linalg.norm(pol, axis=1)[:, None]
    tx = sample_pattern(AntennaArray(arr.positions, pol, side="tx", box=arr.box), grid8)
    rx = sample_pattern(AntennaArray(arr.positions, pol, side="rx", box=arr.box), grid8)
    assert np.allclose(rx.values, np.conj(tx.values).transpose(0, 2, 1))


def test_pattern_modulus_equals_polarization(grid8, rng):
    pol = rng.standard_normal((7, 6)) + 1j * rng.standard_normal((7, 6))
    pol /= np.linalg.norm(pol, axis=1)[:, None]
    arr = make_array(Box.cube(2.0), 7, "tx", polarization=pol, scheme="halton")
    s = sample_pattern(arr, grid8)
    assert np.allclose(np.abs(s.values), np.abs(pol.T)[None], atol=1e-14)


def test_empirical_kernel_single_element(grid8):
    s = sample_pattern(AntennaArray(np.zeros((1, 3)), E[:1]), grid8)
    K = empirical_kernel(s)
    assert np.allclose(K.values, np.kron(np.ones((grid8.size,) * 2), np.outer(E[0], E[0])))


def test_empirical_kernel_hermitian_and_diagonal(grid8, rng):
    pol = rng.standard_normal((6, 6))
    pol *= rng.uniform(0.2, 1.0, 6)[:, None] / np.linalg.norm(pol, axis=1)[:, None]
    arr = make_array(Box.cube(1.0), 6, "rx", polarization=pol)
    K = empirical_kernel(sample_pattern(arr, grid8))
    assert np.abs(K.values - K.values.conj().T).max() <= 1e-12
    expect = np.mean(np.sum(np.abs(pol) ** 2, axis=1))
    for q in (0, 17, 100):
        assert abs(np.trace(K.block(q, q)) - expect) <= 1e-12
        assert np.allclose(K.block(q, q + 1).conj().T, K.block(q + 1, q))


def test_empirical_kernel_psd(grid8):
    for M in (1, 3, 8, 20):
        for side in ("tx", "rx"):
            op = lift_kernel(empirical_kernel(sample_pattern(make_array(Box.cube(1.0), M, side),
                                                             grid8)))
            lam = hermitian_eigvalsh(op.mat)
            assert lam.min() >= -1e-10 * lam.max()


def test_continuum_diagonal_and_k_to_zero(grid8):
    p = np.array([1, 0.5j, 0, 0, 0, 0.2])
    K = continuum_kernel(Box.cube(2.0), p, 2 * np.pi, grid8)
    assert np.allclose(K.block(3, 3), np.outer(p, p.conj()))
    K0 = continuum_kernel(Box.cube(2.0), p, 1e-12, grid8)
    assert np.allclose(K0.values, np.kron(np.ones((grid8.size,) * 2), np.outer(p, p.conj())))


def test_box_average_matches_volume_quadrature():
    """Factorized sinc formula vs a direct 3-D quadrature of the phase average."""
    box = Box((0.1, -0.2, 0.3), (1.0, 0.7, 1.4))
    k = 2 * np.pi
    delta = np.array([0.4, -0.9, 0.3])
    lo, hi = box.lower, box.upper

    def part(fn):
        return sint.tplquad(
            lambda z, y, x: fn(k * np.dot([x, y, z], delta)),
            lo[0], hi[0], lo[1], hi[1], lo[2], hi[2], epsabs=1e-12, epsrel=1e-12,
        )[0]

    ref = (part(np.cos) + 1j * part(np.sin)) / box.volume
    assert abs(box_average_phase(box, k, delta) - ref) <= 1e-9


def test_continuum_sinc_per_axis(grid8):
    L, k = 1.3, 2 * np.pi
    K = continuum_kernel(Box.cube(L), E[0], k, grid8)
    u = grid8.unit_vectors
    q, qp = 5, 77
    du = u[q] - u[qp]
    expect = np.prod(np.sinc(k * L * du / 2 / np.pi))
    assert abs(K.block(q, qp)[0, 0] - expect) <= 1e-14


def test_lattice_kernel_converges_to_continuum():
    grid = build_grid(6)
    box = Box.cube(1.0)
    lim = continuum_kernel(box, E[0], 2 * np.pi, grid).values
    dists = []
    for M in (64, 216, 512):
        emp = empirical_kernel(sample_pattern(make_array(box, M, "tx"), grid)).values
        dists.append(np.abs(emp - lim).max())
    assert dists[0] > dists[1] > dists[2]


def test_fixed_box_across_sizes():
    box = Box.cube(1.0)
    for M in (16, 32, 64, 128, 100):
        assert make_array(box, M).box == box


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 400), st.sampled_from(["lattice", "halton"]))
def test_fill_property(M, scheme):
    box = Box.cube(1.5)
    pts = fill_volume(box, M, scheme)
    assert pts.shape == (M, 3) and box.contains(pts)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 12), st.integers(0, 2**31 - 1))
def test_build_A_psd_property(M, seed):
    grid = build_grid(4)
    r = np.random.default_rng(seed)
    pol = r.standard_normal((M, 6)) + 1j * r.standard_normal((M, 6))
    pol /= np.linalg.norm(pol, axis=1)[:, None]
    arr = AntennaArray(fill_volume(Box.cube(1.0), M, "halton"), pol)
    op = build_A(sample_pattern(arr, grid))
    lam = hermitian_eigvalsh(op.mat)
    assert lam.min() >= -1e-10 * max(1.0, lam.max())
