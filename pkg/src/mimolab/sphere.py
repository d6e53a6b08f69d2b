"""Quadrature on the unit sphere, real spherical harmonics and Weyl counting.

Grids are tensor products of Gauss-Legendre nodes in ``cos(theta)`` and a
uniform azimuthal trapezoid rule.  A grid of resolution ``n`` integrates every
product ``Y_l^m * Y_l'^m'`` with ``l, l' <= n - 1`` exactly.

Nodes are ordered lexicographically in (polar index, azimuth index) with the
polar angle increasing.  Harmonic columns are ordered by ``(l, m)`` with
``m = -l..l``, so column ``l*l + l + m`` holds ``Y_l^m``.
"""

from dataclasses import dataclass
from math import isqrt

import numpy as np
from scipy import special

from .errors import InvalidArgument

__all__ = [
    "Direction",
    "QuadratureGrid",
    "ShBasis",
    "build_grid",
    "integrate",
    "build_sh_basis",
    "real_sph_harm",
    "sh_index",
    "weyl_count",
]

FOUR_PI = 4.0 * np.pi


def _frozen(a, dtype=float):
    a = np.array(a, dtype=dtype)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class Direction:
    """A point on the unit sphere (colatitude ``theta``, azimuth ``phi``)."""

    theta: float
    phi: float

    def __post_init__(self):
        if not 0.0 <= self.theta <= np.pi:
            raise InvalidArgument(f"theta={self.theta} outside [0, pi]")
        object.__setattr__(self, "phi", float(self.phi) % (2.0 * np.pi))

    def unit_vector(self):
        st = np.sin(self.theta)
        return np.array([st * np.cos(self.phi), st * np.sin(self.phi), np.cos(self.theta)])

    @classmethod
    def from_vector(cls, v):
        v = np.asarray(v, dtype=float)
        r = np.linalg.norm(v)
        if r == 0:
            raise InvalidArgument("zero vector has no direction")
        theta = float(np.arccos(np.clip(v[2] / r, -1.0, 1.0)))
        return cls(theta, float(np.arctan2(v[1], v[0])))


def unit_vectors(theta, phi):
    st = np.sin(theta)
    return np.stack([st * np.cos(phi), st * np.sin(phi), np.cos(theta)], axis=-1)


@dataclass(frozen=True, eq=False)
class QuadratureGrid:
    """Nodes and positive weights discretizing the unit sphere."""

    resolution: int
    theta: np.ndarray
    phi: np.ndarray
    weights: np.ndarray

    @property
    def size(self):
        return self.theta.shape[0]

    @property
    def nodes(self):
        return [Direction(float(t), float(p)) for t, p in zip(self.theta, self.phi)]

    @property
    def unit_vectors(self):
        return unit_vectors(self.theta, self.phi)

    @property
    def exact_degree(self):
        """Largest harmonic degree whose pairwise products integrate exactly."""
        return self.resolution - 1

    def same_as(self, other):
        return self is other or (
            self.resolution == other.resolution
            and np.array_equal(self.weights, other.weights)
        )


def build_grid(resolution):
    """Gauss-Legendre x trapezoid grid with ``2 * resolution**2`` nodes."""
    if int(resolution) != resolution or resolution < 2:
        raise InvalidArgument(f"resolution must be an integer >= 2, got {resolution!r}")
    n = int(resolution)
    x, wx = np.polynomial.legendre.leggauss(n)
    # leggauss returns ascending cos(theta); flip so theta increases
    x, wx = x[::-1], wx[::-1]
    theta = np.arccos(x)
    n_phi = 2 * n
    phi = 2.0 * np.pi * np.arange(n_phi) / n_phi
    return QuadratureGrid(
        resolution=n,
        theta=_frozen(np.repeat(theta, n_phi)),
        phi=_frozen(np.tile(phi, n)),
        weights=_frozen(np.repeat(wx, n_phi) * (2.0 * np.pi / n_phi)),
    )


def integrate(grid, samples):
    """Quadrature sum ``sum_q w_q * samples_q``."""
    samples = np.asarray(samples)
    if samples.shape[0] != grid.size:
        raise InvalidArgument(
            f"expected {grid.size} samples, got {samples.shape[0]}"
        )
    return np.tensordot(grid.weights, samples, axes=(0, 0))


def sh_index(l, m):
    if abs(m) > l:
        raise InvalidArgument(f"|m| > l for (l={l}, m={m})")
    return l * l + l + m


def real_sph_harm(l_max, theta, phi):
    """Orthonormal real spherical harmonics up to degree ``l_max``.

    Returns an array of shape ``theta.shape + ((l_max + 1)**2,)``.
    """
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    ls = np.concatenate([np.full(2 * l + 1, l) for l in range(l_max + 1)])
    ms = np.concatenate([np.arange(-l, l + 1) for l in range(l_max + 1)])
    y = special.sph_harm_y(ls, np.abs(ms), theta[..., None], phi[..., None])
    sign = np.where(ms % 2 == 0, 1.0, -1.0)
    out = np.where(
        ms > 0,
        np.sqrt(2.0) * sign * y.real,
        np.where(ms < 0, np.sqrt(2.0) * sign * y.imag, y.real),
    )
    return out


@dataclass(frozen=True, eq=False)
class ShBasis:
    """Real harmonics sampled on a grid, one column per ``(l, m)``."""

    grid: QuadratureGrid
    l_max: int
    values: np.ndarray
    degrees: np.ndarray
    orders: np.ndarray

    @property
    def eigenvalues(self):
        return self.degrees * (self.degrees + 1)

    @property
    def size(self):
        return self.values.shape[1]

    def gram(self):
        v = self.values
        return v.T @ (self.grid.weights[:, None] * v)

    def analyze(self, samples):
        """Harmonic coefficients of grid functions (leading axis = nodes)."""
        samples = np.asarray(samples)
        return np.tensordot(self.values * self.grid.weights[:, None], samples, axes=(0, 0))

    def synthesize(self, coeffs):
        return np.tensordot(self.values, np.asarray(coeffs), axes=(1, 0))


def build_sh_basis(grid, l_max):
    if l_max < 0 or l_max > grid.resolution - 1:
        raise InvalidArgument(
            f"l_max={l_max} not supported by a resolution-{grid.resolution} grid "
            f"(max {grid.resolution - 1})"
        )
    values = real_sph_harm(l_max, grid.theta, grid.phi)
    degrees = np.concatenate([np.full(2 * l + 1, l) for l in range(l_max + 1)])
    orders = np.concatenate([np.arange(-l, l + 1) for l in range(l_max + 1)])
    return ShBasis(grid, int(l_max), _frozen(values), _frozen(degrees, int), _frozen(orders, int))


def max_degree_below(E):
    """Largest ``l`` with ``l(l+1) <= E`` (``-1`` if none)."""
    if E < 0:
        raise InvalidArgument(f"E must be nonnegative, got {E}")
    # l(l+1) <= E  <=>  l <= (sqrt(1+4E) - 1)/2 ; refine in integers
    L = max(0, (isqrt(int(4 * int(E) + 1)) - 1) // 2)
    while (L + 1) * (L + 2) <= E:
        L += 1
    while L >= 0 and L * (L + 1) > E:
        L -= 1
    return L


def weyl_count(E):
    """Dimensions of the spectral projectors onto Laplace-Beltrami eigenvalues <= E.

    Returns ``(scalar_dim, six_component_dim)``.  Eigenvalues equal to ``E``
    are included.
    """
    L = max_degree_below(E)
    scalar = (L + 1) ** 2
    return scalar, 6 * scalar
