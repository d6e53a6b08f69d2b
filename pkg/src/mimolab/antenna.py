"""Antenna arrays filling a fixed box, plane-wave radiation patterns and
their normalized Gram kernels.

Every element is an isotropic point radiator at ``x_m`` with a fixed complex
polarization 6-vector ``p_m``.  On the transmit side the pattern is

    a_T[i, m](u) = p_m[i] * exp(1j * k * x_m . u)

and on the receive side the conjugate construction

    a_R[m, j](u) = conj(p_m[j]) * exp(-1j * k * x_m . u)

so both normalized Gram kernels ``(1/M) sum_m ...`` take the form
``(1/M) sum_m p_m p_m^H exp(1j k x_m . (u - u'))`` and converge, for a
uniform fill of the box, to the box average computed in closed form by
:func:`continuum_kernel`.
"""

from dataclasses import dataclass, field
from itertools import product

import numpy as np
from scipy.stats import qmc

from .errors import InvalidArgument

__all__ = [
    "Box",
    "AntennaArray",
    "PatternSamples",
    "LimitKernel",
    "fill_volume",
    "make_array",
    "sample_pattern",
    "empirical_kernel",
    "continuum_kernel",
    "box_average_phase",
    "DEFAULT_K",
    "DEFAULT_BOX_SIDE",
]

DEFAULT_K = 2.0 * np.pi  # wavelength 1 m
DEFAULT_BOX_SIDE = 2.0  # two wavelengths
E1 = np.eye(6, dtype=complex)[0]


@dataclass(frozen=True)
class Box:
    """Axis-aligned box given by its center and side lengths (meters)."""

    center: tuple = (0.0, 0.0, 0.0)
    sides: tuple = (DEFAULT_BOX_SIDE,) * 3

    def __post_init__(self):
        c = tuple(float(v) for v in self.center)
        s = tuple(float(v) for v in self.sides)
        if len(c) != 3 or len(s) != 3:
            raise InvalidArgument("box center and sides must be 3-vectors")
        if min(s) <= 0 or not np.all(np.isfinite(s + c)):
            raise InvalidArgument(f"degenerate box sides {s}")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "sides", s)

    @classmethod
    def cube(cls, side=DEFAULT_BOX_SIDE, center=(0.0, 0.0, 0.0)):
        return cls(center, (side, side, side))

    @property
    def lower(self):
        return np.array(self.center) - 0.5 * np.array(self.sides)

    @property
    def upper(self):
        return np.array(self.center) + 0.5 * np.array(self.sides)

    @property
    def volume(self):
        return float(np.prod(self.sides))

    def contains(self, points, tol=1e-12):
        points = np.atleast_2d(points)
        return bool(
            np.all(points >= self.lower - tol) and np.all(points <= self.upper + tol)
        )


def _axis_counts(M, sides):
    """Exact factorization M = n1*n2*n3 closest to the box aspect, or None."""
    best, best_cost = None, np.inf
    for n1 in range(1, M + 1):
        if M % n1:
            continue
        for n2 in range(1, M // n1 + 1):
            if (M // n1) % n2:
                continue
            n = np.array([n1, n2, M // (n1 * n2)], dtype=float)
            spacing = np.array(sides) / n
            cost = spacing.max() / spacing.min()
            if cost < best_cost - 1e-12:
                best, best_cost = (n1, n2, M // (n1 * n2)), cost
    return best if best_cost <= 4.0 else None


def _cell_centers(box, counts):
    axes = [
        box.lower[d] + (np.arange(n) + 0.5) * box.sides[d] / n
        for d, n in enumerate(counts)
    ]
    return np.array(list(product(*axes)))


def fill_volume(box, M, scheme="lattice"):
    """Deterministic placement of ``M`` points inside ``box``.

    ``lattice`` uses cell centers of a regular lattice.  When ``M`` factors
    into a near-cubic ``n1 x n2 x n3`` the lattice is exact; otherwise the
    smallest cubic lattice holding ``M`` points is thinned by evenly spaced
    index selection.  ``halton`` scales an unscrambled Halton sequence
    (first point skipped) into the box.
    """
    if not isinstance(box, Box):
        box = Box(*box)
    if int(M) != M or M < 1:
        raise InvalidArgument(f"M must be a positive integer, got {M!r}")
    M = int(M)
    if scheme == "lattice":
        counts = _axis_counts(M, box.sides)
        if counts is not None:
            return _cell_centers(box, counts)
        n = 1
        while n**3 < M:
            n += 1
        full = _cell_centers(box, (n, n, n))
        pick = np.round(np.linspace(0, len(full) - 1, M)).astype(int)
        return full[pick]
    if scheme == "halton":
        sampler = qmc.Halton(d=3, scramble=False)
        sampler.fast_forward(1)
        unit = sampler.random(M)
        return box.lower + unit * np.array(box.sides)
    raise InvalidArgument(f"unknown fill scheme {scheme!r}")


@dataclass(frozen=True, eq=False)
class AntennaArray:
    positions: np.ndarray
    polarizations: np.ndarray
    k: float = DEFAULT_K
    side: str = "tx"
    box: Box = field(default_factory=Box)

    def __post_init__(self):
        pos = np.atleast_2d(np.asarray(self.positions, dtype=float))
        pol = np.atleast_2d(np.asarray(self.polarizations, dtype=complex))
        if pos.shape[0] < 1 or pos.shape[1] != 3:
            raise InvalidArgument("positions must be an (M, 3) array with M >= 1")
        if pol.shape != (pos.shape[0], 6):
            raise InvalidArgument(f"polarizations must have shape ({pos.shape[0]}, 6)")
        norms = np.linalg.norm(pol, axis=1)
        if np.any(norms <= 0) or np.any(norms > 1 + 1e-12):
            raise InvalidArgument("polarization norms must lie in (0, 1]")
        if self.side not in ("tx", "rx"):
            raise InvalidArgument(f"side must be 'tx' or 'rx', got {self.side!r}")
        if not self.k > 0:
            raise InvalidArgument("wavenumber must be positive")
        if not self.box.contains(pos):
            raise InvalidArgument("antenna positions fall outside the declared box")
        pos.flags.writeable = False
        pol.flags.writeable = False
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "polarizations", pol)

    @property
    def count(self):
        return self.positions.shape[0]


def make_array(box, M, side="tx", k=DEFAULT_K, polarization=None, scheme="lattice"):
    """Array of ``M`` identically polarized elements filling ``box``.

    ``polarization`` is one 6-vector (default ``e1``) or an ``(M, 6)`` array.
    """
    pos = fill_volume(box, M, scheme)
    pol = E1 if polarization is None else np.asarray(polarization, dtype=complex)
    if pol.ndim == 1:
        pol = np.tile(pol, (M, 1))
    return AntennaArray(pos, pol, k, side, box)


@dataclass(frozen=True, eq=False)
class PatternSamples:
    """Pattern matrices at every grid node.

    ``values`` has shape ``(Q, 6, M)`` for TX and ``(Q, M, 6)`` for RX.
    """

    grid: object
    values: np.ndarray
    side: str

    @property
    def count(self):
        return self.values.shape[2] if self.side == "tx" else self.values.shape[1]


def sample_pattern(array, grid):
    phase = np.exp(1j * array.k * (grid.unit_vectors @ array.positions.T))  # (Q, M)
    p = array.polarizations
    if array.side == "tx":
        values = p.T[None, :, :] * phase[:, None, :]
    else:
        values = np.conj(p)[None, :, :] * np.conj(phase)[:, :, None]
    return PatternSamples(grid, values, array.side)


@dataclass(frozen=True, eq=False)
class LimitKernel:
    """6x6 matrix kernel on node pairs, stored as a dense ``(6Q, 6Q)`` matrix
    in node-major layout: entry ``[6q + i, 6q' + j]`` is ``K_ij(node q, node q')``.
    """

    grid: object
    values: np.ndarray

    def block(self, q, qp):
        return self.values[6 * q : 6 * q + 6, 6 * qp : 6 * qp + 6]


def empirical_kernel(samples):
    """Normalized Gram kernel ``(1/M) A(Omega, Omega')`` of a pattern."""
    Q = samples.grid.size
    if samples.side == "tx":
        F = samples.values.reshape(Q * 6, -1)
        M = F.shape[1]
        values = F @ F.conj().T / M
    else:
        G = samples.values.transpose(1, 0, 2).reshape(-1, Q * 6)
        M = G.shape[0]
        values = G.conj().T @ G / M
    return LimitKernel(samples.grid, values)


def box_average_phase(box, k, delta):
    """``(1/|V|) int_V exp(1j k x . delta) dx`` for an array of 3-vectors ``delta``.

    Each axis contributes ``sinc(k * side * delta_d / 2)``; an off-center box
    adds the phase ``exp(1j k c . delta)``.
    """
    delta = np.asarray(delta, dtype=float)
    sides = np.array(box.sides)
    arg = 0.5 * k * delta * sides
    factor = np.prod(np.sinc(arg / np.pi), axis=-1)
    center = np.array(box.center)
    if np.any(center != 0):
        return factor * np.exp(1j * k * (delta @ center))
    return factor.astype(complex)


def continuum_scalar(box, k, grid):
    u = grid.unit_vectors
    return box_average_phase(box, k, u[:, None, :] - u[None, :, :])


def continuum_kernel(box, polarization, k, grid):
    """Limit kernel ``p p^H * box_average_phase(u - u')`` for uniform fill."""
    if not isinstance(box, Box):
        box = Box(*box)
    p = np.asarray(polarization, dtype=complex)
    scal = continuum_scalar(box, k, grid)
    values = np.kron(scal, np.outer(p, p.conj()))
    return LimitKernel(grid, values)
