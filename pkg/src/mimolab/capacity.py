"""Shannon-Foschini capacity by three independent routes.

* direct: singular values of the channel matrix ``H``;
* fredholm: eigenvalues of the block operator ``K`` on six-component fields;
* finite_rank: eigenvalues of the ``N x N`` matrix ``sqrt(d) phi sqrt(d)``
  built from a scatterer set.

All log-determinants go through Hermitian eigenvalues.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgument, NotPSDError
from .operators import (
    PSD_TOL,
    BlockOperator,
    SnrConfig,
    hermitian_eigvalsh,
    rx_matrix,
    tx_matrix,
)
from .spread import sample_finite_rank

__all__ = [
    "CapacityResult",
    "FiniteRankData",
    "bits_from_eigenvalues",
    "capacity_direct",
    "capacity_fredholm",
    "build_finite_rank_data",
    "finite_rank_data_from_patterns",
    "capacity_finite_rank",
    "limit_matrices",
    "receive_count",
    "CSV_HEADER",
]

CSV_HEADER = ("route", "M_T", "M_R", "E_T", "N_0", "resolution", "bits")


def receive_count(a, M):
    """``M_R = round(a M)`` with ties rounded up."""
    return int(np.floor(a * M + 0.5))


def _clamped(eigs, what):
    eigs = np.asarray(eigs, dtype=float)
    if eigs.size == 0:
        return eigs
    lam_max = float(np.max(np.abs(eigs)))
    if eigs.min() < -PSD_TOL * max(1.0, lam_max):
        raise NotPSDError(f"{what}: eigenvalue {eigs.min():.3e} (max {lam_max:.3e})")
    return np.clip(eigs, 0.0, None)


def bits_from_eigenvalues(eigs):
    return float(np.sum(np.log1p(eigs)) / np.log(2.0))


@dataclass(frozen=True)
class CapacityResult:
    bits: float
    route: str
    eigenvalues_used: np.ndarray = field(repr=False)
    grid_resolution: int
    snr: SnrConfig
    M_T: int
    M_R: int

    def csv_row(self):
        return (self.route, self.M_T, self.M_R, self.snr.E_T, self.snr.N_0,
                self.grid_resolution, self.bits)


def capacity_direct(H, snr, M_T=None, grid_resolution=0):
    """``log2 det(I + E_T/(M_T N_0) H H^H)`` from the singular values of ``H``."""
    H = np.atleast_2d(np.asarray(H, dtype=complex))
    if not np.all(np.isfinite(H)):
        raise InvalidArgument("channel matrix has non-finite entries")
    M_R, cols = H.shape
    M_T = cols if M_T is None else M_T
    if M_T != cols:
        raise InvalidArgument(f"M_T={M_T} but H has {cols} columns")
    sv = np.linalg.svd(H, compute_uv=False)
    eigs = snr.per_antenna(M_T) * sv**2
    return CapacityResult(bits_from_eigenvalues(eigs), "direct", eigs,
                          grid_resolution, snr, M_T, M_R)


def capacity_fredholm(K, snr, M_T, M_R=0):
    """``(1/ln 2) Tr Ln(1 + E_T/(M_T N_0) K)`` over the block space."""
    eigs = hermitian_eigvalsh(K.mat) if isinstance(K, BlockOperator) else np.asarray(K)
    eigs = _clamped(eigs, "K") * snr.per_antenna(M_T)
    res = K.grid.resolution if isinstance(K, BlockOperator) else 0
    return CapacityResult(bits_from_eigenvalues(eigs), "fredholm", eigs, res, snr, M_T, M_R)


@dataclass(frozen=True)
class FiniteRankData:
    """``d`` and ``phi`` matrices of a scatterer environment at array size ``M``."""

    d: np.ndarray
    phi: np.ndarray
    M: int
    a: float
    snr: SnrConfig
    grid_resolution: int = 0
    h_norms: np.ndarray = None

    def reduced_matrix(self):
        """``sqrt(d) phi sqrt(d)``."""
        lam, V = np.linalg.eigh(0.5 * (self.d + self.d.conj().T))
        lam = _clamped(lam, "d")
        root = (V * np.sqrt(lam)[None, :]) @ V.conj().T
        out = root @ self.phi @ root
        return 0.5 * (out + out.conj().T)


def _weighted_modes(scatterers, grid):
    s = sample_finite_rank(scatterers, grid)
    sw = np.repeat(np.sqrt(grid.weights), 6)
    return sw[:, None] * s.left, sw[:, None] * s.right


def _assemble(fc, g, A_T_mat, A_R_mat, M, a, snr):
    """Shared algebra: ``fc`` = weighted ``sum_i c_ij f_i`` columns, ``g`` = weighted g_k."""
    d = snr.ratio / a * (fc.conj().T @ (A_R_mat @ fc)) / M
    phi = (g.conj().T @ (A_T_mat @ g)) / M
    return 0.5 * (d + d.conj().T), 0.5 * (phi + phi.conj().T)


def build_finite_rank_data(scatterers, A_T, A_R, M, a, snr):
    """``d_jk = E_T/(a N_0) <sum_i c_ij f_i, (A_R/M) sum_m c_mk f_m>``,
    ``phi_jk = <g_j, (A_T/M) g_k>``."""
    if not A_T.grid.same_as(A_R.grid):
        raise InvalidArgument("A_T and A_R live on different grids")
    f, g = _weighted_modes(scatterers, A_T.grid)
    fc = f @ scatterers.coeffs
    d, phi = _assemble(fc, g, A_T.mat, A_R.mat, M, a, snr)
    return FiniteRankData(d, phi, M, a, snr, A_T.grid.resolution,
                          np.sqrt(np.clip(np.real(np.diag(phi)), 0, None)))


def finite_rank_data_from_patterns(scatterers, tx, rx, snr, a=None):
    """Same matrices as :func:`build_finite_rank_data` without forming ``6Q x 6Q``
    operators (``A_T = F F^H``, ``A_R = G^H G``)."""
    if not tx.grid.same_as(rx.grid):
        raise InvalidArgument("TX and RX patterns use different grids")
    M = tx.count
    a = rx.count / M if a is None else a
    f, g = _weighted_modes(scatterers, tx.grid)
    F, G = tx_matrix(tx), rx_matrix(rx)
    Gf = G @ (f @ scatterers.coeffs)
    Fg = F.conj().T @ g
    d = snr.ratio / a * (Gf.conj().T @ Gf) / M
    phi = (Fg.conj().T @ Fg) / M
    d, phi = 0.5 * (d + d.conj().T), 0.5 * (phi + phi.conj().T)
    return FiniteRankData(d, phi, M, a, snr, tx.grid.resolution,
                          np.sqrt(np.clip(np.real(np.diag(phi)), 0, None)))


def capacity_finite_rank(data, a=None, M=None, M_R=None):
    """``(1/ln 2) ln det(1 + a M sqrt(d) phi sqrt(d))``."""
    a = data.a if a is None else a
    M = data.M if M is None else M
    _clamped(np.linalg.eigvalsh(data.phi), "phi")
    eigs = _clamped(np.linalg.eigvalsh(data.reduced_matrix()), "sqrt(d) phi sqrt(d)") * (a * M)
    M_R = receive_count(a, M) if M_R is None else M_R
    return CapacityResult(bits_from_eigenvalues(eigs), "finite_rank", eigs,
                          data.grid_resolution, data.snr, M, M_R)


def limit_matrices(scatterers, kernel_T, kernel_R, snr, data_sequence=()):
    """Continuum matrices ``d~ = E_T/N_0 <c f, A_R-limit c f>``, ``phi~ = <g, A_T-limit g>``.

    ``kernel_T``/``kernel_R`` are lifted limit kernels (block operators).
    Returns ``(d_tilde, phi_tilde, distances)`` where ``distances`` lists
    ``(M, ||d(M) - d~||_F, ||phi(M) - phi~||_F)`` for each supplied data set.
    """
    f, g = _weighted_modes(scatterers, kernel_T.grid)
    fc = f @ scatterers.coeffs
    d_t, phi_t = _assemble(fc, g, kernel_T.mat, kernel_R.mat, 1, 1.0, snr)
    dist = [
        (data.M, float(np.linalg.norm(data.d - d_t)), float(np.linalg.norm(data.phi - phi_t)))
        for data in data_sequence
    ]
    return d_t, phi_t, dist
