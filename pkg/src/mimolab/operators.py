"""Discretized integral operators on six-component fields over the sphere.

An operator with 6x6 matrix kernel ``K`` is stored as the weighted matrix

    mat[6q + i, 6q' + j] = sqrt(w_q) K_ij(node q, node q') sqrt(w_q')

so composition of operators is a plain matrix product and adjoints are
conjugate transposes.  Operators of Gram type (``A_T``, ``A_R``, their square
roots, ``K``) also cache a factor ``X`` with ``mat == X @ X^H``; square roots
and ``K`` are then formed from thin factorizations instead of full
eigendecompositions.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .antenna import LimitKernel, PatternSamples
from .errors import IllConditioned, InvalidArgument, NotPSDError
from .spread import SpreadSamples

__all__ = [
    "BlockOperator",
    "SnrConfig",
    "lift_kernel",
    "tx_matrix",
    "rx_matrix",
    "build_A",
    "psd_sqrt",
    "build_K",
    "build_H",
    "build_B",
    "hermitian_eigvalsh",
    "resolvent_trace_identity",
    "PSD_TOL",
]

PSD_TOL = 1e-10


@dataclass(frozen=True)
class SnrConfig:
    E_T: float = 1.0
    N_0: float = 1.0

    def __post_init__(self):
        if not (self.E_T > 0 and self.N_0 > 0):
            raise InvalidArgument("E_T and N_0 must both be positive")

    @property
    def ratio(self):
        return self.E_T / self.N_0

    def per_antenna(self, M_T):
        """The prefactor ``E_T / (M_T N_0)`` of the capacity formula."""
        return self.E_T / (M_T * self.N_0)


def _sqrt_weights(grid):
    return np.repeat(np.sqrt(grid.weights), 6)


def hermitian_eigvalsh(mat):
    h = 0.5 * (mat + mat.conj().T)
    return sla.eigh(h, eigvals_only=True, driver="evr")


def _check_psd(eigs, what="operator"):
    lam_max = float(np.max(np.abs(eigs))) if eigs.size else 0.0
    lam_min = float(np.min(eigs)) if eigs.size else 0.0
    if lam_min < -PSD_TOL * max(1.0, lam_max):
        raise NotPSDError(
            f"{what} has eigenvalue {lam_min:.3e} below -{PSD_TOL:g} * max(1, {lam_max:.3e})"
        )


@dataclass(frozen=True, eq=False)
class BlockOperator:
    grid: object
    mat: np.ndarray
    self_adjoint: bool = False
    psd: bool = False
    factor: np.ndarray = None

    def __post_init__(self):
        if not np.all(np.isfinite(self.mat)):
            raise InvalidArgument("operator matrix has non-finite entries")
        n = 6 * self.grid.size
        if self.mat.shape != (n, n):
            raise InvalidArgument(f"operator matrix must be ({n}, {n})")

    @property
    def dim(self):
        return self.mat.shape[0]

    def eigvalsh(self):
        if self.factor is not None and self.factor.shape[1] < self.dim:
            s = np.linalg.svd(self.factor, compute_uv=False)
            return np.concatenate([s**2, np.zeros(self.dim - s.size)])
        return hermitian_eigvalsh(self.mat)

    def norm(self):
        """Operator (spectral) norm."""
        if self.factor is not None:
            return float(np.linalg.norm(self.factor, 2) ** 2) if self.factor.size else 0.0
        return float(np.linalg.norm(self.mat, 2))

    def verify(self):
        """Check the self-adjoint and PSD tags against the matrix."""
        if self.self_adjoint or self.psd:
            asym = np.linalg.norm(self.mat - self.mat.conj().T)
            if asym > 1e-10 * max(np.linalg.norm(self.mat), np.finfo(float).tiny):
                raise InvalidArgument(f"operator tagged self-adjoint has asymmetry {asym:.3e}")
        if self.psd:
            _check_psd(hermitian_eigvalsh(self.mat))
        return self

    def apply(self, psi):
        """Apply to unweighted grid samples ``psi`` of shape ``(6Q,)``."""
        sw = _sqrt_weights(self.grid)
        return (self.mat @ (sw * psi)) / sw


def _kernel_array(samples):
    if isinstance(samples, LimitKernel):
        return samples.grid, samples.values
    if isinstance(samples, SpreadSamples):
        return samples.grid, samples.values
    raise InvalidArgument(f"cannot lift {type(samples).__name__}")


def lift_kernel(samples, grid=None, self_adjoint=False, psd=False):
    """Weighted matrix of an integral operator from its sampled kernel."""
    kgrid, values = _kernel_array(samples)
    if grid is not None and not kgrid.same_as(grid):
        raise InvalidArgument("kernel grid differs from operator grid")
    sw = _sqrt_weights(kgrid)
    return BlockOperator(kgrid, sw[:, None] * values * sw[None, :], self_adjoint, psd)


def tx_matrix(samples):
    """Weighted TX pattern ``F`` of shape ``(6Q, M_T)``: ``A_T = F F^H``."""
    Q = samples.grid.size
    return _sqrt_weights(samples.grid)[:, None] * samples.values.reshape(6 * Q, -1)


def rx_matrix(samples):
    """Weighted RX pattern ``G`` of shape ``(M_R, 6Q)``: ``A_R = G^H G``."""
    Q = samples.grid.size
    G = samples.values.transpose(1, 0, 2).reshape(-1, 6 * Q)
    return G * _sqrt_weights(samples.grid)[None, :]


def build_A(samples):
    """``A_T`` (TX samples) or ``A_R`` (RX samples) as a PSD block operator."""
    if not isinstance(samples, PatternSamples):
        raise InvalidArgument("build_A expects PatternSamples")
    X = tx_matrix(samples) if samples.side == "tx" else rx_matrix(samples).conj().T
    return BlockOperator(samples.grid, X @ X.conj().T, True, True, X)


def psd_sqrt(op):
    """Positive square root; tiny negative eigenvalues are clamped to zero."""
    if op.factor is not None:
        U, s, _ = np.linalg.svd(op.factor, full_matrices=False)
        keep = s > 0
        X = U[:, keep] * np.sqrt(s[keep])[None, :]
        return BlockOperator(op.grid, X @ X.conj().T, True, True, X)
    h = 0.5 * (op.mat + op.mat.conj().T)
    lam, V = sla.eigh(h, driver="evr")
    _check_psd(lam, "square-root argument")
    lam = np.clip(lam, 0.0, None)
    X = V * np.sqrt(np.sqrt(lam))[None, :]
    return BlockOperator(op.grid, X @ X.conj().T, True, True, X)


def _same_grid(*ops):
    g = ops[0].grid
    for op in ops[1:]:
        if not g.same_as(op.grid):
            raise InvalidArgument("operators live on different grids")


def build_K(A_T, A_R, S):
    """``K = (sqrt(A_R) S sqrt(A_T))^H (sqrt(A_R) S sqrt(A_T))``."""
    if isinstance(S, SpreadSamples):
        S = lift_kernel(S)
    _same_grid(A_T, A_R, S)
    rT, rR = psd_sqrt(A_T), psd_sqrt(A_R)
    # sqrt(A_R) S sqrt(A_T) = XR (XR^H S XT) XT^H ; K = XT Y^H (XR^H XR) Y XT^H
    XT, XR = rT.factor, rR.factor
    Y = XR.conj().T @ (S.mat @ XT)
    Z = XT @ (_gram_sqrt(XR) @ Y).conj().T
    return BlockOperator(A_T.grid, Z @ Z.conj().T, True, True, Z)


def _gram_sqrt(X):
    """Hermitian square root of ``X^H X`` (diagonal for factors built here)."""
    gram = X.conj().T @ X
    diag = np.real(np.diag(gram))
    off = gram - np.diag(np.diag(gram))
    if np.linalg.norm(off) <= 1e-12 * max(np.linalg.norm(diag), np.finfo(float).tiny):
        return np.diag(np.sqrt(np.clip(diag, 0.0, None)))
    lam, V = np.linalg.eigh(0.5 * (gram + gram.conj().T))
    return (V * np.sqrt(np.clip(lam, 0.0, None))[None, :]) @ V.conj().T


def build_K_literal(A_T, A_R, S):
    """``sqrt(A_T) S^H A_R S sqrt(A_T)`` evaluated left to right (dense)."""
    if isinstance(S, SpreadSamples):
        S = lift_kernel(S)
    r = psd_sqrt(A_T).mat
    mat = r @ S.mat.conj().T @ A_R.mat @ S.mat @ r
    return BlockOperator(A_T.grid, 0.5 * (mat + mat.conj().T), True, True)


def build_H(aT, aR, S):
    """Channel matrix ``sum_{q,q'} w_q w_q' a_R(q) s(q, q') a_T(q')``."""
    if not (aT.grid.same_as(aR.grid) and aT.grid.same_as(S.grid)):
        raise InvalidArgument("patterns and spread use different grids")
    if aT.side != "tx" or aR.side != "rx":
        raise InvalidArgument("build_H expects TX and RX pattern samples")
    F, G = tx_matrix(aT), rx_matrix(aR)
    L, core, R = S.weighted_factors()
    return (G @ L) @ core @ (R.conj().T @ F)


def build_B(H):
    H = np.asarray(H)
    B = H @ H.conj().T
    return 0.5 * (B + B.conj().T)


def resolvent_trace_identity(B, K, z, eigs_B=None, eigs_K=None):
    """Both sides of ``Tr (z - B)^-1 B = Tr (z - K)^-1 K``.

    ``B`` is a Hermitian matrix, ``K`` a block operator (or Hermitian matrix).
    """
    lb = hermitian_eigvalsh(np.asarray(B)) if eigs_B is None else eigs_B
    if eigs_K is None:
        eigs_K = K.eigvalsh() if isinstance(K, BlockOperator) else hermitian_eigvalsh(K)
    lk = eigs_K
    scale = max(np.max(np.abs(lb), initial=0.0), np.max(np.abs(lk), initial=0.0))
    dist = min(np.min(np.abs(z - lb), initial=np.inf), np.min(np.abs(z - lk), initial=np.inf))
    if dist < 1e-6 * max(scale, np.finfo(float).tiny):
        raise IllConditioned(f"z={z} within {dist:.3e} of a spectrum (scale {scale:.3e})")
    lhs = complex(np.sum(lb / (z - lb)))
    rhs = complex(np.sum(lk / (z - lk)))
    return lhs, rhs
