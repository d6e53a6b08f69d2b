"""Spread-function models and their sampled kernels.

A sampled spread kernel is kept in factored form

    s = left @ core @ right^H        (all unweighted, node-major rows)

with ``left`` and ``right`` of shape ``(6Q, r)``.  Both model families
factor exactly: a scatterer set has ``left = f``, ``core = c``,
``right = g``; the exponential smooth model is separable in its two angular
variables, giving rank at most 6.  A general dense kernel is stored with
identity factors.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument, PreconditionFailure
from .sphere import Direction, real_sph_harm

__all__ = [
    "ScattererSet",
    "SmoothSpread",
    "SpreadSamples",
    "random_scatterers",
    "sample_finite_rank",
    "sample_smooth",
    "hs_norm",
    "apply_lb_power",
    "harmonic_split",
]


@dataclass(frozen=True, eq=False)
class ScattererSet:
    """``S = sum_jk c[j, k] |f_j><g_k|`` with band-limited harmonic modes.

    ``left_modes`` / ``right_modes`` have shape ``(N, 6, (l_max + 1)**2)``:
    real-harmonic coefficients per field component.
    """

    coeffs: np.ndarray
    left_modes: np.ndarray
    right_modes: np.ndarray

    def __post_init__(self):
        c = np.atleast_2d(np.asarray(self.coeffs, dtype=complex))
        f = np.asarray(self.left_modes, dtype=complex)
        g = np.asarray(self.right_modes, dtype=complex)
        N = c.shape[0]
        if c.shape != (N, N) or f.ndim != 3 or f.shape[:2] != (N, 6) or g.shape != f.shape:
            raise InvalidArgument(
                "expected coeffs (N, N) and modes (N, 6, nb) with matching N"
            )
        l_max = int(round(np.sqrt(f.shape[2]))) - 1
        if (l_max + 1) ** 2 != f.shape[2]:
            raise InvalidArgument("mode coefficient length must be a perfect square")
        if not (np.all(np.isfinite(c)) and np.all(np.isfinite(f)) and np.all(np.isfinite(g))):
            raise InvalidArgument("non-finite scatterer data")
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "left_modes", f)
        object.__setattr__(self, "right_modes", g)

    @property
    def N(self):
        return self.coeffs.shape[0]

    @property
    def l_max(self):
        return int(round(np.sqrt(self.left_modes.shape[2]))) - 1

    def mode_norms(self):
        """L2 norms of f_j and g_k (orthonormal basis => coefficient norms)."""
        return (
            np.linalg.norm(self.left_modes.reshape(self.N, -1), axis=1),
            np.linalg.norm(self.right_modes.reshape(self.N, -1), axis=1),
        )


def random_scatterers(N, l_max, rng, components=None, normalize=True):
    """Random scatterer set; modes live in ``components`` (default all six)."""
    rng = np.random.default_rng(rng)
    nb = (l_max + 1) ** 2
    mask = np.zeros(6)
    mask[list(range(6) if components is None else components)] = 1.0

    def modes():
        m = (rng.standard_normal((N, 6, nb)) + 1j * rng.standard_normal((N, 6, nb)))
        m *= mask[None, :, None]
        if normalize:
            m /= np.linalg.norm(m.reshape(N, -1), axis=1)[:, None, None]
        return m

    c = rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))
    if normalize:
        c /= np.linalg.norm(c, 2)
    return ScattererSet(c, modes(), modes())


@dataclass(frozen=True, eq=False)
class SmoothSpread:
    """``s(R, T) = amplitude * exp(kappa * (u_R . mu_R + u_T . mu_T - 2))``."""

    kappa: float
    amplitude: np.ndarray
    mu_r: Direction = Direction(0.0, 0.0)
    mu_t: Direction = Direction(0.0, 0.0)

    def __post_init__(self):
        a = np.asarray(self.amplitude, dtype=complex)
        if a.shape != (6, 6):
            raise InvalidArgument("amplitude must be a 6x6 matrix")
        if self.kappa < 0:
            raise InvalidArgument("kappa must be nonnegative")
        object.__setattr__(self, "amplitude", a)

    def profile_r(self, u):
        return np.exp(self.kappa * (u @ self.mu_r.unit_vector() - 1.0))

    def profile_t(self, u):
        return np.exp(self.kappa * (u @ self.mu_t.unit_vector() - 1.0))

    def value(self, dir_r, dir_t):
        ur, ut = dir_r.unit_vector(), dir_t.unit_vector()
        return self.amplitude * (self.profile_r(ur) * self.profile_t(ut))


@dataclass(frozen=True, eq=False)
class SpreadSamples:
    """Spread kernel sampled on ``grid`` as ``left @ core @ right^H``.

    ``left``/``right`` of ``None`` stand for the identity on ``C^{6Q}``.
    """

    grid: object
    core: np.ndarray
    left: np.ndarray = None
    right: np.ndarray = None

    @classmethod
    def dense(cls, grid, values):
        values = np.asarray(values, dtype=complex)
        n = 6 * grid.size
        if values.shape != (n, n):
            raise InvalidArgument(f"dense kernel must be ({n}, {n})")
        return cls(grid, values)

    @property
    def dim(self):
        return 6 * self.grid.size

    def _left(self):
        return np.eye(self.dim, dtype=complex) if self.left is None else self.left

    def _right(self):
        return np.eye(self.dim, dtype=complex) if self.right is None else self.right

    @property
    def values(self):
        """Dense unweighted ``(6Q, 6Q)`` samples, rows (R-node, component)."""
        out = self.core
        if self.left is not None:
            out = self.left @ out
        if self.right is not None:
            out = out @ self.right.conj().T
        return out

    def block(self, q, qp):
        return self.values[6 * q : 6 * q + 6, 6 * qp : 6 * qp + 6]

    def weighted_factors(self):
        """``(L, core, R)`` with ``sqrt(w)`` folded into both outer factors."""
        sw = np.repeat(np.sqrt(self.grid.weights), 6)
        return sw[:, None] * self._left(), self.core, sw[:, None] * self._right()

    def weighted(self):
        """The lifted matrix ``sqrt(w_q) s sqrt(w_q')``."""
        L, c, R = self.weighted_factors()
        return L @ c @ R.conj().T

    def with_left(self, left):
        return SpreadSamples(self.grid, self.core, left, self.right)


def _mode_samples(modes, grid):
    """``(6Q, N)`` samples of harmonic-coefficient modes ``(N, 6, nb)``."""
    l_max = int(round(np.sqrt(modes.shape[2]))) - 1
    if l_max > grid.resolution - 1:
        raise InvalidArgument(
            f"mode band limit {l_max} exceeds grid exactness {grid.resolution - 1}"
        )
    Y = real_sph_harm(l_max, grid.theta, grid.phi)  # (Q, nb)
    vals = np.einsum("qb,nib->qin", Y, modes)
    return vals.reshape(6 * grid.size, modes.shape[0])


def sample_finite_rank(scatterers, grid):
    return SpreadSamples(
        grid,
        scatterers.coeffs,
        _mode_samples(scatterers.left_modes, grid),
        _mode_samples(scatterers.right_modes, grid),
    )


def _kron_identity(profile):
    Q = profile.shape[0]
    out = np.zeros((Q, 6, 6), dtype=complex)
    idx = np.arange(6)
    out[:, idx, idx] = profile[:, None]
    return out.reshape(6 * Q, 6)


def sample_smooth(spread, grid):
    u = grid.unit_vectors
    return SpreadSamples(
        grid,
        spread.amplitude,
        _kron_identity(spread.profile_r(u)),
        _kron_identity(spread.profile_t(u)),
    )


def _hs_from_factors(L, core, R):
    """Frobenius norm of ``L core R^H`` through small Gram matrices."""
    gl = L.conj().T @ L
    gr = R.conj().T @ R
    val = np.trace(gl @ core @ gr @ core.conj().T).real
    return float(np.sqrt(max(val, 0.0)))


def hs_norm(samples):
    """Quadrature Hilbert-Schmidt norm of a sampled kernel."""
    return _hs_from_factors(*samples.weighted_factors())


def harmonic_split(samples, sh):
    """Expand the left (receive-side) factor per component in the basis ``sh``.

    Returns ``(coeffs, residual)``: ``coeffs`` has shape ``(nb, 6, r)`` and
    ``residual`` is the left-factor remainder outside the basis (``(6Q, r)``).
    """
    if not samples.grid.same_as(sh.grid):
        raise InvalidArgument("spread and harmonic basis use different grids")
    Q = samples.grid.size
    left = samples._left().reshape(Q, 6, -1)
    coeffs = sh.analyze(left)
    residual = left - sh.synthesize(coeffs)
    return coeffs, residual.reshape(6 * Q, -1)


def band_tail(samples, sh):
    """HS norm of the part of the kernel outside the span of ``sh`` (left side)."""
    _, residual = harmonic_split(samples, sh)
    sw = np.repeat(np.sqrt(samples.grid.weights), 6)
    _, core, R = samples.weighted_factors()
    return _hs_from_factors(sw[:, None] * residual, core, R)


def apply_lb_power(samples, sh, n, tail_tol=1e-8):
    """Kernel of ``L_B^n S`` with ``L_B`` acting componentwise on the receive side.

    Requires the kernel to be band-limited to ``sh.l_max`` up to a relative
    HS tail of ``tail_tol``; otherwise raises :class:`PreconditionFailure`.
    """
    if n < 0 or int(n) != n:
        raise InvalidArgument(f"power must be a nonnegative integer, got {n!r}")
    total = hs_norm(samples)
    tail = band_tail(samples, sh)
    if total > 0 and tail > tail_tol * total:
        raise PreconditionFailure(
            f"kernel not band-limited to l <= {sh.l_max}: relative tail {tail / total:.3e}",
            measured=tail / total,
        )
    if n == 0:
        return samples
    coeffs, _ = harmonic_split(samples, sh)
    scale = sh.eigenvalues.astype(float) ** n
    left = sh.synthesize(scale[:, None, None] * coeffs)
    return samples.with_left(left.reshape(6 * samples.grid.size, -1))
