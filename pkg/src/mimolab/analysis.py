"""Trace inequalities for ``F(x) = ln(1 + x)``, the Berezin-type splitting,
and spectral truncation of a spread kernel with certified capacity bounds.

All traces of ``F`` are computed from Hermitian eigenvalues.
"""

from dataclasses import dataclass

import numpy as np

from .capacity import bits_from_eigenvalues, capacity_direct
from .errors import InvalidArgument, NotPSDError
from .operators import build_H, hermitian_eigvalsh, rx_matrix, tx_matrix
from .sphere import max_degree_below, weyl_count
from .spread import _hs_from_factors, apply_lb_power, harmonic_split, hs_norm

__all__ = [
    "TraceIneqReport",
    "TruncationPlan",
    "TruncationBound",
    "check_trace_inequalities",
    "berezin_split",
    "random_psd",
    "random_projection",
    "fuzz_trace_inequalities",
    "fuzz_berezin",
    "plan_truncation",
    "truncated_capacity_bound",
]

REL_TOL = 1e-10


@dataclass(frozen=True)
class TraceIneqReport:
    names: tuple
    lhs: tuple
    rhs: tuple
    tolerance: float

    @property
    def margins(self):
        return tuple(r - l for l, r in zip(self.lhs, self.rhs))

    @property
    def passed(self):
        return tuple(m >= -self.tolerance for m in self.margins)

    @property
    def ok(self):
        return all(self.passed)


def _hermitian(T, what):
    T = np.asarray(T, dtype=complex)
    if T.ndim != 2 or T.shape[0] != T.shape[1]:
        raise InvalidArgument(f"{what} must be a square matrix")
    return 0.5 * (T + T.conj().T)


def _psd_eigs(T, what):
    lam = np.linalg.eigvalsh(T)
    lam_max = float(np.max(np.abs(lam), initial=0.0))
    if lam.size and lam.min() < -REL_TOL * max(1.0, lam_max):
        raise NotPSDError(f"{what} is not positive semidefinite (min eig {lam.min():.3e})")
    return np.clip(lam, 0.0, None)


def _tr_F(lam):
    return float(np.sum(np.log1p(lam)))


def check_trace_inequalities(T1, T2):
    """Both sides of

    ``|Tr F(T2) - Tr F(T1)| <= ||T2 - T1||_1`` and
    ``Tr F(T2) <= Tr F(T1) + Tr[(1 + T1)^-1 (T2 - T1)]``.
    """
    T1, T2 = _hermitian(T1, "T1"), _hermitian(T2, "T2")
    if T1.shape != T2.shape:
        raise InvalidArgument("T1 and T2 must have the same dimension")
    l1, V1 = np.linalg.eigh(T1)
    lam_max = float(np.max(np.abs(l1), initial=0.0))
    if l1.size and l1.min() < -REL_TOL * max(1.0, lam_max):
        raise NotPSDError(f"T1 is not positive semidefinite (min eig {l1.min():.3e})")
    l1 = np.clip(l1, 0.0, None)
    l2 = _psd_eigs(T2, "T2")
    dT = T2 - T1
    trace_norm = float(np.sum(np.abs(np.linalg.eigvalsh(dT))))
    f1, f2 = _tr_F(l1), _tr_F(l2)
    # Tr[F'(T1) dT] in the eigenbasis of T1
    first_order = float(np.real(np.sum(np.diag(V1.conj().T @ dT @ V1) / (1.0 + l1))))
    scale = 1.0 + float(l1.sum() + l2.sum())
    return TraceIneqReport(
        names=("lipschitz", "concavity"),
        lhs=(abs(f2 - f1), f2),
        rhs=(trace_norm, f1 + first_order),
        tolerance=REL_TOL * scale,
    )


def berezin_split(T2, P):
    """``Tr F(T2) <= Tr F(P T2 P) + Tr F(Q T2 Q)`` with ``Q = 1 - P``."""
    T2 = _hermitian(T2, "T2")
    P = np.asarray(P, dtype=complex)
    if P.shape != T2.shape:
        raise InvalidArgument("projection and operator dimensions differ")
    if (np.linalg.norm(P @ P - P) > 1e-12 * max(1.0, np.linalg.norm(P))
            or np.linalg.norm(P - P.conj().T) > 1e-12 * max(1.0, np.linalg.norm(P))):
        raise InvalidArgument("P is not an orthogonal projection")
    Q = np.eye(P.shape[0]) - P
    l2 = _psd_eigs(T2, "T2")
    lp = np.clip(np.linalg.eigvalsh(_hermitian(P @ T2 @ P, "PTP")), 0.0, None)
    lq = np.clip(np.linalg.eigvalsh(_hermitian(Q @ T2 @ Q, "QTQ")), 0.0, None)
    return TraceIneqReport(
        names=("berezin",),
        lhs=(_tr_F(l2),),
        rhs=(_tr_F(lp) + _tr_F(lq),),
        tolerance=REL_TOL * (1.0 + float(l2.sum())),
    )


def random_psd(rng, dim, rank=None, scale=1.0):
    rank = dim if rank is None else rank
    X = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    T = scale * (X @ X.conj().T) / max(rank, 1)
    return 0.5 * (T + T.conj().T)


def random_projection(rng, dim, rank):
    X = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    Qm, _ = np.linalg.qr(X)
    P = Qm @ Qm.conj().T
    return 0.5 * (P + P.conj().T)


def _trial_rng(seed, trial):
    return np.random.default_rng([seed, trial])


def fuzz_trace_inequalities(trials=200, max_dim=40, seed=0):
    """Rows ``(seed, trial, name, lhs, rhs, margin, passed)`` for random PSD pairs."""
    rows = []
    for t in range(trials):
        rng = _trial_rng(seed, t)
        dim = int(rng.integers(1, max_dim + 1))
        s1, s2 = 10.0 ** rng.uniform(-3, 2, size=2)
        T1 = random_psd(rng, dim, int(rng.integers(1, dim + 1)), s1)
        T2 = random_psd(rng, dim, int(rng.integers(1, dim + 1)), s2)
        rep = check_trace_inequalities(T1, T2)
        for name, l, r, m, ok in zip(rep.names, rep.lhs, rep.rhs, rep.margins, rep.passed):
            rows.append((seed, t, name, l, r, m, ok))
    return rows


def fuzz_berezin(trials=200, max_dim=40, seed=0):
    rows = []
    for t in range(trials):
        rng = _trial_rng(seed, 10_000 + t)
        dim = int(rng.integers(2, max_dim + 1))
        T2 = random_psd(rng, dim, int(rng.integers(1, dim + 1)), 10.0 ** rng.uniform(-3, 2))
        P = random_projection(rng, dim, dim // 2)
        rep = berezin_split(T2, P)
        rows.append((seed, t, "berezin", rep.lhs[0], rep.rhs[0], rep.margins[0], rep.passed[0]))
    return rows


@dataclass(frozen=True)
class TruncationPlan:
    """Cutoff ``E`` and smoothness order ``n`` for ``||(1 - P_E) S||_HS``.

    ``N`` is the dimension of the six-component spectral projector.
    ``measured_tail`` is the discrete HS norm of the discarded part,
    ``tail_bound = E^-n ||L_B^n S||_HS``.
    """

    E: float
    n: int
    N: int
    l_cut: int
    tail_bound: float
    measured_tail: float
    hs_total: float
    sn_norm: float
    sh: object = None

    @property
    def holds(self):
        return self.tail_bound >= self.measured_tail - 1e-8 * max(self.hs_total, 1.0)

    @property
    def certified_tail(self):
        """``tail_bound``, or 0 when nothing lies above the cutoff (band-limited kernel)."""
        if self.measured_tail <= 1e-12 * self.hs_total:
            return 0.0
        return max(self.tail_bound, self.measured_tail)


def plan_truncation(S, sh, E, n):
    if E < 0:
        raise InvalidArgument("cutoff E must be nonnegative")
    Sn = apply_lb_power(S, sh, n)
    sn_norm = hs_norm(Sn)
    total = hs_norm(S)
    if n == 0:
        tail_bound = total
    elif E == 0:
        tail_bound = np.inf
    else:
        tail_bound = float(E) ** (-n) * sn_norm
    coeffs, residual = harmonic_split(S, sh)
    keep = (sh.eigenvalues <= E).astype(float)
    Q = S.grid.size
    kept = sh.synthesize(keep[:, None, None] * coeffs).reshape(6 * Q, -1)
    discarded = S._left() - kept
    sw = np.repeat(np.sqrt(S.grid.weights), 6)
    _, core, R = S.weighted_factors()
    measured = _hs_from_factors(sw[:, None] * discarded, core, R)
    _, N = weyl_count(E)
    return TruncationPlan(float(E), int(n), N, max_degree_below(E), float(tail_bound),
                          measured, total, sn_norm, sh)


@dataclass(frozen=True)
class TruncationBound:
    C_actual: float
    C_bound: float
    C_bound_measured: float
    C1: float
    C2: float
    N: int
    tail_term: float
    trace_T2_bits: float

    @property
    def holds(self):
        return self.C_actual <= self.C_bound * (1 + 1e-12) + 1e-12

    def __iter__(self):
        return iter((self.C_actual, self.C_bound))


def _projector_basis(sh, E, Q):
    """Weighted orthonormal vectors spanning the six-component projector."""
    cols = np.flatnonzero(sh.eigenvalues <= E)
    Y = np.sqrt(sh.grid.weights)[:, None] * sh.values[:, cols]  # (Q, nE)
    nE = cols.size
    Psi = np.zeros((Q, 6, nE, 6))
    for i in range(6):
        Psi[:, i, :, i] = Y
    return Psi.reshape(6 * Q, 6 * nE)


def truncated_capacity_bound(plan, tx, rx, S, snr, a=None):
    """Actual capacity and the certified bound

    ``[N ln(1 + C2 M N^2) + C1 M tail] / ln 2``

    with ``C1 = 2 (E_T/N_0) ||A_T|| ||A_R|| ||S||_HS / M^2`` and
    ``C2 = a max|d_jk| max|phi_jk|`` measured on the truncated operator.
    """
    M = tx.count
    a = rx.count / M if a is None else a
    H = build_H(tx, rx, S)
    C_actual = capacity_direct(H, snr).bits
    F, G = tx_matrix(tx), rx_matrix(rx)
    norm_AT = float(np.linalg.norm(F, 2) ** 2)
    norm_AR = float(np.linalg.norm(G, 2) ** 2)
    C1 = 2.0 * snr.ratio * norm_AT * norm_AR * plan.hs_total / M**2

    Q = S.grid.size
    Psi = _projector_basis(plan.sh, plan.E, Q)
    L, core, R = S.weighted_factors()
    g = R @ (core.conj().T @ (L.conj().T @ Psi))  # S^H psi_j
    GPsi = G @ Psi
    Fg = F.conj().T @ g
    d = snr.ratio / a * (GPsi.conj().T @ GPsi) / M
    phi = (Fg.conj().T @ Fg) / M
    if Psi.shape[1]:
        lam_d, V = np.linalg.eigh(0.5 * (d + d.conj().T))
        root = (V * np.sqrt(np.clip(lam_d, 0, None))[None, :]) @ V.conj().T
        red = hermitian_eigvalsh(root @ phi @ root)
        trace_T2 = bits_from_eigenvalues(np.clip(red, 0, None) * a * M)
        C2 = a * float(np.abs(d).max()) * float(np.abs(phi).max())
    else:
        trace_T2, C2 = 0.0, 0.0
    N = plan.N
    log_part = N * np.log1p(C2 * M * N**2)
    tail = plan.certified_tail
    tail_term = C1 * M * tail
    C_bound = (log_part + tail_term) / np.log(2.0)
    C_bound_measured = (log_part + C1 * M * plan.measured_tail) / np.log(2.0)
    return TruncationBound(C_actual, float(C_bound), float(C_bound_measured), C1, C2, N,
                           float(tail_term), trace_T2)
