"""Sweeps over antenna counts in a fixed volume, one per growth regime:

* ``tx_saturation``: fixed ``M_R``, growing ``M_T``; capacity saturates
  at the value obtained with the continuum transmit kernel.
* ``rx_log``: fixed ``M_T``, growing ``M_R``; capacity grows like
  ``d log2(M_R)`` with ``d <= M_T``.
* ``proportional_finite_rank``: ``M_R = round(a M_T)`` with a rank-``N``
  environment; ``C / ln M`` stays below ``N / ln 2``.
* ``proportional_smooth``: ``M_R = round(a M_T)`` with a smooth spread
  kernel; local log-log exponents fall below any fixed ``epsilon``.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .analysis import plan_truncation, truncated_capacity_bound
from .antenna import DEFAULT_K, Box, continuum_kernel, make_array, sample_pattern
from .capacity import (
    capacity_direct,
    capacity_finite_rank,
    finite_rank_data_from_patterns,
    receive_count,
)
from .errors import InvalidArgument
from .operators import SnrConfig, build_A, build_H, lift_kernel, psd_sqrt, rx_matrix, tx_matrix
from .sphere import Direction, build_grid, build_sh_basis
from .spread import (
    ScattererSet,
    SmoothSpread,
    random_scatterers,
    sample_finite_rank,
    sample_smooth,
)

__all__ = [
    "REGIMES",
    "Scenario",
    "SweepSpec",
    "SweepResult",
    "default_spec",
    "fit_growth",
    "run_sweep",
    "sweep_tx_saturation",
    "sweep_rx_log",
    "sweep_proportional_finite_rank",
    "sweep_proportional_smooth",
]

REGIMES = ("tx_saturation", "rx_log", "proportional_finite_rank", "proportional_smooth")
E1 = np.eye(6)[0]

# verdict tolerances
SATURATION_DELTA = 0.02
SATURATION_LIMIT_REL = 0.05
RX_SLOPE_TOL = 0.05
FINITE_RANK_TOL = 0.10


@dataclass(frozen=True, eq=False)
class Scenario:
    """Physical setup shared by every point of a sweep.

    The boxes are fixed; arrays of any size are regenerated inside them.
    """

    environment: object
    tx_box: Box = Box.cube(1.0)
    rx_box: Box = Box.cube(1.0)
    k: float = DEFAULT_K
    tx_polarization: np.ndarray = field(default_factory=lambda: E1.copy())
    rx_polarization: np.ndarray = field(default_factory=lambda: E1.copy())
    scheme: str = "lattice"
    snr: SnrConfig = SnrConfig(100.0, 1.0)
    resolution: int = 10

    @cached_property
    def grid(self):
        return build_grid(self.resolution)

    @cached_property
    def spread(self):
        if isinstance(self.environment, ScattererSet):
            return sample_finite_rank(self.environment, self.grid)
        if isinstance(self.environment, SmoothSpread):
            return sample_smooth(self.environment, self.grid)
        raise InvalidArgument(f"unsupported environment {type(self.environment).__name__}")

    def tx(self, M):
        arr = make_array(self.tx_box, M, "tx", self.k, self.tx_polarization, self.scheme)
        return sample_pattern(arr, self.grid)

    def rx(self, M):
        arr = make_array(self.rx_box, M, "rx", self.k, self.rx_polarization, self.scheme)
        return sample_pattern(arr, self.grid)

    def capacity(self, M_T, M_R):
        H = build_H(self.tx(M_T), self.rx(M_R), self.spread)
        return capacity_direct(H, self.snr, grid_resolution=self.resolution)

    @cached_property
    def tx_limit(self):
        return lift_kernel(continuum_kernel(self.tx_box, self.tx_polarization, self.k, self.grid))

    @cached_property
    def rx_limit(self):
        return lift_kernel(continuum_kernel(self.rx_box, self.rx_polarization, self.k, self.grid))


@dataclass(frozen=True, eq=False)
class SweepSpec:
    regime: str
    m_values: tuple
    scenario: Scenario
    fixed: int = 4
    ratio_a: float = 1.0
    epsilon: float = 0.5
    smoothness_order: int = 2
    seed: int = 0

    def __post_init__(self):
        if self.regime not in REGIMES:
            raise InvalidArgument(f"unknown regime {self.regime!r}")
        ms = tuple(int(m) for m in self.m_values)
        if len(ms) < 4 or any(b <= a for a, b in zip(ms, ms[1:])) or ms[0] < 1:
            raise InvalidArgument("m_values must be strictly increasing, positive, length >= 4")
        if self.ratio_a <= 0 or self.fixed < 1:
            raise InvalidArgument("ratio_a and fixed count must be positive")
        if not 0 < self.epsilon < 1:
            raise InvalidArgument("epsilon must lie in (0, 1)")
        object.__setattr__(self, "m_values", ms)


@dataclass
class SweepResult:
    regime: str
    rows: list
    columns: tuple
    stats: dict
    verdicts: dict
    tolerances: dict

    @property
    def passed(self):
        return all(self.verdicts.values())

    def summary(self):
        parts = [f"regime={self.regime}", f"passed={self.passed}"]
        parts += [f"{k}={_fmt(v)}" for k, v in self.stats.items() if np.isscalar(v)]
        parts += [f"{k}={v}" for k, v in self.verdicts.items()]
        return " ".join(parts)


def _fmt(v):
    return f"{v:.17g}" if isinstance(v, (float, np.floating)) else str(v)


def fit_growth(M, C, window=None):
    """Least-squares slope of ``C`` against ``ln M`` over a window plus
    dyadic-style local exponents ``ln(C_{i+1}/C_i) / ln(M_{i+1}/M_i)``.

    The default window is the top half of the points (at least three).
    """
    M = np.asarray(M, dtype=float)
    C = np.asarray(C, dtype=float)
    if M.size < 3 or M.size != C.size:
        raise InvalidArgument("need at least three (M, C) points")
    if window is None:
        window = max(3, -(-M.size // 2))
    if window < 2 or window > M.size:
        raise InvalidArgument(f"degenerate fit window {window}")
    x, y = np.log(M[-window:]), C[-window:]
    if np.ptp(x) == 0:
        raise InvalidArgument("degenerate fit window: repeated M")
    slope, intercept = np.polyfit(x, y, 1)
    exps = []
    for i in range(M.size - 1):
        if C[i] > 0 and C[i + 1] > 0:
            exps.append(float(np.log(C[i + 1] / C[i]) / np.log(M[i + 1] / M[i])))
        else:
            exps.append(float("nan"))
    return {"slope": float(slope), "intercept": float(intercept), "window": int(window),
            "exponents": exps}


def _map(fn, items, jobs):
    if jobs and jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as ex:
            return list(ex.map(fn, items))
    return [fn(i) for i in items]


def _bits_of(eigs):
    return float(np.sum(np.log1p(np.clip(eigs, 0, None))) / np.log(2.0))


def sweep_tx_saturation(spec, jobs=1):
    sc = spec.scenario
    M_R = spec.fixed
    rx = sc.rx(M_R)

    def point(M_T):
        tx = sc.tx(M_T)
        H = build_H(tx, rx, sc.spread)
        return (M_T, M_R, capacity_direct(H, sc.snr).bits)

    rows = _map(point, spec.m_values, jobs)
    C = np.array([r[2] for r in rows])

    # limit: eigenvalues of (E_T/N_0) G S A_T-limit S^H G^H
    L, core, R = sc.spread.weighted_factors()
    GS = (rx_matrix(rx) @ L) @ core
    inner = R.conj().T @ (sc.tx_limit.mat @ R)
    B_lim = sc.snr.ratio * GS @ inner @ GS.conj().T
    C_lim = _bits_of(np.linalg.eigvalsh(0.5 * (B_lim + B_lim.conj().T)))

    def rel(a, b):
        return abs(a - b) / abs(a) if a != 0 else abs(a - b)

    deltas = [rel(C[i + 1], C[i]) for i in range(len(C) - 1)]
    delta = deltas[-1]
    limit_rel = rel(C_lim, C[-1])
    stats = {
        "saturation_delta": delta,
        "limit_capacity": C_lim,
        "limit_rel_error": limit_rel,
        "delta_decreasing": bool(all(b <= a for a, b in zip(deltas, deltas[1:]))),
        "deltas": deltas,
    }
    verdicts = {
        "saturation": bool(delta <= SATURATION_DELTA),
        "limit_match": bool(limit_rel <= SATURATION_LIMIT_REL),
    }
    return SweepResult(spec.regime, rows, ("M_T", "M_R", "bits"), stats, verdicts,
                       {"saturation_delta": SATURATION_DELTA,
                        "limit_rel": SATURATION_LIMIT_REL})


def positive_count(eigs, rel=1e-10):
    eigs = np.asarray(eigs, dtype=float)
    top = float(np.max(eigs, initial=0.0))
    return int(np.sum(eigs > rel * top)) if top > 0 else 0


def rx_log_rank(scenario, tx):
    """Positive-eigenvalue count of ``D_R = E_T/(M_T N_0) sqrt(A_T) S^H A_R-lim S sqrt(A_T)``
    computed twice: from the ``M_T x M_T`` compression ``F^H S^H A_R-lim S F`` and
    from the singular values of ``sqrt(A_R-lim) S sqrt(A_T)`` on the block space.

    Returns ``(d_small, d_block, eigenvalues)``.
    """
    M_T = tx.count
    L, core, R = scenario.spread.weighted_factors()
    F = tx_matrix(tx)
    SF = L @ (core @ (R.conj().T @ F))
    small = scenario.snr.per_antenna(M_T) * (SF.conj().T @ (scenario.rx_limit.mat @ SF))
    lam = np.clip(np.linalg.eigvalsh(0.5 * (small + small.conj().T)), 0, None)
    d_small = positive_count(lam)

    root = psd_sqrt(scenario.rx_limit)
    XT = psd_sqrt(build_A(tx)).factor
    X = root.factor.conj().T @ (L @ (core @ (R.conj().T @ XT)))
    sv = np.linalg.svd(X, compute_uv=False) if X.size else np.zeros(0)
    d_block = positive_count(sv**2)
    return d_small, d_block, np.sort(lam)[::-1]


def sweep_rx_log(spec, jobs=1):
    sc = spec.scenario
    M_T = spec.fixed
    tx = sc.tx(M_T)
    d_small, d_block, lam = rx_log_rank(sc, tx)

    def point(M_R):
        H = build_H(tx, sc.rx(M_R), sc.spread)
        C = capacity_direct(H, sc.snr).bits
        comparator = _bits_of(M_R * lam)
        return (M_T, M_R, C, comparator)

    rows = _map(point, spec.m_values, jobs)
    fit = fit_growth([r[1] for r in rows], [r[2] for r in rows])
    d = d_small
    slope_limit = d / np.log(2.0)
    stats = {
        "slope": fit["slope"],
        "d": d,
        "d_block": d_block,
        "slope_limit": slope_limit,
        "transmit_count_limit": M_T / np.log(2.0),
        "max_comparator_gap": max(abs(r[2] - r[3]) for r in rows),
        "fit_window": fit["window"],
    }
    verdicts = {
        "slope_bound": bool(fit["slope"] <= slope_limit * (1 + RX_SLOPE_TOL) + 1e-12),
        "rank_bound": d <= M_T,
        "rank_agreement": d_small == d_block,
    }
    return SweepResult(spec.regime, rows, ("M_T", "M_R", "bits", "comparator_bits"), stats,
                       verdicts, {"slope_rel": RX_SLOPE_TOL})


def sweep_proportional_finite_rank(spec, jobs=1):
    sc = spec.scenario
    if not isinstance(sc.environment, ScattererSet):
        raise InvalidArgument("proportional_finite_rank needs a scatterer environment")
    N = sc.environment.N
    a = spec.ratio_a

    def point(M):
        M_R = receive_count(a, M)
        data = finite_rank_data_from_patterns(sc.environment, sc.tx(M), sc.rx(M_R), sc.snr, a)
        res = capacity_finite_rank(data, a, M, M_R)
        lam = float(np.max(np.linalg.eigvalsh(data.reduced_matrix()), initial=0.0))
        bound = N / np.log(2.0) * (np.log(M) + np.log1p(a * lam))
        return (M, M_R, res.bits, lam, bound)

    rows = _map(point, spec.m_values, jobs)
    M_max, C_max = rows[-1][0], rows[-1][2]
    ratio = C_max / np.log(M_max)
    limit = N / np.log(2.0)
    stats = {
        "N": N,
        "ratio_at_max": ratio,
        "ratio_limit": limit,
        "slope": fit_growth([r[0] for r in rows], [r[2] for r in rows])["slope"],
    }
    verdicts = {
        "log_ratio": bool(ratio <= limit * (1 + FINITE_RANK_TOL)),
        "explicit_bound": all(r[2] <= r[4] * (1 + 1e-12) for r in rows),
    }
    return SweepResult(spec.regime, rows, ("M_T", "M_R", "bits", "lambda", "bound_bits"),
                       stats, verdicts, {"ratio_rel": FINITE_RANK_TOL})


def sweep_proportional_smooth(spec, jobs=1):
    sc = spec.scenario
    a, eps, n = spec.ratio_a, spec.epsilon, spec.smoothness_order
    sh = build_sh_basis(sc.grid, sc.resolution - 1)

    def point(M):
        M_R = receive_count(a, M)
        E = float(M) ** ((1 - eps) / n)
        plan = plan_truncation(sc.spread, sh, E, n)
        tb = truncated_capacity_bound(plan, sc.tx(M), sc.rx(M_R), sc.spread, sc.snr, a)
        return (M, M_R, tb.C_actual, E, plan.N, tb.C_bound)

    rows = _map(point, spec.m_values, jobs)
    fit = fit_growth([r[0] for r in rows], [r[2] for r in rows])
    exps = fit["exponents"]
    top = exps[-3:]
    finite = all(np.isfinite(top))
    decreasing = finite and all(b < a_ for a_, b in zip(top, top[1:]))
    last = exps[-1]
    stats = {
        "exponent_at_max": last,
        "epsilon": eps,
        "exponents": exps,
    }
    verdicts = {
        "exponent_decreasing": bool(decreasing),
        "exponent_below_epsilon": bool(np.isfinite(last) and last < eps),
        "certified_bound": all(r[2] <= r[5] for r in rows),
    }
    return SweepResult(spec.regime, rows, ("M_T", "M_R", "bits", "E", "N", "bound_bits"),
                       stats, verdicts, {"epsilon": eps})


_DISPATCH = {
    "tx_saturation": sweep_tx_saturation,
    "rx_log": sweep_rx_log,
    "proportional_finite_rank": sweep_proportional_finite_rank,
    "proportional_smooth": sweep_proportional_smooth,
}


def run_sweep(spec, jobs=1):
    return _DISPATCH[spec.regime](spec, jobs)


def default_environment(regime, seed=0):
    if regime == "proportional_smooth":
        return SmoothSpread(5.0, np.eye(6), Direction(0.0, 0.0), Direction(np.pi / 2, 0.0))
    N = 3 if regime == "proportional_finite_rank" else 2
    return random_scatterers(N, 2, np.random.default_rng(seed))


def default_spec(regime, seed=0):
    """Shipped configuration for each regime (1-wavelength boxes, 20 dB)."""
    if regime not in REGIMES:
        raise InvalidArgument(f"unknown regime {regime!r}")
    env = default_environment(regime, seed)
    if regime == "tx_saturation":
        return SweepSpec(regime, (16, 32, 64, 128), Scenario(env), fixed=4, seed=seed)
    if regime == "rx_log":
        return SweepSpec(regime, (8, 16, 32, 64, 128, 256, 512), Scenario(env), fixed=2,
                         seed=seed)
    if regime == "proportional_finite_rank":
        ms = tuple(2**j for j in range(4, 13))
        return SweepSpec(regime, ms, Scenario(env), ratio_a=1.0, seed=seed)
    return SweepSpec(regime, (16, 32, 64, 128, 256), Scenario(env, resolution=16),
                     ratio_a=1.0, epsilon=0.5, smoothness_order=2, seed=seed)
