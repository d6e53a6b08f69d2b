"""Flat JSON run configuration.

Every key carries its unit where one applies.  Unknown keys are rejected.
Example::

    {
      "environment": "finite_rank",
      "scatterer_count": 2,
      "tx_count": 4,
      "rx_count": 4,
      "E_T": 100.0,
      "N_0": 1.0,
      "grid_resolution": 12
    }
"""

import json
from dataclasses import dataclass, fields

import numpy as np

from .antenna import DEFAULT_K, Box
from .asymptotics import REGIMES, Scenario, SweepSpec, default_spec
from .errors import InvalidArgument
from .operators import SnrConfig
from .sphere import Direction
from .spread import SmoothSpread, random_scatterers

__all__ = ["RunConfig", "load_config", "parse_config", "ConfigError"]

ROUTES = ("direct", "fredholm", "finite_rank")


class ConfigError(InvalidArgument):
    pass


@dataclass(frozen=True)
class RunConfig:
    environment: str = "finite_rank"
    k_rad_per_m: float = DEFAULT_K
    tx_box_side_m: float = 1.0
    rx_box_side_m: float = 1.0
    tx_box_center_m: tuple = (0.0, 0.0, 0.0)
    rx_box_center_m: tuple = (0.0, 0.0, 0.0)
    tx_count: int = 4
    rx_count: int = 4
    fill_scheme: str = "lattice"
    tx_polarization: object = "e1"
    rx_polarization: object = "e1"
    scatterer_count: int = 2
    scatterer_l_max: int = 2
    scatterer_seed: int = None
    scatterer_scale: float = 1.0
    kappa: float = 5.0
    mu_r_theta_rad: float = 0.0
    mu_r_phi_rad: float = 0.0
    mu_t_theta_rad: float = float(np.pi / 2)
    mu_t_phi_rad: float = 0.0
    amplitude_scale: float = 1.0
    E_T: float = 100.0
    N_0: float = 1.0
    grid_resolution: int = None
    seed: int = 0
    routes: tuple = None
    regime: str = None
    m_values: tuple = None
    fixed_count: int = None
    ratio_a: float = None
    epsilon: float = None
    smoothness_order: int = None

    def __post_init__(self):
        if self.environment not in ("finite_rank", "smooth"):
            raise ConfigError(f"environment must be 'finite_rank' or 'smooth', got {self.environment!r}")
        if self.fill_scheme not in ("lattice", "halton"):
            raise ConfigError(f"unknown fill_scheme {self.fill_scheme!r}")
        for name in ("k_rad_per_m", "tx_box_side_m", "rx_box_side_m", "E_T", "N_0"):
            if not _positive(getattr(self, name)):
                raise ConfigError(f"{name} must be a positive number")
        for name in ("tx_count", "rx_count", "scatterer_count"):
            if not _positive_int(getattr(self, name)):
                raise ConfigError(f"{name} must be a positive integer")
        if self.grid_resolution is not None and not (
            _positive_int(self.grid_resolution) and self.grid_resolution >= 2
        ):
            raise ConfigError("grid_resolution must be an integer >= 2")
        if not (isinstance(self.scatterer_l_max, int) and self.scatterer_l_max >= 0):
            raise ConfigError("scatterer_l_max must be a nonnegative integer")
        if self.routes is not None:
            bad = [r for r in self.routes if r not in ROUTES]
            if bad or not self.routes:
                raise ConfigError(f"unknown routes {bad}; choose from {ROUTES}")
        if self.regime is not None and self.regime not in REGIMES:
            raise ConfigError(f"unknown regime {self.regime!r}")
        for name in ("tx_polarization", "rx_polarization"):
            _polarization(getattr(self, name))

    # builders ---------------------------------------------------------------

    def resolution(self, default):
        return default if self.grid_resolution is None else self.grid_resolution

    def snr(self):
        return SnrConfig(self.E_T, self.N_0)

    def environment_model(self, N=None):
        if self.environment == "smooth":
            return SmoothSpread(
                self.kappa,
                self.amplitude_scale * np.eye(6),
                Direction(self.mu_r_theta_rad, self.mu_r_phi_rad),
                Direction(self.mu_t_theta_rad, self.mu_t_phi_rad),
            )
        seed = self.seed if self.scatterer_seed is None else self.scatterer_seed
        env = random_scatterers(N or self.scatterer_count, self.scatterer_l_max,
                                np.random.default_rng(seed))
        if self.scatterer_scale != 1.0:
            env = type(env)(env.coeffs * self.scatterer_scale, env.left_modes, env.right_modes)
        return env

    def scenario(self, resolution, environment=None):
        return Scenario(
            environment=self.environment_model() if environment is None else environment,
            tx_box=Box(self.tx_box_center_m, (self.tx_box_side_m,) * 3),
            rx_box=Box(self.rx_box_center_m, (self.rx_box_side_m,) * 3),
            k=self.k_rad_per_m,
            tx_polarization=_polarization(self.tx_polarization),
            rx_polarization=_polarization(self.rx_polarization),
            scheme=self.fill_scheme,
            snr=self.snr(),
            resolution=resolution,
        )

    def sweep_spec(self, explicit_keys=()):
        """Shipped defaults for the regime, overridden by keys present in the file."""
        if self.regime is None:
            raise ConfigError("sweep config needs a 'regime'")
        base = default_spec(self.regime, self.seed)
        scenario = base.scenario
        physical = {
            "environment", "k_rad_per_m", "tx_box_side_m", "rx_box_side_m", "tx_box_center_m",
            "rx_box_center_m", "fill_scheme", "tx_polarization", "rx_polarization",
            "scatterer_count", "scatterer_l_max", "scatterer_seed", "scatterer_scale",
            "kappa", "mu_r_theta_rad", "mu_r_phi_rad", "mu_t_theta_rad", "mu_t_phi_rad",
            "amplitude_scale", "E_T", "N_0", "grid_resolution",
        }
        if physical & set(explicit_keys):
            env = None if ({"environment", "scatterer_count", "scatterer_l_max",
                            "scatterer_seed", "scatterer_scale", "kappa", "mu_r_theta_rad",
                            "mu_r_phi_rad", "mu_t_theta_rad", "mu_t_phi_rad",
                            "amplitude_scale"} & set(explicit_keys)) else scenario.environment
            scenario = self.scenario(self.resolution(scenario.resolution), env)
        try:
            return SweepSpec(
                regime=self.regime,
                m_values=tuple(self.m_values) if self.m_values is not None else base.m_values,
                scenario=scenario,
                fixed=self.fixed_count if self.fixed_count is not None else base.fixed,
                ratio_a=self.ratio_a if self.ratio_a is not None else base.ratio_a,
                epsilon=self.epsilon if self.epsilon is not None else base.epsilon,
                smoothness_order=(self.smoothness_order if self.smoothness_order is not None
                                  else base.smoothness_order),
                seed=self.seed,
            )
        except InvalidArgument as exc:
            raise ConfigError(str(exc)) from exc


def _positive(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool) and v > 0 and np.isfinite(v)


def _positive_int(v):
    return isinstance(v, int) and not isinstance(v, bool) and v > 0


def _polarization(value):
    if isinstance(value, str):
        if len(value) == 2 and value[0] == "e" and value[1] in "123456":
            return np.eye(6, dtype=complex)[int(value[1]) - 1]
        raise ConfigError(f"polarization string must be e1..e6, got {value!r}")
    try:
        arr = np.asarray(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad polarization {value!r}") from exc
    if arr.shape == (6, 2):
        arr = arr[:, 0] + 1j * arr[:, 1]
    if arr.shape != (6,):
        raise ConfigError("polarization must be 'eN', 6 numbers or 6 [re, im] pairs")
    norm = np.linalg.norm(arr)
    if not 0 < norm <= 1 + 1e-12:
        raise ConfigError("polarization norm must lie in (0, 1]")
    return arr.astype(complex)


_FIELDS = {f.name for f in fields(RunConfig)}


def parse_config(data):
    """Build a :class:`RunConfig` from a dict; returns ``(config, explicit_keys)``."""
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a JSON object")
    unknown = sorted(set(data) - _FIELDS)
    if unknown:
        raise ConfigError(f"unknown configuration keys: {', '.join(unknown)}")
    kwargs = dict(data)
    for key in ("tx_box_center_m", "rx_box_center_m", "routes", "m_values"):
        if key in kwargs and kwargs[key] is not None:
            if not isinstance(kwargs[key], (list, tuple)):
                raise ConfigError(f"{key} must be a list")
            kwargs[key] = tuple(kwargs[key])
    for key in ("tx_box_center_m", "rx_box_center_m"):
        if key in kwargs and len(kwargs[key]) != 3:
            raise ConfigError(f"{key} must have three entries")
    try:
        return RunConfig(**kwargs), frozenset(data)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path):
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return parse_config(data)
