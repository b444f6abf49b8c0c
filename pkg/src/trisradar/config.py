"""JSON configuration: schema validation, loading, and normalized echo.

Unknown fields are rejected by name. Field reference (defaults in
parentheses):

    description   optional free-text note
    grid          {l_x, l_y, lo, step}
    tris          {n_x, n_y}
    receiver      {n_x, n_y}
    targets       [{bin: m or [i, j], snr_db}, ...]
    noise         {type: "white", sigma2 (1.0)} or
                  {type: "matrix", values: [[[re, im], ...], ...]}
    p_t           transmit power (1.0)
    p_fa          false alarm probability (1e-4)
    rl            {alpha_lr (0.1), gamma_discount (0.8), epsilon (0.5),
                   t_bar_max (10)}
    pulses        pulses per episode (200)
    solver        {beta0, beta_cap, anneal_every, max_iters, tol, restarts,
                   shrink, sufficient_increase}
    frequency_hz  carrier (28e9)
    d_l_wavelengths  feed-to-surface distance in wavelengths (20.0)
    phase_policy  "adaptive" (default) or "random" baseline
    seed          master seed (null -> caller decides)
"""

import json
from pathlib import Path

import numpy as np

from .beamformer import SolverParams
from .geometry import DEFAULT_FREQUENCY_HZ, UpaSpec, make_grid
from .harness import EpisodeConfig, RlParams
from .scene import Target


class ConfigError(ValueError):
    """Raised for any schema or value problem in a configuration."""


_TOP_KEYS = {"description", "grid", "tris", "receiver", "targets", "noise",
             "p_t", "p_fa", "rl", "pulses", "solver", "frequency_hz",
             "d_l_wavelengths", "phase_policy", "seed"}
_GRID_KEYS = {"l_x", "l_y", "lo", "step"}
_UPA_KEYS = {"n_x", "n_y"}
_TARGET_KEYS = {"bin", "snr_db"}
_NOISE_KEYS = {"type", "sigma2", "values"}
_RL_KEYS = {"alpha_lr", "gamma_discount", "epsilon", "t_bar_max"}
_SOLVER_KEYS = {"beta0", "beta_cap", "anneal_every", "max_iters", "tol",
                "restarts", "shrink", "sufficient_increase"}


def _check_keys(section: dict, allowed: set, where: str):
    if not isinstance(section, dict):
        raise ConfigError(f"{where} must be an object")
    for key in section:
        if key not in allowed:
            raise ConfigError(f"unknown field '{key}' in {where}")


def _number(section: dict, key: str, where: str, default=None):
    if key not in section:
        if default is None:
            raise ConfigError(f"missing field '{key}' in {where}")
        return default
    val = section[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError(f"field '{key}' in {where} must be a number")
    return val


def _integer(section: dict, key: str, where: str, default=None):
    val = _number(section, key, where, default)
    if int(val) != val:
        raise ConfigError(f"field '{key}' in {where} must be an integer")
    return int(val)


def _parse_grid(section):
    _check_keys(section, _GRID_KEYS, "grid")
    try:
        return make_grid(_integer(section, "l_x", "grid"),
                         _integer(section, "l_y", "grid"),
                         float(_number(section, "lo", "grid")),
                         float(_number(section, "step", "grid")))
    except ValueError as exc:
        raise ConfigError(f"grid: {exc}") from exc


def _parse_upa(section, where):
    _check_keys(section, _UPA_KEYS, where)
    try:
        return UpaSpec(_integer(section, "n_x", where), _integer(section, "n_y", where))
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def _parse_targets(items, grid):
    if not isinstance(items, list):
        raise ConfigError("targets must be a list")
    targets = []
    for idx, item in enumerate(items):
        where = f"targets[{idx}]"
        _check_keys(item, _TARGET_KEYS, where)
        if "bin" not in item:
            raise ConfigError(f"missing field 'bin' in {where}")
        raw = item["bin"]
        if isinstance(raw, list):
            if len(raw) != 2:
                raise ConfigError(f"field 'bin' in {where} must be m or [i, j]")
            try:
                m = grid.bin_index(int(raw[0]), int(raw[1]))
            except ValueError as exc:
                raise ConfigError(f"{where}: {exc}") from exc
        else:
            m = _integer(item, "bin", where)
            if not (0 <= m < grid.n_bins):
                raise ConfigError(f"{where}: bin {m} outside the grid")
        snr = float(_number(item, "snr_db", where))
        targets.append(Target(bin=m, snr_db=snr))
    return tuple(targets)


def _parse_noise(section, n_rx):
    if section is None:
        return np.eye(n_rx, dtype=complex)
    _check_keys(section, _NOISE_KEYS, "noise")
    kind = section.get("type", "white")
    if kind == "white":
        if "values" in section:
            raise ConfigError("white noise takes 'sigma2', not 'values'")
        sigma2 = float(_number(section, "sigma2", "noise", default=1.0))
        if sigma2 <= 0:
            raise ConfigError("noise sigma2 must be positive")
        return sigma2 * np.eye(n_rx, dtype=complex)
    if kind == "matrix":
        if "sigma2" in section:
            raise ConfigError("matrix noise takes 'values', not 'sigma2'")
        if "values" not in section:
            raise ConfigError("missing field 'values' in noise")
        arr = np.asarray(section["values"], dtype=float)
        if arr.shape != (n_rx, n_rx, 2):
            raise ConfigError(f"noise values must be {n_rx}x{n_rx} [re, im] pairs")
        return arr[..., 0] + 1j * arr[..., 1]
    raise ConfigError(f"unknown noise type '{kind}'")


def _parse_rl(section):
    if section is None:
        return RlParams()
    _check_keys(section, _RL_KEYS, "rl")
    try:
        return RlParams(alpha_lr=float(_number(section, "alpha_lr", "rl", 0.1)),
                        gamma_discount=float(_number(section, "gamma_discount", "rl", 0.8)),
                        epsilon=float(_number(section, "epsilon", "rl", 0.5)),
                        t_bar_max=_integer(section, "t_bar_max", "rl", 10))
    except ValueError as exc:
        raise ConfigError(f"rl: {exc}") from exc


def _parse_solver(section):
    if section is None:
        return SolverParams()
    _check_keys(section, _SOLVER_KEYS, "solver")
    defaults = SolverParams()
    try:
        return SolverParams(
            beta0=float(_number(section, "beta0", "solver", defaults.beta0)),
            beta_cap=float(_number(section, "beta_cap", "solver", defaults.beta_cap)),
            anneal_every=_integer(section, "anneal_every", "solver", defaults.anneal_every),
            max_iters=_integer(section, "max_iters", "solver", defaults.max_iters),
            tol=float(_number(section, "tol", "solver", defaults.tol)),
            restarts=_integer(section, "restarts", "solver", defaults.restarts),
            shrink=float(_number(section, "shrink", "solver", defaults.shrink)),
            sufficient_increase=float(_number(section, "sufficient_increase", "solver",
                                              defaults.sufficient_increase)))
    except ValueError as exc:
        raise ConfigError(f"solver: {exc}") from exc


def config_from_dict(raw: dict) -> EpisodeConfig:
    """Validate a parsed JSON object and build the episode configuration."""
    _check_keys(raw, _TOP_KEYS, "config")
    for required in ("grid", "tris", "receiver", "targets"):
        if required not in raw:
            raise ConfigError(f"missing field '{required}' in config")
    if "description" in raw and not isinstance(raw["description"], str):
        raise ConfigError("description must be a string")

    grid = _parse_grid(raw["grid"])
    tris_spec = _parse_upa(raw["tris"], "tris")
    rx_spec = _parse_upa(raw["receiver"], "receiver")
    targets = _parse_targets(raw["targets"], grid)
    gamma = _parse_noise(raw.get("noise"), rx_spec.n_elements)

    p_fa = float(_number(raw, "p_fa", "config", 1e-4))
    if not (0.0 < p_fa < 1.0):
        raise ConfigError(f"p_fa must be in (0, 1), got {p_fa}")

    phase_policy = raw.get("phase_policy", "adaptive")
    seed = raw.get("seed")
    if seed is not None:
        seed = _integer(raw, "seed", "config")
        if seed < 0:
            raise ConfigError("seed must be nonnegative")

    try:
        return EpisodeConfig(
            grid=grid, tris_spec=tris_spec, rx_spec=rx_spec, targets=targets,
            gamma=gamma,
            p_t=float(_number(raw, "p_t", "config", 1.0)),
            p_fa=p_fa,
            rl=_parse_rl(raw.get("rl")),
            pulses=_integer(raw, "pulses", "config", 200),
            solver=_parse_solver(raw.get("solver")),
            frequency_hz=float(_number(raw, "frequency_hz", "config", DEFAULT_FREQUENCY_HZ)),
            d_l_wavelengths=float(_number(raw, "d_l_wavelengths", "config", 20.0)),
            phase_policy=phase_policy,
            seed=seed)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path) -> EpisodeConfig:
    """Read and validate a JSON config file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a JSON object")
    return config_from_dict(raw)


def config_to_dict(cfg: EpisodeConfig, description: str | None = None) -> dict:
    """Normalized, JSON-serializable echo of a configuration."""
    gamma = cfg.gamma
    if np.allclose(gamma, gamma[0, 0].real * np.eye(gamma.shape[0])):
        noise = {"type": "white", "sigma2": float(gamma[0, 0].real)}
    else:
        noise = {"type": "matrix",
                 "values": np.stack([gamma.real, gamma.imag], axis=-1).tolist()}
    grid = cfg.grid
    if grid.step is not None:
        lo, step = grid.lo, grid.step
    else:
        lo = float(grid.nu_x[0])
        step = (float(grid.nu_x[1] - grid.nu_x[0]) if grid.l_x > 1
                else float(grid.nu_y[1] - grid.nu_y[0]) if grid.l_y > 1 else 0.05)
    out = {
        "grid": {"l_x": grid.l_x, "l_y": grid.l_y, "lo": lo, "step": step},
        "tris": {"n_x": cfg.tris_spec.n_x, "n_y": cfg.tris_spec.n_y},
        "receiver": {"n_x": cfg.rx_spec.n_x, "n_y": cfg.rx_spec.n_y},
        "targets": [{"bin": t.bin, "snr_db": t.snr_db} for t in cfg.targets],
        "noise": noise,
        "p_t": cfg.p_t,
        "p_fa": cfg.p_fa,
        "rl": {"alpha_lr": cfg.rl.alpha_lr, "gamma_discount": cfg.rl.gamma_discount,
               "epsilon": cfg.rl.epsilon, "t_bar_max": cfg.rl.t_bar_max},
        "pulses": cfg.pulses,
        "solver": {"beta0": cfg.solver.beta0, "beta_cap": cfg.solver.beta_cap,
                   "anneal_every": cfg.solver.anneal_every,
                   "max_iters": cfg.solver.max_iters, "tol": cfg.solver.tol,
                   "restarts": cfg.solver.restarts, "shrink": cfg.solver.shrink,
                   "sufficient_increase": cfg.solver.sufficient_increase},
        "frequency_hz": cfg.frequency_hz,
        "d_l_wavelengths": cfg.d_l_wavelengths,
        "phase_policy": cfg.phase_policy,
        "seed": cfg.seed,
    }
    if description:
        out["description"] = description
    return out
