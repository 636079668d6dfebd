"""YAML experiment configuration: parsing, validation, canonical hashing.

A sweep config names a scenario, a channel profile, a grid, an
allocation, a power specification, and exactly one way of choosing the
power split.  Field errors carry the dotted path to the offending key.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from typing import Any

import numpy as np
import yaml

from .core import ChannelSpec
from .channel import DdPath

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "load_config",
    "parse_config",
    "config_hash",
    "allocation_descriptor",
]

MODES = ("capacity", "estimation", "ber")


class ConfigError(Exception):
    """Malformed configuration; message names the offending field."""


def config_hash(raw: dict) -> str:
    """sha256 of the canonical JSON form of the parsed config."""
    canon = json.dumps(raw, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(canon.encode()).hexdigest()


def _require(mapping: dict, key: str, path: str) -> Any:
    if key not in mapping:
        raise ConfigError(f"{path}.{key}: required field is missing")
    return mapping[key]


def _as_int(value: Any, path: str) -> int:
    if not isinstance(value, int) or isinstance(value, bool):
        raise ConfigError(f"{path}: expected an integer, got {value!r}")
    return value


def _as_float(value: Any, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path}: expected a number, got {value!r}")
    return float(value)


def parse_channel(raw: Any, grid: Any, path: str = "channel") -> tuple[ChannelSpec, list[DdPath]]:
    """Build a ChannelSpec (plus optional fixed path list) from config."""
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: expected a mapping")
    if not isinstance(grid, dict):
        raise ConfigError("grid: expected a mapping with N and M")
    L = _as_int(_require(raw, "L", path), f"{path}.L")
    Q = _as_int(_require(raw, "Q", path), f"{path}.Q")
    N = _as_int(_require(grid, "N", "grid"), "grid.N")
    M = _as_int(_require(grid, "M", "grid"), "grid.M")
    mode = raw.get("tap_variances", "uniform")
    try:
        if mode == "uniform":
            spec = ChannelSpec.uniform(N=N, M=M, L=L, Q=Q)
        elif isinstance(mode, list):
            variances = {}
            for i, entry in enumerate(mode):
                if not (isinstance(entry, list) and len(entry) == 3):
                    raise ConfigError(
                        f"{path}.tap_variances[{i}]: expected [l, q, variance]")
                l, q, v = entry
                variances[(_as_int(l, f"{path}.tap_variances[{i}].l"),
                           _as_int(q, f"{path}.tap_variances[{i}].q"))] = \
                    _as_float(v, f"{path}.tap_variances[{i}].variance")
            spec = ChannelSpec(N=N, M=M, L=L, Q=Q, tap_variances=variances)
        else:
            raise ConfigError(
                f"{path}.tap_variances: expected 'uniform' or a list of "
                f"[l, q, variance] entries, got {mode!r}")
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc

    paths = []
    for i, entry in enumerate(raw.get("paths", []) or []):
        ppath = f"{path}.paths[{i}]"
        if not isinstance(entry, dict):
            raise ConfigError(f"{ppath}: expected a mapping")
        gain = _require(entry, "gain", ppath)
        if not (isinstance(gain, list) and len(gain) == 2):
            raise ConfigError(f"{ppath}.gain: expected [re, im]")
        paths.append(DdPath(
            gain=complex(_as_float(gain[0], f"{ppath}.gain[0]"),
                         _as_float(gain[1], f"{ppath}.gain[1]")),
            delay=_as_int(_require(entry, "delay", ppath), f"{ppath}.delay"),
            doppler=_as_int(_require(entry, "doppler", ppath), f"{ppath}.doppler"),
        ))
    return spec, paths


@dataclass(frozen=True)
class ExperimentConfig:
    """A fully validated sweep description."""

    scenario: str
    mode: str
    spec: ChannelSpec
    paths: tuple[DdPath, ...]
    alloc_kind: str
    alloc_position: Any
    total_power: float
    noise_var: float             # estimation sweeps re-derive this per SNR point
    implied_alpha: float | None  # set when power came from a symbol-SNR pair
    alpha_mode: str              # "fixed" | "grid" | "optimize"
    alpha: float | None
    alpha_grid: tuple[float, ...] | None
    snr_tx_grid_db: tuple[float, ...]
    trials: int
    seed: int
    threads: int
    out: str
    raw: dict

    @property
    def hash(self) -> str:
        return config_hash(self.raw)


def parse_config(raw: Any) -> ExperimentConfig:
    if not isinstance(raw, dict):
        raise ConfigError("top level: expected a mapping")
    known = {"scenario", "mode", "channel", "grid", "allocation", "power",
             "alpha", "alpha_grid", "optimize_alpha", "snr_tx_grid_db",
             "trials", "seed", "threads", "out"}
    for key in raw:
        if key not in known:
            raise ConfigError(f"{key}: unknown field")

    scenario = str(raw.get("scenario", "sweep"))
    mode = raw.get("mode")
    if mode not in MODES:
        raise ConfigError(f"mode: expected one of {MODES}, got {mode!r}")

    spec, paths = parse_channel(_require(raw, "channel", "top level"),
                                _require(raw, "grid", "top level"))

    alloc = _require(raw, "allocation", "top level")
    if not isinstance(alloc, dict):
        raise ConfigError("allocation: expected a mapping")
    kind = _require(alloc, "kind", "allocation")
    position = alloc.get("position")
    if isinstance(position, list):
        position = tuple(position)

    # power: frame-SNR form, explicit form, or per-symbol SNR pair
    power = _require(raw, "power", "top level")
    if not isinstance(power, dict):
        raise ConfigError("power: expected a mapping")
    has_frame = "snr_tx_db" in power
    has_pair = "snr_p_db" in power or "snr_c_db" in power
    has_explicit = not has_frame and not has_pair
    if has_frame and has_pair:
        raise ConfigError("power: snr_tx_db and the symbol-SNR pair are exclusive")
    implied_alpha = None
    noise_var: float | None
    if has_pair:
        if "snr_p_db" not in power or "snr_c_db" not in power:
            raise ConfigError("power: symbol-SNR form needs both snr_p_db and snr_c_db")
        from .capacity import alpha_from_symbol_snrs  # local import avoids a cycle

        snr_p = 10 ** (_as_float(power["snr_p_db"], "power.snr_p_db") / 10)
        snr_c = 10 ** (_as_float(power["snr_c_db"], "power.snr_c_db") / 10)
        noise_var = _as_float(power.get("noise_var", 1.0), "power.noise_var")
        k_comm = spec.K - _overhead_for(kind, spec)
        total = (snr_p + k_comm * snr_c) * noise_var
        implied_alpha = alpha_from_symbol_snrs(snr_p, snr_c, k_comm)
    elif has_frame:
        snr_tx_db = _as_float(power["snr_tx_db"], "power.snr_tx_db")
        total = _as_float(power.get("total", 1.0), "power.total")
        noise_var = total / (spec.K * 10 ** (snr_tx_db / 10))
    else:  # explicit (total, noise_var)
        total = _as_float(_require(power, "total", "power"), "power.total")
        noise_var = _as_float(_require(power, "noise_var", "power"), "power.noise_var")

    # exactly one way of fixing the power split
    alpha_keys = [k for k in ("alpha", "alpha_grid", "optimize_alpha") if k in raw]
    if len(alpha_keys) != 1:
        raise ConfigError(
            f"exactly one of alpha, alpha_grid, optimize_alpha must be given; "
            f"got {alpha_keys or 'none'}")
    alpha = None
    alpha_grid = None
    if alpha_keys[0] == "alpha":
        alpha_mode = "fixed"
        if raw["alpha"] == "implied":
            if implied_alpha is None:
                raise ConfigError("alpha: 'implied' needs the symbol-SNR power form")
            alpha = implied_alpha
        else:
            alpha = _as_float(raw["alpha"], "alpha")
            if not 0.0 <= alpha <= 1.0:
                raise ConfigError(f"alpha: must lie in [0, 1], got {alpha}")
    elif alpha_keys[0] == "alpha_grid":
        alpha_mode = "grid"
        g = raw["alpha_grid"]
        if not isinstance(g, dict):
            raise ConfigError("alpha_grid: expected {start, stop, points}")
        start = _as_float(_require(g, "start", "alpha_grid"), "alpha_grid.start")
        stop = _as_float(_require(g, "stop", "alpha_grid"), "alpha_grid.stop")
        points = _as_int(_require(g, "points", "alpha_grid"), "alpha_grid.points")
        if points < 2 or not (0 <= start < stop <= 1):
            raise ConfigError("alpha_grid: need 0 <= start < stop <= 1 and points >= 2")
        alpha_grid = tuple(float(a) for a in np.linspace(start, stop, points))
    else:
        alpha_mode = "optimize"
        if raw["optimize_alpha"] is not True:
            raise ConfigError("optimize_alpha: only 'true' is meaningful")

    snr_grid = raw.get("snr_tx_grid_db")
    if snr_grid is not None:
        if mode != "estimation":
            raise ConfigError("snr_tx_grid_db: only valid in estimation mode")
        if not isinstance(snr_grid, list) or not snr_grid:
            raise ConfigError("snr_tx_grid_db: expected a non-empty list of dB values")
        snr_grid = tuple(_as_float(v, f"snr_tx_grid_db[{i}]")
                         for i, v in enumerate(snr_grid))
    elif mode == "estimation":
        snr_grid = (10.0 * np.log10(total / (spec.K * noise_var)),)
    else:
        snr_grid = ()

    trials = _as_int(raw.get("trials", 100), "trials")
    if trials < 1:
        raise ConfigError("trials: must be >= 1")
    seed = _as_int(raw.get("seed", 0), "seed")
    threads = _as_int(raw.get("threads", 1), "threads")
    out = str(raw.get("out", f"{scenario}.csv"))

    raw_with_defaults = dict(raw)
    raw_with_defaults.setdefault("seed", 0)
    raw_with_defaults.setdefault("trials", 100)
    return ExperimentConfig(
        scenario=scenario, mode=mode, spec=spec, paths=tuple(paths),
        alloc_kind=kind, alloc_position=position,
        total_power=total, noise_var=noise_var, implied_alpha=implied_alpha,
        alpha_mode=alpha_mode, alpha=alpha, alpha_grid=alpha_grid,
        snr_tx_grid_db=tuple(snr_grid), trials=trials, seed=seed,
        threads=threads, out=out, raw=raw_with_defaults,
    )


def _overhead_for(kind: str, spec: ChannelSpec) -> int:
    from .pilot import make_allocation

    return make_allocation(kind, spec, pilot_power=1.0).K_p


def load_config(path: str) -> ExperimentConfig:
    """Parse and validate a YAML experiment file."""
    try:
        with open(path) as fh:
            raw = yaml.safe_load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"YAML syntax error in {path}: {exc}") from exc
    try:
        return parse_config(raw)
    except ConfigError:
        raise
    except (TypeError, ValueError, KeyError) as exc:
        raise ConfigError(f"invalid config {path}: {exc}") from exc


def allocation_descriptor(alloc) -> dict:
    """Serializable description of an Allocation in config-schema terms.

    Feeding the fields back through make_allocation rebuilds the same
    geometry: position is the island centre cell, the slab pilot's free
    coordinate otherwise.
    """
    m, n = alloc.pilot_cell
    if alloc.kind == "island":
        position = [int(m), int(n)]
    elif alloc.kind == "doppler_slab":
        position = int(n)
    else:
        position = int(m)
    return {
        "kind": alloc.kind,
        "grid": {"N": alloc.N, "M": alloc.M},
        "position": position,
        "pilot_power": alloc.pilot_power,
    }
