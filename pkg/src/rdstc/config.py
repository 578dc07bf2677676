"""Simulation configuration and its flat ``key = value`` file format."""

from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from rdstc.channel import SystemDims
from rdstc.errors import ConfigError, InvalidInputError
from rdstc.randomized import INIT_KINDS
from rdstc.receiver import NOISE_MODES

__all__ = ["SCHEMES", "SimConfig", "load_config", "parse_config_text"]

# SM: relay forwards its amplified observation without STC.
# Direct: source->destination only (no relay); used as the AWGN sanity link.
SCHEMES = ("SM", "D-Alamouti", "R-Alamouti-fixed", "R-Alamouti-MMSE", "ARMO", "Direct")

MIN_PACKETS = 100
U64 = 2**64


@dataclass(frozen=True)
class SimConfig:
    n_antennas: int = 2
    n_relays: int = 1
    codeword_slots: int = 2
    direct_link: bool = False
    snr_grid_db: tuple = (0.0, 2.0, 4.0, 6.0, 8.0, 10.0, 12.0, 14.0, 16.0)
    scheme: tuple = ("SM", "D-Alamouti", "R-Alamouti-fixed", "ARMO")
    packets_per_point: int = 20000
    training_packets: int = 500
    mu: float = 0.01
    r_init: str = "identity"
    fixed_r_kind: str = "phase-diagonal"
    master_seed: int = 1
    output_path: str = "results.csv"
    noise_mode: str = "white"
    fading: bool = True
    min_errors: int = 100
    max_packets: int = 0
    chunk_packets: int = 10000
    workers: int = 1
    bound_draws: int = 1000
    trace_packets: int = 4000
    trace_every: int = 100

    def __post_init__(self):
        self.validate()

    @property
    def dims(self):
        return SystemDims(self.n_antennas, self.n_relays, self.codeword_slots, self.direct_link)

    @property
    def packet_cap(self):
        """Hard packet limit when topping up towards ``min_errors``."""
        return max(self.max_packets, self.packets_per_point)

    def validate(self):
        grid = np.asarray(self.snr_grid_db, dtype=float)
        if grid.size == 0 or np.any(np.diff(grid) <= 0):
            raise ConfigError("snr_grid_db must be nonempty and strictly increasing")
        if not self.scheme:
            raise ConfigError("at least one scheme is required")
        for s in self.scheme:
            if s not in SCHEMES:
                raise ConfigError(f"unknown scheme {s!r}; expected one of {SCHEMES}")
        if self.packets_per_point < MIN_PACKETS:
            raise ConfigError(f"packets_per_point must be at least {MIN_PACKETS}")
        if self.training_packets < 0 or self.min_errors < 0 or self.max_packets < 0:
            raise ConfigError("packet and error counts must be nonnegative")
        if self.chunk_packets < 1 or self.workers < 1 or self.bound_draws < 1:
            raise ConfigError("chunk_packets, workers and bound_draws must be positive")
        if self.trace_packets < 1 or self.trace_every < 1:
            raise ConfigError("trace_packets and trace_every must be positive")
        if not self.mu >= 0:
            raise ConfigError("mu must be nonnegative")
        if self.r_init not in INIT_KINDS or self.fixed_r_kind not in INIT_KINDS:
            raise ConfigError(f"randomized matrix kinds must be in {INIT_KINDS}")
        if self.noise_mode not in NOISE_MODES:
            raise ConfigError(f"noise_mode must be one of {NOISE_MODES}")
        if not 0 <= self.master_seed < U64:
            raise ConfigError("master_seed must be an unsigned 64-bit integer")
        needs_alamouti = {"D-Alamouti", "R-Alamouti-fixed", "R-Alamouti-MMSE", "ARMO"}
        if needs_alamouti & set(self.scheme) and (self.n_antennas, self.codeword_slots) != (2, 2):
            raise ConfigError("Alamouti schemes need n_antennas == codeword_slots == 2")
        try:
            self.dims
        except InvalidInputError as exc:
            raise ConfigError(str(exc)) from exc

    def with_overrides(self, **kw):
        kw = {k: v for k, v in kw.items() if v is not None}
        return replace(self, **kw)


def _parse_bool(text):
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


def _parse_list(text, conv):
    return tuple(conv(x.strip()) for x in text.replace(";", ",").split(",") if x.strip())


def snr_range(start, stop, step):
    if step <= 0:
        raise ConfigError("snr step must be positive")
    n = int(np.floor((stop - start) / step + 1e-9)) + 1
    return tuple(float(start + i * step) for i in range(max(n, 0)))


_CONVERTERS = {int: int, float: float, str: str, bool: _parse_bool}


def parse_config_text(text, base=None):
    """Parse ``key = value`` lines (``#`` starts a comment) into a :class:`SimConfig`."""
    cfg = base or SimConfig()
    types = {f.name: f.type for f in fields(SimConfig)}
    values = {}
    snr = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (p.strip() for p in line.split("=", 1))
        key = key.lower().replace("-", "_")
        try:
            if key in ("snr_start", "snr_stop", "snr_step"):
                snr[key] = float(value)
            elif key in ("scheme", "schemes"):
                values["scheme"] = _parse_list(value, str)
            elif key == "snr_grid_db":
                values["snr_grid_db"] = _parse_list(value, float)
            elif key in types:
                values[key] = _CONVERTERS[types[key]](value)
            else:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {value!r}") from exc
    if snr:
        if set(snr) != {"snr_start", "snr_stop", "snr_step"}:
            raise ConfigError("snr_start, snr_stop and snr_step must be given together")
        values["snr_grid_db"] = snr_range(snr["snr_start"], snr["snr_stop"], snr["snr_step"])
    try:
        return replace(cfg, **values)
    except TypeError as exc:  # pragma: no cover
        raise ConfigError(str(exc)) from exc


def load_config(path):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config_text(text)
