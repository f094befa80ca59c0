"""Flat ``key = value`` scenario configuration.

One setting per line, ``#`` starts a comment.  Lengths in metres, times in
seconds, powers in watts, angles in degrees (keys ending in ``_deg``).
The keys listed in :data:`REQUIRED` must be present in every file; every
other key falls back to the value in :class:`ScenarioConfig`.
"""

import dataclasses
import math
from dataclasses import dataclass, field, fields
from typing import Dict, List, Optional, Tuple

from .channel import EmitterModel
from .geometry import DetectorConfig, Room, pyramid_detector


class ConfigError(ValueError):
    """Invalid or incomplete configuration; the message names the key."""


REQUIRED = ("room_length", "room_width", "room_height", "ap_rows", "ap_cols", "num_users")


def _int_list(text: str) -> Tuple[int, ...]:
    out = []
    for part in text.replace(",", " ").split():
        if "-" in part:
            lo, hi = part.split("-", 1)
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    return tuple(out)


@dataclass(frozen=True)
class ScenarioConfig:
    room_length: float = 5.0
    room_width: float = 5.0
    room_height: float = 3.0
    ap_rows: int = 4
    ap_cols: int = 4
    num_users: int = 10
    receive_height: float = 0.85
    detector_modes: int = 25
    detector_tilt_deg: float = 20.0
    detector_fov_deg: float = 20.0
    detector_area: float = 1e-4
    concentrator_gain: float = 1.0
    emitter: str = "gaussian"
    beam_waist: float = 0.4e-6
    wavelength: float = 830e-9
    half_power_angle_deg: float = 60.0
    responsivity: float = 1.0
    p_str: float = 1.0
    snr_db: float = 50.0
    noise_variance: Optional[float] = None
    slot_duration: float = 1e-6
    coherence_time: float = 10e-3
    topology: str = "uc"
    groups: int = 5
    nc_tiling: Optional[Tuple[int, int]] = None
    mode_selection: str = "best"
    ici_modes: str = "all"
    kmeans_max_iters: int = 100
    kmeans_restarts: int = 10
    drops: int = 100
    seed: int = 2023
    fig5_groups: Tuple[int, ...] = tuple(range(1, 10))
    fig6_users: Tuple[int, ...] = tuple(range(1, 11))
    fig6_groups: int = 4
    scenario: str = "default"

    def __post_init__(self):
        self.validate()

    # -- validation -----------------------------------------------------
    def validate(self):
        def need(key, ok, what):
            if not ok:
                raise ConfigError(f"{key}: must be {what} (got {getattr(self, key)!r})")

        for key in ("room_length", "room_width", "room_height", "detector_area", "beam_waist",
                    "wavelength", "p_str", "slot_duration", "coherence_time", "responsivity",
                    "concentrator_gain"):
            need(key, getattr(self, key) > 0, "> 0")
        for key in ("ap_rows", "ap_cols", "num_users", "detector_modes", "groups", "kmeans_max_iters", "kmeans_restarts",
                    "fig6_groups"):
            need(key, getattr(self, key) >= 1, ">= 1")
        need("drops", self.drops >= 0, ">= 0")
        need("receive_height", 0 <= self.receive_height < self.room_height, "in [0, room_height)")
        need("detector_tilt_deg", 0 <= self.detector_tilt_deg < 90, "in [0, 90)")
        need("detector_fov_deg", 0 < self.detector_fov_deg <= 90, "in (0, 90]")
        need("half_power_angle_deg", 0 < self.half_power_angle_deg < 90, "in (0, 90)")
        need("emitter", self.emitter in ("gaussian", "lambertian"), "gaussian or lambertian")
        need("topology", self.topology in ("standard", "nc", "uc"), "standard, nc or uc")
        need("mode_selection", self.mode_selection in ("best", "first"), "best or first")
        need("ici_modes", self.ici_modes in ("all", "used"), "all or used")
        need("noise_variance", self.noise_variance is None or self.noise_variance > 0, "> 0")
        need("seed", 0 <= self.seed < 2 ** 64, "an unsigned 64-bit integer")
        need("detector_modes", self.detector_modes >= self.ap_rows * self.ap_cols,
             ">= the number of APs (standard BIA uses every AP)")
        need("fig5_groups", all(1 <= g <= self.ap_rows * self.ap_cols for g in self.fig5_groups),
             "between 1 and the number of APs")
        need("fig6_users", all(k >= 1 for k in self.fig6_users), ">= 1")
        if self.nc_tiling is not None:
            gx, gy = self.nc_tiling
            need("nc_tiling", gx >= 1 and gy >= 1 and self.ap_rows % gx == 0 and self.ap_cols % gy == 0,
                 "a tiling dividing the AP grid")

    # -- derived objects ------------------------------------------------
    @property
    def room(self) -> Room:
        return Room(self.room_length, self.room_width, self.room_height)

    @property
    def detector(self) -> DetectorConfig:
        return pyramid_detector(self.detector_modes, math.radians(self.detector_tilt_deg),
                                math.radians(self.detector_fov_deg), self.detector_area, self.concentrator_gain)

    @property
    def emitter_model(self) -> EmitterModel:
        return EmitterModel(self.emitter, math.radians(self.half_power_angle_deg), self.beam_waist,
                            self.wavelength, self.p_str, self.responsivity)

    def replace(self, **changes) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            if v is None:
                continue
            if f.name in ("fig5_groups", "fig6_users"):
                v = " ".join(map(str, v))
            elif f.name == "nc_tiling":
                v = f"{v[0]}x{v[1]}"
            lines.append(f"{f.name} = {v}")
        return "\n".join(lines) + "\n"


_FIELDS = {f.name: f for f in fields(ScenarioConfig)}


def _convert(key: str, raw: str):
    default = _FIELDS[key].default
    try:
        if key in ("fig5_groups", "fig6_users"):
            return _int_list(raw)
        if key == "nc_tiling":
            gx, gy = raw.lower().split("x")
            return int(gx), int(gy)
        if key == "noise_variance":
            return float(raw)
        if isinstance(default, bool):
            return raw.lower() in ("1", "true", "yes")
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
        return raw
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {raw!r}") from None


def parse_config(text: str, require: bool = True, overrides: Optional[Dict[str, object]] = None) -> ScenarioConfig:
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, raw = (p.strip() for p in line.split("=", 1))
        if key not in _FIELDS:
            raise ConfigError(f"{key}: unknown key (line {lineno})")
        values[key] = _convert(key, raw)
    if require:
        for key in REQUIRED:
            if key not in values:
                raise ConfigError(f"{key}: required key missing")
    values.update(overrides or {})
    return ScenarioConfig(**values)


def load_config(path, overrides: Optional[Dict[str, object]] = None) -> ScenarioConfig:
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    return parse_config(text, overrides=overrides)
