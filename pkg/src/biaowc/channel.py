"""Line-of-sight optical channel from ceiling emitters to multi-mode detectors.

Gains are DC channel gains with the photodiode responsivity folded in, so
a gain ``h`` turns a transmitted optical intensity ``x`` into a
photocurrent ``h * x``.  Only the LoS path is modelled.
"""

import math
from dataclasses import dataclass
from typing import Dict, Optional, Sequence

import numpy as np

from . import _accel
from .geometry import DOWN, AccessPoint, DetectorConfig, UserTerminal, positions

RANK_TOL = 1e-9


@dataclass(frozen=True)
class EmitterModel:
    """Beam law of the ceiling transmitters.

    ``variant`` is ``"lambertian"`` (uses ``half_power_angle``) or
    ``"gaussian"`` (uses ``waist`` and ``wavelength``).
    """

    variant: str = "gaussian"
    half_power_angle: float = math.radians(60.0)
    waist: float = 5e-6
    wavelength: float = 830e-9
    power: float = 1.0
    responsivity: float = 1.0

    def __post_init__(self):
        if self.variant not in ("lambertian", "gaussian"):
            raise ValueError(f"unknown emitter variant {self.variant!r}")
        if not 0 < self.half_power_angle < math.pi / 2:
            raise ValueError("half_power_angle must lie in (0, pi/2)")
        if self.waist <= 0 or self.wavelength <= 0:
            raise ValueError("waist and wavelength must be > 0")
        if self.power <= 0:
            raise ValueError("power must be > 0")

    @property
    def lambertian_order(self) -> float:
        return -math.log(2.0) / math.log(math.cos(self.half_power_angle))

    @property
    def rayleigh_range(self) -> float:
        return math.pi * self.waist ** 2 / self.wavelength

    def beam_radius(self, z: float) -> float:
        return self.waist * math.sqrt(1.0 + (z / self.rayleigh_range) ** 2)

    def _kernel_args(self):
        if self.variant == "lambertian":
            return _accel.LAMBERTIAN, self.lambertian_order, 0.0
        return _accel.GAUSSIAN_BEAM, self.waist, self.rayleigh_range


def _check_downward(aps):
    for ap in aps:
        if not np.allclose(ap.orientation, DOWN):
            raise NotImplementedError("only downward-facing access points are supported")


def los_gain(ap: AccessPoint, user_position, mode_orientation, detector: DetectorConfig,
             emitter: EmitterModel) -> float:
    """LoS gain from one AP to one photodiode.

    Exactly zero when the incidence angle exceeds the detector field of view.
    """
    _check_downward([ap])
    p = np.asarray(ap.position, dtype=float)
    u = np.asarray(user_position, dtype=float)
    if u[2] >= p[2]:
        raise ValueError("user must lie below the ceiling")
    if np.linalg.norm(p - u) == 0:
        raise ValueError("AP and user coincide")
    n = np.asarray(mode_orientation, dtype=float).reshape(1, 1, 3)
    variant, p0, p1 = emitter._kernel_args()
    g, _ = _accel.los_gains(p.reshape(1, 3), u.reshape(1, 3), n, float(detector.field_of_view),
                            float(detector.area), float(detector.concentrator_gain),
                            float(emitter.responsivity), variant, float(p0), float(p1))
    return float(g[0, 0, 0])


@dataclass(frozen=True)
class ChannelSet:
    """Per-user channel matrices.

    ``gains[k]`` is the ``M x L`` matrix of user ``k``: row = preset mode,
    column = AP.  ``incidence`` holds the matching incidence angles.
    """

    gains: np.ndarray
    incidence: np.ndarray
    noise_variance: float
    rank_deficient: np.ndarray

    @property
    def num_users(self) -> int:
        return self.gains.shape[0]

    def matrix(self, user: int, ap_ids: Optional[Sequence[int]] = None, num_modes: Optional[int] = None):
        H = self.gains[user]
        if ap_ids is not None:
            H = H[:, list(ap_ids)]
        if num_modes is not None:
            H = H[:num_modes]
        return H


def is_rank_deficient(H) -> bool:
    """``sigma_min / sigma_max < 1e-9`` (or an all-zero matrix)."""
    s = np.linalg.svd(np.asarray(H, dtype=float), compute_uv=False)
    return bool(s.size == 0 or s[0] == 0 or s[-1] / s[0] < RANK_TOL)


def build_channel_set(aps: Sequence[AccessPoint], users: Sequence[UserTerminal], emitter: EmitterModel,
                      noise_variance: float, serving: Optional[Dict[int, Sequence[int]]] = None) -> ChannelSet:
    """Evaluate every (user, mode, AP) gain.

    ``serving`` maps user id to the AP ids that serve it (default: all APs);
    it only affects the rank-deficiency flags.  All users must share the
    same number of preset modes.
    """
    _check_downward(aps)
    if noise_variance <= 0:
        raise ValueError("noise_variance must be > 0")
    n_aps = len(aps)
    if not users:
        empty = np.zeros((0, 0, n_aps))
        return ChannelSet(empty, empty.copy(), float(noise_variance), np.zeros(0, dtype=bool))
    modes = {u.detector.num_modes for u in users}
    if len(modes) != 1:
        raise ValueError("all users must have the same number of preset modes")
    dets = [u.detector for u in users]
    ref = dets[0]
    if any((d.field_of_view, d.area, d.concentrator_gain) != (ref.field_of_view, ref.area, ref.concentrator_gain)
           for d in dets):
        # heterogeneous detectors: evaluate user by user
        parts = [build_channel_set(aps, [u], emitter, noise_variance) for u in users]
        gains = np.concatenate([p.gains for p in parts])
        inc = np.concatenate([p.incidence for p in parts])
    else:
        normals = np.stack([d.normals() for d in dets])
        up = positions(users)
        ap = positions(aps)
        if np.any(up[:, None, 2] >= ap[None, :, 2]):
            raise ValueError("users must lie below the ceiling")
        variant, p0, p1 = emitter._kernel_args()
        gains, cos_inc = _accel.los_gains(ap, up, normals, float(ref.field_of_view), float(ref.area),
                                          float(ref.concentrator_gain), float(emitter.responsivity),
                                          variant, float(p0), float(p1))
        inc = np.arccos(np.clip(cos_inc, -1.0, 1.0))
    flags = np.zeros(len(users), dtype=bool)
    for idx, u in enumerate(users):
        ap_ids = list(serving[u.id]) if serving is not None else list(range(n_aps))
        H = gains[idx][:len(ap_ids)][:, ap_ids]
        flags[idx] = is_rank_deficient(H)
    return ChannelSet(gains, inc, float(noise_variance), flags)


def mode_condition_number(channel_set: ChannelSet, user: int, ap_ids: Optional[Sequence[int]] = None) -> float:
    """``sigma_max / sigma_min`` of the square mode submatrix; ``inf`` if singular."""
    H = channel_set.gains[user]
    if ap_ids is None:
        ap_ids = range(min(H.shape))
    ap_ids = list(ap_ids)
    H = H[:len(ap_ids)][:, ap_ids]
    return condition_number(H)


def condition_number(H) -> float:
    s = np.linalg.svd(np.asarray(H, dtype=float), compute_uv=False)
    if s.size == 0 or s[-1] == 0 or s[-1] <= s[0] * np.finfo(float).eps:
        return math.inf
    return float(s[0] / s[-1])
