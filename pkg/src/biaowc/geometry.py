"""Room, access-point grid, user placement and detector orientations.

Pure geometry; channel physics lives in :mod:`biaowc.channel`.
All lengths are in metres and all angles in radians.
"""

from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np

DOWN = (0.0, 0.0, -1.0)


@dataclass(frozen=True)
class Room:
    length_m: float
    width_m: float
    height_m: float

    def __post_init__(self):
        for name in ("length_m", "width_m", "height_m"):
            if not getattr(self, name) > 0:
                raise ValueError(f"Room.{name} must be > 0, got {getattr(self, name)!r}")

    @property
    def center(self) -> Tuple[float, float]:
        return 0.5 * self.length_m, 0.5 * self.width_m


@dataclass(frozen=True)
class AccessPoint:
    id: int
    position: Tuple[float, float, float]
    orientation: Tuple[float, float, float] = DOWN


@dataclass(frozen=True)
class DetectorConfig:
    """Reconfigurable detector: one photodiode per preset mode.

    Parameters
    ----------
    orientations : sequence of (azimuth, elevation) pairs
        Elevation is measured from the horizontal plane, so ``pi/2`` is
        the zenith.
    field_of_view : float
        Half-angle in radians, ``0 < fov <= pi/2``.
    area : float
        Physical photodiode area in m^2.
    concentrator_gain : float
        Dimensionless optical concentrator gain.
    """

    orientations: Tuple[Tuple[float, float], ...]
    field_of_view: float
    area: float = 1e-4
    concentrator_gain: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "orientations",
                           tuple((float(a), float(e)) for a, e in self.orientations))
        if len(self.orientations) < 1:
            raise ValueError("DetectorConfig needs at least one preset mode")
        if not 0 < self.field_of_view <= np.pi / 2:
            raise ValueError("field_of_view must satisfy 0 < fov <= pi/2")
        if self.area < 0:
            raise ValueError("area must be >= 0")
        normals = self.normals()
        if np.any(normals[:, 2] < -1e-12):
            raise ValueError("photodiode orientations must face the upper hemisphere")
        for i in range(len(normals)):
            for j in range(i):
                if np.allclose(normals[i], normals[j], atol=1e-12):
                    raise ValueError(f"preset modes {j} and {i} have identical orientations")

    @property
    def num_modes(self) -> int:
        return len(self.orientations)

    def normals(self) -> np.ndarray:
        """Unit normals, shape ``(M, 3)``."""
        az = np.array([o[0] for o in self.orientations])
        el = np.array([o[1] for o in self.orientations])
        return np.stack([np.cos(el) * np.cos(az), np.cos(el) * np.sin(az), np.sin(el)], axis=1)


@dataclass(frozen=True)
class UserTerminal:
    id: int
    position: Tuple[float, float, float]
    detector: DetectorConfig = field(compare=False, default=None)


def place_aps_grid(room: Room, rows: int, cols: int) -> List[AccessPoint]:
    """Cell-centred ``rows x cols`` AP grid on the ceiling, ids row-major.

    Rows run along the room length (x), columns along the width (y).
    """
    if rows < 1 or cols < 1:
        raise ValueError("rows and cols must be >= 1")
    aps = []
    for i in range(rows):
        for j in range(cols):
            x = (i + 0.5) * room.length_m / rows
            y = (j + 0.5) * room.width_m / cols
            aps.append(AccessPoint(id=i * cols + j, position=(x, y, room.height_m)))
    return aps


def place_users_uniform(room: Room, k: int, receive_height_m: float, seed: int,
                        detector: DetectorConfig = None) -> List[UserTerminal]:
    if k < 1:
        raise ValueError("k must be >= 1")
    if not 0 <= receive_height_m < room.height_m:
        raise ValueError("receive_height_m must lie in [0, room height)")
    rng = np.random.default_rng(seed)
    xy = rng.uniform(0.0, 1.0, size=(k, 2)) * np.array([room.length_m, room.width_m])
    return [UserTerminal(id=i, position=(float(x), float(y), float(receive_height_m)), detector=detector)
            for i, (x, y) in enumerate(xy)]


def users_at(positions: Sequence[Sequence[float]], receive_height_m: float,
             detector: DetectorConfig = None) -> List[UserTerminal]:
    """Users at explicit (x, y) positions on the receiving plane."""
    return [UserTerminal(id=i, position=(float(p[0]), float(p[1]), float(receive_height_m)), detector=detector)
            for i, p in enumerate(positions)]


def pyramid_orientations(num_modes: int, tilt: float) -> List[Tuple[float, float, float]]:
    """Photodiode normals for a zenith-plus-ring detector.

    An odd ``num_modes`` gives one zenith photodiode (mode 0) followed by a
    ring of ``num_modes - 1``; an even count puts every mode on the ring.
    Ring normals are tilted ``tilt`` away from the zenith with azimuths
    ``2*pi*j/n_ring``.
    """
    if num_modes < 1:
        raise ValueError("num_modes must be >= 1")
    if not 0 <= tilt < np.pi / 2:
        raise ValueError("tilt must satisfy 0 <= tilt < pi/2")
    out = []
    n_ring = num_modes
    if num_modes % 2 == 1:
        out.append((0.0, 0.0, 1.0))
        n_ring -= 1
    for j in range(n_ring):
        az = 2 * np.pi * j / n_ring
        out.append((np.sin(tilt) * np.cos(az), np.sin(tilt) * np.sin(az), np.cos(tilt)))
    return out


def to_azimuth_elevation(vectors) -> List[Tuple[float, float]]:
    v = np.asarray(vectors, dtype=float)
    v = v / np.linalg.norm(v, axis=1, keepdims=True)
    az = np.arctan2(v[:, 1], v[:, 0])
    el = np.arcsin(np.clip(v[:, 2], -1.0, 1.0))
    return [(float(a), float(e)) for a, e in zip(az, el)]


def pyramid_detector(num_modes: int, tilt: float, field_of_view: float,
                     area: float = 1e-4, concentrator_gain: float = 1.0) -> DetectorConfig:
    normals = pyramid_orientations(num_modes, tilt)
    return DetectorConfig(to_azimuth_elevation(normals), field_of_view, area, concentrator_gain)


def grid_shape(aps: Sequence[AccessPoint]) -> Tuple[int, int]:
    """Recover ``(rows, cols)`` of a grid produced by :func:`place_aps_grid`."""
    xs = np.unique(np.round([a.position[0] for a in aps], 9))
    ys = np.unique(np.round([a.position[1] for a in aps], 9))
    if len(xs) * len(ys) != len(aps):
        raise ValueError("access points do not form a rectangular grid")
    return len(xs), len(ys)


def positions(items) -> np.ndarray:
    return np.array([it.position for it in items], dtype=float).reshape(-1, 3)
