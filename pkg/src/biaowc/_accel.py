"""Hot numeric kernels with a numba path and a pure-numpy fallback.

The numba path is used when numba imports cleanly and the environment
variable ``BIAOWC_DISABLE_NUMBA`` is unset (or set to ``0``).  Both paths
compute the same results (the gain kernel up to the last ulp of ``exp``);
the test-suite checks them against each other.
"""

import os

import numpy as np

_DISABLED = os.environ.get("BIAOWC_DISABLE_NUMBA", "0").strip().lower() not in ("", "0", "false", "no")

try:
    if _DISABLED:
        raise ImportError("numba disabled by BIAOWC_DISABLE_NUMBA")
    from numba import njit
    HAS_NUMBA = True
except ImportError:
    HAS_NUMBA = False

LAMBERTIAN = 0
GAUSSIAN_BEAM = 1


# ---------------------------------------------------------------------------
# LoS gain tensor
# ---------------------------------------------------------------------------
def _los_gains_numpy(ap_pos, user_pos, normals, fov, area, conc, resp, variant, p0, p1):
    # ap_pos (L,3), user_pos (K,3), normals (K,M,3) -> gains (K,M,L), cos_inc (K,M,L)
    dx = ap_pos[None, :, 0] - user_pos[:, None, 0]            # (K,L) user -> AP
    dy = ap_pos[None, :, 1] - user_pos[:, None, 1]
    dz = ap_pos[None, :, 2] - user_pos[:, None, 2]
    d = np.sqrt(dx * dx + dy * dy + dz * dz)
    if variant == LAMBERTIAN:
        tx = (p0 + 1.0) * area / (2.0 * np.pi * d * d) * (dz / d) ** p0
    else:
        # p0 = beam waist, p1 = Rayleigh range
        w2 = p0 * p0 * (1.0 + (dz / p1) ** 2)
        tx = area * 2.0 / (np.pi * w2) * np.exp(-2.0 * (dx * dx + dy * dy) / w2)
    n = normals[:, :, None, :]                                 # (K,M,1,3)
    cos_inc = (n[..., 0] * dx[:, None, :] + n[..., 1] * dy[:, None, :] + n[..., 2] * dz[:, None, :]) / d[:, None, :]
    gains = tx[:, None, :] * cos_inc * conc * resp
    inside = (cos_inc >= np.cos(fov)) & (cos_inc > 0.0)
    return np.where(inside, gains, 0.0), cos_inc


def _los_gains_loops(ap_pos, user_pos, normals, fov, area, conc, resp, variant, p0, p1):
    n_users = user_pos.shape[0]
    n_modes = normals.shape[1]
    n_aps = ap_pos.shape[0]
    gains = np.zeros((n_users, n_modes, n_aps))
    cos_inc = np.zeros((n_users, n_modes, n_aps))
    cos_fov = np.cos(fov)
    for k in range(n_users):
        for l in range(n_aps):
            dx = ap_pos[l, 0] - user_pos[k, 0]
            dy = ap_pos[l, 1] - user_pos[k, 1]
            dz = ap_pos[l, 2] - user_pos[k, 2]
            d = np.sqrt(dx * dx + dy * dy + dz * dz)
            if variant == LAMBERTIAN:
                tx = (p0 + 1.0) * area / (2.0 * np.pi * d * d) * (dz / d) ** p0
            else:
                w2 = p0 * p0 * (1.0 + (dz / p1) ** 2)
                tx = area * 2.0 / (np.pi * w2) * np.exp(-2.0 * (dx * dx + dy * dy) / w2)
            for m in range(n_modes):
                c = (normals[k, m, 0] * dx + normals[k, m, 1] * dy + normals[k, m, 2] * dz) / d
                cos_inc[k, m, l] = c
                if c >= cos_fov and c > 0.0:
                    gains[k, m, l] = tx * c * conc * resp
    return gains, cos_inc


# ---------------------------------------------------------------------------
# nearest-centre assignment (ties -> lowest index)
# ---------------------------------------------------------------------------
def _nearest_numpy(points, centres):
    d2 = np.sum((points[:, None, :] - centres[None, :, :]) ** 2, axis=-1)
    # argmin returns the first minimum, which is the lowest index on ties
    return np.argmin(d2, axis=1).astype(np.int64)


def _nearest_loops(points, centres):
    n = points.shape[0]
    g = centres.shape[0]
    out = np.empty(n, dtype=np.int64)
    for i in range(n):
        best = 0
        best_d = np.inf
        for j in range(g):
            d = 0.0
            for c in range(points.shape[1]):
                t = points[i, c] - centres[j, c]
                d += t * t
            if d < best_d:
                best_d = d
                best = j
        out[i] = best
    return out


# ---------------------------------------------------------------------------
# Block-1 mixed-radix digit table
# ---------------------------------------------------------------------------
def _digits_numpy(n_slots, radix, n_users):
    t = np.arange(n_slots, dtype=np.int64)
    powers = radix ** np.arange(n_users, dtype=np.int64)
    return ((t[:, None] // powers[None, :]) % radix).astype(np.int64)


def _digits_loops(n_slots, radix, n_users):
    out = np.empty((n_slots, n_users), dtype=np.int64)
    for t in range(n_slots):
        rem = t
        for k in range(n_users):
            out[t, k] = rem % radix
            rem //= radix
    return out


# ---------------------------------------------------------------------------
# alignment check: first slot where a non-owner's mode moves inside a group
# ---------------------------------------------------------------------------
def _alignment_numpy(modes, groups, owner):
    # groups (G, L-1) Block-1 slot indices of user `owner`; returns
    # (slot, other_user) of the first violation or (-1, -1)
    if groups.shape[1] < 2:
        return -1, -1
    sub = modes[groups]                        # (G, L-1, K)
    moved = sub[:, 1:, :] != sub[:, :1, :]
    moved[:, :, owner] = False
    if not moved.any():
        return -1, -1
    g, s, j = np.argwhere(moved)[0]
    return int(groups[g, s + 1]), int(j)


def _alignment_loops(modes, groups, owner):
    n_groups = groups.shape[0]
    width = groups.shape[1]
    n_users = modes.shape[1]
    for g in range(n_groups):
        first = groups[g, 0]
        for s in range(1, width):
            t = groups[g, s]
            for j in range(n_users):
                if j != owner and modes[t, j] != modes[first, j]:
                    return t, j
    return -1, -1


if HAS_NUMBA:
    los_gains = njit(cache=True)(_los_gains_loops)
    nearest_centre = njit(cache=True)(_nearest_loops)
    mixed_radix_digits = njit(cache=True)(_digits_loops)
    _alignment_jit = njit(cache=True)(_alignment_loops)

    def first_alignment_violation(modes, groups, owner):
        t, j = _alignment_jit(np.ascontiguousarray(modes), np.ascontiguousarray(groups), owner)
        return int(t), int(j)
else:
    los_gains = _los_gains_numpy
    nearest_centre = _nearest_numpy
    mixed_radix_digits = _digits_numpy
    first_alignment_violation = _alignment_numpy

BACKEND = "numba" if HAS_NUMBA else "numpy"

# Fallback implementations stay importable for cross-checks and benchmarks.
NUMPY_KERNELS = {
    "los_gains": _los_gains_numpy,
    "nearest_centre": _nearest_numpy,
    "mixed_radix_digits": _digits_numpy,
    "first_alignment_violation": _alignment_numpy,
}


def warm_up() -> float:
    """Compile (or load from cache) every kernel on tiny inputs.

    Returns the seconds spent, which is the one-time start-up cost of the
    numba path and roughly zero for the numpy path.
    """
    import time
    t0 = time.perf_counter()
    pos = np.array([[0.0, 0.0, 3.0]])
    los_gains(pos, np.array([[0.1, 0.0, 1.0]]), np.array([[[0.0, 0.0, 1.0]]]), 1.0, 1e-4, 1.0, 1.0,
              LAMBERTIAN, 1.0, 0.0)
    nearest_centre(np.zeros((1, 2)), np.zeros((1, 2)))
    digits = mixed_radix_digits(4, 2, 2)
    first_alignment_violation(digits, np.arange(4, dtype=np.int64).reshape(2, 2), 0)
    return time.perf_counter() - t0
