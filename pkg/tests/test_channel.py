import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from biaowc.channel import (ChannelSet, EmitterModel, build_channel_set, condition_number, is_rank_deficient, los_gain,
                            mode_condition_number)
from biaowc.geometry import AccessPoint, DetectorConfig, Room, place_aps_grid, pyramid_detector, users_at

ZENITH = (0.0, 0.0, 1.0)
LAMB = EmitterModel(variant="lambertian", half_power_angle=math.radians(60))
GAUSS = EmitterModel(variant="gaussian", waist=5e-6, wavelength=830e-9)


def zenith_detector(fov=math.pi / 2, area=1e-4):
    return DetectorConfig(((0.0, math.pi / 2),), fov, area)


def test_lambertian_hand_value():
    ap = AccessPoint(0, (0.0, 0.0, 3.0))
    g = los_gain(ap, (0.0, 0.0, 0.85), ZENITH, zenith_detector(), LAMB)
    assert LAMB.lambertian_order == pytest.approx(1.0)
    assert g == pytest.approx(2e-4 / (2 * math.pi * 2.15 ** 2), rel=1e-12)
    assert g == pytest.approx(6.885e-6, rel=1e-3)


def test_lambertian_off_axis_closed_form():
    ap = AccessPoint(0, (0.0, 0.0, 3.0))
    u = np.array([1.0, 0.5, 1.0])
    d = np.linalg.norm(ap.position - u)
    cos = 2.0 / d
    n = 1.0
    expected = (n + 1) * 1e-4 / (2 * math.pi * d * d) * cos ** n * cos
    assert los_gain(ap, u, ZENITH, zenith_detector(), LAMB) == pytest.approx(expected, rel=1e-12)


def test_gaussian_closed_form():
    ap = AccessPoint(0, (1.0, 1.0, 3.0))
    u = np.array([1.0003, 0.9998, 1.0])
    z, r2 = 2.0, 0.0003 ** 2 + 0.0002 ** 2
    w = GAUSS.beam_radius(z)
    assert w == pytest.approx(5e-6 * math.sqrt(1 + (z * 830e-9 / (math.pi * 25e-12)) ** 2))
    cos_phi = z / math.sqrt(z * z + r2)
    expected = 1e-4 * cos_phi * 2 / (math.pi * w * w) * math.exp(-2 * r2 / w ** 2)
    assert los_gain(ap, u, ZENITH, zenith_detector(), GAUSS) == pytest.approx(expected, rel=1e-12)


def test_inverse_square():
    ap = AccessPoint(0, (0.0, 0.0, 3.0))
    g1 = los_gain(ap, (0.0, 0.0, 2.0), ZENITH, zenith_detector(), LAMB)
    g2 = los_gain(ap, (0.0, 0.0, 1.0), ZENITH, zenith_detector(), LAMB)
    assert g1 / g2 == pytest.approx(4.0, rel=1e-12)


def test_fov_cutoff_is_exact_zero():
    ap = AccessPoint(0, (0.0, 0.0, 3.0))
    det = zenith_detector(fov=math.radians(30))
    # incidence = atan(1.5 / 2) ~ 36.9 deg
    assert los_gain(ap, (1.5, 0.0, 1.0), ZENITH, det, LAMB) == 0.0
    assert los_gain(ap, (1.0, 0.0, 1.0), ZENITH, det, LAMB) > 0.0


def test_degenerate_geometry_rejected():
    ap = AccessPoint(0, (0.0, 0.0, 3.0))
    with pytest.raises(ValueError):
        los_gain(ap, (0.0, 0.0, 3.0), ZENITH, zenith_detector(), LAMB)
    with pytest.raises(ValueError):
        los_gain(ap, (0.0, 0.0, 3.5), ZENITH, zenith_detector(), LAMB)
    with pytest.raises(NotImplementedError):
        los_gain(AccessPoint(0, (0, 0, 3), (0, 1, 0)), (0, 0, 1), ZENITH, zenith_detector(), LAMB)


def test_emitter_validation():
    with pytest.raises(ValueError):
        EmitterModel(variant="laser")
    with pytest.raises(ValueError):
        EmitterModel(half_power_angle=math.pi / 2)
    with pytest.raises(ValueError):
        EmitterModel(waist=0.0)


def test_single_ap_single_mode_matches_los_gain():
    ap = AccessPoint(0, (1.0, 2.0, 3.0))
    det = zenith_detector()
    users = users_at([(1.3, 1.8)], 0.85, det)
    cs = build_channel_set([ap], users, LAMB, 1e-12)
    assert cs.gains.shape == (1, 1, 1)
    assert cs.gains[0, 0, 0] == los_gain(ap, users[0].position, ZENITH, det, LAMB)


@pytest.mark.parametrize("emitter", [LAMB, EmitterModel(waist=0.5e-6)])
def test_quarter_turn_symmetry(emitter):
    room = Room(4, 4, 3)
    aps = place_aps_grid(room, 2, 2)        # ids 0 1 / 2 3
    det = pyramid_detector(4, math.radians(30), math.radians(70))
    cs = build_channel_set(aps, users_at([room.center], 0.85, det), emitter, 1e-12)
    H = cs.gains[0]
    # rotating by +90 deg about the room centre maps AP positions (x,y)->(-y,x) around the centre
    c = np.array(room.center)
    pos = np.array([a.position[:2] for a in aps]) - c
    rot = pos @ np.array([[0, 1], [-1, 0]])
    ap_perm = [int(np.argmin(np.linalg.norm(pos - r, axis=1))) for r in rot]
    mode_perm = [(m + 1) % 4 for m in range(4)]
    assert np.allclose(H[np.ix_(mode_perm, ap_perm)], H, rtol=1e-12, atol=0)
    assert H.max() > 0


def test_zero_area_is_flagged():
    det = DetectorConfig(((0.0, math.pi / 2), (0.0, 1.2)), math.pi / 2, area=0.0)
    aps = place_aps_grid(Room(4, 4, 3), 1, 2)
    cs = build_channel_set(aps, users_at([(2, 2)], 0.85, det), LAMB, 1e-12)
    assert np.all(cs.gains == 0)
    assert cs.rank_deficient.tolist() == [True]


def test_rank_flag_uses_serving_set():
    det = pyramid_detector(5, math.radians(35), math.radians(80))
    aps = place_aps_grid(Room(4, 4, 3), 2, 2)
    users = users_at([(1.2, 1.7)], 0.85, det)
    cs = build_channel_set(aps, users, LAMB, 1e-12, serving={0: [0, 3]})
    assert not cs.rank_deficient[0]
    assert not is_rank_deficient(cs.matrix(0, [0, 3], 2))


def test_rank_limit_of_wide_fov():
    # cos(phi) is linear in the photodiode normal, so without clipping H has rank <= 3
    det = pyramid_detector(9, math.radians(20), math.pi / 2)
    aps = place_aps_grid(Room(5, 5, 3), 3, 3)
    cs = build_channel_set(aps, users_at([(2.1, 2.7)], 0.85, det), LAMB, 1e-12)
    s = np.linalg.svd(cs.gains[0], compute_uv=False)
    assert s[3] / s[0] < 1e-12


def test_condition_numbers():
    assert condition_number(np.diag([4.0, 2.0, 0.5])) == pytest.approx(8.0)
    assert condition_number(np.array([[1.0, 2.0], [1.0, 2.0]])) == math.inf
    # two photodiodes with the same orientation give identical rows
    det = DetectorConfig(((0.0, 1.3),), math.pi / 2)
    aps = place_aps_grid(Room(4, 4, 3), 1, 2)
    cs = build_channel_set(aps, users_at([(1.0, 1.0)], 0.85, det), LAMB, 1e-12)
    dup = ChannelSet(np.repeat(cs.gains, 2, axis=1), np.repeat(cs.incidence, 2, axis=1), 1e-12, cs.rank_deficient)
    assert mode_condition_number(dup, 0) == math.inf
    det2 = pyramid_detector(5, math.radians(35), math.radians(60))
    cs2 = build_channel_set(place_aps_grid(Room(5, 5, 3), 2, 2), users_at([(1.7, 3.1)], 0.85, det2), LAMB, 1e-12)
    assert math.isfinite(mode_condition_number(cs2, 0, [0, 1, 2]))
    assert mode_condition_number(cs2, 0) == math.inf        # 4 unclipped modes: rank <= 3


def test_heterogeneous_detectors():
    aps = place_aps_grid(Room(4, 4, 3), 2, 2)
    d1 = pyramid_detector(4, 0.5, 1.2, area=1e-4)
    d2 = pyramid_detector(4, 0.5, 1.2, area=2e-4)
    u = users_at([(1.0, 1.5), (1.0, 1.5)], 0.85)
    users = [type(u[0])(0, u[0].position, d1), type(u[1])(1, u[1].position, d2)]
    cs = build_channel_set(aps, users, LAMB, 1e-12)
    assert np.allclose(cs.gains[1], 2 * cs.gains[0], rtol=1e-14)


positions_st = st.tuples(st.floats(0.0, 5.0), st.floats(0.0, 5.0), st.floats(0.0, 2.5))


@settings(max_examples=60, deadline=None)
@given(positions_st, st.floats(0.1, 10.0), st.sampled_from([LAMB, EmitterModel(waist=0.4e-6)]))
def test_nonnegative_and_area_scale(pos, c, emitter):
    aps = place_aps_grid(Room(5, 5, 3), 2, 2)
    det = pyramid_detector(5, math.radians(25), math.radians(50))
    det_c = pyramid_detector(5, math.radians(25), math.radians(50), area=c * 1e-4)
    u = users_at([pos[:2]], pos[2], det)
    uc = users_at([pos[:2]], pos[2], det_c)
    g = build_channel_set(aps, u, emitter, 1e-12).gains
    gc = build_channel_set(aps, uc, emitter, 1e-12).gains
    assert np.all(g >= 0)
    assert np.allclose(gc, c * g, rtol=1e-12, atol=0)
    inc = build_channel_set(aps, u, emitter, 1e-12).incidence
    assert np.all(g[inc > math.radians(50)] == 0)


def test_continuity_inside_fov():
    ap = AccessPoint(0, (2.0, 2.0, 3.0))
    det = zenith_detector(fov=math.radians(60))
    base = np.array([2.4, 1.7, 0.85])
    g0 = los_gain(ap, base, ZENITH, det, LAMB)
    diffs = [abs(los_gain(ap, base + [h, -h, 0], ZENITH, det, LAMB) - g0) for h in (1e-2, 1e-4, 1e-6)]
    assert diffs[0] > diffs[1] > diffs[2]
    assert diffs[2] < 1e-5 * g0
