from fractions import Fraction
import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from biaowc.supersymbol import (CONDITIONS, block_lengths, build_schedule, coherence_feasible, format_schedule,
                                sum_dof, verify_decodability, ModeSchedule)


def brute_force_slot_count(L, K):
    """Count slots by enumerating Block-1 mode tuples and Block-2 (user, group) pairs."""
    block1 = sum(1 for _ in itertools.product(range(L - 1), repeat=K))
    block2 = sum(1 for k in range(K) for _ in itertools.product(range(L - 1), repeat=K - 1))
    return block1, block2


@pytest.mark.parametrize("L,K,expected", [(2, 2, (1, 2, 3)), (3, 2, (4, 4, 8)), (3, 3, (8, 12, 20))])
def test_block_lengths_small(L, K, expected):
    assert block_lengths(L, K) == expected
    t1, t2 = brute_force_slot_count(L, K)
    assert (t1, t2, t1 + t2) == expected
    assert build_schedule(L, K).total_slots == expected[2]


def test_block_lengths_large_network():
    assert block_lengths(16, 10) == (576650390625, 384433593750, 961083984375)
    # no silent overflow for very large networks
    t1, t2, T = block_lengths(40, 30)
    assert t1 == 39 ** 30 and T > 2 ** 64


def test_block_lengths_rejects_bad_input():
    with pytest.raises(ValueError):
        block_lengths(1, 2)
    with pytest.raises(ValueError):
        block_lengths(3, 0)


def test_canonical_three_slot_schedule():
    s = build_schedule(2, 2)
    assert s.total_slots == 3
    assert s.modes.tolist() == [[0, 0], [1, -1], [-1, 1]]
    assert [s.served_in(t) for t in range(3)] == [[0, 1], [0], [1]]
    assert s.resource_blocks[0].tolist() == [[0, 1]]
    assert s.resource_blocks[1].tolist() == [[0, 2]]
    assert s.resource_block_modes(0, 0) == [0, 1]
    assert s.resource_block_modes(1, 0) == [0, 1]


def test_schedule_dump_golden():
    assert format_schedule(build_schedule(2, 2)) == (
        "slot 0 | modes 0 0 | served {0,1}\n"
        "slot 1 | modes 1 - | served {0}\n"
        "slot 2 | modes - 1 | served {1}\n"
    )


@pytest.mark.parametrize("L", [2, 3, 5])
def test_single_user_schedule(L):
    s = build_schedule(L, 1)
    assert s.total_slots == L
    assert s.resource_blocks.shape == (1, 1, L)
    assert sorted(s.resource_block_modes(0, 0)) == list(range(L))
    assert all(s.served_in(t) == [0] for t in range(L))


def test_three_by_three():
    s = build_schedule(3, 3)
    assert s.total_slots == 20
    assert s.resource_blocks.shape == (3, 4, 3)
    for k in range(3):
        flat = s.resource_blocks[k].ravel()
        assert len(set(flat.tolist())) == flat.size


def test_switching_cadence():
    L, K = 4, 3
    s = build_schedule(L, K)
    for k in range(K):
        col = s.modes[:s.block1_slots, k]
        changes = np.flatnonzero(np.diff(col)) + 1
        assert np.all(changes % (L - 1) ** k == 0)
        # mode histogram: each Block-1 mode appears (L-1)^(K-1) times
        assert np.bincount(col, minlength=L - 1).tolist() == [(L - 1) ** (K - 1)] * (L - 1)


@pytest.mark.parametrize("L", range(2, 6))
@pytest.mark.parametrize("K", range(1, 5))
def test_verifier_passes_constructed(L, K):
    rep = verify_decodability(build_schedule(L, K))
    assert rep.passed, rep.lines()
    assert [c.name for c in rep.conditions] == list(CONDITIONS)


def _tampered(s, modes=None, served=None):
    return ModeSchedule(s.num_aps, s.num_users, s.block1_slots, s.block2_slots,
                        s.modes if modes is None else modes, s.served if served is None else served,
                        s.resource_blocks)


def test_verifier_catches_alignment_break():
    s = build_schedule(3, 3)
    modes = s.modes.copy()
    modes[2, 1] = (modes[2, 1] + 1) % 2          # user 2 (0-indexed 1) flips in a Block-1 slot
    rep = verify_decodability(_tampered(s, modes=modes))
    assert not rep["alignment"].passed
    assert rep["alignment"].slot is not None
    assert "user 1" in rep["alignment"].detail


def test_verifier_catches_block2_overlap():
    s = build_schedule(3, 2)
    served = s.served.copy()
    served[s.block1_slots, :] = True
    rep = verify_decodability(_tampered(s, served=served))
    assert not rep["block2_orthogonality"].passed
    assert rep["block2_orthogonality"].slot == s.block1_slots
    assert rep["distinct_modes"].passed and rep["alignment"].passed


def test_sum_dof_values():
    assert sum_dof(2, 2) == Fraction(4, 3)
    assert sum_dof(3, 2) == Fraction(3, 2)
    assert all(sum_dof(L, 1) == 1 for L in range(1, 9))


@given(st.integers(2, 20), st.integers(1, 12))
def test_dof_identity(L, K):
    _, _, T = block_lengths(L, K)
    assert Fraction(K * L * (L - 1) ** (K - 1), T) == Fraction(L * K, L + K - 1) == sum_dof(L, K)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 6), st.integers(1, 4))
def test_schedule_properties(L, K):
    s = build_schedule(L, K)
    assert s.total_slots == block_lengths(L, K)[2]
    assert s.served[:s.block1_slots].all()
    assert (s.served[s.block1_slots:].sum(axis=1) == 1).all()
    for k in range(K):
        assert (s.resource_blocks[k].shape[0]) == (L - 1) ** (K - 1)


def test_coherence_feasible():
    assert coherence_feasible(3, 1e-6, 10e-3)
    assert not coherence_feasible(block_lengths(16, 10)[2], 1e-6, 10e-3)
    assert coherence_feasible(10, 1e-3, 10e-3)       # equality counts as feasible
    with pytest.raises(ValueError):
        coherence_feasible(3, 0.0, 1.0)


def test_schedule_size_guard():
    with pytest.raises(ValueError, match="too large"):
        build_schedule(16, 10)
