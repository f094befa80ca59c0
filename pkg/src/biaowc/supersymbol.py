"""BIA transmission block (Block 1 + Block 2) construction and checks.

Users are 0-indexed here.  User ``k`` switches preset mode every
``(L-1)**k`` Block-1 slots, which is the ``(L-1)**(k-1)`` cadence with
1-indexed users.  Block 1 uses modes ``0..L-2``; mode ``L-1`` is used in
the user's Block-2 slots.  Unused (user not served) entries of the mode
table are ``-1``.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Tuple

import numpy as np

from . import _accel

MAX_SCHEDULE_SLOTS = 10_000_000
UNUSED = -1


def block_lengths(L: int, K: int) -> Tuple[int, int, int]:
    """``(T1, T2, T)`` with ``T1 = (L-1)**K`` and ``T2 = K*(L-1)**(K-1)``.

    Python integers, so large networks never overflow.
    """
    L, K = int(L), int(K)
    if K < 1:
        raise ValueError("K must be >= 1")
    if L < 2:
        raise ValueError("BIA needs L >= 2 preset modes")
    t1 = (L - 1) ** K
    t2 = K * (L - 1) ** (K - 1)
    return t1, t2, t1 + t2


def sum_dof(L: int, K: int) -> Fraction:
    """Sum degrees of freedom ``L*K/(L+K-1)`` as an exact fraction."""
    if L < 1 or K < 1:
        raise ValueError("L and K must be >= 1")
    dof = Fraction(L * K, L + K - 1)
    if L >= 2:
        _, _, T = block_lengths(L, K)
        assert Fraction(K * L * (L - 1) ** (K - 1), T) == dof
    return dof


def coherence_feasible(T: int, slot_duration_s: float, coherence_time_s: float) -> bool:
    if slot_duration_s <= 0 or coherence_time_s <= 0:
        raise ValueError("durations must be > 0")
    return T * slot_duration_s <= coherence_time_s


@dataclass(frozen=True)
class ModeSchedule:
    """A constructed transmission block.

    Attributes
    ----------
    modes : (T, K) int array
        Preset mode of each user in each slot, ``-1`` where unused.
    served : (T, K) bool array
        Whose symbols are transmitted in each slot.
    resource_blocks : (K, G, L) int array
        Slot indices of each user's ``G = (L-1)**(K-1)`` resource blocks;
        the first ``L-1`` entries are Block-1 slots, the last a Block-2 slot.
    """

    num_aps: int
    num_users: int
    block1_slots: int
    block2_slots: int
    modes: np.ndarray = field(repr=False)
    served: np.ndarray = field(repr=False)
    resource_blocks: np.ndarray = field(repr=False)

    @property
    def total_slots(self) -> int:
        return self.block1_slots + self.block2_slots

    def mode_of(self, user: int, slot: int) -> int:
        return int(self.modes[slot, user])

    def served_in(self, slot: int) -> List[int]:
        return [int(k) for k in np.flatnonzero(self.served[slot])]

    def resource_block_modes(self, user: int, group: int) -> List[int]:
        return [int(self.modes[t, user]) for t in self.resource_blocks[user, group]]


def _group_slots(L: int, K: int) -> np.ndarray:
    """Block-1 slots of each (user, group): shape ``(K, G, L-1)``."""
    r = L - 1
    n_groups = r ** (K - 1)
    out = np.empty((K, n_groups, r), dtype=np.int64)
    g = np.arange(n_groups, dtype=np.int64)
    for k in range(K):
        # digits of the other users, in ascending user order, encode g
        base = np.zeros(n_groups, dtype=np.int64)
        rem = g.copy()
        for j in range(K):
            if j == k:
                continue
            base += (rem % r) * r ** j
            rem //= r
        out[k] = base[:, None] + np.arange(r, dtype=np.int64)[None, :] * r ** k
    return out


def build_schedule(L: int, K: int) -> ModeSchedule:
    t1, t2, T = block_lengths(L, K)
    if T > MAX_SCHEDULE_SLOTS:
        raise ValueError(f"schedule with {T} slots is too large to materialise "
                         f"(limit {MAX_SCHEDULE_SLOTS}); use block_lengths for the count")
    r = L - 1
    n_groups = r ** (K - 1)
    modes = np.full((T, K), UNUSED, dtype=np.int64)
    served = np.zeros((T, K), dtype=bool)
    modes[:t1] = _accel.mixed_radix_digits(t1, r, K)
    served[:t1] = True
    b2 = t1 + np.arange(K * n_groups, dtype=np.int64).reshape(K, n_groups)
    for k in range(K):
        modes[b2[k], k] = L - 1
        served[b2[k], k] = True
    rbs = np.concatenate([_group_slots(L, K), b2[:, :, None]], axis=2)
    return ModeSchedule(L, K, t1, t2, modes, served, rbs)


@dataclass
class ConditionResult:
    name: str
    passed: bool
    slot: Optional[int] = None
    detail: str = ""


@dataclass
class VerificationReport:
    num_aps: int
    num_users: int
    conditions: List[ConditionResult]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.conditions)

    def __getitem__(self, name: str) -> ConditionResult:
        for c in self.conditions:
            if c.name == name:
                return c
        raise KeyError(name)

    def lines(self) -> List[str]:
        out = []
        for c in self.conditions:
            status = "PASS" if c.passed else f"FAIL at slot {c.slot}: {c.detail}"
            out.append(f"L={self.num_aps} K={self.num_users} {c.name}: {status}")
        return out


CONDITIONS = ("distinct_modes", "alignment", "block2_orthogonality", "disjoint_blocks", "counts")


def verify_decodability(schedule: ModeSchedule) -> VerificationReport:
    """Structural decodability checks; no channel values needed.

    ``distinct_modes``: each resource block visits L distinct modes while
    its owner is served.  ``alignment``: every other user keeps a constant
    mode over the Block-1 part of each resource block.
    ``block2_orthogonality``: each Block-2 slot serves exactly one user.
    ``disjoint_blocks``: a user's resource blocks share no slot.
    ``counts``: lengths and block counts match :func:`block_lengths`.
    """
    s = schedule
    L, K = s.num_aps, s.num_users
    modes, served, rbs = s.modes, s.served, s.resource_blocks
    res = {}

    # distinct modes
    res["distinct_modes"] = ConditionResult("distinct_modes", True)
    for k in range(K):
        m = modes[rbs[k], k]                      # (G, L)
        ok_served = served[rbs[k], k]
        srt = np.sort(m, axis=1)
        dup = (srt[:, 1:] == srt[:, :-1]).any(axis=1) | (m < 0).any(axis=1) | ~ok_served.all(axis=1)
        if dup.any():
            g = int(np.flatnonzero(dup)[0])
            res["distinct_modes"] = ConditionResult(
                "distinct_modes", False, int(rbs[k, g, -1]),
                f"user {k} resource block {g} modes {m[g].tolist()}")
            break

    # alignment
    res["alignment"] = ConditionResult("alignment", True)
    for k in range(K):
        t, j = _accel.first_alignment_violation(modes, np.ascontiguousarray(rbs[k, :, :-1]), k)
        if t >= 0:
            res["alignment"] = ConditionResult(
                "alignment", False, t, f"user {j} changes mode inside a resource block of user {k}")
            break

    # block-2 orthogonality
    counts = served[s.block1_slots:].sum(axis=1)
    bad = np.flatnonzero(counts != 1)
    if bad.size:
        t = int(s.block1_slots + bad[0])
        res["block2_orthogonality"] = ConditionResult(
            "block2_orthogonality", False, t, f"slot serves users {s.served_in(t)}")
    else:
        res["block2_orthogonality"] = ConditionResult("block2_orthogonality", True)

    # per-user disjointness
    res["disjoint_blocks"] = ConditionResult("disjoint_blocks", True)
    for k in range(K):
        flat = rbs[k].ravel()
        uniq, cnt = np.unique(flat, return_counts=True)
        if (cnt > 1).any():
            t = int(uniq[cnt > 1][0])
            res["disjoint_blocks"] = ConditionResult(
                "disjoint_blocks", False, t, f"slot shared by two resource blocks of user {k}")
            break

    # counts
    t1, t2, T = block_lengths(L, K)
    problems = []
    if (s.block1_slots, s.block2_slots) != (t1, t2) or modes.shape[0] != T:
        problems.append((None, f"lengths ({s.block1_slots}, {s.block2_slots}, {modes.shape[0]}) != ({t1}, {t2}, {T})"))
    if rbs.shape != (K, (L - 1) ** (K - 1), L):
        problems.append((None, f"resource block array shape {rbs.shape}"))
    elif ((rbs[:, :, :-1] >= s.block1_slots).any() or (rbs[:, :, -1] < s.block1_slots).any()):
        problems.append((None, "resource block slots straddle the Block-1/Block-2 boundary"))
    not_full = np.flatnonzero(~served[:s.block1_slots].all(axis=1))
    if not_full.size:
        problems.append((int(not_full[0]), "Block-1 slot does not serve every user"))
    if problems:
        slot, detail = problems[0]
        res["counts"] = ConditionResult("counts", False, slot, detail)
    else:
        res["counts"] = ConditionResult("counts", True)

    return VerificationReport(L, K, [res[name] for name in CONDITIONS])


def format_schedule(schedule: ModeSchedule) -> str:
    """One line per slot: ``slot t | modes m_0 .. m_{K-1} | served {ids}``.

    Unused modes print as ``-``.
    """
    lines = []
    for t in range(schedule.total_slots):
        ms = " ".join("-" if m < 0 else str(int(m)) for m in schedule.modes[t])
        users = ",".join(str(k) for k in schedule.served_in(t))
        lines.append(f"slot {t} | modes {ms} | served {{{users}}}")
    return "\n".join(lines) + "\n"
