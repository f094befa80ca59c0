"""Achievable BIA rates with interference-subtraction noise and ICI.

Rates are in bits per time slot.
"""

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from .channel import ChannelSet, is_rank_deficient
from .supersymbol import block_lengths, coherence_feasible


@dataclass(frozen=True)
class NoiseModel:
    """Receiver noise over one resource block.

    Block-1 measurements carry the noise of ``K - 1`` subtracted interference
    copies on top of their own, so the effective covariance is
    ``diag(K, ..., K, 1) * (sigma2 + ici)``.
    """

    sigma2: float
    ici: float = 0.0

    def __post_init__(self):
        if not self.sigma2 > 0:
            raise ValueError("sigma2 must be > 0")
        if self.ici < 0:
            raise ValueError("ici must be >= 0")

    @property
    def total(self) -> float:
        return self.sigma2 + self.ici

    def covariance_diag(self, L: int, K: int) -> np.ndarray:
        d = np.full(L, float(K) * self.total)
        d[-1] = self.total
        return d


def _log2det_eye_plus(A: np.ndarray) -> float:
    # A symmetric PSD; Cholesky of I + A is always defined
    M = np.eye(A.shape[0]) + A
    c = np.linalg.cholesky(0.5 * (M + M.T))
    return float(2.0 * np.sum(np.log2(np.diag(c))))


def bia_user_rate(H, p_str: float, noise: NoiseModel, L: int, K: int) -> float:
    """Rate of one user decoding its BIA resource blocks.

    ``(1/(L+K-1)) * log2 det(I + p_str * H H^T R^-1)`` with ``R`` from
    :meth:`NoiseModel.covariance_diag`.  ``K == 1`` uses ``R = sigma^2 I``
    and the ``1/L`` prefactor, which is the same expression.
    """
    H = np.asarray(H, dtype=float)
    if H.shape != (L, L):
        raise ValueError(f"H must be {L}x{L}, got {H.shape}")
    if p_str <= 0:
        raise ValueError("p_str must be > 0")
    if L < 1 or K < 1:
        raise ValueError("L and K must be >= 1")
    if K == 1:
        d = np.full(L, noise.total)
    else:
        if L < 2:
            raise ValueError("BIA with K >= 2 needs L >= 2")
        d = noise.covariance_diag(L, K)
    inv_sqrt = 1.0 / np.sqrt(d)
    G = inv_sqrt[:, None] * H
    rate = _log2det_eye_plus(p_str * G @ G.T) / (L + K - 1)
    return max(rate, 0.0)


def tdma_user_rate(h: float, p_str: float, noise: NoiseModel, K: int) -> float:
    """Single-AP round robin over ``K`` users."""
    return math.log2(1.0 + p_str * h * h / noise.total) / K


def ici_power(gains_user: np.ndarray, modes: Sequence[int], out_of_cluster_aps: Sequence[int],
              p_str: float) -> float:
    """Inter-cluster interference power at one user.

    Sum over out-of-cluster APs of ``p_str * h^2`` where ``h`` is the
    largest gain over the given preset modes (worst case).
    """
    out = list(out_of_cluster_aps)
    if not out:
        return 0.0
    sub = np.asarray(gains_user)[np.ix_(list(modes), out)]
    return float(p_str * np.sum(sub.max(axis=0) ** 2))


@dataclass
class RateReport:
    rates: np.ndarray
    cluster_of: np.ndarray
    dof_prefactor: np.ndarray
    rank_flag: np.ndarray
    block_lengths: Dict[int, int] = field(default_factory=dict)
    feasible: Dict[int, bool] = field(default_factory=dict)

    @property
    def sum_rate(self) -> float:
        return float(np.sum(self.rates))

    @property
    def mean_rate(self) -> float:
        return float(np.mean(self.rates)) if len(self.rates) else 0.0

    @property
    def max_block_length(self) -> int:
        return max(self.block_lengths.values(), default=0)


def select_modes(gains_user, ap_ids):
    """Pick one distinct preset mode per serving AP.

    APs are visited strongest first; each takes the unused mode with the
    largest gain towards it.  Returns modes in AP order.
    """
    G = np.asarray(gains_user)[:, list(ap_ids)]
    order = sorted(range(G.shape[1]), key=lambda j: (-G[:, j].max(), j))
    used = np.zeros(G.shape[0], dtype=bool)
    chosen = [0] * G.shape[1]
    for j in order:
        col = np.where(used, -np.inf, G[:, j])
        m = int(np.argmax(col))
        used[m] = True
        chosen[j] = m
    return chosen


def cluster_block_length(L_c: int, K_c: int) -> int:
    """Transmission block length of one cluster (0 when it has no users).

    A single-AP cluster runs round robin, one slot per user.
    """
    if K_c == 0:
        return 0
    if L_c == 1:
        return K_c
    return block_lengths(L_c, K_c)[2]


def evaluate_network(topology, channel_set: ChannelSet, p_str: float, sigma2: Optional[float] = None,
                     slot_duration_s: float = 1e-6, coherence_time_s: float = math.inf,
                     mode_selection: str = "best", ici_modes: str = "all") -> RateReport:
    """Per-user rates with BIA run independently inside every cluster.

    Parameters
    ----------
    topology : Topology
        Clusters partitioning APs and users.
    channel_set : ChannelSet
        Full ``M x L`` gain matrix of every user.
    p_str : float
        Per-stream transmit power.
    sigma2 : float, optional
        Receiver noise variance; defaults to ``channel_set.noise_variance``.
    mode_selection : {"best", "first"}
        ``"best"`` matches every cluster AP with a distinct photodiode via
        :func:`select_modes`; ``"first"`` uses modes ``0..L_c-1``.
    ici_modes : {"all", "used"}
        Modes over which the worst-case inter-cluster gain is taken.

    A cluster with a single AP runs round robin among its users.
    """
    if mode_selection not in ("best", "first"):
        raise ValueError(f"unknown mode_selection {mode_selection!r}")
    if ici_modes not in ("all", "used"):
        raise ValueError(f"unknown ici_modes {ici_modes!r}")
    if sigma2 is None:
        sigma2 = channel_set.noise_variance
    K = channel_set.num_users
    rates = np.zeros(K)
    cluster_of = np.full(K, -1, dtype=np.int64)
    pref = np.zeros(K)
    flags = np.zeros(K, dtype=bool)
    lengths, feas = {}, {}
    n_aps = channel_set.gains.shape[2] if K else 0
    for c in topology.clusters:
        aps = sorted(c.ap_ids)
        users = sorted(c.user_ids)
        L_c, K_c = len(aps), len(users)
        T = cluster_block_length(L_c, K_c)
        lengths[c.id] = T
        feas[c.id] = coherence_feasible(T, slot_duration_s, coherence_time_s) if T else True
        if K_c == 0:
            continue
        in_c = set(aps)
        others = [a for a in range(n_aps) if a not in in_c]
        for k in users:
            G = channel_set.gains[k]
            if G.shape[0] < L_c:
                raise ValueError(f"user {k} has {G.shape[0]} modes but its cluster has {L_c} APs")
            modes = list(range(L_c)) if mode_selection == "first" else select_modes(G, aps)
            ici = ici_power(G, modes if ici_modes == "used" else range(G.shape[0]), others, p_str)
            noise = NoiseModel(sigma2, ici)
            cluster_of[k] = c.id
            H = G[np.ix_(modes, aps)]
            if L_c == 1:
                rates[k] = tdma_user_rate(H[0, 0], p_str, noise, K_c)
                pref[k] = 1.0 / K_c
            else:
                rates[k] = bia_user_rate(H, p_str, noise, L_c, K_c)
                pref[k] = 1.0 / (L_c + K_c - 1)
            flags[k] = is_rank_deficient(H)
    return RateReport(rates, cluster_of, pref, flags, lengths, feas)
