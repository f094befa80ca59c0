"""Experiment orchestration: rate-vs-groups and block-length sweeps, single runs.

This is the only module that touches the filesystem.  Every output is a
pure function of the configuration and its master seed.
"""

import csv
import io
import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .channel import build_channel_set
from .config import ScenarioConfig
from .geometry import place_aps_grid, place_users_uniform, users_at
from .rate import evaluate_network
from .supersymbol import block_lengths
from .topology import (NETWORK_CENTRIC, STANDARD, USER_CENTRIC, nc_partition, nearest_tiling,
                       standard_topology, uc_topology)

log = logging.getLogger(__name__)

RAW_HEADER = ("scenario", "drop", "G", "kind", "user", "cluster", "rate_bits_per_slot", "block_len", "feasible")
SUMMARY_HEADER = ("G", "kind", "clusters", "nc_tiling", "drops", "mean_user_rate", "mean_sum_rate")
FIG6_HEADER = ("K", "kind", "G", "drop", "block_len")
FIG6_SUMMARY_HEADER = ("K", "kind", "G", "min_block_len", "max_block_len")

_MASK64 = (1 << 64) - 1


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def drop_seed(master_seed: int, drop: int) -> int:
    """Seed of one Monte Carlo drop: ``master ^ splitmix64(drop)``."""
    return (int(master_seed) ^ _splitmix64(int(drop))) & _MASK64


def kmeans_seed(seed: int, G: int) -> int:
    return (int(seed) ^ _splitmix64(0x6B6D65616E73 + int(G))) & _MASK64


def reference_noise_variance(config: ScenarioConfig) -> float:
    """Noise variance from ``snr_db`` unless ``noise_variance`` is given.

    The reference link is a user at the room centre on the receiving plane,
    using its strongest (photodiode, AP) pair.
    """
    if config.noise_variance is not None:
        return config.noise_variance
    room = config.room
    aps = place_aps_grid(room, config.ap_rows, config.ap_cols)
    user = users_at([room.center], config.receive_height, config.detector)
    cs = build_channel_set(aps, user, config.emitter_model, 1.0)
    h = float(cs.gains[0].max())
    if h == 0:
        raise ValueError("no photodiode at the room centre sees an AP; set noise_variance explicitly")
    return config.p_str * h * h / 10 ** (config.snr_db / 10)


@dataclass
class ExperimentResult:
    """Raw per-user rows plus per-(G, kind) aggregates."""

    rows: List[tuple] = field(default_factory=list)
    meta: Dict[Tuple[int, str], Dict[str, object]] = field(default_factory=dict)
    header: Tuple[str, ...] = RAW_HEADER

    def aggregates(self) -> List[tuple]:
        """``(G, kind, clusters, nc_tiling, drops, mean_user_rate, mean_sum_rate)`` rows."""
        groups: Dict[Tuple[int, str], Dict[int, List[float]]] = {}
        for r in self.rows:
            groups.setdefault((r[2], r[3]), {}).setdefault(r[1], []).append(r[6])
        out = []
        for (G, kind), per_drop in groups.items():
            all_rates = [x for v in per_drop.values() for x in v]
            m = self.meta.get((G, kind), {})
            out.append((G, kind, m.get("clusters", G), m.get("nc_tiling", ""), len(per_drop),
                        float(np.mean(all_rates)), float(np.mean([sum(v) for v in per_drop.values()]))))
        return out

    def mean_rate(self, G: int, kind: str) -> float:
        for a in self.aggregates():
            if a[0] == G and a[1] == kind:
                return a[5]
        raise KeyError((G, kind))

    def write_csv(self, fh):
        _write(fh, self.header, self.rows)

    def write_summary(self, fh):
        _write(fh, SUMMARY_HEADER, self.aggregates())


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _write(fh, header, rows):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) for v in r])


def to_csv_text(header, rows) -> str:
    buf = io.StringIO()
    _write(buf, header, rows)
    return buf.getvalue()


# ---------------------------------------------------------------------------
def _topology(kind: str, G: int, aps, users, config: ScenarioConfig, seed: int, tiling=None):
    if kind == STANDARD:
        return standard_topology(aps, users)
    if kind == NETWORK_CENTRIC:
        gx, gy = tiling or nearest_tiling(config.ap_rows, config.ap_cols, G)
        return nc_partition(aps, gx, gy, users)
    return uc_topology(aps, users, G, kmeans_seed(seed, G), config.kmeans_max_iters, config.kmeans_restarts)


def _rows_for(config, scenario, drop, G, kind, topo, cs, sigma2):
    rep = evaluate_network(topo, cs, config.p_str, sigma2, config.slot_duration, config.coherence_time,
                           mode_selection=config.mode_selection, ici_modes=config.ici_modes)
    rows = []
    for k in range(cs.num_users):
        c = int(rep.cluster_of[k])
        rows.append((scenario, drop, G, kind, k, c, float(rep.rates[k]), rep.block_lengths[c], rep.feasible[c]))
    return rows


def _drop(config: ScenarioConfig, drop: int, sigma2: float):
    room = config.room
    aps = place_aps_grid(room, config.ap_rows, config.ap_cols)
    seed = drop_seed(config.seed, drop)
    users = place_users_uniform(room, config.num_users, config.receive_height, seed, config.detector)
    cs = build_channel_set(aps, users, config.emitter_model, sigma2)
    return aps, users, cs, seed


def run_fig5(config: ScenarioConfig, G_range: Optional[Iterable[int]] = None) -> ExperimentResult:
    """Mean user rate against the number of groups for NC and UC topologies.

    ``G = 1`` is recorded once, as standard BIA.  UC uses ``G`` clusters
    directly; NC uses the AP tiling whose cluster count is nearest ``G``.
    """
    G_range = list(config.fig5_groups if G_range is None else G_range)
    res = ExperimentResult()
    sigma2 = reference_noise_variance(config)
    plan = []
    for G in G_range:
        if G == 1:
            plan.append((1, STANDARD, None))
            res.meta[(1, STANDARD)] = {"clusters": 1, "nc_tiling": ""}
            continue
        if G > config.num_users:
            log.warning("G=%d skipped for UC: more groups than users (%d)", G, config.num_users)
        else:
            plan.append((G, USER_CENTRIC, None))
            res.meta[(G, USER_CENTRIC)] = {"clusters": G, "nc_tiling": ""}
        tiling = nearest_tiling(config.ap_rows, config.ap_cols, G)
        if tiling[0] * tiling[1] != G:
            log.info("G=%d has no exact NC tiling of the %dx%d grid; using %dx%d", G, config.ap_rows,
                     config.ap_cols, *tiling)
        plan.append((G, NETWORK_CENTRIC, tiling))
        res.meta[(G, NETWORK_CENTRIC)] = {"clusters": tiling[0] * tiling[1], "nc_tiling": f"{tiling[0]}x{tiling[1]}"}
    for drop in range(config.drops):
        aps, users, cs, seed = _drop(config, drop, sigma2)
        for G, kind, tiling in plan:
            topo = _topology(kind, G, aps, users, config, seed, tiling)
            res.rows.extend(_rows_for(config, config.scenario, drop, G, kind, topo, cs, sigma2))
    return res


@dataclass
class Fig6Result:
    rows: List[tuple] = field(default_factory=list)

    def summary(self) -> List[tuple]:
        acc: Dict[Tuple[int, str, int], List[int]] = {}
        for K, kind, G, _, T in self.rows:
            acc.setdefault((K, kind, G), []).append(T)
        return [(K, kind, G, min(v), max(v)) for (K, kind, G), v in acc.items()]

    def max_block_length(self, K: int, kind: str) -> int:
        return max(T for k, kd, _, _, T in self.rows if k == K and kd == kind)

    def write_csv(self, fh):
        _write(fh, FIG6_HEADER, self.rows)

    def write_summary(self, fh):
        _write(fh, FIG6_SUMMARY_HEADER, self.summary())


def run_fig6(config: ScenarioConfig, K_range: Optional[Iterable[int]] = None) -> Fig6Result:
    """Transmission block length against the number of users.

    Standard BIA uses the closed form with all APs.  NC and UC report the
    largest per-cluster block length of every drop, with ``fig6_groups``
    groups (capped at ``K`` for UC).
    """
    K_range = list(config.fig6_users if K_range is None else K_range)
    L = config.ap_rows * config.ap_cols
    G = config.fig6_groups
    tiling = nearest_tiling(config.ap_rows, config.ap_cols, G)
    room = config.room
    aps = place_aps_grid(room, config.ap_rows, config.ap_cols)
    out = Fig6Result()
    for K in K_range:
        out.rows.append((K, STANDARD, 1, 0, block_lengths(L, K)[2]))
        for drop in range(config.drops):
            seed = drop_seed(config.seed, drop)
            users = place_users_uniform(room, K, config.receive_height, seed)
            nc = nc_partition(aps, tiling[0], tiling[1], users)
            out.rows.append((K, NETWORK_CENTRIC, tiling[0] * tiling[1], drop, max(nc.block_lengths().values())))
            g_uc = min(G, K)
            uc = _topology(USER_CENTRIC, g_uc, aps, users, config, seed)
            out.rows.append((K, USER_CENTRIC, g_uc, drop, max(uc.block_lengths().values())))
    return out


def run_scenario(config: ScenarioConfig) -> ExperimentResult:
    """Evaluate the configured topology over ``config.drops`` drops."""
    sigma2 = reference_noise_variance(config)
    kind = config.topology
    G = 1 if kind == STANDARD else config.groups
    tiling = config.nc_tiling if kind == NETWORK_CENTRIC else None
    res = ExperimentResult()
    if kind == NETWORK_CENTRIC:
        tiling = tiling or nearest_tiling(config.ap_rows, config.ap_cols, G)
        res.meta[(G, kind)] = {"clusters": tiling[0] * tiling[1], "nc_tiling": f"{tiling[0]}x{tiling[1]}"}
    else:
        res.meta[(G, kind)] = {"clusters": G, "nc_tiling": ""}
    for drop in range(config.drops):
        aps, users, cs, seed = _drop(config, drop, sigma2)
        topo = _topology(kind, G, aps, users, config, seed, tiling)
        res.rows.extend(_rows_for(config, config.scenario, drop, G, kind, topo, cs, sigma2))
    return res
