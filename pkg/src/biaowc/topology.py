"""Network-centric and user-centric cluster formation."""

from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np

from . import _accel
from .geometry import AccessPoint, UserTerminal, grid_shape, positions

STANDARD = "standard"
NETWORK_CENTRIC = "nc"
USER_CENTRIC = "uc"
KINDS = (STANDARD, NETWORK_CENTRIC, USER_CENTRIC)


@dataclass(frozen=True)
class Cluster:
    id: int
    ap_ids: Tuple[int, ...]
    user_ids: Tuple[int, ...]
    centroid: Tuple[float, float]


@dataclass(frozen=True)
class Topology:
    clusters: Tuple[Cluster, ...]
    kind: str
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown topology kind {self.kind!r}")
        aps = [a for c in self.clusters for a in c.ap_ids]
        users = [u for c in self.clusters for u in c.user_ids]
        if any(len(c.ap_ids) == 0 for c in self.clusters):
            raise ValueError("every cluster needs at least one AP")
        if len(set(aps)) != len(aps):
            raise ValueError("an AP belongs to more than one cluster")
        if len(set(users)) != len(users):
            raise ValueError("a user belongs to more than one cluster")

    @property
    def num_clusters(self) -> int:
        return len(self.clusters)

    def cluster_of_user(self, user: int) -> int:
        for c in self.clusters:
            if user in c.user_ids:
                return c.id
        raise KeyError(user)

    def block_lengths(self):
        from .rate import cluster_block_length
        return {c.id: cluster_block_length(len(c.ap_ids), len(c.user_ids)) for c in self.clusters}

    def to_csv_rows(self) -> List[List[str]]:
        rows = [["cluster", "ap_ids", "user_ids", "centroid_x", "centroid_y"]]
        for c in self.clusters:
            rows.append([str(c.id), " ".join(map(str, c.ap_ids)), " ".join(map(str, c.user_ids)),
                         f"{c.centroid[0]:.6f}", f"{c.centroid[1]:.6f}"])
        return rows


def _xy(items) -> np.ndarray:
    return np.ascontiguousarray(positions(items)[:, :2])


def standard_topology(aps: Sequence[AccessPoint], users: Sequence[UserTerminal]) -> Topology:
    xy = _xy(aps)
    c = Cluster(0, tuple(a.id for a in aps), tuple(u.id for u in users), tuple(map(float, xy.mean(axis=0))))
    return Topology((c,), STANDARD)


def nc_partition(aps: Sequence[AccessPoint], groups_x: int, groups_y: int,
                 users: Sequence[UserTerminal]) -> Topology:
    """Tile the AP grid into ``groups_x * groups_y`` rectangular clusters.

    Users join the cluster with the nearest AP centroid; ties go to the
    lowest cluster id.  The AP side never looks at the users.
    """
    rows, cols = grid_shape(aps)
    if groups_x < 1 or groups_y < 1 or rows % groups_x or cols % groups_y:
        raise ValueError(f"a {rows}x{cols} AP grid cannot be tiled by ({groups_x}, {groups_y})")
    by_pos = sorted(aps, key=lambda a: (a.position[0], a.position[1]))
    th, tw = rows // groups_x, cols // groups_y
    members = [[] for _ in range(groups_x * groups_y)]
    for idx, ap in enumerate(by_pos):
        i, j = divmod(idx, cols)
        members[(i // th) * groups_y + j // tw].append(ap)
    centroids = np.array([_xy(m).mean(axis=0) for m in members])
    owner = _accel.nearest_centre(_xy(users), centroids) if users else np.zeros(0, dtype=np.int64)
    clusters = []
    for cid, m in enumerate(members):
        uids = tuple(int(users[i].id) for i in np.flatnonzero(owner == cid))
        clusters.append(Cluster(cid, tuple(sorted(a.id for a in m)), uids, tuple(map(float, centroids[cid]))))
    kind = STANDARD if len(members) == 1 else NETWORK_CENTRIC
    return Topology(tuple(clusters), kind, {"tiling": (groups_x, groups_y)})


def nc_tilings(rows: int, cols: int) -> List[Tuple[int, int]]:
    return [(gx, gy) for gx in range(1, rows + 1) if rows % gx == 0
            for gy in range(1, cols + 1) if cols % gy == 0]


def nearest_tiling(rows: int, cols: int, G: int) -> Tuple[int, int]:
    """Tiling whose cluster count is nearest ``G``.

    Ties prefer the smaller count, then the squarer tiles, then smaller ``groups_x``.
    """
    return min(nc_tilings(rows, cols),
               key=lambda t: (abs(t[0] * t[1] - G), t[0] * t[1], abs(t[0] - t[1]), t[0]))


def within_cluster_ss(points, labels, centroids=None) -> float:
    points = np.asarray(points, dtype=float)
    labels = np.asarray(labels)
    total = 0.0
    for g in np.unique(labels):
        p = points[labels == g]
        c = p.mean(axis=0) if centroids is None else np.asarray(centroids)[g]
        total += float(np.sum((p - c) ** 2))
    return total


@dataclass
class KMeansResult:
    labels: np.ndarray
    centroids: np.ndarray
    iterations: int
    wcss_history: List[float]

    @property
    def groups(self) -> List[List[int]]:
        return [np.flatnonzero(self.labels == g).tolist() for g in range(len(self.centroids))]

    @property
    def wcss(self) -> float:
        return self.wcss_history[-1]


def _repair_empty(points, labels, G):
    while True:
        counts = np.bincount(labels, minlength=G)
        empty = np.flatnonzero(counts == 0)
        if not empty.size:
            return labels
        donor = int(np.argmax(counts))              # lowest id among the largest
        idx = np.flatnonzero(labels == donor)
        c = points[idx].mean(axis=0)
        far = idx[int(np.argmax(np.sum((points[idx] - c) ** 2, axis=1)))]
        labels[far] = empty[0]


def _lloyd(pts, centroids, G, max_iters):
    labels = None
    history = []
    it = 0
    for it in range(1, max_iters + 1):
        new = _repair_empty(pts, _accel.nearest_centre(pts, centroids).astype(np.int64), G)
        centroids = np.array([pts[new == g].mean(axis=0) for g in range(G)])
        history.append(within_cluster_ss(pts, new, centroids))
        if labels is not None and np.array_equal(new, labels):
            labels = new
            break
        labels = new
    return KMeansResult(labels, centroids, it, history)


def kmeans_users(user_positions, G: int, seed: int, max_iters: int = 100, restarts: int = 10) -> KMeansResult:
    """Lloyd's algorithm, best of ``restarts`` runs.

    Every run starts from ``G`` distinct users drawn from one generator
    seeded with ``seed``.  Assignment ties go to the lowest group id.  An
    emptied group takes the member of the largest group that lies farthest
    from that group's mean.  The run with the lowest within-cluster sum of
    squares wins (earliest run on ties).
    """
    pts = np.ascontiguousarray(np.asarray(user_positions, dtype=float).reshape(-1, 2))
    n = len(pts)
    if G < 1:
        raise ValueError("G must be >= 1")
    if G > n:
        raise ValueError(f"G = {G} exceeds the number of users ({n})")
    if max_iters < 1 or restarts < 1:
        raise ValueError("max_iters and restarts must be >= 1")
    rng = np.random.default_rng(seed)
    best = None
    for _ in range(restarts):
        start = pts[np.sort(rng.choice(n, size=G, replace=False))].copy()
        res = _lloyd(pts, start, G, max_iters)
        if best is None or res.wcss < best.wcss:
            best = res
    return best


def associate_aps(labels, centroids, aps: Sequence[AccessPoint], users: Sequence[UserTerminal] = None) -> Topology:
    """Give each AP to the group with the nearest centroid.

    A group left without APs takes, from the group holding the most APs,
    the AP closest to its own centroid.
    """
    centroids = np.ascontiguousarray(np.asarray(centroids, dtype=float).reshape(-1, 2))
    G = len(centroids)
    if len(aps) < G:
        raise ValueError("need at least as many APs as groups")
    ap_xy = _xy(aps)
    owner = _accel.nearest_centre(ap_xy, centroids).astype(np.int64)
    while True:
        counts = np.bincount(owner, minlength=G)
        empty = np.flatnonzero(counts == 0)
        if not empty.size:
            break
        g = int(empty[0])
        donor = int(np.argmax(counts))
        cand = np.flatnonzero(owner == donor)
        d2 = np.sum((ap_xy[cand] - centroids[g]) ** 2, axis=1)
        owner[cand[int(np.argmin(d2))]] = g
    labels = np.asarray(labels)
    user_ids = [u.id for u in users] if users is not None else list(range(len(labels)))
    clusters = []
    for g in range(G):
        clusters.append(Cluster(g, tuple(int(aps[i].id) for i in np.flatnonzero(owner == g)),
                                tuple(int(user_ids[i]) for i in np.flatnonzero(labels == g)),
                                (float(centroids[g, 0]), float(centroids[g, 1]))))
    return Topology(tuple(clusters), USER_CENTRIC if G > 1 else STANDARD)


def uc_topology(aps: Sequence[AccessPoint], users: Sequence[UserTerminal], G: int, seed: int,
                max_iters: int = 100, restarts: int = 10) -> Topology:
    """K-means on the users followed by AP association."""
    km = kmeans_users(_xy(users), G, seed, max_iters, restarts)
    topo = associate_aps(km.labels, km.centroids, aps, users)
    kind = USER_CENTRIC if G > 1 else STANDARD
    return Topology(topo.clusters, kind, {"kmeans_iterations": km.iterations})
