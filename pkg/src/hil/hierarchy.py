"""Two-level pseudo-label hierarchy.

Coarse level: DBSCAN over cosine distance (1 - dot product on unit features),
one run per modality. Fine level: seeded k-means inside every coarse cluster.
Centroids at both levels are plain arithmetic means of member features;
normalization happens later, at memory initialization.
"""

from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin

from .data import Modality
from .validation import check_matrix

OUTLIER = -1


@dataclass
class CoarseLabeling:
    """DBSCAN assignment for one modality: labels[i] in {0..n_clusters-1} or OUTLIER."""

    modality: Modality
    labels: np.ndarray
    n_clusters: int

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=np.int64)
        present = set(self.labels[self.labels != OUTLIER].tolist())
        if present != set(range(self.n_clusters)):
            raise ValueError("cluster ids must be compacted 0..M-1 with no empty clusters")

    def members(self, cluster_id):
        return np.flatnonzero(self.labels == cluster_id)

    @property
    def n_outliers(self):
        return int(np.sum(self.labels == OUTLIER))

    @property
    def kept(self):
        """Ids of non-outlier instances, ascending."""
        return np.flatnonzero(self.labels != OUTLIER)


@dataclass
class FineLabeling:
    """K-means sub-assignment: (coarse id, sub id) per instance, OUTLIER rows excluded."""

    modality: Modality
    coarse_labels: np.ndarray
    sub_labels: np.ndarray
    k_requested: int
    k_eff: list = field(default_factory=list)

    def __post_init__(self):
        self.coarse_labels = np.asarray(self.coarse_labels, dtype=np.int64)
        self.sub_labels = np.asarray(self.sub_labels, dtype=np.int64)
        for i, k in enumerate(self.k_eff):
            member_subs = self.sub_labels[self.coarse_labels == i]
            if k < 1 or set(member_subs.tolist()) != set(range(k)):
                raise ValueError(f"coarse cluster {i}: sub ids must be compacted 0..{k - 1}")

    def members(self, coarse_id, sub_id):
        return np.flatnonzero((self.coarse_labels == coarse_id) & (self.sub_labels == sub_id))


def _cosine_distances(features):
    sims = np.clip(features @ features.T, -1.0, 1.0)
    return 1.0 - sims


def dbscan(features, eps=0.6, min_pts=4, modality=Modality.VIS):
    """Density clustering on unit features under cosine distance.

    Core point: >= min_pts points (itself included) within eps. Clusters are
    the connected components of the core-core reachability graph; a border
    point joins the cluster of its lowest-id core neighbor. Cluster ids are
    assigned by ascending minimum member id.
    """
    features = check_matrix(features, "features")
    n = features.shape[0]
    if n == 0:
        return CoarseLabeling(modality=modality, labels=np.zeros(0, dtype=np.int64), n_clusters=0)
    if eps <= 0:
        raise ValueError("eps must be positive")
    if min_pts < 1:
        raise ValueError("min_pts must be >= 1")

    dist = _cosine_distances(features)
    within = dist <= eps
    core = within.sum(axis=1) >= min_pts

    # Union-find over core points that are within eps of each other.
    parent = np.arange(n)

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    core_ids = np.flatnonzero(core)
    for a in core_ids:
        for b in core_ids[core_ids > a]:
            if within[a, b]:
                ra, rb = find(a), find(b)
                if ra != rb:
                    parent[max(ra, rb)] = min(ra, rb)

    labels = np.full(n, OUTLIER, dtype=np.int64)
    for a in core_ids:
        labels[a] = find(a)
    for b in np.flatnonzero(~core):
        reach = core_ids[within[b, core_ids]]
        if reach.size:
            labels[b] = find(reach[0])  # lowest-id core neighbor

    # Compact ids by ascending minimum member id.
    roots = []
    for lab in labels:
        if lab != OUTLIER and lab not in roots:
            roots.append(lab)
    remap = {root: rank for rank, root in enumerate(sorted(roots, key=lambda r: int(np.min(np.flatnonzero(labels == r)))))}
    labels = np.array([remap[lab] if lab != OUTLIER else OUTLIER for lab in labels], dtype=np.int64)
    return CoarseLabeling(modality=modality, labels=labels, n_clusters=len(roots))


class CosineDBSCAN(BaseEstimator, ClusterMixin):
    """Estimator wrapper around :func:`dbscan` (labels use -1 for outliers)."""

    def __init__(self, eps=0.6, min_pts=4):
        self.eps = eps
        self.min_pts = min_pts

    def fit(self, X, y=None):
        labeling = dbscan(X, eps=self.eps, min_pts=self.min_pts)
        self.labels_ = labeling.labels
        self.n_clusters_ = labeling.n_clusters
        return self


def _kmeans_pp_init(X, k, rng):
    """k-means++ seeding; boundary ties resolve to the lowest candidate index."""
    n = X.shape[0]
    centers = np.empty((k, X.shape[1]))
    centers[0] = X[int(rng.integers(n))]
    closest = np.sum((X - centers[0]) ** 2, axis=1)
    for c in range(1, k):
        cum = np.cumsum(closest)
        r = rng.random() * cum[-1]
        idx = int(np.searchsorted(cum, r, side="right"))
        idx = min(idx, n - 1)
        centers[c] = X[idx]
        closest = np.minimum(closest, np.sum((X - centers[c]) ** 2, axis=1))
    return centers


def _lloyd(X, centers, tol=1e-6, max_iter=100):
    """Lloyd iterations; returns (labels, centers, per-iteration SSE history).

    Centers that lose all points are dropped immediately, so the returned
    center count can be smaller than the initial one.
    """
    sse_history = []
    for _ in range(max_iter):
        d2 = np.sum((X[:, None, :] - centers[None, :, :]) ** 2, axis=2)
        labels = np.argmin(d2, axis=1)  # argmin takes the lowest index on ties
        sse_history.append(float(np.sum(d2[np.arange(X.shape[0]), labels])))
        keep = np.unique(labels)
        new_centers = np.stack([X[labels == c].mean(axis=0) for c in keep])
        if keep.size != centers.shape[0]:
            centers = new_centers
            continue
        movement = float(np.max(np.linalg.norm(new_centers - centers, axis=1)))
        centers = new_centers
        if movement < tol:
            break
    d2 = np.sum((X[:, None, :] - centers[None, :, :]) ** 2, axis=2)
    labels = np.argmin(d2, axis=1)
    # Compact: drop empty clusters, renumber by first occurrence in id order.
    present = []
    for lab in labels:
        if lab not in present:
            present.append(lab)
    remap = {old: new for new, old in enumerate(sorted(present, key=lambda c: int(np.argmax(labels == c))))}
    labels = np.array([remap[lab] for lab in labels], dtype=np.int64)
    return labels, centers, sse_history


def kmeans_subcluster(features, coarse, k, seed=0):
    """Run seeded k-means independently inside each coarse cluster.

    The effective sub-cluster count is min(k, number of distinct member
    features); empty sub-clusters are dropped and ids compacted. One RNG,
    seeded once, is consumed across clusters in ascending coarse-id order.
    """
    features = check_matrix(features, "features")
    if k < 1:
        raise ValueError("k must be >= 1")
    rng = np.random.default_rng(seed)
    n = features.shape[0]
    sub = np.full(n, OUTLIER, dtype=np.int64)
    k_eff = []
    for i in range(coarse.n_clusters):
        members = coarse.members(i)
        X = features[members]
        n_distinct = np.unique(X, axis=0).shape[0]
        ki = min(k, n_distinct)
        if ki == 1:
            sub[members] = 0
            k_eff.append(1)
            continue
        centers = _kmeans_pp_init(X, ki, rng)
        labels, _, _ = _lloyd(X, centers)
        sub[members] = labels
        k_eff.append(int(labels.max()) + 1)
    return FineLabeling(
        modality=coarse.modality,
        coarse_labels=coarse.labels.copy(),
        sub_labels=sub,
        k_requested=k,
        k_eff=k_eff,
    )


def coarse_centroids(features, coarse):
    """M x d matrix of arithmetic mean features per coarse cluster."""
    features = check_matrix(features, "features")
    return np.stack([features[coarse.members(i)].mean(axis=0) for i in range(coarse.n_clusters)]) \
        if coarse.n_clusters else np.zeros((0, features.shape[1]))


def fine_centroids(features, fine):
    """Per coarse cluster, the K_eff x d matrix of sub-cluster mean features."""
    features = check_matrix(features, "features")
    out = []
    for i, ki in enumerate(fine.k_eff):
        out.append(np.stack([features[fine.members(i, j)].mean(axis=0) for j in range(ki)]))
    return out


def labeling_to_obj(coarse, fine=None):
    """JSON-ready object for one modality's labeling (-1 encodes OUTLIER)."""
    assignment = []
    for idx, lab in enumerate(coarse.labels):
        sub = None
        if fine is not None and lab != OUTLIER:
            sub = int(fine.sub_labels[idx])
        assignment.append({"id": idx, "coarse": int(lab), "sub": sub})
    return {"modality": coarse.modality.value, "M": coarse.n_clusters, "assignment": assignment}


def labeling_from_obj(obj):
    """Inverse of :func:`labeling_to_obj`; returns (CoarseLabeling, FineLabeling | None)."""
    modality = Modality(obj["modality"])
    n = len(obj["assignment"])
    labels = np.full(n, OUTLIER, dtype=np.int64)
    subs = np.full(n, OUTLIER, dtype=np.int64)
    has_fine = False
    for rec in obj["assignment"]:
        labels[rec["id"]] = rec["coarse"]
        if rec.get("sub") is not None:
            subs[rec["id"]] = rec["sub"]
            has_fine = True
    coarse = CoarseLabeling(modality=modality, labels=labels, n_clusters=int(obj["M"]))
    fine = None
    if has_fine:
        k_eff = [int(subs[labels == i].max()) + 1 for i in range(coarse.n_clusters)]
        fine = FineLabeling(
            modality=modality,
            coarse_labels=labels.copy(),
            sub_labels=subs,
            k_requested=max(k_eff) if k_eff else 1,
            k_eff=k_eff,
        )
    return coarse, fine
