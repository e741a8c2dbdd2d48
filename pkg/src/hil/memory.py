"""Coarse and fine memory banks with momentum updates and the identity loss.

Rows are prototypes, one per (sub-)cluster and modality. They are initialized
from normalized centroids, then pulled toward query features by an exponential
momentum rule; gradients never flow into them. Every stored row is unit-norm
at all times.
"""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .data import Modality, normalize
from .exceptions import EmptyBank, UnknownLabel
from .validation import check_matrix


class Level(Enum):
    COARSE = "coarse"
    FINE = "fine"


def softmax_xent(rows, queries, labels, tau):
    """Mean InfoNCE loss of queries against prototype rows, with query gradients.

    Per query q with positive row u+: -log softmax(q . u / tau)[+]. Returns
    (mean loss, d mean loss / d query). Rows are treated as constants.
    Computed with max-subtraction so tau = 0.05 cannot overflow.
    """
    rows = check_matrix(rows, "rows")
    queries = check_matrix(queries, "queries", d=rows.shape[1])
    if rows.shape[0] == 0:
        raise EmptyBank("no memory rows for this modality")
    labels = np.asarray(labels, dtype=np.int64)
    if np.any(labels < 0) or np.any(labels >= rows.shape[0]):
        raise UnknownLabel("query label outside 0..M-1")
    nq = queries.shape[0]
    logits = queries @ rows.T / tau
    logits -= logits.max(axis=1, keepdims=True)
    p = np.exp(logits)
    p /= p.sum(axis=1, keepdims=True)
    loss = float(np.mean(-np.log(p[np.arange(nq), labels])))
    delta = p.copy()
    delta[np.arange(nq), labels] -= 1.0
    grads = delta @ rows / (tau * nq)
    return loss, grads


@dataclass
class MemoryBank:
    """Per-modality coarse and fine prototype tables.

    fine_* is ragged: one (K_eff x d) array per coarse cluster. ``recorder``,
    when set, is called as recorder(level, modality, label) on every momentum
    update (test hook for ordering assertions).
    """

    coarse_vis: np.ndarray
    coarse_ir: np.ndarray
    fine_vis: list = field(default_factory=list)
    fine_ir: list = field(default_factory=list)
    alpha: float = 0.1
    tau: float = 0.05
    recorder: object = None

    def coarse(self, modality):
        return self.coarse_vis if modality is Modality.VIS else self.coarse_ir

    def fine(self, modality):
        return self.fine_vis if modality is Modality.VIS else self.fine_ir

    def fine_flat(self, modality):
        """All fine rows of one modality as (centers, coarse_ids), (i, j) ascending."""
        tables = self.fine(modality)
        if not tables:
            coarse = self.coarse(modality)
            d = coarse.shape[1] if coarse.ndim == 2 else 0
            return np.zeros((0, d)), np.zeros(0, dtype=np.int64)
        centers = np.concatenate(tables, axis=0)
        coarse_ids = np.concatenate(
            [np.full(t.shape[0], i, dtype=np.int64) for i, t in enumerate(tables)]
        )
        return centers, coarse_ids

    def momentum_update(self, level, modality, label, query):
        """row <- normalize(alpha * row + (1 - alpha) * query)."""
        query = np.asarray(query, dtype=np.float64)
        if level is Level.COARSE:
            table = self.coarse(modality)
            if not (0 <= label < table.shape[0]):
                raise UnknownLabel(f"no coarse cluster {label}")
            row = label
        else:
            i, j = label
            tables = self.fine(modality)
            if not (0 <= i < len(tables)) or not (0 <= j < tables[i].shape[0]):
                raise UnknownLabel(f"no fine cluster {label}")
            table, row = tables[i], j
        table[row] = normalize(self.alpha * table[row] + (1.0 - self.alpha) * query)
        if self.recorder is not None:
            self.recorder(level, modality, label)

    def identity_loss(self, queries, labels, modality):
        """Mean contrastive loss of queries against this modality's coarse rows."""
        return softmax_xent(self.coarse(modality), queries, labels, self.tau)

    def snapshot(self):
        """JSON-ready records (one per row) for checkpointing."""
        recs = []
        for modality in Modality:
            table = self.coarse(modality)
            for i in range(table.shape[0]):
                recs.append(
                    {"level": "coarse", "modality": modality.value, "label": i,
                     "row": table[i].tolist()}
                )
            for i, sub in enumerate(self.fine(modality)):
                for j in range(sub.shape[0]):
                    recs.append(
                        {"level": "fine", "modality": modality.value, "label": [i, j],
                         "row": sub[j].tolist()}
                    )
        return recs


def init_from_centroids(coarse_vis, fine_vis, coarse_ir, fine_ir, alpha=0.1, tau=0.05):
    """Build a MemoryBank whose rows are the normalized centroid rows."""

    def norm_rows(mat):
        return np.stack([normalize(r) for r in mat]) if mat.shape[0] else mat.copy()

    return MemoryBank(
        coarse_vis=norm_rows(coarse_vis),
        coarse_ir=norm_rows(coarse_ir),
        fine_vis=[norm_rows(t) for t in fine_vis],
        fine_ir=[norm_rows(t) for t in fine_ir],
        alpha=alpha,
        tau=tau,
    )
