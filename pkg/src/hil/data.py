"""Two-modality embedding datasets: vector primitives, synthetic generator, file I/O.

Datasets hold raw input vectors plus their L2-normalized features, tagged VIS or
IR. Features are always unit vectors so that dot products and cosine
similarities coincide everywhere downstream. All in-memory arithmetic is
float64; the JSON-Lines file format stores raw vectors at float32 precision.
"""

import json
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .exceptions import DimensionMismatch, InvalidSpec, ParseError, ZeroVector

ZERO_NORM_EPS = 1e-12


class Modality(Enum):
    VIS = "VIS"
    IR = "IR"


def normalize(v):
    """Return v / |v|_2. Raises ZeroVector when |v|_2 <= 1e-12."""
    v = np.asarray(v, dtype=np.float64)
    n = float(np.linalg.norm(v))
    if n <= ZERO_NORM_EPS:
        raise ZeroVector(f"cannot normalize vector with norm {n:.3g}")
    return v / n


def cosine_sim(a, b):
    """Dot product of two unit vectors, clamped to [-1, 1] against rounding."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionMismatch(f"shapes {a.shape} and {b.shape} differ")
    return float(np.clip(np.dot(a, b), -1.0, 1.0))


@dataclass(frozen=True)
class Instance:
    """One sample: raw input vector, unit feature, modality tag.

    gt_identity is ground truth for evaluation only; no training-path
    operation reads it.
    """

    id: int
    modality: Modality
    raw: np.ndarray
    feature: np.ndarray
    gt_identity: int | None = None

    def __post_init__(self):
        if self.id < 0:
            raise ValueError("instance id must be non-negative")
        n = float(np.linalg.norm(self.feature))
        if abs(n - 1.0) > 1e-6:
            raise ValueError(f"feature norm {n} deviates from 1 by more than 1e-6")


@dataclass
class Dataset:
    """Immutable container of VIS and IR instances with consistent dimensions."""

    vis: list = field(default_factory=list)
    ir: list = field(default_factory=list)
    d_in: int = 0
    d: int = 0

    def __post_init__(self):
        for mod, seq in ((Modality.VIS, self.vis), (Modality.IR, self.ir)):
            for k, inst in enumerate(seq):
                if inst.id != k:
                    raise ValueError(f"{mod.value} ids must be 0..N-1 contiguous")
                if inst.modality is not mod:
                    raise ValueError(f"instance {k} tagged {inst.modality} in {mod.value} list")
                if len(inst.raw) != self.d_in or len(inst.feature) != self.d:
                    raise DimensionMismatch(
                        f"{mod.value} instance {k}: raw/feature lengths "
                        f"{len(inst.raw)}/{len(inst.feature)} != {self.d_in}/{self.d}"
                    )

    def instances(self, modality):
        return self.vis if modality is Modality.VIS else self.ir

    def raw_matrix(self, modality):
        seq = self.instances(modality)
        if not seq:
            return np.zeros((0, self.d_in))
        return np.stack([inst.raw for inst in seq])

    def feature_matrix(self, modality):
        seq = self.instances(modality)
        if not seq:
            return np.zeros((0, self.d))
        return np.stack([inst.feature for inst in seq])

    def gt_array(self, modality):
        """Ground-truth identities, or None if any instance lacks one."""
        seq = self.instances(modality)
        if any(inst.gt_identity is None for inst in seq):
            return None
        return np.array([inst.gt_identity for inst in seq], dtype=np.int64)

    @property
    def n_vis(self):
        return len(self.vis)

    @property
    def n_ir(self):
        return len(self.ir)


@dataclass(frozen=True)
class SynthSpec:
    """Parameters of the synthetic two-modality generator.

    Each identity gets one Gaussian prototype (component scale
    ``identity_spread``) and one offset vector per modality (scale
    ``modality_offset_scale``), giving every identity a systematic gap
    between its VIS and IR instances. Instances add i.i.d. noise at scale
    ``intra_class_noise`` on top.
    """

    num_identities: int
    instances_per_identity: int
    d_in: int
    identity_spread: float = 1.0
    intra_class_noise: float = 0.1
    modality_offset_scale: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.num_identities < 1 or self.instances_per_identity < 1 or self.d_in < 1:
            raise InvalidSpec("num_identities, instances_per_identity and d_in must be >= 1")
        if self.identity_spread < 0 or self.intra_class_noise < 0 or self.modality_offset_scale < 0:
            raise InvalidSpec("spread/noise/offset scales must be non-negative")
        if not self.intra_class_noise < self.identity_spread:
            raise InvalidSpec(
                "intra_class_noise must be strictly smaller than identity_spread, "
                f"got {self.intra_class_noise} >= {self.identity_spread}"
            )


def generate_synthetic(spec):
    """Draw a deterministic synthetic Dataset from a SynthSpec.

    Draw order is fixed (prototypes, then offsets, then VIS noise, then IR
    noise) so a given seed always produces the same dataset.
    """
    rng = np.random.default_rng(spec.seed)
    n_id, per, d = spec.num_identities, spec.instances_per_identity, spec.d_in
    protos = rng.normal(0.0, spec.identity_spread, size=(n_id, d))
    offsets = rng.normal(0.0, spec.modality_offset_scale, size=(n_id, 2, d))

    def build(modality, mod_idx):
        out = []
        for ident in range(n_id):
            base = protos[ident] + offsets[ident, mod_idx]
            for _ in range(per):
                raw = base + rng.normal(0.0, spec.intra_class_noise, size=d)
                out.append(
                    Instance(
                        id=len(out),
                        modality=modality,
                        raw=raw,
                        feature=normalize(raw),
                        gt_identity=ident,
                    )
                )
        return out

    vis = build(Modality.VIS, 0)
    ir = build(Modality.IR, 1)
    return Dataset(vis=vis, ir=ir, d_in=d, d=d)


def save_dataset(dataset, path):
    """Write a Dataset as JSON Lines, VIS then IR, ids ascending.

    Raw vectors are rounded to float32 before serialization; output bytes are
    deterministic for a given dataset.
    """
    with open(path, "w", encoding="utf-8") as f:
        for inst in list(dataset.vis) + list(dataset.ir):
            rec = {
                "id": inst.id,
                "modality": inst.modality.value,
                "gt": inst.gt_identity,
                "raw": [float(np.float32(x)) for x in inst.raw],
            }
            f.write(json.dumps(rec, separators=(",", ":")) + "\n")


def load_dataset(path):
    """Read a JSON-Lines dataset; features are recomputed as normalize(raw).

    Records may appear in any order. Raises ParseError (with the offending
    line number) on malformed records and DimensionMismatch when records
    disagree on the raw dimension.
    """
    by_modality = {Modality.VIS: {}, Modality.IR: {}}
    d_in = None
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as e:
                raise ParseError(str(e), line=lineno) from e
            if not isinstance(rec, dict):
                raise ParseError("record is not a JSON object", line=lineno)
            try:
                inst_id = int(rec["id"])
                modality = Modality(rec["modality"])
                gt = rec["gt"]
                raw_list = rec["raw"]
            except (KeyError, ValueError, TypeError) as e:
                raise ParseError(f"bad record: {e}", line=lineno) from e
            if not isinstance(raw_list, list) or not raw_list:
                raise ParseError("'raw' must be a non-empty list", line=lineno)
            if d_in is None:
                d_in = len(raw_list)
            elif len(raw_list) != d_in:
                raise DimensionMismatch(
                    f"raw vector has length {len(raw_list)}, expected {d_in}", line=lineno
                )
            raw = np.asarray(raw_list, dtype=np.float32).astype(np.float64)
            if inst_id in by_modality[modality]:
                raise ParseError(f"duplicate id {inst_id} in {modality.value}", line=lineno)
            by_modality[modality][inst_id] = Instance(
                id=inst_id,
                modality=modality,
                raw=raw,
                feature=normalize(raw),
                gt_identity=None if gt is None else int(gt),
            )
    if d_in is None:
        return Dataset(vis=[], ir=[], d_in=0, d=0)
    ordered = {}
    for modality, recs in by_modality.items():
        ids = sorted(recs)
        if ids != list(range(len(ids))):
            raise ParseError(f"{modality.value} ids are not contiguous 0..N-1")
        ordered[modality] = [recs[i] for i in ids]
    return Dataset(vis=ordered[Modality.VIS], ir=ordered[Modality.IR], d_in=d_in, d=d_in)
