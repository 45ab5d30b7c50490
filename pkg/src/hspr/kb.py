"""Spatial proximity knowledge base.

Counts three kinds of co-occurrence over annotated scenes — region-type
adjacency, object-type co-presence per view, and node-type/object-type
correlation — then turns the count rows into probabilities in [0, 0.95]
by clamping each row at its 95th percentile and min-max normalizing.
"""

from __future__ import annotations

import datetime
import hashlib
import json
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .errors import SchemaError
from .scene import SceneGraph, region_adjacency, segment_regions

KB_SCHEMA_VERSION = 1
PROB_CEILING = 0.95
DEFAULT_TOP_K = 10


@dataclass
class CountMatrices:
    """Raw co-occurrence tallies accumulated over scenes."""

    C_r: np.ndarray
    C_o: np.ndarray
    C_ro: np.ndarray
    scene_count: int = 0

    @classmethod
    def zeros(cls, n_types: int, n_object_types: int) -> "CountMatrices":
        return cls(
            C_r=np.zeros((n_types, n_types), dtype=np.int64),
            C_o=np.zeros((n_object_types, n_object_types), dtype=np.int64),
            C_ro=np.zeros((n_types, n_object_types), dtype=np.int64),
        )


@dataclass(eq=False)
class ProximityKB:
    """Normalized proximity matrices plus per-type top co-occurring objects."""

    P_r: np.ndarray
    P_o: np.ndarray
    top_objects: list[list[int]]
    type_vocabulary: list[str]
    object_vocabulary: list[str]
    provenance: dict = field(default_factory=dict)

    def __eq__(self, other):
        if not isinstance(other, ProximityKB):
            return NotImplemented
        return (
            np.array_equal(self.P_r, other.P_r)
            and np.array_equal(self.P_o, other.P_o)
            and self.top_objects == other.top_objects
            and self.type_vocabulary == other.type_vocabulary
            and self.object_vocabulary == other.object_vocabulary
            and self.provenance == other.provenance
        )


def accumulate_scene(counts: CountMatrices, scene: SceneGraph) -> CountMatrices:
    """Add one scene's tallies into counts (in place) and return counts.

    Region adjacency counts connectivity between segmented regions, once per
    region pair regardless of how many edges join them.  Objects sharing a
    view sector at a node co-occur once per unordered type pair.  Node-object
    correlation counts one per object instance at a node.
    """
    n_r = counts.C_r.shape[0]
    n_o = counts.C_o.shape[0]
    if scene.n_types != n_r or scene.n_object_types != n_o:
        raise ValueError(
            f"scene vocabularies ({scene.n_types} types, {scene.n_object_types} objects) "
            f"do not match count matrices ({n_r}, {n_o})"
        )

    regions = segment_regions(scene)
    type_of = {r.region_id: r.region_type for r in regions}
    for ra, rb in region_adjacency(scene, regions):
        ta, tb = type_of[ra], type_of[rb]
        if ta == tb:
            counts.C_r[ta, ta] += 1
        else:
            counts.C_r[ta, tb] += 1
            counts.C_r[tb, ta] += 1

    for node in scene.nodes:
        per_view: dict[int, set[int]] = {}
        for obj in node.objects:
            per_view.setdefault(obj.view_index, set()).add(obj.object_type)
            counts.C_ro[node.node_type, obj.object_type] += 1
        for types_in_view in per_view.values():
            for a, b in combinations(sorted(types_in_view), 2):
                counts.C_o[a, b] += 1
                counts.C_o[b, a] += 1

    counts.scene_count += 1
    return counts


def merge_counts(a: CountMatrices, b: CountMatrices) -> CountMatrices:
    """Elementwise merge of independently accumulated counts."""
    if a.C_r.shape != b.C_r.shape or a.C_o.shape != b.C_o.shape:
        raise ValueError("count matrices have mismatched dimensions")
    return CountMatrices(
        C_r=a.C_r + b.C_r,
        C_o=a.C_o + b.C_o,
        C_ro=a.C_ro + b.C_ro,
        scene_count=a.scene_count + b.scene_count,
    )


def normalize_counts(C: np.ndarray) -> np.ndarray:
    """Turn a non-negative count matrix into per-row probabilities in [0, 0.95].

    Per row: clamp entries above the row's 95th percentile (linear
    interpolation at rank 0.95*(n-1) over the sorted row) down to that
    percentile, then min-max scale the clamped row to [0, 0.95].  A row whose
    clamped max equals its min maps to all zeros.
    """
    C = np.asarray(C, dtype=np.float64)
    if np.any(C < 0):
        raise ValueError("count matrix has a negative entry")
    out = np.zeros_like(C)
    for i, row in enumerate(C):
        p95 = np.percentile(row, 95, method="linear")
        clamped = np.minimum(row, p95)
        lo, hi = clamped.min(), clamped.max()
        if hi > lo:
            # divide before scaling so the row extremes land exactly on
            # 0 and the ceiling
            out[i] = PROB_CEILING * ((clamped - lo) / (hi - lo))
    return out


def top_k_objects(C_ro: np.ndarray, K: int) -> list[list[int]]:
    """Per node type, the K object types with the highest correlation counts.

    Descending by count, ties broken by ascending object index; zero-count
    object types are never included.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    result = []
    for row in np.asarray(C_ro):
        ranked = sorted(
            (o for o in range(len(row)) if row[o] > 0),
            key=lambda o: (-row[o], o),
        )
        result.append(ranked[:K])
    return result


def build_kb(
    counts: CountMatrices,
    type_vocabulary: list[str],
    object_vocabulary: list[str],
    top_k: int = DEFAULT_TOP_K,
    config: dict | None = None,
    timestamp: str | None = None,
) -> ProximityKB:
    """Normalize accumulated counts into an immutable knowledge base."""
    config = dict(config or {})
    config.setdefault("top_k", top_k)
    if timestamp is None:
        timestamp = datetime.datetime.now(datetime.timezone.utc).isoformat()
    fingerprint = hashlib.sha256(
        json.dumps(config, sort_keys=True).encode("utf-8")
    ).hexdigest()[:16]
    return ProximityKB(
        P_r=normalize_counts(counts.C_r),
        P_o=normalize_counts(counts.C_o),
        top_objects=top_k_objects(counts.C_ro, top_k),
        type_vocabulary=list(type_vocabulary),
        object_vocabulary=list(object_vocabulary),
        provenance={
            "scene_count": counts.scene_count,
            "built_at": timestamp,
            "config_hash": fingerprint,
        },
    )


def _matrix_to_payload(M: np.ndarray, sparse_threshold: float | None) -> dict | list:
    if sparse_threshold is not None and M.size:
        nz = np.argwhere(M != 0.0)
        if len(nz) / M.size < sparse_threshold:
            return {
                "format": "sparse",
                "shape": list(M.shape),
                "triples": [[int(r), int(c), float(M[r, c])] for r, c in nz],
            }
    return [[float(v) for v in row] for row in M]


def _matrix_from_payload(payload) -> np.ndarray:
    if isinstance(payload, dict):
        if payload.get("format") != "sparse":
            raise SchemaError(f"unknown matrix format {payload.get('format')!r}")
        M = np.zeros(tuple(payload["shape"]), dtype=np.float64)
        for r, c, v in payload["triples"]:
            M[r, c] = v
        return M
    return np.array(payload, dtype=np.float64)


def save_kb(kb: ProximityKB, path, object_sparse_threshold: float = 0.25) -> None:
    """Serialize a KB; P_o switches to [row, col, value] triples when sparse."""
    payload = {
        "schema_version": KB_SCHEMA_VERSION,
        "type_vocabulary": kb.type_vocabulary,
        "object_vocabulary": kb.object_vocabulary,
        "P_r": _matrix_to_payload(kb.P_r, None),
        "P_o": _matrix_to_payload(kb.P_o, object_sparse_threshold),
        "top_objects": kb.top_objects,
        "provenance": kb.provenance,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True)
        fh.write("\n")


def load_kb(path) -> ProximityKB:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"KB file {path} is not valid JSON: {exc}") from exc
    if payload.get("schema_version") != KB_SCHEMA_VERSION:
        raise SchemaError(
            f"unsupported KB schema_version {payload.get('schema_version')!r}"
        )
    try:
        return ProximityKB(
            P_r=_matrix_from_payload(payload["P_r"]),
            P_o=_matrix_from_payload(payload["P_o"]),
            top_objects=[[int(o) for o in row] for row in payload["top_objects"]],
            type_vocabulary=[str(t) for t in payload["type_vocabulary"]],
            object_vocabulary=[str(t) for t in payload["object_vocabulary"]],
            provenance=payload.get("provenance", {}),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"malformed KB file: {exc}") from exc
