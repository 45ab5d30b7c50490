"""Procedural scene generation and episode sampling.

Houses are grown region-by-region: a spanning tree over region types is
sampled with probability proportional to the generator KB's proximity rows,
regions are laid out in disjoint planar cells with jittered nodes, and
objects are placed per node from type-conditioned weights.  Statistics of
the generated population therefore follow the generating KB, which lets the
KB builder be validated closed-loop.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import SchemaError
from .kb import ProximityKB
from .scene import (
    NodeRecord,
    ObjectInstance,
    SceneGraph,
    geodesic_distances,
    hop_distances,
    validate_scene,
)
from .seeding import derive_rng

_INTRA_SHORTCUT_P = 0.3


@dataclass
class GeneratorConfig:
    seed: int
    generator_kb: ProximityKB
    region_count: int = 8
    nodes_per_region: tuple[int, int] = (1, 3)
    extra_region_links: int = 1
    objects_per_node: tuple[int, int] = (1, 3)
    region_extent: float = 2.0
    cell_pitch: float | None = None
    unique_region_types: bool = True
    unique_objects_per_region: bool = False
    object_weights: np.ndarray | None = None

    def __post_init__(self):
        if self.region_count < 2:
            raise ValueError("region_count must be >= 2")
        for lo, hi in (self.nodes_per_region, self.objects_per_node):
            if lo > hi or lo < 0:
                raise ValueError("range fields must satisfy 0 <= min <= max")
        if self.nodes_per_region[0] < 1:
            raise ValueError("each region needs at least one node")


@dataclass(frozen=True)
class Episode:
    episode_id: str
    scene_id: str
    start_node: str
    target_node: str
    target_object: str
    shortest_length: float
    target_type: int


def _sample_region_types(config: GeneratorConfig, rng: np.random.Generator) -> tuple[list[int], list[tuple[int, int]]]:
    """Grow the region tree; returns per-region types and tree links."""
    P_r = config.generator_kb.P_r
    n_types = P_r.shape[0]
    if config.unique_region_types and config.region_count > n_types:
        raise ValueError(
            f"config infeasible: {config.region_count} unique regions exceed "
            f"{n_types} region types"
        )
    types = [int(rng.integers(n_types))]
    links: list[tuple[int, int]] = []
    while len(types) < config.region_count:
        candidates = []
        weights = []
        for ri, rt in enumerate(types):
            for t in range(n_types):
                if config.unique_region_types and t in types:
                    continue
                w = float(P_r[rt, t])
                if w > 0:
                    candidates.append((ri, t))
                    weights.append(w)
        if not candidates:
            raise ValueError(
                "config infeasible: no positive-probability region type can extend the tree"
            )
        probs = np.array(weights) / sum(weights)
        pick = int(rng.choice(len(candidates), p=probs))
        parent, new_type = candidates[pick]
        links.append((parent, len(types)))
        types.append(new_type)

    # optional extra links between already-placed regions
    linked = {tuple(sorted(l)) for l in links}
    extra_candidates = []
    extra_weights = []
    for a in range(len(types)):
        for b in range(a + 1, len(types)):
            if (a, b) in linked:
                continue
            w = float(P_r[types[a], types[b]])
            if w > 0:
                extra_candidates.append((a, b))
                extra_weights.append(w)
    for _ in range(min(config.extra_region_links, len(extra_candidates))):
        probs = np.array(extra_weights) / sum(extra_weights)
        pick = int(rng.choice(len(extra_candidates), p=probs))
        links.append(extra_candidates[pick])
        del extra_candidates[pick]
        del extra_weights[pick]
    return types, links


def _object_type_weights(config: GeneratorConfig, node_type: int, n_objects: int) -> np.ndarray:
    if config.object_weights is not None:
        row = np.asarray(config.object_weights[node_type], dtype=np.float64)
        if row.sum() > 0:
            return row / row.sum()
    return np.full(n_objects, 1.0 / n_objects)


def generate_scene(config: GeneratorConfig, scene_id: str | None = None) -> SceneGraph:
    """Generate one scene, deterministic in the config seed."""
    rng = derive_rng(config.seed, "generate-scene")
    kb = config.generator_kb
    n_objects = len(kb.object_vocabulary)
    region_types, region_links = _sample_region_types(config, rng)

    cols = math.ceil(math.sqrt(len(region_types)))
    pitch = config.cell_pitch if config.cell_pitch is not None else 3.0 * config.region_extent

    nodes: list[NodeRecord] = []
    edges: list[tuple[str, str, float]] = []
    region_nodes: list[list[str]] = []
    positions: dict[str, tuple[float, float, float]] = {}

    lo, hi = config.nodes_per_region
    for ri, rtype in enumerate(region_types):
        origin = ((ri % cols) * pitch, (ri // cols) * pitch)
        count = int(rng.integers(lo, hi + 1))
        ids = []
        used_in_region: set[int] = set()
        for j in range(count):
            node_id = f"r{ri:02d}n{j}"
            pos = (
                origin[0] + float(rng.uniform(0, config.region_extent)),
                origin[1] + float(rng.uniform(0, config.region_extent)),
                0.0,
            )
            positions[node_id] = pos
            ids.append(node_id)

            obj_count = int(rng.integers(config.objects_per_node[0], config.objects_per_node[1] + 1))
            weights = _object_type_weights(config, rtype, n_objects)
            if config.unique_objects_per_region and used_in_region:
                weights = weights.copy()
                weights[list(used_in_region)] = 0.0
                if weights.sum() > 0:
                    weights = weights / weights.sum()
            available = int(np.count_nonzero(weights))
            obj_count = min(obj_count, available)
            chosen = rng.choice(n_objects, size=obj_count, replace=False, p=weights) if obj_count else []
            used_in_region.update(int(t) for t in chosen)
            # objects cluster in view sectors, so view-level co-occurrence
            # counts have signal
            views_here: list[int] = []
            objects = []
            for k, ot in enumerate(chosen):
                if views_here and rng.uniform() < 0.5:
                    view = views_here[int(rng.integers(len(views_here)))]
                else:
                    view = int(rng.integers(36))
                views_here.append(view)
                objects.append(
                    ObjectInstance(
                        object_id=f"{node_id}-o{k}",
                        object_type=int(ot),
                        view_index=view,
                        heading=float(rng.uniform(-math.pi, math.pi)),
                        elevation=float(rng.uniform(-0.5, 0.5)),
                    )
                )
            objects = tuple(objects)
            nodes.append(
                NodeRecord(
                    node_id=node_id,
                    position=pos,
                    region_id=f"reg{ri:02d}",
                    node_type=rtype,
                    objects=objects,
                )
            )
        region_nodes.append(ids)

        # random spanning tree over the region's nodes, plus shortcuts
        tree_pairs = set()
        for j in range(1, count):
            anchor = ids[int(rng.integers(j))]
            edges.append((anchor, ids[j], _dist(positions, anchor, ids[j])))
            tree_pairs.add(tuple(sorted((anchor, ids[j]))))
        for a in range(count):
            for b in range(a + 1, count):
                if tuple(sorted((ids[a], ids[b]))) in tree_pairs:
                    continue
                if rng.uniform() < _INTRA_SHORTCUT_P:
                    edges.append((ids[a], ids[b], _dist(positions, ids[a], ids[b])))

    for ra, rb in region_links:
        a = region_nodes[ra][int(rng.integers(len(region_nodes[ra])))]
        b = region_nodes[rb][int(rng.integers(len(region_nodes[rb])))]
        edges.append((a, b, _dist(positions, a, b)))

    scene = SceneGraph(
        scene_id=scene_id or f"synth-{config.seed}",
        nodes=nodes,
        edges=_dedupe_edges(edges),
        type_vocabulary=list(kb.type_vocabulary),
        object_vocabulary=list(kb.object_vocabulary),
    )
    validate_scene(scene)
    return scene


def _dist(positions, a: str, b: str) -> float:
    pa, pb = positions[a], positions[b]
    d = math.dist(pa, pb)
    return max(d, 1e-9)


def _dedupe_edges(edges):
    seen = set()
    out = []
    for a, b, length in edges:
        key = (a, b) if a < b else (b, a)
        if key not in seen:
            seen.add(key)
            out.append((a, b, length))
    return out


def sample_episode(scene: SceneGraph, seed, episode_id: str | None = None) -> Episode:
    """Sample one navigation episode, deterministic in (scene, seed).

    Start is uniform over nodes; the target is uniform over object-bearing
    nodes at hop distance >= 2 (relaxed to >= 1 when none qualify); the
    target object is uniform over the target node's instances.
    """
    if len(scene.nodes) < 2:
        raise ValueError("scene needs at least 2 nodes to sample an episode")
    object_nodes = [n.node_id for n in scene.nodes if n.objects]
    if not object_nodes:
        raise ValueError("scene has no node with objects")
    rng = derive_rng(seed, "episode", scene.scene_id)
    order = scene.node_ids()
    start = order[int(rng.integers(len(order)))]
    hops = hop_distances(scene, start)
    eligible = [nid for nid in object_nodes if hops.get(nid, 0) >= 2]
    if not eligible:
        eligible = [nid for nid in object_nodes if hops.get(nid, 0) >= 1]
    if not eligible:
        raise ValueError("no object-bearing node distinct from the start")
    target = eligible[int(rng.integers(len(eligible)))]
    target_record = scene.node(target)
    obj = target_record.objects[int(rng.integers(len(target_record.objects)))]
    shortest = geodesic_distances(scene, start)[target]
    return Episode(
        episode_id=episode_id or f"{scene.scene_id}-ep{seed}",
        scene_id=scene.scene_id,
        start_node=start,
        target_node=target,
        target_object=obj.object_id,
        shortest_length=shortest,
        target_type=target_record.node_type,
    )


def sample_episodes(scene: SceneGraph, count: int, seed) -> list[Episode]:
    return [
        sample_episode(scene, (seed, k), episode_id=f"{scene.scene_id}-ep{k}")
        for k in range(count)
    ]


def episode_to_payload(episode: Episode) -> dict:
    return {
        "episode_id": episode.episode_id,
        "scene_id": episode.scene_id,
        "start_node": episode.start_node,
        "target_node": episode.target_node,
        "target_object": episode.target_object,
        "shortest_length": episode.shortest_length,
        "target_type": episode.target_type,
    }


def save_episodes(episodes: list[Episode], path) -> None:
    """Manifest format: a JSON array of episode records."""
    with open(path, "w", encoding="utf-8") as fh:
        json.dump([episode_to_payload(e) for e in episodes], fh, sort_keys=True)
        fh.write("\n")


def load_episodes(path) -> list[Episode]:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"episode manifest {path} is not valid JSON: {exc}") from exc
    if not isinstance(payload, list):
        raise SchemaError("episode manifest must be a JSON array of episode records")
    try:
        return [
            Episode(
                episode_id=str(e["episode_id"]),
                scene_id=str(e["scene_id"]),
                start_node=str(e["start_node"]),
                target_node=str(e["target_node"]),
                target_object=str(e["target_object"]),
                shortest_length=float(e["shortest_length"]),
                target_type=int(e["target_type"]),
            )
            for e in payload
        ]
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"malformed episode manifest: {exc}") from exc
