"""Ground-truth scene graphs: on-disk format, validation, region primitives.

A scene is an undirected weighted graph of typed nodes.  Each node sits in a
named region and carries object instances placed in one of 36 panoramic view
sectors.  Scenes are immutable after loading and safe to share across
workers.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from .errors import InvariantViolation, SchemaError

SCENE_SCHEMA_VERSION = 1
N_VIEWS = 36


@dataclass(frozen=True)
class ObjectInstance:
    object_id: str
    object_type: int
    view_index: int
    heading: float
    elevation: float


@dataclass(frozen=True)
class NodeRecord:
    node_id: str
    position: tuple[float, float, float]
    region_id: str
    node_type: int
    objects: tuple[ObjectInstance, ...] = ()


@dataclass(frozen=True)
class Region:
    region_id: str
    region_type: int
    member_nodes: frozenset[str]


@dataclass
class SceneGraph:
    scene_id: str
    nodes: list[NodeRecord]
    edges: list[tuple[str, str, float]]
    type_vocabulary: list[str]
    object_vocabulary: list[str]
    _index: dict[str, NodeRecord] = field(default_factory=dict, repr=False)
    _adjacency: dict[str, list[tuple[str, float]]] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self._index = {n.node_id: n for n in self.nodes}
        self._adjacency = {n.node_id: [] for n in self.nodes}
        for a, b, length in self.edges:
            if a in self._adjacency and b in self._adjacency:
                self._adjacency[a].append((b, length))
                self._adjacency[b].append((a, length))

    @property
    def n_types(self) -> int:
        return len(self.type_vocabulary)

    @property
    def n_object_types(self) -> int:
        return len(self.object_vocabulary)

    def node(self, node_id: str) -> NodeRecord:
        return self._index[node_id]

    def has_node(self, node_id: str) -> bool:
        return node_id in self._index

    def neighbors(self, node_id: str) -> list[tuple[str, float]]:
        """Neighbors of a node with edge lengths, in stored edge order."""
        return self._adjacency[node_id]

    def node_ids(self) -> list[str]:
        return [n.node_id for n in self.nodes]


def validate_scene(scene: SceneGraph) -> None:
    """Check every scene invariant, raising on the first violation."""
    seen_ids = set()
    for node in scene.nodes:
        if node.node_id in seen_ids:
            raise InvariantViolation(f"duplicate node id {node.node_id!r}")
        seen_ids.add(node.node_id)
    n_r, n_o = scene.n_types, scene.n_object_types
    for node in scene.nodes:
        if not all(math.isfinite(c) for c in node.position):
            raise InvariantViolation(f"node {node.node_id!r} has non-finite position")
        if not node.region_id:
            raise InvariantViolation(f"node {node.node_id!r} has empty region_id")
        if not 0 <= node.node_type < n_r:
            raise InvariantViolation(
                f"node {node.node_id!r} type {node.node_type} outside vocabulary of {n_r}"
            )
        obj_ids = set()
        for obj in node.objects:
            if obj.object_id in obj_ids:
                raise InvariantViolation(
                    f"duplicate object id {obj.object_id!r} at node {node.node_id!r}"
                )
            obj_ids.add(obj.object_id)
            if not 0 <= obj.object_type < n_o:
                raise InvariantViolation(
                    f"object {obj.object_id!r} type {obj.object_type} outside vocabulary of {n_o}"
                )
            if not 0 <= obj.view_index < N_VIEWS:
                raise InvariantViolation(
                    f"object {obj.object_id!r} view_index {obj.view_index} outside [0, {N_VIEWS - 1}]"
                )
    seen_edges = set()
    for a, b, length in scene.edges:
        if a not in seen_ids:
            raise InvariantViolation(f"edge endpoint {a!r} names no node")
        if b not in seen_ids:
            raise InvariantViolation(f"edge endpoint {b!r} names no node")
        if a == b:
            raise InvariantViolation(f"self-loop edge at {a!r}")
        key = (a, b) if a < b else (b, a)
        if key in seen_edges:
            raise InvariantViolation(f"edge {key} stored more than once")
        seen_edges.add(key)
        if not (math.isfinite(length) and length > 0):
            raise InvariantViolation(f"edge {key} has non-positive length {length}")
    if scene.nodes and not _is_connected(scene):
        raise InvariantViolation("scene graph is not connected")


def _is_connected(scene: SceneGraph) -> bool:
    start = scene.nodes[0].node_id
    seen = {start}
    stack = [start]
    while stack:
        for nbr, _ in scene.neighbors(stack.pop()):
            if nbr not in seen:
                seen.add(nbr)
                stack.append(nbr)
    return len(seen) == len(scene.nodes)


def _scene_from_payload(payload: dict) -> SceneGraph:
    if not isinstance(payload, dict):
        raise SchemaError("scene file must contain a JSON object")
    version = payload.get("schema_version")
    if version != SCENE_SCHEMA_VERSION:
        raise SchemaError(f"unsupported scene schema_version {version!r}")
    try:
        nodes = []
        for raw in payload["nodes"]:
            objects = tuple(
                ObjectInstance(
                    object_id=str(o["id"]),
                    object_type=int(o["type"]),
                    view_index=int(o["view"]),
                    heading=float(o["heading"]),
                    elevation=float(o["elevation"]),
                )
                for o in raw.get("objects", [])
            )
            nodes.append(
                NodeRecord(
                    node_id=str(raw["id"]),
                    position=tuple(float(c) for c in raw["pos"]),
                    region_id=str(raw["region"]),
                    node_type=int(raw["type"]),
                    objects=objects,
                )
            )
        edges = [(str(a), str(b), float(length)) for a, b, length in payload["edges"]]
        scene = SceneGraph(
            scene_id=str(payload["scene_id"]),
            nodes=nodes,
            edges=edges,
            type_vocabulary=[str(t) for t in payload["type_vocabulary"]],
            object_vocabulary=[str(t) for t in payload["object_vocabulary"]],
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"malformed scene file: {exc}") from exc
    for node in scene.nodes:
        if len(node.position) != 3:
            raise SchemaError(f"node {node.node_id!r} position must have 3 coordinates")
    validate_scene(scene)
    return scene


def load_scene(path) -> SceneGraph:
    """Load and validate a scene file."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"scene file {path} is not valid JSON: {exc}") from exc
    return _scene_from_payload(payload)


def _round9(x: float) -> float:
    # canonical form: at most 9 significant digits
    return float(f"{x:.9g}")


def scene_to_payload(scene: SceneGraph) -> dict:
    return {
        "schema_version": SCENE_SCHEMA_VERSION,
        "scene_id": scene.scene_id,
        "type_vocabulary": list(scene.type_vocabulary),
        "object_vocabulary": list(scene.object_vocabulary),
        "nodes": [
            {
                "id": n.node_id,
                "pos": [_round9(c) for c in n.position],
                "region": n.region_id,
                "type": n.node_type,
                "objects": [
                    {
                        "id": o.object_id,
                        "type": o.object_type,
                        "view": o.view_index,
                        "heading": _round9(o.heading),
                        "elevation": _round9(o.elevation),
                    }
                    for o in n.objects
                ],
            }
            for n in scene.nodes
        ],
        "edges": [[a, b, _round9(length)] for a, b, length in scene.edges],
    }


def save_scene(scene: SceneGraph, path) -> None:
    """Write a scene in canonical form: sorted keys, arrays in input order."""
    text = json.dumps(scene_to_payload(scene), sort_keys=True, indent=1)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text + "\n")


def segment_regions(scene: SceneGraph) -> list[Region]:
    """Group nodes by region_id, splitting disconnected groups per component.

    A region whose members are disconnected in the induced subgraph becomes
    one Region per connected component; split regions get a "#k" suffix with
    components ordered by smallest member node id.
    """
    by_region: dict[str, list[NodeRecord]] = {}
    for node in scene.nodes:
        by_region.setdefault(node.region_id, []).append(node)

    regions = []
    for region_id in sorted(by_region):
        members = by_region[region_id]
        member_ids = {n.node_id for n in members}
        components = _connected_components(scene, member_ids)
        components.sort(key=min)
        split = len(components) > 1
        for k, comp in enumerate(components):
            rid = f"{region_id}#{k}" if split else region_id
            regions.append(
                Region(
                    region_id=rid,
                    region_type=_majority_type(scene, comp),
                    member_nodes=frozenset(comp),
                )
            )
    return regions


def _connected_components(scene: SceneGraph, member_ids: set[str]) -> list[set[str]]:
    remaining = set(member_ids)
    components = []
    while remaining:
        start = min(remaining)
        comp = {start}
        stack = [start]
        while stack:
            for nbr, _ in scene.neighbors(stack.pop()):
                if nbr in remaining and nbr not in comp:
                    comp.add(nbr)
                    stack.append(nbr)
        remaining -= comp
        components.append(comp)
    return components


def _majority_type(scene: SceneGraph, member_ids: set[str]) -> int:
    counts: dict[int, int] = {}
    for node_id in member_ids:
        t = scene.node(node_id).node_type
        counts[t] = counts.get(t, 0) + 1
    best = max(counts.values())
    return min(t for t, c in counts.items() if c == best)


def region_adjacency(scene: SceneGraph, regions: list[Region]) -> set[tuple[str, str]]:
    """Unordered region-id pairs joined by at least one scene edge.

    Parallel edges between the same pair count once; the relation is
    symmetric and irreflexive.
    """
    region_of = {}
    for region in regions:
        for node_id in region.member_nodes:
            region_of[node_id] = region.region_id
    pairs = set()
    for a, b, _ in scene.edges:
        ra, rb = region_of[a], region_of[b]
        if ra != rb:
            pairs.add((ra, rb) if ra < rb else (rb, ra))
    return pairs


def geodesic_distances(scene: SceneGraph, source: str) -> dict[str, float]:
    """Exact shortest-path distances (meters) from source to every node."""
    order = scene.node_ids()
    idx = {nid: i for i, nid in enumerate(order)}
    rows, cols, vals = [], [], []
    for a, b, length in scene.edges:
        rows += [idx[a], idx[b]]
        cols += [idx[b], idx[a]]
        vals += [length, length]
    n = len(order)
    graph = csr_matrix((vals, (rows, cols)), shape=(n, n))
    dist = dijkstra(graph, directed=False, indices=idx[source])
    return {nid: float(dist[i]) for i, nid in enumerate(order)}


def hop_distances(scene: SceneGraph, source: str) -> dict[str, int]:
    """Unweighted hop counts from source via breadth-first search."""
    dist = {source: 0}
    frontier = [source]
    while frontier:
        nxt = []
        for nid in frontier:
            for nbr, _ in scene.neighbors(nid):
                if nbr not in dist:
                    dist[nbr] = dist[nid] + 1
                    nxt.append(nbr)
        frontier = nxt
    return dist
