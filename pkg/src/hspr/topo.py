"""The agent's semantic topological map.

Grows incrementally as nodes are physically visited: arriving at a node
makes it current, reveals its true neighbors as navigable, and refreshes
type beliefs.  Route planning runs Floyd-Warshall over the known graph.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InternalError
from .perception import TypeBelief
from .scene import SceneGraph

CURRENT = "current"
VISITED = "visited"
NAVIGABLE = "navigable"


@dataclass
class MapNode:
    node_id: str
    status: str
    position: tuple[float, float, float]
    belief: TypeBelief


@dataclass
class RoutingTable:
    """All-pairs shortest distances and first-hop successors over known nodes."""

    order: list[str]
    index: dict[str, int]
    dist: np.ndarray
    next_hop: np.ndarray

    def distance(self, a: str, b: str) -> float:
        return float(self.dist[self.index[a], self.index[b]])

    def first_hop(self, a: str, b: str) -> str | None:
        hop = self.next_hop[self.index[a], self.index[b]]
        return self.order[hop] if hop >= 0 else None


class SemanticTopoMap:
    """Known nodes with statuses, known edges, and the step counter."""

    def __init__(self):
        self.nodes: dict[str, MapNode] = {}
        self.edges: dict[tuple[str, str], float] = {}
        self.step = 0
        self.current: str | None = None

    def _edge_key(self, a: str, b: str) -> tuple[str, str]:
        return (a, b) if a < b else (b, a)

    def has_edge(self, a: str, b: str) -> bool:
        return self._edge_key(a, b) in self.edges

    def neighbors(self, node_id: str) -> list[tuple[str, float]]:
        out = []
        for (a, b), length in self.edges.items():
            if a == node_id:
                out.append((b, length))
            elif b == node_id:
                out.append((a, length))
        return out

    def visited_ids(self) -> set[str]:
        """Visited nodes; the current node counts as visited for set queries."""
        return {
            nid for nid, rec in self.nodes.items() if rec.status in (VISITED, CURRENT)
        }

    def navigable_ids(self) -> set[str]:
        return {nid for nid, rec in self.nodes.items() if rec.status == NAVIGABLE}

    def observe(self, scene: SceneGraph, arrived_node: str, belief_fn) -> None:
        """Arrive at a node: update statuses, reveal neighbors, refresh beliefs.

        belief_fn(node_record) -> TypeBelief supplies perception for the
        arrived node and each revealed neighbor.  Arrival is legal at the
        episode start (empty map) or at any already-known node; anything
        else is a teleport.
        """
        if self.nodes and arrived_node not in self.nodes:
            raise ValueError(
                f"cannot arrive at {arrived_node!r}: not a known node and not the start"
            )
        record = scene.node(arrived_node)
        if self.current is not None and self.current != arrived_node:
            self.nodes[self.current].status = VISITED
        arrived = self.nodes.get(arrived_node)
        if arrived is None:
            self.nodes[arrived_node] = MapNode(
                arrived_node, CURRENT, record.position, belief_fn(record)
            )
        else:
            arrived.status = CURRENT
            arrived.belief = belief_fn(record)
        self.current = arrived_node

        for nbr_id, length in sorted(scene.neighbors(arrived_node)):
            nbr_record = scene.node(nbr_id)
            known = self.nodes.get(nbr_id)
            if known is None:
                self.nodes[nbr_id] = MapNode(
                    nbr_id, NAVIGABLE, nbr_record.position, belief_fn(nbr_record)
                )
            else:
                known.belief = belief_fn(nbr_record)
            self.edges[self._edge_key(arrived_node, nbr_id)] = length
        self.step += 1

    def navigable_sets(self) -> tuple[set[str], set[str]]:
        """(local F, global C): all navigable nodes, and those adjacent to current."""
        if not self.nodes:
            raise ValueError("map is empty")
        C = self.navigable_ids()
        F = {
            nid
            for nid in C
            if self.current is not None and self.has_edge(self.current, nid)
        }
        return F, C

    def all_pairs_shortest_paths(self) -> RoutingTable:
        """Exact Floyd-Warshall distances + first-hop successors on known edges."""
        if not self.nodes:
            raise ValueError("map is empty")
        order = sorted(self.nodes)
        index = {nid: i for i, nid in enumerate(order)}
        n = len(order)
        dist = np.full((n, n), np.inf)
        np.fill_diagonal(dist, 0.0)
        next_hop = np.full((n, n), -1, dtype=np.int64)
        next_hop[np.arange(n), np.arange(n)] = np.arange(n)
        for (a, b), length in self.edges.items():
            i, j = index[a], index[b]
            if length < dist[i, j]:
                dist[i, j] = dist[j, i] = length
                next_hop[i, j] = j
                next_hop[j, i] = i
        for k in range(n):
            via = dist[:, k, None] + dist[None, k, :]
            better = via < dist
            if better.any():
                dist[better] = via[better]
                rows = np.nonzero(better.any(axis=1))[0]
                for i in rows:
                    cols = np.nonzero(better[i])[0]
                    next_hop[i, cols] = next_hop[i, k]
        return RoutingTable(order=order, index=index, dist=dist, next_hop=next_hop)

    def route_to(self, table: RoutingTable, goal: str) -> list[str]:
        """Node sequence current -> goal following first hops."""
        if self.current is None:
            raise ValueError("map has no current node")
        if goal not in self.nodes:
            raise ValueError(f"goal {goal!r} is not a known node")
        if not np.isfinite(table.distance(self.current, goal)):
            raise ValueError(f"goal {goal!r} is unreachable on the known map")
        path = [self.current]
        guard = len(self.nodes) + 1
        while path[-1] != goal:
            hop = table.first_hop(path[-1], goal)
            if hop is None or len(path) > guard:
                raise InternalError(f"broken next-hop chain toward {goal!r}")
            path.append(hop)
        return path

    def snapshot(self) -> dict:
        """JSON-friendly view of node statuses and belief argmaxes."""
        return {
            "step": self.step,
            "nodes": {
                nid: {
                    "status": rec.status,
                    "type_argmax": int(np.argmax(rec.belief.R)),
                }
                for nid, rec in sorted(self.nodes.items())
            },
            "edges": sorted(
                [a, b, length] for (a, b), length in self.edges.items()
            ),
        }
