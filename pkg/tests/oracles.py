"""Independent reference implementations used only by tests.

Everything here is written with plain loops and stdlib containers so it
shares no code path with the package.  Expected values in the test suite
are frozen from these oracles, not from the implementation under test.
"""

from __future__ import annotations

import heapq
from itertools import permutations


def percentile_minmax_row(row):
    """Clamp a row at its 95th percentile and min-max scale to [0, 0.95].

    Percentile: linear interpolation at rank 0.95*(n-1) over the sorted row.
    """
    values = sorted(float(v) for v in row)
    n = len(values)
    rank = 0.95 * (n - 1)
    lo_idx = int(rank)
    frac = rank - lo_idx
    if lo_idx + 1 < n:
        p95 = values[lo_idx] + frac * (values[lo_idx + 1] - values[lo_idx])
    else:
        p95 = values[lo_idx]
    clamped = [min(float(v), p95) for v in row]
    c_min = min(clamped)
    c_max = max(clamped)
    if c_max == c_min:
        return [0.0 for _ in clamped]
    return [0.95 * (v - c_min) / (c_max - c_min) for v in clamped]


def dijkstra_single_source(node_ids, edges, source):
    """Single-source shortest distances over an undirected weighted graph.

    edges: iterable of (a, b, length).  Returns {node_id: distance}, inf for
    unreachable nodes.
    """
    adjacency = {nid: [] for nid in node_ids}
    for a, b, length in edges:
        adjacency[a].append((b, length))
        adjacency[b].append((a, length))
    dist = {nid: float("inf") for nid in node_ids}
    dist[source] = 0.0
    heap = [(0.0, source)]
    while heap:
        d, nid = heapq.heappop(heap)
        if d > dist[nid]:
            continue
        for nbr, length in adjacency[nid]:
            nd = d + length
            if nd < dist[nbr]:
                dist[nbr] = nd
                heapq.heappush(heap, (nd, nbr))
    return dist


def connected_components_union_find(node_ids, edges):
    """Partition node_ids into components via union-find over edges."""
    parent = {nid: nid for nid in node_ids}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in edges:
        if a in parent and b in parent:
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[ra] = rb
    groups = {}
    for nid in node_ids:
        groups.setdefault(find(nid), set()).add(nid)
    return sorted(groups.values(), key=min)


def enumerate_paths_exhaustive(present_types, target_type, P_r, max_types, k):
    """All distinct-type sequences ending at target, ranked like the engine.

    Brute force over permutations: a sequence (s_1, ..., s_j) is valid when
    j <= max_types, s_1 is present, s_j == target, all entries distinct, and
    every consecutive transition has nonzero probability.  Confidence is the
    product of transition probabilities (1.0 for a single-type sequence).
    Ranking: confidence desc, then shorter, then lexicographic.
    """
    n = len(P_r)
    candidates = []
    for length in range(1, max_types + 1):
        for seq in permutations(range(n), length):
            if seq[-1] != target_type:
                continue
            if seq[0] not in present_types:
                continue
            conf = 1.0
            ok = True
            for a, b in zip(seq, seq[1:]):
                p = P_r[a][b]
                if p == 0:
                    ok = False
                    break
                conf *= p
            if ok:
                candidates.append((seq, conf))
    candidates.sort(key=lambda item: (-item[1], len(item[0]), item[0]))
    return candidates[:k]


def cross_entropy_sum(beliefs, truths):
    """Naive per-item -log loop; beliefs are probability vectors."""
    import math

    total = 0.0
    for vec, truth in zip(beliefs, truths):
        p = max(float(vec[truth]), 1e-12)
        total += -math.log(p)
    return total
