"""Proximity reasoning over node types.

Scores navigable nodes by how close their believed type is to the target
type through the proximity matrix, enumerates the top-K multi-hop type
paths toward the target, and turns the selected path into discounted
multi-step node scores.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .perception import TypeBelief


@dataclass(frozen=True)
class ReasonerConfig:
    gamma: float = 0.9
    max_steps: int = 3
    beam: int = 3
    feasibility_tau: float = 0.5
    omega: tuple[float, ...] | None = None

    def __post_init__(self):
        if not 0.0 < self.gamma <= 1.0:
            raise ValueError("gamma must be in (0, 1]")
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")
        if self.beam < 1:
            raise ValueError("beam must be >= 1")

    def weights(self) -> tuple[float, ...]:
        """Per-step weight coefficients, defaulting to all ones."""
        if self.omega is None:
            return (1.0,) * self.max_steps
        if len(self.omega) < self.max_steps:
            raise ValueError("omega must supply a weight per reasoning step")
        return tuple(self.omega)


@dataclass(frozen=True)
class TypePath:
    """A distinct-type sequence ending at the target type.

    confidence is the product of consecutive proximity entries; a
    single-type path (the target is directly in view) has confidence 1.
    """

    types: tuple[int, ...]
    confidence: float

    @property
    def first_type(self) -> int:
        return self.types[0]


def proximity_scores(
    beliefs: list[TypeBelief], P_r: np.ndarray, Y_r: np.ndarray
) -> dict[str, float]:
    """Bilinear proximity of each node's believed type to the target type.

    score_i = R_i . P_r . Y_r
    """
    Y_r = np.asarray(Y_r, dtype=np.float64)
    if P_r.shape[1] != Y_r.shape[0]:
        raise ValueError(
            f"proximity matrix columns ({P_r.shape[1]}) do not match target vector ({Y_r.shape[0]})"
        )
    pulled = P_r @ Y_r
    out = {}
    for belief in beliefs:
        if belief.R.shape[0] != P_r.shape[0]:
            raise ValueError(
                f"belief for {belief.node_id} has {belief.R.shape[0]} types, matrix has {P_r.shape[0]}"
            )
        out[belief.node_id] = float(belief.R @ pulled)
    return out


def object_proximity_scores(
    obj_belief, P_o: np.ndarray, Y_o: np.ndarray
) -> dict[str, float]:
    """Same bilinear form over object types, one score per object instance."""
    Y_o = np.asarray(Y_o, dtype=np.float64)
    if P_o.shape[1] != Y_o.shape[0]:
        raise ValueError(
            f"object matrix columns ({P_o.shape[1]}) do not match target vector ({Y_o.shape[0]})"
        )
    pulled = P_o @ Y_o
    out = {}
    for object_id, O in obj_belief.probs.items():
        if O.shape[0] != P_o.shape[0]:
            raise ValueError(
                f"object belief {object_id} has {O.shape[0]} types, matrix has {P_o.shape[0]}"
            )
        out[object_id] = float(O @ pulled)
    return out


def present_types_from_beliefs(
    beliefs: list[TypeBelief], tau: float
) -> set[int]:
    """Types some navigable node believes in with mass >= tau."""
    present = set()
    for belief in beliefs:
        present.update(int(t) for t in np.nonzero(belief.R >= tau)[0])
    return present


def enumerate_type_paths(
    present_types: set[int],
    target_type: int,
    P_r: np.ndarray,
    config: ReasonerConfig,
) -> list[TypePath]:
    """Top-K type paths from a currently visible type to the target.

    Paths are distinct-type sequences (s_1, ..., target) with at most
    max_steps types, s_1 visible now, and every transition nonzero in P_r
    (zero entries prune the branch).  Ranked by confidence descending, then
    shorter path, then lexicographic type order.
    """
    n = P_r.shape[0]
    if not 0 <= target_type < n:
        raise ValueError(f"target type {target_type} outside vocabulary of {n}")
    found: list[TypePath] = []

    def extend(seq: list[int], conf: float) -> None:
        if seq[-1] == target_type:
            found.append(TypePath(types=tuple(seq), confidence=conf))
            return
        if len(seq) == config.max_steps:
            return
        for t in range(n):
            if t in seq:
                continue
            p = float(P_r[seq[-1], t])
            if p == 0.0:
                continue
            seq.append(t)
            extend(seq, conf * p)
            seq.pop()

    for s1 in sorted(present_types):
        if not 0 <= s1 < n:
            raise ValueError(f"present type {s1} outside vocabulary of {n}")
        extend([s1], 1.0)

    found.sort(key=lambda p: (-p.confidence, len(p.types), p.types))
    return found[: config.beam]


def select_path(
    paths: list[TypePath],
    beliefs: list[TypeBelief],
    tau: float,
) -> tuple[TypePath, int] | None:
    """First feasible path in confidence order, with its sub-goal type.

    A path is feasible when some navigable node holds belief mass >= tau at
    the path's first type.  Returns None when no path is feasible (the
    caller falls back to direct proximity scores).  Re-invoked every step so
    the chosen path tracks the growing map.
    """
    for path in paths:
        s1 = path.first_type
        if any(float(b.R[s1]) >= tau for b in beliefs):
            return path, s1
    return None


def multi_step_scores(
    beliefs: list[TypeBelief],
    path: TypePath,
    P_r: np.ndarray,
    config: ReasonerConfig,
) -> dict[str, float]:
    """Discounted sum of proximity scores toward each sub-goal on the path.

    score_i = sum_j gamma^(j-1) * omega_j * (R_i . P_r . onehot(s_j)).
    For a single-type path this reduces exactly to the direct proximity
    score against a one-hot target.
    """
    if not path.types:
        raise ValueError("selected path is empty")
    omega = config.weights()
    if len(path.types) > len(omega):
        raise ValueError("path longer than configured weight list")
    n = P_r.shape[1]
    totals = {b.node_id: 0.0 for b in beliefs}
    for j, sub_goal in enumerate(path.types):
        onehot = np.zeros(n)
        onehot[sub_goal] = 1.0
        term = proximity_scores(beliefs, P_r, onehot)
        factor = config.gamma**j * omega[j]
        for node_id, value in term.items():
            totals[node_id] += factor * value
    return totals
