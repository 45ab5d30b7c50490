"""Pluggable perception stand-ins.

Neural predictors are replaced by distributions with controllable fidelity:
a row-stochastic confusion model for node types, a noise-mixture for target
specs and object types, and a heuristic visual scorer.  Identity confusion
with zero noise reproduces ground truth exactly (the oracle configuration).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import SchemaError

CONFUSION_SCHEMA_VERSION = 1
_SUM_TOL = 1e-9


def _check_distribution(vec: np.ndarray, what: str) -> None:
    if np.any(vec < 0):
        raise ValueError(f"{what} has a negative entry")
    if abs(float(vec.sum()) - 1.0) > _SUM_TOL:
        raise ValueError(f"{what} does not sum to 1 (got {vec.sum()!r})")


@dataclass(eq=False)
class TargetSpec:
    """Believed target node type and target object type distributions."""

    Y_r: np.ndarray
    Y_o: np.ndarray

    def __post_init__(self):
        self.Y_r = np.asarray(self.Y_r, dtype=np.float64)
        self.Y_o = np.asarray(self.Y_o, dtype=np.float64)
        _check_distribution(self.Y_r, "target node-type distribution")
        _check_distribution(self.Y_o, "target object-type distribution")

    @property
    def target_type(self) -> int:
        return int(np.argmax(self.Y_r))


@dataclass(eq=False)
class TypeBelief:
    node_id: str
    R: np.ndarray

    def __post_init__(self):
        self.R = np.asarray(self.R, dtype=np.float64)
        _check_distribution(self.R, f"type belief for {self.node_id}")


@dataclass(eq=False)
class ObjectBelief:
    """Per object instance at a node, a distribution over object types."""

    node_id: str
    probs: dict[str, np.ndarray]


@dataclass(eq=False)
class ConfusionModel:
    """Row-stochastic confusion matrix over node types.

    distribution mode emits the confusion row itself as the belief; sampled
    mode draws a label from the row and emits a one-hot belief.
    """

    M: np.ndarray
    mode: str = "distribution"

    def __post_init__(self):
        self.M = np.asarray(self.M, dtype=np.float64)
        if self.mode not in ("distribution", "sampled"):
            raise ValueError(f"unknown confusion mode {self.mode!r}")
        if self.M.ndim != 2 or self.M.shape[0] != self.M.shape[1]:
            raise ValueError("confusion matrix must be square")
        if np.any(self.M < 0):
            raise ValueError("confusion matrix has a negative entry")
        sums = self.M.sum(axis=1)
        if np.any(np.abs(sums - 1.0) > _SUM_TOL):
            raise ValueError("confusion matrix rows must sum to 1")

    @property
    def n_types(self) -> int:
        return self.M.shape[0]

    def row(self, true_type: int, rng: np.random.Generator) -> np.ndarray:
        if self.mode == "distribution":
            return self.M[true_type].copy()
        label = int(rng.choice(self.n_types, p=self.M[true_type]))
        vec = np.zeros(self.n_types)
        vec[label] = 1.0
        return vec

    @classmethod
    def identity(cls, n_types: int, mode: str = "distribution") -> "ConfusionModel":
        return cls(np.eye(n_types), mode=mode)

    @classmethod
    def eps_uniform(cls, n_types: int, eps: float, mode: str = "distribution") -> "ConfusionModel":
        """Identity mixed with the uniform distribution at level eps."""
        if not 0.0 <= eps <= 1.0:
            raise ValueError("eps must be in [0, 1]")
        M = (1.0 - eps) * np.eye(n_types) + eps * np.full((n_types, n_types), 1.0 / n_types)
        return cls(M, mode=mode)


def save_confusion(model: ConfusionModel, path) -> None:
    payload = {
        "schema_version": CONFUSION_SCHEMA_VERSION,
        "mode": model.mode,
        "matrix": [[float(v) for v in row] for row in model.M],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True)
        fh.write("\n")


def load_confusion(path) -> ConfusionModel:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"confusion file {path} is not valid JSON: {exc}") from exc
    if payload.get("schema_version") != CONFUSION_SCHEMA_VERSION:
        raise SchemaError(
            f"unsupported confusion schema_version {payload.get('schema_version')!r}"
        )
    try:
        return ConfusionModel(
            np.array(payload["matrix"], dtype=np.float64),
            mode=payload.get("mode", "distribution"),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"malformed confusion file: {exc}") from exc


def perceive_node_types(
    true_types: list[tuple[str, int]],
    model: ConfusionModel,
    seed,
) -> list[TypeBelief]:
    """Type beliefs for a batch of nodes, deterministic in the seed."""
    rng = np.random.default_rng(seed) if not isinstance(seed, np.random.Generator) else seed
    return [TypeBelief(node_id, model.row(t, rng)) for node_id, t in true_types]


def target_spec_from_episode(episode, scene, model: ConfusionModel, object_noise: float, seed) -> TargetSpec:
    """Build the believed target spec for an episode.

    The node-type side passes the target's true type through the confusion
    model; the object-type side mixes a one-hot of the true object type with
    the uniform distribution at level object_noise.
    """
    if not 0.0 <= object_noise <= 1.0:
        raise ValueError("object_noise must be in [0, 1]")
    target = scene.node(episode.target_node)
    objects = {o.object_id: o for o in target.objects}
    if episode.target_object not in objects:
        raise ValueError(
            f"episode {episode.episode_id} target object {episode.target_object!r} "
            f"not found at node {episode.target_node!r}"
        )
    rng = np.random.default_rng(seed) if not isinstance(seed, np.random.Generator) else seed
    Y_r = model.row(target.node_type, rng)
    n_o = scene.n_object_types
    one_hot = np.zeros(n_o)
    one_hot[objects[episode.target_object].object_type] = 1.0
    Y_o = (1.0 - object_noise) * one_hot + object_noise * np.full(n_o, 1.0 / n_o)
    return TargetSpec(Y_r=Y_r, Y_o=Y_o)


def object_beliefs(node, n_object_types: int, object_noise: float) -> ObjectBelief:
    """Object-type distributions for each instance at a node.

    Same mixture scheme as the target spec: one-hot truth blended with
    uniform at level object_noise.
    """
    uniform = np.full(n_object_types, 1.0 / n_object_types)
    probs = {}
    for obj in node.objects:
        one_hot = np.zeros(n_object_types)
        one_hot[obj.object_type] = 1.0
        probs[obj.object_id] = (1.0 - object_noise) * one_hot + object_noise * uniform
    return ObjectBelief(node_id=node.node_id, probs=probs)


@dataclass(frozen=True)
class VisualWeights:
    """Heuristic visual score: distance decay + type alignment + noise."""

    w_d: float = 0.3
    w_t: float = 1.5
    decay: float = 10.0
    noise_sd: float = 0.0

    def __post_init__(self):
        if self.decay <= 0:
            raise ValueError("decay length must be positive")


def visual_score_table(
    view: list[tuple[str, float, TypeBelief]],
    target: TargetSpec,
    weights: VisualWeights,
    rng: np.random.Generator,
) -> dict[str, float]:
    """Score candidate nodes from (distance, belief) pairs.

    score = w_d * exp(-d / decay) + w_t * (R . Y_r) + N(0, noise_sd), with
    noise drawn in view order so a fixed seed replays exactly.
    """
    scores = {}
    for node_id, distance, belief in view:
        value = weights.w_d * float(np.exp(-distance / weights.decay))
        value += weights.w_t * float(belief.R @ target.Y_r)
        if weights.noise_sd > 0:
            value += float(rng.normal(0.0, weights.noise_sd))
        scores[node_id] = value
    return scores


def visual_score_stub(
    global_view: list[tuple[str, float, TypeBelief]],
    local_view: list[tuple[str, float, TypeBelief]],
    target: TargetSpec,
    weights: VisualWeights,
    seed,
) -> tuple[dict[str, float], dict[str, float]]:
    """Global and local visual score tables from one seed.

    The global view pairs each navigable node with its path distance from
    the current node; the local view pairs adjacent nodes with their edge
    lengths.  The two tables draw noise from separate substreams so either
    replays exactly on its own.
    """
    from .seeding import derive_rng

    eps_c = visual_score_table(global_view, target, weights, derive_rng(seed, "global"))
    eps_f = visual_score_table(local_view, target, weights, derive_rng(seed, "local"))
    return eps_c, eps_f


def node_classification_loss(beliefs: list[TypeBelief], truth: list[int]) -> float:
    """Sum of -log belief mass at the true type, clamped at 1e-12."""
    if len(beliefs) != len(truth):
        raise ValueError("beliefs and truth lists differ in length")
    total = 0.0
    for belief, t in zip(beliefs, truth):
        total += -float(np.log(max(float(belief.R[t]), 1e-12)))
    return total
