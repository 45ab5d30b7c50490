"""Episode execution.

Each decision step observes the current node, perceives navigable nodes,
replans the type path, scores candidates with proximity + visual evidence,
fuses, and either stops or routes to the chosen navigable node (observing
every hop on the way).  All randomness derives from (agent seed, episode id,
step), so batches replay identically under any parallelism.
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import SchemaError
from .fusion import (
    STOP,
    BetaPolicy,
    FixedBeta,
    balance_factor,
    fuse_variant_table,
)
from .kb import ProximityKB
from .perception import (
    ConfusionModel,
    ObjectBelief,
    TargetSpec,
    TypeBelief,
    VisualWeights,
    object_beliefs,
    target_spec_from_episode,
    visual_score_table,
)
from .reasoner import (
    ReasonerConfig,
    enumerate_type_paths,
    multi_step_scores,
    object_proximity_scores,
    present_types_from_beliefs,
    proximity_scores,
    select_path,
)
from .scene import SceneGraph
from .seeding import derive_rng
from .synth import Episode
from .topo import SemanticTopoMap

log = logging.getLogger("hspr")

POLICIES = ("hspr", "greedy_eta", "visual_only", "random")
TRAJECTORY_SCHEMA_VERSION = 1


@dataclass
class AgentConfig:
    confusion: ConfusionModel
    reasoner: ReasonerConfig = field(default_factory=ReasonerConfig)
    fusion_mode: str = "residual"
    beta_policy: BetaPolicy = field(default_factory=lambda: FixedBeta(0.5))
    object_noise: float = 0.0
    visual: VisualWeights = field(default_factory=VisualWeights)
    max_actions: int = 15
    stop_weights: tuple[float, float] = (1.0, 1.4)
    seed: int = 0
    eq11_literal: bool = False

    def __post_init__(self):
        if self.max_actions < 1:
            raise ValueError("max_actions must be >= 1")


@dataclass
class Trajectory:
    episode_id: str
    policy: str
    node_sequence: list[str]
    action_sequence: list[str]
    stop_node: str
    selected_object: str | None
    total_length: float
    steps: list[dict] | None = None


def stop_score(
    current_belief: TypeBelief,
    objects: ObjectBelief,
    target: TargetSpec,
    kb: ProximityKB,
    stop_weights: tuple[float, float],
) -> float:
    """Evidence that the agent is standing at the target.

    Type match of the current node plus the best object-proximity score over
    the node's instances; a node with no objects contributes zero there.
    """
    w_type, w_obj = stop_weights
    score = w_type * float(current_belief.R @ target.Y_r)
    if objects.probs:
        mu = object_proximity_scores(objects, kb.P_o, target.Y_o)
        score += w_obj * max(mu.values())
    return score


def ground_object(node_record, objects: ObjectBelief, P_o: np.ndarray, Y_o: np.ndarray) -> str | None:
    """Pick the object instance at the stop node with the highest proximity.

    Ties break toward the ascending object id; None when the node is bare.
    """
    if not node_record.objects:
        return None
    mu = object_proximity_scores(objects, P_o, Y_o)
    return min(mu, key=lambda oid: (-mu[oid], oid))


def _check_compatible(scene: SceneGraph, episode: Episode, kb: ProximityKB) -> None:
    if episode.scene_id != scene.scene_id:
        raise ValueError(
            f"episode {episode.episode_id} belongs to scene {episode.scene_id!r}, "
            f"got {scene.scene_id!r}"
        )
    if (
        kb.type_vocabulary != scene.type_vocabulary
        or kb.object_vocabulary != scene.object_vocabulary
    ):
        raise ValueError("KB vocabularies do not match the scene")


def run_episode(
    scene: SceneGraph,
    episode: Episode,
    kb: ProximityKB,
    agent: AgentConfig,
    policy: str = "hspr",
    trace: bool = False,
) -> Trajectory:
    """Execute one episode under the given policy."""
    if policy not in POLICIES:
        raise ValueError(f"unknown policy {policy!r}")
    _check_compatible(scene, episode, kb)

    ep = episode.episode_id
    target = target_spec_from_episode(
        episode, scene, agent.confusion, agent.object_noise,
        derive_rng(agent.seed, ep, "target"),
    )

    topo = SemanticTopoMap()
    obs_counter = 0

    def arrive(node_id: str) -> None:
        nonlocal obs_counter
        rng = derive_rng(agent.seed, ep, "perceive", obs_counter)
        obs_counter += 1
        topo.observe(
            scene, node_id, lambda rec: TypeBelief(rec.node_id, agent.confusion.row(rec.node_type, rng))
        )

    arrive(episode.start_node)
    node_sequence = [episode.start_node]
    action_sequence: list[str] = []
    total_length = 0.0
    stopped = False
    traces: list[dict] = [] if trace else None

    for decision_step in range(agent.max_actions):
        F, C = topo.navigable_sets()
        table = topo.all_pairs_shortest_paths()

        if policy == "random":
            options = sorted(F) + [STOP]
            rng = derive_rng(agent.seed, ep, "random", decision_step)
            chosen = options[int(rng.integers(len(options)))]
            step_trace = {"chosen": chosen} if trace else None
        else:
            chosen, step_trace = _scored_action(
                scene, kb, agent, policy, target, topo, table, F, C,
                decision_step, ep, trace,
            )
        if trace:
            traces.append(step_trace)

        if chosen == STOP:
            action_sequence.append(STOP)
            stopped = True
            break

        route = topo.route_to(table, chosen)
        for prev, nxt in zip(route, route[1:]):
            total_length += topo.edges[topo._edge_key(prev, nxt)]
            arrive(nxt)
            node_sequence.append(nxt)
        action_sequence.append(chosen)

    stop_node = topo.current
    objects = object_beliefs(scene.node(stop_node), scene.n_object_types, agent.object_noise)
    selected = ground_object(scene.node(stop_node), objects, kb.P_o, target.Y_o)
    log.debug(
        "episode %s policy %s: stop=%s actions=%d voluntary=%s",
        ep, policy, stop_node, len(action_sequence), stopped,
    )
    return Trajectory(
        episode_id=ep,
        policy=policy,
        node_sequence=node_sequence,
        action_sequence=action_sequence,
        stop_node=stop_node,
        selected_object=selected,
        total_length=total_length,
        steps=traces,
    )


def _scored_action(
    scene, kb, agent, policy, target, topo, table, F, C,
    decision_step, ep, trace,
):
    """One fused scoring round; returns (chosen action, optional trace)."""
    current = topo.current
    score_ids = sorted(C | topo.visited_ids()) if agent.fusion_mode == "dynamic" else sorted(C)
    beliefs = [topo.nodes[i].belief for i in score_ids]
    beliefs_C = [b for b in beliefs if b.node_id in C]

    selected_path = None
    paths = []
    if policy == "visual_only":
        eta_all = {i: 0.0 for i in score_ids}
    elif policy == "greedy_eta":
        eta_all = proximity_scores(beliefs, kb.P_r, target.Y_r)
    else:
        present = present_types_from_beliefs(beliefs_C, agent.reasoner.feasibility_tau)
        paths = enumerate_type_paths(present, target.target_type, kb.P_r, agent.reasoner)
        selected_path = select_path(paths, beliefs_C, agent.reasoner.feasibility_tau)
        if selected_path is None:
            eta_all = proximity_scores(beliefs, kb.P_r, target.Y_r)
        else:
            eta_all = multi_step_scores(beliefs, selected_path[0], kb.P_r, agent.reasoner)

    eta_c = {i: eta_all[i] for i in C}
    eta_f = {i: eta_all[i] for i in F}

    global_view = [(i, table.distance(current, i), topo.nodes[i].belief) for i in sorted(C)]
    local_view = [
        (i, topo.edges[topo._edge_key(current, i)], topo.nodes[i].belief) for i in sorted(F)
    ]
    eps_c = visual_score_table(
        global_view, target, agent.visual, derive_rng(agent.seed, ep, "visual-global", decision_step)
    )
    eps_f = visual_score_table(
        local_view, target, agent.visual, derive_rng(agent.seed, ep, "visual-local", decision_step)
    )

    visited_scores = None
    if agent.fusion_mode == "dynamic":
        visited = sorted(topo.visited_ids())
        visited_view = [(i, table.distance(current, i), topo.nodes[i].belief) for i in visited]
        eps_v = visual_score_table(
            visited_view, target, agent.visual,
            derive_rng(agent.seed, ep, "visual-visited", decision_step),
        )
        visited_scores = {i: eta_all[i] + eps_v[i] for i in visited}

    beta = balance_factor(agent.beta_policy, topo)
    scores = fuse_variant_table(
        agent.fusion_mode, eta_c, eta_f, eps_c, eps_f, F, C, beta,
        topo_map=topo, table=table, visited_scores=visited_scores,
        eq11_literal=agent.eq11_literal,
    )
    stop = stop_score(
        topo.nodes[current].belief,
        object_beliefs(scene.node(current), scene.n_object_types, agent.object_noise),
        target, kb, agent.stop_weights,
    )
    scores.l_c[STOP] = scores.l_f[STOP] = scores.l_final[STOP] = stop
    l_final = scores.l_final

    chosen = STOP
    best = l_final[STOP]
    for i in sorted(C):
        if l_final[i] > best:
            best = l_final[i]
            chosen = i

    step_trace = None
    if trace:
        step_trace = {
            "step": decision_step,
            "current": current,
            "beta": beta,
            "candidate_paths": [[list(p.types), p.confidence] for p in paths] if policy == "hspr" else None,
            "selected_path": list(selected_path[0].types) if selected_path else None,
            "path_confidence": selected_path[0].confidence if selected_path else None,
            "scores": {
                "eta_c": dict(sorted(scores.eta_c.items())),
                "eta_f": dict(sorted(scores.eta_f.items())),
                "epsilon_c": dict(sorted(scores.epsilon_c.items())),
                "epsilon_f": dict(sorted(scores.epsilon_f.items())),
                "l_c": dict(sorted(scores.l_c.items())),
                "l_f": dict(sorted(scores.l_f.items())),
            },
            "l_final": dict(sorted(l_final.items())),
            "chosen": chosen,
            "map": topo.snapshot(),
        }
    return chosen, step_trace


@dataclass
class BatchResult:
    trajectories: list[Trajectory]
    failures: dict[str, str]


def _run_one(args):
    scene, episode, kb, agent, policy, trace = args
    return run_episode(scene, episode, kb, agent, policy, trace)


def run_batch(
    scenes: dict[str, SceneGraph],
    episodes: list[Episode],
    kb: ProximityKB,
    agent: AgentConfig,
    policy: str = "hspr",
    parallelism: int = 1,
    trace: bool = False,
) -> BatchResult:
    """Run many episodes; results are sorted by episode id and independent
    of the worker count.  Per-episode errors are captured, not raised."""
    ordered = sorted(episodes, key=lambda e: e.episode_id)
    jobs = []
    failures: dict[str, str] = {}
    for episode in ordered:
        scene = scenes.get(episode.scene_id)
        if scene is None:
            failures[episode.episode_id] = f"unknown scene {episode.scene_id!r}"
            continue
        jobs.append((scene, episode, kb, agent, policy, trace))

    trajectories: list[Trajectory] = []
    if parallelism <= 1:
        for job in jobs:
            try:
                trajectories.append(_run_one(job))
            except Exception as exc:
                failures[job[1].episode_id] = str(exc)
                log.warning("episode %s failed: %s", job[1].episode_id, exc)
    else:
        with ProcessPoolExecutor(max_workers=parallelism) as pool:
            futures = [(job[1].episode_id, pool.submit(_run_one, job)) for job in jobs]
            for episode_id, future in futures:
                try:
                    trajectories.append(future.result())
                except Exception as exc:
                    failures[episode_id] = str(exc)
                    log.warning("episode %s failed: %s", episode_id, exc)
    trajectories.sort(key=lambda t: t.episode_id)
    log.info("batch complete: %d ok, %d failed", len(trajectories), len(failures))
    return BatchResult(trajectories=trajectories, failures=failures)


def trajectory_to_payload(traj: Trajectory) -> dict:
    payload = {
        "schema_version": TRAJECTORY_SCHEMA_VERSION,
        "episode_id": traj.episode_id,
        "policy": traj.policy,
        "node_sequence": traj.node_sequence,
        "action_sequence": traj.action_sequence,
        "stop_node": traj.stop_node,
        "selected_object": traj.selected_object,
        "total_length": traj.total_length,
    }
    if traj.steps is not None:
        payload["steps"] = traj.steps
    return payload


def trajectory_from_payload(payload: dict) -> Trajectory:
    try:
        return Trajectory(
            episode_id=str(payload["episode_id"]),
            policy=str(payload.get("policy", "hspr")),
            node_sequence=[str(n) for n in payload["node_sequence"]],
            action_sequence=[str(a) for a in payload["action_sequence"]],
            stop_node=str(payload["stop_node"]),
            selected_object=(
                None if payload["selected_object"] is None else str(payload["selected_object"])
            ),
            total_length=float(payload["total_length"]),
            steps=payload.get("steps"),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"malformed trajectory record: {exc}") from exc


def save_trajectories(trajectories: list[Trajectory], path) -> None:
    """JSON-lines, one trajectory per line."""
    with open(path, "w", encoding="utf-8") as fh:
        for traj in trajectories:
            fh.write(json.dumps(trajectory_to_payload(traj), sort_keys=True))
            fh.write("\n")


def load_trajectories(path) -> list[Trajectory]:
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                payload = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"{path}:{line_no} is not valid JSON: {exc}") from exc
            out.append(trajectory_from_payload(payload))
    return out
