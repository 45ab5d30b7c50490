"""Proximity-knowledge navigation: scene graphs, KBs, reasoning, simulation."""

from .scene import (
    SceneGraph,
    NodeRecord,
    ObjectInstance,
    Region,
    load_scene,
    save_scene,
    segment_regions,
    region_adjacency,
)
from .kb import (
    CountMatrices,
    ProximityKB,
    accumulate_scene,
    merge_counts,
    normalize_counts,
    top_k_objects,
    build_kb,
    save_kb,
    load_kb,
)
from .synth import Episode, GeneratorConfig, generate_scene, sample_episode, sample_episodes
from .perception import (
    ConfusionModel,
    TargetSpec,
    TypeBelief,
    ObjectBelief,
    VisualWeights,
    perceive_node_types,
    target_spec_from_episode,
    visual_score_stub,
    node_classification_loss,
)
from .topo import SemanticTopoMap, RoutingTable
from .reasoner import (
    ReasonerConfig,
    TypePath,
    proximity_scores,
    object_proximity_scores,
    enumerate_type_paths,
    select_path,
    multi_step_scores,
)
from .fusion import (
    STOP,
    ActionScoreTable,
    compose_scores,
    balance_factor,
    fuse_final,
    fuse_variant_table,
    variant_fusion,
    FixedBeta,
    VisitedFractionBeta,
    LogisticBeta,
    parse_beta_policy,
)
from .simulator import AgentConfig, Trajectory, run_episode, run_batch, stop_score, ground_object
from .metrics import EpisodeMetrics, EvalReport, episode_metrics, aggregate_report

__version__ = "0.1.0"
