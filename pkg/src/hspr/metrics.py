"""Navigation evaluation: TL, NE, SR, OSR, SPL, RGS, RGSPL.

Navigation error defaults to geodesic (graph) distance because scenes are
graphs; a straight-line mode exists for comparison.  Success is strict:
NE < threshold.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

from .errors import InternalError
from .scene import SceneGraph, geodesic_distances
from .simulator import Trajectory
from .synth import Episode

SUCCESS_THRESHOLD_M = 3.0
REPORT_COLUMNS = ("TL", "NE", "OSR", "SR", "SPL", "RGS", "RGSPL")


@dataclass(frozen=True)
class EpisodeMetrics:
    episode_id: str
    tl: float
    ne: float
    success: bool
    oracle_success: bool
    spl: float
    rgs: bool
    rgspl: float


@dataclass
class EvalReport:
    episodes: list[EpisodeMetrics]
    aggregates: dict[str, float]
    config: dict


def episode_metrics(
    trajectory: Trajectory,
    episode: Episode,
    scene: SceneGraph,
    threshold: float = SUCCESS_THRESHOLD_M,
    ne_mode: str = "geodesic",
) -> EpisodeMetrics:
    """Score one executed episode against its ground truth."""
    if trajectory.episode_id != episode.episode_id:
        raise ValueError(
            f"trajectory {trajectory.episode_id!r} does not match episode {episode.episode_id!r}"
        )
    for node_id in trajectory.node_sequence + [trajectory.stop_node]:
        if not scene.has_node(node_id):
            raise ValueError(f"trajectory visits unknown node {node_id!r}")
    if ne_mode not in ("geodesic", "euclidean"):
        raise ValueError(f"unknown ne mode {ne_mode!r}")

    if ne_mode == "geodesic":
        dist_to_target = geodesic_distances(scene, episode.target_node)
        ne = dist_to_target[trajectory.stop_node]
        nearest = min(dist_to_target[nid] for nid in trajectory.node_sequence)
    else:
        tp = scene.node(episode.target_node).position
        ne = math.dist(scene.node(trajectory.stop_node).position, tp)
        nearest = min(
            math.dist(scene.node(nid).position, tp) for nid in trajectory.node_sequence
        )

    success = ne < threshold
    oracle_success = nearest < threshold
    L = episode.shortest_length
    tl = trajectory.total_length
    if L <= 0:
        raise InternalError(f"episode {episode.episode_id} has shortest_length {L}")
    spl = (L / max(L, tl)) if success else 0.0
    rgs = success and trajectory.selected_object == episode.target_object
    rgspl = (L / max(L, tl)) if rgs else 0.0
    return EpisodeMetrics(
        episode_id=episode.episode_id,
        tl=tl,
        ne=ne,
        success=success,
        oracle_success=oracle_success,
        spl=spl,
        rgs=rgs,
        rgspl=rgspl,
    )


def aggregate_report(metrics: list[EpisodeMetrics], config: dict | None = None) -> EvalReport:
    """Arithmetic means; rate metrics reported as percentages."""
    if not metrics:
        raise ValueError("cannot aggregate an empty metrics list")
    n = len(metrics)
    aggregates = {
        "episodes": n,
        "TL": sum(m.tl for m in metrics) / n,
        "NE": sum(m.ne for m in metrics) / n,
        "OSR": 100.0 * sum(m.oracle_success for m in metrics) / n,
        "SR": 100.0 * sum(m.success for m in metrics) / n,
        "SPL": 100.0 * sum(m.spl for m in metrics) / n,
        "RGS": 100.0 * sum(m.rgs for m in metrics) / n,
        "RGSPL": 100.0 * sum(m.rgspl for m in metrics) / n,
    }
    return EvalReport(episodes=metrics, aggregates=aggregates, config=dict(config or {}))


def report_to_payload(report: EvalReport) -> dict:
    return {
        "config": report.config,
        "aggregates": report.aggregates,
        "episodes": [
            {
                "episode_id": m.episode_id,
                "tl": m.tl,
                "ne": m.ne,
                "success": m.success,
                "oracle_success": m.oracle_success,
                "spl": m.spl,
                "rgs": m.rgs,
                "rgspl": m.rgspl,
            }
            for m in report.episodes
        ],
    }


def format_report_table(rows: list[tuple[str, dict]], label: str = "config") -> str:
    """Aligned text table; one row per (name, aggregates) pair."""
    header = [label, *REPORT_COLUMNS]
    body = []
    for name, agg in rows:
        body.append(
            [
                name,
                f"{agg['TL']:.2f}",
                f"{agg['NE']:.2f}",
                f"{agg['OSR']:.2f}",
                f"{agg['SR']:.2f}",
                f"{agg['SPL']:.2f}",
                f"{agg['RGS']:.2f}",
                f"{agg['RGSPL']:.2f}",
            ]
        )
    widths = [max(len(r[i]) for r in [header, *body]) for i in range(len(header))]
    lines = ["  ".join(h.ljust(w) for h, w in zip(header, widths)).rstrip()]
    lines.append("  ".join("-" * w for w in widths))
    for row in body:
        lines.append("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip())
    return "\n".join(lines) + "\n"


def save_report(report: EvalReport, json_path, text_path=None, name: str = "run") -> None:
    with open(json_path, "w", encoding="utf-8") as fh:
        json.dump(report_to_payload(report), fh, sort_keys=True, indent=1)
        fh.write("\n")
    if text_path is not None:
        with open(text_path, "w", encoding="utf-8") as fh:
            fh.write(format_report_table([(name, report.aggregates)]))
