"""Command-line entry point.

Subcommands cover the full pipeline: build-kb, gen-scenes, gen-episodes,
run, eval, ablate.  Exit codes: 0 success, 2 usage error, 3 input/schema
error, 4 internal invariant failure.  HSPR_LOG={error,info,debug} controls
logging.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from .bench import house_generator_kb, standard_benchmark
from .errors import InternalError, SchemaError
from .fusion import FUSION_MODES, parse_beta_policy
from .kb import (
    CountMatrices,
    accumulate_scene,
    build_kb,
    load_kb,
    save_kb,
)
from .metrics import (
    aggregate_report,
    episode_metrics,
    format_report_table,
    save_report,
)
from .perception import ConfusionModel, VisualWeights, load_confusion
from .reasoner import ReasonerConfig
from .scene import load_scene, save_scene
from .simulator import (
    POLICIES,
    AgentConfig,
    load_trajectories,
    run_batch,
    save_trajectories,
)
from .synth import GeneratorConfig, generate_scene, load_episodes, sample_episodes, save_episodes

log = logging.getLogger("hspr")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INPUT = 3
EXIT_INTERNAL = 4


def _setup_logging() -> None:
    level = os.environ.get("HSPR_LOG", "error").lower()
    levels = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}
    if level not in levels:
        raise SchemaError(f"HSPR_LOG must be one of {sorted(levels)}, got {level!r}")
    logging.basicConfig(level=levels[level], format="%(levelname)s %(name)s: %(message)s")


def _parse_pair(text: str, name: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise SchemaError(f"{name} expects two comma-separated values, got {text!r}")
    return float(parts[0]), float(parts[1])


def _parse_int_pair(text: str, name: str) -> tuple[int, int]:
    lo, hi = _parse_pair(text, name)
    return int(lo), int(hi)


def _load_scenes_dir(path: str) -> dict:
    scene_dir = Path(path)
    if not scene_dir.is_dir():
        raise SchemaError(f"scene directory {path!r} does not exist")
    scenes = {}
    files = sorted(scene_dir.glob("*.json"))
    if not files:
        raise SchemaError(f"no *.json scene files under {path!r}")
    for file in files:
        scene = load_scene(file)
        scenes[scene.scene_id] = scene
    return scenes


def _confusion_from_spec(spec: str, n_types: int) -> ConfusionModel:
    if spec == "identity":
        return ConfusionModel.identity(n_types)
    if spec.startswith("eps:"):
        return ConfusionModel.eps_uniform(n_types, float(spec[4:]))
    model = load_confusion(spec)
    if model.n_types != n_types:
        raise SchemaError(
            f"confusion matrix is {model.n_types}x{model.n_types}, scenes have {n_types} types"
        )
    return model


def _agent_from_args(args, n_types: int) -> AgentConfig:
    omega = None
    if args.omega:
        omega = tuple(float(w) for w in args.omega.split(","))
    return AgentConfig(
        confusion=_confusion_from_spec(args.confusion, n_types),
        reasoner=ReasonerConfig(
            gamma=args.gamma,
            max_steps=args.steps,
            beam=args.beam,
            feasibility_tau=args.tau,
            omega=omega,
        ),
        fusion_mode=args.fusion,
        beta_policy=parse_beta_policy(args.beta),
        object_noise=args.object_noise,
        visual=VisualWeights(*_parse_visual(args.visual)),
        max_actions=args.max_actions,
        stop_weights=_parse_pair(args.stop_weights, "--stop-weights"),
        seed=args.seed,
        eq11_literal=args.eq11_literal,
    )


def _parse_visual(text: str) -> tuple[float, float, float, float]:
    parts = text.split(",")
    if len(parts) != 4:
        raise SchemaError(
            f"--visual expects w_d,w_t,decay,noise_sd; got {text!r}"
        )
    return tuple(float(p) for p in parts)


def cmd_build_kb(args) -> int:
    scenes = _load_scenes_dir(args.scenes)
    first = next(iter(scenes.values()))
    counts = CountMatrices.zeros(first.n_types, first.n_object_types)
    for scene_id in sorted(scenes):
        accumulate_scene(counts, scenes[scene_id])
    kb = build_kb(
        counts,
        first.type_vocabulary,
        first.object_vocabulary,
        top_k=args.top_k,
        config={"scenes": len(scenes), "top_k": args.top_k},
    )
    save_kb(kb, args.out)
    print(f"built KB from {counts.scene_count} scenes -> {args.out}")
    return EXIT_OK


def cmd_gen_scenes(args) -> int:
    if args.kb == "house":
        kb, object_weights = house_generator_kb()
    else:
        kb, object_weights = load_kb(args.kb), None
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    from .seeding import stable_digest

    for i in range(args.n):
        config = GeneratorConfig(
            seed=stable_digest(args.seed, "scene", i),
            generator_kb=kb,
            region_count=args.regions,
            nodes_per_region=_parse_int_pair(args.nodes_per_region, "--nodes-per-region"),
            extra_region_links=args.extra_links,
            objects_per_node=_parse_int_pair(args.objects_per_node, "--objects-per-node"),
            region_extent=args.extent,
            unique_region_types=not args.repeat_types,
            unique_objects_per_region=args.kb == "house",
            object_weights=object_weights,
        )
        scene = generate_scene(config, scene_id=f"scene{i:04d}")
        save_scene(scene, out_dir / f"{scene.scene_id}.json")
    print(f"generated {args.n} scenes -> {out_dir}")
    return EXIT_OK


def cmd_gen_episodes(args) -> int:
    scenes = _load_scenes_dir(args.scenes)
    episodes = []
    for scene_id in sorted(scenes):
        episodes.extend(
            sample_episodes(scenes[scene_id], args.per_scene, (args.seed, scene_id))
        )
    save_episodes(episodes, args.out)
    print(f"sampled {len(episodes)} episodes -> {args.out}")
    return EXIT_OK


@dataclass(frozen=True)
class RunConfig:
    """Validated parameters of one `run` invocation."""

    scenes_dir: str
    kb_path: str
    episodes_path: str
    out_path: str
    policy: str
    seed: int
    parallelism: int
    trace: bool

    def validate(self) -> None:
        if not Path(self.scenes_dir).is_dir():
            raise SchemaError(f"scene directory {self.scenes_dir!r} does not exist")
        for label, path in (("KB", self.kb_path), ("episode manifest", self.episodes_path)):
            if not Path(path).is_file():
                raise SchemaError(f"{label} file {path!r} does not exist")
        if self.parallelism < 1:
            raise SchemaError("--parallel must be >= 1")


def cmd_run(args) -> int:
    config = RunConfig(
        scenes_dir=args.scenes,
        kb_path=args.kb,
        episodes_path=args.episodes,
        out_path=args.out,
        policy=args.policy,
        seed=args.seed,
        parallelism=args.parallel,
        trace=args.trace,
    )
    config.validate()
    scenes = _load_scenes_dir(config.scenes_dir)
    kb = load_kb(config.kb_path)
    episodes = load_episodes(config.episodes_path)
    first = next(iter(scenes.values()))
    agent = _agent_from_args(args, first.n_types)
    result = run_batch(
        scenes, episodes, kb, agent, config.policy,
        parallelism=config.parallelism, trace=config.trace,
    )
    save_trajectories(result.trajectories, config.out_path)
    for episode_id, error in sorted(result.failures.items()):
        print(f"episode {episode_id} failed: {error}", file=sys.stderr)
    print(
        f"ran {len(result.trajectories)} episodes "
        f"({len(result.failures)} failed) -> {args.out}"
    )
    return EXIT_OK if not result.failures else EXIT_INPUT


def cmd_eval(args) -> int:
    scenes = _load_scenes_dir(args.scenes)
    episodes = {e.episode_id: e for e in load_episodes(args.episodes)}
    trajectories = load_trajectories(args.traj)
    metrics = []
    for traj in sorted(trajectories, key=lambda t: t.episode_id):
        episode = episodes.get(traj.episode_id)
        if episode is None:
            raise SchemaError(f"trajectory {traj.episode_id!r} has no episode in the manifest")
        scene = scenes.get(episode.scene_id)
        if scene is None:
            raise SchemaError(f"episode {episode.episode_id!r} names unknown scene {episode.scene_id!r}")
        metrics.append(
            episode_metrics(traj, episode, scene, threshold=args.threshold, ne_mode=args.ne)
        )
    report = aggregate_report(
        metrics,
        config={"threshold": args.threshold, "ne": args.ne, "episodes": len(metrics)},
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_report(report, out / "report.json", out / "report.txt")
    print(format_report_table([("run", report.aggregates)]), end="")
    return EXIT_OK


def _parse_sweep(spec: str) -> tuple[str, list]:
    key, _, values = spec.partition("=")
    if key == "steps":
        if ".." in values:
            lo, hi = values.split("..")
            return "steps", list(range(int(lo), int(hi) + 1))
        return "steps", [int(v) for v in values.split(",")]
    if key == "fusion":
        modes = values.split(",")
        for mode in modes:
            if mode not in FUSION_MODES:
                raise SchemaError(f"unknown fusion mode {mode!r}")
        return "fusion", modes
    raise SchemaError(f"unknown sweep {spec!r}; expected steps=A..B or fusion=a,b,c")


def cmd_ablate(args) -> int:
    key, values = _parse_sweep(args.sweep)
    scenes, episodes, kb = standard_benchmark(
        n_scenes=args.scenes_n, episodes_per_scene=args.episodes_per, seed=args.seed
    )
    n_types = len(kb.type_vocabulary)
    by_id = sorted(episodes, key=lambda e: e.episode_id)
    rows = []
    results = {}
    for value in values:
        agent = AgentConfig(
            confusion=_confusion_from_spec(args.confusion, n_types),
            reasoner=ReasonerConfig(max_steps=value if key == "steps" else 3),
            fusion_mode=value if key == "fusion" else "residual",
            visual=VisualWeights(noise_sd=args.visual_noise),
            seed=args.seed,
        )
        batch = run_batch(scenes, episodes, kb, agent, "hspr", parallelism=args.parallel)
        metrics = [
            episode_metrics(t, e, scenes[e.scene_id])
            for t, e in zip(batch.trajectories, by_id)
        ]
        aggregates = aggregate_report(metrics).aggregates
        rows.append((f"{key}={value}", aggregates))
        results[str(value)] = aggregates
        log.info("ablation %s=%s done", key, value)
    table = format_report_table(rows, label=key)
    print(table, end="")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "ablation.json", "w", encoding="utf-8") as fh:
            json.dump({"sweep": args.sweep, "results": results}, fh, sort_keys=True, indent=1)
            fh.write("\n")
        with open(out / "ablation.txt", "w", encoding="utf-8") as fh:
            fh.write(table)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hspr",
        description="Proximity-knowledge navigation: build KBs, simulate, evaluate.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-kb", help="accumulate scene statistics into a KB")
    p.add_argument("--scenes", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--top-k", type=int, default=10)
    p.set_defaults(func=cmd_build_kb)

    p = sub.add_parser("gen-scenes", help="generate synthetic scenes")
    p.add_argument("--kb", required=True, help="generator KB file, or 'house' for the built-in grammar")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--regions", type=int, default=10)
    p.add_argument("--nodes-per-region", default="1,2")
    p.add_argument("--extra-links", type=int, default=1)
    p.add_argument("--objects-per-node", default="1,2")
    p.add_argument("--extent", type=float, default=2.0)
    p.add_argument("--repeat-types", action="store_true", help="allow repeated region types")
    p.set_defaults(func=cmd_gen_scenes)

    p = sub.add_parser("gen-episodes", help="sample episodes over a scene directory")
    p.add_argument("--scenes", required=True)
    p.add_argument("--per-scene", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_episodes)

    p = sub.add_parser("run", help="run a batch of episodes")
    p.add_argument("--scenes", required=True)
    p.add_argument("--kb", required=True)
    p.add_argument("--episodes", required=True)
    p.add_argument("--policy", choices=POLICIES, default="hspr")
    p.add_argument("--fusion", choices=FUSION_MODES, default="residual")
    p.add_argument("--steps", type=int, default=3)
    p.add_argument("--gamma", type=float, default=0.9)
    p.add_argument("--beam", type=int, default=3)
    p.add_argument("--tau", type=float, default=0.5)
    p.add_argument("--omega", default=None, help="comma-separated per-step weights")
    p.add_argument("--beta", default="fixed:0.5")
    p.add_argument("--confusion", default="identity", help="identity | eps:<f> | file.json")
    p.add_argument("--object-noise", type=float, default=0.0)
    p.add_argument("--visual", default="0.3,1.5,10,0", help="w_d,w_t,decay,noise_sd")
    p.add_argument("--stop-weights", default="1.0,1.4")
    p.add_argument("--max-actions", type=int, default=15)
    p.add_argument("--eq11-literal", action="store_true")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--trace", action="store_true")
    p.add_argument("--parallel", type=int, default=1)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("eval", help="score trajectories against ground truth")
    p.add_argument("--scenes", required=True)
    p.add_argument("--episodes", required=True)
    p.add_argument("--traj", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--threshold", type=float, default=3.0)
    p.add_argument("--ne", choices=("geodesic", "euclidean"), default="geodesic")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("ablate", help="sweep reasoning steps or fusion modes on the benchmark")
    p.add_argument("--sweep", required=True, help="steps=1..5 or fusion=average,dynamic,residual")
    p.add_argument("--scenes-n", type=int, default=30)
    p.add_argument("--episodes-per", type=int, default=3)
    p.add_argument("--seed", type=int, default=20240811)
    p.add_argument("--confusion", default="eps:0.2")
    p.add_argument("--visual-noise", type=float, default=0.1)
    p.add_argument("--parallel", type=int, default=1)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_ablate)

    return parser


def dispatch(argv=None) -> int:
    try:
        _setup_logging()
        parser = build_parser()
        args = parser.parse_args(argv)
        return args.func(args)
    except (SchemaError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except InternalError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
