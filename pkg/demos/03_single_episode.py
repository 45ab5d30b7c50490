"""Watch one episode's reasoning, step by step.

Runs the full agent on a single episode with tracing enabled and narrates
each decision: which type paths were considered, which sub-goal was chosen,
and how proximity + visual evidence fused into the action.
"""

from hspr.bench import standard_benchmark
from hspr.fusion import STOP
from hspr.metrics import episode_metrics
from hspr.perception import ConfusionModel, VisualWeights
from hspr.reasoner import ReasonerConfig
from hspr.simulator import AgentConfig, run_episode

scenes, episodes, kb = standard_benchmark(n_scenes=4, episodes_per_scene=3)
types = kb.type_vocabulary

# pick a long episode so the multi-step reasoning has something to do
episode = max(episodes, key=lambda e: e.shortest_length)
scene = scenes[episode.scene_id]
target = scene.node(episode.target_node)
print(f"episode {episode.episode_id}: start at {episode.start_node}, "
      f"target object {episode.target_object!r} in a {types[episode.target_type]} "
      f"({episode.shortest_length:.1f} m away)\n")

agent = AgentConfig(
    confusion=ConfusionModel.eps_uniform(len(types), 0.2),
    reasoner=ReasonerConfig(max_steps=3),
    visual=VisualWeights(noise_sd=0.1),
    seed=7,
)
trajectory = run_episode(scene, episode, kb, agent, "hspr", trace=True)

for step in trajectory.steps:
    here = scene.node(step["current"])
    print(f"step {step['step']}: standing in {here.region_id} ({types[here.node_type]})")
    if step["selected_path"]:
        chain = " -> ".join(types[t] for t in step["selected_path"])
        print(f"  plan: {chain}  (confidence {step['path_confidence']:.2f})")
    else:
        print("  plan: no feasible type path, falling back to direct proximity")
    ranked = sorted(step["l_final"].items(), key=lambda kv: -kv[1])[:3]
    shown = ", ".join(f"{nid}={score:.2f}" for nid, score in ranked)
    print(f"  top action scores: {shown}")
    if step["chosen"] == STOP:
        print("  -> stop here")
    else:
        print(f"  -> move to {step['chosen']}")

m = episode_metrics(trajectory, episode, scene)
print(f"\nstopped at {trajectory.stop_node}, grounded {trajectory.selected_object!r}")
print(f"TL={m.tl:.1f} m  NE={m.ne:.2f} m  success={m.success}  SPL={m.spl:.2f}  "
      f"grounding={'right' if m.rgs else 'wrong'}")
