import math

import numpy as np
import pytest
from scipy import stats

from hspr.bench import house_generator_kb, recovery_generator_kb
from hspr.scene import scene_to_payload, segment_regions, region_adjacency
from hspr.synth import (
    GeneratorConfig,
    generate_scene,
    load_episodes,
    sample_episode,
    sample_episodes,
    save_episodes,
)

from conftest import make_scene
from oracles import dijkstra_single_source


@pytest.fixture(scope="module")
def gen_kb():
    return recovery_generator_kb(n_types=6, seed=3)


def config_for(kb, seed, **overrides):
    base = dict(
        seed=seed,
        generator_kb=kb,
        region_count=4,
        nodes_per_region=(1, 2),
        extra_region_links=1,
        objects_per_node=(1, 2),
        unique_region_types=True,
    )
    base.update(overrides)
    return GeneratorConfig(**base)


class TestGenerateScene:
    def test_same_seed_identical_scene(self, gen_kb):
        a = generate_scene(config_for(gen_kb, 42))
        b = generate_scene(config_for(gen_kb, 42))
        assert scene_to_payload(a) == scene_to_payload(b)

    def test_different_seed_differs(self, gen_kb):
        a = generate_scene(config_for(gen_kb, 1))
        b = generate_scene(config_for(gen_kb, 2))
        assert scene_to_payload(a) != scene_to_payload(b)

    def test_two_single_node_regions(self, gen_kb):
        scene = generate_scene(
            config_for(gen_kb, 5, region_count=2, nodes_per_region=(1, 1), extra_region_links=0)
        )
        assert len(scene.nodes) == 2
        assert len(scene.edges) == 1

    def test_zero_probability_pairs_never_adjacent(self):
        kb, weights = house_generator_kb()
        zero_pairs = set()
        n = len(kb.type_vocabulary)
        for a in range(n):
            for b in range(n):
                if a != b and kb.P_r[a, b] == 0.0:
                    zero_pairs.add((a, b))
        for seed in range(60):
            scene = generate_scene(
                config_for(kb, seed, region_count=8, object_weights=weights)
            )
            regions = segment_regions(scene)
            type_of = {r.region_id: r.region_type for r in regions}
            for ra, rb in region_adjacency(scene, regions):
                assert (type_of[ra], type_of[rb]) not in zero_pairs

    def test_adjacency_frequencies_track_generator_rows(self, gen_kb):
        n = len(gen_kb.type_vocabulary)
        tallies = np.zeros((n, n))
        for seed in range(1000):
            scene = generate_scene(config_for(gen_kb, seed, region_count=6, nodes_per_region=(1, 1)))
            regions = segment_regions(scene)
            type_of = {r.region_id: r.region_type for r in regions}
            for ra, rb in region_adjacency(scene, regions):
                ta, tb = type_of[ra], type_of[rb]
                tallies[ta, tb] += 1
                tallies[tb, ta] += 1
        rhos = []
        for t in range(n):
            mask = np.arange(n) != t
            if tallies[t][mask].std() > 0 and gen_kb.P_r[t][mask].std() > 0:
                rhos.append(stats.spearmanr(tallies[t][mask], gen_kb.P_r[t][mask]).statistic)
        assert np.mean(rhos) >= 0.8

    def test_unique_types_infeasible_when_exceeding_vocabulary(self, gen_kb):
        with pytest.raises(ValueError, match="infeasible"):
            generate_scene(config_for(gen_kb, 1, region_count=7))

    def test_objects_respect_weights(self, gen_kb):
        n_o = len(gen_kb.object_vocabulary)
        weights = np.zeros((len(gen_kb.type_vocabulary), n_o))
        weights[:, 2] = 1.0  # every node can only hold object type 2
        scene = generate_scene(config_for(gen_kb, 9, object_weights=weights))
        for node in scene.nodes:
            for obj in node.objects:
                assert obj.object_type == 2

    def test_unique_objects_per_region(self, gen_kb):
        scene = generate_scene(
            config_for(gen_kb, 11, nodes_per_region=(3, 3), unique_objects_per_region=True)
        )
        for region in segment_regions(scene):
            seen = []
            for nid in region.member_nodes:
                seen.extend(o.object_type for o in scene.node(nid).objects)
            assert len(seen) == len(set(seen))


class TestSampleEpisode:
    def test_forced_target_on_two_node_scene(self, two_node_scene):
        episode = sample_episode(two_node_scene, seed=0)
        assert episode.target_node == "b"
        assert episode.start_node == "a"
        assert episode.target_object == "b-obj"
        assert episode.shortest_length == 3.0

    def test_deterministic_in_seed(self, gen_kb):
        scene = generate_scene(config_for(gen_kb, 21))
        assert sample_episode(scene, seed=4) == sample_episode(scene, seed=4)

    def test_start_differs_from_target(self, gen_kb):
        for seed in range(30):
            scene = generate_scene(config_for(gen_kb, seed))
            episode = sample_episode(scene, seed=seed)
            assert episode.start_node != episode.target_node
            assert episode.shortest_length > 0

    def test_shortest_length_matches_dijkstra_oracle(self, gen_kb):
        for seed in range(20):
            scene = generate_scene(config_for(gen_kb, 100 + seed, region_count=5))
            episode = sample_episode(scene, seed=seed)
            dist = dijkstra_single_source(scene.node_ids(), scene.edges, episode.start_node)
            assert math.isclose(episode.shortest_length, dist[episode.target_node], rel_tol=1e-12)

    def test_no_objects_is_an_error(self):
        scene = make_scene([("a", "r0", 0), ("b", "r1", 1)], [("a", "b", 1.0)])
        with pytest.raises(ValueError, match="object"):
            sample_episode(scene, seed=0)

    def test_manifest_round_trip(self, gen_kb, tmp_path):
        scene = generate_scene(config_for(gen_kb, 33))
        episodes = sample_episodes(scene, 4, seed=8)
        path = tmp_path / "episodes.json"
        save_episodes(episodes, path)
        assert load_episodes(path) == episodes
