import math

import numpy as np
import pytest

from hspr.perception import (
    ConfusionModel,
    TargetSpec,
    TypeBelief,
    VisualWeights,
    load_confusion,
    node_classification_loss,
    perceive_node_types,
    save_confusion,
    target_spec_from_episode,
    visual_score_stub,
    visual_score_table,
)
from hspr.synth import sample_episode

from oracles import cross_entropy_sum


class TestConfusionModel:
    def test_identity_gives_one_hot_truth(self):
        model = ConfusionModel.identity(4)
        beliefs = perceive_node_types([("a", 2), ("b", 0)], model, seed=0)
        assert np.array_equal(beliefs[0].R, [0, 0, 1, 0])
        assert np.array_equal(beliefs[1].R, [1, 0, 0, 0])

    def test_uniform_rows_give_uniform_beliefs(self):
        model = ConfusionModel(np.full((4, 4), 0.25))
        beliefs = perceive_node_types([("a", 1)], model, seed=0)
        assert np.allclose(beliefs[0].R, 0.25)

    def test_eps_uniform_mixes_identity_and_uniform(self):
        model = ConfusionModel.eps_uniform(4, 0.2)
        assert np.allclose(model.M[0], [0.85, 0.05, 0.05, 0.05])

    def test_sampled_mode_frequencies_match_row(self):
        model = ConfusionModel(
            np.array([[0.5, 0.3, 0.2], [0.1, 0.8, 0.1], [0.2, 0.2, 0.6]]),
            mode="sampled",
        )
        beliefs = perceive_node_types([("n", 0)] * 10_000, model, seed=7)
        freqs = np.mean([b.R for b in beliefs], axis=0)
        assert np.all(np.abs(freqs - [0.5, 0.3, 0.2]) <= 0.02)

    def test_sampled_mode_deterministic_in_seed(self):
        model = ConfusionModel.eps_uniform(5, 0.5, mode="sampled")
        a = perceive_node_types([("n", i % 5) for i in range(20)], model, seed=3)
        b = perceive_node_types([("n", i % 5) for i in range(20)], model, seed=3)
        assert all(np.array_equal(x.R, y.R) for x, y in zip(a, b))

    def test_non_stochastic_matrix_rejected(self):
        with pytest.raises(ValueError, match="sum to 1"):
            ConfusionModel(np.array([[0.5, 0.4], [0.5, 0.5]]))

    def test_file_round_trip(self, tmp_path):
        model = ConfusionModel.eps_uniform(3, 0.3, mode="sampled")
        path = tmp_path / "confusion.json"
        save_confusion(model, path)
        loaded = load_confusion(path)
        assert np.array_equal(loaded.M, model.M)
        assert loaded.mode == "sampled"


class TestTargetSpec:
    def test_oracle_spec_is_one_hot(self, two_node_scene):
        episode = sample_episode(two_node_scene, seed=0)
        spec = target_spec_from_episode(
            episode, two_node_scene, ConfusionModel.identity(4), object_noise=0.0, seed=0
        )
        assert np.array_equal(spec.Y_r, [0, 1, 0, 0])
        assert np.array_equal(spec.Y_o, [0, 0, 1, 0])
        assert spec.target_type == 1

    def test_full_noise_gives_uniform_objects(self, two_node_scene):
        episode = sample_episode(two_node_scene, seed=0)
        spec = target_spec_from_episode(
            episode, two_node_scene, ConfusionModel.identity(4), object_noise=1.0, seed=0
        )
        assert np.allclose(spec.Y_o, 0.25)

    def test_half_noise_mixture_values(self, two_node_scene):
        episode = sample_episode(two_node_scene, seed=0)
        spec = target_spec_from_episode(
            episode, two_node_scene, ConfusionModel.identity(4), object_noise=0.5, seed=0
        )
        assert np.allclose(spec.Y_o, [0.125, 0.125, 0.625, 0.125])

    def test_distributions_validated(self):
        with pytest.raises(ValueError, match="sum to 1"):
            TargetSpec(Y_r=np.array([0.5, 0.4]), Y_o=np.array([1.0]))


class TestVisualScores:
    def target(self, n=3, hot=1):
        Y_r = np.zeros(n)
        Y_r[hot] = 1.0
        return TargetSpec(Y_r=Y_r, Y_o=np.array([1.0]))

    def test_alignment_term_only(self):
        weights = VisualWeights(w_d=0.0, w_t=2.0, decay=5.0, noise_sd=0.0)
        belief = TypeBelief("n", np.array([0.2, 0.7, 0.1]))
        table = visual_score_table([("n", 4.0, belief)], self.target(), weights, np.random.default_rng(0))
        assert math.isclose(table["n"], 2.0 * 0.7)

    def test_distance_term_only_at_zero_distance(self):
        weights = VisualWeights(w_d=0.8, w_t=0.0, decay=5.0, noise_sd=0.0)
        belief = TypeBelief("n", np.array([1.0, 0.0, 0.0]))
        table = visual_score_table([("n", 0.0, belief)], self.target(), weights, np.random.default_rng(0))
        assert math.isclose(table["n"], 0.8)

    def test_fixed_seed_replays_identically(self):
        weights = VisualWeights(w_d=0.5, w_t=1.0, decay=8.0, noise_sd=0.3)
        beliefs = [TypeBelief(f"n{i}", np.array([0.5, 0.25, 0.25])) for i in range(6)]
        gview = [(b.node_id, float(i), b) for i, b in enumerate(beliefs)]
        lview = gview[:2]
        a = visual_score_stub(gview, lview, self.target(), weights, seed=99)
        b = visual_score_stub(gview, lview, self.target(), weights, seed=99)
        assert a == b
        c = visual_score_stub(gview, lview, self.target(), weights, seed=100)
        assert a != c

    def test_decay_must_be_positive(self):
        with pytest.raises(ValueError):
            VisualWeights(decay=0.0)


class TestClassificationLoss:
    def test_one_hot_correct_gives_zero(self):
        beliefs = [TypeBelief("n", np.array([0.0, 1.0, 0.0]))]
        assert node_classification_loss(beliefs, [1]) == 0.0

    def test_uniform_belief_analytic_value(self):
        beliefs = [TypeBelief("n", np.full(4, 0.25))]
        assert math.isclose(node_classification_loss(beliefs, [2]), -math.log(0.25))

    def test_batch_matches_naive_oracle(self, rng):
        beliefs = []
        truths = []
        for i in range(5):
            raw = rng.uniform(0.01, 1.0, size=6)
            beliefs.append(TypeBelief(f"n{i}", raw / raw.sum()))
            truths.append(int(rng.integers(6)))
        got = node_classification_loss(beliefs, truths)
        want = cross_entropy_sum([b.R for b in beliefs], truths)
        assert math.isclose(got, want, rel_tol=1e-12)

    def test_zero_mass_clamped(self):
        beliefs = [TypeBelief("n", np.array([1.0, 0.0]))]
        loss = node_classification_loss(beliefs, [1])
        assert math.isclose(loss, -math.log(1e-12))

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError, match="length"):
            node_classification_loss([], [1])
