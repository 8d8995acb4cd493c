import json

import numpy as np
import pytest

from blicketlab.core import Action, Config, ContractError, StateError
from blicketlab.env import BlicketEnv, EpisodeTranscript, Status
from blicketlab.oracle import oracle_belief
from blicketlab.sampler import seeded_rng


def truth_action(truth, trial=None):
    belief = np.zeros(9)
    belief[list(truth)] = 1.0
    return Action(trial=np.zeros(9) if trial is None else np.asarray(trial, float), belief=belief)


def uniform_action(rng):
    return Action(trial=rng.random(9), belief=rng.random(9))


HOLD = Action(trial=np.zeros(9), belief=np.full(9, 0.5))


class TestReset:
    def test_deterministic_observations(self):
        env = BlicketEnv()
        obs1, id1 = env.reset(42, 0)
        obs2, id2 = env.reset(42, 0)
        assert np.array_equal(obs1, obs2)
        assert id1 == id2

    def test_four_vectors_of_length_ten(self):
        obs, _ = BlicketEnv().reset(42, 0)
        assert obs.shape == (4, 10)
        assert set(np.unique(obs)) <= {0, 1}

    def test_context_leaves_an_interior_coordinate(self):
        env = BlicketEnv()
        for i in range(25):
            env.reset(42, i)
            probs = env.feasible_set.belief()
            assert np.any((probs > 0.0) & (probs < 1.0))

    def test_status_transitions(self):
        env = BlicketEnv()
        env.reset(42, 0)
        assert env.status is Status.AWAITING_FIRST_ACTION
        env.step(HOLD)
        assert env.status is Status.RUNNING


class TestStep:
    def test_correct_belief_at_first_step_solves_without_a_trial(self):
        env = BlicketEnv()
        env.reset(42, 0)
        feasible_before = len(env.feasible_set)
        obs, reward, done, info = env.step(truth_action(env.spec.ground_truth, trial=np.ones(9)))
        assert reward == 20.0
        assert done and info["solved"]
        assert env.status is Status.SOLVED
        # the proposed trial never ran
        assert len(env.feasible_set) == feasible_before
        assert obs.tolist() == [0] * 10

    def test_empty_trial_is_legal_and_machine_stays_off(self):
        env = BlicketEnv()
        env.reset(42, 0)
        obs, reward, done, info = env.step(Action(np.full(9, 0.49), np.full(9, 0.5)))
        assert -2.0 <= reward <= -1.0
        assert not done
        assert obs.tolist() == [0] * 10  # empty panel, machine off

    def test_ten_unsolved_steps_exhaust(self):
        env = BlicketEnv()
        env.reset(42, 0)
        total = 0.0
        for k in range(10):
            _, reward, done, _ = env.step(HOLD)
            total += reward
            assert done == (k == 9)
        assert env.status is Status.EXHAUSTED
        assert total >= -20.0

    def test_step_after_done_raises(self):
        env = BlicketEnv()
        env.reset(42, 0)
        for _ in range(10):
            env.step(HOLD)
        with pytest.raises(StateError):
            env.step(HOLD)

    def test_step_before_reset_raises(self):
        with pytest.raises(StateError):
            BlicketEnv().step(HOLD)

    @pytest.mark.parametrize(
        "action",
        [
            Action(np.full(9, 0.5), np.full(9, 1.5)),
            Action(np.full(9, -0.1), np.full(9, 0.5)),
            Action(np.full(8, 0.5), np.full(9, 0.5)),
            Action(np.full(9, 0.5), np.array([np.nan] * 9)),
        ],
    )
    def test_malformed_actions_raise_contract_errors(self, action):
        env = BlicketEnv()
        env.reset(42, 0)
        with pytest.raises(ContractError):
            env.step(action)

    def test_reward_bounds_fuzz(self):
        env = BlicketEnv()
        rng = seeded_rng(1234)
        for i in range(60):
            env.reset(9, i)
            total = 0.0
            done = False
            while not done:
                _, reward, done, _ = env.step(uniform_action(rng))
                assert reward == 20.0 or -2.0 <= reward <= -1.0
                total += reward
            assert -20.0 <= total <= 20.0

    def test_oracle_info_matches_feasible_set(self):
        env = BlicketEnv()
        env.reset(42, 1)
        rng = seeded_rng(5)
        done = False
        while not done:
            _, _, done, info = env.step(uniform_action(rng))
            if not info["solved"]:
                assert info["feasible_count"] == len(env.feasible_set)
                assert info["oracle_belief"].tolist() == env.feasible_set.belief().tolist()

    def test_trial_threshold_is_strict(self):
        env = BlicketEnv()
        env.reset(42, 0)
        obs, _, _, _ = env.step(Action(np.full(9, 0.5), np.full(9, 0.5)))
        assert obs.tolist() == [0] * 10  # 0.5 is not > 0.5: nothing selected


class TestBinarizationModes:
    def test_sample_mode_is_deterministic_per_seed(self):
        cfg = Config(trial_binarization="sample")
        runs = []
        for _ in range(2):
            env = BlicketEnv(cfg)
            env.reset(42, 0)
            obs, reward, _, _ = env.step(Action(np.full(9, 0.5), np.full(9, 0.5)))
            runs.append((obs.tolist(), reward))
        assert runs[0] == runs[1]

    def test_sample_mode_extremes_are_certain(self):
        cfg = Config(trial_binarization="sample")
        env = BlicketEnv(cfg)
        env.reset(42, 0)
        trial = np.zeros(9)
        trial[0] = 1.0
        obs, _, _, _ = env.step(Action(trial, np.full(9, 0.5)))
        assert obs[0] == 1 and obs[1:9].tolist() == [0] * 8


class TestRewardOracleModes:
    def test_pre_trial_reference_can_differ(self):
        # Scored against the pre-trial oracle, a belief equal to that oracle
        # earns exactly the bare step penalty.
        cfg = Config(reward_oracle="pre_trial")
        env = BlicketEnv(cfg)
        env.reset(42, 0)
        pre = env.feasible_set.belief()
        trial = np.zeros(9)
        interior = np.nonzero((pre > 0) & (pre < 1))[0]
        trial[interior[0]] = 1.0
        _, reward, _, _ = env.step(Action(trial, pre))
        assert reward == -1.0

        env2 = BlicketEnv()
        env2.reset(42, 0)
        _, reward_post, _, _ = env2.step(Action(trial, pre))
        assert reward_post <= -1.0


class TestTranscripts:
    def run_random_episode(self, seed=42, index=0, config=None):
        env = BlicketEnv(config)
        env.reset(seed, index)
        rng = seeded_rng(777, index)
        done = False
        while not done:
            _, _, done, _ = env.step(uniform_action(rng))
        return env

    def test_export_before_done_raises(self):
        env = BlicketEnv()
        env.reset(42, 0)
        with pytest.raises(StateError):
            env.export_transcript()

    def test_round_trips_losslessly_through_json(self):
        t = self.run_random_episode().export_transcript()
        blob = json.dumps(t.to_dict())
        again = EpisodeTranscript.from_dict(json.loads(blob))
        assert again.to_dict() == t.to_dict()

    def test_solved_transcript_ends_with_the_bonus(self):
        env = BlicketEnv()
        env.reset(42, 0)
        env.step(HOLD)
        env.step(truth_action(env.spec.ground_truth))
        t = env.export_transcript()
        assert t.status is Status.SOLVED
        assert t.steps[-1].reward == 20.0
        assert t.solve_step == 2
        assert t.steps[-1].executed is None

    def test_replaying_recorded_actions_reproduces_rewards(self):
        env = self.run_random_episode(seed=4, index=9)
        t = env.export_transcript()
        env2 = BlicketEnv(t.config)
        env2.reset(t.master_seed, t.episode_index)
        for record in t.steps:
            _, reward, _, _ = env2.step(
                Action(np.array(record.trial), np.array(record.belief))
            )
            assert reward == record.reward
        assert env2.status is t.status
