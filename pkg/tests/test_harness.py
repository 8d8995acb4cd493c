import json
from pathlib import Path

import numpy as np
import pytest

from blicketlab.core import Config, ContractError
from blicketlab.env import BlicketEnv
from blicketlab.harness import (
    MetricsReport,
    evaluate,
    run_episode,
    steps_histogram,
    trial_size_stats,
    write_report,
)
from blicketlab.agents import make_agent

GOLDEN = Path(__file__).parent / "golden"


def make_transcripts(agent_name, count, seed=24):
    env = BlicketEnv()
    agent = make_agent(agent_name, seed=seed)
    return [run_episode(agent, env, seed, i) for i in range(count)]


class TestEvaluate:
    def test_rejects_bad_inputs(self):
        with pytest.raises(ContractError):
            evaluate("random", 42, 0)
        with pytest.raises(ContractError):
            evaluate("alphago", 42, 10)

    def test_deterministic_repeat(self):
        a = evaluate("search-naive", 42, 40)
        b = evaluate("search-naive", 42, 40)
        assert a.json_bytes() == b.json_bytes()

    def test_worker_count_does_not_change_the_report(self):
        serial = evaluate("random", 42, 24, workers=1)
        parallel = evaluate("random", 42, 24, workers=4)
        assert serial.json_bytes() == parallel.json_bytes()

    def test_report_invariants(self):
        r = evaluate("naive", 42, 50)
        assert 0.0 <= r.episode_accuracy <= 1.0
        assert 0.0 <= r.context_accuracy <= 1.0
        assert -20.0 <= r.episode_reward <= 20.0
        assert sum(r.steps_to_solve.values()) == r.episodes
        assert sum(r.query_labels.values()) == 9 * r.episodes
        lo, hi = r.episode_accuracy_ci95
        assert lo <= r.episode_accuracy <= hi

    def test_context_accuracy_never_exceeds_episode_accuracy_for_search_agents(self):
        for name in ("search-random", "search-naive"):
            r = evaluate(name, 42, 60)
            assert r.context_accuracy <= r.episode_accuracy

    def test_transcripts_written_in_index_order(self, tmp_path):
        path = tmp_path / "episodes.jsonl"
        evaluate("random", 42, 6, workers=3, transcripts_path=path)
        lines = path.read_text().strip().splitlines()
        assert [json.loads(line)["episode_index"] for line in lines] == list(range(6))


class TestStepsHistogram:
    def test_empty_input(self):
        assert steps_histogram([]) == {}

    def test_all_unsolved_mass(self):
        transcripts = make_transcripts("random", 5)
        hist = steps_histogram(transcripts)
        solved = sum(v for k, v in hist.items() if k != "unsolved")
        assert solved + hist["unsolved"] == 5

    def test_masses_sum_to_episode_count(self):
        transcripts = make_transcripts("search-naive", 12)
        hist = steps_histogram(transcripts)
        assert sum(hist.values()) == 12

    def test_solved_episodes_land_in_their_step_bucket(self):
        transcripts = make_transcripts("search-naive", 12)
        hist = steps_histogram(transcripts)
        for t in transcripts:
            if t.solve_step is not None:
                assert hist[str(t.solve_step)] >= 1


class TestTrialSizeStats:
    def test_empty_input(self):
        assert trial_size_stats([]) == {}

    def test_naive_median_is_at_most_one_everywhere(self):
        stats = trial_size_stats(make_transcripts("naive", 15))
        assert stats
        for summary in stats.values():
            assert summary["median"] <= 1.0

    def test_random_median_is_around_binomial_center(self):
        stats = trial_size_stats(make_transcripts("random", 40))
        medians = [s["median"] for s in stats.values()]
        assert 3.0 <= float(np.median(medians)) <= 6.0

    def test_quartile_ordering(self):
        stats = trial_size_stats(make_transcripts("random", 10))
        for s in stats.values():
            assert s["min"] <= s["q1"] <= s["median"] <= s["q3"] <= s["max"]
            assert s["count"] >= 1


class TestWriteReport:
    def test_json_round_trip(self, tmp_path):
        report = evaluate("bayes", 42, 10)
        path = tmp_path / "report.json"
        write_report(report, "json", path)
        parsed = MetricsReport.from_dict(json.loads(path.read_text()))
        assert parsed.to_dict() == report.to_dict()

    def test_csv_row_count_matches_metric_count(self, tmp_path):
        from blicketlab.harness import _flatten_report

        report = evaluate("bayes", 42, 10)
        path = tmp_path / "report.csv"
        write_report(report, "csv", path)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "metric,value"
        assert len(lines) - 1 == len(_flatten_report(report.to_dict()))

    def test_unknown_format(self, tmp_path):
        with pytest.raises(ContractError):
            write_report(evaluate("bayes", 42, 5), "xml", tmp_path / "r.xml")

    def test_golden_report_is_byte_stable(self):
        report = evaluate("search-naive", 42, 100)
        golden = (GOLDEN / "report_search-naive_s42_n100.json").read_bytes()
        assert report.json_bytes() == golden
