import numpy as np
import pytest

from driftml.learners.base import Classifier
from driftml.search.engine import (
    EvaluationResult,
    SearchBudget,
    asha_rungs,
    evaluate_candidate,
    make_search,
    run_asha,
    run_async_ea,
    run_random_search,
)
from driftml.search.space import (
    ComponentConfig,
    ConfigSpace,
    PipelineGenotype,
    register_classifier_builder,
)
from driftml.streams import SeaConfig, generate_sea
from util import oracle_genotype, oracle_space, sea_window


class ExplodingClassifier(Classifier):
    def predict_proba_one(self, x):
        raise RuntimeError("boom")

    def learn_one(self, x, y, weight=1.0):
        raise RuntimeError("boom")


register_classifier_builder(
    "Exploding", lambda params, classes, seed: ExplodingClassifier(classes)
)


class TestEvaluateCandidate:
    def test_failure_contained(self):
        window, schema = sea_window(100)
        genotype = PipelineGenotype((), ComponentConfig("Exploding", {}))
        result = evaluate_candidate(genotype, window, 100, schema, seed=0)
        assert result.failed
        assert result.score == 0.0
        assert "boom" in result.error

    def test_deterministic_given_seed(self):
        window, schema = sea_window(400, noise=0.1)
        space = ConfigSpace()
        genotype = PipelineGenotype((), space.default_classifier("HAT"))
        a = evaluate_candidate(genotype, window, 400, schema, seed=99)
        b = evaluate_candidate(genotype, window, 400, schema, seed=99)
        assert a.score == b.score and not a.failed

    def test_regression_pin_hat_defaults(self):
        # Frozen value from a fixed-seed run of this exact configuration.
        config = SeaConfig(length=1000, seed=5, noise_rate=0.1, initial_concept=1)
        window = list(generate_sea(config))
        genotype = PipelineGenotype((), ConfigSpace().default_classifier("HAT"))
        result = evaluate_candidate(genotype, window, 1000, config.schema, seed=1234)
        assert result.score == pytest.approx(0.836, abs=1e-9)

    def test_oracle_scores_perfectly(self):
        window, schema = sea_window(300, concept=4)
        result = evaluate_candidate(oracle_genotype(9.5), window, 300, schema)
        assert result.score == 1.0

    def test_samples_capped_by_window(self):
        window, schema = sea_window(50)
        result = evaluate_candidate(oracle_genotype(9.5), window, 500, schema)
        assert result.samples_used == 50


class TestRandomSearch:
    def test_single_evaluation_budget(self):
        window, schema = sea_window(200)
        out = run_random_search(oracle_space(), window, schema,
                                SearchBudget(max_evaluations=1),
                                np.random.default_rng(0), seed=1)
        assert len(out.evaluations) == 1
        assert out.champion is out.evaluations[0] or out.champion.score == out.evaluations[0].score

    def test_champion_is_max_score(self):
        window, schema = sea_window(300)
        out = run_random_search(oracle_space(), window, schema,
                                SearchBudget(max_evaluations=12),
                                np.random.default_rng(1), seed=2)
        best = max(r.score for r in out.evaluations if not r.failed)
        assert out.champion.score == best

    def test_planted_optimum_wins(self):
        window, schema = sea_window(300, concept=4)
        out = run_random_search(oracle_space(), window, schema,
                                SearchBudget(max_evaluations=16),
                                np.random.default_rng(2), seed=3)
        assert out.champion.score == 1.0
        assert out.champion.genotype.classifier.params["theta"] == 9.5

    def test_tie_goes_to_earlier_completion(self):
        window, schema = sea_window(200, concept=4)
        out = run_random_search(oracle_space((9.5, 9.5)), window, schema,
                                SearchBudget(max_evaluations=5),
                                np.random.default_rng(3), seed=4)
        assert out.champion.order == 0

    def test_all_failures_fall_back_to_default(self):
        window, schema = sea_window(200)
        space = ConfigSpace(
            classifiers={"Exploding": {}},
            preprocessors={},
            classifier_defaults={"Exploding": {}},
            preprocessor_defaults={},
        )
        # The fallback champion is the space's default classifier.
        space.classifier_defaults = {"Exploding": {}}
        out = run_random_search(space, window, schema,
                                SearchBudget(max_evaluations=3),
                                np.random.default_rng(4), seed=5)
        assert out.fallback
        assert out.champion.error is not None
        assert out.pipeline is not None


class TestAsha:
    def test_rung_schedule_defaults(self):
        assert asha_rungs(5000, eta=2.0) == [625, 1250, 2500, 5000]
        assert asha_rungs(1000, eta=2.0) == [125, 250, 500, 1000]

    def test_min_resource_schedule(self):
        assert asha_rungs(5000, eta=2.0, min_resource=625) == [625, 1250, 2500, 5000]

    def test_better_of_two_promoted(self):
        window, schema = sea_window(400, concept=4)
        out = run_asha(oracle_space((7.0, 9.5)), window, schema,
                       SearchBudget(max_evaluations=8),
                       np.random.default_rng(5), seed=6)
        promotions = [r for r in out.evaluations if not r.tag.startswith("0")]
        assert promotions
        assert all(r.genotype.classifier.params["theta"] == 9.5 for r in promotions[:1])

    def test_planted_dominator_reaches_top_and_wins(self):
        window, schema = sea_window(400, concept=4)
        out = run_asha(oracle_space(), window, schema,
                       SearchBudget(max_evaluations=30),
                       np.random.default_rng(6), seed=7)
        top_rung = len(asha_rungs(400)) - 1
        assert out.champion.tag.startswith(str(top_rung))
        assert out.champion.score == 1.0

    def test_single_worker_schedule_progress(self):
        # 10 + 5 + 3 + 2 evaluations of increasing resource suffice for one
        # candidate to reach the top rung with eta=2.
        window, schema = sea_window(400, noise=0.05)
        out = run_asha(ConfigSpace(), window, schema,
                       SearchBudget(max_evaluations=20),
                       np.random.default_rng(7), seed=8)
        top_rung = str(len(asha_rungs(400)) - 1)
        assert any(r.tag.startswith(top_rung) for r in out.evaluations)


class TestAsyncEA:
    def test_degenerate_population_terminates(self):
        window, schema = sea_window(200)
        out = run_async_ea(oracle_space(), window, schema,
                           SearchBudget(max_evaluations=6),
                           np.random.default_rng(8), population_size=2, seed=9)
        assert out.champion.score == max(r.score for r in out.evaluations)

    def test_population_size_validated(self):
        window, schema = sea_window(50)
        with pytest.raises(ValueError, match="population_size"):
            run_async_ea(oracle_space(), window, schema,
                         SearchBudget(max_evaluations=2),
                         np.random.default_rng(9), population_size=1)

    def test_champion_monotone_over_time(self):
        window, schema = sea_window(300, noise=0.05)
        out = run_async_ea(ConfigSpace(), window, schema,
                           SearchBudget(max_evaluations=15),
                           np.random.default_rng(10), population_size=5, seed=11)
        running = []
        best = -1.0
        for r in out.evaluations:
            if not r.failed:
                best = max(best, r.score)
            running.append(best)
        assert running == sorted(running)
        assert out.champion.score == best

    @pytest.mark.slow
    def test_planted_neighborhood_found_quickly(self):
        # The optimum is one hyperparameter mutation away from a seeded member.
        window, schema = sea_window(300, concept=4)
        hits = 0
        for seed in range(10):
            out = run_async_ea(
                oracle_space(), window, schema,
                SearchBudget(max_evaluations=50),
                np.random.default_rng(100 + seed),
                population_size=6, seed=200 + seed,
                seed_genotypes=[oracle_genotype(9.0)],
            )
            hits += out.champion.score == 1.0
        assert hits >= 8


class TestBudgetCompliance:
    def test_no_start_after_wall_clock(self):
        window, schema = sea_window(500, noise=0.1)
        budget = SearchBudget(wall_clock_seconds=0.5)
        out = run_random_search(ConfigSpace(), window, schema, budget,
                                np.random.default_rng(11), seed=12)
        assert out.evaluations
        assert all(r.start_time < 0.5 for r in out.evaluations)

    def test_evaluation_cap_respected(self):
        window, schema = sea_window(200)
        out = run_random_search(oracle_space(), window, schema,
                                SearchBudget(max_evaluations=7),
                                np.random.default_rng(12), seed=13)
        assert len(out.evaluations) == 7

    def test_budget_requires_a_limit(self):
        with pytest.raises(ValueError, match="limit"):
            SearchBudget()

    def test_multi_worker_run_completes(self):
        window, schema = sea_window(300, noise=0.05)
        budget = SearchBudget(max_evaluations=8, worker_count=3)
        out = run_random_search(ConfigSpace(), window, schema, budget,
                                np.random.default_rng(13), seed=14)
        assert len(out.evaluations) == 8
        assert not out.fallback


class TestMakeSearch:
    def test_known_strategies(self):
        assert make_search("random") is run_random_search
        assert make_search("asha") is run_asha
        assert make_search("async_ea") is run_async_ea

    def test_unknown_strategy(self):
        with pytest.raises(ValueError, match="unknown search"):
            make_search("bayes")

    def test_champion_pipeline_is_trained(self):
        window, schema = sea_window(300, concept=4)
        out = run_random_search(oracle_space(), window, schema,
                                SearchBudget(max_evaluations=4),
                                np.random.default_rng(14), seed=15)
        correct = sum(
            out.pipeline.predict_one(inst.features) == inst.label for inst in window
        )
        assert correct / len(window) > 0.5
