import numpy as np
import pytest

from seqcf import (
    GaConfig,
    UserSequence,
    crossover,
    explain,
    fitness,
    genetic,
    levenshtein,
    mutate_add,
    mutate_delete,
    mutate_replace,
    objective_loss,
    oracle_optimal,
    train_markov,
    verify_eps_vcs,
)
from seqcf.core import derive_stream
from seqcf.models import ScoreVector
from seqcf.objective import SettingSpec

from conftest import ConstScorer, QueuedRng, seqs


def chi_square(counts, expected):
    return sum((c - expected) ** 2 / expected for c in counts)


class TestMutateReplace:
    def test_uniform_over_position_and_item(self):
        rng = derive_stream(7, [1])
        outcomes = {}
        for _ in range(9000):
            out = mutate_replace((0, 1, 2), 6, rng)
            outcomes[out] = outcomes.get(out, 0) + 1
        # 3 positions x 3 unseen items = 9 equally likely results
        assert len(outcomes) == 9
        assert chi_square(outcomes.values(), 1000) < 26.12  # chi2(8), p=0.001

    def test_catalog_exhausted(self):
        with pytest.raises(ValueError, match="exhausted"):
            mutate_replace((0, 1, 2), 3, derive_stream(0, [1]))

    def test_shape_preserved(self):
        rng = derive_stream(3, [1])
        for _ in range(200):
            out = mutate_replace((4, 1, 7, 2), 9, rng)
            assert len(out) == 4
            assert len(set(out)) == 4


class TestMutateAdd:
    def test_inserts_at_position(self):
        out = mutate_add((0, 1), 4, QueuedRng(integers=[1, 2]))
        assert out == (0, 2, 1)

    def test_overflow_drops_oldest(self):
        out = mutate_add((0, 1, 2), 5, QueuedRng(integers=[3, 4]), max_len=3)
        assert out == (1, 2, 4)

    def test_length_rule(self):
        rng = derive_stream(5, [2])
        for _ in range(200):
            base = (3, 8, 5)
            out = mutate_add(base, 12, rng, max_len=4)
            assert len(out) == min(len(base) + 1, 4)
            assert len(set(out)) == len(out)


class TestMutateDelete:
    def test_uniform_over_positions(self):
        rng = derive_stream(11, [3])
        counts = {0: 0, 1: 0, 2: 0}
        for _ in range(9000):
            out = mutate_delete((5, 6, 7), rng)
            gone = ({5, 6, 7} - set(out)).pop()
            counts[{5: 0, 6: 1, 7: 2}[gone]] += 1
        assert chi_square(counts.values(), 3000) < 13.82  # chi2(2), p=0.001

    def test_length_one_rejected(self):
        with pytest.raises(ValueError):
            mutate_delete((5,), derive_stream(0, [1]))

    def test_order_preserved(self):
        rng = derive_stream(2, [4])
        for _ in range(100):
            out = mutate_delete((1, 2, 3, 4), rng)
            assert list(out) == sorted(out)


class TestCrossover:
    def test_single_cut_example(self):
        c1, c2 = crossover((0, 1), (2, 3), QueuedRng(integers=[1, 1]))
        assert c1 == (0, 3)
        assert c2 == (2, 1)

    def test_duplicate_repair_drops_later(self):
        c1, c2 = crossover((0, 1), (1, 2), QueuedRng(integers=[2, 1]))
        # child1 = (0,1)+(2,) ok; child2 = (1,)+(1,) repaired to (1,)
        assert c1 == (0, 1, 2)
        assert c2 == (1,)

    def test_children_never_contain_duplicates(self):
        rng = derive_stream(9, [5])
        for _ in range(300):
            p1 = tuple(rng.permutation(12)[: rng.integers(1, 7)].tolist())
            p2 = tuple(rng.permutation(12)[: rng.integers(1, 7)].tolist())
            for child in crossover(p1, p2, rng, max_len=8):
                assert 1 <= len(child) <= 8
                assert len(set(child)) == len(child)


class TestFitness:
    def setup_method(self):
        arr = np.array([0.5, 0.3, 0.2])
        self.source_scores = ScoreVector(np.log(arr))
        self.setting = SettingSpec.from_name("targ_un", target_item=2)

    def test_source_candidate_arithmetic(self):
        # lev 0; targeted loss 1 - 0.2 = 0.8; 0.5 * 0.8 = 0.4
        got = fitness((0, 1), self.source_scores, (0, 1), self.source_scores, self.setting, 0.5)
        assert got == pytest.approx(0.4)

    def test_weight_one_is_pure_edit_distance(self):
        cand_scores = ScoreVector(np.log(np.array([0.2, 0.3, 0.5])))
        got = fitness((0, 1, 2), self.source_scores, (0, 1), cand_scores, self.setting, 1.0, max_len=10)
        assert got == pytest.approx(levenshtein((0, 1, 2), (0, 1)) / 10)

    def test_weight_zero_is_pure_loss(self):
        cand_scores = ScoreVector(np.log(np.array([0.2, 0.3, 0.5])))
        got = fitness((0, 1), self.source_scores, (1, 2), cand_scores, self.setting, 0.0)
        assert got == pytest.approx(objective_loss(self.setting, self.source_scores, cand_scores))


@pytest.fixture
def walk_markov():
    rng = np.random.default_rng(21)
    return train_markov(
        seqs({u: tuple(rng.permutation(12)[:8].tolist()) for u in range(1, 30)}), 12
    )


class TestGenetic:
    def test_noop_evolution_keeps_source_copies(self, cycle_markov):
        cfg = GaConfig(generations=1, population_size=16, mutation_prob=0.0, crossover_prob=0.0, max_len=3)
        pop = genetic((0, 1), SettingSpec.from_name("un_un"), cycle_markov, 1, cfg, seed=0)
        assert len(pop) == 16
        assert all(c.items == (0, 1) for c in pop)

    def test_deterministic_final_population(self, walk_markov):
        cfg = GaConfig(generations=6, population_size=32, max_len=10)
        src = UserSequence(3, (0, 1, 2, 3), 10)
        setting = SettingSpec.from_name("un_un")
        a = genetic(src, setting, walk_markov, 1, cfg, seed=5)
        b = genetic(src, setting, walk_markov, 1, cfg, seed=5)
        assert [(c.items, c.born, c.ev.fitness) for c in a] == [
            (c.items, c.born, c.ev.fitness) for c in b
        ]

    def test_population_invariants_each_generation(self, walk_markov):
        cfg = GaConfig(generations=8, population_size=24, max_len=6)
        observed = []

        def watch(gen, pop):
            observed.append((gen, [c for c in pop]))

        genetic(
            UserSequence(1, (4, 2, 9), 6),
            SettingSpec.from_name("un_un"),
            walk_markov,
            1,
            cfg,
            seed=3,
            on_generation=watch,
        )
        assert [g for g, _ in observed] == list(range(1, 9))
        best = None
        for _, pop in observed:
            assert len(pop) == 24
            for cand in pop:
                assert 1 <= len(cand.items) <= 6
                assert len(set(cand.items)) == len(cand.items)
            gen_best = min(c.ev.fitness for c in pop)
            if best is not None:
                assert gen_best <= best + 1e-12
            best = gen_best

    def test_toy_flip_matches_oracle(self, cycle_markov):
        # trained cycle 0->1->2->3; from (0,1) the model suggests 2, and one
        # replacement (0,2) flips the suggestion to 3
        setting = SettingSpec.from_name("un_un")
        cfg = GaConfig(generations=30, population_size=64, max_len=3)
        src = UserSequence(1, (0, 1), 3)
        rec = explain(src, setting, cycle_markov, 1, cfg, seed=2)
        assert rec.counterfactual is not None
        optimal = oracle_optimal(src, setting, cycle_markov, 1, max_distance=2)
        assert optimal is not None
        assert rec.levenshtein == optimal[1] == 1

    def test_partial_elitism_keeps_size_and_determinism(self, walk_markov):
        cfg = GaConfig(generations=4, population_size=20, elitism_fraction=0.5, max_len=8)
        src = UserSequence(2, (1, 5, 7), 8)
        a = genetic(src, SettingSpec.from_name("un_un"), walk_markov, 1, cfg, seed=8)
        b = genetic(src, SettingSpec.from_name("un_un"), walk_markov, 1, cfg, seed=8)
        assert len(a) == 20
        assert [c.items for c in a] == [c.items for c in b]

    def test_replace_only_weights_keep_length(self, walk_markov):
        cfg = GaConfig(
            generations=5, population_size=16, mutation_weights=(1.0, 0.0, 0.0),
            crossover_prob=0.0, max_len=8,
        )
        pop = genetic(
            UserSequence(1, (0, 3, 6), 8), SettingSpec.from_name("un_un"), walk_markov, 1, cfg, seed=4
        )
        assert all(len(c.items) == 3 for c in pop)


class TestExplain:
    def test_absent_counterfactual_is_a_result(self):
        model = ConstScorer(8)
        cfg = GaConfig(generations=3, population_size=16, max_len=5)
        rec = explain(
            UserSequence(1, (0, 1, 2), 5), SettingSpec.from_name("un_un"), model, 1, cfg, seed=0
        )
        assert rec.counterfactual is None
        assert rec.valid_at_k == {1: False, 5: False}
        assert rec.hamming is None and rec.levenshtein is None

    def test_minimal_distance_wins(self, cycle_markov):
        setting = SettingSpec.from_name("un_un")
        cfg = GaConfig(generations=25, population_size=64, max_len=3)
        rec = explain(UserSequence(1, (0, 1), 3), setting, cycle_markov, 1, cfg, seed=1)
        assert rec.levenshtein == 1  # a one-edit flip exists and must win

    def test_returned_counterfactual_verifies(self, walk_markov):
        setting = SettingSpec.from_name("un_un")
        cfg = GaConfig(generations=10, population_size=48, max_len=8)
        for seed in range(5):
            rec = explain(UserSequence(1, (0, 1, 2, 3), 8), setting, walk_markov, 1, cfg, seed=seed)
            if rec.counterfactual is not None:
                assert verify_eps_vcs(walk_markov, rec.source, rec.counterfactual, rec.levenshtein)
                assert rec.valid_at_k[1]

    def test_threads_do_not_change_results(self, walk_markov):
        setting = SettingSpec.from_name("un_un")
        cfg = GaConfig(generations=6, population_size=40, max_len=8)
        src = UserSequence(5, (2, 8, 11), 8)
        base = explain(src, setting, walk_markov, 1, cfg, seed=9, threads=1)
        for threads in (2, 4):
            again = explain(src, setting, walk_markov, 1, cfg, seed=9, threads=threads)
            assert again.to_dict() == base.to_dict()
