import itertools
import json
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nalbench.generate import (
    ConfigError,
    GenerationConfig,
    gen_dataset,
    gen_instance,
    ground_truth_answer,
    instance_from_dict,
    instance_to_dict,
    partition_rules,
)
from nalbench.grading import grade_overall, label_record
from nalbench.answers import serialize_answer
from nalbench.nal import ALL_PATTERNS, EvidenceOverlapError, derive


class TestGenInstance:
    def test_deterministic(self):
        a = instance_to_dict(gen_instance(39), "x")
        b = instance_to_dict(gen_instance(39), "x")
        assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)

    def test_rederivation_closure(self):
        for seed in range(150):
            inst = gen_instance(seed)
            r1 = derive(inst.step1.premise1, inst.step1.premise2)
            assert r1 == list(inst.step1.results)
            chain = inst.chain_conclusion
            carried = inst.step2.premise1 if inst.chain_role == "premise1" else inst.step2.premise2
            assert carried == chain
            r2 = derive(inst.step2.premise1, inst.step2.premise2)
            assert r2 == list(inst.step2.results)
            assert inst.target == r2[inst.target_index]

    def test_chain_premise_matches_exactly_one_step1_result(self):
        for seed in range(100):
            inst = gen_instance(seed)
            step2_premises = (inst.step2.premise1, inst.step2.premise2)
            hits = [
                (i, p)
                for p in step2_premises
                for i, d in enumerate(inst.step1.results)
                if d.conclusion == p
            ]
            assert len(hits) == 1

    def test_independent_premise_shares_one_term_with_chain(self):
        for seed in range(100):
            inst = gen_instance(seed)
            shared = inst.independent_premise.terms & inst.chain_conclusion.terms
            assert len(shared) == 1

    def test_term_freshness_eight_per_instance(self):
        for seed in range(150):
            inst = gen_instance(seed)
            assert len(inst.all_terms()) == 8
            d1, d2 = inst.distractors
            chain_terms = (
                inst.step1.premise1.terms | inst.step1.premise2.terms | inst.independent_premise.terms
            )
            assert not (d1.terms | d2.terms) & chain_terms
            assert not d1.terms & d2.terms

    def test_input_bases_pairwise_disjoint_and_small(self):
        for seed in range(150):
            inst = gen_instance(seed)
            bases = [j.base.ids for j in inst.disclosed_premises()]
            for ids in bases:
                assert 1 <= len(ids) <= 3
            for a, b in itertools.combinations(bases, 2):
                assert not a & b

    def test_restricted_pattern_respected(self):
        pattern = ALL_PATTERNS[3]
        cfg = GenerationConfig(allowed_patterns=(pattern,))
        for seed in range(30):
            assert gen_instance(seed, cfg).step1.pattern == pattern

    def test_empty_pattern_set_rejected(self):
        with pytest.raises(ConfigError):
            GenerationConfig(allowed_patterns=())

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 2**60))
    def test_self_grading_identity(self, seed):
        inst = gen_instance(seed)
        report = grade_overall(
            serialize_answer(ground_truth_answer(inst)),
            label=label_record(inst.target),
        )
        assert report.conformity == 1.0
        assert report.final == 1.0

    def test_distractors_never_unlock_target(self):
        # two rounds of forward chaining from the distractors plus any single
        # main premise must never produce the target statement
        for seed in range(60):
            inst = gen_instance(seed)
            target_statement = inst.target.conclusion.statement()
            mains = [inst.step1.premise1, inst.step1.premise2, inst.independent_premise]
            for main in mains:
                pool = [inst.distractors[0], inst.distractors[1], main]
                for _ in range(2):
                    new = []
                    for a, b in itertools.permutations(pool, 2):
                        try:
                            new.extend(d.conclusion for d in derive(a, b))
                        except EvidenceOverlapError:
                            continue
                    pool.extend(new)
                assert target_statement not in {j.statement() for j in pool}

    def test_serialization_round_trip(self):
        inst = gen_instance(123)
        record = json.loads(json.dumps(instance_to_dict(inst, "i-0")))
        assert instance_from_dict(record) == inst


class TestGenDataset:
    def test_uniform_pattern_counts(self):
        instances = gen_dataset(39, 100, uniform=True)
        counts = Counter(inst.step1.pattern for inst in instances)
        assert set(counts) == set(ALL_PATTERNS)
        assert all(c in (11, 12) for c in counts.values())

    def test_singleton(self):
        assert len(gen_dataset(1, 1)) == 1

    def test_deterministic(self):
        a = [instance_to_dict(i, str(n)) for n, i in enumerate(gen_dataset(5, 20))]
        b = [instance_to_dict(i, str(n)) for n, i in enumerate(gen_dataset(5, 20))]
        assert a == b

    def test_size_validated(self):
        with pytest.raises(ConfigError):
            gen_dataset(1, 0)


class TestPartitionRules:
    def test_three_way_split(self):
        split = partition_rules(39, 3)
        assert [len(s) for s in split.subsets] == [3, 3, 3]
        merged = [p for subset in split.subsets for p in subset]
        assert sorted(p.key for p in merged) == sorted(p.key for p in ALL_PATTERNS)

    def test_extremes(self):
        assert [len(s) for s in partition_rules(0, 1).subsets] == [9]
        assert [len(s) for s in partition_rules(0, 9).subsets] == [1] * 9

    @pytest.mark.parametrize("k", [2, 4, 5, 6, 7, 8])
    def test_all_k_disjoint_cover(self, k):
        split = partition_rules(7, k)
        merged = [p for subset in split.subsets for p in subset]
        assert len(merged) == 9 and len(set(merged)) == 9
        sizes = [len(s) for s in split.subsets]
        assert max(sizes) - min(sizes) <= 1

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            partition_rules(0, 0)
        with pytest.raises(ValueError):
            partition_rules(0, 10)
