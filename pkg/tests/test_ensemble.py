import pytest

from nalbench.answers import parse_answer, serialize_answer
from nalbench.ensemble import (
    CandidateAnswer,
    evaluate_strategies,
    recompose,
    select_best,
)
from nalbench.generate import gen_instance, ground_truth_answer, instance_to_dict
from nalbench.grading import FLOOR_GRADE, grade_doc, label_record
from nalbench.mock import MockModel


def _mock_responses(seed, kinds):
    """Raw texts from three mocks answering the same instance."""
    inst = gen_instance(seed)
    record = instance_to_dict(inst, f"i-{seed:04d}")
    texts = {}
    for i, mock in enumerate(kinds, start=1):
        texts[f"model{i}"] = mock.respond(record)
    return inst, texts


THREE_NOISY = (
    MockModel("model1", kind="noisy", f_delta=0.25, noise_rate=0.3, seed=11),
    MockModel("model2", kind="noisy", f_delta=0.25, noise_rate=0.6, seed=12),
    MockModel("model3", kind="noisy", f_delta=0.25, noise_rate=0.9, seed=13),
)


class TestRecompose:
    def test_full_grid(self):
        inst, texts = _mock_responses(1, THREE_NOISY)
        parsed = {m: parse_answer(t).doc for m, t in texts.items()}
        grid = recompose(parsed, label=label_record(inst.target))
        assert len(grid) == 9
        assert {c.source for c in grid} == {
            (i, j) for i in parsed for j in parsed
        }

    def test_diagonal_reproduces_original(self):
        inst, texts = _mock_responses(2, THREE_NOISY)
        parsed = {m: parse_answer(t).doc for m, t in texts.items()}
        label = label_record(inst.target)
        grid = {c.source: c for c in recompose(parsed, label=label)}
        for model, doc in parsed.items():
            diag = grid[(model, model)]
            assert diag.doc == doc
            assert serialize_answer(diag.doc) == serialize_answer(doc)
            assert diag.report == grade_doc(doc, label=label)

    def test_unparseable_slots_skipped(self):
        inst, texts = _mock_responses(3, THREE_NOISY)
        parsed = {m: parse_answer(t).doc for m, t in texts.items()}
        del parsed["model2"]
        grid = recompose(parsed, label=label_record(inst.target))
        assert len(grid) == 4

    def test_empty_answers_empty_grid(self):
        assert recompose({}, label=None) == []

    def test_min_step_score_prunes_unreliable_steps(self):
        inst, texts = _mock_responses(9, THREE_NOISY)
        parsed = {m: parse_answer(t).doc for m, t in texts.items()}
        label = label_record(inst.target)
        full = recompose(parsed, label=label)
        pruned = recompose(parsed, label=label, min_step_score=1.1)
        assert len(full) == 9 and pruned == []
        # a threshold at 0 keeps the whole grid
        assert len(recompose(parsed, label=label, min_step_score=0.0)) == 9


def _candidate(score, source):
    inst = gen_instance(0)
    doc = ground_truth_answer(inst)
    report = grade_doc(doc, label=label_record(inst.target))
    forced = type(report)(
        step1=score, step2=1.0, inter_step=1.0, conformity=score,
        ground_truth=score, final=score, parse_ok=True,
    )
    return CandidateAnswer(source=source, doc=doc, report=forced)


class TestSelectBest:
    def test_argmax(self):
        picked = select_best(
            [_candidate(0.2, ("a", "a")), _candidate(0.5, ("b", "b")), _candidate(0.9, ("c", "c"))],
            metric="final",
        )
        assert picked.source == ("c", "c")

    def test_tie_breaks_on_source_order(self):
        picked = select_best(
            [_candidate(0.5, ("b", "a")), _candidate(0.5, ("a", "b")), _candidate(0.5, ("a", "c"))],
            metric="final",
        )
        assert picked.source == ("a", "b")

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            select_best([], metric="final")

    def test_final_without_labels_rejected(self):
        inst = gen_instance(0)
        doc = ground_truth_answer(inst)
        candidate = CandidateAnswer(("a", "a"), doc, grade_doc(doc))
        with pytest.raises(ValueError):
            select_best([candidate], metric="final")

    def test_unknown_metric_rejected(self):
        with pytest.raises(ValueError):
            select_best([_candidate(0.5, ("a", "a"))], metric="vibes")


class TestEvaluateStrategies:
    def test_strategy_streams(self):
        inst, texts = _mock_responses(4, THREE_NOISY)
        outcomes = evaluate_strategies(
            texts, label=label_record(inst.target), repair_policy="deterministic", metric="final"
        )
        seen = {(o.strategy, o.stream) for o in outcomes}
        strategies = {"m1", "m2", "m3", "mb3", "mb9"}
        assert seen == {(s, stream) for s in strategies for stream in ("raw", "repaired")}

    def test_dominance_on_parseable_answers(self):
        for seed in range(30):
            inst, texts = _mock_responses(seed, THREE_NOISY)
            outcomes = evaluate_strategies(
                texts, label=label_record(inst.target), repair_policy=None, metric="final"
            )
            finals = {o.strategy: o.report.final for o in outcomes if o.stream == "raw"}
            singles = max(finals["m1"], finals["m2"], finals["m3"])
            assert finals["mb9"] >= finals["mb3"] >= singles

    def test_recomposed_source_tracks_models(self):
        inst, texts = _mock_responses(6, THREE_NOISY)
        outcomes = evaluate_strategies(
            texts, label=label_record(inst.target), repair_policy=None, metric="final"
        )
        mb9 = next(o for o in outcomes if o.strategy == "mb9")
        assert mb9.source[0] in texts and mb9.source[1] in texts

    def test_unparseable_model_floors_single_but_not_grid(self):
        inst, texts = _mock_responses(7, THREE_NOISY)
        texts["model2"] = texts["model2"][:-5]
        assert not parse_answer(texts["model2"]).ok
        outcomes = evaluate_strategies(
            texts, label=label_record(inst.target), repair_policy=None, metric="final"
        )
        raw = {o.strategy: o for o in outcomes if o.stream == "raw"}
        assert raw["m2"].report.final == FLOOR_GRADE
        assert not raw["m2"].report.parse_ok
        assert "model2" not in (raw["mb9"].source or ())

    def test_all_unparseable_floors_everything(self):
        outcomes = evaluate_strategies(
            {"a": "{", "b": "", "c": "garbage"}, label=None, repair_policy=None, metric="conformity"
        )
        for outcome in outcomes:
            assert outcome.report.conformity == FLOOR_GRADE

    def test_raw_and_repaired_differ_only_on_failures(self):
        breaker = (
            MockModel("model1", kind="echo"),
            MockModel("model2", kind="noisy", f_delta=0.25, noise_rate=0.5, seed=2),
            MockModel("model3", kind="noisy", f_delta=0.25, noise_rate=0.5, break_rate=1.0, seed=3),
        )
        inst, texts = _mock_responses(8, breaker)
        outcomes = evaluate_strategies(
            texts, label=label_record(inst.target), repair_policy="deterministic", metric="final"
        )
        by_key = {(o.strategy, o.stream): o.report for o in outcomes}
        for strategy in ("m1", "m2"):
            assert by_key[(strategy, "raw")].final == by_key[(strategy, "repaired")].final
        assert by_key[("m3", "raw")].final == FLOOR_GRADE
        assert by_key[("m3", "repaired")].final > FLOOR_GRADE
        assert by_key[("m3", "repaired")].repaired
