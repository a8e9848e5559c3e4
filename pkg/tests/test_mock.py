import json

import pytest

from nalbench.answers import parse_answer
from nalbench.generate import gen_dataset, instance_to_dict
from nalbench.grading import grade_overall, label_record
from nalbench.mock import MockModel, mock_ask, parse_mock_spec, shift_value
from nalbench.repair import deterministic_repair
from nalbench.generate import instance_from_dict
from nalbench.client import read_response_file


@pytest.fixture(scope="module")
def records():
    return [instance_to_dict(inst, f"i-{n:03d}") for n, inst in enumerate(gen_dataset(2, 20, uniform=True))]


class TestShiftValue:
    @pytest.mark.parametrize("x", [0.0, 0.25, 0.5, 0.75, 1.0, 0.81, 0.448])
    def test_moves_exactly_delta(self, x):
        assert abs(shift_value(x, 0.25) - x) == pytest.approx(0.25, abs=1e-12)
        assert 0.0 <= shift_value(x, 0.25) <= 1.0


class TestMockModel:
    def test_echo_reproduces_ground_truth(self, records):
        mock = MockModel("m", kind="echo")
        for record in records[:5]:
            assert json.loads(mock.respond(record)) == record["answer"]

    def test_deterministic_per_instance(self, records):
        mock = MockModel("m", kind="noisy", f_delta=0.25, noise_rate=0.5, seed=9)
        assert mock.respond(records[0]) == mock.respond(records[0])

    def test_noisy_output_stays_parseable(self, records):
        mock = MockModel("m", kind="noisy", f_delta=0.25, noise_rate=1.0, seed=9)
        for record in records:
            assert parse_answer(mock.respond(record)).ok

    def test_noisy_lowers_final_grade(self, records):
        mock = MockModel("m", kind="noisy", f_delta=0.25, noise_rate=1.0, seed=9)
        for record in records[:5]:
            inst = instance_from_dict(record)
            report = grade_overall(mock.respond(record), label=label_record(inst.target))
            assert report.final < 1.0

    def test_subset_competence(self, records):
        patterns = {record["step1"]["pattern"] for record in records}
        competent = tuple(sorted(patterns))[:3]
        mock = MockModel("m", kind="subset", f_delta=0.25, competent_patterns=competent)
        for record in records:
            inst = instance_from_dict(record)
            report = grade_overall(mock.respond(record), label=label_record(inst.target))
            if record["step1"]["pattern"] in competent:
                assert report.final == 1.0
            else:
                assert report.final < 1.0

    def test_break_rate_produces_repairable_text(self, records):
        mock = MockModel("m", kind="echo", break_rate=1.0, seed=1)
        text = mock.respond(records[0])
        assert not parse_answer(text).ok
        assert parse_answer(deterministic_repair(text)).ok

    def test_subset_requires_patterns(self):
        with pytest.raises(ValueError):
            MockModel("m", kind="subset")

    def test_unknown_kind_rejected(self):
        with pytest.raises(ValueError):
            MockModel("m", kind="clairvoyant")


class TestMockAsk:
    def test_response_file_shape(self, records, tmp_path):
        mock = MockModel("mockX", kind="echo")
        out = mock_ask(records, mock, tmp_path / "resp.jsonl", dataset_digest="d1")
        manifest, rows = read_response_file(out)
        assert manifest["endpoint"]["mock"] is True
        assert manifest["dataset_sha256"] == "d1"
        assert set(rows) == {record["id"] for record in records}


class TestSpecParsing:
    def test_full_spec(self):
        mock = parse_mock_spec(
            "id=alpha,kind=subset,patterns=sub+obj|sim+sim,f_delta=0.3,seed=5,break_rate=0.1"
        )
        assert mock.model_id == "alpha"
        assert mock.kind == "subset"
        assert mock.competent_patterns == ("sub+obj", "sim+sim")
        assert mock.f_delta == 0.3 and mock.seed == 5 and mock.break_rate == 0.1

    def test_defaults(self):
        mock = parse_mock_spec("kind=echo", default_index=2)
        assert mock.model_id == "mock2"

    def test_bad_entries(self):
        with pytest.raises(ValueError):
            parse_mock_spec("kind")
        with pytest.raises(ValueError):
            parse_mock_spec("sorcery=9")
