"""Mock models for end-to-end runs without a live endpoint.

A mock answers from the dataset's own ground truth, optionally degraded:

* echo: the ground-truth answer verbatim;
* noisy: each result sentence is corrupted with some probability by
  shifting its frequency (and optionally confidence) a fixed distance;
* subset: competent only on instances whose step-1 pattern belongs to its
  subset; elsewhere every result sentence's frequency is shifted.

A break rate emits some answers with the final brace removed, exercising
the repair path.  All randomness is keyed on (seed, model, instance), so a
mock run is fully reproducible.
"""

from __future__ import annotations

import json
import random
from copy import deepcopy
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .jsonl import write_jsonl

MOCK_KINDS = ("echo", "noisy", "subset")


def shift_value(x: float, delta: float) -> float:
    """Move x by exactly delta, staying inside [0, 1]."""
    return x + delta if x + delta <= 1.0 else x - delta


CORRUPTION_SITES = {"results": ("Step 1", "Step 2"), "step2_results": ("Step 2",)}


@dataclass(frozen=True)
class MockModel:
    model_id: str
    kind: str = "echo"
    f_delta: float = 0.25
    c_delta: float = 0.0
    noise_rate: float = 1.0
    break_rate: float = 0.0
    where: str = "results"
    competent_patterns: tuple[str, ...] = ()
    seed: int = 0

    def __post_init__(self) -> None:
        if self.kind not in MOCK_KINDS:
            raise ValueError(f"unknown mock kind {self.kind!r}; use one of {MOCK_KINDS}")
        if self.where not in CORRUPTION_SITES:
            raise ValueError(f"unknown corruption site {self.where!r}; use one of {tuple(CORRUPTION_SITES)}")
        if self.kind == "subset" and not self.competent_patterns:
            raise ValueError("subset mock needs competent_patterns")

    def _rng(self, instance_id: str) -> random.Random:
        return random.Random(f"{self.seed}:{self.model_id}:{instance_id}")

    def _corrupt_sentence(self, sentence: dict) -> None:
        sentence["f"] = shift_value(sentence["f"], self.f_delta)
        if self.c_delta:
            sentence["c"] = shift_value(sentence["c"], self.c_delta)

    def respond(self, record: dict) -> str:
        """Answer text for one dataset record."""
        rng = self._rng(record["id"])
        answer = deepcopy(record["answer"])
        steps = CORRUPTION_SITES[self.where]
        if self.kind == "noisy":
            for step in steps:
                for sentence in answer[step]["Results"]:
                    if rng.random() < self.noise_rate:
                        self._corrupt_sentence(sentence)
        elif self.kind == "subset":
            if record["step1"]["pattern"] not in self.competent_patterns:
                for step in steps:
                    for sentence in answer[step]["Results"]:
                        self._corrupt_sentence(sentence)
        text = json.dumps(answer, ensure_ascii=False)
        if self.break_rate and rng.random() < self.break_rate:
            text = text.rstrip()[:-1]
        return text


def mock_ask(
    records: Sequence[dict],
    mock: MockModel,
    out_path: str | Path,
    dataset_digest: str = "",
) -> Path:
    """Response file in the same shape the live client writes."""
    manifest = {
        "manifest": True,
        "endpoint": {"mock": True, "model": mock.model_id, "kind": mock.kind, "seed": mock.seed},
        "dataset_sha256": dataset_digest,
        "prompts": len(records),
    }
    rows: list[dict] = [manifest]
    for record in records:
        rows.append(
            {
                "id": record["id"],
                "model": mock.model_id,
                "prompt_sha256": "",
                "text": mock.respond(record),
                "error": None,
                "retries": 0,
                "latency_s": 0.0,
                "cached": False,
                "ts": 0.0,
            }
        )
    return write_jsonl(out_path, rows)


def parse_mock_spec(spec: str, default_index: int = 1) -> MockModel:
    """Build a mock from a compact ``key=value,...`` string.

    Keys: id, kind, where, f_delta, c_delta, noise_rate, break_rate, seed,
    and patterns (a ``|``-separated list of pattern keys for the subset kind).
    """
    fields: dict = {}
    for part in spec.split(","):
        part = part.strip()
        if not part:
            continue
        if "=" not in part:
            raise ValueError(f"mock spec entries must be key=value, got {part!r}")
        key, value = part.split("=", 1)
        key = key.strip()
        value = value.strip()
        if key == "id":
            fields["model_id"] = value
        elif key in ("kind", "where"):
            fields[key] = value
        elif key in ("f_delta", "c_delta", "noise_rate", "break_rate"):
            fields[key] = float(value)
        elif key == "seed":
            fields["seed"] = int(value)
        elif key == "patterns":
            fields["competent_patterns"] = tuple(p for p in value.split("|") if p)
        else:
            raise ValueError(f"unknown mock spec key {key!r}")
    fields.setdefault("model_id", f"mock{default_index}")
    return MockModel(**fields)
