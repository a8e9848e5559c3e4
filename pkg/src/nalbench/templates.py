"""Natural-language template sets and frequency discretization.

A template set ships as a human-editable JSON file with 20 phrasings per
copula, 5 verbal frequency categories of 5 phrasings each, and at least one
question frame.  The loader validates those counts and the slot structure,
so replacing the wording never changes the combinatorial capacity:
20 x 5 x 5 = 500 surface forms per premise sentence and 500^5 x 20 per
problem.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Mapping, Optional, Sequence

COPULA_TEMPLATE_COUNT = 20
PHRASES_PER_CATEGORY = 5


class TemplateError(ValueError):
    """Template file violates the required structure."""


class FreqCategory(Enum):
    ALWAYS_FALSE = "always_false"
    USUALLY_FALSE = "usually_false"
    UNKNOWN = "unknown"
    USUALLY_TRUE = "usually_true"
    ALWAYS_TRUE = "always_true"


_CATEGORY_ORDER = (
    FreqCategory.ALWAYS_FALSE,
    FreqCategory.USUALLY_FALSE,
    FreqCategory.UNKNOWN,
    FreqCategory.USUALLY_TRUE,
    FreqCategory.ALWAYS_TRUE,
)


def discretize_frequency(f: float) -> FreqCategory:
    """Bin a frequency into the five verbal categories (0.2-wide bins, top closed)."""
    if not 0.0 <= f <= 1.0:
        raise ValueError(f"frequency out of range: {f}")
    if f < 0.2:
        return FreqCategory.ALWAYS_FALSE
    if f < 0.4:
        return FreqCategory.USUALLY_FALSE
    if f < 0.6:
        return FreqCategory.UNKNOWN
    if f < 0.8:
        return FreqCategory.USUALLY_TRUE
    return FreqCategory.ALWAYS_TRUE


def _slot_count(template: str, slot: str) -> int:
    return len(re.findall(re.escape("{" + slot + "}"), template))


def _check_slots(templates: Sequence[str], slots: Sequence[str], where: str) -> None:
    for t in templates:
        for slot in slots:
            if _slot_count(t, slot) != 1:
                raise TemplateError(f"{where}: template must use {{{slot}}} exactly once: {t!r}")


@dataclass(frozen=True)
class TemplateSet:
    inheritance: tuple[str, ...]
    similarity: tuple[str, ...]
    frequency: Mapping[FreqCategory, tuple[str, ...]]
    question: tuple[str, ...]

    def __post_init__(self) -> None:
        for name, group in (("inheritance", self.inheritance), ("similarity", self.similarity)):
            if len(group) != COPULA_TEMPLATE_COUNT:
                raise TemplateError(f"{name}: expected {COPULA_TEMPLATE_COUNT} templates, got {len(group)}")
            _check_slots(group, ("sub", "obj"), name)
        if set(self.frequency) != set(FreqCategory):
            missing = sorted(c.value for c in set(FreqCategory) - set(self.frequency))
            raise TemplateError(f"frequency: missing categories {missing}")
        for cat, phrases in self.frequency.items():
            if len(phrases) != PHRASES_PER_CATEGORY:
                raise TemplateError(
                    f"frequency.{cat.value}: expected {PHRASES_PER_CATEGORY} phrasings, got {len(phrases)}"
                )
            _check_slots(phrases, ("statement",), f"frequency.{cat.value}")
        if not self.question:
            raise TemplateError("question: at least one frame is required")
        _check_slots(self.question, ("statement",), "question")

    @property
    def total_frequency_phrasings(self) -> int:
        return sum(len(v) for v in self.frequency.values())

    def per_sentence_capacity(self) -> int:
        """Distinct surface forms one premise slot can take: 20 x 5 x 5."""
        return COPULA_TEMPLATE_COUNT * self.total_frequency_phrasings

    def per_problem_capacity(self, premises: int = 5) -> int:
        """Surface forms per problem: capacity^premises x 20 question statements."""
        return self.per_sentence_capacity() ** premises * COPULA_TEMPLATE_COUNT


def _parse_payload(payload: dict) -> TemplateSet:
    try:
        frequency = {
            FreqCategory(cat): tuple(phrases)
            for cat, phrases in payload["frequency"].items()
        }
        return TemplateSet(
            inheritance=tuple(payload["inheritance"]),
            similarity=tuple(payload["similarity"]),
            frequency=frequency,
            question=tuple(payload["question"]),
        )
    except (KeyError, ValueError, TypeError) as exc:
        if isinstance(exc, TemplateError):
            raise
        raise TemplateError(f"malformed template file: {exc}") from exc


def load_templates(path: Optional[str | Path] = None) -> TemplateSet:
    """Load and validate a template set; the packaged defaults when no path given."""
    if path is None:
        text = resources.files("nalbench").joinpath("data/templates.json").read_text("utf-8")
    else:
        text = Path(path).read_text("utf-8")
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise TemplateError(f"template file is not valid JSON: {exc}") from exc
    if not isinstance(payload, dict):
        raise TemplateError("template file must hold a JSON object")
    return _parse_payload(payload)
