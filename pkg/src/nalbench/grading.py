"""Scoring of structured answers: step level, chain level, and against a label.

Sentences are compared indicator by indicator.  Categorical indicators
(s, o, cp, eb, r) earn 5 points on exact match and 0 otherwise; eb is
compared as a set, similarity statements order-insensitively, and r by rule
family.  Numerical indicators (f, c) earn up to 25 points on a banded
scale of the absolute difference from the reference:

    diff <= 0.05   full credit, 25
    diff >= 0.2    no credit, 0 (a category-level mistake)
    otherwise      (0.1 + 0.9 * (1 - (diff - 0.05)/0.15))^2 * 25

Single-step references come from re-deriving the conclusions of the
premises the answer itself states, so the grade measures rule-following
rather than transcription from the problem text.  Multiple candidate
conclusions are matched to references by an optimal assignment.  A grade
is always points over the maximum available points; the floor grade 0.1 is
reserved for answers that fail to parse at all.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Union

import scipy.optimize

from .answers import (
    AnswerDoc,
    AnswerStep,
    SentenceRecord,
    judgment_from_record,
    parse_answer,
    record_from_judgment,
)
from .nal import Copula, Derivation, EvidenceOverlapError, Judgment, derive
from .repair import PolicyLike, as_policy

FLOOR_GRADE = 0.1
CATEGORICAL_POINTS = 5.0
NUMERIC_POINTS = 25.0
ALL_INDICATORS = ("s", "o", "cp", "eb", "r", "f", "c")
INTER_STEP_INDICATORS = ("s", "o", "cp", "eb", "f", "c")

_NUMERIC = frozenset(("f", "c"))


def indicator_max(indicators: Sequence[str]) -> float:
    return sum(NUMERIC_POINTS if i in _NUMERIC else CATEGORICAL_POINTS for i in indicators)


# absorbs float subtraction noise at the band edges (|0.5 - 0.7| != 0.2)
_BAND_EPS = 1e-12


def score_numeric(candidate: float, reference: float) -> float:
    """Banded credit in [0, 25] for a numerical indicator."""
    diff = abs(candidate - reference)
    if diff <= 0.05 + _BAND_EPS:
        return NUMERIC_POINTS
    if diff >= 0.2 - _BAND_EPS:
        return 0.0
    return (0.1 + 0.9 * (1.0 - (diff - 0.05) / 0.15)) ** 2 * NUMERIC_POINTS


def _term_orientation(candidate: SentenceRecord, ref: SentenceRecord) -> tuple[str, str]:
    """Candidate (s, o) in the orientation that best matches the reference.

    When either statement is symmetric its term order carries no meaning, so
    the flipped orientation is allowed; two inheritance statements compare
    directionally.
    """
    direct = (candidate.s == ref.s) + (candidate.o == ref.o)
    symmetric = Copula.SIMILARITY.token in (candidate.cp, ref.cp)
    if symmetric:
        flipped = (candidate.o == ref.s) + (candidate.s == ref.o)
        if flipped > direct:
            return candidate.o, candidate.s
    return candidate.s, candidate.o


@dataclass(frozen=True)
class MatchScore:
    points: float
    max_points: float
    breakdown: tuple[tuple[str, float], ...]

    @property
    def grade(self) -> float:
        return self.points / self.max_points if self.max_points else 0.0


Reference = Union[SentenceRecord, Judgment, Derivation]


def as_record(reference: Reference) -> SentenceRecord:
    if isinstance(reference, SentenceRecord):
        return reference
    if isinstance(reference, Derivation):
        return record_from_judgment(reference.conclusion, rule=reference.rule.family.value)
    return record_from_judgment(reference)


def score_sentence(
    candidate: SentenceRecord,
    reference: Reference,
    indicators: Sequence[str] = ALL_INDICATORS,
) -> MatchScore:
    ref = as_record(reference)
    cand_s, cand_o = _term_orientation(candidate, ref)
    ref_s, ref_o = ref.s, ref.o
    breakdown = []
    for ind in indicators:
        if ind == "s":
            pts = CATEGORICAL_POINTS if cand_s == ref_s else 0.0
        elif ind == "o":
            pts = CATEGORICAL_POINTS if cand_o == ref_o else 0.0
        elif ind == "cp":
            pts = CATEGORICAL_POINTS if candidate.cp == ref.cp else 0.0
        elif ind == "eb":
            pts = CATEGORICAL_POINTS if set(candidate.eb) == set(ref.eb) else 0.0
        elif ind == "r":
            matched = candidate.r is not None and ref.r is not None and candidate.r == ref.r
            pts = CATEGORICAL_POINTS if matched else 0.0
        elif ind == "f":
            pts = score_numeric(candidate.f, ref.f)
        elif ind == "c":
            pts = score_numeric(candidate.c, ref.c)
        else:
            raise ValueError(f"unknown indicator {ind!r}")
        breakdown.append((ind, pts))
    points = sum(p for _, p in breakdown)
    return MatchScore(points, indicator_max(indicators), tuple(breakdown))


@dataclass(frozen=True)
class ResultMatch:
    """Optimal candidate-to-reference assignment and its total score."""

    pairs: tuple[tuple[int, int], ...]  # (candidate index, reference index)
    score: MatchScore


def match_results(
    candidates: Sequence[SentenceRecord],
    references: Sequence[Reference],
    indicators: Sequence[str] = ALL_INDICATORS,
) -> ResultMatch:
    """Assign candidates to references maximizing total points.

    Unmatched candidates earn nothing; every reference contributes its full
    per-sentence maximum to max_points whether matched or not.
    """
    per_ref_max = indicator_max(indicators)
    max_points = per_ref_max * len(references)
    if not candidates or not references:
        return ResultMatch((), MatchScore(0.0, max_points, ()))
    matrix = [
        [score_sentence(cand, ref, indicators).points for ref in references]
        for cand in candidates
    ]
    rows, cols = scipy.optimize.linear_sum_assignment(matrix, maximize=True)
    pairs = tuple(zip((int(r) for r in rows), (int(c) for c in cols)))
    points = sum(matrix[r][c] for r, c in pairs)
    return ResultMatch(pairs, MatchScore(points, max_points, ()))


# ---------------------------------------------------------------------------
# Step and document grades
# ---------------------------------------------------------------------------


def _engine_references(step: AnswerStep, capacity: int) -> list[Derivation]:
    """Conclusions the engine derives from the premises the answer states.

    Premises that do not form valid judgments, share no term, or carry
    overlapping evidence yield no references.
    """
    try:
        j1 = judgment_from_record(step.premise1, capacity)
        j2 = judgment_from_record(step.premise2, capacity)
        return derive(j1, j2)
    except (ValueError, EvidenceOverlapError):
        return []


def grade_single_step(step: AnswerStep, capacity: int = 8) -> float:
    references = _engine_references(step, capacity)
    if not references:
        return 0.0
    return match_results(step.results, references, ALL_INDICATORS).score.grade


def grade_inter_step(doc: AnswerDoc) -> float:
    """Best pairing of any step-1 conclusion with any step-2 premise."""
    results = doc.step1.results
    if not results:
        return 0.0
    premises = (doc.step2.premise1, doc.step2.premise2)
    best = max(
        score_sentence(premise, result, INTER_STEP_INDICATORS).grade
        for result in results
        for premise in premises
    )
    return best


def grade_ground_truth(doc: AnswerDoc, label: Reference) -> float:
    results = doc.step2.results
    if not results:
        return 0.0
    return max(score_sentence(cand, label, ALL_INDICATORS).grade for cand in results)


@dataclass(frozen=True)
class GradeReport:
    step1: float
    step2: float
    inter_step: float
    conformity: float
    ground_truth: Optional[float]
    final: Optional[float]
    parse_ok: bool
    repaired: bool = False
    fallback_keys: bool = False

    def as_dict(self) -> dict:
        return {
            "step1": self.step1,
            "step2": self.step2,
            "inter_step": self.inter_step,
            "conformity": self.conformity,
            "ground_truth": self.ground_truth,
            "final": self.final,
            "parse_ok": self.parse_ok,
            "repaired": self.repaired,
            "fallback_keys": self.fallback_keys,
        }


def floor_report(repaired: bool = False) -> GradeReport:
    """All grades at the 0.1 floor; used when parsing fails.

    The floor replaces the composites outright (final is 0.1, not 0.1^3).
    """
    return GradeReport(
        step1=FLOOR_GRADE,
        step2=FLOOR_GRADE,
        inter_step=FLOOR_GRADE,
        conformity=FLOOR_GRADE,
        ground_truth=FLOOR_GRADE,
        final=FLOOR_GRADE,
        parse_ok=False,
        repaired=repaired,
    )


def grade_doc(
    doc: AnswerDoc,
    label: Optional[Reference] = None,
    capacity: int = 8,
    repaired: bool = False,
    fallback_keys: bool = False,
) -> GradeReport:
    """Grade an already-parsed answer document."""
    s1 = grade_single_step(doc.step1, capacity)
    s2 = grade_single_step(doc.step2, capacity)
    inter = grade_inter_step(doc)
    conformity = s1 * s2 * inter
    gt = grade_ground_truth(doc, label) if label is not None else None
    final = conformity * gt if gt is not None else None
    return GradeReport(
        step1=s1,
        step2=s2,
        inter_step=inter,
        conformity=conformity,
        ground_truth=gt,
        final=final,
        parse_ok=True,
        repaired=repaired,
        fallback_keys=fallback_keys,
    )


def grade_overall(
    text: str,
    label: Optional[Reference] = None,
    repair_policy: PolicyLike = None,
    capacity: int = 8,
) -> GradeReport:
    """Parse (repairing if configured and needed) and grade raw model text.

    Every input yields a report; unparseable text gets the 0.1 floor on all
    grades.
    """
    parsed = parse_answer(text)
    repaired = False
    policy = as_policy(repair_policy)
    if not parsed.ok and policy is not None:
        repaired = True
        parsed = parse_answer(policy.repair(text))
    if not parsed.ok:
        return floor_report(repaired=repaired)
    return grade_doc(
        parsed.doc,
        label=label,
        capacity=capacity,
        repaired=repaired,
        fallback_keys=parsed.fallback_keys,
    )


def label_record(target: Derivation) -> SentenceRecord:
    """The reference record for an instance's target conclusion."""
    return record_from_judgment(target.conclusion, rule=target.rule.family.value)
