"""Combining answers from several models: selection and step recomposition.

Three strategy families over k models answering the same instance:

* single model: each model's own answer (strategies m1..mk);
* best of models (mb_k): the answer whose grade is highest among the k
  originals, unparseable ones entering at the floor grade;
* recomposed best (mb_k^2): every pairing of one model's step 1 with
  another's step 2 is graded from scratch and the best pairing wins.
  Unparseable answers contribute no steps, so they are skipped rather than
  carried at the floor.

Selection uses either the label-free conformity grade or the final grade;
ties break deterministically toward the lexicographically smallest
(step-1 model, step-2 model) source pair.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

from .answers import AnswerDoc, parse_answer
from .grading import GradeReport, Reference, floor_report, grade_doc, grade_single_step
from .repair import PolicyLike, as_policy

SELECTION_METRICS = ("conformity", "final")


@dataclass(frozen=True)
class CandidateAnswer:
    """An original or recomposed answer: (step-1 model, step-2 model) plus grades."""

    source: tuple[str, str]
    doc: Optional[AnswerDoc]
    report: GradeReport

    @property
    def original(self) -> bool:
        return self.source[0] == self.source[1]


def _metric_value(report: GradeReport, metric: str) -> float:
    if metric == "conformity":
        return report.conformity
    if metric == "final":
        if report.final is None:
            raise ValueError("metric 'final' requires labels")
        return report.final
    raise ValueError(f"unknown selection metric {metric!r}; use one of {SELECTION_METRICS}")


def recompose(
    parsed: Mapping[str, AnswerDoc],
    label: Optional[Reference] = None,
    capacity: int = 8,
    min_step_score: float = 0.0,
) -> list[CandidateAnswer]:
    """All (step-1 from i, step-2 from j) pairings over the parseable answers.

    The (i, i) pairing reproduces model i's original document exactly.  Every
    candidate is graded from scratch, so cross-model pairings earn their
    inter-step grade on genuine coherence.  A positive min_step_score drops
    steps whose own single-step grade falls below it before pairing, pruning
    unreliable parts of the grid.
    """
    models = sorted(parsed)
    step1_models = step2_models = models
    if min_step_score > 0.0:
        step1_models = [m for m in models if grade_single_step(parsed[m].step1, capacity) >= min_step_score]
        step2_models = [m for m in models if grade_single_step(parsed[m].step2, capacity) >= min_step_score]
    out = []
    for i in step1_models:
        for j in step2_models:
            doc = AnswerDoc(step1=parsed[i].step1, step2=parsed[j].step2)
            report = grade_doc(doc, label=label, capacity=capacity)
            out.append(CandidateAnswer(source=(i, j), doc=doc, report=report))
    return out


def select_best(candidates: Sequence[CandidateAnswer], metric: str = "conformity") -> CandidateAnswer:
    """Highest-scoring candidate; deterministic tie-break on the source pair."""
    if not candidates:
        raise ValueError("cannot select from an empty candidate list")
    return min(candidates, key=lambda c: (-_metric_value(c.report, metric), c.source))


@dataclass(frozen=True)
class StrategyOutcome:
    strategy: str
    stream: str  # "raw" or "repaired"
    source: Optional[tuple[str, str]]
    report: GradeReport
    metric: str = "conformity"  # selection metric the strategy used


def _parse_all(
    responses: Mapping[str, str],
    policy: PolicyLike,
) -> tuple[dict[str, AnswerDoc], dict[str, tuple[bool, bool]]]:
    """Parse each model's text under a repair policy; None policy = raw parsing."""
    resolved = as_policy(policy)
    docs: dict[str, AnswerDoc] = {}
    flags: dict[str, tuple[bool, bool]] = {}
    for model, text in responses.items():
        parsed = parse_answer(text if isinstance(text, str) else "")
        repaired = False
        if not parsed.ok and resolved is not None:
            repaired = True
            parsed = parse_answer(resolved.repair(text if isinstance(text, str) else ""))
        if parsed.ok:
            docs[model] = parsed.doc
        flags[model] = (repaired, parsed.fallback_keys if parsed.ok else False)
    return docs, flags


def evaluate_strategies(
    responses: Mapping[str, str],
    label: Optional[Reference] = None,
    repair_policy: PolicyLike = "deterministic",
    metric: str = "conformity",
    capacity: int = 8,
) -> list[StrategyOutcome]:
    """All strategy outcomes for one instance, for raw and repaired parsing.

    Emits, per stream: one outcome per model (m1..mk in roster order), one
    best-of-originals outcome (mb<k>), and one recomposed-best outcome
    (mb<k*k>).  A bad answer never aborts the run; it enters at the floor.
    """
    models = list(responses)
    k = len(models)
    if k < 1:
        raise ValueError("need at least one model response")
    streams: list[tuple[str, PolicyLike]] = [("raw", None)]
    if as_policy(repair_policy) is not None:
        streams.append(("repaired", repair_policy))
    # k = 1 would make the two ensemble strategy names collide
    recomposed_name = f"mb{k * k}" if k > 1 else "mb1r"

    out: list[StrategyOutcome] = []
    for stream_name, policy in streams:
        docs, flags = _parse_all(responses, policy)
        originals: list[CandidateAnswer] = []
        for idx, model in enumerate(models, start=1):
            repaired, fallback = flags[model]
            if model in docs:
                report = grade_doc(
                    docs[model], label=label, capacity=capacity,
                    repaired=repaired, fallback_keys=fallback,
                )
            else:
                report = floor_report(repaired=repaired)
            candidate = CandidateAnswer(source=(model, model), doc=docs.get(model), report=report)
            originals.append(candidate)
            out.append(StrategyOutcome(f"m{idx}", stream_name, candidate.source, report, metric))

        best = select_best(originals, metric)
        out.append(StrategyOutcome(f"mb{k}", stream_name, best.source, best.report, metric))

        grid = recompose(docs, label=label, capacity=capacity)
        if grid:
            best_grid = select_best(grid, metric)
            out.append(StrategyOutcome(recomposed_name, stream_name, best_grid.source, best_grid.report, metric))
        else:
            out.append(StrategyOutcome(recomposed_name, stream_name, None, floor_report(), metric))
    return out
