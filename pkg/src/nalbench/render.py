"""Rendering logic instances into natural-language problems and chat prompts.

A rendered problem discloses exactly five premise sentences (the two step-1
premises, the independent step-2 premise, and the two distractors) in an
order shuffled by the render seed, plus the question: the target statement
without any frequency wording.  Premise roles, rules, truth values of the
target, and evidential-base ids are never disclosed.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Optional, Sequence

from .answers import SCHEMA_GUIDE, AnswerDoc, serialize_answer
from .generate import LogicInstance
from .nal import Copula, Judgment
from .templates import TemplateSet, discretize_frequency

TASK_INSTRUCTIONS = (
    "You are given a list of premise sentences in natural language, followed by "
    "a question statement. Restate the relevant premises as logic sentences, "
    "reason in exactly two syllogistic steps, and report every conclusion each "
    "step licenses. Unique entity names such as ID_0042 must be copied "
    "verbatim. Translate the verbal frequency wording of each premise into a "
    "numeric frequency f (never: 0.0, rarely: 0.25, unknown: 0.5, usually: "
    "0.75, always: 1.0) and use the default confidence 0.9 for restated "
    "premises. Number the premises in order of appearance, starting from 1, to "
    "form their evidential bases.\n\n"
    + SCHEMA_GUIDE
)


@dataclass(frozen=True)
class RenderedProblem:
    instance_id: str
    premises: tuple[str, ...]
    question: str
    render_seed: int

    @property
    def problem_text(self) -> str:
        return "\n".join(f"{i + 1}. {s}" for i, s in enumerate(self.premises))


def _statement_text(j: Judgment, templates: TemplateSet, rng: random.Random) -> str:
    group = templates.inheritance if j.cop is Copula.INHERITANCE else templates.similarity
    return rng.choice(group).format(sub=j.sub.name, obj=j.obj.name)


def render_sentence(j: Judgment, templates: TemplateSet, rng: random.Random) -> str:
    """One premise sentence: a copula phrasing wrapped in a frequency phrasing."""
    statement = _statement_text(j, templates, rng)
    category = discretize_frequency(j.truth.f)
    phrase = rng.choice(templates.frequency[category])
    return phrase.format(statement=statement)


def render_question(j: Judgment, templates: TemplateSet, rng: random.Random) -> str:
    """The queried statement, framed without any frequency wording."""
    frame = rng.choice(templates.question)
    return frame.format(statement=_statement_text(j, templates, rng))


def render_problem(
    inst: LogicInstance,
    templates: TemplateSet,
    render_seed: int,
    instance_id: str = "",
) -> RenderedProblem:
    rng = random.Random(render_seed)
    disclosed = list(inst.disclosed_premises())
    rng.shuffle(disclosed)
    premises = tuple(render_sentence(j, templates, rng) for j in disclosed)
    question = render_question(inst.target.conclusion, templates, rng)
    return RenderedProblem(instance_id, premises, question, render_seed)


def build_prompt(
    problem: RenderedProblem,
    instructions: str = TASK_INSTRUCTIONS,
    exemplars: Sequence[tuple[str, str]] = (),
    answer: Optional[AnswerDoc] = None,
) -> list[dict]:
    """Chat messages for a rendered problem.

    Inference prompts hold an instruction message and a user message;
    passing the ground-truth answer appends the assistant turn used in
    fine-tuning exports.  Optional exemplars are (user, assistant) text
    pairs inserted before the real problem.
    """
    messages = [{"role": "system", "content": instructions}]
    for user_text, assistant_text in exemplars:
        messages.append({"role": "user", "content": user_text})
        messages.append({"role": "assistant", "content": assistant_text})
    user = f"{problem.problem_text}\n\n{problem.question}"
    messages.append({"role": "user", "content": user})
    if answer is not None:
        messages.append({"role": "assistant", "content": serialize_answer(answer)})
    return messages
