"""Seeded generation of two-step reasoning instances.

Each instance is built the same way: pick a premise pattern for step 1 and
instantiate it with fresh terms, derive every conclusion, pick one
conclusion and a premise slot for step 2, generate the missing independent
premise around the shared term, derive step 2, and pick the target
conclusion.  Two distractor judgments over fresh terms are added so the
problem text contains five premises.  Input truth frequencies come from a
five-value palette aligned with the five verbal frequency categories, input
confidence is fixed at 0.9, and evidential-base ids are allocated
sequentially per instance so input bases never overlap.

Everything is a pure function of (seed, config); the same inputs always
yield the same instance.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, replace

from .answers import AnswerDoc, AnswerStep, record_from_judgment
from .nal import (
    ALL_PATTERNS,
    Copula,
    Derivation,
    EvidentialBase,
    Judgment,
    PremiseShape,
    RulePattern,
    Term,
    TruthValue,
    derive,
)

FREQUENCY_PALETTE = (0.0, 0.25, 0.5, 0.75, 1.0)
INPUT_CONFIDENCE = 0.9


class ConfigError(ValueError):
    """Invalid generation configuration."""


@dataclass(frozen=True)
class GenerationConfig:
    """Knobs for instance generation; defaults match the benchmark setup."""

    allowed_patterns: tuple[RulePattern, ...] = ALL_PATTERNS
    frequencies: tuple[float, ...] = FREQUENCY_PALETTE
    input_confidence: float = INPUT_CONFIDENCE
    base_capacity: int = 8
    min_base_size: int = 1
    max_base_size: int = 3

    def __post_init__(self) -> None:
        if not self.allowed_patterns:
            raise ConfigError("allowed_patterns must be non-empty")
        if not 1 <= self.min_base_size <= self.max_base_size:
            raise ConfigError("base size bounds must satisfy 1 <= min <= max")


@dataclass(frozen=True)
class StepRecord:
    premise1: Judgment
    premise2: Judgment
    results: tuple[Derivation, ...]
    pattern: RulePattern


@dataclass(frozen=True)
class LogicInstance:
    step1: StepRecord
    step2: StepRecord
    chain_role: str  # "premise1" or "premise2": where the step-1 conclusion sits
    chain_index: int  # which step-1 result was carried forward
    distractors: tuple[Judgment, Judgment]
    target: Derivation
    target_index: int  # position of the target within step2.results
    seed: int

    @property
    def chain_conclusion(self) -> Judgment:
        return self.step1.results[self.chain_index].conclusion

    @property
    def independent_premise(self) -> Judgment:
        """The step-2 premise that is not the carried step-1 conclusion."""
        return self.step2.premise2 if self.chain_role == "premise1" else self.step2.premise1

    def disclosed_premises(self) -> tuple[Judgment, ...]:
        """The five premises a problem statement reveals, in fixed order."""
        return (
            self.step1.premise1,
            self.step1.premise2,
            self.independent_premise,
            self.distractors[0],
            self.distractors[1],
        )

    def all_terms(self) -> frozenset[Term]:
        terms: set[Term] = set()
        for j in self.disclosed_premises():
            terms |= j.terms
        return frozenset(terms)


class _TermAllocator:
    """Fresh ID_xxxx terms, drawn without repetition from a seeded pool."""

    def __init__(self, rng: random.Random, pool_size: int = 10000):
        self._numbers = iter(rng.sample(range(pool_size), 16))

    def fresh(self) -> Term:
        return Term(f"ID_{next(self._numbers):04d}")


class _EvidenceAllocator:
    """Sequential id blocks; guarantees pairwise-disjoint input bases."""

    def __init__(self, rng: random.Random, cfg: GenerationConfig):
        self._rng = rng
        self._cfg = cfg
        self._next = 1

    def fresh_base(self) -> EvidentialBase:
        size = self._rng.randint(self._cfg.min_base_size, self._cfg.max_base_size)
        ids = range(self._next, self._next + size)
        self._next += size
        return EvidentialBase.of(ids, self._cfg.base_capacity)


def _input_truth(rng: random.Random, cfg: GenerationConfig) -> TruthValue:
    return TruthValue(rng.choice(cfg.frequencies), cfg.input_confidence)


def _premise_from_shape(
    shape: PremiseShape, shared: Term, other: Term, truth: TruthValue, base: EvidentialBase
) -> Judgment:
    if shape is PremiseShape.SHARED_SUBJECT:
        return Judgment(shared, Copula.INHERITANCE, other, truth, base)
    if shape is PremiseShape.SHARED_OBJECT:
        return Judgment(other, Copula.INHERITANCE, shared, truth, base)
    return Judgment(shared, Copula.SIMILARITY, other, truth, base)


_SHAPES_FOR_COPULA = {
    Copula.INHERITANCE: (PremiseShape.SHARED_SUBJECT, PremiseShape.SHARED_OBJECT),
    Copula.SIMILARITY: (PremiseShape.SYMMETRIC,),
}


def gen_instance(seed: int, config: GenerationConfig | None = None) -> LogicInstance:
    """Generate one two-step instance; identical (seed, config) gives an identical instance."""
    cfg = config or GenerationConfig()
    rng = random.Random(seed)
    terms = _TermAllocator(rng)
    evidence = _EvidenceAllocator(rng, cfg)

    # Step 1: instantiate an allowed pattern over fresh terms M, P, S.
    pattern1 = rng.choice(cfg.allowed_patterns)
    m1, p1, s1 = terms.fresh(), terms.fresh(), terms.fresh()
    j1 = _premise_from_shape(pattern1.j1, m1, p1, _input_truth(rng, cfg), evidence.fresh_base())
    j2 = _premise_from_shape(pattern1.j2, m1, s1, _input_truth(rng, cfg), evidence.fresh_base())
    results1 = tuple(derive(j1, j2))
    step1 = StepRecord(j1, j2, results1, pattern1)

    # Step 2: carry one conclusion into a premise slot, add a fresh premise
    # sharing exactly one of its terms.
    chain_index = rng.randrange(len(results1))
    conclusion = results1[chain_index].conclusion
    chain_role = rng.choice(("premise1", "premise2"))
    carried_shape = rng.choice(_SHAPES_FOR_COPULA[conclusion.cop])
    other_shape = rng.choice(tuple(PremiseShape))
    if carried_shape is PremiseShape.SHARED_SUBJECT:
        m2 = conclusion.sub
    elif carried_shape is PremiseShape.SHARED_OBJECT:
        m2 = conclusion.obj
    else:
        m2 = rng.choice((conclusion.sub, conclusion.obj))
    fresh = _premise_from_shape(
        other_shape, m2, terms.fresh(), _input_truth(rng, cfg), evidence.fresh_base()
    )
    if chain_role == "premise1":
        j1_2, j2_2 = conclusion, fresh
        pattern2 = RulePattern(carried_shape, other_shape)
    else:
        j1_2, j2_2 = fresh, conclusion
        pattern2 = RulePattern(other_shape, carried_shape)
    results2 = tuple(derive(j1_2, j2_2))
    step2 = StepRecord(j1_2, j2_2, results2, pattern2)

    target_index = rng.randrange(len(results2))
    target = results2[target_index]

    # Distractors: independent judgments over fresh terms, never touching
    # the chain and never sharing a term with each other.
    distractors = []
    for _ in range(2):
        shape = rng.choice(tuple(PremiseShape))
        distractors.append(
            _premise_from_shape(
                shape, terms.fresh(), terms.fresh(), _input_truth(rng, cfg), evidence.fresh_base()
            )
        )

    return LogicInstance(
        step1=step1,
        step2=step2,
        chain_role=chain_role,
        chain_index=chain_index,
        distractors=(distractors[0], distractors[1]),
        target=target,
        target_index=target_index,
        seed=seed,
    )


def gen_dataset(
    seed: int,
    n: int,
    config: GenerationConfig | None = None,
    uniform: bool = False,
) -> list[LogicInstance]:
    """n instances from per-instance seeds derived from the master seed.

    With uniform=True the step-1 pattern cycles round-robin over the allowed
    set; everything else still comes from the per-instance seed.
    """
    if n < 1:
        raise ConfigError(f"dataset size must be >= 1, got {n}")
    cfg = config or GenerationConfig()
    master = random.Random(seed)
    instance_seeds = [master.randrange(2**63) for _ in range(n)]
    out = []
    for i, instance_seed in enumerate(instance_seeds):
        inst_cfg = cfg
        if uniform:
            forced = cfg.allowed_patterns[i % len(cfg.allowed_patterns)]
            inst_cfg = replace(cfg, allowed_patterns=(forced,))
        out.append(gen_instance(instance_seed, inst_cfg))
    return out


@dataclass(frozen=True)
class RuleSplit:
    """Disjoint cover of the nine premise patterns."""

    subsets: tuple[tuple[RulePattern, ...], ...]


def partition_rules(seed: int, k: int) -> RuleSplit:
    """Randomly partition the nine patterns into k subsets of near-equal size."""
    if not 1 <= k <= len(ALL_PATTERNS):
        raise ValueError(f"k must be in 1..{len(ALL_PATTERNS)}, got {k}")
    patterns = list(ALL_PATTERNS)
    random.Random(seed).shuffle(patterns)
    base, extra = divmod(len(patterns), k)
    subsets = []
    start = 0
    for i in range(k):
        size = base + (1 if i < extra else 0)
        subsets.append(tuple(patterns[start : start + size]))
        start += size
    return RuleSplit(tuple(subsets))


def ground_truth_answer(inst: LogicInstance) -> AnswerDoc:
    """The expected answer: both steps with all derivable conclusions.

    Truth components are rounded to 3 decimals, the precision the answer
    format discloses.
    """

    def step_doc(step: StepRecord) -> AnswerStep:
        return AnswerStep(
            premise1=record_from_judgment(step.premise1, ndigits=3),
            premise2=record_from_judgment(step.premise2, ndigits=3),
            results=tuple(
                record_from_judgment(d.conclusion, rule=d.rule.family.value, ndigits=3)
                for d in step.results
            ),
        )

    return AnswerDoc(step1=step_doc(inst.step1), step2=step_doc(inst.step2))


# ---------------------------------------------------------------------------
# Dataset records (line-delimited JSON)
# ---------------------------------------------------------------------------


def _judgment_dict(j: Judgment) -> dict:
    return {
        "s": j.sub.name,
        "cp": j.cop.token,
        "o": j.obj.name,
        "f": j.truth.f,
        "c": j.truth.c,
        "eb": list(j.base.sorted_ids()),
    }


def _derivation_dict(d: Derivation) -> dict:
    out = _judgment_dict(d.conclusion)
    out["r"] = d.rule.family.value
    out["primed"] = d.rule.primed
    return out


def _step_dict(step: StepRecord) -> dict:
    return {
        "pattern": step.pattern.key,
        "premise1": _judgment_dict(step.premise1),
        "premise2": _judgment_dict(step.premise2),
        "results": [_derivation_dict(d) for d in step.results],
    }


def instance_to_dict(inst: LogicInstance, instance_id: str) -> dict:
    from .answers import doc_to_jsonable

    capacity = inst.step1.premise1.base.capacity
    return {
        "id": instance_id,
        "seed": inst.seed,
        "base_capacity": capacity,
        "step1": _step_dict(inst.step1),
        "step2": _step_dict(inst.step2),
        "chain_role": inst.chain_role,
        "chain_index": inst.chain_index,
        "distractors": [_judgment_dict(j) for j in inst.distractors],
        "target": _derivation_dict(inst.target),
        "target_index": inst.target_index,
        "answer": doc_to_jsonable(ground_truth_answer(inst)),
    }


def _judgment_from_dict(d: dict, capacity: int) -> Judgment:
    from .nal import copula_from_token

    return Judgment(
        sub=Term(d["s"]),
        cop=copula_from_token(d["cp"]),
        obj=Term(d["o"]),
        truth=TruthValue(d["f"], d["c"]),
        base=EvidentialBase.of(d["eb"], capacity),
    )


def _derivation_from_dict(d: dict, capacity: int) -> Derivation:
    from .nal import RuleFamily, RuleId

    return Derivation(
        conclusion=_judgment_from_dict(d, capacity),
        rule=RuleId(RuleFamily(d["r"]), d.get("primed", False)),
    )


def _step_from_dict(d: dict, capacity: int) -> StepRecord:
    return StepRecord(
        premise1=_judgment_from_dict(d["premise1"], capacity),
        premise2=_judgment_from_dict(d["premise2"], capacity),
        results=tuple(_derivation_from_dict(r, capacity) for r in d["results"]),
        pattern=RulePattern.from_key(d["pattern"]),
    )


def instance_from_dict(d: dict) -> LogicInstance:
    capacity = d.get("base_capacity", 8)
    return LogicInstance(
        step1=_step_from_dict(d["step1"], capacity),
        step2=_step_from_dict(d["step2"], capacity),
        chain_role=d["chain_role"],
        chain_index=d["chain_index"],
        distractors=tuple(_judgment_from_dict(x, capacity) for x in d["distractors"]),
        target=_derivation_from_dict(d["target"], capacity),
        target_index=d["target_index"],
        seed=d["seed"],
    )
