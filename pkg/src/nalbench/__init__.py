"""Two-step NAL reasoning benchmarks: generation, grading, and answer recomposition."""

from .nal import (
    ALL_PATTERNS,
    Copula,
    Derivation,
    EvidenceOverlapError,
    EvidentialBase,
    Judgment,
    PremiseShape,
    RuleFamily,
    RuleId,
    RulePattern,
    Term,
    TruthValue,
    apply_truth_function,
    derive,
    find_shared_term,
    truth_from_evidence,
    union_bases,
)
from .answers import (
    AnswerDoc,
    AnswerStep,
    ParsedAnswer,
    SentenceRecord,
    parse_answer,
    serialize_answer,
)
from .generate import (
    GenerationConfig,
    LogicInstance,
    RuleSplit,
    StepRecord,
    gen_dataset,
    gen_instance,
    ground_truth_answer,
    partition_rules,
)
from .repair import DeterministicRepair, ModelRepair, repair_text

__version__ = "0.1.0"
