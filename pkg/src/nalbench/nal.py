"""First-order Non-Axiomatic Logic: judgments, truth values, and syllogistic derivation.

A judgment is a copular statement ``subject copula object`` carrying a
two-dimensional truth value and an evidential base.  Two copulas are
supported: inheritance (``->``, the subject is a specialization of the
object) and similarity (``<->``, the terms are interchangeable in context).
Similarity is symmetric, so similarity judgments are stored with their terms
in lexicographic order and compare equal regardless of the order they were
built with.

Truth values are evidence-derived: given positive evidence ``w_p`` and
negative evidence ``w_n``,

    f = w_p / (w_p + w_n)        (frequency)
    c = (w_p + w_n) / (w_p + w_n + 1)   (confidence, stability of f)

Syllogistic inference takes two premises that share exactly one term M; the
remaining terms are conventionally called S (from the second premise) and P
(from the first).  Which rules fire depends only on the shape of each
premise relative to M, giving a 3 x 3 table of premise patterns:

    J1 \\ J2      S -> M              M -> S              S <-> M
    M -> P     S->P  ded           S->P  ind            S->P  ana
               P->S  exe'          P->S  ind'
                                   S<->P com
    P -> M     S->P  abd           S->P  exe            P->S  ana
               P->S  abd'          P->S  ded'
               S<->P com'
    M <-> P    S->P  ana'          P->S  ana'           S<->P res

A primed rule is the same rule applied with the premises swapped; its truth
function is the plain function with swapped arguments.  Conclusions carry
the union of the premise evidential bases, and inference is refused when the
bases overlap (the same evidence may not be counted twice).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterable, Mapping, Optional

DEFAULT_BASE_CAPACITY = 8

_TERM_RE = re.compile(r"^[A-Za-z0-9_]+$")


class EvidenceOverlapError(Exception):
    """Premise evidential bases share an id, so inference is disallowed."""


@dataclass(frozen=True, order=True)
class Term:
    """An atomic term, identified by its exact name."""

    name: str

    def __post_init__(self) -> None:
        if not _TERM_RE.match(self.name):
            raise ValueError(f"term name must be non-empty [A-Za-z0-9_]: {self.name!r}")

    def __str__(self) -> str:
        return self.name


class Copula(Enum):
    INHERITANCE = "->"
    SIMILARITY = "<->"

    @property
    def token(self) -> str:
        """ASCII wire token."""
        return self.value

    @property
    def symbol(self) -> str:
        """Arrow glyph used in logs and fixtures."""
        return "→" if self is Copula.INHERITANCE else "↔"

    @property
    def symmetric(self) -> bool:
        return self is Copula.SIMILARITY


def copula_from_token(token: str) -> Copula:
    for cop in Copula:
        if cop.value == token:
            return cop
    raise ValueError(f"unknown copula token {token!r}")


@dataclass(frozen=True)
class TruthValue:
    """Frequency/confidence pair; f in [0,1], c in [0,1)."""

    f: float
    c: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.f <= 1.0:
            raise ValueError(f"frequency out of range: {self.f}")
        if not 0.0 <= self.c < 1.0:
            raise ValueError(f"confidence out of range: {self.c}")

    def __str__(self) -> str:
        return f"{{f={self.f:.3f}, c={self.c:.3f}}}"


def truth_from_evidence(w_p: float, w_n: float) -> TruthValue:
    """Truth value from positive/negative evidence weights.

    Zero total evidence has no defined frequency; the neutral value 0.5 is
    returned with confidence 0, which makes the frequency inert downstream.
    """
    if w_p < 0 or w_n < 0:
        raise ValueError(f"evidence weights must be non-negative: ({w_p}, {w_n})")
    total = w_p + w_n
    if total == 0:
        return TruthValue(0.5, 0.0)
    return TruthValue(w_p / total, total / (total + 1.0))


@dataclass(frozen=True)
class EvidentialBase:
    """Set of input-statement ids supporting a judgment, capped at `capacity`."""

    ids: frozenset[int]
    capacity: int = DEFAULT_BASE_CAPACITY

    def __post_init__(self) -> None:
        if self.capacity < 1:
            raise ValueError(f"capacity must be positive: {self.capacity}")
        for i in self.ids:
            if not isinstance(i, int) or isinstance(i, bool) or i < 1:
                raise ValueError(f"evidential ids must be positive integers: {i!r}")
        if len(self.ids) > self.capacity:
            raise ValueError(f"{len(self.ids)} ids exceed capacity {self.capacity}")

    @classmethod
    def of(cls, ids: Iterable[int], capacity: int = DEFAULT_BASE_CAPACITY) -> "EvidentialBase":
        return cls(frozenset(ids), capacity)

    def sorted_ids(self) -> tuple[int, ...]:
        return tuple(sorted(self.ids))

    def overlaps(self, other: "EvidentialBase") -> bool:
        return bool(self.ids & other.ids)

    def __str__(self) -> str:
        return "[" + ",".join(str(i) for i in self.sorted_ids()) + "]"


def union_bases(b1: EvidentialBase, b2: EvidentialBase) -> EvidentialBase:
    """Disjoint union of two evidential bases.

    Overlapping ids mean the same evidence would be counted twice, so the
    union (and the inference that needs it) is refused.  If the union
    exceeds capacity, the smallest `capacity` ids are kept, which makes the
    truncation deterministic.
    """
    if b1.overlaps(b2):
        raise EvidenceOverlapError(f"evidential bases overlap: {b1} vs {b2}")
    capacity = max(b1.capacity, b2.capacity)
    merged = sorted(b1.ids | b2.ids)[:capacity]
    return EvidentialBase(frozenset(merged), capacity)


@dataclass(frozen=True)
class Judgment:
    """A NAL sentence: ``sub cop obj`` with truth value and evidential base.

    Self-statements (sub == obj) are rejected.  Similarity judgments are
    canonicalized to lexicographic term order on construction.
    """

    sub: Term
    cop: Copula
    obj: Term
    truth: TruthValue
    base: EvidentialBase

    def __post_init__(self) -> None:
        if self.sub == self.obj:
            raise ValueError(f"self-statement not allowed: {self.sub} {self.cop.token} {self.obj}")
        if self.cop.symmetric and self.obj < self.sub:
            sub, obj = self.obj, self.sub
            object.__setattr__(self, "sub", sub)
            object.__setattr__(self, "obj", obj)

    @property
    def terms(self) -> frozenset[Term]:
        return frozenset((self.sub, self.obj))

    def statement(self) -> tuple[str, str, str]:
        """Hashable statement key (already canonical for similarity)."""
        return (self.sub.name, self.cop.token, self.obj.name)

    def __str__(self) -> str:
        return f"{self.sub} {self.cop.symbol} {self.obj}. {self.truth} {self.base}"


class RuleFamily(Enum):
    DEDUCTION = "deduction"
    ABDUCTION = "abduction"
    INDUCTION = "induction"
    EXEMPLIFICATION = "exemplification"
    COMPARISON = "comparison"
    ANALOGY = "analogy"
    RESEMBLANCE = "resemblance"


RULE_VOCABULARY = tuple(f.value for f in RuleFamily)


@dataclass(frozen=True, order=True)
class RuleId:
    """A rule family plus the premise-order flag.

    The primed variant of a rule is the same rule with J1 and J2 swapped;
    its truth function swaps its arguments accordingly.
    """

    family: RuleFamily
    primed: bool = False

    def swapped(self) -> "RuleId":
        return RuleId(self.family, not self.primed)

    def __str__(self) -> str:
        return self.family.value + ("'" if self.primed else "")


# ---------------------------------------------------------------------------
# Truth functions
#
# Strong rules map premise truths directly; weak rules produce evidence
# weights (w_plus, w) that are converted with f = w_plus/w, c = w/(w+1).
# ---------------------------------------------------------------------------


def _or(x: float, y: float) -> float:
    return 1.0 - (1.0 - x) * (1.0 - y)


def _from_weights(w_plus: float, w: float) -> TruthValue:
    if w == 0.0:
        return TruthValue(0.5, 0.0)
    return TruthValue(w_plus / w, w / (w + 1.0))


def _f_deduction(t1: TruthValue, t2: TruthValue) -> TruthValue:
    f = t1.f * t2.f
    return TruthValue(f, f * t1.c * t2.c)


def _f_analogy(t1: TruthValue, t2: TruthValue) -> TruthValue:
    # t2 is the similarity premise; its frequency scales the confidence.
    return TruthValue(t1.f * t2.f, t2.f * t1.c * t2.c)


def _f_resemblance(t1: TruthValue, t2: TruthValue) -> TruthValue:
    return TruthValue(t1.f * t2.f, _or(t1.f, t2.f) * t1.c * t2.c)


def _f_abduction(t1: TruthValue, t2: TruthValue) -> TruthValue:
    w_plus = t1.f * t1.c * t2.f * t2.c
    w = t1.f * t1.c * t2.c
    return _from_weights(w_plus, w)


def _f_induction(t1: TruthValue, t2: TruthValue) -> TruthValue:
    w_plus = t1.f * t1.c * t2.f * t2.c
    w = t2.f * t1.c * t2.c
    return _from_weights(w_plus, w)


def _f_exemplification(t1: TruthValue, t2: TruthValue) -> TruthValue:
    w_plus = t1.f * t1.c * t2.f * t2.c
    return _from_weights(w_plus, w_plus)


def _f_comparison(t1: TruthValue, t2: TruthValue) -> TruthValue:
    w_plus = t1.f * t1.c * t2.f * t2.c
    w = _or(t1.f, t2.f) * t1.c * t2.c
    return _from_weights(w_plus, w)


_TRUTH_FUNCTIONS: Mapping[RuleFamily, Callable[[TruthValue, TruthValue], TruthValue]] = {
    RuleFamily.DEDUCTION: _f_deduction,
    RuleFamily.ANALOGY: _f_analogy,
    RuleFamily.RESEMBLANCE: _f_resemblance,
    RuleFamily.ABDUCTION: _f_abduction,
    RuleFamily.INDUCTION: _f_induction,
    RuleFamily.EXEMPLIFICATION: _f_exemplification,
    RuleFamily.COMPARISON: _f_comparison,
}


def apply_truth_function(rule: RuleId, t1: TruthValue, t2: TruthValue) -> TruthValue:
    """Conclusion truth for `rule` given J1 and J2 truths, in that order."""
    if rule.primed:
        t1, t2 = t2, t1
    return _TRUTH_FUNCTIONS[rule.family](t1, t2)


# ---------------------------------------------------------------------------
# Premise patterns and the syllogism table
# ---------------------------------------------------------------------------


class PremiseShape(Enum):
    """Shape of one premise relative to the shared term M."""

    SHARED_SUBJECT = "sub"  # inheritance, M -> X
    SHARED_OBJECT = "obj"   # inheritance, X -> M
    SYMMETRIC = "sim"       # similarity, position of M is immaterial


@dataclass(frozen=True, order=True)
class RulePattern:
    """One of the nine premise configurations (J1 shape x J2 shape)."""

    j1: PremiseShape
    j2: PremiseShape

    @property
    def key(self) -> str:
        return f"{self.j1.value}+{self.j2.value}"

    @classmethod
    def from_key(cls, key: str) -> "RulePattern":
        try:
            a, b = key.split("+")
            return cls(PremiseShape(a), PremiseShape(b))
        except ValueError:
            raise ValueError(f"not a pattern key: {key!r}") from None

    def __str__(self) -> str:
        return self.key


ALL_PATTERNS: tuple[RulePattern, ...] = tuple(
    RulePattern(a, b) for a in PremiseShape for b in PremiseShape
)


@dataclass(frozen=True)
class ConclusionTemplate:
    """A conclusion over the S/P slots plus the rule that produces it."""

    sub_slot: str  # "S" or "P"
    cop: Copula
    obj_slot: str
    rule: RuleId


def _c(sub_slot: str, cop: Copula, obj_slot: str, family: RuleFamily, primed: bool = False) -> ConclusionTemplate:
    return ConclusionTemplate(sub_slot, cop, obj_slot, RuleId(family, primed))


_INH = Copula.INHERITANCE
_SIM = Copula.SIMILARITY
_SUB = PremiseShape.SHARED_SUBJECT
_OBJ = PremiseShape.SHARED_OBJECT
_SYM = PremiseShape.SYMMETRIC

# The nine-cell syllogism table, one entry per premise configuration.  S is
# the non-shared term of J2, P the non-shared term of J1.
RULE_TABLE: Mapping[RulePattern, tuple[ConclusionTemplate, ...]] = {
    # J1: M -> P, J2: S -> M
    RulePattern(_SUB, _OBJ): (
        _c("S", _INH, "P", RuleFamily.DEDUCTION),
        _c("P", _INH, "S", RuleFamily.EXEMPLIFICATION, primed=True),
    ),
    # J1: M -> P, J2: M -> S
    RulePattern(_SUB, _SUB): (
        _c("S", _INH, "P", RuleFamily.INDUCTION),
        _c("P", _INH, "S", RuleFamily.INDUCTION, primed=True),
        _c("S", _SIM, "P", RuleFamily.COMPARISON),
    ),
    # J1: M -> P, J2: S <-> M
    RulePattern(_SUB, _SYM): (
        _c("S", _INH, "P", RuleFamily.ANALOGY),
    ),
    # J1: P -> M, J2: S -> M
    RulePattern(_OBJ, _OBJ): (
        _c("S", _INH, "P", RuleFamily.ABDUCTION),
        _c("P", _INH, "S", RuleFamily.ABDUCTION, primed=True),
        _c("S", _SIM, "P", RuleFamily.COMPARISON, primed=True),
    ),
    # J1: P -> M, J2: M -> S
    RulePattern(_OBJ, _SUB): (
        _c("S", _INH, "P", RuleFamily.EXEMPLIFICATION),
        _c("P", _INH, "S", RuleFamily.DEDUCTION, primed=True),
    ),
    # J1: P -> M, J2: S <-> M
    RulePattern(_OBJ, _SYM): (
        _c("P", _INH, "S", RuleFamily.ANALOGY),
    ),
    # J1: M <-> P, J2: S -> M
    RulePattern(_SYM, _OBJ): (
        _c("S", _INH, "P", RuleFamily.ANALOGY, primed=True),
    ),
    # J1: M <-> P, J2: M -> S
    RulePattern(_SYM, _SUB): (
        _c("P", _INH, "S", RuleFamily.ANALOGY, primed=True),
    ),
    # J1: M <-> P, J2: S <-> M
    RulePattern(_SYM, _SYM): (
        _c("S", _SIM, "P", RuleFamily.RESEMBLANCE),
    ),
}


@dataclass(frozen=True)
class PatternMatch:
    """Resolved premise configuration: the pattern plus the term assignment."""

    pattern: RulePattern
    shared: Term    # M
    j1_other: Term  # P
    j2_other: Term  # S


def _shape_of(j: Judgment, shared: Term) -> PremiseShape:
    if j.cop.symmetric:
        return PremiseShape.SYMMETRIC
    return PremiseShape.SHARED_SUBJECT if j.sub == shared else PremiseShape.SHARED_OBJECT


def _other_term(j: Judgment, shared: Term) -> Term:
    return j.obj if j.sub == shared else j.sub


def find_shared_term(j1: Judgment, j2: Judgment) -> Optional[PatternMatch]:
    """Identify the unique shared term and the premise pattern.

    Returns None when the premises share no term, or share both terms (the
    statements are over the same pair, leaving no distinct S and P).
    """
    shared = j1.terms & j2.terms
    if len(shared) != 1:
        return None
    (m,) = shared
    return PatternMatch(
        pattern=RulePattern(_shape_of(j1, m), _shape_of(j2, m)),
        shared=m,
        j1_other=_other_term(j1, m),
        j2_other=_other_term(j2, m),
    )


@dataclass(frozen=True)
class Derivation:
    """A derived conclusion together with the rule that produced it."""

    conclusion: Judgment
    rule: RuleId


def derive(j1: Judgment, j2: Judgment) -> list[Derivation]:
    """All conclusions the syllogism table yields for a premise pair.

    Returns an empty list when no single shared term exists.  Raises
    EvidenceOverlapError when the premises share a term but their
    evidential bases overlap.
    """
    match = find_shared_term(j1, j2)
    if match is None:
        return []
    base = union_bases(j1.base, j2.base)  # raises on overlap
    slots = {"S": match.j2_other, "P": match.j1_other}
    out = []
    for tpl in RULE_TABLE[match.pattern]:
        conclusion = Judgment(
            sub=slots[tpl.sub_slot],
            cop=tpl.cop,
            obj=slots[tpl.obj_slot],
            truth=apply_truth_function(tpl.rule, j1.truth, j2.truth),
            base=base,
        )
        out.append(Derivation(conclusion, tpl.rule))
    return out
