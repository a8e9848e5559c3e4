"""The structured two-step answer document: schema, parsing, serialization.

An answer is a JSON object with two top-level keys, "Step 1" and "Step 2".
Each step holds "Premise 1", "Premise 2" and "Results"; every entry is a
sentence object with keys s, o, cp, f, c, eb, plus r (the rule name) on
result sentences only.  Parsing is strict about required keys and value
ranges but tolerant of unknown extra keys, and falls back to
case/space-insensitive key matching (flagged on the parse result) so that
minor key-spelling drift does not cost a model the whole answer.

Parse failure is reported as a value rather than an exception so the
grading layer can assign its floor grade.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any, Mapping, Optional

from .nal import (
    Copula,
    EvidentialBase,
    Judgment,
    RULE_VOCABULARY,
    Term,
    TruthValue,
    copula_from_token,
)

STEP_KEYS = ("Step 1", "Step 2")
PART_KEYS = ("Premise 1", "Premise 2", "Results")


@dataclass(frozen=True)
class SentenceRecord:
    """One sentence of an answer: ``s cp o`` with truth, base, optional rule."""

    s: str
    o: str
    cp: str
    f: float
    c: float
    eb: tuple[int, ...]
    r: Optional[str] = None

    def statement(self) -> tuple[str, str, str]:
        """Statement triple, canonicalized for the symmetric copula."""
        if self.cp == Copula.SIMILARITY.token and self.o < self.s:
            return (self.o, self.cp, self.s)
        return (self.s, self.cp, self.o)


@dataclass(frozen=True)
class AnswerStep:
    premise1: SentenceRecord
    premise2: SentenceRecord
    results: tuple[SentenceRecord, ...]


@dataclass(frozen=True)
class AnswerDoc:
    step1: AnswerStep
    step2: AnswerStep


@dataclass(frozen=True)
class ParsedAnswer:
    """Outcome of parse_answer: either a doc or an error description."""

    doc: Optional[AnswerDoc]
    error: Optional[str] = None
    fallback_keys: bool = False

    @property
    def ok(self) -> bool:
        return self.doc is not None


class _Invalid(Exception):
    """Internal: schema violation during parsing."""


def record_from_judgment(j: Judgment, rule: Optional[str] = None, ndigits: Optional[int] = None) -> SentenceRecord:
    """Sentence record for a judgment; ndigits=3 gives the disclosed form."""
    f, c = j.truth.f, j.truth.c
    if ndigits is not None:
        f, c = round(f, ndigits), round(c, ndigits)
    return SentenceRecord(j.sub.name, j.obj.name, j.cop.token, f, c, j.base.sorted_ids(), rule)


def judgment_from_record(rec: SentenceRecord, capacity: int = 8) -> Judgment:
    """Strict conversion back into an engine judgment.

    Raises ValueError when the record does not describe a well-formed
    judgment (self-statement, out-of-range truth, bad term name, oversized
    base); callers treat that as "no inference possible".
    """
    return Judgment(
        sub=Term(rec.s),
        cop=copula_from_token(rec.cp),
        obj=Term(rec.o),
        truth=TruthValue(rec.f, rec.c),
        base=EvidentialBase.of(rec.eb, capacity),
    )


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------


def _norm_key(key: str) -> str:
    return "".join(key.lower().split()).replace("_", "")


def _lookup(mapping: Mapping[str, Any], key: str, state: dict) -> Any:
    if key in mapping:
        return mapping[key]
    want = _norm_key(key)
    for k, v in mapping.items():
        if isinstance(k, str) and _norm_key(k) == want:
            state["fallback"] = True
            return v
    raise _Invalid(f"missing required key {key!r}")


def _number(value: Any, key: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise _Invalid(f"{key} must be a number, got {value!r}")
    x = float(value)
    if not 0.0 <= x <= 1.0:
        raise _Invalid(f"{key} out of range [0, 1]: {x}")
    return x


def _term_name(value: Any, key: str) -> str:
    if not isinstance(value, str) or not value:
        raise _Invalid(f"{key} must be a non-empty string, got {value!r}")
    return value


def _evidential_ids(value: Any) -> tuple[int, ...]:
    if not isinstance(value, list) or not value:
        raise _Invalid(f"eb must be a non-empty list, got {value!r}")
    ids = []
    for item in value:
        if isinstance(item, bool) or not isinstance(item, int) or item < 1:
            raise _Invalid(f"eb entries must be positive integers, got {item!r}")
        ids.append(item)
    return tuple(sorted(set(ids)))


def _sentence(value: Any, where: str, state: dict, expect_rule: bool) -> SentenceRecord:
    if not isinstance(value, dict):
        raise _Invalid(f"{where} must be an object, got {type(value).__name__}")
    s = _term_name(_lookup(value, "s", state), f"{where}.s")
    o = _term_name(_lookup(value, "o", state), f"{where}.o")
    cp = _lookup(value, "cp", state)
    if cp not in (Copula.INHERITANCE.token, Copula.SIMILARITY.token):
        raise _Invalid(f"{where}.cp must be '->' or '<->', got {cp!r}")
    f = _number(_lookup(value, "f", state), f"{where}.f")
    c = _number(_lookup(value, "c", state), f"{where}.c")
    eb = _evidential_ids(_lookup(value, "eb", state))
    r = None
    if expect_rule:
        r = _lookup(value, "r", state)
        if not isinstance(r, str) or r.lower() not in RULE_VOCABULARY:
            raise _Invalid(f"{where}.r must be one of {RULE_VOCABULARY}, got {r!r}")
        r = r.lower()
    return SentenceRecord(s, o, cp, f, c, eb, r)


def _step(value: Any, where: str, state: dict) -> AnswerStep:
    if not isinstance(value, dict):
        raise _Invalid(f"{where} must be an object, got {type(value).__name__}")
    premise1 = _sentence(_lookup(value, "Premise 1", state), f"{where}.Premise 1", state, expect_rule=False)
    premise2 = _sentence(_lookup(value, "Premise 2", state), f"{where}.Premise 2", state, expect_rule=False)
    raw_results = _lookup(value, "Results", state)
    if not isinstance(raw_results, list):
        raise _Invalid(f"{where}.Results must be a list, got {type(raw_results).__name__}")
    results = tuple(
        _sentence(item, f"{where}.Results[{i}]", state, expect_rule=True)
        for i, item in enumerate(raw_results)
    )
    return AnswerStep(premise1, premise2, results)


def parse_answer(text: str) -> ParsedAnswer:
    """Parse a model's raw text into an AnswerDoc, or report why not."""
    try:
        payload = json.loads(text)
    except (json.JSONDecodeError, TypeError) as exc:
        return ParsedAnswer(None, error=f"not valid JSON: {exc}")
    if not isinstance(payload, dict):
        return ParsedAnswer(None, error="top level must be a JSON object")
    state: dict = {"fallback": False}
    try:
        doc = AnswerDoc(
            step1=_step(_lookup(payload, "Step 1", state), "Step 1", state),
            step2=_step(_lookup(payload, "Step 2", state), "Step 2", state),
        )
    except _Invalid as exc:
        return ParsedAnswer(None, error=str(exc))
    return ParsedAnswer(doc, fallback_keys=state["fallback"])


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def _round3(x: float) -> float:
    return round(x, 3)


def _sentence_jsonable(rec: SentenceRecord) -> dict:
    out: dict[str, Any] = {
        "s": rec.s,
        "o": rec.o,
        "cp": rec.cp,
        "f": _round3(rec.f),
        "c": _round3(rec.c),
        "eb": sorted(rec.eb),
    }
    if rec.r is not None:
        out["r"] = rec.r
    return out


def doc_to_jsonable(doc: AnswerDoc) -> dict:
    def step(s: AnswerStep) -> dict:
        return {
            "Premise 1": _sentence_jsonable(s.premise1),
            "Premise 2": _sentence_jsonable(s.premise2),
            "Results": [_sentence_jsonable(r) for r in s.results],
        }

    return {"Step 1": step(doc.step1), "Step 2": step(doc.step2)}


def serialize_answer(doc: AnswerDoc) -> str:
    """Canonical text form: fixed key order, f/c at up to 3 decimals, eb ascending.

    parse(serialize(d)) == d whenever d's truth components already carry at
    most 3 decimals, which holds for every document this package generates.
    """
    return json.dumps(doc_to_jsonable(doc), separators=(", ", ": "))


SCHEMA_GUIDE = """\
Answer with a single JSON object and nothing else.

The object has exactly two top-level keys: "Step 1" and "Step 2".
Each step is an object with exactly three keys: "Premise 1", "Premise 2",
and "Results".  "Premise 1" and "Premise 2" are sentence objects; "Results"
is a list of sentence objects, one per conclusion drawn from the premises.

A sentence object encodes one logic statement "s cp o" with keys:
  "s":  subject term name, a string such as "ID_0042"
  "o":  object term name, a string
  "cp": copula: "->" for inheritance, "<->" for similarity
  "f":  frequency, a number in [0, 1]
  "c":  confidence, a number in [0, 1]; premises restated from the problem
        use the default value 0.9
  "eb": evidential base, a non-empty list of positive integer statement ids;
        a conclusion carries the union of its premises' ids
  "r":  inference rule, present only on sentences inside "Results"; one of
        "deduction", "abduction", "induction", "exemplification",
        "comparison", "analogy", "resemblance"

Step 1 takes two premises from the problem statement and lists every
conclusion the rules allow.  One conclusion of Step 1 is then reused as a
premise of Step 2 together with one more premise from the problem
statement, and Step 2's "Results" must contain the queried statement.

Example:
{"Step 1": {"Premise 1": {"s": "ID_0100", "o": "ID_0200", "cp": "->", "f": 1.0, "c": 0.9, "eb": [1]}, "Premise 2": {"s": "ID_0300", "o": "ID_0100", "cp": "->", "f": 1.0, "c": 0.9, "eb": [2]}, "Results": [{"s": "ID_0300", "o": "ID_0200", "cp": "->", "f": 1.0, "c": 0.81, "eb": [1, 2], "r": "deduction"}, {"s": "ID_0200", "o": "ID_0300", "cp": "->", "f": 1.0, "c": 0.448, "eb": [1, 2], "r": "exemplification"}]}, "Step 2": {"Premise 1": {"s": "ID_0300", "o": "ID_0200", "cp": "->", "f": 1.0, "c": 0.81, "eb": [1, 2]}, "Premise 2": {"s": "ID_0200", "o": "ID_0400", "cp": "->", "f": 1.0, "c": 0.9, "eb": [3]}, "Results": [{"s": "ID_0400", "o": "ID_0300", "cp": "->", "f": 1.0, "c": 0.422, "eb": [1, 2, 3], "r": "exemplification"}, {"s": "ID_0300", "o": "ID_0400", "cp": "->", "f": 1.0, "c": 0.729, "eb": [1, 2, 3], "r": "deduction"}]}}
"""
