"""Repair of malformed answer text before parsing.

Two policies:

* deterministic: local, content-preserving fixes only. Strips code fences
  and surrounding prose, removes dangling commas, closes an unterminated
  string, and appends whatever closing brackets the open stack still needs.
  It never invents content and never rewrites a numeral or identifier, it
  is idempotent, and it never fails; the result may still be unparseable.

* model: ships the broken text plus the schema guide to a configured
  chat-completion endpoint and returns whatever comes back (after the same
  deterministic fence stripping). Transport failures propagate.

Callers re-parse the returned text; repair guarantees nothing about the
outcome.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Optional, Protocol, Union

from .answers import SCHEMA_GUIDE

_FENCE_RE = re.compile(r"```(?:json)?\s*(.*?)```", re.DOTALL)

_OPENERS = {"{": "}", "[": "]"}
_CLOSERS = {"}", "]"}


def _strip_wrapping(text: str) -> str:
    """Drop code fences and any prose before the first brace."""
    if not text.lstrip().startswith("{"):
        m = _FENCE_RE.search(text)
        if m and "{" in m.group(1):
            text = m.group(1)
        start = text.find("{")
        if start > 0:
            text = text[start:]
    return text.strip()


def _extract_valid_prefix(text: str) -> Optional[str]:
    try:
        _, end = json.JSONDecoder().raw_decode(text)
    except json.JSONDecodeError:
        return None
    return text[:end]


def _balance(text: str) -> str:
    """String-aware pass: drop dangling commas, close string and brackets."""
    out: list[str] = []
    stack: list[str] = []
    in_string = False
    escaped = False
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if in_string:
            out.append(ch)
            if escaped:
                escaped = False
            elif ch == "\\":
                escaped = True
            elif ch == '"':
                in_string = False
            i += 1
            continue
        if ch == '"':
            in_string = True
            out.append(ch)
        elif ch in _OPENERS:
            stack.append(_OPENERS[ch])
            out.append(ch)
        elif ch in _CLOSERS:
            if stack and stack[-1] == ch:
                stack.pop()
            out.append(ch)
        elif ch == ",":
            j = i + 1
            while j < n and text[j].isspace():
                j += 1
            # dangling before a closer or at end of input
            if j >= n or text[j] in _CLOSERS:
                i = j
                continue
            out.append(ch)
        else:
            out.append(ch)
        i += 1
    if in_string:
        if escaped:
            out.pop()  # a dangling escape would swallow the closing quote
        out.append('"')
    out.extend(reversed(stack))
    return "".join(out)


def deterministic_repair(text: str) -> str:
    if not isinstance(text, str) or not text:
        return text or ""
    try:
        json.loads(text)
        return text
    except (json.JSONDecodeError, ValueError):
        pass
    stripped = _strip_wrapping(text)
    prefix = _extract_valid_prefix(stripped)
    if prefix is not None:
        return prefix
    return _balance(stripped)


class RepairPolicy(Protocol):
    name: str

    def repair(self, text: str) -> str: ...


@dataclass(frozen=True)
class DeterministicRepair:
    name: str = "deterministic"

    def repair(self, text: str) -> str:
        return deterministic_repair(text)


_MODEL_REPAIR_INSTRUCTIONS = (
    "The following text was supposed to be a JSON document in the format "
    "described below, but it is malformed. Return the corrected JSON document "
    "and nothing else. Preserve all content; fix only the formatting.\n\n"
    + SCHEMA_GUIDE
)


@dataclass(frozen=True)
class ModelRepair:
    """Repair via a configured chat-completion endpoint."""

    cfg: "EndpointConfig"  # noqa: F821 - see nalbench.client
    name: str = "model"

    def repair(self, text: str) -> str:
        from .client import complete  # deferred: avoid import cycle at module load

        messages = [
            {"role": "system", "content": _MODEL_REPAIR_INSTRUCTIONS},
            {"role": "user", "content": text},
        ]
        result = complete(messages, self.cfg)
        return _strip_wrapping(result.text)


PolicyLike = Union[None, str, RepairPolicy]


def as_policy(policy: PolicyLike) -> Optional[RepairPolicy]:
    if policy is None or policy == "none":
        return None
    if policy == "deterministic":
        return DeterministicRepair()
    if isinstance(policy, str):
        raise ValueError(f"unknown repair policy {policy!r}")
    return policy


def repair_text(text: str, policy: PolicyLike) -> str:
    """Apply a repair policy; the identity when no policy is configured."""
    resolved = as_policy(policy)
    if resolved is None:
        return text
    return resolved.repair(text)
