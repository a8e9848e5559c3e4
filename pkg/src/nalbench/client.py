"""OpenAI-compatible chat-completion client with caching, retries, and batching.

Requests go to ``{base_url}/chat/completions`` with the standard messages
array payload and read the first choice's message content.  Responses are
cached on disk keyed by (model, prompt digest), so re-running a batch makes
no network calls for work already done.  Credentials come only from the
environment variable named in the config and are never written to logs,
caches, or output files.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Callable, Optional, Sequence

import requests


class TransportError(Exception):
    """Request failed after exhausting retries."""


class CredentialError(Exception):
    """Endpoint rejected the credentials; retrying would not help."""


@dataclass(frozen=True)
class EndpointConfig:
    base_url: str
    model: str
    api_key_env: str = "OPENAI_API_KEY"
    temperature: float = 0.0
    max_tokens: int = 2048
    timeout: float = 60.0
    max_retries: int = 3
    parallelism: int = 4

    def __post_init__(self) -> None:
        if self.parallelism < 1:
            raise ValueError("parallelism must be >= 1")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")

    def public_dict(self) -> dict:
        """Config for manifests: everything except the credential value."""
        return asdict(self)


def prompt_digest(messages: Sequence[dict]) -> str:
    canonical = json.dumps(list(messages), sort_keys=True, ensure_ascii=False, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class CompletionResult:
    text: str
    retries: int = 0
    latency: float = 0.0
    cached: bool = False


class ResponseCache:
    """Directory-backed cache; writes are atomic (temp file then rename)."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def _path(self, model: str, digest: str) -> Path:
        safe_model = "".join(c if c.isalnum() or c in "._-" else "_" for c in model)
        return self.root / f"{safe_model}__{digest}.json"

    def get(self, model: str, digest: str) -> Optional[str]:
        path = self._path(model, digest)
        if not path.exists():
            return None
        try:
            return json.loads(path.read_text("utf-8"))["text"]
        except (json.JSONDecodeError, KeyError, OSError):
            return None

    def put(self, model: str, digest: str, text: str) -> None:
        path = self._path(model, digest)
        payload = json.dumps({"model": model, "digest": digest, "text": text}, ensure_ascii=False)
        fd, tmp = tempfile.mkstemp(dir=self.root, prefix=".tmp-")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as handle:
                handle.write(payload)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise


def _auth_headers(cfg: EndpointConfig) -> dict:
    headers = {"Content-Type": "application/json"}
    key = os.environ.get(cfg.api_key_env, "")
    if key:
        headers["Authorization"] = f"Bearer {key}"
    return headers


def complete(
    messages: Sequence[dict],
    cfg: EndpointConfig,
    cache: Optional[ResponseCache] = None,
    _sleep: Callable[[float], None] = time.sleep,
) -> CompletionResult:
    """One chat completion, with cache lookup and exponential-backoff retries.

    Transient failures (connection errors, timeouts, 429, 5xx) are retried
    up to cfg.max_retries; authentication failures raise immediately.
    """
    digest = prompt_digest(messages)
    if cache is not None:
        hit = cache.get(cfg.model, digest)
        if hit is not None:
            return CompletionResult(hit, cached=True)

    url = cfg.base_url.rstrip("/") + "/chat/completions"
    payload = {
        "model": cfg.model,
        "messages": list(messages),
        "temperature": cfg.temperature,
        "max_tokens": cfg.max_tokens,
    }
    start = time.monotonic()
    last_error: Optional[str] = None
    for attempt in range(cfg.max_retries + 1):
        if attempt:
            _sleep(min(0.5 * 2 ** (attempt - 1), 8.0))
        try:
            resp = requests.post(url, json=payload, headers=_auth_headers(cfg), timeout=cfg.timeout)
        except requests.RequestException as exc:
            last_error = f"{type(exc).__name__}: {exc}"
            continue
        if resp.status_code in (401, 403):
            raise CredentialError(f"endpoint rejected credentials (HTTP {resp.status_code})")
        if resp.status_code == 429 or resp.status_code >= 500:
            last_error = f"HTTP {resp.status_code}"
            continue
        if resp.status_code != 200:
            raise TransportError(f"HTTP {resp.status_code}: {resp.text[:200]}")
        try:
            text = resp.json()["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise TransportError(f"malformed completion response: {exc}")
        result = CompletionResult(
            text=text or "",
            retries=attempt,
            latency=time.monotonic() - start,
        )
        if cache is not None:
            cache.put(cfg.model, digest, result.text)
        return result
    raise TransportError(f"exhausted {cfg.max_retries} retries: {last_error}")


# ---------------------------------------------------------------------------
# Batch collection
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PromptItem:
    instance_id: str
    messages: tuple[dict, ...]


def _response_row(item: PromptItem, cfg: EndpointConfig, result: Optional[CompletionResult], error: Optional[str]) -> dict:
    row = {
        "id": item.instance_id,
        "model": cfg.model,
        "prompt_sha256": prompt_digest(item.messages),
        "text": result.text if result else None,
        "error": error,
        "retries": result.retries if result else None,
        "latency_s": round(result.latency, 4) if result else None,
        "cached": result.cached if result else None,
        "ts": time.time(),
    }
    return row


def batch_ask(
    prompts: Sequence[PromptItem],
    cfg: EndpointConfig,
    out_path: str | Path,
    cache: Optional[ResponseCache] = None,
    dataset_digest: str = "",
    _sleep: Callable[[float], None] = time.sleep,
) -> Path:
    """Collect one response per prompt into a line-delimited file.

    The first line is a manifest embedding the endpoint config (minus
    credentials) and the dataset digest.  Per-prompt transport failures are
    recorded as failed rows; the batch keeps going.
    """
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)

    def ask(item: PromptItem) -> dict:
        try:
            result = complete(item.messages, cfg, cache=cache, _sleep=_sleep)
            return _response_row(item, cfg, result, None)
        except (TransportError, CredentialError) as exc:
            return _response_row(item, cfg, None, f"{type(exc).__name__}: {exc}")

    with ThreadPoolExecutor(max_workers=cfg.parallelism) as pool:
        rows = list(pool.map(ask, prompts))

    manifest = {
        "manifest": True,
        "endpoint": cfg.public_dict(),
        "dataset_sha256": dataset_digest,
        "prompts": len(prompts),
    }
    with out_path.open("w", encoding="utf-8") as handle:
        handle.write(json.dumps(manifest, ensure_ascii=False) + "\n")
        for row in rows:
            handle.write(json.dumps(row, ensure_ascii=False) + "\n")
    return out_path


def read_response_file(path: str | Path) -> tuple[Optional[dict], dict[str, dict]]:
    """(manifest, rows-by-instance-id) from a response file."""
    manifest = None
    rows: dict[str, dict] = {}
    with Path(path).open("r", encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if not line:
                continue
            row = json.loads(line)
            if row.get("manifest"):
                manifest = row
            else:
                rows[row["id"]] = row
    return manifest, rows
