"""Single boundary for model calls, with schema-enforced structured output.

Every model round-trip goes through :class:`LlmGateway.complete_structured`,
which retries with a repair prompt until the output parses as JSON and
validates against the caller's schema. Two providers ship with the package:

* :class:`StubProvider` — replays scripted responses keyed by a fingerprint
  of the request, enabling fully offline, byte-deterministic pipelines.
* :class:`HttpProvider` — a chat-completions-style JSON client configured
  from ``LLM_BASE_URL`` / ``LLM_API_KEY`` / ``LLM_MODEL``.

Token estimation lives here too because chunk budgeting is a gateway
concern: the estimator is the contract the chunker sizes against.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import threading
from dataclasses import dataclass
from typing import Any, Mapping, Protocol, Sequence

import httpx
import jsonschema

from .errors import DuplicateProvider, ProviderUnavailable, SchemaViolation

ROLES = ("system", "user", "assistant")

DEFAULT_RETRY_LIMIT = 2

REPAIR_PROMPT = (
    "Your previous output was not valid JSON for the required schema. "
    "Output only valid JSON."
)


def estimate_tokens(text: str) -> int:
    """Estimate the token count of ``text`` as ceil(utf8 bytes / 4).

    Deterministic and monotone under concatenation, which is all chunk
    budgeting needs; no tokenizer dependency.
    """
    return math.ceil(len(text.encode("utf-8")) / 4)


@dataclass(frozen=True)
class Message:
    role: str
    text: str

    def __post_init__(self):
        if self.role not in ROLES:
            raise ValueError(f"unknown message role: {self.role!r}")


@dataclass(frozen=True)
class LlmRequest:
    """One schema-constrained completion request.

    Invariants checked at construction: at least one message, the first
    message is a system message, temperature in [0, 1], a positive output
    budget, and a structurally valid JSON schema.
    """

    messages: tuple[Message, ...]
    output_schema: Mapping[str, Any]
    temperature: float = 0.0
    max_output_tokens: int = 1024

    def __post_init__(self):
        if not self.messages:
            raise ValueError("request needs at least one message")
        if self.messages[0].role != "system":
            raise ValueError("first message must have role 'system'")
        if not 0.0 <= self.temperature <= 1.0:
            raise ValueError("temperature must be in [0, 1]")
        if self.max_output_tokens <= 0:
            raise ValueError("max_output_tokens must be positive")
        jsonschema.Draft202012Validator.check_schema(dict(self.output_schema))


@dataclass
class LlmExchange:
    """A completed round-trip: the request, every raw attempt, and the
    schema-valid parsed value."""

    request: LlmRequest
    raw_responses: list[str]
    parsed: Any
    attempts: int
    provider_id: str


def request_fingerprint(request: LlmRequest) -> str:
    """Stable fingerprint of a request: sha256 of its concatenated message
    texts. This is the key format of stub script files."""
    joined = "".join(m.text for m in request.messages)
    return hashlib.sha256(joined.encode("utf-8")).hexdigest()


def strip_unknown_fields(value: Any, schema: Mapping[str, Any]) -> Any:
    """Drop object keys the schema does not declare.

    Models often return valid data plus commentary fields; stripping them
    keeps downstream consumers honest. Keys survive only where the schema
    explicitly allows extras via ``additionalProperties``.
    """
    if isinstance(value, dict) and isinstance(schema.get("properties"), Mapping):
        props = schema["properties"]
        if schema.get("additionalProperties"):
            kept = dict(value)
        else:
            kept = {k: v for k, v in value.items() if k in props}
        return {
            k: strip_unknown_fields(v, props[k]) if k in props and isinstance(props[k], Mapping) else v
            for k, v in kept.items()
        }
    if isinstance(value, list) and isinstance(schema.get("items"), Mapping):
        return [strip_unknown_fields(v, schema["items"]) for v in value]
    return value


class Provider(Protocol):
    """Contract every model provider implements.

    ``conversation`` is the full message list including repair turns;
    ``attempt`` is 1-based so scripted providers can vary per retry
    without parsing the conversation.
    """

    def complete(self, request: LlmRequest, conversation: Sequence[Message], attempt: int) -> str:
        ...


class StubProvider:
    """Scripted provider for offline tests.

    The script maps request fingerprints (see :func:`request_fingerprint`)
    to ordered response lists; attempt N returns entry N-1, repeating the
    last entry once the list is exhausted. Unknown fingerprints raise
    ProviderUnavailable — a loud signal that a fixture is missing.
    """

    def __init__(self, script: Mapping[str, Sequence[str]]):
        self._script = {k: list(v) for k, v in script.items()}

    @classmethod
    def from_file(cls, path: str) -> "StubProvider":
        with open(path, encoding="utf-8") as fh:
            return cls(json.load(fh))

    def complete(self, request: LlmRequest, conversation: Sequence[Message], attempt: int) -> str:
        fingerprint = request_fingerprint(request)
        responses = self._script.get(fingerprint)
        if not responses:
            raise ProviderUnavailable(
                "no scripted response for request", fingerprint=fingerprint
            )
        return responses[min(attempt - 1, len(responses) - 1)]


class HttpProvider:
    """Chat-completions JSON client.

    Reads ``LLM_BASE_URL``, ``LLM_API_KEY`` and ``LLM_MODEL`` from the
    environment unless given explicitly. Transport failures and non-2xx
    responses surface as ProviderUnavailable so callers never see raw
    httpx errors.
    """

    def __init__(self, base_url: str | None = None, api_key: str | None = None,
                 model: str | None = None, timeout: float = 60.0):
        self.base_url = base_url or os.environ.get("LLM_BASE_URL", "")
        self.api_key = api_key or os.environ.get("LLM_API_KEY", "")
        self.model = model or os.environ.get("LLM_MODEL", "")
        self.timeout = timeout
        if not self.base_url:
            raise ValueError("HttpProvider needs a base URL (LLM_BASE_URL)")

    def complete(self, request: LlmRequest, conversation: Sequence[Message], attempt: int) -> str:
        payload = {
            "model": self.model,
            "messages": [{"role": m.role, "content": m.text} for m in conversation],
            "temperature": request.temperature,
            "max_tokens": request.max_output_tokens,
        }
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        try:
            response = httpx.post(
                self.base_url.rstrip("/") + "/chat/completions",
                json=payload, headers=headers, timeout=self.timeout,
            )
            response.raise_for_status()
            body = response.json()
            return body["choices"][0]["message"]["content"]
        except httpx.HTTPError as exc:
            raise ProviderUnavailable(f"model endpoint failed: {exc}") from exc
        except (KeyError, IndexError, ValueError) as exc:
            raise ProviderUnavailable(f"malformed provider response: {exc}") from exc


class LlmGateway:
    """Routes requests to the active provider and enforces output schemas.

    Safe to share across threads: the registry mutates under a lock and
    each ``complete_structured`` call keeps its retry state on the stack.
    """

    def __init__(self, retry_limit: int = DEFAULT_RETRY_LIMIT):
        if retry_limit < 0:
            raise ValueError("retry_limit must be >= 0")
        self.retry_limit = retry_limit
        self._providers: dict[str, Provider] = {}
        self._active: str | None = None
        self._lock = threading.Lock()

    def register_provider(self, provider_id: str, provider: Provider) -> None:
        """Register a provider and make it the active one."""
        if not provider_id:
            raise ValueError("provider_id must be non-empty")
        with self._lock:
            if provider_id in self._providers:
                raise DuplicateProvider(f"provider {provider_id!r} already registered")
            self._providers[provider_id] = provider
            self._active = provider_id

    @property
    def active_provider_id(self) -> str | None:
        with self._lock:
            return self._active

    def _resolve(self) -> tuple[str, Provider]:
        with self._lock:
            if self._active is None:
                raise ProviderUnavailable("no provider registered")
            return self._active, self._providers[self._active]

    def complete_structured(self, request: LlmRequest) -> LlmExchange:
        """Run the request until its output validates, retrying with a
        repair prompt up to ``retry_limit`` times.

        Raises SchemaViolation with the last raw text attached once all
        attempts are exhausted; ProviderUnavailable propagates untouched.
        """
        provider_id, provider = self._resolve()
        schema = dict(request.output_schema)
        validator = jsonschema.Draft202012Validator(schema)
        conversation: list[Message] = list(request.messages)
        raw_responses: list[str] = []

        for attempt in range(1, self.retry_limit + 2):
            raw = provider.complete(request, conversation, attempt)
            raw_responses.append(raw)
            try:
                value = strip_unknown_fields(json.loads(raw), schema)
                validator.validate(value)
            except (json.JSONDecodeError, jsonschema.ValidationError):
                conversation.append(Message("assistant", raw))
                conversation.append(Message("user", REPAIR_PROMPT))
                continue
            return LlmExchange(
                request=request,
                raw_responses=raw_responses,
                parsed=value,
                attempts=attempt,
                provider_id=provider_id,
            )

        raise SchemaViolation(
            "model output never satisfied the schema",
            attempts=len(raw_responses),
            last_raw=raw_responses[-1],
        )
