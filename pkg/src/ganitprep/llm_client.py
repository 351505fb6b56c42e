"""Pluggable text-generation client with a deterministic mock provider.

The mock provider answers from a directory of fixture files named by the
sha256 digest of the prompt, so pipeline runs that route through it are
byte-reproducible. The HTTP provider posts JSON to a configured endpoint,
retries transient failures with exponential backoff, enforces a bounded
in-flight window, and reads its credential from an environment variable
named in the config (never from config values themselves).
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import re
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

from ganitprep.corpus import (
    CorpusManifest,
    Problem,
    Source,
    SourceFormat,
    nfc,
    replace_records,
    update_problem,
)
from ganitprep.errors import PipelineError
from ganitprep.structure import PromptName, PromptTemplate, render_prompt

log = logging.getLogger(__name__)

REVIEW_PENDING = "pending"
REVIEW_APPROVED = "approved"
REVIEW_CORRECTED = "corrected"
REVIEW_STATUSES = (REVIEW_PENDING, REVIEW_APPROVED, REVIEW_CORRECTED)


class ProviderError(PipelineError):
    pass


class TransportError(ProviderError):
    pass


class AugmentationError(PipelineError):
    pass


@dataclass(frozen=True)
class GenerationParams:
    sampling: bool = True
    top_k: int = 40
    temperature: float = 0.8
    top_p: float = 0.90
    max_length: int = 4096

    def __post_init__(self):
        if self.temperature < 0:
            raise ValueError(f"temperature must be >= 0, got {self.temperature}")
        if not 0 < self.top_p <= 1:
            raise ValueError(f"top_p must be in (0, 1], got {self.top_p}")
        if self.max_length < 1:
            raise ValueError(f"max_length must be >= 1, got {self.max_length}")

    def to_dict(self) -> dict:
        return {
            "sampling": self.sampling,
            "top_k": self.top_k,
            "temperature": self.temperature,
            "top_p": self.top_p,
            "max_length": self.max_length,
        }


@dataclass(frozen=True)
class GenerationRequest:
    prompt: str
    params: GenerationParams = GenerationParams()

    def __post_init__(self):
        if not self.prompt:
            raise ValueError("prompt must be nonempty")


@dataclass(frozen=True)
class GenerationResult:
    text: str
    provider_id: str
    latency_ms: float
    attempt_count: int

    def __post_init__(self):
        if self.attempt_count < 1:
            raise ValueError("attempt_count must be >= 1")


@dataclass(frozen=True)
class RetryPolicy:
    base_seconds: float = 1.0
    factor: float = 2.0
    max_attempts: int = 5


@dataclass(frozen=True)
class ClientConfig:
    kind: str = "mock"  # mock | http
    endpoint: str = ""
    credential_env: str = ""
    concurrency: int = 4
    rate_per_second: float = 0.0  # 0 disables rate limiting
    retry: RetryPolicy = RetryPolicy()
    fixtures_dir: str = ""

    def __post_init__(self):
        if self.kind not in ("mock", "http"):
            raise ProviderError(f"unknown provider kind {self.kind!r}")
        if self.concurrency < 1:
            raise ProviderError("concurrency must be >= 1")


def load_client_config(path) -> ClientConfig:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    retry = data.get("retry", {})
    return ClientConfig(
        kind=data.get("kind", "mock"),
        endpoint=data.get("endpoint", ""),
        credential_env=data.get("credential_env", ""),
        concurrency=data.get("concurrency", 4),
        rate_per_second=data.get("rate_per_second", 0.0),
        retry=RetryPolicy(
            base_seconds=retry.get("base_seconds", 1.0),
            factor=retry.get("factor", 2.0),
            max_attempts=retry.get("max_attempts", 5),
        ),
        fixtures_dir=data.get("fixtures_dir", ""),
    )


def prompt_digest(prompt: str) -> str:
    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()


class MockProvider:
    """Deterministic provider: fixture text keyed by prompt digest."""

    provider_id = "mock"

    def __init__(self, fixtures_dir):
        self.fixtures_dir = Path(fixtures_dir)

    def generate(self, request: GenerationRequest) -> GenerationResult:
        digest = prompt_digest(request.prompt)
        path = self.fixtures_dir / f"{digest}.txt"
        if not path.exists():
            raise ProviderError(f"no mock fixture for prompt digest {digest}")
        start = time.perf_counter()
        text = path.read_text(encoding="utf-8")
        return GenerationResult(
            text=text,
            provider_id=self.provider_id,
            latency_ms=(time.perf_counter() - start) * 1000,
            attempt_count=1,
        )


def write_mock_fixture(fixtures_dir, prompt: str, text: str) -> Path:
    """Store a canned response for a prompt; returns the fixture path."""
    path = Path(fixtures_dir) / f"{prompt_digest(prompt)}.txt"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    return path


def _requests_transport(endpoint: str, payload: dict, headers: dict):
    import requests

    response = requests.post(endpoint, json=payload, headers=headers, timeout=60)
    return response.status_code, response.text


class HttpProvider:
    """Generic JSON-over-HTTP provider with retry, cap, and rate limiting.

    ``transport(endpoint, payload, headers) -> (status, body)`` is injectable
    for testing; exceptions from it count as transient failures.
    """

    provider_id = "http"

    def __init__(self, config: ClientConfig, transport=None, sleep=time.sleep,
                 clock=time.monotonic):
        if not config.endpoint:
            raise ProviderError("http provider requires an endpoint")
        self.config = config
        self._transport = transport or _requests_transport
        self._sleep = sleep
        self._clock = clock
        self._gate = threading.Semaphore(config.concurrency)
        self._lock = threading.Lock()
        self._in_flight = 0
        self.peak_in_flight = 0
        self._next_slot = 0.0

    def _headers(self) -> dict:
        headers = {"Content-Type": "application/json"}
        if self.config.credential_env:
            token = os.environ.get(self.config.credential_env, "")
            if token:
                headers["Authorization"] = f"Bearer {token}"
        return headers

    def _await_rate_slot(self):
        if self.config.rate_per_second <= 0:
            return
        interval = 1.0 / self.config.rate_per_second
        with self._lock:
            now = self._clock()
            wait = self._next_slot - now
            self._next_slot = max(now, self._next_slot) + interval
        if wait > 0:
            self._sleep(wait)

    def generate(self, request: GenerationRequest) -> GenerationResult:
        payload = {"prompt": request.prompt, "params": request.params.to_dict()}
        policy = self.config.retry
        start = time.perf_counter()
        with self._gate:
            with self._lock:
                self._in_flight += 1
                self.peak_in_flight = max(self.peak_in_flight, self._in_flight)
            try:
                last_error = None
                for attempt in range(1, policy.max_attempts + 1):
                    self._await_rate_slot()
                    try:
                        status, body = self._transport(
                            self.config.endpoint, payload, self._headers())
                    except Exception as exc:
                        last_error = str(exc)
                        status, body = None, None
                    if status is not None and status < 400:
                        try:
                            text = json.loads(body)["text"]
                        except (json.JSONDecodeError, KeyError, TypeError) as exc:
                            raise ProviderError(
                                f"malformed provider response: {exc}") from exc
                        return GenerationResult(
                            text=text,
                            provider_id=self.provider_id,
                            latency_ms=(time.perf_counter() - start) * 1000,
                            attempt_count=attempt,
                        )
                    if status is not None and status < 500:
                        # Provider-reported content error; surfaced verbatim.
                        raise ProviderError(body)
                    if status is not None:
                        last_error = f"HTTP {status}"
                    if attempt < policy.max_attempts:
                        self._sleep(policy.base_seconds * policy.factor ** (attempt - 1))
                raise TransportError(
                    f"{policy.max_attempts} attempts exhausted: {last_error}")
            finally:
                with self._lock:
                    self._in_flight -= 1


def make_client(config: ClientConfig, transport=None, sleep=time.sleep):
    if config.kind == "mock":
        if not config.fixtures_dir:
            raise ProviderError("mock provider requires fixtures_dir")
        return MockProvider(config.fixtures_dir)
    return HttpProvider(config, transport=transport, sleep=sleep)


_GENERATED_RE = re.compile(
    r"Question:\s*(?P<question>.+?)\s*\nAnswer:\s*(?P<answer>.+)\s*\Z",
    re.DOTALL,
)


def parse_generated_problem(text: str) -> tuple[str, str] | None:
    """Pull (question, answer) out of a generated problem block."""
    match = _GENERATED_RE.search(text)
    if not match:
        return None
    question = match.group("question").strip()
    answer = match.group("answer").strip()
    if not question or not answer:
        return None
    return question, answer


@dataclass
class AugmentOutcome:
    manifest: CorpusManifest
    attempts: int = 0
    discarded: int = 0
    failures: list[str] = field(default_factory=list)


# Below half of the attempted generations parsing, something is wrong with
# the provider or template; keep aborting deterministic.
_MIN_ATTEMPTS_BEFORE_YIELD_CHECK = 10
_MIN_YIELD = 0.5


def augment_batch(
    manifest: CorpusManifest,
    template: PromptTemplate,
    target_count: int,
    client,
    id_prefix: str = "syn-",
) -> AugmentOutcome:
    """Generate synthetic problems seeded by the input corpus.

    Seeds are cycled in manifest order; each generation must parse into a
    question/answer block or it is discarded and counted. New problems get
    fresh prefixed ids, inherit the seed's language/difficulty/topic, and
    carry ``review_status="pending"`` plus the seed id in extras.
    """
    if template.name is not PromptName.AUGMENT:
        raise AugmentationError(f"augmentation requires the {PromptName.AUGMENT.value} "
                                f"template, got {template.name.value}")
    seeds = [p for p in manifest if p.raw_solution or p.structured_solution]
    if not seeds and target_count > 0:
        raise AugmentationError("no seed problems with solutions to augment from")
    generated: list[Problem] = []
    attempts = 0
    discarded = 0
    failures: list[str] = []
    index = 0
    while len(generated) < target_count:
        seed = seeds[index % len(seeds)]
        index += 1
        attempts += 1
        solution = seed.raw_solution or ""
        prompt = render_prompt(template, {
            "Example": seed.question,
            "refined_solution": solution,
            "Question": "",
        })
        result = client.generate(GenerationRequest(prompt=prompt))
        parsed = parse_generated_problem(result.text)
        if parsed is None:
            discarded += 1
            failures.append(f"seed {seed.id}: unparseable generation")
            log.warning("discarded unparseable generation for seed %s", seed.id)
        else:
            question, answer = parsed
            number = len(generated) + 1
            generated.append(Problem(
                id=f"{id_prefix}{number:06d}",
                language=seed.language,
                source=Source.SYNTHETIC,
                question=nfc(question),
                raw_solution=nfc(answer),
                difficulty=seed.difficulty,
                topic=seed.topic,
                extras={"seed_id": seed.id, "review_status": REVIEW_PENDING},
            ))
        if attempts >= _MIN_ATTEMPTS_BEFORE_YIELD_CHECK:
            yield_rate = (attempts - discarded) / attempts
            if yield_rate < _MIN_YIELD:
                raise AugmentationError(
                    f"parse yield {yield_rate:.0%} after {attempts} attempts; "
                    f"recent failures: {'; '.join(failures[-3:])}"
                )
    out = CorpusManifest.from_records(generated, SourceFormat.SYNTHETIC,
                                      created_at=manifest.created_at)
    return AugmentOutcome(manifest=out, attempts=attempts, discarded=discarded,
                          failures=failures)


def set_review_status(manifest: CorpusManifest, statuses: dict[str, str]) -> CorpusManifest:
    """Record reviewer verdicts in problem extras."""
    for status in statuses.values():
        if status not in REVIEW_STATUSES:
            raise AugmentationError(f"unknown review status {status!r}")
    records = [
        update_problem(p, extras={**p.extras, "review_status": statuses[p.id]})
        if p.id in statuses else p
        for p in manifest
    ]
    return replace_records(manifest, records)


def approved_only(manifest: CorpusManifest) -> CorpusManifest:
    """Keep reviewed-and-approved items; problems without a review gate pass."""
    records = [
        p for p in manifest
        if p.extras.get("review_status", REVIEW_APPROVED) in (REVIEW_APPROVED,
                                                              REVIEW_CORRECTED)
    ]
    return replace_records(manifest, records)
