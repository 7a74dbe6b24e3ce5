"""Completion backends: a real HTTP endpoint and a deterministic synthetic world.

The synthetic backend stands in for the model during tests and simulations.
Each candidate it emits embeds a latent quality theta; it recognizes the
pipeline's prompt shapes (generation, pairwise judging, mutation, pointwise
scoring, self-refine) and answers from theta plus the request seed, so whole
runs are reproducible and ground truth stays available to the harness.
"""

from __future__ import annotations

import json
import logging
import os
import re
import time
from dataclasses import dataclass
from typing import Protocol

import numpy as np
import requests

from .errors import BackendError

logger = logging.getLogger(__name__)

JUDGE_MODE_FIXED = "fixed-accuracy"
JUDGE_MODE_LOGISTIC = "logistic"


@dataclass(frozen=True)
class CompletionRequest:
    """One completion call; `seed` is honored by the synthetic backend only."""

    user_prompt: str
    system_prompt: str | None = None
    temperature: float = 1.0
    seed: int | None = None

    def __post_init__(self) -> None:
        if not 0.0 <= self.temperature <= 2.0:
            raise ValueError(f"temperature {self.temperature} out of range [0, 2]")


class Backend(Protocol):
    def complete(self, request: CompletionRequest) -> str: ...


class HttpBackend:
    """POSTs {system, user, temperature} to a single endpoint, expects {text}.

    Transport failures (connection errors, timeouts, HTTP 429/5xx) are
    retried `transport_retries` times with exponential backoff starting at
    `backoff_seconds`; other HTTP errors fail immediately.  The auth token is
    read from the environment at call time so configs never hold secrets.
    """

    def __init__(
        self,
        base_url: str,
        auth_token_env: str | None = None,
        timeout: float = 600.0,
        transport_retries: int = 2,
        backoff_seconds: float = 1.0,
    ) -> None:
        self.base_url = base_url
        self.auth_token_env = auth_token_env
        self.timeout = timeout
        self.transport_retries = transport_retries
        self.backoff_seconds = backoff_seconds

    def complete(self, request: CompletionRequest) -> str:
        headers = {}
        if self.auth_token_env:
            token = os.environ.get(self.auth_token_env)
            if token:
                headers["Authorization"] = f"Bearer {token}"
        body = {
            "system": request.system_prompt,
            "user": request.user_prompt,
            "temperature": request.temperature,
        }
        last_error: Exception | None = None
        for attempt in range(self.transport_retries + 1):
            if attempt:
                time.sleep(self.backoff_seconds * 2 ** (attempt - 1))
            try:
                response = requests.post(self.base_url, json=body, headers=headers, timeout=self.timeout)
                if response.status_code == 429 or response.status_code >= 500:
                    last_error = BackendError(f"HTTP {response.status_code} from {self.base_url}")
                    logger.warning("retryable status %s (attempt %d)", response.status_code, attempt + 1)
                    continue
                response.raise_for_status()
                payload = response.json()
                if "text" not in payload:
                    raise BackendError(f"endpoint reply is missing 'text': {payload!r:.200}")
                return payload["text"]
            except (requests.ConnectionError, requests.Timeout) as exc:
                last_error = exc
                logger.warning("transport failure (attempt %d): %s", attempt + 1, exc)
            except requests.HTTPError as exc:
                raise BackendError(f"HTTP error from {self.base_url}: {exc}") from exc
            except ValueError as exc:  # not JSON
                raise BackendError(f"endpoint reply is not JSON: {exc}") from exc
        raise BackendError(
            f"backend unavailable after {self.transport_retries + 1} attempts: {last_error}"
        ) from last_error


@dataclass(frozen=True)
class SyntheticWorldConfig:
    """Ground truth for the synthetic world.

    Latent quality theta is drawn from N(theta_mean, theta_std^2) per
    candidate; a candidate is accepted iff theta >= acceptance_threshold.
    The pairwise judge either picks the higher-theta side with probability
    judge_accuracy (fixed-accuracy mode, ties only on exactly equal theta)
    or samples the winner from sigmoid(theta_a - theta_b) (logistic mode).
    Mutation shifts theta by N(mutation_shift_mean, mutation_shift_std^2)
    plus feedback_bonus when feedback is present.  The pointwise judge says
    YES to accepted candidates with probability pointwise_recall_accepted
    and NO to rejected ones with probability pointwise_recall_rejected.
    """

    theta_mean: float = 0.0
    theta_std: float = 1.0
    judge_mode: str = JUDGE_MODE_FIXED
    judge_accuracy: float = 0.862
    mutation_shift_mean: float = 0.2
    mutation_shift_std: float = 0.1
    feedback_bonus: float = 0.0
    acceptance_threshold: float = 1.2815515655446004  # 90th percentile of N(0, 1)
    pointwise_recall_accepted: float = 0.964
    pointwise_recall_rejected: float = 0.622

    def __post_init__(self) -> None:
        if self.judge_mode not in (JUDGE_MODE_FIXED, JUDGE_MODE_LOGISTIC):
            raise ValueError(f"unknown judge_mode {self.judge_mode!r}")
        if self.judge_mode == JUDGE_MODE_FIXED and not 0.5 <= self.judge_accuracy <= 1.0:
            raise ValueError("judge_accuracy must be in [0.5, 1]")
        if self.theta_std < 0 or self.mutation_shift_std < 0:
            raise ValueError("standard deviations must be non-negative")
        for name in ("pointwise_recall_accepted", "pointwise_recall_rejected"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must be in [0, 1]")


_THETA_RE = re.compile(r"theta=([-+]?\d+\.\d+)")


def format_candidate(theta: float) -> str:
    """Candidate text carrying its latent quality where a code block would be."""
    return (
        "Synthetic reasoning about the problem.\n"
        "```cpp\n"
        f"// theta={theta:.9f}\n"
        "int main() { return 0; }\n"
        "```"
    )


def parse_theta(text: str) -> float:
    """Recover the latent quality embedded in synthetic candidate text."""
    match = _THETA_RE.search(text)
    if match is None:
        raise ValueError("no theta marker in candidate text")
    return float(match.group(1))


def synthetic_mutate(parent_theta: float, feedback_present: bool, world: SyntheticWorldConfig, seed: int) -> float:
    """Child quality after one mutation, deterministic in seed."""
    rng = np.random.default_rng(seed)
    shift = rng.normal(world.mutation_shift_mean, world.mutation_shift_std)
    if feedback_present:
        shift += world.feedback_bonus
    return parent_theta + shift


def _sigmoid(x: float) -> float:
    return 1.0 / (1.0 + np.exp(-x))


class SyntheticBackend:
    """Deterministic test double dispatching on the prompt's structure."""

    def __init__(self, world: SyntheticWorldConfig | None = None) -> None:
        self.world = world if world is not None else SyntheticWorldConfig()

    def complete(self, request: CompletionRequest) -> str:
        seed = 0 if request.seed is None else request.seed
        prompt = request.user_prompt
        if "## Solution A" in prompt and "## Solution B" in prompt:
            return self._judge(prompt, seed)
        if "VERDICT:" in prompt:
            return self._pointwise(prompt, seed)
        if "## Current Solution" in prompt:
            return self._refine(prompt, seed)
        if "## Solution" in prompt:
            return self._mutate(prompt, seed)
        return format_candidate(self._draw_theta(seed))

    def _draw_theta(self, seed: int) -> float:
        rng = np.random.default_rng(seed)
        return float(rng.normal(self.world.theta_mean, self.world.theta_std))

    def _judge(self, prompt: str, seed: int) -> str:
        a_start = prompt.index("## Solution A")
        b_start = prompt.index("## Solution B")
        theta_a = parse_theta(prompt[a_start:b_start])
        theta_b = parse_theta(prompt[b_start:])
        rng = np.random.default_rng(seed)
        if self.world.judge_mode == JUDGE_MODE_LOGISTIC:
            winner = "A" if rng.random() < _sigmoid(theta_a - theta_b) else "B"
        elif theta_a == theta_b:
            winner = "TIE"
        else:
            correct = rng.random() < self.world.judge_accuracy
            better = "A" if theta_a > theta_b else "B"
            winner = better if correct else ("B" if better == "A" else "A")
        if winner == "A":
            feedback_a = "Solution A handles the decisive cases more convincingly."
            feedback_b = "Solution B looks more fragile than Solution A on edge inputs."
        elif winner == "B":
            feedback_a = "Solution A looks more fragile than Solution B on edge inputs."
            feedback_b = "Solution B handles the decisive cases more convincingly."
        else:
            feedback_a = "Solution A and Solution B appear equally likely to be Accepted."
            feedback_b = "Solution A and Solution B appear equally likely to be Accepted."
        return json.dumps({"feedback_a": feedback_a, "feedback_b": feedback_b, "winner": winner})

    def _pointwise(self, prompt: str, seed: int) -> str:
        theta = parse_theta(prompt[prompt.index("## Solution") :])
        accepted = theta >= self.world.acceptance_threshold
        rng = np.random.default_rng(seed)
        if accepted:
            say_yes = rng.random() < self.world.pointwise_recall_accepted
        else:
            say_yes = rng.random() >= self.world.pointwise_recall_rejected
        return f"Synthetic assessment of the solution.\nVERDICT: {'YES' if say_yes else 'NO'}"

    def _mutate(self, prompt: str, seed: int) -> str:
        parent = parse_theta(prompt[prompt.index("## Solution") :])
        feedback_present = "## Pairwise Feedback" in prompt
        return format_candidate(synthetic_mutate(parent, feedback_present, self.world, seed))

    def _refine(self, prompt: str, seed: int) -> str:
        parent = parse_theta(prompt[prompt.index("## Current Solution") :])
        return format_candidate(synthetic_mutate(parent, False, self.world, seed))
