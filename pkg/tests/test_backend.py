"""Backend tests: synthetic world statistics and HTTP transport behavior."""

import json
import os
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer

import numpy as np
import pytest

from btevolve.backends import (
    CompletionRequest,
    HttpBackend,
    SyntheticBackend,
    SyntheticWorldConfig,
    format_candidate,
    parse_theta,
    synthetic_mutate,
)
from btevolve.btrank import LEFT_WINS, RIGHT_WINS, TIE
from btevolve.errors import BackendError
from btevolve.judging import canonicalize, parse_judge_reply, render_comparison_prompt
from btevolve.pipeline import derive_seed
from btevolve.prompts import POINTWISE_TEMPLATE, SELF_REFINE_TEMPLATE
from conftest import sampled


def judge_once(backend, theta_left, theta_right, seed):
    # order and verdict need independent streams, as the pipeline derives them
    left = sampled("L", format_candidate(theta_left))
    right = sampled("R", format_candidate(theta_right))
    task = render_comparison_prompt("p", left, right, seed=derive_seed(seed, 0))
    reply = backend.complete(
        CompletionRequest(user_prompt=task.prompt_text, seed=derive_seed(seed, 1))
    )
    return canonicalize(task, *parse_judge_reply(reply))


def test_world_config_validation():
    with pytest.raises(ValueError):
        SyntheticWorldConfig(judge_mode="oracle")
    with pytest.raises(ValueError):
        SyntheticWorldConfig(judge_accuracy=0.3)
    with pytest.raises(ValueError):
        SyntheticWorldConfig(theta_std=-1.0)
    with pytest.raises(ValueError):
        SyntheticWorldConfig(pointwise_recall_accepted=1.5)
    SyntheticWorldConfig(judge_mode="logistic", judge_accuracy=0.0)  # unused in this mode


def test_theta_round_trip():
    text = format_candidate(-1.234567891)
    assert parse_theta(text) == pytest.approx(-1.234567891, abs=1e-9)
    with pytest.raises(ValueError):
        parse_theta("no marker")


def test_completion_request_validation():
    with pytest.raises(ValueError):
        CompletionRequest("p", temperature=3.0)


def test_generation_draws_configured_distribution():
    world = SyntheticWorldConfig(theta_mean=2.0, theta_std=0.25)
    backend = SyntheticBackend(world)
    thetas = [
        parse_theta(backend.complete(CompletionRequest("solve this", seed=s)))
        for s in range(400)
    ]
    assert abs(np.mean(thetas) - 2.0) < 0.05
    assert abs(np.std(thetas) - 0.25) < 0.03


def test_same_seed_same_reply():
    backend = SyntheticBackend()
    a = backend.complete(CompletionRequest("problem text", seed=42))
    b = backend.complete(CompletionRequest("problem text", seed=42))
    assert a == b


def test_perfect_judge_always_picks_higher_theta():
    backend = SyntheticBackend(SyntheticWorldConfig(judge_accuracy=1.0))
    for seed in range(40):
        judgment = judge_once(backend, 0.8, -0.2, seed)
        assert judgment.outcome == LEFT_WINS
        judgment = judge_once(backend, -0.8, 1.4, seed)
        assert judgment.outcome == RIGHT_WINS


def test_equal_thetas_tie_in_fixed_mode():
    backend = SyntheticBackend(SyntheticWorldConfig(judge_accuracy=1.0))
    assert judge_once(backend, 0.5, 0.5, 7).outcome == TIE


def test_fixed_accuracy_frequency():
    backend = SyntheticBackend(SyntheticWorldConfig(judge_accuracy=0.862))
    wins = sum(judge_once(backend, 1.0, 0.0, seed).outcome == LEFT_WINS for seed in range(2000))
    # 3.3 sigma window around 0.862 at 2000 draws
    assert abs(wins / 2000 - 0.862) < 0.026


def test_logistic_judge_frequency():
    backend = SyntheticBackend(SyntheticWorldConfig(judge_mode="logistic"))
    expected = 1.0 / (1.0 + np.exp(-1.0))
    wins = sum(judge_once(backend, 1.0, 0.0, seed).outcome == LEFT_WINS for seed in range(2000))
    assert abs(wins / 2000 - expected) < 0.033


def test_judge_feedback_mentions_labels():
    backend = SyntheticBackend(SyntheticWorldConfig(judge_accuracy=1.0))
    judgment = judge_once(backend, 1.0, 0.0, 3)
    assert "Solution A" in judgment.rationale_for_left + judgment.rationale_for_right


def test_pointwise_recalls():
    world = SyntheticWorldConfig(
        acceptance_threshold=0.0, pointwise_recall_accepted=0.9, pointwise_recall_rejected=0.7
    )
    backend = SyntheticBackend(world)

    def verdict(theta, seed):
        prompt = POINTWISE_TEMPLATE.replace("{problem}", "p").replace(
            "{code}", format_candidate(theta)
        )
        return backend.complete(CompletionRequest(prompt, seed=seed)).endswith("VERDICT: YES")

    yes_on_accepted = sum(verdict(1.0, s) for s in range(1500)) / 1500
    yes_on_rejected = sum(verdict(-1.0, s) for s in range(1500)) / 1500
    assert abs(yes_on_accepted - 0.9) < 0.03
    assert abs((1.0 - yes_on_rejected) - 0.7) < 0.04


def test_mutation_shift_and_feedback_bonus():
    world = SyntheticWorldConfig(
        mutation_shift_mean=0.3, mutation_shift_std=0.05, feedback_bonus=0.25
    )
    backend = SyntheticBackend(world)
    base = format_candidate(0.5)
    plain_prompt = f"## Problem\np\n\n## Solution\n```cpp\n{base}\n```\n\n## Task\nrewrite"
    fed_prompt = plain_prompt.replace("## Task", "## Pairwise Feedback\nstuff\n\n## Task")
    for seed in (1, 2, 3):
        plain = parse_theta(backend.complete(CompletionRequest(plain_prompt, seed=seed)))
        fed = parse_theta(backend.complete(CompletionRequest(fed_prompt, seed=seed)))
        assert plain == pytest.approx(synthetic_mutate(0.5, False, world, seed), abs=1e-9)
        assert fed == pytest.approx(plain + 0.25, abs=1e-9)


def test_refine_prompt_mutates_without_bonus():
    world = SyntheticWorldConfig(mutation_shift_mean=0.1, mutation_shift_std=0.02, feedback_bonus=0.9)
    backend = SyntheticBackend(world)
    prompt = SELF_REFINE_TEMPLATE.replace("{problem}", "p").replace("{code}", format_candidate(0.0))
    child = parse_theta(backend.complete(CompletionRequest(prompt, seed=5)))
    assert child == pytest.approx(synthetic_mutate(0.0, False, world, 5), abs=1e-9)


class _Script(BaseHTTPRequestHandler):
    """Serves queued (status, body) entries; records request bodies and headers."""

    script = []
    seen = []

    def do_POST(self):
        length = int(self.headers.get("Content-Length", 0))
        body = json.loads(self.rfile.read(length)) if length else {}
        _Script.seen.append({"body": body, "auth": self.headers.get("Authorization")})
        status, payload = _Script.script.pop(0) if _Script.script else (500, "{}")
        data = payload.encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def log_message(self, *args):
        pass


@pytest.fixture()
def http_server():
    server = HTTPServer(("127.0.0.1", 0), _Script)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    _Script.script = []
    _Script.seen = []
    yield f"http://127.0.0.1:{server.server_port}", _Script
    server.shutdown()
    thread.join(timeout=5)


def test_http_success_and_payload_shape(http_server):
    url, script = http_server
    script.script.append((200, json.dumps({"text": "hello"})))
    backend = HttpBackend(url, timeout=5)
    reply = backend.complete(CompletionRequest("user text", system_prompt="sys", temperature=0.5))
    assert reply == "hello"
    sent = script.seen[0]["body"]
    assert sent == {"system": "sys", "user": "user text", "temperature": 0.5}


def test_http_retries_server_errors_then_succeeds(http_server):
    url, script = http_server
    script.script.extend([(500, "{}"), (429, "{}"), (200, json.dumps({"text": "ok"}))])
    backend = HttpBackend(url, timeout=5, transport_retries=2, backoff_seconds=0.0)
    assert backend.complete(CompletionRequest("u")) == "ok"
    assert len(script.seen) == 3


def test_http_gives_up_after_budget(http_server):
    url, script = http_server
    script.script.extend([(503, "{}")] * 3)
    backend = HttpBackend(url, timeout=5, transport_retries=2, backoff_seconds=0.0)
    with pytest.raises(BackendError, match="3 attempts"):
        backend.complete(CompletionRequest("u"))


def test_http_client_errors_fail_immediately(http_server):
    url, script = http_server
    script.script.extend([(400, "{}"), (200, json.dumps({"text": "never"}))])
    backend = HttpBackend(url, timeout=5, transport_retries=2, backoff_seconds=0.0)
    with pytest.raises(BackendError, match="HTTP error"):
        backend.complete(CompletionRequest("u"))
    assert len(script.seen) == 1


def test_http_missing_text_field(http_server):
    url, script = http_server
    script.script.append((200, json.dumps({"output": "x"})))
    backend = HttpBackend(url, timeout=5)
    with pytest.raises(BackendError, match="missing 'text'"):
        backend.complete(CompletionRequest("u"))


def test_http_auth_token_read_from_env(http_server, monkeypatch):
    url, script = http_server
    script.script.extend([(200, json.dumps({"text": "a"})), (200, json.dumps({"text": "b"}))])
    backend = HttpBackend(url, auth_token_env="TEST_JUDGE_TOKEN", timeout=5)
    monkeypatch.delenv("TEST_JUDGE_TOKEN", raising=False)
    backend.complete(CompletionRequest("u"))
    monkeypatch.setenv("TEST_JUDGE_TOKEN", "sekret")
    backend.complete(CompletionRequest("u"))
    assert script.seen[0]["auth"] is None
    assert script.seen[1]["auth"] == "Bearer sekret"


def test_http_connection_refused():
    backend = HttpBackend("http://127.0.0.1:9", timeout=0.2, transport_retries=1, backoff_seconds=0.0)
    with pytest.raises(BackendError, match="2 attempts"):
        backend.complete(CompletionRequest("u"))
