"""End-to-end run orchestration: sample, evolve, final dense comparison, select.

A run costs exactly

    compute_budget(n, k, t, m) = n + t*(n*k/2 + 3n/4) + n*m/2

primary backend calls (parse retries are counted separately) and joins at
1 + 2t + 1 barriers: one after sampling, one after each generation's
comparisons and each generation's mutations, and one after the final round.

Seed discipline: every randomized step uses a child seed derived from
(root seed, round, purpose, index...) through numpy's SeedSequence, so no
result depends on scheduling order; traces are byte-identical across
parallelism limits.  Rounds are numbered 1..t for the evolution rounds and
t+1 for the final comparison round.

The trace is line-delimited JSON, one record per line with fields
{kind, generation, round, payload, schema_version}.  Run-level records
(config, summary, abort) carry generation -1; candidate records carry their
own generation; judgment and score-fit records carry the generation of the
population being compared.  Records are flushed to disk as each batch
completes, so an aborted run keeps everything up to the last completed
barrier plus one abort record.
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .backends import (
    Backend,
    CompletionRequest,
    HttpBackend,
    SyntheticBackend,
    SyntheticWorldConfig,
)
from .btrank import ComparisonRecord, ScoreVector, fit_bt, rank
from .errors import BackendError, ConfigError, JudgeParseError, ReplayError
from .judging import Judgment, canonicalize, degraded_tie, parse_judge_reply, render_comparison_prompt
from .pairing import sample_pairing
from .population import (
    ORIGIN_MUTATED,
    ORIGIN_SAMPLED,
    Candidate,
    FeedbackStrategy,
    GenerationState,
    aggregate_feedback,
    assemble_next_generation,
    render_mutation_prompt,
    select_discards,
    select_elites,
)
from .prompts import PromptTemplates

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1

# purpose codes for seed derivation; part of the documented scheme above
_P_SAMPLE = 0
_P_PAIRING = 1
_P_ORDER = 2
_P_JUDGE = 3
_P_RETRY = 4
_P_MUTATE = 5


def derive_seed(root: int, *path: int) -> int:
    """Child seed for (root, round, purpose, index...), stable across platforms."""
    return int(np.random.SeedSequence([root, *path]).generate_state(1, np.uint64)[0])


def compute_budget(n: int, k: int, t: int, m: int) -> int:
    """Primary backend calls for a full run: n + t*(n*k/2 + 3n/4) + n*m/2."""
    for name, value in (("n", n), ("k", k), ("t", t), ("m", m)):
        if not isinstance(value, int) or value < 0:
            raise ConfigError(f"{name} must be a non-negative integer")
    if n < 1:
        raise ConfigError("n must be positive")
    if t > 0:
        if (n * k) % 2 != 0:
            raise ConfigError(f"n*k={n * k} comparisons per round do not split into pairs")
        if (3 * n) % 4 != 0:
            raise ConfigError(f"3n/4={3 * n}/4 mutations per round is not an integer")
    if m > 0 and (n * m) % 2 != 0:
        raise ConfigError(f"n*m={n * m} final comparisons do not split into pairs")
    return n + t * ((n * k) // 2 + (3 * n) // 4) + (n * m) // 2


@dataclass(frozen=True)
class RunConfig:
    """Everything that determines a run's outputs.

    Execution limits (parallelism) are deliberately not part of the config:
    they must not change results, and the config echo embedded in outputs
    must be identical across them.
    """

    problem: str
    n: int = 20
    k: int = 4
    generations: int = 3
    final_k: int = 10
    lam: float = 0.01
    seed: int = 0
    feedback_strategy: FeedbackStrategy = FeedbackStrategy("pairwise-K", 4)
    parse_retries: int = 1
    include_restart_license: bool = True
    temperature_generate: float = 1.0
    temperature_judge: float = 0.0
    backend: str = "synthetic"
    backend_options: dict = field(default_factory=dict)
    templates: PromptTemplates = PromptTemplates()

    def __post_init__(self) -> None:
        if self.n < 4 or self.n % 4 != 0:
            raise ConfigError(f"population size n={self.n} must be a positive multiple of 4")
        if not 1 <= self.k <= self.n - 1:
            raise ConfigError(f"comparison degree k={self.k} out of range for n={self.n}")
        if (self.n * self.k) % 2 != 0:
            raise ConfigError(f"n*k={self.n * self.k} must be even")
        if not 1 <= self.final_k <= self.n - 1:
            raise ConfigError(f"final degree m={self.final_k} out of range for n={self.n}")
        if (self.n * self.final_k) % 2 != 0:
            raise ConfigError(f"n*m={self.n * self.final_k} must be even")
        if self.generations < 0:
            raise ConfigError("generations must be non-negative")
        if self.lam <= 0:
            raise ConfigError("lam must be positive")
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigError("seed must be a non-negative integer")
        if self.parse_retries < 0:
            raise ConfigError("parse_retries must be non-negative")
        if self.backend not in ("synthetic", "http"):
            raise ConfigError(f"unknown backend {self.backend!r}")
        for name in ("temperature_generate", "temperature_judge"):
            if not 0.0 <= getattr(self, name) <= 2.0:
                raise ConfigError(f"{name} out of range [0, 2]")

    def echo(self) -> dict:
        """JSON-ready copy of the resolved config, embedded in every artifact."""
        return asdict(self)


def make_backend(config: RunConfig) -> Backend:
    try:
        if config.backend == "synthetic":
            return SyntheticBackend(SyntheticWorldConfig(**config.backend_options))
        return HttpBackend(**config.backend_options)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad backend options: {exc}") from exc


class RunTrace:
    """Append-only record log, optionally persisted as line-delimited JSON."""

    def __init__(self, path: str | Path | None = None) -> None:
        self.records: list[dict] = []
        self.path = Path(path) if path is not None else None
        self._flushed = 0
        if self.path is not None:
            self.path.write_text("")

    def append(self, kind: str, generation: int, round_index: int, payload: dict) -> None:
        self.records.append(
            {
                "kind": kind,
                "generation": generation,
                "round": round_index,
                "payload": payload,
                "schema_version": SCHEMA_VERSION,
            }
        )

    def flush(self) -> None:
        if self.path is None:
            self._flushed = len(self.records)
            return
        if self._flushed < len(self.records):
            with open(self.path, "a", encoding="utf-8") as sink:
                for record in self.records[self._flushed :]:
                    sink.write(_dump_record(record) + "\n")
        self._flushed = len(self.records)

    def to_jsonl(self) -> str:
        return "".join(_dump_record(record) + "\n" for record in self.records)

    def records_of_kind(self, kind: str) -> list[dict]:
        return [record for record in self.records if record["kind"] == kind]


def _dump_record(record: dict) -> str:
    return json.dumps(record, sort_keys=True, separators=(",", ":"))


def _run_parallel(tasks, parallelism: int) -> list:
    """Run no-arg callables, returning results in submission order."""
    if parallelism <= 1:
        return [task() for task in tasks]
    with ThreadPoolExecutor(max_workers=parallelism) as pool:
        futures = [pool.submit(task) for task in tasks]
        return [future.result() for future in futures]


def _judge_pair(
    backend: Backend,
    config: RunConfig,
    problem: str,
    left: Candidate,
    right: Candidate,
    round_no: int,
    pair_index: int,
) -> tuple[Judgment, int]:
    """One comparison with presentation randomization and parse-retry-then-tie.

    Returns the canonical judgment plus how many retry calls were spent.
    """
    order_seed = derive_seed(config.seed, round_no, _P_ORDER, pair_index)
    task = render_comparison_prompt(problem, left, right, order_seed, template=config.templates.comparison)
    retries_used = 0
    for attempt in range(config.parse_retries + 1):
        if attempt == 0:
            seed = derive_seed(config.seed, round_no, _P_JUDGE, pair_index)
        else:
            seed = derive_seed(config.seed, round_no, _P_RETRY, pair_index, attempt)
            retries_used += 1
        request = CompletionRequest(
            user_prompt=task.prompt_text,
            temperature=config.temperature_judge,
            seed=seed,
        )
        try:
            reply = backend.complete(request)
        except BackendError as exc:
            raise BackendError(
                f"comparison round {round_no}, pair {pair_index} ({left.id} vs {right.id}): {exc}"
            ) from exc
        try:
            winner, feedback_a, feedback_b = parse_judge_reply(reply)
        except JudgeParseError:
            continue
        return canonicalize(task, winner, feedback_a, feedback_b), retries_used
    logger.warning("pair %d in round %d degraded to a tie after %d retries", pair_index, round_no, retries_used)
    return degraded_tie(task), retries_used


def _comparison_round(
    backend: Backend,
    config: RunConfig,
    state: GenerationState,
    degree: int,
    round_no: int,
    parallelism: int,
) -> tuple[list[Judgment], list[int]]:
    """Pair the generation at the given degree and judge every pair."""
    plan = sample_pairing(config.n, degree, derive_seed(config.seed, round_no, _P_PAIRING, 0))
    members = state.members
    tasks = [
        (lambda p=p, i=i, j=j: _judge_pair(backend, config, config.problem, members[i], members[j], round_no, p))
        for p, (i, j) in enumerate(plan.pairs)
    ]
    results = _run_parallel(tasks, parallelism)
    judgments = [judgment for judgment, _ in results]
    retries = [spent for _, spent in results]
    return judgments, retries


def _score_state(state: GenerationState, judgments: list[Judgment], lam: float) -> GenerationState:
    index = {member.id: i for i, member in enumerate(state.members)}
    records = [
        ComparisonRecord(index[j.left_id], index[j.right_id], j.outcome) for j in judgments
    ]
    scores = fit_bt(records, len(state.members), lam=lam)
    return GenerationState(state.generation, state.members, tuple(judgments), scores)


def _judgment_payload(judgment: Judgment, pair_index: int, retries: int) -> dict:
    return {
        "left_id": judgment.left_id,
        "right_id": judgment.right_id,
        "outcome": judgment.outcome,
        "rationale_for_left": judgment.rationale_for_left,
        "rationale_for_right": judgment.rationale_for_right,
        "presented_first": judgment.presented_first,
        "degraded": judgment.degraded,
        "pair_index": pair_index,
        "retries": retries,
    }


def _candidate_payload(candidate: Candidate) -> dict:
    return {
        "id": candidate.id,
        "content": candidate.content,
        "generation": candidate.generation,
        "origin": candidate.origin,
        "parent_id": candidate.parent_id,
    }


def _score_payload(state: GenerationState) -> dict:
    scores = state.scores
    return {
        "member_ids": [member.id for member in state.members],
        "scores": [float(s) for s in scores.scores],
        "lam": scores.lam,
        "converged": scores.converged,
        "iterations": scores.iterations,
    }


def run_pipeline(
    config: RunConfig,
    backend: Backend | None = None,
    parallelism: int = 1,
    trace_path: str | Path | None = None,
) -> tuple[Candidate, RunTrace]:
    """Run the full loop and return (selected candidate, trace).

    Backend failures abort the run after flushing the trace through the last
    completed batch plus an abort record; the BackendError is re-raised with
    round/pair context attached.
    """
    if parallelism < 1:
        raise ConfigError("parallelism must be at least 1")
    if backend is None:
        backend = make_backend(config)
    trace = RunTrace(trace_path)
    trace.append("config", -1, 0, config.echo())
    trace.flush()

    n, t_total = config.n, config.generations
    primary_calls = 0
    retry_calls = 0
    barriers = 0
    round_no = 0

    def barrier() -> None:
        nonlocal barriers
        barriers += 1
        trace.append(
            "barrier",
            -1,
            round_no,
            {"barrier": barriers, "primary_calls": primary_calls, "retry_calls": retry_calls},
        )
        trace.flush()

    try:
        # generation 0: sample n candidates
        round_no = 1

        def sample_task(i: int):
            request = CompletionRequest(
                user_prompt=config.templates.generation_user.replace("{problem}", config.problem),
                system_prompt=config.templates.generation_system,
                temperature=config.temperature_generate,
                seed=derive_seed(config.seed, 0, _P_SAMPLE, i),
            )
            try:
                return backend.complete(request)
            except BackendError as exc:
                raise BackendError(f"sampling candidate {i}: {exc}") from exc

        contents = _run_parallel([lambda i=i: sample_task(i) for i in range(n)], parallelism)
        primary_calls += n
        state = GenerationState(
            0,
            tuple(
                Candidate(f"g0-s{i:03d}", content, 0, ORIGIN_SAMPLED)
                for i, content in enumerate(contents)
            ),
        )
        for member in state.members:
            trace.append("candidate", 0, round_no, _candidate_payload(member))
        barrier()

        for t in range(1, t_total + 1):
            round_no = t
            judgments, retries = _comparison_round(backend, config, state, config.k, t, parallelism)
            primary_calls += len(judgments)
            retry_calls += sum(retries)
            for p, judgment in enumerate(judgments):
                trace.append("judgment", state.generation, round_no, _judgment_payload(judgment, p, retries[p]))
            barrier()

            state = _score_state(state, judgments, config.lam)
            trace.append("score-fit", state.generation, round_no, _score_payload(state))
            elites = select_elites(state.scores, n)
            discards = select_discards(state.scores, n)
            trace.append(
                "routing",
                state.generation,
                round_no,
                {
                    "elites": [state.members[i].id for i in sorted(elites)],
                    "discards": [state.members[i].id for i in sorted(discards)],
                    "mutation_parents": [
                        state.members[i].id for i in range(n) if i not in discards
                    ],
                },
            )
            trace.flush()

            def mutate_task(i: int, gen: int = t, source: GenerationState = state):
                member = source.members[i]
                feedback = aggregate_feedback(member.id, source.judgments, config.feedback_strategy)
                prompt = render_mutation_prompt(
                    config.problem,
                    member,
                    feedback,
                    include_restart_license=config.include_restart_license,
                    with_feedback_template=config.templates.mutation_with_feedback,
                    without_feedback_template=config.templates.mutation_without_feedback,
                )
                request = CompletionRequest(
                    user_prompt=prompt,
                    system_prompt=config.templates.generation_system,
                    temperature=config.temperature_generate,
                    seed=derive_seed(config.seed, gen, _P_MUTATE, i),
                )
                try:
                    content = backend.complete(request)
                except BackendError as exc:
                    raise BackendError(f"mutation round {gen}, member {member.id}: {exc}") from exc
                return Candidate(f"g{gen}-mut{i:03d}", content, gen, ORIGIN_MUTATED, parent_id=member.id)

            survivors = [i for i in range(n) if i not in discards]
            children = _run_parallel([lambda i=i: mutate_task(i) for i in survivors], parallelism)
            primary_calls += len(children)
            next_state = assemble_next_generation(state, elites, discards, children)
            for member in next_state.members:
                trace.append("candidate", next_state.generation, round_no, _candidate_payload(member))
            barrier()
            state = next_state

        # final round: dense comparisons over the last generation, then pick the top
        round_no = t_total + 1
        judgments, retries = _comparison_round(backend, config, state, config.final_k, round_no, parallelism)
        primary_calls += len(judgments)
        retry_calls += sum(retries)
        for p, judgment in enumerate(judgments):
            trace.append("judgment", state.generation, round_no, _judgment_payload(judgment, p, retries[p]))
        barrier()

        state = _score_state(state, judgments, config.lam)
        trace.append("score-fit", state.generation, round_no, _score_payload(state))
        order = rank(state.scores)
        selected = state.members[order[0]]
        trace.append(
            "selection",
            state.generation,
            round_no,
            {"selected_id": selected.id, "selected_index": order[0]},
        )

        budget = compute_budget(n, config.k, t_total, config.final_k)
        if primary_calls != budget:  # accounting bug, not an input problem
            raise RuntimeError(f"primary calls {primary_calls} != budget {budget}")
        trace.append(
            "summary",
            -1,
            round_no,
            {
                "primary_calls": primary_calls,
                "retry_calls": retry_calls,
                "budget": budget,
                "barriers": barriers,
            },
        )
        trace.flush()
        return selected, trace
    except BackendError as exc:
        trace.append("abort", -1, round_no, {"error": str(exc)})
        trace.flush()
        raise


@dataclass
class ReplayResult:
    """Reconstructed run: one state per generation, plus the final selection."""

    states: list[GenerationState]
    selected_id: str | None
    config: dict | None


def _parse_trace_lines(lines) -> list[dict]:
    records = []
    for idx, line in enumerate(lines):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ReplayError(f"record {idx}: not valid JSON ({exc})") from exc
        if not isinstance(record, dict):
            raise ReplayError(f"record {idx}: expected an object")
        missing = {"kind", "generation", "round", "payload", "schema_version"} - record.keys()
        if missing:
            raise ReplayError(f"record {idx}: missing fields {sorted(missing)}")
        if record["schema_version"] != SCHEMA_VERSION:
            raise ReplayError(f"record {idx}: unsupported schema_version {record['schema_version']!r}")
        records.append(record)
    return records


def replay(source) -> ReplayResult:
    """Rebuild every GenerationState (members, judgments, scores) from a trace.

    Accepts a RunTrace, a path to a trace file, or an iterable of JSONL lines.
    Raises ReplayError naming the offending record for corrupt input, and for
    truncated traces that never reached their summary record.
    """
    if isinstance(source, RunTrace):
        lines = source.to_jsonl().splitlines()
    elif isinstance(source, (str, Path)):
        lines = Path(source).read_text(encoding="utf-8").splitlines()
    else:
        lines = list(source)
    records = _parse_trace_lines(lines)
    if not records:
        raise ReplayError("empty trace")

    config: dict | None = None
    candidates: dict[int, list[Candidate]] = {}
    judgments: dict[int, list[Judgment]] = {}
    fits: dict[int, ScoreVector] = {}
    selected_id: str | None = None
    summary_seen = False

    for idx, record in enumerate(records):
        kind, generation, payload = record["kind"], record["generation"], record["payload"]
        try:
            if kind == "config":
                config = payload
            elif kind == "candidate":
                candidates.setdefault(generation, []).append(Candidate(**payload))
            elif kind == "judgment":
                fields = {k: v for k, v in payload.items() if k not in ("pair_index", "retries")}
                judgments.setdefault(generation, []).append(Judgment(**fields))
            elif kind == "score-fit":
                fits[generation] = ScoreVector(
                    scores=np.asarray(payload["scores"], dtype=np.float64),
                    lam=payload["lam"],
                    converged=payload["converged"],
                    iterations=payload["iterations"],
                )
            elif kind == "selection":
                selected_id = payload["selected_id"]
            elif kind == "summary":
                summary_seen = True
            elif kind in ("barrier", "routing", "abort"):
                pass
            else:
                raise ReplayError(f"record {idx}: unknown kind {kind!r}")
        except ReplayError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise ReplayError(f"record {idx}: bad {kind} payload ({exc})") from exc

    if not summary_seen:
        raise ReplayError(f"truncated trace: no summary record (last record index {len(records) - 1})")

    states = []
    for generation in sorted(candidates):
        states.append(
            GenerationState(
                generation=generation,
                members=tuple(candidates[generation]),
                judgments=tuple(judgments.get(generation, ())),
                scores=fits.get(generation),
            )
        )
    return ReplayResult(states=states, selected_id=selected_id, config=config)
