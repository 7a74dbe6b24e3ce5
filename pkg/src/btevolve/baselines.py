"""Baselines and judge diagnostics.

Pointwise scoring asks for standalone YES/NO verdicts and keeps only replies
whose final non-empty line is exactly "VERDICT: YES" or "VERDICT: NO"
(trailing whitespace tolerated, nothing else).  Self-refine loops a single
review-and-rewrite call per candidate per round.  The diagnostic measures a
judge's pairwise accuracy and per-class pointwise recalls on labeled
accepted/rejected pairs.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import prompts
from .backends import Backend, CompletionRequest
from .btrank import LEFT_WINS
from .errors import JudgeParseError
from .judging import canonicalize, parse_judge_reply, render_comparison_prompt
from .population import ORIGIN_MUTATED, Candidate

logger = logging.getLogger(__name__)

VERDICT_YES = "VERDICT: YES"
VERDICT_NO = "VERDICT: NO"


def _seed(base: int, *path: int) -> int:
    return int(np.random.SeedSequence([base, *path]).generate_state(1, np.uint64)[0])


def _run_parallel(tasks, parallelism: int) -> list:
    if parallelism <= 1:
        return [task() for task in tasks]
    from concurrent.futures import ThreadPoolExecutor

    with ThreadPoolExecutor(max_workers=parallelism) as pool:
        futures = [pool.submit(task) for task in tasks]
        return [future.result() for future in futures]


@dataclass(frozen=True)
class PointwiseVerdict:
    """Vote tally for one candidate; total_votes counts only well-formed replies."""

    candidate_id: str
    yes_votes: int
    total_votes: int

    def __post_init__(self) -> None:
        if not 0 <= self.yes_votes <= self.total_votes:
            raise ValueError("yes_votes out of range")

    @property
    def flagged(self) -> bool:
        """True when every reply was malformed and the tally is empty."""
        return self.total_votes == 0


def parse_verdict_line(reply: str) -> bool | None:
    """YES/NO from the final non-empty line, or None for a malformed reply."""
    for line in reversed(reply.splitlines()):
        if not line.strip():
            continue
        line = line.rstrip()
        if line == VERDICT_YES:
            return True
        if line == VERDICT_NO:
            return False
        return None
    return None


def pointwise_score(
    candidate: Candidate,
    problem: str,
    votes: int,
    backend: Backend,
    seed: int = 0,
    template: str = prompts.POINTWISE_TEMPLATE,
    temperature: float = 1.0,
    parallelism: int = 1,
) -> PointwiseVerdict:
    """Collect `votes` independent YES/NO verdicts; malformed replies are discarded."""
    if votes < 1:
        raise ValueError("votes must be at least 1")
    prompt = template.replace("{problem}", problem).replace("{code}", candidate.content)

    def vote_task(i: int):
        request = CompletionRequest(
            user_prompt=prompt, temperature=temperature, seed=_seed(seed, 0, i)
        )
        return parse_verdict_line(backend.complete(request))

    results = _run_parallel([lambda i=i: vote_task(i) for i in range(votes)], parallelism)
    valid = [r for r in results if r is not None]
    verdict = PointwiseVerdict(candidate.id, sum(valid), len(valid))
    if verdict.flagged:
        logger.warning("no valid verdicts for candidate %s", candidate.id)
    return verdict


def pointwise_top1_expected_accuracy(verdicts, accepted: dict) -> float:
    """Expected accept rate of the top-YES candidate under uniform tie-breaking.

    `accepted` maps candidate_id to its ground-truth accept flag.  The
    tied-top set shares the maximum YES count; the expectation is simply the
    accepted fraction within it.
    """
    if not verdicts:
        raise ValueError("need at least one verdict")
    top = max(v.yes_votes for v in verdicts)
    tied = [v for v in verdicts if v.yes_votes == top]
    return sum(bool(accepted[v.candidate_id]) for v in tied) / len(tied)


def self_refine(
    candidates,
    rounds: int,
    problem: str,
    backend: Backend,
    seed: int = 0,
    template: str = prompts.SELF_REFINE_TEMPLATE,
    system_prompt: str = prompts.GENERATION_SYSTEM_PROMPT,
    temperature: float = 1.0,
    parallelism: int = 1,
) -> list[Candidate]:
    """Each candidate reviews and rewrites itself once per round.

    Rounds are sequential per candidate (each sees its own latest version);
    candidates run independently.  Costs exactly len(candidates) * rounds
    calls.
    """
    if rounds < 0:
        raise ValueError("rounds must be non-negative")
    current = list(candidates)
    for round_no in range(1, rounds + 1):

        def refine_task(slot: int):
            member = current[slot]
            prompt = template.replace("{problem}", problem).replace("{code}", member.content)
            request = CompletionRequest(
                user_prompt=prompt,
                system_prompt=system_prompt,
                temperature=temperature,
                seed=_seed(seed, 1, round_no, slot),
            )
            content = backend.complete(request)
            return Candidate(
                id=f"{member.id}-r{round_no}",
                content=content,
                generation=member.generation + 1,
                origin=ORIGIN_MUTATED,
                parent_id=member.id,
            )

        current = _run_parallel(
            [lambda slot=slot: refine_task(slot) for slot in range(len(current))], parallelism
        )
    return current


def majority_vote(answers) -> object:
    """Most frequent answer; ties go to the answer that appeared first."""
    answers = list(answers)
    if not answers:
        raise ValueError("need at least one answer")
    counts: dict = {}
    for answer in answers:
        counts[answer] = counts.get(answer, 0) + 1
    best = max(counts.values())
    for answer in answers:
        if counts[answer] == best:
            return answer
    raise AssertionError("unreachable")


@dataclass(frozen=True)
class LabeledPair:
    """One diagnostic datum: an accepted and a rejected solution to a problem."""

    problem: str
    accepted: str
    rejected: str


def load_pairs(path: str | Path) -> list[LabeledPair]:
    """JSON lines with fields problem, accepted, rejected; bad lines are skipped."""
    pairs = []
    skipped = 0
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            if not line.strip():
                continue
            try:
                row = json.loads(line)
                pairs.append(LabeledPair(row["problem"], row["accepted"], row["rejected"]))
            except (ValueError, KeyError, TypeError):
                skipped += 1
    if skipped:
        logger.warning("skipped %d malformed pair lines", skipped)
    return pairs


@dataclass(frozen=True)
class DiagnosticReport:
    pairwise_accuracy: float
    pointwise_accuracy_on_accepted: float
    pointwise_accuracy_on_rejected: float
    pointwise_joint: float
    pair_count: int

    def to_dict(self) -> dict:
        return {
            "pairwise_accuracy": self.pairwise_accuracy,
            "pointwise_accuracy_on_accepted": self.pointwise_accuracy_on_accepted,
            "pointwise_accuracy_on_rejected": self.pointwise_accuracy_on_rejected,
            "pointwise_joint": self.pointwise_joint,
            "pair_count": self.pair_count,
        }


def judge_diagnostic(
    pairs,
    backend: Backend,
    seed: int = 0,
    comparison_template: str = prompts.COMPARISON_TEMPLATE,
    pointwise_template: str = prompts.POINTWISE_TEMPLATE,
    parallelism: int = 1,
) -> DiagnosticReport:
    """Judge quality on labeled pairs.

    Pairwise: one randomized-order comparison per pair; the judge is correct
    only when the accepted side wins (ties and unparseable replies count as
    incorrect).  Pointwise: one verdict per member; correct means YES on the
    accepted member or NO on the rejected one, malformed counting as
    incorrect; joint requires both members of a pair correct.
    """
    pairs = list(pairs)
    if not pairs:
        raise ValueError("need at least one labeled pair")

    def diagnose_task(p: int):
        pair = pairs[p]
        accepted = Candidate(f"pair{p:04d}-accepted", pair.accepted, 0, "sampled")
        rejected = Candidate(f"pair{p:04d}-rejected", pair.rejected, 0, "sampled")
        task = render_comparison_prompt(
            pair.problem, accepted, rejected, _seed(seed, 0, p), template=comparison_template
        )
        reply = backend.complete(
            CompletionRequest(user_prompt=task.prompt_text, temperature=0.0, seed=_seed(seed, 1, p))
        )
        try:
            judgment = canonicalize(task, *parse_judge_reply(reply))
            pairwise_correct = judgment.outcome == LEFT_WINS
        except JudgeParseError:
            pairwise_correct = False

        def classify(content: str, which: int) -> bool | None:
            prompt = pointwise_template.replace("{problem}", pair.problem).replace("{code}", content)
            return parse_verdict_line(
                backend.complete(
                    CompletionRequest(user_prompt=prompt, temperature=0.0, seed=_seed(seed, 2 + which, p))
                )
            )

        accepted_correct = classify(pair.accepted, 0) is True
        rejected_correct = classify(pair.rejected, 1) is False
        return pairwise_correct, accepted_correct, rejected_correct

    results = _run_parallel([lambda p=p: diagnose_task(p) for p in range(len(pairs))], parallelism)
    count = len(results)
    pairwise = sum(r[0] for r in results) / count
    on_accepted = sum(r[1] for r in results) / count
    on_rejected = sum(r[2] for r in results) / count
    joint = sum(r[1] and r[2] for r in results) / count
    return DiagnosticReport(pairwise, on_accepted, on_rejected, joint, count)
