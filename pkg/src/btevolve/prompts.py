'''Prompt templates.

Placeholders ({problem}, {code}, {code_a}, {code_b}, {feedback_sections}) are
substituted literally with str.replace, never str.format, so braces in problem
statements or code survive untouched.  Rendering helpers live in `judging`
(comparisons) and `population` (mutation); baselines ship their own defaults
and accept replacements through config.
'''

from dataclasses import dataclass

GENERATION_SYSTEM_PROMPT = (
    "You are an expert competitive programmer.\n"
    "Output your solution as a single ```cpp ... ``` block, preceded by brief reasoning."
)

GENERATION_USER_TEMPLATE = "{problem}"

COMPARISON_TEMPLATE = '''You are a competitive programming expert.

## Problem Statement
{problem}

## Solution A
```cpp
{code_a}
```

## Solution B
```cpp
{code_b}
```

Which solution is more likely to receive an Accepted verdict from an online judge --- meaning it produces correct output within the time and memory limits for all valid inputs?

If both solutions appear incorrect (wrong answer, TLE, or other issues), choose the one that requires fewer modifications to become Accepted.

If they are fundamentally identical or equally likely to be Accepted, output TIE.

Respond with a JSON object and nothing else, in exactly this format:
{
  "feedback_a": "one sentence on Solution A's key strength or critical flaw",
  "feedback_b": "one sentence on Solution B's key strength or critical flaw",
  "winner": "A or B or TIE"
}'''

MUTATION_WITH_FEEDBACK_TEMPLATE = '''## Problem
{problem}

## Solution
```cpp
{code}
```

## Pairwise Feedback
This solution was compared against other solutions multiple times:

{feedback_sections}

## Task
Write a solution that maximizes the probability of Accepted. You may refine the existing solution or take a different approach if the current one is fundamentally flawed.

Think briefly, then output your final solution as a single ```cpp ... ``` block.'''

MUTATION_WITHOUT_FEEDBACK_TEMPLATE = '''## Problem
{problem}

## Solution
```cpp
{code}
```

## Task
Write a solution that maximizes the probability of Accepted. You may refine the existing solution or take a different approach if the current one is fundamentally flawed.

Think briefly, then output your final solution as a single ```cpp ... ``` block.'''

# Dropped when the restart license is disabled; candidates are then only asked
# to refine in place.
RESTART_LICENSE_SENTENCE = (
    "You may refine the existing solution or take a different approach "
    "if the current one is fundamentally flawed."
)

WINS_HEADER = "### Wins (this solution was judged better):"
TIES_HEADER = "### Ties (judged equally likely to be Accepted):"
LOSSES_HEADER = "### Losses (this solution was judged worse):"

POINTWISE_TEMPLATE = '''You are a competitive programming expert.

## Problem Statement
{problem}

## Solution
```cpp
{code}
```

Is this solution likely to receive an Accepted verdict from an online judge, producing correct output within the time and memory limits for all valid inputs?

Think briefly, then end your reply with a final line of exactly VERDICT: YES or VERDICT: NO.'''

@dataclass(frozen=True)
class PromptTemplates:
    """The full template set a run uses; any member can be overridden in config."""

    generation_system: str = GENERATION_SYSTEM_PROMPT
    generation_user: str = GENERATION_USER_TEMPLATE
    comparison: str = COMPARISON_TEMPLATE
    mutation_with_feedback: str = MUTATION_WITH_FEEDBACK_TEMPLATE
    mutation_without_feedback: str = MUTATION_WITHOUT_FEEDBACK_TEMPLATE


SELF_REFINE_TEMPLATE = '''## Problem
{problem}

## Current Solution
```cpp
{code}
```

## Task
Review the current solution for correctness and efficiency. If you find a flaw, fix it and output the improved solution; if it already looks correct, output it unchanged.

Think briefly, then output your final solution as a single ```cpp ... ``` block.'''
