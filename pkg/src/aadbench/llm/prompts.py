"""Task and mutation prompt construction."""
from __future__ import annotations

from typing import Mapping, Sequence

from ..candidates import Candidate, Family
from ..problems import ProblemInstance, describe

DEFAULT_MUTATION_PROMPTS: dict[int, str] = {
    1: "Refine the strategy of the selected algorithm to improve it",
    2: "Generate a new algorithm that is different from the algorithms you have tried before",
    3: "Refine and simplify the selected algorithm to improve it",
}

SELECTED_MARKER = "Selected algorithm:"
INSTRUCTION_MARKER = "Mutation instruction:"

OUTPUT_CONTRACT = """\
Answer format: one line "# Name: <short name>", one line "# Description: <one sentence>",
then exactly one fenced code block containing either
  (a) a JSON solver configuration {{"family": ..., "hyperparameters": {{...}}}} with family one of
      {families}, or
  (b) a standalone program that talks line-delimited JSON on stdin/stdout:
      it first reads {{"type":"init","dim":D,"lower":[...],"upper":[...],"budget":B,"seed":S}},
      then repeatedly writes {{"type":"ask","x":[...]}} and reads {{"type":"tell","f":value}},
      until it reads {{"type":"stop"}} or writes {{"type":"done"}}."""


class PromptConfigError(KeyError):
    pass


def build_task_prompt(instances: Sequence[ProblemInstance], budget: int, dimension: int | None = None,
                      include_description: bool = False) -> str:
    if not instances:
        raise ValueError("task prompt needs at least one training instance")
    first = instances[0]
    d = dimension or first.dimension
    parts = [
        "Design a novel iterative optimization algorithm for continuous black-box minimization.",
        f"The algorithm is evaluated on {len(instances)} training problems of dimension {d}, "
        f"each a box [{first.lower}, {first.upper}]^{d}, with a budget of {budget} function evaluations "
        "per run. Performance is the area over the convergence curve (higher is better).",
    ]
    if include_description:
        seen = []
        for inst in instances:
            key = inst.fids if not inst.is_affine else (inst.fids, inst.weights)
            if key in seen:
                continue
            seen.append(key)
            parts.append(describe(inst, True, budget))
    parts.append(OUTPUT_CONTRACT.format(families=", ".join(f.value for f in Family)))
    return "\n\n".join(parts)


def build_mutation_prompt(parent: Candidate, strategy_prompt_id: int,
                          prompts: Mapping[int, str] | None = None, task_prompt: str = "") -> str:
    prompts = DEFAULT_MUTATION_PROMPTS if prompts is None else prompts
    try:
        instruction = prompts[int(strategy_prompt_id)]
    except (KeyError, ValueError):
        raise PromptConfigError(f"unknown mutation prompt id {strategy_prompt_id!r}") from None
    fitness = "n/a" if parent.fitness is None else f"{parent.fitness:.4f}"
    parts = [task_prompt] if task_prompt else []
    parts.append(
        f"{SELECTED_MARKER} {parent.name}\n"
        f"Description: {parent.description}\n"
        f"```\n{parent.payload}\n```\n"
        f"Its mean training fitness (AOCC, higher is better) was {fitness}."
    )
    parts.append(f"{INSTRUCTION_MARKER} {instruction}")
    return "\n\n".join(parts)
