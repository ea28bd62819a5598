"""Search over candidate algorithms: an LLaMEA-style evolution strategy and
independent sampling, with lineage bookkeeping."""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from .candidates import Candidate, Status
from .candidates.external import default_launch
from .evaluation import FAILURE_PENALTY, Budget, evaluate_pairs, trace_fitness
from .llm import (
    LlmError,
    LlmRequest,
    ParseError,
    QueryLogger,
    build_mutation_prompt,
    build_task_prompt,
    generate,
    parse_response,
)
from .metrics import AoccParams
from .problems import ProblemInstance
from .seeding import derive_seed, make_rng


class Method(str, enum.Enum):
    LlameaES = "LlameaES"
    RandomSampling = "RandomSampling"
    # reserved slots, not implemented
    EoH = "EoH"
    FunSearch = "FunSearch"
    ReEvo = "ReEvo"


class PromptSelection(str, enum.Enum):
    Single = "Single"
    UniformRandom = "UniformRandom"


class NoViableCandidateError(RuntimeError):
    pass


@dataclass(frozen=True)
class AadConfig:
    name: str = "LLaMEA"
    method: Method = Method.LlameaES
    mu: int = 4
    lam: int = 12
    elitist: bool = False
    candidate_budget: int = 100
    mutation_prompt_ids: tuple[int, ...] = (1,)
    prompt_selection: PromptSelection = PromptSelection.Single
    include_description: bool = False
    temperature: float = 0.8

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        object.__setattr__(self, "prompt_selection", PromptSelection(self.prompt_selection))
        object.__setattr__(self, "mutation_prompt_ids", tuple(int(i) for i in self.mutation_prompt_ids))
        if self.mu <= 0 or self.lam <= 0 or self.candidate_budget <= 0:
            raise ValueError("mu, lambda and candidate_budget must be positive")
        if not self.mutation_prompt_ids:
            raise ValueError("mutation_prompt_ids must not be empty")
        if self.method is Method.LlameaES:
            if not self.elitist and self.lam < self.mu:
                raise ValueError("comma selection needs lambda >= mu")
            if self.candidate_budget < self.mu + self.lam:
                raise ValueError("candidate_budget must be at least mu + lambda")


@dataclass
class RunLineage:
    candidates: list[Candidate]
    run_seed: int
    method: str = ""

    def __len__(self):
        return len(self.candidates)

    def edges(self) -> list[tuple[int, int]]:
        return [(p, c.id) for c in self.candidates for p in c.parent_ids]

    def fitnesses(self) -> list[float]:
        return [FAILURE_PENALTY if c.fitness is None else c.fitness for c in self.candidates]

    def to_jsonl(self) -> str:
        return "".join(json.dumps(c.to_record(), sort_keys=True) + "\n" for c in self.candidates)

    def save(self, path) -> None:
        Path(path).write_text(self.to_jsonl(), encoding="utf-8")

    @classmethod
    def load(cls, path, run_seed: int = 0, method: str = "") -> "RunLineage":
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        return cls([Candidate.from_record(json.loads(l)) for l in lines if l.strip()], run_seed, method)


def generation_index(candidate_id: int, mu: int, lam: int) -> int:
    """Bookkeeping generation of the 1-based ``candidate_id``."""
    return max(0, math.ceil((candidate_id - mu) / lam))


def _rank_key(c: Candidate):
    return (-c.fitness, c.generation, c.id)


def select_best(lineage: RunLineage | Sequence[Candidate]) -> Candidate:
    """Highest training fitness; ties go to the earliest id."""
    cands = lineage.candidates if isinstance(lineage, RunLineage) else list(lineage)
    viable = [c for c in cands if c.status is Status.Evaluated and c.fitness is not None]
    if not viable:
        raise NoViableCandidateError("no candidate in the lineage was evaluated successfully")
    return min(viable, key=lambda c: (-c.fitness, c.id))


class _Run:
    """State shared by the search methods within one AAD run."""

    def __init__(self, config: AadConfig, client, train: Sequence[ProblemInstance], seeds: Sequence[int],
                 eval_budget: Budget | int, run_seed: int, logger: QueryLogger | None,
                 aocc_params: AoccParams, prompts: Mapping[int, str] | None, eval_log_dir, timeout: float,
                 model: str):
        if not train:
            raise ValueError("need at least one training instance")
        self.config = config
        self.client = client
        self.train = list(train)
        self.seeds = list(seeds)
        self.budget = eval_budget
        self.run_seed = int(run_seed)
        self.logger = logger
        self.aocc_params = aocc_params
        self.prompts = prompts
        self.eval_log_dir = eval_log_dir
        self.timeout = timeout
        self.model = model
        b = eval_budget.max_evaluations if isinstance(eval_budget, Budget) else int(eval_budget)
        self.task_prompt = build_task_prompt(self.train, b, self.train[0].dimension, config.include_description)
        self.candidates: list[Candidate] = []

    def spawn(self, prompt: str, parents: list[Candidate], prompt_id: int | None) -> Candidate:
        cid = len(self.candidates) + 1
        cand = Candidate(id=cid, name="", parent_ids=[p.id for p in parents], prompt_id=prompt_id,
                         generation=generation_index(cid, self.config.mu, self.config.lam)
                         if self.config.method is Method.LlameaES else 0)
        request = LlmRequest.from_prompt(prompt, model=self.model, temperature=self.config.temperature,
                                         seed=derive_seed("request", self.run_seed, cid) >> 33)
        try:
            response = generate(self.client, request, self.logger)
            parsed = parse_response(response.text)
        except (LlmError, ParseError) as exc:
            cand.status, cand.fitness = Status.Failed, FAILURE_PENALTY
            cand.error = f"{type(exc).__name__}: {exc}"
            self.candidates.append(cand)
            return cand
        cand.name, cand.description = parsed.name, parsed.description
        if parsed.is_config:
            cand.config = parsed.payload
        else:
            cand.source, cand.launch = parsed.payload, default_launch()
        self.evaluate(cand)
        self.candidates.append(cand)
        return cand

    def evaluate(self, cand: Candidate) -> None:
        log_dir = None if self.eval_log_dir is None else Path(self.eval_log_dir)
        traces = evaluate_pairs(cand, self.train, self.seeds, self.budget, log_dir, self.timeout)
        failed = [t for t in traces if t.failed]
        if failed:
            # a runtime error anywhere disqualifies the candidate
            cand.status, cand.fitness = Status.Failed, FAILURE_PENALTY
            cand.error = failed[0].reason
        else:
            cand.status = Status.Evaluated
            cand.fitness = float(sum(trace_fitness(t, self.aocc_params) for t in traces) / len(traces))

    def lineage(self) -> RunLineage:
        return RunLineage(self.candidates, self.run_seed, self.config.name)


def run_llamea(config: AadConfig, client, train_instances, seeds, eval_budget, run_seed: int,
               logger: QueryLogger | None = None, aocc_params: AoccParams = AoccParams(),
               prompts: Mapping[int, str] | None = None, eval_log_dir=None, timeout: float = 60.0,
               model: str = "mock") -> RunLineage:
    """(mu, lambda) or (mu + lambda) evolution of candidates with the LLM as mutation operator.

    Offspring of one generation are created one by one from parents drawn
    uniformly from the current parent set; survivors are chosen after each
    generation (the last one may be truncated by the candidate budget).
    """
    run = _Run(config, client, train_instances, seeds, eval_budget, run_seed, logger, aocc_params, prompts,
               eval_log_dir, timeout, model)
    rng = make_rng(derive_seed("llamea", int(run_seed)))
    for _ in range(min(config.mu, config.candidate_budget)):
        run.spawn(run.task_prompt, [], None)
    parents = sorted((c for c in run.candidates if c.status is Status.Evaluated), key=_rank_key)[: config.mu]
    while len(run.candidates) < config.candidate_budget:
        offspring = []
        for _ in range(config.lam):
            if len(run.candidates) >= config.candidate_budget:
                break
            if not parents:
                offspring.append(run.spawn(run.task_prompt, [], None))
                continue
            parent = parents[int(rng.integers(len(parents)))]
            ids = config.mutation_prompt_ids
            if config.prompt_selection is PromptSelection.UniformRandom:
                pid = ids[int(rng.integers(len(ids)))]
            else:
                pid = ids[0]
            prompt = build_mutation_prompt(parent, pid, prompts, run.task_prompt)
            offspring.append(run.spawn(prompt, [parent], pid))
        pool = parents + offspring if config.elitist else offspring
        viable = [c for c in pool if c.status is Status.Evaluated]
        if viable:
            parents = sorted(viable, key=_rank_key)[: config.mu]
    return run.lineage()


def run_random_sampling(config: AadConfig, client, train_instances, seeds, eval_budget, run_seed: int,
                        logger: QueryLogger | None = None, aocc_params: AoccParams = AoccParams(),
                        prompts: Mapping[int, str] | None = None, eval_log_dir=None, timeout: float = 60.0,
                        model: str = "mock") -> RunLineage:
    """``candidate_budget`` independent generations from the task prompt."""
    run = _Run(config, client, train_instances, seeds, eval_budget, run_seed, logger, aocc_params, prompts,
               eval_log_dir, timeout, model)
    for _ in range(config.candidate_budget):
        run.spawn(run.task_prompt, [], None)
    return run.lineage()


SEARCH_METHODS = {
    Method.LlameaES: run_llamea,
    Method.RandomSampling: run_random_sampling,
}


def run_method(config: AadConfig, *args, **kwargs) -> RunLineage:
    try:
        fn = SEARCH_METHODS[config.method]
    except KeyError:
        raise NotImplementedError(f"search method {config.method.value} is not implemented") from None
    return fn(config, *args, **kwargs)
