"""Deterministic stand-in for an LLM that proposes built-in solver configurations.

Task prompts get a random configuration. Mutation prompts are classified by
their instruction line: "simplify" drops a tuned field (or shrinks the
population), "different"/"new algorithm" switches to another family, anything
else perturbs the hyperparameters (log-normal for reals, +-1 for integers).
"""
from __future__ import annotations

import hashlib
import logging
import math
import re
from dataclasses import dataclass


from ..candidates import PARAM_SPACE, ConfigError, Family, SolverConfig
from ..seeding import derive_seed, make_rng
from .clients import LlmRequest, LlmResponse, word_count
from .prompts import INSTRUCTION_MARKER, SELECTED_MARKER

log = logging.getLogger(__name__)

_PARENT_BLOCK = re.compile(re.escape(SELECTED_MARKER) + r".*?```[^\n]*\n(.*?)```", re.DOTALL)
_INSTRUCTION = re.compile(re.escape(INSTRUCTION_MARKER) + r"\s*(.*)")
_FAMILIES = list(Family)


def classify_instruction(text: str) -> str:
    m = _INSTRUCTION.search(text)
    if m is None:
        return "task"
    instr = m.group(1).lower()
    if "simplif" in instr:
        return "simplify"
    if "different" in instr or "new algorithm" in instr:
        return "different"
    return "refine"


def _sample_value(rng, kind, lo, hi):
    if kind == "int":
        hi = min(hi, 60)  # keep sampled populations desk-sized
        return int(round(math.exp(rng.uniform(math.log(lo), math.log(hi)))))
    if lo > 0:
        return float(math.exp(rng.uniform(math.log(lo), math.log(hi))))
    return float(rng.uniform(lo, hi))


def random_config(rng, family: Family | None = None) -> SolverConfig:
    family = family or _FAMILIES[int(rng.integers(len(_FAMILIES)))]
    params = {}
    for name, (kind, lo, hi, _) in PARAM_SPACE[family].items():
        if rng.random() < 0.5:
            params[name] = _sample_value(rng, kind, max(lo, 4) if name == "popsize" else lo, hi)
    return SolverConfig(family, params)


def _current(config: SolverConfig, name: str):
    value = config.get(name)
    if name == "popsize" and not value:
        return 0
    return value


def refine(config: SolverConfig, rng) -> SolverConfig:
    space = PARAM_SPACE[config.family]
    if not space:
        return random_config(rng, Family.OnePlusOneES)
    params = dict(config.hyperparameters)
    names = list(space)
    touched = [n for n in names if n in params] or [names[int(rng.integers(len(names)))]]
    if rng.random() < 0.3:
        touched.append(names[int(rng.integers(len(names)))])
    for name in dict.fromkeys(touched):
        kind, lo, hi, default = space[name]
        value = _current(config, name)
        if kind == "int":
            if name == "popsize" and value == 0:
                value = 8
            value = int(min(hi, max(lo, value + (1 if rng.random() < 0.5 else -1))))
        else:
            base = value if value > 0 else (default if default > 0 else 0.5)
            value = float(min(hi, max(lo, base * math.exp(0.3 * rng.standard_normal()))))
        params[name] = value
    return SolverConfig(config.family, params)


def simplify(config: SolverConfig, rng) -> SolverConfig:
    params = dict(config.hyperparameters)
    pop_name = {Family.DifferentialEvolution: "population_size", Family.CmaEs: "popsize"}.get(config.family)
    droppable = [n for n in sorted(params) if n != pop_name]
    if droppable and (pop_name is None or rng.random() < 0.5):
        params.pop(droppable[int(rng.integers(len(droppable)))])
    elif pop_name is not None:
        lo = PARAM_SPACE[config.family][pop_name][1]
        current = params.get(pop_name) or PARAM_SPACE[config.family][pop_name][3] or 8
        smaller = max(lo, math.floor(current * 0.75))
        if smaller < current:
            params[pop_name] = smaller
        else:
            params.pop(pop_name, None)
    return SolverConfig(config.family, params)


def different(config: SolverConfig, rng) -> SolverConfig:
    others = [f for f in _FAMILIES if f is not config.family]
    return random_config(rng, others[int(rng.integers(len(others)))])


def render(config: SolverConfig, name: str, description: str) -> str:
    return f"# Name: {name}\n# Description: {description}\n```json\n{config.to_json()}\n```\n"


@dataclass
class MockLLM:
    seed: int = 0
    model: str = "mock"

    def complete(self, request: LlmRequest) -> LlmResponse:
        text = request.text
        digest = hashlib.sha256(text.encode("utf-8")).hexdigest()
        rng = make_rng(derive_seed("mock-llm", self.seed, request.seed, digest))
        mode = classify_instruction(text)
        parent = None
        if mode != "task":
            m = _PARENT_BLOCK.search(text)
            if m is not None:
                try:
                    parent = SolverConfig.from_json(m.group(1))
                except ConfigError:
                    parent = None
            if parent is None:
                log.info("mock LLM could not parse the parent configuration; resampling")
                mode = "resample"
        if mode in ("task", "resample"):
            config = random_config(rng)
        elif mode == "simplify":
            config = simplify(parent, rng)
        elif mode == "different":
            config = different(parent, rng)
        else:
            config = refine(parent, rng)
        tag = hashlib.sha256(config.to_json().encode()).hexdigest()[:6]
        hp = ", ".join(f"{k}={v:.4g}" for k, v in sorted(config.hyperparameters.items())) or "defaults"
        reply = render(config, f"{config.family.value}-{tag}", f"{config.family.value} with {hp} ({mode}).")
        return LlmResponse(reply, word_count(text), word_count(reply), 0.0, 0.0)
