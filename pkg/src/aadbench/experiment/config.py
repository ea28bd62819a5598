"""Experiment configuration: TOML (or a JSON manifest) to validated dataclasses.

Every error names the file and the dotted field path, e.g.
``configs/x.toml: methods[1].method: unknown value 'Foo'``.
"""
from __future__ import annotations

import json
import sys
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from ..aad import AadConfig, Method, PromptSelection
from ..candidates import ConfigError as SolverConfigError
from ..candidates import SolverConfig
from ..llm import DEFAULT_MUTATION_PROMPTS
from ..metrics import AoccParams
from ..problems import InvalidInputError, SuiteKind, SuiteSpec
from ..analysis import FEATURE_NAMES

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    def __init__(self, location: str, message: str):
        self.location, self.message = location, message
        super().__init__(f"{location}: {message}" if location else message)


@dataclass(frozen=True)
class LlmSpec:
    kind: str = "mock"  # "mock" or "openai"
    seed: int = 0
    model: str = "mock"
    base_url: str | None = None
    api_key_env: str = "OPENAI_API_KEY"
    temperature: float = 0.8
    price_in: float = 0.0
    price_out: float = 0.0
    requests_per_minute: float | None = None
    timeout: float = 120.0


@dataclass(frozen=True)
class MethodSpec:
    aad: AadConfig
    llm: LlmSpec | None = None  # overrides the experiment-wide client

    @property
    def name(self) -> str:
        return self.aad.name


@dataclass(frozen=True)
class BaselineSpec:
    name: str
    solver: SolverConfig


@dataclass(frozen=True)
class ProblemSpec:
    name: str
    suite: SuiteSpec


@dataclass(frozen=True)
class EloSpec:
    n_matches: int = 100_000
    k: float = 32.0
    seed: int = 0
    criterion: str = "aocc"  # or "final_error"


@dataclass(frozen=True)
class ValidationSpec:
    enabled: bool = True
    n_runs: int = 10
    split: str = "test"  # "test" or "validation"
    eaf_targets: int = 51
    eaf_budgets: int = 20
    ceg_feature: str = "token_count"
    figures: bool = True


@dataclass(frozen=True)
class ExperimentConfig:
    name: str = "experiment"
    methods: tuple[MethodSpec, ...] = ()
    baselines: tuple[BaselineSpec, ...] = ()
    problems: tuple[ProblemSpec, ...] = ()
    llm: LlmSpec = LlmSpec()
    runs_per_cell: int = 10
    budget_factor: int = 2000
    train_seeds: int = 1
    timeout: float = 60.0
    aocc: AoccParams = AoccParams()
    elo: EloSpec = EloSpec()
    validation: ValidationSpec = ValidationSpec()
    master_seed: int = 0
    worker_count: int = 1
    output: str = "results"
    prompts: tuple[tuple[int, str], ...] = ()  # mutation prompt overrides, id -> text
    version: int = SCHEMA_VERSION

    def prompt_map(self) -> dict[int, str] | None:
        if not self.prompts:
            return None
        return {**DEFAULT_MUTATION_PROMPTS, **dict(self.prompts)}

    def budget_for(self, dimension: int) -> int:
        return int(self.budget_factor) * int(dimension)

    def llm_for(self, method: MethodSpec) -> LlmSpec:
        return method.llm or self.llm

    def with_overrides(self, seed: int | None = None, workers: int | None = None,
                       out: str | None = None) -> "ExperimentConfig":
        cfg = self
        if seed is not None:
            cfg = replace(cfg, master_seed=int(seed))
        if workers is not None:
            if workers < 1:
                raise ConfigError("--workers", "must be at least 1")
            cfg = replace(cfg, worker_count=int(workers))
        if out is not None:
            cfg = replace(cfg, output=str(out))
        return cfg

    def to_dict(self) -> dict:
        return {
            "version": self.version,
            "name": self.name,
            "master_seed": self.master_seed,
            "runs_per_cell": self.runs_per_cell,
            "budget_factor": self.budget_factor,
            "train_seeds": self.train_seeds,
            "timeout": self.timeout,
            "worker_count": self.worker_count,
            "output": self.output,
            "llm": _llm_dict(self.llm),
            "methods": [_method_dict(m) for m in self.methods],
            "baselines": [{"name": b.name, **b.solver.to_dict()} for b in self.baselines],
            "problems": [_problem_dict(p) for p in self.problems],
            "aocc": {"lower_log": self.aocc.lower_log, "upper_log": self.aocc.upper_log},
            "elo": dict(vars(self.elo)),
            "validation": dict(vars(self.validation)),
            "prompts": {str(i): t for i, t in self.prompts},
        }


def _llm_dict(spec: LlmSpec) -> dict:
    return {k: v for k, v in vars(spec).items() if v is not None}


def _method_dict(m: MethodSpec) -> dict:
    a = m.aad
    out = {"name": a.name, "method": a.method.value, "mu": a.mu, "lam": a.lam, "elitist": a.elitist,
           "candidate_budget": a.candidate_budget, "mutation_prompt_ids": list(a.mutation_prompt_ids),
           "prompt_selection": a.prompt_selection.value, "include_description": a.include_description,
           "temperature": a.temperature}
    if m.llm is not None:
        out["llm"] = _llm_dict(m.llm)
    return out


def _problem_dict(p: ProblemSpec) -> dict:
    s = p.suite
    out = {"name": p.name, "kind": s.kind.value, "dimension": s.dimension, "fids": list(s.fids),
           "train": s.train, "test": s.test, "validation": s.validation, "master_seed": s.master_seed,
           "components": s.components}
    if s.group is not None:
        out["group"] = s.group
    return out


# -- parsing ----------------------------------------------------------------

_MISSING = object()


class _Table:
    """Typed, location-aware access to one TOML table; flags unknown keys."""

    def __init__(self, data: Any, loc: str):
        if not isinstance(data, dict):
            raise ConfigError(loc, "expected a table")
        self.data, self.loc, self.seen = data, loc, set()

    def _where(self, key: str) -> str:
        return f"{self.loc}.{key}" if self.loc else key

    def get(self, key: str, kind, default=_MISSING):
        self.seen.add(key)
        if key not in self.data:
            if default is _MISSING:
                raise ConfigError(self._where(key), "required field is missing")
            return default
        value = self.data[key]
        if kind is float and isinstance(value, int) and not isinstance(value, bool):
            value = float(value)
        ok = isinstance(value, kind) and not (kind in (int, float) and isinstance(value, bool))
        if not ok:
            names = kind.__name__ if isinstance(kind, type) else "/".join(k.__name__ for k in kind)
            raise ConfigError(self._where(key), f"expected {names}, got {type(value).__name__} {value!r}")
        return value

    def choice(self, key: str, options, default=_MISSING):
        value = self.get(key, str, default)
        if value not in options:
            raise ConfigError(self._where(key), f"unknown value {value!r}; expected one of {', '.join(options)}")
        return value

    def positive(self, key: str, default=_MISSING, allow_zero: bool = False) -> int:
        value = self.get(key, int, default)
        if value < 0 or (value == 0 and not allow_zero):
            raise ConfigError(self._where(key), f"must be {'non-negative' if allow_zero else 'positive'}")
        return value

    def table(self, key: str) -> "_Table":
        self.seen.add(key)
        return _Table(self.data.get(key, {}), self._where(key))

    def array(self, key: str) -> list["_Table"]:
        self.seen.add(key)
        items = self.data.get(key, [])
        if not isinstance(items, list):
            raise ConfigError(self._where(key), "expected an array of tables")
        return [_Table(item, f"{self._where(key)}[{i}]") for i, item in enumerate(items)]

    def done(self) -> None:
        extra = sorted(set(self.data) - self.seen)
        if extra:
            raise ConfigError(self._where(extra[0]), "unknown field")


def _parse_llm(t: _Table) -> LlmSpec:
    d = LlmSpec()
    rpm = t.get("requests_per_minute", (int, float), None)
    spec = LlmSpec(
        kind=t.choice("kind", ("mock", "openai"), d.kind),
        seed=t.get("seed", int, d.seed),
        model=t.get("model", str, d.model),
        base_url=t.get("base_url", str, None),
        api_key_env=t.get("api_key_env", str, d.api_key_env),
        temperature=t.get("temperature", float, d.temperature),
        price_in=t.get("price_in", float, d.price_in),
        price_out=t.get("price_out", float, d.price_out),
        requests_per_minute=None if rpm is None else float(rpm),
        timeout=t.get("timeout", float, d.timeout),
    )
    t.done()
    return spec


def _parse_method(t: _Table) -> MethodSpec:
    d = AadConfig()
    name = t.get("name", str)
    method = t.choice("method", [m.value for m in Method], d.method.value)
    if method not in ("LlameaES", "RandomSampling"):
        raise ConfigError(t._where("method"), f"method {method!r} is reserved but not implemented")
    ids = t.get("mutation_prompt_ids", list, list(d.mutation_prompt_ids))
    if not ids or not all(isinstance(i, int) and not isinstance(i, bool) for i in ids):
        raise ConfigError(t._where("mutation_prompt_ids"), "expected a non-empty list of integers")
    llm = _parse_llm(t.table("llm")) if "llm" in t.data else None
    try:
        aad = AadConfig(
            name=name, method=Method(method), mu=t.positive("mu", d.mu), lam=t.positive("lam", d.lam),
            elitist=t.get("elitist", bool, d.elitist),
            candidate_budget=t.positive("candidate_budget", d.candidate_budget),
            mutation_prompt_ids=tuple(ids),
            prompt_selection=PromptSelection(t.choice("prompt_selection", [p.value for p in PromptSelection],
                                                      d.prompt_selection.value)),
            include_description=t.get("include_description", bool, d.include_description),
            temperature=t.get("temperature", float, d.temperature),
        )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(t.loc, str(exc)) from None
    t.done()
    return MethodSpec(aad, llm)


def _parse_baseline(t: _Table) -> BaselineSpec:
    name = t.get("name", str)
    family = t.get("family", str)
    hp = t.get("hyperparameters", dict, {})
    try:
        solver = SolverConfig(family, hp)
    except SolverConfigError as exc:
        raise ConfigError(t.loc, str(exc)) from None
    t.done()
    return BaselineSpec(name, solver)


def _parse_problem(t: _Table) -> ProblemSpec:
    d = SuiteSpec()
    name = t.get("name", str)
    kind = t.choice("kind", [k.value for k in SuiteKind], d.kind.value)
    fids = t.get("fids", list, [])
    try:
        suite = SuiteSpec(kind=SuiteKind(kind), dimension=t.positive("dimension", d.dimension), fids=tuple(fids),
                          group=t.get("group", int, None), train=t.positive("train", d.train),
                          test=t.positive("test", d.test),
                          validation=t.positive("validation", d.validation, allow_zero=True),
                          master_seed=t.get("master_seed", int, d.master_seed),
                          components=t.positive("components", d.components))
    except (InvalidInputError, KeyError, ValueError, TypeError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(t.loc, f"invalid suite: {exc}") from None
    if kind == "SBOX" and not suite.fids and suite.group is None:
        raise ConfigError(t.loc, "an SBOX problem needs fids or a group")
    t.done()
    return ProblemSpec(name, suite)


def _unique(items, what: str, loc: str):
    names = [i.name for i in items]
    for n in names:
        if names.count(n) > 1:
            raise ConfigError(loc, f"duplicate {what} name {n!r}")


def config_from_dict(data: dict, source: str = "") -> ExperimentConfig:
    try:
        root = _Table(data, "")
        version = root.get("version", int, SCHEMA_VERSION)
        if version > SCHEMA_VERSION:
            raise ConfigError("version", f"schema version {version} is newer than supported ({SCHEMA_VERSION})")
        d = ExperimentConfig()
        llm = _parse_llm(root.table("llm"))
        methods = tuple(_parse_method(t) for t in root.array("methods"))
        baselines = tuple(_parse_baseline(t) for t in root.array("baselines"))
        problems = tuple(_parse_problem(t) for t in root.array("problems"))
        if not problems:
            raise ConfigError("problems", "at least one problem is required")
        if not methods and not baselines:
            raise ConfigError("methods", "need at least one method or baseline")
        _unique(list(methods) + list(baselines), "method/baseline", "methods")
        _unique(problems, "problem", "problems")
        at = root.table("aocc")
        try:
            aocc = AoccParams(at.get("lower_log", float, -8.0), at.get("upper_log", float, 2.0))
        except ValueError as exc:
            raise ConfigError("aocc", str(exc)) from None
        at.done()
        et = root.table("elo")
        elo = EloSpec(n_matches=et.positive("n_matches", EloSpec.n_matches), k=et.get("k", float, EloSpec.k),
                      seed=et.get("seed", int, EloSpec.seed),
                      criterion=et.choice("criterion", ("aocc", "final_error"), EloSpec.criterion))
        et.done()
        vt = root.table("validation")
        val = ValidationSpec(
            enabled=vt.get("enabled", bool, True), n_runs=vt.positive("n_runs", ValidationSpec.n_runs),
            split=vt.choice("split", ("test", "validation"), ValidationSpec.split),
            eaf_targets=vt.positive("eaf_targets", ValidationSpec.eaf_targets),
            eaf_budgets=vt.positive("eaf_budgets", ValidationSpec.eaf_budgets),
            ceg_feature=vt.choice("ceg_feature", FEATURE_NAMES, ValidationSpec.ceg_feature),
            figures=vt.get("figures", bool, True))
        vt.done()
        pt = root.table("prompts")
        prompts = []
        for key in sorted(pt.data, key=lambda k: (len(k), k)):
            if not key.isdigit():
                raise ConfigError(pt._where(key), "prompt ids must be integers")
            prompts.append((int(key), pt.get(key, str)))
        pt.done()
        known = {**DEFAULT_MUTATION_PROMPTS, **dict(prompts)}
        for i, m in enumerate(methods):
            for pid in m.aad.mutation_prompt_ids:
                if pid not in known:
                    raise ConfigError(f"methods[{i}].mutation_prompt_ids", f"unknown mutation prompt id {pid}")
        if val.split == "validation":
            for i, p in enumerate(problems):
                if p.suite.validation == 0:
                    raise ConfigError(f"problems[{i}].validation", "must be positive when validation.split is "
                                                                   "'validation'")
        cfg = ExperimentConfig(
            name=root.get("name", str, d.name), methods=methods, baselines=baselines, problems=problems,
            llm=llm, runs_per_cell=root.positive("runs_per_cell", d.runs_per_cell),
            budget_factor=root.positive("budget_factor", d.budget_factor),
            train_seeds=root.positive("train_seeds", d.train_seeds),
            timeout=root.get("timeout", float, d.timeout), aocc=aocc, elo=elo, validation=val,
            master_seed=root.get("master_seed", int, d.master_seed),
            worker_count=root.positive("worker_count", d.worker_count),
            output=root.get("output", str, d.output), prompts=tuple(prompts), version=version)
        root.done()
        return cfg
    except ConfigError as exc:
        if source:
            raise ConfigError(f"{source}: {exc.location}" if exc.location else source, exc.message) from None
        raise


def load_config(path) -> ExperimentConfig:
    """Read a TOML config, or the ``config`` entry of a ``manifest.json``."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(str(path), f"cannot read config: {exc.strerror}") from None
    if path.suffix == ".json":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}", exc.msg) from None
        data = data.get("config", data) if isinstance(data, dict) else data
    else:
        try:
            data = tomllib.loads(text)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(str(path), str(exc)) from None
    return config_from_dict(data, str(path))
