"""Budget-enforced execution of one candidate on one problem instance.

Evaluation log layout (one JSON object per line)::

    {"type":"header","candidate_id":..,"instance_id":..,"seed":..,"budget":..,"f_opt":..}
    {"i":1,"f":..,"best":..}            # one per evaluation; "x" added when verbose
    {"type":"footer","status":..,"reason":..,"evaluations":..}
"""
from __future__ import annotations

import enum
import json
import logging
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .candidates import Candidate, InstantiationError, ProtocolError, instantiate
from .metrics import AoccParams, aocc
from .problems import ProblemInstance, evaluate

log = logging.getLogger(__name__)

FAILURE_PENALTY = -1.0
NONFINITE_VALUE = 1e12
DEFAULT_TIMEOUT = 60.0
DEFAULT_BUDGET_FACTOR = 2000


@dataclass(frozen=True)
class Budget:
    max_evaluations: int

    def __post_init__(self):
        if int(self.max_evaluations) <= 0:
            raise ValueError("budget must be positive")

    @classmethod
    def for_dimension(cls, dimension: int, factor: int = DEFAULT_BUDGET_FACTOR) -> "Budget":
        return cls(int(factor) * int(dimension))


class RunStatus(str, enum.Enum):
    Completed = "Completed"
    CandidateFailed = "CandidateFailed"
    BudgetExhausted = "BudgetExhausted"


@dataclass
class EvalTrace:
    candidate_id: int | str
    instance_id: str
    seed: int
    budget: int
    f_opt: float
    f: list[float] = field(default_factory=list)
    best_f: list[float] = field(default_factory=list)
    xs: list[np.ndarray] | None = None
    status: RunStatus = RunStatus.Completed
    reason: str | None = None

    def __len__(self):
        return len(self.f)

    @property
    def failed(self) -> bool:
        return self.status is RunStatus.CandidateFailed

    @property
    def records(self):
        """(eval_index, x, f, best_f_so_far) tuples; x is None unless points were kept."""
        xs = self.xs if self.xs is not None else [None] * len(self.f)
        return [(i + 1, x, f, b) for i, (x, f, b) in enumerate(zip(xs, self.f, self.best_f))]

    def append(self, x, f: float) -> float:
        best = f if not self.best_f or f < self.best_f[-1] else self.best_f[-1]
        self.f.append(f)
        self.best_f.append(best)
        if self.xs is not None:
            self.xs.append(x)
        return best


class _EvalLog:
    def __init__(self, path, trace: EvalTrace, log_x: bool):
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        self.fh = open(path, "w", encoding="utf-8")
        self.log_x = log_x
        self.fh.write(json.dumps({
            "type": "header", "candidate_id": trace.candidate_id, "instance_id": trace.instance_id,
            "seed": trace.seed, "budget": trace.budget, "f_opt": trace.f_opt,
        }) + "\n")

    def record(self, i: int, x, f: float, best: float) -> None:
        if self.log_x:
            self.fh.write(json.dumps({"i": i, "f": f, "best": best, "x": [float(v) for v in x]}) + "\n")
        else:
            self.fh.write(f'{{"i":{i},"f":{f!r},"best":{best!r}}}\n')

    def close(self, trace: EvalTrace) -> None:
        self.fh.write(json.dumps({"type": "footer", "status": trace.status.value, "reason": trace.reason,
                                  "evaluations": len(trace)}) + "\n")
        self.fh.close()


def _safe_value(instance: ProblemInstance, x: np.ndarray) -> float:
    if not np.all(np.isfinite(x)):
        return NONFINITE_VALUE
    f = evaluate(instance, x)
    return f if math.isfinite(f) else NONFINITE_VALUE


def run_candidate(candidate: Candidate, instance: ProblemInstance, budget: Budget | int, seed: int,
                  log_path=None, log_x: bool = False, timeout: float = DEFAULT_TIMEOUT) -> EvalTrace:
    """Drive one ask/tell session until the budget is spent or the candidate stops.

    The harness owns the budget: after ``max_evaluations`` tells the session is
    closed (external candidates receive ``stop``). Crashes, protocol
    violations and timeouts end the run with ``CandidateFailed`` and keep the
    partial trace.
    """
    b = budget.max_evaluations if isinstance(budget, Budget) else int(budget)
    trace = EvalTrace(candidate.id, instance.instance_id, int(seed), b, instance.f_opt,
                      xs=[] if log_x else None)
    logger = _EvalLog(log_path, trace, log_x) if log_path is not None else None
    session = None
    deadline = time.monotonic() + timeout
    try:
        session = instantiate(candidate, instance.dimension, instance.lower, instance.upper, b, seed,
                              read_timeout=timeout)
        while True:
            if len(trace) >= b:
                trace.status = RunStatus.BudgetExhausted
                break
            if time.monotonic() > deadline:
                raise TimeoutError(f"run exceeded {timeout}s")
            x = session.ask()
            if x is None:
                trace.status = RunStatus.Completed
                break
            if x.shape != (instance.dimension,):
                raise ProtocolError(f"dimension mismatch: asked shape {x.shape} on a "
                                    f"{instance.dimension}-d problem")
            f = _safe_value(instance, x)
            best = trace.append(x, f)
            if logger is not None:
                logger.record(len(trace), x, f, best)
            session.tell(f)
    except (InstantiationError, ProtocolError, TimeoutError) as exc:
        trace.status = RunStatus.CandidateFailed
        trace.reason = f"{type(exc).__name__}: {exc}"
    except Exception as exc:  # noqa: BLE001 - any candidate crash is a failed run
        trace.status = RunStatus.CandidateFailed
        trace.reason = f"{type(exc).__name__}: {exc}"
    finally:
        if session is not None:
            try:
                if trace.failed and hasattr(session, "kill"):
                    session.kill()
                else:
                    session.close()
            except Exception:  # noqa: BLE001
                log.warning("error while closing session for candidate %s", candidate.id)
        if logger is not None:
            logger.close(trace)
    return trace


def read_eval_log(path) -> EvalTrace:
    """Rebuild an :class:`EvalTrace` from an evaluation log file."""
    trace = None
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            rec = json.loads(line)
            kind = rec.get("type")
            if kind == "header":
                trace = EvalTrace(rec["candidate_id"], rec["instance_id"], rec["seed"], rec["budget"],
                                  rec["f_opt"])
            elif kind == "footer":
                trace.status = RunStatus(rec["status"])
                trace.reason = rec.get("reason")
            else:
                trace.f.append(rec["f"])
                trace.best_f.append(rec["best"])
                if "x" in rec:
                    if trace.xs is None:
                        trace.xs = []
                    trace.xs.append(np.array(rec["x"]))
    if trace is None:
        raise ValueError(f"{path}: missing header")
    return trace


def trace_fitness(trace: EvalTrace, params: AoccParams = AoccParams()) -> float:
    return FAILURE_PENALTY if trace.failed else aocc(trace, trace.budget, params)


def evaluate_pairs(candidate: Candidate, instances: Sequence[ProblemInstance], seeds: Sequence[int],
                   budget: Budget | int, log_dir=None, timeout: float = DEFAULT_TIMEOUT) -> list[EvalTrace]:
    """Run ``candidate`` on every (instance, seed) pair in a fixed order."""
    traces = []
    for inst in instances:
        for seed in seeds:
            path = None
            if log_dir is not None:
                path = Path(log_dir) / f"c{candidate.id}_{inst.instance_id}_r{seed}.jsonl"
            traces.append(run_candidate(candidate, inst, budget, seed, log_path=path, timeout=timeout))
    return traces


def training_fitness(candidate: Candidate, instances: Sequence[ProblemInstance], seeds: Sequence[int],
                     budget: Budget | int, aocc_params: AoccParams = AoccParams(), log_dir=None,
                     timeout: float = DEFAULT_TIMEOUT) -> float:
    """Mean AOCC over all (instance, seed) pairs; failed runs count as the penalty."""
    if not instances or not seeds:
        raise ValueError("need at least one instance and one seed")
    traces = evaluate_pairs(candidate, instances, seeds, budget, log_dir, timeout)
    return float(np.mean([trace_fitness(t, aocc_params) for t in traces]))
