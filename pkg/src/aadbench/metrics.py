"""Anytime and comparative performance metrics: AOCC, EAF, ELO, Welch's t-test."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy import special

from .seeding import make_rng


@dataclass(frozen=True)
class AoccParams:
    lower_log: float = -8.0
    upper_log: float = 2.0

    def __post_init__(self):
        if not self.lower_log < self.upper_log:
            raise ValueError("lower_log must be below upper_log")


def best_errors(best_f: Sequence[float], f_opt: float, budget: int) -> np.ndarray:
    """Best-so-far error at evaluations 1..budget, padding a short trace with its last value."""
    best = np.asarray(best_f, dtype=float)[:budget] - f_opt
    if len(best) < budget:
        best = np.concatenate([best, np.full(budget - len(best), best[-1])])
    return best


def aocc_from_errors(errors: np.ndarray, params: AoccParams = AoccParams()) -> float:
    lb, ub = params.lower_log, params.upper_log
    logs = np.log10(np.maximum(errors, 10.0 ** lb))
    logs = np.clip(logs, lb, ub)
    return float(np.mean(1.0 - (logs - lb) / (ub - lb)))


def aocc(trace, budget: int | None = None, params: AoccParams = AoccParams()) -> float:
    """Area over the convergence curve of a trace, in [0, 1] (higher is better).

    ``trace`` is anything with ``best_f`` and ``f_opt`` (an :class:`EvalTrace`).
    """
    if budget is None:
        budget = trace.budget
    if len(trace.best_f) == 0 or budget <= 0:
        return 0.0
    return aocc_from_errors(best_errors(trace.best_f, trace.f_opt, budget), params)


# -- attainment -------------------------------------------------------------

@dataclass
class EafGrid:
    budgets: list[int]
    targets: list[float]
    values: np.ndarray  # shape (len(budgets), len(targets))

    def curve(self) -> np.ndarray:
        """Mean attainment over targets at each budget."""
        return self.values.mean(axis=1)


def default_targets(lower_log: float = -8.0, upper_log: float = 2.0, n: int = 51) -> list[float]:
    return [float(t) for t in np.logspace(lower_log, upper_log, n)]


def default_budgets(budget: int, n: int = 20) -> list[int]:
    pts = np.unique(np.round(np.logspace(0, math.log10(budget), n)).astype(int))
    return [int(b) for b in pts]


def _error_at(trace, b: int) -> float:
    n = len(trace.best_f)
    if n == 0:
        return math.inf
    return float(trace.best_f[min(b, n) - 1] - trace.f_opt)


def eaf(traces: Sequence, budgets: Sequence[int], targets: Sequence[float]) -> EafGrid:
    """Fraction of runs whose best error at each budget is <= each target."""
    budgets = [int(b) for b in budgets]
    targets = [float(t) for t in targets]
    errs = np.array([[_error_at(tr, b) for b in budgets] for tr in traces], dtype=float)
    hits = errs[:, :, None] <= np.asarray(targets)[None, None, :]
    return EafGrid(budgets, targets, hits.mean(axis=0))


# -- ELO --------------------------------------------------------------------

ELO_SCALE = 400.0
ELO_INITIAL = 1000.0


def elo_update(r_a: float, r_b: float, score_a: float, k: float = 32.0) -> tuple[float, float]:
    expected_a = 1.0 / (1.0 + 10.0 ** ((r_b - r_a) / ELO_SCALE))
    delta = k * (score_a - expected_a)
    return r_a + delta, r_b - delta


@dataclass
class RatingTable:
    ratings: dict[str, float]
    matches: dict[str, int]
    n_matches: int
    seed: int
    k: float
    initial: float = ELO_INITIAL

    def ranking(self) -> list[str]:
        return sorted(self.ratings, key=lambda a: (-self.ratings[a], a))

    def total(self) -> float:
        return math.fsum(self.ratings.values())

    def to_csv(self) -> str:
        lines = ["rank,algorithm,rating,matches,k,n_matches,seed"]
        for i, name in enumerate(self.ranking(), 1):
            lines.append(f"{i},{name},{self.ratings[name]!r},{self.matches[name]},{self.k!r},"
                         f"{self.n_matches},{self.seed}")
        return "\n".join(lines) + "\n"


def elo_tournament(outcomes: Mapping[str, Sequence[float]], n_matches: int = 100_000, k: float = 32.0,
                   seed: int = 0, higher_is_better: bool = True) -> RatingTable:
    """Random one-against-one tournament over shared cells.

    ``outcomes[name][c]`` is the metric of algorithm ``name`` on cell ``c``.
    Each match draws two distinct algorithms and one cell uniformly; the
    better metric wins, equal metrics tie.
    """
    names = list(outcomes)
    if len(names) < 2:
        raise ValueError("an ELO tournament needs at least two algorithms")
    table = np.array([np.asarray(outcomes[n], dtype=float) for n in names])
    if table.ndim != 2 or table.shape[1] == 0:
        raise ValueError("all algorithms must cover the same non-empty set of cells")
    if not higher_is_better:
        table = -table
    rng = make_rng(seed)
    m = len(names)
    first = rng.integers(m, size=n_matches)
    second = rng.integers(m - 1, size=n_matches)
    second += second >= first  # distinct from first, uniform over the rest
    cells = rng.integers(table.shape[1], size=n_matches)
    ratings = [ELO_INITIAL] * m
    played = [0] * m
    a_vals = table[first, cells]
    b_vals = table[second, cells]
    scores = np.where(a_vals > b_vals, 1.0, np.where(a_vals < b_vals, 0.0, 0.5)).tolist()
    for a, b, s in zip(first.tolist(), second.tolist(), scores):
        ratings[a], ratings[b] = elo_update(ratings[a], ratings[b], s, k)
        played[a] += 1
        played[b] += 1
    return RatingTable(dict(zip(names, ratings)), dict(zip(names, played)), n_matches, seed, k)


# -- significance -----------------------------------------------------------

def welch_t_test(a: Sequence[float], b: Sequence[float]) -> float:
    """Two-sided p-value of Welch's unequal-variance t-test."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if len(a) < 2 or len(b) < 2:
        raise ValueError("each sample needs at least two observations")
    va, vb = a.var(ddof=1) / len(a), b.var(ddof=1) / len(b)
    diff = a.mean() - b.mean()
    if va + vb == 0.0:
        return 1.0 if diff == 0.0 else 0.0
    t = diff / math.sqrt(va + vb)
    df = (va + vb) ** 2 / (va ** 2 / (len(a) - 1) + vb ** 2 / (len(b) - 1))
    # stdtr is the Student-t CDF
    return float(min(1.0, 2.0 * special.stdtr(df, -abs(t))))


# -- AAD convergence --------------------------------------------------------

def convergence_aggregate(fitness_runs: Sequence[Sequence[float]]) -> np.ndarray:
    """Mean over runs of the running best fitness per candidate index.

    Each run is the fitness sequence of one lineage in creation order; failed
    candidates carry their penalty value.
    """
    runs = [np.asarray(r, dtype=float) for r in fitness_runs]
    if not runs:
        return np.zeros(0)
    n = len(runs[0])
    if any(len(r) != n for r in runs):
        raise ValueError("lineages must have equal length")
    return np.mean([np.maximum.accumulate(r) for r in runs], axis=0)
