"""Built-in solver families written as ask-tell coroutines.

Each solver exposes ``steps()``, a generator that yields query points and
receives their objective values through ``send``. :class:`Session` turns the
generator into the ask/tell/done interface used by the evaluation loop.
"""
from __future__ import annotations

import logging
import math

import numpy as np

from ..seeding import make_rng
from .config import Family, SolverConfig

log = logging.getLogger(__name__)


class ProtocolError(RuntimeError):
    """The caller or the candidate broke the ask/tell alternation."""


class Session:
    def __init__(self, steps):
        self._gen = steps
        self._started = False
        self._awaiting_tell = False
        self._value = None
        self.done = False

    def ask(self):
        """Next point to evaluate, or ``None`` once the solver has finished."""
        if self.done:
            return None
        if self._awaiting_tell:
            raise ProtocolError("ask() called twice without tell()")
        try:
            if not self._started:
                self._started = True
                x = next(self._gen)
            else:
                x = self._gen.send(self._value)
        except StopIteration:
            self.done = True
            return None
        self._awaiting_tell = True
        return np.asarray(x, dtype=float)

    def tell(self, f: float) -> None:
        if not self._awaiting_tell:
            raise ProtocolError("tell() without a pending ask()")
        self._awaiting_tell = False
        self._value = float(f)

    def close(self) -> None:
        self._gen.close()
        self.done = True


class Solver:
    def __init__(self, config: SolverConfig, dimension: int, lower, upper, budget: int, seed: int):
        self.config = config
        self.dim = int(dimension)
        self.lower = np.broadcast_to(np.asarray(lower, dtype=float), (self.dim,)).copy()
        self.upper = np.broadcast_to(np.asarray(upper, dtype=float), (self.dim,)).copy()
        self.width = self.upper - self.lower
        self.budget = int(budget)
        self.rng = make_rng(seed)

    def uniform(self, n=None):
        shape = (self.dim,) if n is None else (n, self.dim)
        return self.rng.uniform(self.lower, self.upper, size=shape)

    def steps(self):
        raise NotImplementedError

    def session(self) -> Session:
        return Session(self.steps())


class RandomSearch(Solver):
    def steps(self):
        while True:
            yield self.uniform()


class OnePlusOneES(Solver):
    """(1+1)-ES with Gaussian mutation and the 1/5-th success rule."""

    def steps(self):
        sigma = self.config.get("sigma0")
        up = self.config.get("success_factor")
        down = up ** -0.25  # stationary at a success rate of 1/5
        x = self.uniform()
        fx = yield x
        while True:
            y = x + sigma * self.width * self.rng.standard_normal(self.dim)
            fy = yield y
            if fy <= fx:
                x, fx = y, fy
                sigma *= up
            else:
                sigma *= down
            sigma = min(sigma, 1.0)


class DifferentialEvolution(Solver):
    """DE/rand/1/bin with generational replacement; trials are clipped to the box."""

    def steps(self):
        n = self.config.get("population_size")
        F = self.config.get("F")
        CR = self.config.get("CR")
        pop = self.uniform(n)
        fit = np.empty(n)
        for i in range(n):
            fit[i] = yield pop[i]
        while True:
            new_pop, new_fit = pop.copy(), fit.copy()
            for i in range(n):
                r1, r2, r3 = self.rng.choice([j for j in range(n) if j != i], size=3, replace=False)
                mutant = pop[r1] + F * (pop[r2] - pop[r3])
                cross = self.rng.random(self.dim) < CR
                cross[self.rng.integers(self.dim)] = True
                trial = np.clip(np.where(cross, mutant, pop[i]), self.lower, self.upper)
                ft = yield trial
                if ft <= fit[i]:
                    new_pop[i], new_fit[i] = trial, ft
            pop, fit = new_pop, new_fit


class CmaEs(Solver):
    """(mu/mu_w, lambda)-CMA-ES with cumulative step-size adaptation,
    rank-one and rank-mu covariance updates. No restarts, no active update.
    """

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        n = self.dim
        lam = int(self.config.get("popsize")) or 4 + int(3 * math.log(n))
        mu = lam // 2
        w = math.log(mu + 0.5) - np.log(np.arange(1, mu + 1))
        self.weights = w / w.sum()
        self.mueff = 1.0 / np.sum(self.weights ** 2)
        self.lam, self.mu = lam, mu
        self.cc = (4 + self.mueff / n) / (n + 4 + 2 * self.mueff / n)
        self.cs = (self.mueff + 2) / (n + self.mueff + 5)
        self.c1 = 2 / ((n + 1.3) ** 2 + self.mueff)
        self.cmu = min(1 - self.c1, 2 * (self.mueff - 2 + 1 / self.mueff) / ((n + 2) ** 2 + self.mueff))
        self.damps = 1 + 2 * max(0.0, math.sqrt((self.mueff - 1) / (n + 1)) - 1) + self.cs
        self.chi_n = math.sqrt(n) * (1 - 1 / (4 * n) + 1 / (21 * n * n))
        # dynamic state, exposed for inspection
        self.mean = None
        self.sigma = self.config.get("sigma0") * float(np.mean(self.width))
        self.C = np.eye(n)
        self.pc = np.zeros(n)
        self.ps = np.zeros(n)
        self.generation = 0
        self.resets = 0

    def _decompose(self):
        C = (self.C + self.C.T) / 2
        try:
            evals, B = np.linalg.eigh(C)
        except np.linalg.LinAlgError:
            evals, B = None, None
        if evals is None or not np.all(np.isfinite(evals)) or evals.min() <= 0 \
                or evals.max() > 1e14 * evals.min():
            log.info("CMA-ES covariance degenerate at generation %d; reset to identity", self.generation)
            self.resets += 1
            self.C = np.eye(self.dim)
            self.pc[:] = 0.0
            self.ps[:] = 0.0
            return np.ones(self.dim), np.eye(self.dim)
        self.C = C
        return evals, B

    def steps(self):
        n = self.dim
        self.mean = self.uniform()
        while True:
            evals, B = self._decompose()
            D = np.sqrt(evals)
            Z = self.rng.standard_normal((self.lam, n))
            Y = (Z * D) @ B.T
            X = self.mean + self.sigma * Y
            fits = np.empty(self.lam)
            for k in range(self.lam):
                fits[k] = yield X[k]
            order = np.argsort(fits, kind="stable")[: self.mu]
            y_sel = Y[order]
            y_w = self.weights @ y_sel
            self.mean = self.mean + self.sigma * y_w
            inv_sqrt = B @ np.diag(1 / D) @ B.T
            self.ps = (1 - self.cs) * self.ps + math.sqrt(self.cs * (2 - self.cs) * self.mueff) * (inv_sqrt @ y_w)
            self.generation += 1
            ps_norm = float(np.linalg.norm(self.ps))
            hsig = ps_norm / math.sqrt(1 - (1 - self.cs) ** (2 * self.generation)) / self.chi_n < 1.4 + 2 / (n + 1)
            self.pc = (1 - self.cc) * self.pc + hsig * math.sqrt(self.cc * (2 - self.cc) * self.mueff) * y_w
            rank_mu = (y_sel.T * self.weights) @ y_sel
            c1a = self.c1 * (1 - (1 - hsig) * self.cc * (2 - self.cc))
            self.C = (1 - c1a - self.cmu) * self.C + self.c1 * np.outer(self.pc, self.pc) + self.cmu * rank_mu
            self.sigma *= math.exp(min(1.0, (self.cs / self.damps) * (ps_norm / self.chi_n - 1)))
            self.sigma = min(self.sigma, 10.0 * float(np.max(self.width)))


SOLVERS = {
    Family.RandomSearch: RandomSearch,
    Family.OnePlusOneES: OnePlusOneES,
    Family.DifferentialEvolution: DifferentialEvolution,
    Family.CmaEs: CmaEs,
}


def make_solver(config: SolverConfig, dimension, lower, upper, budget, seed) -> Solver:
    return SOLVERS[config.family](config, dimension, lower, upper, budget, seed)
