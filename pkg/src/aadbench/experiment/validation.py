"""Validation of the best found candidates against baselines, and the analysis tables.

CSV layouts written to ``<out>/analysis``
------------------------------------------
``aocc.csv``         algorithm,role,problem,run,selected,instance,seed,aocc,final_error,status
                     (role ``run_best`` = best candidate of AAD run ``run``; ``baseline``;
                     ``selected`` = 1 for the algorithm entered into EAF/ELO)
``selected.csv``     method,problem,run,candidate_id,name,training_fitness,validation_aocc,selected
``eaf.csv``          algorithm,problem,budget,attainment (mean over targets)
``eaf_grid.csv``     algorithm,problem,budget,target,fraction
``elo.csv``          rank,algorithm,rating,matches,k,n_matches,seed
``convergence.csv``  method,problem,candidates,mean_best_fitness
``runlog.csv``       algorithm,problem,instance,dimension,seed,evaluations,best_error
                     (one row per improvement of the best-so-far value)
``report.csv`` / ``report.txt``  see :mod:`aadbench.analysis`
``ceg_<method>_<problem>_run_<k>.dot`` plus ``_nodes.csv`` / ``_edges.csv``
"""
from __future__ import annotations

import concurrent.futures as cf
import csv
import io
import math
import multiprocessing
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..aad import NoViableCandidateError, select_best
from ..analysis import build_ceg, render_report
from ..candidates import Candidate, builtin_candidate
from ..evaluation import EvalTrace, evaluate_pairs, trace_fitness
from ..metrics import convergence_aggregate, default_budgets, default_targets, eaf, elo_tournament
from ..problems import suite_split
from ..seeding import derive_seed
from .config import ExperimentConfig
from .runner import ResultsStore, safe_name

AOCC_COLUMNS = ["algorithm", "role", "problem", "run", "selected", "instance", "seed", "aocc", "final_error",
                "status"]


@dataclass
class _Job:
    algorithm: str
    role: str
    problem: str
    run: int | None
    candidate: Candidate


def validation_seeds(master_seed: int, n_runs: int) -> list[int]:
    return [derive_seed("validation", int(master_seed), k) for k in range(n_runs)]


def _run_job(job: _Job, instances, seeds, budget, timeout) -> list[EvalTrace]:
    return evaluate_pairs(job.candidate, instances, seeds, budget, None, timeout)


def _map_jobs(jobs, instances, seeds, budget, timeout, workers) -> list[list[EvalTrace]]:
    if workers <= 1 or len(jobs) <= 1:
        return [_run_job(j, instances, seeds, budget, timeout) for j in jobs]
    ctx = multiprocessing.get_context("spawn")
    with cf.ProcessPoolExecutor(max_workers=min(workers, len(jobs)), mp_context=ctx) as pool:
        futs = [pool.submit(_run_job, j, instances, seeds, budget, timeout) for j in jobs]
        return [f.result() for f in futs]


def _final_error(t: EvalTrace) -> float:
    return float(t.best_f[-1] - t.f_opt) if t.best_f else math.inf


def _write_csv(path: Path, header, rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    path.write_text(buf.getvalue(), encoding="utf-8")


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def read_aocc_rows(path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def report_samples(rows: list[dict]) -> dict[str, dict[str, list[float]]]:
    """Per (problem, algorithm) samples: one mean AOCC per AAD run, or per seed for baselines."""
    groups: dict[tuple, list[float]] = defaultdict(list)
    order: dict[str, list[str]] = {}
    for r in rows:
        key = r["run"] if r["role"] == "run_best" else r["seed"]
        groups[(r["problem"], r["algorithm"], key)].append(float(r["aocc"]))
        algs = order.setdefault(r["problem"], [])
        if r["algorithm"] not in algs:
            algs.append(r["algorithm"])
    out = {p: {a: [] for a in algs} for p, algs in order.items()}
    for (p, a, _), vals in groups.items():
        out[p][a].append(float(np.mean(vals)))
    return out


def elo_outcomes(rows: list[dict], criterion: str = "aocc") -> dict[str, list[float]]:
    """Per selected algorithm, its metric on every shared (problem, instance, seed) cell."""
    table: dict[str, dict[tuple, float]] = {}
    for r in rows:
        if r["selected"] != "1":
            continue
        v = float(r["aocc"]) if criterion == "aocc" else -float(r["final_error"])
        table.setdefault(r["algorithm"], {})[(r["problem"], r["instance"], r["seed"])] = v
    if not table:
        return {}
    shared = sorted(set.intersection(*(set(v) for v in table.values())))
    return {a: [vals[c] for c in shared] for a, vals in table.items()}


def write_elo(out: Path, rows: list[dict], cfg: ExperimentConfig):
    outcomes = elo_outcomes(rows, cfg.elo.criterion)
    if len(outcomes) < 2 or not next(iter(outcomes.values())):
        _write_csv(out / "elo.csv", ["rank", "algorithm", "rating", "matches", "k", "n_matches", "seed"], [])
        return None
    table = elo_tournament(outcomes, cfg.elo.n_matches, cfg.elo.k, cfg.elo.seed)
    (out / "elo.csv").write_text(table.to_csv(), encoding="utf-8")
    return table


def write_report(out: Path, rows: list[dict], cfg: ExperimentConfig, nonviable=()):
    samples = report_samples(rows)
    for problem, method in nonviable:
        samples.setdefault(problem, {})[method] = []
    report = render_report(samples)
    (out / "report.csv").write_text(report.to_csv(), encoding="utf-8")
    text = report.to_text()
    text += (f"AOCC bounds: log10 error in [{cfg.aocc.lower_log}, {cfg.aocc.upper_log}]; "
             f"ELO criterion: {cfg.elo.criterion}, {cfg.elo.n_matches} matches, K={cfg.elo.k}\n")
    (out / "report.txt").write_text(text, encoding="utf-8")
    return report


def write_cegs(store: ResultsStore, cfg: ExperimentConfig, feature: str) -> list[Path]:
    out = store.analysis_dir
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for c in store.cells():
        lin = store.lineage(c)
        if lin is None:
            continue
        stem = f"ceg_{safe_name(c.method)}_{safe_name(c.problem)}_run_{c.run}"
        g = build_ceg(lin, feature)
        (out / f"{stem}.dot").write_text(g.to_dot(stem), encoding="utf-8")
        (out / f"{stem}_nodes.csv").write_text(g.nodes_csv(), encoding="utf-8")
        (out / f"{stem}_edges.csv").write_text(g.edges_csv(), encoding="utf-8")
        paths.append(out / f"{stem}.dot")
    return paths


def validate(store: ResultsStore | str | Path, cfg: ExperimentConfig | None = None,
             n_runs: int | None = None, workers: int | None = None) -> dict:
    """Evaluate per-run best candidates and baselines on held-out instances; write ``analysis/``."""
    store = store if isinstance(store, ResultsStore) else ResultsStore(store)
    cfg = cfg or store.config()
    n_runs = n_runs or cfg.validation.n_runs
    workers = workers or cfg.worker_count
    out = store.analysis_dir
    out.mkdir(parents=True, exist_ok=True)
    seeds = validation_seeds(cfg.master_seed, n_runs)

    aocc_rows, selected_rows, eaf_rows, grid_rows, runlog_rows, conv_rows = [], [], [], [], [], []
    nonviable = []
    eaf_curves: dict[str, dict] = {}
    conv_curves: dict[str, dict] = {}
    for problem in cfg.problems:
        instances = suite_split(problem.suite)[cfg.validation.split]
        budget = cfg.budget_for(problem.suite.dimension)
        jobs: list[_Job] = []
        training: dict[tuple, float] = {}
        for m in cfg.methods:
            lineages = store.lineages(m.name, problem.name)
            fits = [lin.fitnesses() for _, lin in lineages]
            if fits and len({len(f) for f in fits}) == 1:
                curve = convergence_aggregate(fits)
                conv_curves.setdefault(problem.name, {})[m.name] = curve
                conv_rows += [[m.name, problem.name, i, _fmt(float(v))] for i, v in enumerate(curve, 1)]
            viable = 0
            for cell, lin in lineages:
                try:
                    best = select_best(lin)
                except NoViableCandidateError:
                    continue
                viable += 1
                jobs.append(_Job(m.name, "run_best", problem.name, cell.run, best))
                training[(m.name, cell.run)] = best.fitness
            if not viable:
                nonviable.append((problem.name, m.name))
        for b in cfg.baselines:
            jobs.append(_Job(b.name, "baseline", problem.name, None, builtin_candidate(b.solver, b.name)))
        traces_per_job = _map_jobs(jobs, instances, seeds, budget, cfg.timeout, workers)

        # the overall best per method: highest training fitness, ties to the lower run index
        chosen: dict[str, int] = {}
        for (method, run), fit in sorted(training.items(), key=lambda kv: (kv[0][0], -kv[1], kv[0][1])):
            chosen.setdefault(method, run)
        for job, traces in zip(jobs, traces_per_job):
            sel = job.role == "baseline" or chosen.get(job.algorithm) == job.run
            fits = [trace_fitness(t, cfg.aocc) for t in traces]
            for t, fit in zip(traces, fits):
                aocc_rows.append([job.algorithm, job.role, job.problem, _fmt(job.run), int(sel), t.instance_id,
                                  t.seed, _fmt(float(fit)), _fmt(_final_error(t)), t.status.value])
            if job.role == "run_best":
                c = job.candidate
                selected_rows.append([job.algorithm, job.problem, job.run, c.id, c.name, _fmt(float(c.fitness)),
                                      _fmt(float(np.mean(fits))), int(sel)])
            if not sel:
                continue
            grid = eaf(traces, default_budgets(budget, cfg.validation.eaf_budgets),
                       default_targets(cfg.aocc.lower_log, cfg.aocc.upper_log, cfg.validation.eaf_targets))
            curve = grid.curve()
            eaf_curves.setdefault(problem.name, {})[job.algorithm] = (grid.budgets, curve)
            eaf_rows += [[job.algorithm, job.problem, b, _fmt(float(v))] for b, v in zip(grid.budgets, curve)]
            for i, b in enumerate(grid.budgets):
                grid_rows += [[job.algorithm, job.problem, b, _fmt(t), _fmt(float(grid.values[i, j]))]
                              for j, t in enumerate(grid.targets)]
            for t in traces:
                last = math.inf
                for i, bf in enumerate(t.best_f, 1):
                    if bf < last:
                        runlog_rows.append([job.algorithm, job.problem, t.instance_id, problem.suite.dimension,
                                            t.seed, i, _fmt(float(bf - t.f_opt))])
                        last = bf

    _write_csv(out / "aocc.csv", AOCC_COLUMNS, aocc_rows)
    _write_csv(out / "selected.csv", ["method", "problem", "run", "candidate_id", "name", "training_fitness",
                                      "validation_aocc", "selected"], selected_rows)
    _write_csv(out / "eaf.csv", ["algorithm", "problem", "budget", "attainment"], eaf_rows)
    _write_csv(out / "eaf_grid.csv", ["algorithm", "problem", "budget", "target", "fraction"], grid_rows)
    _write_csv(out / "convergence.csv", ["method", "problem", "candidates", "mean_best_fitness"], conv_rows)
    _write_csv(out / "runlog.csv", ["algorithm", "problem", "instance", "dimension", "seed", "evaluations",
                                    "best_error"], runlog_rows)
    rows = read_aocc_rows(out / "aocc.csv")
    elo = write_elo(out, rows, cfg)
    report = write_report(out, rows, cfg, nonviable)
    cegs = write_cegs(store, cfg, cfg.validation.ceg_feature)
    if cfg.validation.figures:
        _figures(out / "figures", report_samples(rows), eaf_curves, elo, conv_curves)
    return {"report": report, "elo": elo, "cegs": cegs, "nonviable": nonviable, "rows": len(aocc_rows)}


def _figures(fig_dir: Path, samples, eaf_curves, elo, conv_curves) -> None:
    from .. import plotting

    for problem, per_alg in samples.items():
        plotting.aocc_boxplot(per_alg, fig_dir / f"aocc_{safe_name(problem)}.png", f"AOCC on {problem}")
    for problem, curves in eaf_curves.items():
        plotting.eaf_curves(curves, fig_dir / f"eaf_{safe_name(problem)}.png", f"EAF on {problem}")
    for problem, curves in conv_curves.items():
        plotting.convergence_curves(curves, fig_dir / f"convergence_{safe_name(problem)}.png",
                                    f"Training convergence on {problem}")
    if elo is not None:
        plotting.elo_bars(elo.ratings, fig_dir / "elo.png", f"ELO ({elo.n_matches} matches)")
