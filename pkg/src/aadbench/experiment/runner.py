"""Orchestration of (method x problem x run) cells and the on-disk results tree.

Layout::

    <out>/manifest.json
    <out>/summary.json
    <out>/runs/<method>/<problem>/run_<k>/{lineage.jsonl, evals/, llm_log.jsonl}
    <out>/analysis/...

A cell's ``lineage.jsonl`` is written last (atomically), so its presence
marks a finished cell; re-running into the same directory resumes.
"""
from __future__ import annotations

import concurrent.futures as cf
import hashlib
import json
import logging
import multiprocessing
import re
import shutil
import traceback
from dataclasses import dataclass
from pathlib import Path

from .. import __version__
from ..aad import RunLineage, run_method
from ..llm import MockLLM, OpenAIChatClient, QueryLogger
from ..problems import suite_split
from ..seeding import derive_seed
from .config import ConfigError, ExperimentConfig, LlmSpec, config_from_dict

log = logging.getLogger(__name__)

MANIFEST = "manifest.json"
SUMMARY = "summary.json"
LINEAGE = "lineage.jsonl"
LLM_LOG = "llm_log.jsonl"


def safe_name(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]+", "_", name).strip("_") or "_"


def cell_seed(master_seed: int, method: str, problem: str, run: int) -> int:
    # keyed by names so adding a method or problem leaves other cells untouched
    return derive_seed("cell", int(master_seed), method, problem, int(run))


@dataclass(frozen=True)
class Cell:
    method: str
    problem: str
    run: int
    seed: int

    @property
    def key(self) -> str:
        return f"{self.method}/{self.problem}/run_{self.run}"

    def path(self, root) -> Path:
        return Path(root) / "runs" / safe_name(self.method) / safe_name(self.problem) / f"run_{self.run}"


def cells_of(cfg: ExperimentConfig) -> list[Cell]:
    return [Cell(m.name, p.name, k, cell_seed(cfg.master_seed, m.name, p.name, k))
            for m in cfg.methods for p in cfg.problems for k in range(cfg.runs_per_cell)]


def make_client(spec: LlmSpec):
    if spec.kind == "mock":
        return MockLLM(seed=spec.seed, model=spec.model)
    return OpenAIChatClient(model=spec.model, base_url=spec.base_url, api_key_env=spec.api_key_env,
                            temperature=spec.temperature, price_in=spec.price_in, price_out=spec.price_out,
                            timeout=spec.timeout, requests_per_minute=spec.requests_per_minute)


def config_checksum(cfg: ExperimentConfig) -> str:
    """SHA-256 over the result-relevant config and the code version."""
    data = cfg.to_dict()
    for k in ("output", "worker_count"):
        data.pop(k)
    body = json.dumps({"config": data, "code_version": __version__}, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(body.encode("utf-8")).hexdigest()


def train_seeds(cell: Cell, n: int) -> list[int]:
    return [derive_seed("train", cell.seed, j) for j in range(n)]


def run_cell(cfg: ExperimentConfig, cell: Cell, root) -> dict:
    """Execute one AAD run; any exception is confined to this cell."""
    out = cell.path(root)
    info = {"cell": cell.key, "method": cell.method, "problem": cell.problem, "run": cell.run, "seed": cell.seed}
    if (out / LINEAGE).exists():
        return {**info, **_lineage_stats(RunLineage.load(out / LINEAGE)), "status": "ok"}
    try:
        if out.exists():
            shutil.rmtree(out)  # leftovers of an interrupted attempt
        (out / "evals").mkdir(parents=True)
        method = next(m for m in cfg.methods if m.name == cell.method)
        problem = next(p for p in cfg.problems if p.name == cell.problem)
        llm = cfg.llm_for(method)
        train = suite_split(problem.suite)["train"]
        logger = QueryLogger(out / LLM_LOG)
        lineage = run_method(method.aad, make_client(llm), train, train_seeds(cell, cfg.train_seeds),
                             cfg.budget_for(problem.suite.dimension), cell.seed, logger, cfg.aocc, cfg.prompt_map(),
                             out / "evals", cfg.timeout, llm.model)
        tmp = out / (LINEAGE + ".tmp")
        lineage.save(tmp)
        tmp.replace(out / LINEAGE)
        cost = sum(r.get("cost") or 0.0 for r in logger.records)
        return {**info, **_lineage_stats(lineage), "status": "ok", "llm_queries": len(logger.records),
                "tokens": logger.total_tokens(), "cost": cost}
    except Exception as exc:  # noqa: BLE001 - isolate the cell
        log.exception("cell %s failed", cell.key)
        try:
            (out / "error.txt").write_text(traceback.format_exc(), encoding="utf-8")
        except OSError:
            pass
        return {**info, "status": "failed", "error": f"{type(exc).__name__}: {exc}"}


def _lineage_stats(lineage: RunLineage) -> dict:
    fits = [c.fitness for c in lineage.candidates if c.status.value == "Evaluated" and c.fitness is not None]
    return {"candidates": len(lineage), "evaluated": len(fits), "best_fitness": max(fits) if fits else None}


class ResultsStore:
    """Read access to a results tree."""

    def __init__(self, root):
        self.root = Path(root)

    @property
    def analysis_dir(self) -> Path:
        return self.root / "analysis"

    def exists(self) -> bool:
        return (self.root / MANIFEST).is_file()

    def manifest(self) -> dict:
        return json.loads((self.root / MANIFEST).read_text(encoding="utf-8"))

    def config(self) -> ExperimentConfig:
        cfg = config_from_dict(self.manifest()["config"], str(self.root / MANIFEST))
        return cfg.with_overrides(out=str(self.root))

    def summary(self) -> dict:
        path = self.root / SUMMARY
        return json.loads(path.read_text(encoding="utf-8")) if path.exists() else {}

    def cells(self) -> list[Cell]:
        return [Cell(c["method"], c["problem"], c["run"], c["seed"]) for c in self.manifest()["cells"]]

    def lineage(self, cell: Cell) -> RunLineage | None:
        path = cell.path(self.root) / LINEAGE
        if not path.exists():
            return None
        return RunLineage.load(path, cell.seed, cell.method)

    def lineages(self, method: str, problem: str) -> list[tuple[Cell, RunLineage]]:
        out = []
        for c in self.cells():
            if c.method == method and c.problem == problem:
                lin = self.lineage(c)
                if lin is not None:
                    out.append((c, lin))
        return out


def write_manifest(cfg: ExperimentConfig, root: Path) -> dict:
    manifest = {
        "format": "aadbench-results",
        "code_version": __version__,
        "checksum": config_checksum(cfg),
        "config": cfg.to_dict(),
        "cells": [{"method": c.method, "problem": c.problem, "run": c.run, "seed": c.seed,
                   "path": str(c.path(".").as_posix())} for c in cells_of(cfg)],
    }
    path = root / MANIFEST
    if path.exists():
        old = json.loads(path.read_text(encoding="utf-8"))
        if old.get("checksum") != manifest["checksum"]:
            raise ConfigError(str(path), "results directory belongs to a different experiment configuration")
    tmp = root / (MANIFEST + ".tmp")
    tmp.write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n", encoding="utf-8")
    tmp.replace(path)
    return manifest


def _execute(cfg: ExperimentConfig, cells: list[Cell], root: Path) -> list[dict]:
    if cfg.worker_count <= 1 or len(cells) <= 1:
        results = []
        try:
            for c in cells:
                results.append(run_cell(cfg, c, root))
        except KeyboardInterrupt:
            done = {r["cell"] for r in results}
            results += [_aborted(c) for c in cells if c.key not in done]
            _write_summary(root, results)
            raise
        return results
    ctx = multiprocessing.get_context("spawn")
    pool = cf.ProcessPoolExecutor(max_workers=min(cfg.worker_count, len(cells)), mp_context=ctx)
    futures = [pool.submit(run_cell, cfg, c, root) for c in cells]
    try:
        results = []
        for c, fut in zip(cells, futures):
            try:
                results.append(fut.result())
            except cf.process.BrokenProcessPool as exc:
                results.append({"cell": c.key, "method": c.method, "problem": c.problem, "run": c.run,
                                "seed": c.seed, "status": "failed", "error": f"worker died: {exc}"})
        pool.shutdown()
        return results
    except KeyboardInterrupt:
        pool.shutdown(wait=True, cancel_futures=True)
        results = [f.result() if f.done() and not f.cancelled() and f.exception() is None else _aborted(c)
                   for c, f in zip(cells, futures)]
        _write_summary(root, results)
        raise


def _aborted(c: Cell) -> dict:
    return {"cell": c.key, "method": c.method, "problem": c.problem, "run": c.run, "seed": c.seed,
            "status": "aborted"}


def _write_summary(root: Path, results: list[dict]) -> dict:
    summary = {
        "cells": results,
        "failed": [r["cell"] for r in results if r["status"] == "failed"],
        "aborted": [r["cell"] for r in results if r["status"] == "aborted"],
        "completed": sum(r["status"] == "ok" for r in results),
    }
    (root / SUMMARY).write_text(json.dumps(summary, indent=1, sort_keys=True) + "\n", encoding="utf-8")
    return summary


def run_experiment(cfg: ExperimentConfig, validate_results: bool | None = None) -> ResultsStore:
    """Run all cells, write the summary, then (by default) validate and analyse."""
    root = Path(cfg.output)
    try:
        root.mkdir(parents=True, exist_ok=True)
        (root / "runs").mkdir(exist_ok=True)
        write_manifest(cfg, root)
    except OSError as exc:
        raise OSError(f"output directory {root} is not writable: {exc}") from exc
    results = _execute(cfg, cells_of(cfg), root)
    summary = _write_summary(root, results)
    for key in summary["failed"]:
        log.warning("cell %s failed", key)
    store = ResultsStore(root)
    if validate_results if validate_results is not None else cfg.validation.enabled:
        from .validation import validate
        validate(store, cfg)
    return store
