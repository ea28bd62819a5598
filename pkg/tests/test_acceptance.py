"""Acceptance suite: one test per headline criterion, each printing a PASS/FAIL line."""
import json
import sys
import time
from pathlib import Path

import numpy as np
import pytest
import scipy.special

from aadbench.analysis import render_report
from aadbench.candidates import Candidate, builtin_candidate, reference_source
from aadbench.evaluation import RunStatus, run_candidate
from aadbench.experiment import load_config, run_experiment
from aadbench.metrics import aocc, default_budgets, default_targets, eaf, elo_tournament, elo_update, welch_t_test
from aadbench.problems import evaluate, generate_instance, generate_mabbob_instance, get_function, scale_error
from aadbench.seeding import derive_seed

ROOT = Path(__file__).resolve().parents[1]
FIXTURES = Path(__file__).parent / "fixtures"


def report(number, title, body):
    try:
        detail = body()
    except Exception as exc:
        print(f"\nFAIL criterion {number}: {title}: {type(exc).__name__}: {exc}")
        raise
    print(f"\nPASS criterion {number}: {title}" + (f" ({detail})" if detail else ""))


class Stub:
    def __init__(self, best, f_opt=0.0):
        self.best_f = list(np.minimum.accumulate(np.asarray(best, dtype=float)))
        self.f_opt = f_opt
        self.budget = len(self.best_f)


def brute_force_eaf(traces, budgets, targets):
    out = np.zeros((len(budgets), len(targets)))
    for i, b in enumerate(budgets):
        for j, t in enumerate(targets):
            hits = 0
            for tr in traces:
                k = min(b, len(tr.best_f)) - 1
                if k >= 0 and tr.best_f[k] - tr.f_opt <= t:
                    hits += 1
            out[i, j] = hits / len(traces)
    return out


def welch_reference(a, b):
    # Welch-Satterthwaite statistic, p from the regularised incomplete beta function
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    va, vb = a.var(ddof=1) / len(a), b.var(ddof=1) / len(b)
    t = (a.mean() - b.mean()) / np.sqrt(va + vb)
    df = (va + vb) ** 2 / (va ** 2 / (len(a) - 1) + vb ** 2 / (len(b) - 1))
    return float(scipy.special.betainc(df / 2, 0.5, df / (df + t * t)))


def test_criterion_1_metric_kernels():
    def body():
        assert aocc(Stub([5.0] * 100, 5.0)) == 1.0
        assert aocc(Stub([107.0] * 100, 7.0)) == 0.0
        assert aocc(Stub([1e-3] * 100)) == 0.5
        assert elo_update(1000, 1000, 1.0, 32) == (1016.0, 984.0)
        rng = np.random.default_rng(11)
        traces = []
        for _ in range(5):
            f_opt = rng.uniform(-50, 50)
            traces.append(Stub(10 ** rng.uniform(-9, 3, size=int(rng.integers(20, 300))) + f_opt, f_opt))
        budgets, targets = default_budgets(300), default_targets()
        grid = eaf(traces, budgets, targets)
        assert np.array_equal(grid.values, brute_force_eaf(traces, budgets, targets))
        a = [0.61, 0.72, 0.58, 0.69, 0.75, 0.66, 0.70, 0.63, 0.68, 0.71]
        b = [0.52, 0.60, 0.49, 0.57, 0.55, 0.62, 0.50, 0.58, 0.54, 0.47]
        p, ref = welch_t_test(a, b), welch_reference(a, b)
        assert abs(p - ref) < 1e-6
        return f"Welch p={p:.6g}, reference {ref:.6g}"
    report(1, "metric kernels", body)


def test_criterion_2_instance_audit():
    def body():
        worst_opt = worst_rot = 0.0
        for fid in (2, 5, 13, 15, 21):
            xs = []
            for k in range(200):
                inst = generate_instance(fid, 5, derive_seed("audit", fid, k))
                worst_opt = max(worst_opt, abs(evaluate(inst, inst.x_opt) - inst.f_opt))
                r = inst.rotation
                worst_rot = max(worst_rot, float(np.max(np.abs(r.T @ r - np.eye(5)))))
                xs.append(inst.x_opt)
            xs = np.array(xs)
            assert np.all(xs.min(axis=0) < -4) and np.all(xs.max(axis=0) > 4), f"coverage fid {fid}"
        assert worst_opt <= 1e-9 and worst_rot <= 1e-9
        return f"max |f(x_opt)-f_opt|={worst_opt:.2e}, max orthogonality error={worst_rot:.2e}"
    report(2, "instance generator audit", body)


def test_criterion_3_mabbob_construction():
    def body():
        rng = np.random.default_rng(2024)
        worst_opt = worst_hot = 0.0
        for trial in range(50):
            k = int(rng.integers(2, 5))
            fids = tuple(int(f) for f in rng.choice(np.arange(1, 25), size=k, replace=False))
            w = rng.uniform(0.01, 1.0, size=k)
            w /= w.sum()
            seed = int(rng.integers(2**32))
            inst = generate_mabbob_instance(fids, w, 5, seed)
            worst_opt = max(worst_opt, abs(evaluate(inst, inst.x_opt)))
            j = trial % k
            hot = generate_mabbob_instance(fids, np.eye(k)[j], 5, seed)
            for x in rng.uniform(-5, 5, size=(10, 5)):
                e = get_function(fids[j])(hot.rotations[j] @ (x - hot.x_opt))
                worst_hot = max(worst_hot, abs(evaluate(hot, x) - scale_error(e)))
        assert worst_opt <= 1e-9 and worst_hot <= 1e-12
        return f"max |F(x_opt)|={worst_opt:.2e}, max one-hot deviation={worst_hot:.2e}"
    report(3, "MA-BBOB construction", body)


def test_criterion_4_cmaes_baseline():
    def body():
        inst = generate_instance(1, 5, 1)
        errs = {}
        for fam in ("CmaEs", "RandomSearch"):
            errs[fam] = [run_candidate(builtin_candidate({"family": fam}), inst, 10_000, s).best_f[-1] - inst.f_opt
                         for s in range(10)]
        med_c, med_r = np.median(errs["CmaEs"]), np.median(errs["RandomSearch"])
        p = welch_t_test(errs["CmaEs"], errs["RandomSearch"])
        assert med_c < 1e-6
        assert med_r / max(med_c, 1e-300) >= 100
        assert p < 0.05
        return f"median error CMA-ES {med_c:.2e}, random search {med_r:.2e}, Welch p={p:.2e}"
    report(4, "CMA-ES baseline sanity", body)


def _tree(root):
    out = {}
    for p in sorted(Path(root).rglob("*")):
        if not p.is_file() or p.name == "manifest.json":
            continue
        if p.name == "llm_log.jsonl":
            recs = [json.loads(l) for l in p.read_text().splitlines()]
            out[p.relative_to(root).as_posix()] = [{k: v for k, v in r.items() if k not in ("timestamp", "latency")}
                                                   for r in recs]
        else:
            out[p.relative_to(root).as_posix()] = p.read_bytes()
    return out


@pytest.mark.slow
def test_criterion_5_desk_use_case(tmp_path):
    def body():
        cfg = load_config(ROOT / "configs" / "desk_use_case_1.toml")
        start = time.perf_counter()
        a = run_experiment(cfg.with_overrides(workers=1, out=str(tmp_path / "a")))
        b = run_experiment(cfg.with_overrides(workers=1, out=str(tmp_path / "b")))
        c = run_experiment(cfg.with_overrides(workers=4, out=str(tmp_path / "c")))
        elapsed = time.perf_counter() - start
        assert a.summary()["completed"] == 6 and not a.summary()["failed"]
        for cell in a.cells():
            assert len(a.lineage(cell)) == 20
        names = {p.name for p in a.analysis_dir.iterdir()}
        assert any(n.endswith(".dot") for n in names)
        for f in ("eaf.csv", "elo.csv", "convergence.csv", "report.txt", "report.csv"):
            assert f in names and (a.analysis_dir / f).stat().st_size > 0
        assert len((a.analysis_dir / "elo.csv").read_text().splitlines()) == 4
        ta = _tree(a.root)
        assert ta == _tree(b.root), "repeat differs"
        assert ta == _tree(c.root), "worker_count 4 differs"
        assert elapsed < 3 * 5 * 60
        return f"3 full pipelines in {elapsed:.0f}s, {len(ta)} identical files"
    report(5, "desk-scale prompt-strategy replica", body)


def test_criterion_6_elo_scale():
    def body():
        rng = np.random.default_rng(6)
        outcomes = {f"alg{i}": rng.uniform(0.2, 0.6, size=200) for i in range(5)}
        outcomes["dominant"] = np.full(200, 0.9)
        start = time.perf_counter()
        t1 = elo_tournament(outcomes, 100_000, seed=42)
        elapsed = time.perf_counter() - start
        t2 = elo_tournament(outcomes, 100_000, seed=42)
        assert elapsed < 10
        assert abs(t1.total() - 6 * 1000.0) < 1e-6
        assert t1.to_csv().encode() == t2.to_csv().encode()
        assert t1.ranking()[0] == "dominant"
        return f"100000 matches in {elapsed:.2f}s"
    report(6, "ELO tournament at scale", body)


def test_criterion_7_external_protocol():
    def body():
        inst = generate_instance(2, 5, 1)
        ref = Candidate(id=1, name="rs", source=reference_source(), launch=[sys.executable, "-u", "{source}"])
        tr = run_candidate(ref, inst, 1000, 0)
        assert tr.status is RunStatus.BudgetExhausted and len(tr) == 1000

        def stub(name):
            return Candidate(id=2, name=name, launch=[sys.executable, "-u", str(FIXTURES / f"{name}.py")])
        g = run_candidate(stub("stub_garbage"), inst, 100, 0)
        assert g.status is RunStatus.CandidateFailed and len(g) == 3
        w = run_candidate(stub("stub_wrong_dim"), inst, 100, 0)
        assert w.status is RunStatus.CandidateFailed and len(w) == 2 and "dimension mismatch" in w.reason
        f = run_candidate(stub("stub_flood"), inst, 250, 0)
        assert len(f) == 250
        return "reference 1000/1000, garbage partial 3, wrong-dim partial 2, flood capped at 250"
    report(7, "external protocol conformance", body)


def test_criterion_8_report_shaping():
    def body():
        rng = np.random.default_rng(8)
        separated = {"P": {"best": 0.7 + 0.02 * rng.standard_normal(10),
                           "mid": 0.5 + 0.02 * rng.standard_normal(10),
                           "low": 0.3 + 0.02 * rng.standard_normal(10)}}
        rep = render_report(separated)
        bold = rep.bold_cells()
        assert [c.method for c in bold] == ["best"]
        assert bold[0].p_value is not None and bold[0].p_value < 0.05
        assert f"(p={bold[0].p_value:.3g})" in bold[0].text()
        same = [0.4, 0.5, 0.6, 0.45, 0.55]
        assert render_report({"P": {"a": same, "b": list(same), "c": list(same)}}).bold_cells() == []
        return f"bold: {bold[0].text()}"
    report(8, "report shaping", body)
