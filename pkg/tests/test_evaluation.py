import json
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aadbench.candidates import Candidate, builtin_candidate
from aadbench.evaluation import (
    FAILURE_PENALTY,
    NONFINITE_VALUE,
    Budget,
    RunStatus,
    read_eval_log,
    run_candidate,
    trace_fitness,
    training_fitness,
)
from aadbench.metrics import aocc
from aadbench.problems import generate_instance

OPTIMUM_STUB = """\
import json, sys
x_opt = {x_opt}
init = json.loads(sys.stdin.readline())
while True:
    print(json.dumps({{"type": "ask", "x": x_opt}}), flush=True)
    msg = json.loads(sys.stdin.readline())
    if msg["type"] == "stop":
        break
"""

NAN_STUB = """\
import json, sys
init = json.loads(sys.stdin.readline())
print(json.dumps({"type": "ask", "x": [float("nan")] * init["dim"]}), flush=True)
sys.stdin.readline()
print(json.dumps({"type": "done"}), flush=True)
"""


def source_candidate(source, id=1):
    return Candidate(id=id, name="stub", source=source, launch=[sys.executable, "-u", "{source}"])


def test_budget_rule():
    assert Budget.for_dimension(5).max_evaluations == 10_000
    with pytest.raises(ValueError):
        Budget(0)


def test_asking_the_optimum_scores_one():
    inst = generate_instance(13, 5, 4)
    cand = source_candidate(OPTIMUM_STUB.format(x_opt=json.dumps(inst.x_opt.tolist())))
    tr = run_candidate(cand, inst, 50, 0)
    assert tr.status is RunStatus.BudgetExhausted and len(tr) == 50
    assert trace_fitness(tr) == 1.0


def test_instantiation_failure_is_penalised():
    tr = run_candidate(Candidate(id=1, name="broken"), generate_instance(2, 5, 0), 10, 0)
    assert tr.failed and len(tr) == 0
    assert trace_fitness(tr) == FAILURE_PENALTY


def test_nonfinite_point_gets_large_value():
    tr = run_candidate(source_candidate(NAN_STUB), generate_instance(2, 3, 0), 10, 0)
    assert tr.status is RunStatus.Completed
    assert tr.f == [NONFINITE_VALUE]


def test_eval_log_replay(tmp_path):
    inst = generate_instance(15, 5, 2)
    path = tmp_path / "log.jsonl"
    tr = run_candidate(builtin_candidate({"family": "CmaEs"}), inst, 300, 7, log_path=path)
    back = read_eval_log(path)
    assert back.f == tr.f and back.best_f == tr.best_f
    assert back.status is tr.status
    assert aocc(back) == aocc(tr)
    lines = path.read_text().splitlines()
    assert json.loads(lines[0])["type"] == "header" and json.loads(lines[-1])["type"] == "footer"


def test_eval_log_with_points(tmp_path):
    inst = generate_instance(2, 3, 0)
    path = tmp_path / "log.jsonl"
    tr = run_candidate(builtin_candidate({"family": "RandomSearch"}), inst, 20, 1, log_path=path, log_x=True)
    back = read_eval_log(path)
    assert np.allclose(np.array(back.xs), np.array(tr.xs))


def test_training_fitness_is_mean_over_pairs():
    cand = builtin_candidate({"family": "OnePlusOneES"})
    insts = [generate_instance(f, 3, 0) for f in (1, 2)]
    seeds = [3, 4]
    expected = np.mean([aocc(run_candidate(cand, i, 100, s)) for i in insts for s in seeds])
    assert training_fitness(cand, insts, seeds, 100) == pytest.approx(expected, abs=0)


def test_training_fitness_counts_failures():
    insts = [generate_instance(1, 2, 0)]
    assert training_fitness(Candidate(id=1, name="broken"), insts, [0, 1], 10) == FAILURE_PENALTY


@settings(max_examples=20)
@given(st.sampled_from(["RandomSearch", "OnePlusOneES", "DifferentialEvolution", "CmaEs"]),
       st.integers(1, 300), st.integers(0, 2**31), st.integers(1, 24))
def test_budget_cap_and_monotone_best(family, budget, seed, fid):
    tr = run_candidate(builtin_candidate({"family": family}), generate_instance(fid, 3, seed % 7), budget, seed)
    assert len(tr) == budget
    assert np.all(np.diff(tr.best_f) <= 0)
    assert np.allclose(tr.best_f, np.minimum.accumulate(tr.f))
