import json
import sys
import time

import numpy as np
import pytest

from aadbench.candidates import Candidate, ExternalSession, ProtocolError, reference_script, reference_source
from aadbench.evaluation import RunStatus, run_candidate
from aadbench.problems import generate_instance


def ext(script, *args, id=1):
    return Candidate(id=id, name=script.stem, launch=[sys.executable, "-u", str(script), *map(str, args)])


@pytest.fixture
def inst():
    return generate_instance(2, 5, 1)


def test_reference_candidate_uses_exact_budget(inst):
    cand = Candidate(id=1, name="rs", source=reference_source(), launch=[sys.executable, "-u", "{source}"])
    tr = run_candidate(cand, inst, 500, 3)
    assert tr.status is RunStatus.BudgetExhausted
    assert len(tr) == 500


def test_reference_script_ships_with_package():
    assert reference_script().is_file()


def test_garbage_fails_with_partial_trace(inst, fixtures):
    tr = run_candidate(ext(fixtures / "stub_garbage.py"), inst, 100, 0)
    assert tr.status is RunStatus.CandidateFailed
    assert len(tr) == 3 and "malformed" in tr.reason


def test_dimension_violation(inst, fixtures):
    tr = run_candidate(ext(fixtures / "stub_wrong_dim.py"), inst, 100, 0)
    assert tr.status is RunStatus.CandidateFailed
    assert len(tr) == 2 and "dimension mismatch" in tr.reason


def test_over_asking_is_capped_and_protocol_conforms(inst, fixtures, tmp_path):
    record = tmp_path / "received.jsonl"
    tr = run_candidate(ext(fixtures / "stub_recorder.py", record), inst, 100, 0)
    assert tr.status is RunStatus.BudgetExhausted and len(tr) == 100
    deadline = time.monotonic() + 5
    while time.monotonic() < deadline:
        msgs = [json.loads(l) for l in record.read_text().splitlines()]
        if msgs and msgs[-1]["type"] == "stop":
            break
        time.sleep(0.05)
    kinds = [m["type"] for m in msgs]
    assert kinds[0] == "init" and kinds[-1] == "stop"
    assert kinds.count("tell") == 100
    # the stub asks exactly once before each message it reads, so tells never come back to back
    # without an ask in between; check the harness sent nothing but tells between init and stop
    assert set(kinds[1:-1]) == {"tell"}


def test_flooding_candidate_is_capped(inst, fixtures):
    tr = run_candidate(ext(fixtures / "stub_flood.py"), inst, 200, 0)
    assert len(tr) == 200 and tr.status is RunStatus.BudgetExhausted


def test_done_message_completes(inst, fixtures):
    tr = run_candidate(ext(fixtures / "stub_fixed_then_done.py"), inst, 100, 0)
    assert tr.status is RunStatus.Completed and len(tr) == 1


def test_crash_keeps_partial_trace(inst, fixtures):
    tr = run_candidate(ext(fixtures / "stub_crash.py"), inst, 100, 0)
    assert tr.status is RunStatus.CandidateFailed and len(tr) == 2
    assert "code 3" in tr.reason


def test_timeout(inst, fixtures):
    start = time.monotonic()
    tr = run_candidate(ext(fixtures / "stub_sleeper.py"), inst, 100, 0, timeout=0.5)
    assert tr.status is RunStatus.CandidateFailed and "Timeout" in tr.reason
    assert time.monotonic() - start < 10


def test_unlaunchable_program(inst):
    cand = Candidate(id=1, name="nope", launch=["/nonexistent/binary-xyz"])
    tr = run_candidate(cand, inst, 10, 0)
    assert tr.status is RunStatus.CandidateFailed and len(tr) == 0


def test_loopback_fixed_point(fixtures):
    s = ExternalSession([sys.executable, "-u", str(fixtures / "stub_fixed_then_done.py")], None, 3, -5, 5, 10, 0)
    try:
        assert np.array_equal(s.ask(), [0.25, 0.25, 0.25])
        with pytest.raises(ProtocolError):
            s.ask()
        s.tell(1.0)
        with pytest.raises(ProtocolError):
            s.tell(1.0)
        assert s.ask() is None
    finally:
        s.close()
