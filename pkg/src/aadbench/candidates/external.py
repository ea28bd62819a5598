"""Out-of-process candidates speaking the line-delimited JSON ask-tell protocol.

Harness to candidate::

    {"type":"init","dim":D,"lower":[...],"upper":[...],"budget":B,"seed":S}
    {"type":"tell","f":<float>}
    {"type":"stop"}

Candidate to harness::

    {"type":"ask","x":[<D floats>]}
    {"type":"done"}

After ``init`` the candidate alternates ``ask`` with the harness's ``tell``;
the exchange ends with ``stop`` (budget spent) or ``done`` (candidate quits).
Anything else is a protocol violation and fails the run.
"""
from __future__ import annotations

import json
import math
import queue
import shutil
import subprocess
import sys
import tempfile
import threading
from collections import deque
from pathlib import Path

import numpy as np

from .builtin import ProtocolError

STOP_GRACE_SECONDS = 2.0
DEFAULT_READ_TIMEOUT = 60.0
_EOF = object()


class InstantiationError(RuntimeError):
    pass


def encode(message: dict) -> str:
    # json writes floats with repr: shortest decimal that round-trips
    return json.dumps(message, separators=(",", ":"), allow_nan=False) + "\n"


def default_launch() -> list[str]:
    return [sys.executable, "-u", "{source}"]


class ExternalSession:
    """Ask/tell session backed by a child process.

    ``launch`` is an argv list; the token ``{source}`` is replaced by the path
    of a temporary file holding ``source`` (written with ``source_suffix``).
    """

    def __init__(self, launch, source: str | None, dimension: int, lower, upper, budget: int,
                 seed: int, read_timeout: float = DEFAULT_READ_TIMEOUT, source_suffix: str = ".py"):
        self.dim = int(dimension)
        self.read_timeout = read_timeout
        self.done = False
        self._awaiting_tell = False
        self._stderr: deque[str] = deque(maxlen=20)
        self._lines: queue.Queue = queue.Queue()
        self._workdir = tempfile.mkdtemp(prefix="aadbench-cand-")
        argv = list(launch or default_launch())
        if source is not None:
            src_path = Path(self._workdir) / f"candidate{source_suffix}"
            src_path.write_text(source, encoding="utf-8")
            argv = [a.replace("{source}", str(src_path)) for a in argv]
        try:
            self._proc = subprocess.Popen(
                argv, stdin=subprocess.PIPE, stdout=subprocess.PIPE, stderr=subprocess.PIPE,
                text=True, bufsize=1, cwd=self._workdir,
            )
        except OSError as exc:
            self._cleanup_dir()
            raise InstantiationError(f"could not start {argv[0]!r}: {exc}") from exc
        threading.Thread(target=self._pump_stdout, daemon=True).start()
        threading.Thread(target=self._pump_stderr, daemon=True).start()
        lower = np.broadcast_to(np.asarray(lower, dtype=float), (self.dim,))
        upper = np.broadcast_to(np.asarray(upper, dtype=float), (self.dim,))
        try:
            self._send({"type": "init", "dim": self.dim, "lower": lower.tolist(),
                        "upper": upper.tolist(), "budget": int(budget), "seed": int(seed)})
        except ProtocolError as exc:
            self.close()
            raise InstantiationError(str(exc)) from exc

    def _pump_stdout(self):
        for line in self._proc.stdout:
            self._lines.put(line)
        self._lines.put(_EOF)

    def _pump_stderr(self):
        for line in self._proc.stderr:
            self._stderr.append(line.rstrip())

    def stderr_tail(self) -> str:
        return " | ".join(self._stderr) or "<no stderr>"

    def _send(self, message: dict) -> None:
        try:
            self._proc.stdin.write(encode(message))
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError, ValueError) as exc:
            raise ProtocolError(f"candidate closed its input: {exc}; stderr: {self.stderr_tail()}") from None

    def _receive(self) -> dict:
        try:
            line = self._lines.get(timeout=self.read_timeout)
        except queue.Empty:
            raise TimeoutError(f"no message within {self.read_timeout}s") from None
        if line is _EOF:
            code = self._proc.wait()
            raise ProtocolError(f"candidate exited (code {code}) mid-protocol; stderr: {self.stderr_tail()}")
        try:
            msg = json.loads(line)
        except json.JSONDecodeError:
            raise ProtocolError(f"malformed message {line[:80]!r}") from None
        if not isinstance(msg, dict) or "type" not in msg:
            raise ProtocolError(f"message without type: {line[:80]!r}")
        return msg

    def ask(self):
        if self.done:
            return None
        if self._awaiting_tell:
            raise ProtocolError("ask() called twice without tell()")
        msg = self._receive()
        if msg["type"] == "done" and len(msg) == 1:
            self.done = True
            return None
        if msg["type"] != "ask" or set(msg) != {"type", "x"}:
            raise ProtocolError(f"unexpected message {msg!r}")
        x = msg["x"]
        if not isinstance(x, list) or not all(
                isinstance(v, (int, float)) and not isinstance(v, bool) for v in x):
            raise ProtocolError("ask.x must be a list of numbers")
        if len(x) != self.dim:
            raise ProtocolError(f"dimension mismatch: asked a {len(x)}-vector on a {self.dim}-d problem")
        self._awaiting_tell = True
        return np.array(x, dtype=float)

    def tell(self, f: float) -> None:
        if not self._awaiting_tell:
            raise ProtocolError("tell() without a pending ask()")
        self._awaiting_tell = False
        f = float(f)
        if not math.isfinite(f):
            raise ValueError("objective values sent over the wire must be finite")
        self._send({"type": "tell", "f": f})

    def close(self) -> None:
        """Send ``stop`` if the child is still running, then reap it."""
        if self._proc.poll() is None:
            try:
                if not self.done:
                    self._proc.stdin.write(encode({"type": "stop"}))
                    self._proc.stdin.flush()
                self._proc.stdin.close()
            except (BrokenPipeError, OSError, ValueError):
                pass
            try:
                self._proc.wait(timeout=STOP_GRACE_SECONDS)
            except subprocess.TimeoutExpired:
                self._proc.kill()
                self._proc.wait()
        self.done = True
        self._cleanup_dir()

    def kill(self) -> None:
        if self._proc.poll() is None:
            self._proc.kill()
            self._proc.wait()
        self.done = True
        self._cleanup_dir()

    def _cleanup_dir(self):
        shutil.rmtree(self._workdir, ignore_errors=True)


def reference_script(name: str = "random_search") -> Path:
    """Path of a bundled reference candidate script."""
    return Path(__file__).resolve().parent.parent / "external" / f"{name}.py"


def reference_source(name: str = "random_search") -> str:
    return reference_script(name).read_text(encoding="utf-8")

