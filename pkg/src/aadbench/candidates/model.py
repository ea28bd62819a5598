from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .builtin import Session, make_solver
from .config import ConfigError, SolverConfig
from .external import DEFAULT_READ_TIMEOUT, ExternalSession, InstantiationError


class Status(str, enum.Enum):
    Pending = "Pending"
    Evaluated = "Evaluated"
    Failed = "Failed"


@dataclass
class Candidate:
    """One optimizer proposal: a built-in configuration or an external program.

    ``launch`` is the argv used for external candidates (``{source}`` is
    substituted with the path of the written source file).
    """

    id: int
    name: str
    description: str = ""
    config: SolverConfig | None = None
    source: str | None = None
    launch: list[str] | None = None
    parent_ids: list[int] = field(default_factory=list)
    generation: int = 0
    prompt_id: int | None = None
    fitness: float | None = None
    status: Status = Status.Pending
    error: str | None = None

    @property
    def kind(self) -> str:
        return "builtin" if self.config is not None else "external"

    @property
    def payload(self) -> str:
        """Text shown to the LLM and used for static code features."""
        if self.config is not None:
            return self.config.to_json()
        return self.source or ""

    def to_record(self) -> dict:
        return {
            "id": self.id,
            "parents": list(self.parent_ids),
            "generation": self.generation,
            "prompt_id": self.prompt_id,
            "name": self.name,
            "description": self.description,
            "kind": self.kind,
            "payload": self.payload,
            "launch": self.launch,
            "fitness": self.fitness,
            "status": self.status.value,
            "error": self.error,
        }

    @classmethod
    def from_record(cls, rec: dict) -> "Candidate":
        config = source = None
        if rec.get("kind", "builtin") == "builtin" and rec.get("payload"):
            try:
                config = SolverConfig.from_json(rec["payload"])
            except ConfigError:
                source = rec["payload"]
        else:
            source = rec.get("payload")
        return cls(
            id=int(rec["id"]), name=rec.get("name", ""), description=rec.get("description", ""),
            config=config, source=source, launch=rec.get("launch"),
            parent_ids=[int(p) for p in rec.get("parents", [])],
            generation=int(rec.get("generation", 0)), prompt_id=rec.get("prompt_id"),
            fitness=rec.get("fitness"), status=Status(rec.get("status", "Pending")),
            error=rec.get("error"),
        )


def builtin_candidate(config: SolverConfig | dict, name: str | None = None, id: int = 0) -> Candidate:
    if isinstance(config, dict):
        config = SolverConfig.from_dict(config)
    return Candidate(id=id, name=name or config.family.value, config=config)


def instantiate(candidate: Candidate, dimension: int, lower, upper, budget: int, seed: int,
                read_timeout: float = DEFAULT_READ_TIMEOUT):
    """Start an ask/tell session for ``candidate``.

    Built-in sessions are deterministic in ``seed``. External candidates spawn
    a child process; failures to start raise :class:`InstantiationError`.
    """
    if candidate.config is not None:
        return make_solver(candidate.config, dimension, lower, upper, budget, seed).session()
    if candidate.source is None and not candidate.launch:
        raise InstantiationError(f"candidate {candidate.id} has neither a config nor a program")
    return ExternalSession(candidate.launch, candidate.source, dimension, lower, upper, budget, seed,
                           read_timeout=read_timeout)


__all__ = ["Candidate", "Status", "Session", "builtin_candidate", "instantiate"]
