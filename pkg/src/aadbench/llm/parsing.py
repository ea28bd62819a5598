from __future__ import annotations

import re
from dataclasses import dataclass

from ..candidates import ConfigError, SolverConfig

_FENCE = re.compile(r"```[^\n`]*\n(.*?)```", re.DOTALL)
_NAME = re.compile(r"^[ \t]*#[ \t]*Name:[ \t]*(.+?)[ \t]*$", re.MULTILINE)
_DESC = re.compile(r"^[ \t]*#[ \t]*Description:[ \t]*(.+?)[ \t]*$", re.MULTILINE)
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


class ParseError(ValueError):
    pass


@dataclass(frozen=True)
class ParsedCandidate:
    name: str
    description: str
    payload: str | SolverConfig

    @property
    def is_config(self) -> bool:
        return isinstance(self.payload, SolverConfig)


def parse_response(text: str) -> ParsedCandidate:
    """Pull name, description and code out of an LLM answer.

    The first fenced block is the payload. A block that is a valid solver
    configuration becomes a :class:`SolverConfig`, anything else stays source.
    """
    block = _FENCE.search(text or "")
    if block is None:
        raise ParseError("response contains no fenced code block")
    code = block.group(1).strip("\n")
    if not code.strip():
        raise ParseError("fenced code block is empty")
    name_m = _NAME.search(text)
    if name_m:
        name = name_m.group(1)
    else:
        ident = _IDENT.search(code)
        name = ident.group(0) if ident else "candidate"
    desc_m = _DESC.search(text)
    payload: str | SolverConfig = code
    if code.lstrip().startswith("{"):
        try:
            payload = SolverConfig.from_json(code)
        except ConfigError:
            payload = code
    return ParsedCandidate(name, desc_m.group(1) if desc_m else "", payload)
