"""Suite specifications, seeded train/test/validation splits and prompt descriptions."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

from ..seeding import derive_seed, make_rng
from .functions import REGISTRY, FunctionGroup, functions_in_group, get_function
from .instances import (
    DEFAULT_LOWER,
    DEFAULT_UPPER,
    InvalidInputError,
    ProblemInstance,
    Role,
    generate_instance,
    generate_mabbob_instance,
)


class SuiteKind(str, enum.Enum):
    SBOX = "SBOX"
    MABBOB = "MABBOB"


@dataclass(frozen=True)
class SuiteSpec:
    """Which instances a problem uses.

    For ``SBOX`` the role counts are per function; for ``MABBOB`` they are
    totals, and ``fids`` is the pool that affine components are drawn from.
    """

    kind: SuiteKind = SuiteKind.MABBOB
    dimension: int = 5
    fids: tuple[int, ...] = ()
    group: int | None = None
    train: int = 20
    test: int = 50
    validation: int = 0
    master_seed: int = 0
    components: int = 2

    def __post_init__(self):
        object.__setattr__(self, "kind", SuiteKind(self.kind))
        object.__setattr__(self, "fids", tuple(int(f) for f in self.fids))
        if self.dimension < 2:
            raise InvalidInputError("dimension must be >= 2")
        if self.train <= 0 or self.test <= 0 or self.validation < 0:
            raise InvalidInputError("train and test counts must be positive, validation non-negative")
        for f in self.fids:
            get_function(f)
        if self.group is not None:
            FunctionGroup(self.group)
        if self.kind is SuiteKind.MABBOB and not 2 <= self.components <= len(self.pool()):
            raise InvalidInputError("components must be between 2 and the pool size")

    def pool(self) -> list[int]:
        if self.fids:
            return list(self.fids)
        if self.group is not None:
            return [f.fid for f in functions_in_group(self.group)]
        return sorted(REGISTRY)

    def counts(self) -> dict[Role, int]:
        return {Role.Train: self.train, Role.Test: self.test, Role.Validation: self.validation}


def instance_seed(kind: SuiteKind, fids, role: Role, k: int, master_seed: int) -> int:
    """BLAKE2b-64 of ``[kind, sorted fids, role, k, master_seed]`` (see :mod:`aadbench.seeding`)."""
    return derive_seed(SuiteKind(kind).value, sorted(int(f) for f in fids), Role(role).value, int(k),
                       int(master_seed))


def suite_split(spec: SuiteSpec) -> dict[str, list[ProblemInstance]]:
    out: dict[str, list[ProblemInstance]] = {r.value: [] for r in Role}
    pool = spec.pool()
    for role, count in spec.counts().items():
        if spec.kind is SuiteKind.SBOX:
            for fid in pool:
                for k in range(count):
                    seed = instance_seed(spec.kind, [fid], role, k, spec.master_seed)
                    out[role.value].append(generate_instance(fid, spec.dimension, seed, role))
        else:
            for k in range(count):
                seed = instance_seed(spec.kind, pool, role, k, spec.master_seed)
                fids, weights = _sample_combination(pool, spec.components, seed)
                out[role.value].append(
                    generate_mabbob_instance(fids, weights, spec.dimension, seed, role))
    return out


def _sample_combination(pool: list[int], n: int, seed: int) -> tuple[list[int], list[float]]:
    # separate stream from the instance transform drawn with the same seed
    rng = make_rng(derive_seed("components", seed))
    fids = sorted(int(f) for f in rng.choice(pool, size=n, replace=False))
    raw = rng.uniform(0.05, 1.0, size=n)
    weights = (raw / raw.sum()).tolist()
    weights[-1] = 1.0 - sum(weights[:-1])
    return fids, weights


def describe(instance: ProblemInstance, include_description: bool = True,
             budget: int | str = "{budget}") -> str:
    """Prompt-ready text about an instance; never mentions the optimum."""
    lines = [
        f"Minimize a black-box function of dimension {instance.dimension}.",
        f"The search space is the box [{instance.lower}, {instance.upper}]^{instance.dimension}.",
        f"The evaluation budget is {budget} function evaluations.",
    ]
    if include_description:
        if instance.is_affine:
            lines.append(instance.description)
        else:
            fn = instance.functions[0]
            lines.append(f"Function: {fn.name} (group: {fn.group.title}).")
            lines.append(fn.description)
    return "\n".join(lines)


def default_bounds(dimension: int):
    return [DEFAULT_LOWER] * dimension, [DEFAULT_UPPER] * dimension
