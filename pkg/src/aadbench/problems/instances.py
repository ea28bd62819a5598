"""Problem instances: shifted, rotated and offset realizations of raw functions."""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from ..seeding import make_rng
from .functions import BenchmarkFunction, get_function

DEFAULT_LOWER = -5.0
DEFAULT_UPPER = 5.0
PENALTY_FACTOR = 1e4
OPTIMUM_MARGIN = 0.01  # fraction of the box width kept free on each face
FOPT_RANGE = (-100.0, 100.0)

# log-scaling of component errors in affine combinations
ERROR_FLOOR = 1e-12
LOG_FLOOR = math.log10(ERROR_FLOOR)
LOG_CEIL = 10.0


class Role(str, enum.Enum):
    Train = "train"
    Test = "test"
    Validation = "validation"


class InvalidInputError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class ProblemInstance:
    """One concrete problem. Single-function instances have one entry in
    ``fids``; affine combinations carry several fids with ``weights`` and one
    rotation per component.
    """

    fids: tuple[int, ...]
    dimension: int
    x_opt: np.ndarray
    f_opt: float
    rotations: tuple[np.ndarray, ...]
    instance_seed: int
    weights: tuple[float, ...] | None = None
    lower: float = DEFAULT_LOWER
    upper: float = DEFAULT_UPPER
    role: Role = Role.Train
    description: str = ""
    _functions: tuple[BenchmarkFunction, ...] = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "_functions", tuple(get_function(f) for f in self.fids))
        self.x_opt.setflags(write=False)
        for r in self.rotations:
            r.setflags(write=False)

    @property
    def fid(self) -> int | None:
        return self.fids[0] if self.weights is None else None

    @property
    def rotation(self) -> np.ndarray:
        return self.rotations[0]

    @property
    def is_affine(self) -> bool:
        return self.weights is not None

    @property
    def functions(self) -> tuple[BenchmarkFunction, ...]:
        return self._functions

    @property
    def instance_id(self) -> str:
        kind = "f" + "+".join(str(f) for f in self.fids)
        return f"{kind}_d{self.dimension}_s{self.instance_seed}"

    def with_role(self, role: Role) -> "ProblemInstance":
        return ProblemInstance(
            fids=self.fids, dimension=self.dimension, x_opt=self.x_opt.copy(),
            f_opt=self.f_opt, rotations=tuple(r.copy() for r in self.rotations),
            instance_seed=self.instance_seed, weights=self.weights, lower=self.lower,
            upper=self.upper, role=Role(role), description=self.description,
        )

    def component_errors(self, x: np.ndarray) -> np.ndarray:
        """Raw error of every component at an in-bounds point ``x``."""
        d = x - self.x_opt
        return np.array([fn(rot @ d) for fn, rot in zip(self._functions, self.rotations)])

    def _value(self, x: np.ndarray) -> float:
        d = x - self.x_opt
        if self.weights is None:
            return self.f_opt + self._functions[0](self.rotations[0] @ d)
        total = 0.0
        for w, fn, rot in zip(self.weights, self._functions, self.rotations):
            if w != 0.0:
                total += w * scale_error(fn(rot @ d))
        return total

    def __call__(self, x) -> float:
        return evaluate(self, x)

    def to_record(self) -> dict:
        return {
            "fids": list(self.fids),
            "weights": None if self.weights is None else list(self.weights),
            "dimension": self.dimension,
            "instance_seed": self.instance_seed,
            "role": self.role.value,
            "lower": self.lower,
            "upper": self.upper,
            "x_opt": self.x_opt.tolist(),
            "f_opt": self.f_opt,
            "rotations": [r.ravel().tolist() for r in self.rotations],
            "description": self.description,
        }

    @classmethod
    def from_record(cls, rec: dict) -> "ProblemInstance":
        d = int(rec["dimension"])
        return cls(
            fids=tuple(int(f) for f in rec["fids"]),
            dimension=d,
            x_opt=np.array(rec["x_opt"], dtype=float),
            f_opt=float(rec["f_opt"]),
            rotations=tuple(np.array(r, dtype=float).reshape(d, d) for r in rec["rotations"]),
            instance_seed=int(rec["instance_seed"]),
            weights=None if rec.get("weights") is None else tuple(float(w) for w in rec["weights"]),
            lower=float(rec.get("lower", DEFAULT_LOWER)),
            upper=float(rec.get("upper", DEFAULT_UPPER)),
            role=Role(rec.get("role", "train")),
            description=rec.get("description", ""),
        )

    def to_json(self) -> str:
        # json emits floats with repr, the shortest string that round-trips
        return json.dumps(self.to_record(), separators=(",", ":"))


def scale_error(e: float) -> float:
    """Clipped log10 scaling of a non-negative error; 0 maps to 0."""
    return min(max(math.log10(e + ERROR_FLOOR), LOG_FLOOR), LOG_CEIL) - LOG_FLOOR


def evaluate(instance: ProblemInstance, x) -> float:
    """Objective value at ``x`` with the quadratic box penalty for infeasible points."""
    x = np.asarray(x, dtype=float)
    if x.shape != (instance.dimension,):
        raise InvalidInputError(
            f"point has shape {x.shape}, instance expects ({instance.dimension},)"
        )
    lo, hi = instance.lower, instance.upper
    below = np.maximum(0.0, lo - x)
    above = np.maximum(0.0, x - hi)
    if below.any() or above.any():
        violation = float(np.sum(below ** 2) + np.sum(above ** 2))
        return instance._value(np.clip(x, lo, hi)) + PENALTY_FACTOR * violation
    return instance._value(x)


def random_rotation(rng: np.random.Generator, d: int) -> np.ndarray:
    """Orthonormalize a standard normal matrix (QR); determinant sign is not fixed."""
    q, _ = np.linalg.qr(rng.standard_normal((d, d)))
    return q


def _draw_transform(fn: BenchmarkFunction, rng: np.random.Generator, d: int) -> np.ndarray:
    if fn.rotation == "axis":
        return np.diag(rng.choice([-1.0, 1.0], size=d))
    return random_rotation(rng, d)


def _draw_optimum(rng: np.random.Generator, d: int, lower: float, upper: float) -> np.ndarray:
    margin = OPTIMUM_MARGIN * (upper - lower)
    return rng.uniform(lower + margin, upper - margin, size=d)


def _check_dimension(dimension: int) -> int:
    if int(dimension) < 2:
        raise InvalidInputError(f"dimension must be >= 2, got {dimension}")
    return int(dimension)


def generate_instance(fid: int, dimension: int, instance_seed: int,
                      role: Role = Role.Train) -> ProblemInstance:
    """Seeded single-function instance: optimum uniform in the box interior,
    random orthogonal transform, offset uniform in [-100, 100]."""
    d = _check_dimension(dimension)
    fn = get_function(fid)
    rng = make_rng(instance_seed)
    x_opt = _draw_optimum(rng, d, DEFAULT_LOWER, DEFAULT_UPPER)
    rotation = _draw_transform(fn, rng, d)
    f_opt = float(rng.uniform(*FOPT_RANGE))
    return ProblemInstance(
        fids=(fn.fid,), dimension=d, x_opt=x_opt, f_opt=f_opt, rotations=(rotation,),
        instance_seed=int(instance_seed), role=Role(role), description=fn.description,
    )


def generate_mabbob_instance(fids: Sequence[int], weights: Sequence[float], dimension: int,
                             instance_seed: int, role: Role = Role.Train) -> ProblemInstance:
    """Affine combination sum_i w_i * scale_error(e_i(x)) with a shared optimum.

    Each component gets its own transform; the combined optimum value is 0.
    """
    d = _check_dimension(dimension)
    fids = tuple(int(f) for f in fids)
    weights = tuple(float(w) for w in weights)
    if len(fids) != len(weights) or len(fids) < 2:
        raise InvalidInputError("need at least two fids with one weight each")
    if any(w < 0 for w in weights) or abs(math.fsum(weights) - 1.0) > 1e-12:
        raise InvalidInputError(f"weights must be non-negative and sum to 1, got {weights}")
    fns = [get_function(f) for f in fids]
    rng = make_rng(instance_seed)
    x_opt = _draw_optimum(rng, d, DEFAULT_LOWER, DEFAULT_UPPER)
    rotations = tuple(_draw_transform(fn, rng, d) for fn in fns)
    return ProblemInstance(
        fids=fids, dimension=d, x_opt=x_opt, f_opt=0.0, rotations=rotations,
        instance_seed=int(instance_seed), weights=weights, role=Role(role),
        description=_affine_description(fns, weights),
    )


def _affine_description(fns: Iterable[BenchmarkFunction], weights: Sequence[float]) -> str:
    parts = [f"{w:.2f} x {fn.name}" for fn, w in zip(fns, weights) if w > 0]
    return "A weighted combination of log-scaled landscapes: " + ", ".join(parts) + "."


def save_instances(instances: Iterable[ProblemInstance], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for inst in instances:
            fh.write(inst.to_json() + "\n")


def load_instances(path) -> list[ProblemInstance]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    return [ProblemInstance.from_record(json.loads(line)) for line in lines if line.strip()]
