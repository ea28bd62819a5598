"""Parametric solver configurations for the built-in families."""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field


class Family(str, enum.Enum):
    RandomSearch = "RandomSearch"
    OnePlusOneES = "OnePlusOneES"
    DifferentialEvolution = "DifferentialEvolution"
    CmaEs = "CmaEs"


class ConfigError(ValueError):
    pass


# name -> (kind, low, high, default); bounds are inclusive
PARAM_SPACE: dict[Family, dict[str, tuple[str, float, float, float]]] = {
    Family.RandomSearch: {},
    Family.OnePlusOneES: {
        "sigma0": ("real", 1e-3, 1.0, 0.2),
        "success_factor": ("real", 1.01, 4.0, 1.5),
    },
    Family.DifferentialEvolution: {
        "population_size": ("int", 4, 500, 20),
        "F": ("real", 0.05, 2.0, 0.5),
        "CR": ("real", 0.0, 1.0, 0.9),
    },
    Family.CmaEs: {
        "sigma0": ("real", 1e-3, 1.0, 0.2),
        "popsize": ("int", 4, 500, 0),  # 0 is "use 4 + floor(3 ln d)"
    },
}


@dataclass(frozen=True)
class SolverConfig:
    """A built-in family plus a subset of its hyperparameters.

    Missing hyperparameters take the family default. Step sizes are given
    as a fraction of the box width.
    """

    family: Family
    hyperparameters: dict = field(default_factory=dict)

    def __post_init__(self):
        try:
            fam = Family(self.family)
        except ValueError:
            raise ConfigError(f"unknown solver family {self.family!r}") from None
        object.__setattr__(self, "family", fam)
        space = PARAM_SPACE[fam]
        clean = {}
        for name, value in dict(self.hyperparameters).items():
            if name not in space:
                raise ConfigError(f"{fam.value} has no hyperparameter {name!r}")
            kind, lo, hi, _ = space[name]
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigError(f"{name} must be numeric, got {value!r}")
            if kind == "int":
                if float(value) != int(value):
                    raise ConfigError(f"{name} must be an integer, got {value!r}")
                value = int(value)
                if value == 0 and name == "popsize":
                    clean[name] = 0
                    continue
            else:
                value = float(value)
            if not lo <= value <= hi:
                raise ConfigError(f"{name}={value} outside [{lo}, {hi}]")
            clean[name] = value
        object.__setattr__(self, "hyperparameters", clean)

    def get(self, name: str):
        if name in self.hyperparameters:
            return self.hyperparameters[name]
        return PARAM_SPACE[self.family][name][3]

    def to_dict(self) -> dict:
        return {"family": self.family.value, "hyperparameters": dict(sorted(self.hyperparameters.items()))}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_dict(cls, data: dict) -> "SolverConfig":
        if not isinstance(data, dict) or "family" not in data:
            raise ConfigError("solver config needs a 'family' field")
        return cls(data["family"], dict(data.get("hyperparameters") or {}))

    @classmethod
    def from_json(cls, text: str) -> "SolverConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"not a JSON solver config: {exc}") from None
        return cls.from_dict(data)

    def __eq__(self, other):
        return isinstance(other, SolverConfig) and self.to_json() == other.to_json()

    def __hash__(self):
        return hash(self.to_json())
