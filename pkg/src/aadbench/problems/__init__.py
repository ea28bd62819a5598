from .functions import (
    GROUP_TITLES,
    REGISTRY,
    BenchmarkFunction,
    FunctionGroup,
    UnknownFunctionError,
    functions_in_group,
    get_function,
)
from .instances import (
    InvalidInputError,
    ProblemInstance,
    Role,
    evaluate,
    generate_instance,
    generate_mabbob_instance,
    load_instances,
    random_rotation,
    save_instances,
    scale_error,
)
from .suites import SuiteKind, SuiteSpec, describe, instance_seed, suite_split

__all__ = [
    "GROUP_TITLES", "REGISTRY", "BenchmarkFunction", "FunctionGroup", "UnknownFunctionError",
    "functions_in_group", "get_function", "InvalidInputError", "ProblemInstance", "Role",
    "evaluate", "generate_instance", "generate_mabbob_instance", "load_instances",
    "random_rotation", "save_instances", "scale_error", "SuiteKind", "SuiteSpec", "describe",
    "instance_seed", "suite_split",
]
