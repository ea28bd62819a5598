from .builtin import SOLVERS, CmaEs, ProtocolError, Session, Solver, make_solver
from .config import PARAM_SPACE, ConfigError, Family, SolverConfig
from .external import ExternalSession, InstantiationError, reference_script, reference_source
from .model import Candidate, Status, builtin_candidate, instantiate

__all__ = [
    "SOLVERS", "CmaEs", "ProtocolError", "Session", "Solver", "make_solver", "PARAM_SPACE",
    "ConfigError", "Family", "SolverConfig", "ExternalSession", "InstantiationError",
    "reference_script", "reference_source", "Candidate", "Status", "builtin_candidate",
    "instantiate",
]
