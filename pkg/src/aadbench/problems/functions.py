"""Raw benchmark functions in the style of the 24 noiseless BBOB functions.

Every raw function is written in already-transformed coordinates ``z`` and has
its global minimum 0 at ``z = 0``. Instance-level shifting, rotation and the
objective offset are applied in :mod:`aadbench.problems.instances`.

The formulas follow the BBOB definitions without the oscillation (T_osz) and
asymmetry (T_asy) transformations; the structured pieces that matter for the
landscape classes (conditioning, ridges, plateaus, multi-modality, funnels)
are kept.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np


class FunctionGroup(enum.Enum):
    Separable = 1
    LowModerateConditioning = 2
    HighConditioningUnimodal = 3
    MultimodalAdequateStructure = 4
    MultimodalWeakStructure = 5

    @property
    def title(self) -> str:
        return GROUP_TITLES[self]


GROUP_TITLES = {
    FunctionGroup.Separable: "Separable Functions",
    FunctionGroup.LowModerateConditioning: "Functions with low or moderate conditioning",
    FunctionGroup.HighConditioningUnimodal: "Functions with high conditioning and unimodal",
    FunctionGroup.MultimodalAdequateStructure: "Multi-modal functions with adequate global structure",
    FunctionGroup.MultimodalWeakStructure: "Multi-modal functions with weak global structure",
}


class UnknownFunctionError(KeyError):
    pass


@dataclass(frozen=True)
class BenchmarkFunction:
    fid: int
    name: str
    group: FunctionGroup
    description: str
    evaluator: Callable[[np.ndarray], float] = field(repr=False, compare=False)
    # "axis": random sign flips only (keeps separability); "full": random orthogonal matrix
    rotation: str = "full"

    def __call__(self, z: np.ndarray) -> float:
        return self.evaluator(z)


def _scales(d: int, base: float) -> np.ndarray:
    """base ** ((i-1)/(d-1)) for i = 1..d."""
    if d == 1:
        return np.ones(1)
    return base ** (np.arange(d) / (d - 1))


def sphere(z):
    return float(np.dot(z, z))


def ellipsoid(z):
    return float(np.dot(_scales(len(z), 1e6), z * z))


def rastrigin_core(z):
    d = len(z)
    return float(10.0 * (d - np.sum(np.cos(2.0 * np.pi * z))) + np.dot(z, z))


def rastrigin(z):
    return rastrigin_core(_scales(len(z), 10.0) ** 0.5 * z)


def bueche_rastrigin(z):
    s = _scales(len(z), 10.0) ** 0.5
    odd = (np.arange(len(z)) % 2 == 0) & (z > 0)
    s = np.where(odd, 10.0 * s, s)
    return rastrigin_core(s * z)


def linear_slope(z):
    # Linear descent toward the optimum along each axis, flat beyond it.
    return float(np.dot(_scales(len(z), 10.0), np.maximum(0.0, -z)))


def attractive_sector(z):
    s = np.where(z > 0, 100.0, 1.0)
    return float(np.sum((s * z) ** 2) ** 0.9)


def step_ellipsoid(z):
    zt = np.where(np.abs(z) > 0.5, np.floor(0.5 + z), np.floor(0.5 + 10.0 * z) / 10.0)
    return float(0.1 * max(abs(z[0]) / 1e4, np.dot(_scales(len(z), 100.0), zt * zt)))


def _rosenbrock_u(z):
    return max(1.0, math.sqrt(len(z)) / 8.0) * z + 1.0


def rosenbrock(z):
    u = _rosenbrock_u(z)
    return float(np.sum(100.0 * (u[:-1] ** 2 - u[1:]) ** 2 + (u[:-1] - 1.0) ** 2))


def discus(z):
    return float(1e6 * z[0] ** 2 + np.dot(z[1:], z[1:]))


def bent_cigar(z):
    return float(z[0] ** 2 + 1e6 * np.dot(z[1:], z[1:]))


def sharp_ridge(z):
    return float(z[0] ** 2 + 100.0 * math.sqrt(np.dot(z[1:], z[1:])))


def different_powers(z):
    d = len(z)
    exps = 2.0 + 4.0 * (np.arange(d) / (d - 1) if d > 1 else np.zeros(1))
    return float(math.sqrt(np.sum(np.abs(z) ** exps)))


_WEIERSTRASS_K = np.arange(12)
_WEIERSTRASS_A = 0.5 ** _WEIERSTRASS_K
_WEIERSTRASS_B = 3.0 ** _WEIERSTRASS_K
_WEIERSTRASS_F0 = float(np.sum(_WEIERSTRASS_A * np.cos(np.pi * _WEIERSTRASS_B)))


def weierstrass(z):
    zz = _scales(len(z), 0.01) ** 0.5 * z
    terms = _WEIERSTRASS_A[None, :] * np.cos(2.0 * np.pi * _WEIERSTRASS_B[None, :] * (zz[:, None] + 0.5))
    inner = np.sum(terms) / len(z) - _WEIERSTRASS_F0
    return float(10.0 * max(inner, 0.0) ** 3)


def _schaffers(z, conditioning):
    z = _scales(len(z), conditioning) ** 0.5 * z
    s = np.sqrt(z[:-1] ** 2 + z[1:] ** 2)
    rs = np.sqrt(s)
    return float((np.sum(rs + rs * np.sin(50.0 * s ** 0.2) ** 2) / (len(z) - 1)) ** 2)


def schaffers_f7(z):
    return _schaffers(z, 10.0)


def schaffers_f7_ill(z):
    return _schaffers(z, 1000.0)


def griewank_rosenbrock(z):
    u = _rosenbrock_u(z)
    s = 100.0 * (u[:-1] ** 2 - u[1:]) ** 2 + (u[:-1] - 1.0) ** 2
    return float(10.0 * np.sum(s / 4000.0 - np.cos(s)) / (len(z) - 1) + 10.0)


# argmax of v * sin(sqrt|v|) on [-500, 500]
_SCHWEFEL_V = 420.96874635998
_SCHWEFEL_G = _SCHWEFEL_V * math.sin(math.sqrt(_SCHWEFEL_V))


def schwefel(z):
    d = len(z)
    v = _SCHWEFEL_V + 100.0 * _scales(d, 10.0) ** 0.5 * z
    core = np.sum(_SCHWEFEL_G - v * np.sin(np.sqrt(np.abs(v)))) / (100.0 * d)
    pen = 100.0 * np.sum(np.maximum(0.0, np.abs(v) / 100.0 - 5.0) ** 2)
    return float(max(core, 0.0) + pen)


@lru_cache(maxsize=None)
def _gallagher_peaks(n_peaks: int, d: int, top_conditioning: float):
    """Deterministic peak layout for a Gallagher function of dimension ``d``.

    Peak 0 sits at the origin with height 10; the others are scattered in
    [-4.9, 4.9]^d with heights strictly below 10.
    """
    rng = np.random.Generator(np.random.PCG64(1000 * n_peaks + d))
    centers = rng.uniform(-4.9, 4.9, size=(n_peaks, d))
    centers[0] = 0.0
    heights = np.empty(n_peaks)
    heights[0] = 10.0
    heights[1:] = 1.1 + 8.0 * np.arange(n_peaks - 1) / (n_peaks - 2)
    alphas = np.empty(n_peaks)
    alphas[0] = top_conditioning
    alphas[1:] = rng.permutation(1000.0 ** (2.0 * np.arange(n_peaks - 1) / (n_peaks - 2)))
    diags = np.empty((n_peaks, d))
    for k in range(n_peaks):
        diags[k] = rng.permutation(_scales(d, alphas[k])) / alphas[k] ** 0.25
    return centers, heights, diags


def _gallagher(z, n_peaks, top_conditioning):
    centers, heights, diags = _gallagher_peaks(n_peaks, len(z), top_conditioning)
    diff = z[None, :] - centers
    quad = np.sum(diags * diff * diff, axis=1)
    values = heights * np.exp(-quad / (2.0 * len(z)))
    return float((10.0 - np.max(values)) ** 2)


def gallagher101(z):
    return _gallagher(z, 101, 1000.0)


def gallagher21(z):
    return _gallagher(z, 21, 1000.0 ** 2)


_KATSUURA_POW = 2.0 ** np.arange(1, 33)


def katsuura(z):
    d = len(z)
    zz = _scales(d, 100.0) ** 0.5 * z
    t = _KATSUURA_POW[None, :] * zz[:, None]
    inner = np.sum(np.abs(t - np.round(t)) / _KATSUURA_POW[None, :], axis=1)
    prod = np.prod((1.0 + np.arange(1, d + 1) * inner) ** (10.0 / d ** 1.2))
    return float(10.0 / d ** 2 * (prod - 1.0))


def lunacek(z):
    d = len(z)
    mu0 = 2.5
    s = 1.0 - 1.0 / (2.0 * math.sqrt(d + 20.0) - 8.2)
    mu1 = -math.sqrt((mu0 ** 2 - 1.0) / s)
    u = z + mu0
    funnel = min(float(np.sum((u - mu0) ** 2)), d + s * float(np.sum((u - mu1) ** 2)))
    zz = _scales(d, 100.0) ** 0.5 * z
    return funnel + 10.0 * (d - float(np.sum(np.cos(2.0 * np.pi * zz))))


_G = FunctionGroup
_TABLE = [
    (1, "Sphere Function", _G.Separable, sphere, "axis",
     "A smooth, perfectly symmetric quadratic bowl with a single optimum."),
    (2, "Separable Ellipsoidal Function", _G.Separable, ellipsoid, "axis",
     "A smooth unimodal quadratic with axis-aligned curvature; the condition number is about 1e6, "
     "so the scale of the variables differs by three orders of magnitude."),
    (3, "Separable Rastrigin Function", _G.Separable, rastrigin, "axis",
     "A highly multimodal separable function with roughly 10^D regularly placed local optima "
     "superimposed on a global quadratic trend."),
    (4, "Bueche-Rastrigin Function", _G.Separable, bueche_rastrigin, "axis",
     "A separable, highly multimodal Rastrigin variant with an asymmetric, skewed arrangement of local optima."),
    (5, "Linear Slope", _G.Separable, linear_slope, "axis",
     "A purely linear separable function; the objective decreases steadily in one direction per coordinate "
     "until a flat optimal region is reached. Search should move decisively along the slope."),
    (6, "Attractive Sector Function", _G.LowModerateConditioning, attractive_sector, "full",
     "A unimodal, highly asymmetric function where only one hypercone around the optimum has low values."),
    (7, "Step Ellipsoidal Function", _G.LowModerateConditioning, step_ellipsoid, "full",
     "A unimodal but non-separable function made of many plateaus; gradient information is absent on the plateaus."),
    (8, "Rosenbrock Function, original", _G.LowModerateConditioning, rosenbrock, "axis",
     "A curved narrow valley leading to the optimum; the valley direction changes along the path."),
    (9, "Rosenbrock Function, rotated", _G.LowModerateConditioning, rosenbrock, "full",
     "A rotated Rosenbrock valley; strong variable interactions along a bent ridge."),
    (10, "Ellipsoidal Function", _G.HighConditioningUnimodal, ellipsoid, "full",
     "A rotated, smooth, unimodal quadratic with condition number about 1e6."),
    (11, "Discus Function", _G.HighConditioningUnimodal, discus, "full",
     "A unimodal function where a single direction is 1000 times more sensitive than all others."),
    (12, "Bent Cigar Function", _G.HighConditioningUnimodal, bent_cigar, "full",
     "A unimodal function with a single insensitive direction; the ridge must be followed along one long axis."),
    (13, "Sharp Ridge Function", _G.HighConditioningUnimodal, sharp_ridge, "full",
     "A unimodal function with a non-differentiable sharp ridge; progress requires following the ridge "
     "while steps across it are heavily penalized."),
    (14, "Different Powers Function", _G.HighConditioningUnimodal, different_powers, "full",
     "A unimodal function whose sensitivity differs strongly per variable and increases near the optimum."),
    (15, "Rastrigin Function", _G.MultimodalAdequateStructure, rastrigin, "full",
     "A rotated, highly multimodal function with a regular grid of local optima on top of a global quadratic "
     "structure; large steps early help escape local basins."),
    (16, "Weierstrass Function", _G.MultimodalAdequateStructure, weierstrass, "full",
     "A highly rugged, repetitive, continuous but nowhere smooth landscape."),
    (17, "Schaffers F7 Function", _G.MultimodalAdequateStructure, schaffers_f7, "full",
     "A multimodal function whose ruggedness and amplitude of local oscillations grow with distance from the optimum."),
    (18, "Schaffers F7 Function, moderately ill-conditioned", _G.MultimodalAdequateStructure, schaffers_f7_ill, "full",
     "An ill-conditioned variant of the Schaffers F7 landscape."),
    (19, "Composite Griewank-Rosenbrock Function F8F2", _G.MultimodalAdequateStructure, griewank_rosenbrock, "full",
     "A multimodal composite of the Griewank and Rosenbrock functions with a global funnel."),
    (20, "Schwefel Function", _G.MultimodalWeakStructure, schwefel, "full",
     "A deceptive multimodal function whose best local optima lie far apart, close to the corners of the domain."),
    (21, "Gallagher's Gaussian 101-me Peaks Function", _G.MultimodalWeakStructure, gallagher101, "full",
     "A landscape of 101 randomly placed Gaussian peaks of different heights and shapes with no global structure."),
    (22, "Gallagher's Gaussian 21-hi Peaks Function", _G.MultimodalWeakStructure, gallagher21, "full",
     "21 randomly placed, highly conditioned Gaussian peaks; the basins are narrow and there is no exploitable trend."),
    (23, "Katsuura Function", _G.MultimodalWeakStructure, katsuura, "full",
     "An extremely rugged, highly repetitive landscape with more than 10^D local optima."),
    (24, "Lunacek bi-Rastrigin Function", _G.MultimodalWeakStructure, lunacek, "full",
     "A Rastrigin landscape over two funnels; the deceptive larger funnel does not contain the global optimum."),
]

REGISTRY: dict[int, BenchmarkFunction] = {
    fid: BenchmarkFunction(fid, name, group, desc, fn, rot)
    for fid, name, group, fn, rot, desc in _TABLE
}


def get_function(fid: int) -> BenchmarkFunction:
    try:
        return REGISTRY[int(fid)]
    except (KeyError, ValueError, TypeError):
        raise UnknownFunctionError(f"unknown function id {fid!r}") from None


def functions_in_group(group: FunctionGroup | int) -> list[BenchmarkFunction]:
    group = FunctionGroup(group)
    return [f for f in REGISTRY.values() if f.group is group]
