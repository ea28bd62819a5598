"""Code evolution graphs over lineages and mean/std report tables.

CSV layouts
-----------
``ceg_<run>_nodes.csv``: ``id,x,y,fitness,out_degree`` (``y`` is the chosen feature).
``ceg_<run>_edges.csv``: ``parent,child``.
``report.csv``: ``problem,method,n,mean,std,bold,p_value,viable``.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, fields
from typing import Mapping, Sequence

import numpy as np

from .candidates import Candidate, Status
from .metrics import welch_t_test

# numbers first so "1e-3" is one token, then identifier runs, then any other glyph
_TOKEN = re.compile(r"\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?|[^\W\d]\w*|[^\w\s]")
_IDENT = re.compile(r"[^\W\d]\w*")
_COMMENT = re.compile(r"(#|//).*")


class AnalysisConfigError(ValueError):
    pass


@dataclass(frozen=True)
class StaticFeatures:
    token_count: int
    line_count: int
    char_count: int
    distinct_identifier_count: int
    comment_stripped_token_count: int


FEATURE_NAMES = tuple(f.name for f in fields(StaticFeatures))


def _tokens(text: str) -> list[str]:
    return _TOKEN.findall(text)


def static_features(payload: str) -> StaticFeatures:
    """Language-agnostic lexical counts of a candidate payload."""
    text = payload or ""
    toks = _tokens(text)
    idents = {t for t in toks if _IDENT.fullmatch(t)}
    stripped = _tokens(_COMMENT.sub("", text))
    return StaticFeatures(
        token_count=len(toks),
        line_count=len(text.splitlines()),
        char_count=len(text),
        distinct_identifier_count=len(idents),
        comment_stripped_token_count=len(stripped),
    )


# -- code evolution graph ---------------------------------------------------

@dataclass(frozen=True)
class CegNode:
    id: int
    x: int
    y: int
    fitness: float
    out_degree: int


@dataclass
class CodeGraph:
    feature: str
    nodes: list[CegNode]
    edges: list[tuple[int, int]]
    excluded: list[int] = field(default_factory=list)

    def node(self, cid: int) -> CegNode:
        for n in self.nodes:
            if n.id == cid:
                return n
        raise KeyError(cid)

    def out_degree(self, cid: int) -> int:
        return self.node(cid).out_degree

    def to_dot(self, name: str = "ceg") -> str:
        fits = [n.fitness for n in self.nodes]
        lo, hi = (min(fits), max(fits)) if fits else (0.0, 1.0)
        lines = [f'digraph "{name}" {{', f'  graph [feature="{self.feature}"];',
                 "  node [shape=circle, style=filled];"]
        for n in self.nodes:
            t = 0.0 if hi <= lo else (n.fitness - lo) / (hi - lo)
            width = 0.2 + 0.1 * math.sqrt(n.out_degree)
            lines.append(f'  {n.id} [x={n.x}, y={n.y}, fitness={n.fitness!r}, feature={n.y}, '
                         f'out_degree={n.out_degree}, width={width:.3f}, fillcolor="{_ramp(t)}", '
                         f'pos="{n.x},{n.y}"];')
        for p, c in self.edges:
            lines.append(f"  {p} -> {c};")
        if self.excluded:
            lines.append(f"  // excluded (failed): {' '.join(map(str, self.excluded))}")
        lines.append("}")
        return "\n".join(lines) + "\n"

    def nodes_csv(self) -> str:
        rows = ["id,x,y,fitness,out_degree"]
        rows += [f"{n.id},{n.x},{n.y},{n.fitness!r},{n.out_degree}" for n in self.nodes]
        return "\n".join(rows) + "\n"

    def edges_csv(self) -> str:
        return "\n".join(["parent,child"] + [f"{p},{c}" for p, c in self.edges]) + "\n"


def _ramp(t: float) -> str:
    # dark blue (poor) to yellow (good)
    a, b = np.array([0x30, 0x1A, 0x80]), np.array([0xF5, 0xD0, 0x20])
    r, g, bl = np.round(a + (b - a) * min(max(t, 0.0), 1.0)).astype(int)
    return f"#{r:02x}{g:02x}{bl:02x}"


def _failed(c: Candidate) -> bool:
    return c.status is Status.Failed or c.fitness is None or c.fitness < 0


def build_ceg(lineage, feature_name: str = "token_count") -> CodeGraph:
    """Graph of a lineage with failed candidates set aside in ``excluded``."""
    if feature_name not in FEATURE_NAMES:
        raise AnalysisConfigError(f"unknown feature {feature_name!r}; choose one of {', '.join(FEATURE_NAMES)}")
    cands = list(getattr(lineage, "candidates", lineage))
    kept = [c for c in cands if not _failed(c)]
    kept_ids = {c.id for c in kept}
    excluded = [c.id for c in cands if c.id not in kept_ids]
    edges = [(p, c.id) for c in kept for p in c.parent_ids if p in kept_ids]
    degree = {cid: 0 for cid in kept_ids}
    for p, _ in edges:
        degree[p] += 1
    index = {c.id: i for i, c in enumerate(cands, 1)}
    nodes = [CegNode(c.id, index[c.id], getattr(static_features(c.payload), feature_name), float(c.fitness),
                     degree[c.id]) for c in kept]
    return CodeGraph(feature_name, nodes, edges, excluded)


# -- report -----------------------------------------------------------------

ALPHA = 0.05


@dataclass(frozen=True)
class ReportCell:
    problem: str
    method: str
    n: int
    mean: float
    std: float
    bold: bool = False
    p_value: float | None = None

    @property
    def viable(self) -> bool:
        return self.n > 0

    def text(self) -> str:
        if not self.viable:
            return "non-viable"
        s = f"{self.mean:.2f} ± {self.std:.2f}"
        if self.bold:
            s = f"**{s}** (p={self.p_value:.3g})"
        return s


@dataclass
class Report:
    problems: list[str]
    methods: list[str]
    cells: dict[tuple[str, str], ReportCell]
    alpha: float = ALPHA

    def cell(self, problem: str, method: str) -> ReportCell:
        return self.cells[(problem, method)]

    def bold_cells(self) -> list[ReportCell]:
        return [c for c in self.cells.values() if c.bold]

    def to_csv(self) -> str:
        rows = ["problem,method,n,mean,std,bold,p_value,viable"]
        for p in self.problems:
            for m in self.methods:
                c = self.cells.get((p, m))
                if c is None:
                    continue
                pv = "" if c.p_value is None else repr(c.p_value)
                mean = repr(c.mean) if c.viable else ""
                std = repr(c.std) if c.viable else ""
                rows.append(f"{_csv(p)},{_csv(m)},{c.n},{mean},{std},{int(c.bold)},{pv},{int(c.viable)}")
        return "\n".join(rows) + "\n"

    def to_text(self) -> str:
        header = ["problem"] + self.methods
        body = [[p] + [self.cells[(p, m)].text() if (p, m) in self.cells else "-" for m in self.methods]
                for p in self.problems]
        widths = [max(len(r[i]) for r in [header] + body) for i in range(len(header))]
        fmt = lambda r: " | ".join(v.ljust(w) for v, w in zip(r, widths)).rstrip()
        lines = [fmt(header), "-+-".join("-" * w for w in widths)] + [fmt(r) for r in body]
        lines.append(f"mean ± std of AOCC over runs; bold (**) = highest mean with Welch p < {self.alpha} "
                     "against every other method, p is the largest pairwise value")
        return "\n".join(lines) + "\n"


def _csv(s: str) -> str:
    return f'"{s}"' if ("," in s or '"' in s) else s


def render_report(results: Mapping[str, Mapping[str, Sequence[float]]], alpha: float = ALPHA) -> Report:
    """Mean ± std per (problem, method) with the significance boldface rule.

    ``results[problem][method]`` holds one AOCC per run (empty = non-viable).
    A problem's best mean is bold iff it is strictly greater than every other
    mean and its Welch p-value against each other method is below ``alpha``.
    """
    problems = list(results)
    methods: list[str] = []
    for p in problems:
        methods += [m for m in results[p] if m not in methods]
    cells = {}
    for p in problems:
        stats = {}
        for m, vals in results[p].items():
            v = np.asarray(vals, dtype=float)
            stats[m] = v
            std = float(v.std(ddof=1)) if len(v) > 1 else 0.0
            cells[(p, m)] = ReportCell(p, m, len(v), float(v.mean()) if len(v) else math.nan, std)
        viable = [m for m, v in stats.items() if len(v) > 0]
        if len(viable) < 2:
            continue
        means = {m: float(stats[m].mean()) for m in viable}
        best = max(viable, key=lambda m: means[m])
        if any(means[m] >= means[best] for m in viable if m != best):
            continue
        others = [m for m in viable if m != best]
        if len(stats[best]) < 2 or any(len(stats[m]) < 2 for m in others):
            continue
        p_max = max(welch_t_test(stats[best], stats[m]) for m in others)
        if p_max < alpha:
            c = cells[(p, best)]
            cells[(p, best)] = ReportCell(p, best, c.n, c.mean, c.std, True, p_max)
    return Report(problems, methods, cells, alpha)


__all__ = [
    "AnalysisConfigError", "StaticFeatures", "FEATURE_NAMES", "static_features", "CegNode", "CodeGraph",
    "build_ceg", "ReportCell", "Report", "render_report",
]
