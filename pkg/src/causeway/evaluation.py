"""Precision / recall of learned graphs and (alpha, soe) parameter sweeps."""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np

from .citest import correlation_matrix
from .exceptions import ValidationError
from .graph import PartialDAG
from .pc import PcConfig, PriorKnowledge, maximal_pattern, pc
from .synth import GaussianBN, sample

METRICS = ("undirected_precision", "undirected_recall", "directed_precision", "directed_recall")


def _ratio(num: int, den: int) -> float | None:
    return num / den if den > 0 else None


@dataclass(frozen=True)
class EvalReport:
    """The four metrics; ``None`` marks a zero denominator."""

    undirected_precision: float | None
    undirected_recall: float | None
    directed_precision: float | None
    directed_recall: float | None
    learned_edges: int
    true_edges: int
    learned_oriented: int
    true_oriented: int
    matched_undirected: int
    matched_oriented: int

    def metric(self, name: str) -> float | None:
        return getattr(self, name)

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def score_graphs(learned: PartialDAG, truth: PartialDAG) -> EvalReport:
    """Compare skeletons, then directed edges.

    Only edges directed in the learned graph enter directed precision, and
    only edges directed in the truth enter directed recall; an oriented edge
    matches when the truth has the same edge with the same direction.
    """
    if learned.n_nodes != truth.n_nodes:
        raise ValidationError(f"node sets differ: {learned.n_nodes} vs {truth.n_nodes} nodes")
    ls, ts = learned.skeleton(), truth.skeleton()
    ld, td = learned.directed_edges(), truth.directed_edges()
    mu, mo = len(ls & ts), len(ld & td)
    return EvalReport(
        _ratio(mu, len(ls)), _ratio(mu, len(ts)), _ratio(mo, len(ld)), _ratio(mo, len(td)),
        len(ls), len(ts), len(ld), len(td), mu, mo,
    )


def truth_pattern(bn_or_dag, knowledge: PriorKnowledge | None = None, raw: bool = False) -> PartialDAG:
    """Scoring target: the maximally oriented pattern, or the DAG itself if ``raw``."""
    dag = bn_or_dag.dag if isinstance(bn_or_dag, GaussianBN) else bn_or_dag
    return dag.copy() if raw else maximal_pattern(dag, knowledge)


@dataclass
class SweepCell:
    alpha: float
    soe: float
    reports: list[EvalReport] = field(default_factory=list)
    edge_counts: list[int] = field(default_factory=list)

    def summary(self, metric: str) -> tuple[float, float, int]:
        """``(mean, stddev, n_defined)`` over replicates where the metric is defined."""
        vals = [r.metric(metric) for r in self.reports]
        vals = [v for v in vals if v is not None]
        if not vals:
            return math.nan, math.nan, 0
        arr = np.asarray(vals)
        sd = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
        return float(arr.mean()), sd, arr.size

    def mean(self, metric: str) -> float:
        return self.summary(metric)[0]


@dataclass
class SweepResult:
    cells: list[SweepCell]
    seeds: list[int]

    def cell(self, alpha: float, soe: float) -> SweepCell:
        for c in self.cells:
            if c.alpha == alpha and c.soe == soe:
                return c
        raise KeyError((alpha, soe))

    def to_tsv(self) -> str:
        buf = io.StringIO()
        buf.write("alpha\tsoe\tmetric\tmean\tstddev\treplicates_defined\n")
        for c in self.cells:
            for m in METRICS:
                mean, sd, k = c.summary(m)
                fmt = (lambda v: "NA" if math.isnan(v) else repr(v))
                buf.write(f"{c.alpha!r}\t{c.soe!r}\t{m}\t{fmt(mean)}\t{fmt(sd)}\t{k}\n")
        return buf.getvalue()


def sweep(bn: GaussianBN, truth: PartialDAG, replicates: int = 10, n: int = 50000,
          alphas=(0.001, 0.01, 0.05, 0.1), soes=(0.0, 0.05, 0.1),
          knowledge: PriorKnowledge | None = None, seeds=None, depth: int | None = None,
          paper_strict: bool = False) -> SweepResult:
    """Sample ``replicates`` datasets and score PC at every (alpha, soe).

    Replicate ``r`` uses ``seeds[r]`` (default ``r``); every grid cell sees
    the same datasets. Cells average only the replicates where a metric is
    defined.
    """
    if replicates < 1:
        raise ValidationError("replicates must be at least 1")
    seeds = list(range(replicates)) if seeds is None else list(seeds)
    if len(seeds) != replicates:
        raise ValidationError("need one seed per replicate")
    cells = [SweepCell(a, s) for a in alphas for s in soes]
    for seed in seeds:
        corr = correlation_matrix(sample(bn, n, seed))
        for c in cells:
            cfg = PcConfig(alpha=c.alpha, soe=c.soe, depth=depth, paper_strict=paper_strict)
            learned = pc(corr, cfg, knowledge).graph
            c.reports.append(score_graphs(learned, truth))
            c.edge_counts.append(learned.n_edges)
    return SweepResult(cells, seeds)
