"""The PC algorithm with tiered prior knowledge.

Pipeline: :func:`learn_skeleton` (adjacency search with separating sets),
:func:`apply_tiers` (temporal orientation right after the skeleton phase),
:func:`orient_colliders`, then :func:`apply_orientation_rules` to closure.
:func:`pc` chains the four steps.
"""

from __future__ import annotations

import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Mapping, NamedTuple

from .citest import CorrelationMatrix, FisherZTest, correlation_matrix
from .exceptions import CausewayError, KnowledgeConflictError, ValidationError
from .graph import (
    OrientationLog,
    PartialDAG,
    SepsetMap,
    colliders,
    d_separated,
    meek_closure,
    unshielded_triples,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PriorKnowledge:
    """Temporal tiers plus optional required / forbidden directed pairs.

    Nodes missing from ``tiers`` are unconstrained. An edge may never point
    from a higher tier to a lower one.
    """

    tiers: Mapping[int, int] = field(default_factory=dict)
    required: frozenset = frozenset()
    forbidden: frozenset = frozenset()

    def __post_init__(self):
        tiers = {int(k): int(v) for k, v in dict(self.tiers).items()}
        if any(v < 0 for v in tiers.values()):
            raise ValidationError("tier ranks must be non-negative")
        required = frozenset((int(a), int(b)) for a, b in self.required)
        forbidden = frozenset((int(a), int(b)) for a, b in self.forbidden)
        if required & forbidden:
            raise ValidationError(f"pairs both required and forbidden: {sorted(required & forbidden)}")
        for a, b in required:
            if a in tiers and b in tiers and tiers[a] > tiers[b]:
                raise ValidationError(f"required edge {a}->{b} points to an earlier tier")
        object.__setattr__(self, "tiers", tiers)
        object.__setattr__(self, "required", required)
        object.__setattr__(self, "forbidden", forbidden)

    @classmethod
    def from_names(cls, tiers_by_name: Mapping[str, int], labels, required=(), forbidden=()):
        index = {name: k for k, name in enumerate(labels)}
        unknown = [name for name in tiers_by_name if name not in index]
        if unknown:
            raise ValidationError(f"tiers given for unknown columns: {unknown}")

        def pairs(ps):
            return frozenset((index[a], index[b]) for a, b in ps)

        return cls({index[k]: v for k, v in tiers_by_name.items()}, pairs(required), pairs(forbidden))

    def is_empty(self) -> bool:
        return not (self.tiers or self.required or self.forbidden)

    def allows(self, tail: int, head: int) -> bool:
        """Whether ``tail -> head`` is compatible with the knowledge."""
        if (tail, head) in self.forbidden or (head, tail) in self.required:
            return False
        t, h = self.tiers.get(tail), self.tiers.get(head)
        return t is None or h is None or t <= h

    def required_direction(self, i: int, j: int) -> tuple[int, int] | None:
        """The orientation the knowledge forces on edge ``i -- j``, if any."""
        if (i, j) in self.required:
            return i, j
        if (j, i) in self.required:
            return j, i
        ti, tj = self.tiers.get(i), self.tiers.get(j)
        if ti is not None and tj is not None and ti != tj:
            return (i, j) if ti < tj else (j, i)
        if (i, j) in self.forbidden and (j, i) not in self.forbidden:
            return j, i
        if (j, i) in self.forbidden and (i, j) not in self.forbidden:
            return i, j
        return None

    def subset(self, keep) -> "PriorKnowledge":
        """Knowledge restricted to the nodes ``keep`` and renumbered ``0..len(keep)-1``."""
        index = {old: new for new, old in enumerate(keep)}
        return PriorKnowledge(
            {index[v]: t for v, t in self.tiers.items() if v in index},
            frozenset((index[a], index[b]) for a, b in self.required if a in index and b in index),
            frozenset((index[a], index[b]) for a, b in self.forbidden if a in index and b in index),
        )


NO_KNOWLEDGE = PriorKnowledge()


@dataclass(frozen=True)
class PcConfig:
    """Parameters of a PC run.

    ``depth=None`` means unbounded. ``paper_strict`` draws conditioning sets
    from the neighbors of the second endpoint only; ``stable`` switches to
    the level-parallel variant where every test at a given size sees the
    adjacencies from the start of that level.
    """

    alpha: float = 0.05
    soe: float = 0.0
    depth: int | None = None
    paper_strict: bool = False
    stable: bool = False
    threads: int = 1

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValidationError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.soe < 0:
            raise ValidationError("soe must be non-negative")
        if self.depth is not None and self.depth < 0:
            raise ValidationError("depth must be non-negative")
        if self.threads < 1:
            raise ValidationError("threads must be positive")


class DSeparationOracle:
    """Perfect CI test that answers queries by d-separation in a known DAG."""

    def __init__(self, dag: PartialDAG):
        self.dag = dag
        self.calls = 0

    @property
    def n_nodes(self) -> int:
        return self.dag.n_nodes

    def __call__(self, i: int, j: int, s=()) -> bool:
        self.calls += 1
        return d_separated(self.dag, i, j, s)


class CiFailure(NamedTuple):
    pair: tuple[int, int]
    condset: tuple[int, ...]
    error: str


class Skeleton(NamedTuple):
    graph: PartialDAG
    sepsets: SepsetMap
    failures: list


class PcResult(NamedTuple):
    graph: PartialDAG
    sepsets: SepsetMap
    log: OrientationLog
    failures: list


CiTest = Callable[[int, int, tuple], object]


def _is_independent(result) -> bool:
    return bool(getattr(result, "independent", result))


def _resolve_test(source, cfg: PcConfig):
    """Turn data, a correlation matrix or a callable into ``(test, n, labels)``."""
    if isinstance(source, CorrelationMatrix):
        return FisherZTest(source, cfg.alpha, cfg.soe), source.dim, source.labels
    if callable(source) and hasattr(source, "n_nodes"):
        labels = getattr(getattr(source, "dag", None), "labels", None)
        return source, source.n_nodes, labels
    corr = correlation_matrix(source)
    return FisherZTest(corr, cfg.alpha, cfg.soe), corr.dim, corr.labels


def _search_edge(test, x, y, d, adj, paper_strict, failures):
    """Try conditioning sets of size ``d`` for edge ``x -- y``; return the first separating one."""
    pools = [adj[y] - {x}] if paper_strict else [adj[x] - {y}, adj[y] - {x}]
    tried = set()
    for pool in pools:
        if len(pool) < d:
            continue
        for cs in itertools.combinations(sorted(pool), d):
            if cs in tried:
                continue
            tried.add(cs)
            try:
                result = test(x, y, cs)
            except CausewayError as exc:
                failures.append(CiFailure((x, y), cs, str(exc)))
                continue
            if getattr(result, "flagged", False):
                failures.append(CiFailure((x, y), cs, "singular correlation submatrix"))
            if _is_independent(result):
                return cs
    return None


def _has_candidates(adj, x, y, d, paper_strict) -> bool:
    if paper_strict:
        return len(adj[y]) - 1 >= d
    return len(adj[x]) - 1 >= d or len(adj[y]) - 1 >= d


def learn_skeleton(source, cfg: PcConfig | None = None) -> Skeleton:
    """Adjacency search starting from the complete undirected graph.

    For conditioning-set sizes ``d = 0, 1, ...`` every remaining edge
    ``x -- y`` (``x < y``, lexicographic) is tested against subsets of the
    current neighbors; the first independence removes the edge and records
    its separating set. Tests that raise are recorded in ``failures`` and
    treated as dependent.

    ``source`` is a :class:`CorrelationMatrix`, a data matrix / Dataset, or
    a callable CI test exposing ``n_nodes`` (e.g. :class:`DSeparationOracle`).
    """
    cfg = cfg or PcConfig()
    test, n, labels = _resolve_test(source, cfg)
    if n < 1:
        raise ValidationError("need at least one variable")
    g = PartialDAG.complete(n, labels)
    sepsets = SepsetMap()
    failures: list[CiFailure] = []
    pairs = list(itertools.combinations(range(n), 2))

    d = 0
    while cfg.depth is None or d <= cfg.depth:
        adj = g._adj
        live = [(x, y) for x, y in pairs if g.is_adjacent(x, y)]
        if not any(_has_candidates(adj, x, y, d, cfg.paper_strict) for x, y in live):
            break
        if cfg.stable:
            snapshot = [set(s) for s in adj]

            def run(edge, snapshot=snapshot, d=d):
                local: list[CiFailure] = []
                found = _search_edge(test, edge[0], edge[1], d, snapshot, cfg.paper_strict, local)
                return found, local

            if cfg.threads > 1:
                with ThreadPoolExecutor(cfg.threads) as pool:
                    results = list(pool.map(run, live))
            else:
                results = [run(e) for e in live]
            for (x, y), (found, local) in zip(live, results):
                failures.extend(local)
                if found is not None:
                    g.remove_edge(x, y)
                    sepsets.set(x, y, found)
        else:
            for x, y in live:
                if not g.is_adjacent(x, y):
                    continue
                found = _search_edge(test, x, y, d, adj, cfg.paper_strict, failures)
                if found is not None:
                    g.remove_edge(x, y)
                    sepsets.set(x, y, found)
        d += 1
    return Skeleton(g, sepsets, failures)


def apply_tiers(g: PartialDAG, knowledge: PriorKnowledge | None = None,
                log: OrientationLog | None = None) -> PartialDAG:
    """Orient every undirected edge the prior knowledge decides.

    Cross-tier edges point from the earlier tier to the later one; required
    and forbidden pairs are enforced. Returns a new graph.

    Raises
    ------
    KnowledgeConflictError
        If an already directed edge contradicts the knowledge, or the forced
        orientations would close a directed cycle.
    """
    knowledge = knowledge or NO_KNOWLEDGE
    out = g.copy()
    if knowledge.is_empty():
        return out
    for tail, head in sorted(out.directed_edges()):
        if not knowledge.allows(tail, head):
            raise KnowledgeConflictError(f"directed edge {tail}->{head} contradicts prior knowledge")
    for i, j in sorted(out.undirected_edges()):
        direction = knowledge.required_direction(i, j)
        if direction is None:
            continue
        tail, head = direction
        if not knowledge.allows(tail, head):
            if log is not None:
                log.add("skipped", "tiers", (i, j), "both orientations forbidden")
            continue
        if not out.can_orient(tail, head):
            raise KnowledgeConflictError(f"orienting {tail}->{head} from prior knowledge creates a cycle")
        out.orient(tail, head)
        if log is not None:
            log.add("applied", "tiers", (tail, head), f"{tail}->{head}")
    for tail, head in sorted(knowledge.required):
        if tail < out.n_nodes and head < out.n_nodes and not out.is_adjacent(tail, head):
            if log is not None:
                log.add("skipped", "required", (tail, head), "required edge absent from skeleton")
    return out


def orient_colliders(g: PartialDAG, sepsets: SepsetMap, knowledge: PriorKnowledge | None = None,
                     log: OrientationLog | None = None) -> PartialDAG:
    """Orient ``x -> z <- y`` for unshielded triples with ``z`` outside sepset(x, y).

    Triples are visited in lexicographic order and the first one to touch an
    edge wins. A collider that would reverse a directed edge, violate the
    knowledge or close a cycle is skipped as a whole and logged.
    """
    knowledge = knowledge or NO_KNOWLEDGE
    out = g.copy()
    for x, z, y in unshielded_triples(g):
        sep = sepsets.get(x, y)
        if sep is None:
            if log is not None:
                log.add("skipped", "collider", (x, z, y), "no separating set recorded")
            continue
        if z in sep:
            continue
        reason = None
        for arm in (x, y):
            if out.is_directed(z, arm):
                reason = f"would reverse {z}->{arm}"
            elif not knowledge.allows(arm, z):
                reason = f"{arm}->{z} forbidden by prior knowledge"
            if reason:
                break
        if reason is None:
            trial = out.copy()
            for arm in (x, y):
                if trial.is_directed(arm, z):
                    continue
                if not trial.can_orient(arm, z):
                    reason = "would create a directed cycle"
                    break
                trial.orient(arm, z)
            else:
                out = trial
        if reason is not None:
            logger.debug("collider %s skipped: %s", (x, z, y), reason)
            if log is not None:
                log.add("skipped", "collider", (x, z, y), reason)
        elif log is not None:
            log.add("applied", "collider", (x, z, y), f"{x}->{z}<-{y}")
    return out


def apply_orientation_rules(g: PartialDAG, knowledge: PriorKnowledge | None = None,
                            log: OrientationLog | None = None) -> PartialDAG:
    """Close ``g`` under the four orientation rules; returns a new graph."""
    knowledge = knowledge or NO_KNOWLEDGE
    allowed = None if knowledge.is_empty() else knowledge.allows
    return meek_closure(g.copy(), allowed=allowed, log=log)


def pc(data, cfg: PcConfig | None = None, knowledge: PriorKnowledge | None = None) -> PcResult:
    """Run PC end to end.

    Order: skeleton search, tier orientation, collider orientation,
    orientation rules. Deterministic for fixed inputs.
    """
    cfg = cfg or PcConfig()
    knowledge = knowledge or NO_KNOWLEDGE
    log = OrientationLog()
    skel = learn_skeleton(data, cfg)
    for f in skel.failures:
        log.add("skipped", "ci-test", (*f.pair, *f.condset), f"test failed, edge kept: {f.error}")
    g = apply_tiers(skel.graph, knowledge, log)
    g = orient_colliders(g, skel.sepsets, knowledge, log)
    g = apply_orientation_rules(g, knowledge, log)
    return PcResult(g, skel.sepsets, log, skel.failures)


def maximal_pattern(dag: PartialDAG, knowledge: PriorKnowledge | None = None) -> PartialDAG:
    """Maximally oriented pattern of a DAG's equivalence class under ``knowledge``.

    Keeps the skeleton and the unshielded colliders, orients what the
    knowledge decides, and closes under the orientation rules.
    """
    if not dag.is_fully_directed():
        raise ValidationError("maximal_pattern expects a fully directed graph")
    g = PartialDAG.from_edges(dag.n_nodes, undirected=sorted(dag.skeleton()), labels=dag.labels)
    for x, z, y in sorted(colliders(dag)):
        g.orient(x, z)
        g.orient(y, z)
    g = apply_tiers(g, knowledge)
    return apply_orientation_rules(g, knowledge)
