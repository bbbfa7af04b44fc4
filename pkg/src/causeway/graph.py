"""Mixed graphs over variable indices.

A :class:`PartialDAG` holds undirected (``i -- j``) and directed
(``i -> j``) edges between nodes ``0..n-1``. Node identity is the column
index; labels are carried along for export only.

Besides the structural queries used by PC (neighbors, unshielded triples,
colliders) the module provides d-separation for fully directed graphs,
closure under the four orientation rules, and sampling of a member of the
equivalence class described by a pattern.
"""

from __future__ import annotations

import enum
import itertools
from collections import deque
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator

import numpy as np

from .exceptions import CycleError, ExtensionError, PreconditionError, ValidationError


class Mark(enum.Enum):
    UNDIRECTED = "undirected"
    DIRECTED = "directed"


def _pair(i: int, j: int) -> tuple[int, int]:
    return (i, j) if i < j else (j, i)


class PartialDAG:
    """Graph with undirected and directed edges and an acyclic directed part.

    Parameters
    ----------
    n_nodes : int
        Number of nodes; nodes are the integers ``0..n_nodes-1``.
    labels : sequence of str, optional
        Display names, defaults to ``X0, X1, ...``.
    """

    def __init__(self, n_nodes: int, labels: Iterable[str] | None = None):
        if n_nodes < 0:
            raise ValidationError("n_nodes must be non-negative")
        self._n = int(n_nodes)
        if labels is None:
            labels = [f"X{i}" for i in range(self._n)]
        self.labels = tuple(str(s) for s in labels)
        if len(self.labels) != self._n:
            raise ValidationError(f"expected {self._n} labels, got {len(self.labels)}")
        self._adj: list[set[int]] = [set() for _ in range(self._n)]
        self._parents: list[set[int]] = [set() for _ in range(self._n)]
        self._children: list[set[int]] = [set() for _ in range(self._n)]

    # -- construction -----------------------------------------------------

    @classmethod
    def complete(cls, n_nodes: int, labels=None) -> "PartialDAG":
        g = cls(n_nodes, labels)
        for i, j in itertools.combinations(range(n_nodes), 2):
            g.add_edge(i, j)
        return g

    @classmethod
    def from_edges(cls, n_nodes: int, directed=(), undirected=(), labels=None) -> "PartialDAG":
        g = cls(n_nodes, labels)
        for i, j in undirected:
            g.add_edge(i, j)
        for i, j in directed:
            g.add_edge(i, j, directed=True)
        return g

    @classmethod
    def from_adjacency(cls, adj, labels=None) -> "PartialDAG":
        """Build a DAG from a 0/1 matrix where ``adj[i, j] = 1`` means ``i -> j``.

        Symmetric entries produce an undirected edge.
        """
        a = np.asarray(adj)
        n = a.shape[0]
        g = cls(n, labels)
        for i, j in zip(*np.nonzero(a)):
            i, j = int(i), int(j)
            if a[j, i]:
                if i < j:
                    g.add_edge(i, j)
            else:
                g.add_edge(i, j, directed=True)
        return g

    def copy(self) -> "PartialDAG":
        g = PartialDAG(self._n, self.labels)
        g._adj = [set(s) for s in self._adj]
        g._parents = [set(s) for s in self._parents]
        g._children = [set(s) for s in self._children]
        return g

    # -- mutation ---------------------------------------------------------

    def _check(self, v: int) -> int:
        if not 0 <= v < self._n:
            raise IndexError(f"node {v} out of range for graph with {self._n} nodes")
        return int(v)

    def add_edge(self, i: int, j: int, directed: bool = False) -> None:
        i, j = self._check(i), self._check(j)
        if i == j:
            raise ValidationError(f"self-loop on node {i}")
        if j in self._adj[i]:
            raise ValidationError(f"nodes {i} and {j} are already adjacent")
        if directed and self.has_directed_path(j, i):
            raise CycleError(i, j)
        self._adj[i].add(j)
        self._adj[j].add(i)
        if directed:
            self._children[i].add(j)
            self._parents[j].add(i)

    def remove_edge(self, i: int, j: int) -> None:
        i, j = self._check(i), self._check(j)
        if j not in self._adj[i]:
            raise ValidationError(f"no edge between {i} and {j}")
        self._adj[i].discard(j)
        self._adj[j].discard(i)
        self._children[i].discard(j)
        self._parents[j].discard(i)
        self._children[j].discard(i)
        self._parents[i].discard(j)

    def orient(self, tail: int, head: int) -> None:
        """Turn the undirected edge ``tail -- head`` into ``tail -> head``.

        Orienting an edge that is already ``tail -> head`` is a no-op.
        """
        tail, head = self._check(tail), self._check(head)
        if head not in self._adj[tail]:
            raise ValidationError(f"no edge between {tail} and {head}")
        if head in self._children[tail]:
            return
        if tail in self._children[head]:
            raise ValidationError(f"edge {head}->{tail} is already directed the other way")
        if self.has_directed_path(head, tail):
            raise CycleError(tail, head)
        self._children[tail].add(head)
        self._parents[head].add(tail)

    def can_orient(self, tail: int, head: int) -> bool:
        """True if ``tail -- head`` exists and orienting it keeps the graph acyclic."""
        return self.is_undirected(tail, head) and not self.has_directed_path(head, tail)

    # -- queries ----------------------------------------------------------

    @property
    def n_nodes(self) -> int:
        return self._n

    def __len__(self) -> int:
        return self._n

    def neighbors(self, v: int) -> set[int]:
        return set(self._adj[self._check(v)])

    def parents(self, v: int) -> set[int]:
        return set(self._parents[self._check(v)])

    def children(self, v: int) -> set[int]:
        return set(self._children[self._check(v)])

    def undirected_neighbors(self, v: int) -> set[int]:
        v = self._check(v)
        return self._adj[v] - self._parents[v] - self._children[v]

    def degree(self, v: int) -> int:
        return len(self._adj[self._check(v)])

    def is_adjacent(self, i: int, j: int) -> bool:
        return j in self._adj[self._check(i)]

    def is_directed(self, tail: int, head: int) -> bool:
        return head in self._children[self._check(tail)]

    def is_undirected(self, i: int, j: int) -> bool:
        i = self._check(i)
        return j in self._adj[i] and j not in self._children[i] and j not in self._parents[i]

    def edges(self) -> list[tuple[int, int, Mark]]:
        """All edges sorted by node pair; undirected ones as ``(i, j)`` with ``i < j``."""
        out = []
        for i in range(self._n):
            for j in sorted(self._adj[i]):
                if j in self._children[i]:
                    out.append((i, j, Mark.DIRECTED))
                elif i < j and i not in self._children[j]:
                    out.append((i, j, Mark.UNDIRECTED))
        out.sort(key=lambda e: (min(e[0], e[1]), max(e[0], e[1])))
        return out

    def directed_edges(self) -> set[tuple[int, int]]:
        return {(i, j) for i in range(self._n) for j in self._children[i]}

    def undirected_edges(self) -> set[tuple[int, int]]:
        return {(i, j) for i, j, m in self.edges() if m is Mark.UNDIRECTED}

    def skeleton(self) -> set[tuple[int, int]]:
        return {(i, j) for i in range(self._n) for j in self._adj[i] if i < j}

    @property
    def n_edges(self) -> int:
        return sum(len(s) for s in self._adj) // 2

    def is_fully_directed(self) -> bool:
        return all(len(self._adj[v]) == len(self._parents[v]) + len(self._children[v])
                   for v in range(self._n))

    def has_directed_path(self, src: int, dst: int) -> bool:
        """Directed reachability ``src ~> dst`` (a node reaches itself)."""
        if src == dst:
            return True
        seen = {src}
        stack = [src]
        while stack:
            v = stack.pop()
            for c in self._children[v]:
                if c == dst:
                    return True
                if c not in seen:
                    seen.add(c)
                    stack.append(c)
        return False

    def descendants(self, v: int) -> set[int]:
        seen = {v}
        stack = [v]
        while stack:
            u = stack.pop()
            for c in self._children[u]:
                if c not in seen:
                    seen.add(c)
                    stack.append(c)
        return seen

    def ancestors(self, nodes: Iterable[int]) -> set[int]:
        seen = set(nodes)
        stack = list(seen)
        while stack:
            u = stack.pop()
            for p in self._parents[u]:
                if p not in seen:
                    seen.add(p)
                    stack.append(p)
        return seen

    def topological_order(self) -> list[int]:
        """Order of the directed part (Kahn's algorithm, smallest index first)."""
        import heapq

        indeg = [len(p) for p in self._parents]
        heap = [v for v in range(self._n) if indeg[v] == 0]
        heapq.heapify(heap)
        order = []
        while heap:
            v = heapq.heappop(heap)
            order.append(v)
            for c in self._children[v]:
                indeg[c] -= 1
                if indeg[c] == 0:
                    heapq.heappush(heap, c)
        if len(order) != self._n:
            raise ValidationError("directed part of the graph contains a cycle")
        return order

    def is_acyclic(self) -> bool:
        try:
            self.topological_order()
        except ValidationError:
            return False
        return True

    def adjacency_matrix(self) -> np.ndarray:
        """``A[i, j] = 1`` for ``i -> j``; undirected edges set both entries."""
        a = np.zeros((self._n, self._n), dtype=np.int8)
        for i in range(self._n):
            for j in self._adj[i]:
                if j not in self._parents[i]:
                    a[i, j] = 1
        return a

    # -- dunder -----------------------------------------------------------

    def __eq__(self, other) -> bool:
        if not isinstance(other, PartialDAG):
            return NotImplemented
        return (self._n == other._n and self._adj == other._adj
                and self._children == other._children)

    def same_structure(self, other: "PartialDAG") -> bool:
        """Equality of edges and marks, ignoring labels."""
        return self._n == other._n and self._adj == other._adj and self._children == other._children

    def __repr__(self) -> str:
        parts = []
        for i, j, m in self.edges():
            arrow = "->" if m is Mark.DIRECTED else "--"
            parts.append(f"{self.labels[i]}{arrow}{self.labels[j]}")
        return f"PartialDAG(n={self._n}, [{', '.join(parts)}])"


class SepsetMap:
    """Separating sets recorded for pairs found independent."""

    def __init__(self):
        self._sets: dict[tuple[int, int], frozenset[int]] = {}

    def set(self, i: int, j: int, sepset: Iterable[int]) -> None:
        s = frozenset(int(v) for v in sepset)
        if i in s or j in s:
            raise ValidationError(f"separating set for ({i}, {j}) contains an endpoint")
        self._sets[_pair(i, j)] = s

    def get(self, i: int, j: int, default=None):
        return self._sets.get(_pair(i, j), default)

    def __getitem__(self, pair) -> frozenset[int]:
        return self._sets[_pair(*pair)]

    def __contains__(self, pair) -> bool:
        return _pair(*pair) in self._sets

    def __len__(self) -> int:
        return len(self._sets)

    def items(self):
        return sorted(self._sets.items())

    def __eq__(self, other) -> bool:
        return isinstance(other, SepsetMap) and self._sets == other._sets

    def __repr__(self) -> str:
        body = ", ".join(f"{k}: {sorted(v)}" for k, v in self.items())
        return f"SepsetMap({{{body}}})"


@dataclass(frozen=True)
class LogRecord:
    status: str  # "applied" | "skipped"
    rule: str
    nodes: tuple[int, ...]
    detail: str = ""


class OrientationLog:
    """Ordered record of orientation decisions.

    Serialized one record per line: ``status<TAB>rule<TAB>nodes<TAB>detail``.
    """

    def __init__(self):
        self.records: list[LogRecord] = []

    def add(self, status: str, rule: str, nodes, detail: str = "") -> None:
        self.records.append(LogRecord(status, rule, tuple(int(v) for v in nodes), detail))

    def applied(self, rule: str | None = None) -> list[LogRecord]:
        return [r for r in self.records if r.status == "applied" and rule in (None, r.rule)]

    def skipped(self, rule: str | None = None) -> list[LogRecord]:
        return [r for r in self.records if r.status == "skipped" and rule in (None, r.rule)]

    def __iter__(self) -> Iterator[LogRecord]:
        return iter(self.records)

    def __len__(self) -> int:
        return len(self.records)

    def to_text(self, labels=None) -> str:
        def name(v):
            return labels[v] if labels is not None else str(v)

        lines = [f"{r.status}\t{r.rule}\t{','.join(name(v) for v in r.nodes)}\t{r.detail}"
                 for r in self.records]
        return "\n".join(lines) + ("\n" if lines else "")

    @classmethod
    def from_text(cls, text: str, labels=None) -> "OrientationLog":
        index = {s: k for k, s in enumerate(labels)} if labels is not None else None
        log = cls()
        for line in text.splitlines():
            if not line.strip():
                continue
            status, rule, nodes, detail = line.split("\t", 3)
            ids = [index[s] if index else int(s) for s in nodes.split(",") if s]
            log.add(status, rule, ids, detail)
        return log


# -- structural queries ---------------------------------------------------

def neighbors(g: PartialDAG, v: int) -> set[int]:
    return g.neighbors(v)


def unshielded_triples(g: PartialDAG) -> list[tuple[int, int, int]]:
    """Triples ``(x, z, y)`` with ``x - z - y`` adjacent, ``x < y`` and ``x, y`` non-adjacent.

    Returned in lexicographic order.
    """
    out = []
    for z in range(g.n_nodes):
        nb = sorted(g.neighbors(z))
        for a, b in itertools.combinations(nb, 2):
            if not g.is_adjacent(a, b):
                out.append((a, z, b))
    out.sort()
    return out


def colliders(g: PartialDAG) -> set[tuple[int, int, int]]:
    """Unshielded colliders ``x -> z <- y`` as ``(x, z, y)`` with ``x < y``."""
    out = set()
    for z in range(g.n_nodes):
        for a, b in itertools.combinations(sorted(g.parents(z)), 2):
            if not g.is_adjacent(a, b):
                out.add((a, z, b))
    return out


def d_separated(g: PartialDAG, x: int, y: int, z: Iterable[int] = ()) -> bool:
    """Decide whether ``x`` and ``y`` are d-separated given ``z`` in a DAG.

    Uses the reachable-node traversal over (node, direction) states, so the
    cost is linear in the number of edges.
    """
    z = set(z)
    if x == y:
        raise PreconditionError("x and y must differ")
    if x in z or y in z:
        raise PreconditionError("x and y must not be in the conditioning set")
    g._check(x)
    g._check(y)
    if not g.is_fully_directed():
        raise PreconditionError("d-separation requires a fully directed graph")

    anc_z = g.ancestors(z)
    # direction: True when arriving from a child (moving "up"), False from a parent
    visited = set()
    queue = deque([(x, True)])
    while queue:
        v, up = queue.popleft()
        if (v, up) in visited:
            continue
        visited.add((v, up))
        if v == y:
            return False
        if up:
            if v not in z:
                for p in g._parents[v]:
                    queue.append((p, True))
                for c in g._children[v]:
                    queue.append((c, False))
        else:
            if v not in z:
                for c in g._children[v]:
                    queue.append((c, False))
            if v in anc_z:
                for p in g._parents[v]:
                    queue.append((p, True))
    return True


# -- orientation rules ----------------------------------------------------

Allowed = Callable[[int, int], bool]


def _rule_fires(g: PartialDAG, a: int, b: int):
    """Return ``(rule, witness)`` if some rule forces ``a -> b`` for undirected ``a -- b``."""
    # R1: c -> a -- b, c and b non-adjacent
    for c in sorted(g._parents[a]):
        if not g.is_adjacent(c, b):
            return "R1", (c, a, b)
    # R2: a -> c -> b
    for c in sorted(g._children[a]):
        if b in g._children[c]:
            return "R2", (a, c, b)
    # R3: a -- c -> b, a -- d -> b, c and d non-adjacent
    und_a = g.undirected_neighbors(a)
    pb = sorted(p for p in g._parents[b] if p in und_a)
    for c, d in itertools.combinations(pb, 2):
        if not g.is_adjacent(c, d):
            return "R3", (a, c, d, b)
    # R4: c -> d -> b, a adjacent to c and d, c and b non-adjacent
    for d in sorted(g._parents[b]):
        if not g.is_adjacent(a, d):
            continue
        for c in sorted(g._parents[d]):
            if c != a and g.is_adjacent(a, c) and not g.is_adjacent(c, b):
                return "R4", (a, c, d, b)
    return None


def meek_closure(g: PartialDAG, allowed: Allowed | None = None,
                 log: OrientationLog | None = None) -> PartialDAG:
    """Apply the four orientation rules in place until nothing changes.

    ``allowed(tail, head)`` vetoes orientations that contradict prior
    knowledge. Vetoed or cycle-creating orientations are skipped and logged
    once each; existing directed edges are never reversed.
    """
    skipped: set[tuple[int, int]] = set()
    changed = True
    while changed:
        changed = False
        for i, j in sorted(g.undirected_edges()):
            if not g.is_undirected(i, j):
                continue
            for a, b in ((i, j), (j, i)):
                hit = _rule_fires(g, a, b)
                if hit is None:
                    continue
                rule, witness = hit
                reason = None
                if allowed is not None and not allowed(a, b):
                    reason = "forbidden by prior knowledge"
                elif g.has_directed_path(b, a):
                    reason = "would create a directed cycle"
                if reason is not None:
                    if (a, b) not in skipped and log is not None:
                        log.add("skipped", rule, witness, f"{a}->{b}: {reason}")
                    skipped.add((a, b))
                    continue
                g.orient(a, b)
                if log is not None:
                    log.add("applied", rule, witness, f"{a}->{b}")
                changed = True
                break
    return g


# -- equivalence-class extension -------------------------------------------

def _is_consistent_extension(g: PartialDAG, dag: PartialDAG) -> bool:
    if not dag.is_fully_directed() or not dag.is_acyclic():
        return False
    if dag.skeleton() != g.skeleton():
        return False
    if not g.directed_edges() <= dag.directed_edges():
        return False
    return colliders(dag) == colliders(g)


def _dor_tarsi(g: PartialDAG) -> PartialDAG | None:
    """Deterministic extension of a PDAG, or ``None`` if none exists."""
    out = g.copy()
    work = g.copy()
    alive = set(range(g.n_nodes))
    while alive:
        for x in sorted(alive):
            if work._children[x]:
                continue
            und = work.undirected_neighbors(x)
            adj = work._adj[x]
            if all(adj - {y} <= work._adj[y] for y in und):
                for y in und:
                    if not out.can_orient(y, x):
                        return None
                    out.orient(y, x)
                for v in list(work._adj[x]):
                    work.remove_edge(x, v)
                alive.discard(x)
                break
        else:
            return None
    if not out.is_fully_directed():
        return None
    return out


def random_consistent_extension(g: PartialDAG, seed: int = 0) -> PartialDAG:
    """Pick a DAG from the equivalence class described by ``g``.

    Undirected edges are oriented one at a time (edge and direction chosen
    with a seeded RNG), closing under the orientation rules after each step.
    The result keeps the skeleton, every directed edge of ``g`` and exactly
    its unshielded colliders. Sampling is deterministic per seed but not
    uniform over the class.

    Raises
    ------
    ExtensionError
        If ``g`` admits no such orientation.
    """
    rng = np.random.default_rng(seed)
    h = g.copy()
    meek_closure(h)
    while True:
        und = sorted(h.undirected_edges())
        if not und:
            break
        i, j = und[int(rng.integers(len(und)))]
        if rng.random() < 0.5:
            i, j = j, i
        if not h.can_orient(i, j):
            i, j = j, i
        if not h.can_orient(i, j):
            break
        h.orient(i, j)
        meek_closure(h)
    if _is_consistent_extension(g, h):
        return h
    fallback = _dor_tarsi(g)
    if fallback is not None and _is_consistent_extension(g, fallback):
        return fallback
    raise ExtensionError("graph admits no acyclic, collider-preserving extension")


def acyclic_orientation(g: PartialDAG) -> PartialDAG:
    """Orient every undirected edge along a topological order of the directed part.

    Always succeeds and keeps all directed edges, but may introduce new
    colliders; a fallback for patterns with no consistent extension.
    """
    pos = {v: k for k, v in enumerate(g.topological_order())}
    out = g.copy()
    for i, j in sorted(g.undirected_edges()):
        tail, head = (i, j) if pos[i] < pos[j] else (j, i)
        out.orient(tail, head)
    return out
