"""Linear-Gaussian Bayesian networks: fitting, sampling and normality checks.

Each node is ``x_v = intercept_v + sum_p coef_vp * x_p + noise_std_v * e_v``
with ``e_v ~ N(0, 1)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtri

from .dataset import Dataset, Provenance
from .exceptions import DegenerateColumnError, FittingError, ParseError, ValidationError
from .graph import PartialDAG


@dataclass
class GaussianBN:
    dag: PartialDAG
    coefficients: list[np.ndarray]  # aligned with parents(v), sorted by index
    intercepts: np.ndarray
    noise_std: np.ndarray
    parents: list[tuple[int, ...]] = field(init=False)

    def __post_init__(self):
        if not self.dag.is_fully_directed() or not self.dag.is_acyclic():
            raise ValidationError("a Gaussian BN needs a fully directed acyclic graph")
        n = self.dag.n_nodes
        self.parents = [tuple(sorted(self.dag.parents(v))) for v in range(n)]
        self.coefficients = [np.asarray(c, dtype=float).reshape(-1) for c in self.coefficients]
        self.intercepts = np.asarray(self.intercepts, dtype=float).reshape(-1)
        self.noise_std = np.asarray(self.noise_std, dtype=float).reshape(-1)
        if len(self.coefficients) != n or self.intercepts.size != n or self.noise_std.size != n:
            raise ValidationError("parameter vectors must have one entry per node")
        for v in range(n):
            if self.coefficients[v].size != len(self.parents[v]):
                raise ValidationError(f"node {v}: {len(self.parents[v])} parents, "
                                      f"{self.coefficients[v].size} coefficients")
        if np.any(self.noise_std < 0):
            raise ValidationError("noise standard deviations must be non-negative")

    @property
    def labels(self) -> tuple[str, ...]:
        return self.dag.labels

    @property
    def n_nodes(self) -> int:
        return self.dag.n_nodes

    def coefficient_matrix(self) -> np.ndarray:
        """``B[child, parent]`` edge weights."""
        b = np.zeros((self.n_nodes, self.n_nodes))
        for v, ps in enumerate(self.parents):
            b[v, list(ps)] = self.coefficients[v]
        return b

    def to_text(self) -> str:
        """One tab-separated line per node: name, parents, coefficients, intercept, noise std."""
        lines = []
        for v, name in enumerate(self.labels):
            if any(ch in name for ch in "\t,\n"):
                raise ValidationError(f"node name {name!r} cannot be serialized")
            ps = ",".join(self.labels[p] for p in self.parents[v])
            cs = ",".join(repr(float(c)) for c in self.coefficients[v])
            lines.append(f"{name}\t{ps}\t{cs}\t{float(self.intercepts[v])!r}\t{float(self.noise_std[v])!r}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "GaussianBN":
        rows = [line.split("\t") for line in text.splitlines() if line.strip()]
        for lineno, r in enumerate(rows, start=1):
            if len(r) != 5:
                raise ParseError("expected 5 tab-separated fields", row=lineno)
        names = [r[0] for r in rows]
        index = {name: k for k, name in enumerate(names)}
        dag = PartialDAG(len(names), names)
        coefs, intercepts, noise = [], [], []
        for lineno, (name, ps, cs, icpt, sd) in enumerate(rows, start=1):
            parents = [index[p] for p in ps.split(",")] if ps else []
            values = [float(c) for c in cs.split(",")] if cs else []
            if len(values) != len(parents):
                raise ParseError("parent and coefficient counts differ", row=lineno)
            coefs.append(sorted(zip(parents, values)))
            intercepts.append(float(icpt))
            noise.append(float(sd))
        for v, pairs in enumerate(coefs):
            for p, _ in pairs:
                dag.add_edge(p, v, directed=True)
        return cls(dag, [[c for _, c in pairs] for pairs in coefs], intercepts, noise)


def fit_gaussian_bn(dag: PartialDAG, data) -> GaussianBN:
    """Ordinary least squares of every column on its parents.

    Noise std is the residual standard deviation with ``n - p - 1``
    degrees of freedom, so a parentless node gets the sample std.
    """
    x = np.asarray(getattr(data, "values", data), dtype=float)
    n, d = x.shape
    if d != dag.n_nodes:
        raise ValidationError(f"graph has {dag.n_nodes} nodes but data has {d} columns")
    if not dag.is_fully_directed():
        raise ValidationError("fitting needs a fully directed graph")
    coefs, intercepts, noise = [], [], []
    for v in range(d):
        ps = sorted(dag.parents(v))
        if n <= len(ps) + 1:
            raise FittingError(dag.labels[v], f"{n} rows for {len(ps)} parents")
        design = np.column_stack([np.ones(n), x[:, ps]])
        beta, _, rank, _ = np.linalg.lstsq(design, x[:, v], rcond=None)
        if rank < design.shape[1]:
            raise FittingError(dag.labels[v])
        resid = x[:, v] - design @ beta
        coefs.append(beta[1:])
        intercepts.append(beta[0])
        noise.append(np.sqrt(resid @ resid / (n - len(ps) - 1)))
    return GaussianBN(dag.copy(), coefs, intercepts, noise)


def standard_normals(rng: np.random.Generator, n: int) -> np.ndarray:
    """Inverse-CDF normals from 53-bit uniforms strictly inside (0, 1)."""
    u = (rng.integers(0, 2**53, size=n, dtype=np.uint64).astype(np.float64) + 0.5) * 2.0**-53
    return ndtri(u)


def sample(bn: GaussianBN, n: int, seed: int = 0) -> Dataset:
    """Ancestral sampling with a counter-based (Philox) stream; one block of draws per node."""
    if n < 1:
        raise ValidationError("n must be positive")
    rng = np.random.Generator(np.random.Philox(seed))
    x = np.empty((n, bn.n_nodes))
    for v in bn.dag.topological_order():
        e = standard_normals(rng, n)
        ps = list(bn.parents[v])
        mean = bn.intercepts[v] + (x[:, ps] @ bn.coefficients[v] if ps else 0.0)
        x[:, v] = mean + bn.noise_std[v] * e
    prov = Provenance(source=f"gaussian-bn sample n={n} seed={seed}")
    return Dataset(bn.labels, x, None, prov)


def implied_covariance(bn: GaussianBN) -> np.ndarray:
    """``(I - B)^-1 D (I - B)^-T`` with ``B[child, parent]`` and ``D = diag(noise_std**2)``."""
    a = np.linalg.inv(np.eye(bn.n_nodes) - bn.coefficient_matrix())
    return a @ np.diag(bn.noise_std**2) @ a.T


@dataclass(frozen=True)
class NormalityReport:
    columns: tuple[str, ...]
    skewness: np.ndarray
    kurtosis: np.ndarray
    within_range: np.ndarray
    fraction_within_range: float
    excess: bool = True
    estimator: str = "uncorrected moment estimator"


def moment_stats(data, excess: bool = True, bound: float = 2.0) -> NormalityReport:
    """Per-column skewness ``m3 / m2**1.5`` and kurtosis ``m4 / m2**2`` (minus 3 if ``excess``).

    A column is within range when both statistics lie in ``[-bound, bound]``.
    """
    labels = getattr(data, "columns", None)
    x = np.asarray(getattr(data, "values", data), dtype=float)
    n, d = x.shape
    if labels is None:
        labels = tuple(f"X{i}" for i in range(d))
    if n < 4:
        raise ValidationError("need at least four rows for moment statistics")
    c = x - x.mean(axis=0)
    m2 = (c**2).mean(axis=0)
    for k in range(d):
        if np.all(x[:, k] == x[0, k]) or m2[k] == 0:
            raise DegenerateColumnError(labels[k])
    skew = (c**3).mean(axis=0) / m2**1.5
    kurt = (c**4).mean(axis=0) / m2**2 - (3.0 if excess else 0.0)
    ok = (np.abs(skew) <= bound) & (np.abs(kurt) <= bound)
    return NormalityReport(tuple(labels), skew, kurt, ok, float(ok.mean()), excess)


def random_dag(n: int, mean_degree: float = 2.0, seed: int = 0, tiers=None,
               labels=None) -> PartialDAG:
    """Erdos-Renyi DAG with expected degree ``mean_degree``.

    Nodes are ordered by index (or by tier, then index) and each forward
    pair gets an edge with probability ``mean_degree / (n - 1)``.
    """
    rng = np.random.default_rng(seed)
    order = sorted(range(n), key=lambda v: ((tiers or {}).get(v, 0), v))
    p = min(1.0, mean_degree / max(n - 1, 1))
    g = PartialDAG(n, labels)
    for a in range(n):
        for b in range(a + 1, n):
            if rng.random() < p:
                g.add_edge(order[a], order[b], directed=True)
    return g


def random_gaussian_bn(dag: PartialDAG, seed: int = 0, coef_range=(0.5, 1.5),
                       noise_std: float = 1.0) -> GaussianBN:
    """Weights drawn uniformly from ``+-coef_range`` with random sign; zero intercepts."""
    rng = np.random.default_rng(seed)
    lo, hi = coef_range
    coefs = []
    for v in range(dag.n_nodes):
        k = len(dag.parents(v))
        coefs.append(rng.uniform(lo, hi, size=k) * rng.choice([-1.0, 1.0], size=k))
    return GaussianBN(dag.copy(), coefs, np.zeros(dag.n_nodes), np.full(dag.n_nodes, noise_std))
