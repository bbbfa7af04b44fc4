"""Correlation, partial correlation and the Fisher-z independence test.

The test statistic is the usual one for Gaussian data::

    z = atanh(r)
    t = sqrt(n - |S| - 3) * |z|
    p = 2 * (1 - Phi(t)) = erfc(t / sqrt(2))

A strength-of-effect cutoff ``soe`` declares a pair independent whenever
the squared partial correlation falls below it, regardless of ``p``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
import scipy.linalg

from .exceptions import (
    DegenerateColumnError,
    InsufficientSampleError,
    SingularityError,
    ValidationError,
)

#: correlations are clamped to +-(1 - R_CLAMP) before the z-transform
R_CLAMP = 1e-12
#: smallest admissible Cholesky pivot of a correlation submatrix
PIVOT_TOL = 1e-12


@dataclass(frozen=True)
class CorrelationMatrix:
    """Symmetric correlation estimates plus the sample size they came from."""

    values: np.ndarray
    n_samples: int
    labels: tuple[str, ...] | None = field(default=None, compare=False)

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] != v.shape[1] or v.shape[0] < 1:
            raise ValidationError("correlation matrix must be square and non-empty")
        if not np.allclose(v, v.T, atol=1e-10):
            raise ValidationError("correlation matrix must be symmetric")
        if not np.allclose(np.diag(v), 1.0, atol=1e-10):
            raise ValidationError("correlation matrix must have a unit diagonal")
        if np.any(np.abs(v) > 1 + 1e-10):
            raise ValidationError("correlation entries must lie in [-1, 1]")
        if self.n_samples < 2:
            raise ValidationError("sample size must be at least 2")
        v = np.clip((v + v.T) / 2, -1.0, 1.0)
        np.fill_diagonal(v, 1.0)
        v.flags.writeable = False
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "n_samples", int(self.n_samples))

    @property
    def dim(self) -> int:
        return self.values.shape[0]


def correlation_matrix(data) -> CorrelationMatrix:
    """Sample Pearson correlation of the columns of ``data``.

    ``data`` is a 2-D array or a :class:`~causeway.dataset.Dataset`.
    """
    labels = getattr(data, "columns", None)
    x = np.asarray(getattr(data, "values", data), dtype=float)
    if x.ndim != 2:
        raise ValidationError("data must be two-dimensional")
    n, d = x.shape
    if n < 2:
        raise ValidationError("need at least two rows to estimate correlations")
    centered = x - x.mean(axis=0)
    ss = np.einsum("ij,ij->j", centered, centered)
    scale = np.maximum(np.abs(x).max(axis=0), 1.0)
    for k in range(d):
        if ss[k] <= (1e-12 * scale[k]) ** 2 * n:
            raise DegenerateColumnError(labels[k] if labels is not None else k)
    sd = np.sqrt(ss)
    corr = (centered.T @ centered) / np.outer(sd, sd)
    return CorrelationMatrix(corr, n, tuple(labels) if labels is not None else None)


def partial_correlation(c: CorrelationMatrix, i: int, j: int, s=()) -> float:
    """Partial correlation of ``i`` and ``j`` given the set ``s``.

    Computed from the inverse ``P`` of the correlation submatrix over
    ``{i, j} | s`` as ``-P[i, j] / sqrt(P[i, i] * P[j, j])``.

    Raises
    ------
    SingularityError
        If a Cholesky pivot of the submatrix drops below ``PIVOT_TOL``.
    """
    s = sorted(set(int(v) for v in s))
    if i == j:
        raise ValidationError("i and j must differ")
    if i in s or j in s:
        raise ValidationError("i and j must not be in the conditioning set")
    if len(s) > c.dim - 2:
        raise ValidationError("conditioning set too large")
    a, b = (i, j) if i < j else (j, i)
    if not s:
        return float(c.values[a, b])
    idx = [a, b, *s]
    sub = c.values[np.ix_(idx, idx)]
    try:
        chol = np.linalg.cholesky(sub)
    except np.linalg.LinAlgError as exc:
        raise SingularityError(f"correlation submatrix over {idx} is not positive definite") from exc
    if np.min(np.diag(chol)) ** 2 < PIVOT_TOL:
        raise SingularityError(f"correlation submatrix over {idx} is numerically singular")
    prec = scipy.linalg.cho_solve((chol, True), np.eye(len(idx)))
    r = -prec[0, 1] / math.sqrt(prec[0, 0] * prec[1, 1])
    return float(min(1.0, max(-1.0, r)))


class FisherZResult(NamedTuple):
    independent: bool
    p_value: float


def fisher_z_statistic(r: float, n: int, cond_size: int) -> float:
    """``sqrt(n - cond_size - 3) * |atanh(r)|`` with ``|r|`` clamped below 1."""
    dof = n - cond_size - 3
    if dof <= 0:
        raise InsufficientSampleError(
            f"n - |S| - 3 = {dof}: too few samples ({n}) for conditioning set of size {cond_size}")
    r = max(-1.0 + R_CLAMP, min(1.0 - R_CLAMP, float(r)))
    return math.sqrt(dof) * abs(math.atanh(r))


def fisher_z_test(r: float, n: int, cond_size: int, alpha: float) -> FisherZResult:
    """Two-sided Fisher-z test of zero (partial) correlation.

    Independence is accepted when the p-value exceeds ``alpha``.
    """
    if not 0.0 < alpha < 1.0:
        raise ValidationError(f"alpha must lie in (0, 1), got {alpha}")
    t = fisher_z_statistic(r, n, cond_size)
    p = math.erfc(t / math.sqrt(2.0))
    return FisherZResult(p > alpha, p)


@dataclass(frozen=True)
class CiDecision:
    independent: bool
    partial_correlation: float
    p_value: float
    filtered_by_soe: bool = False
    flagged: bool = False  # numerical failure, reported as dependent


def cond_independent(c: CorrelationMatrix, i: int, j: int, s=(), alpha: float = 0.05,
                     soe: float = 0.0) -> CiDecision:
    """Fisher-z decision with a strength-of-effect cutoff on ``r**2``.

    A singular conditioning submatrix yields a flagged *dependent* decision,
    so numerical trouble never deletes an edge.
    """
    if soe < 0:
        raise ValidationError("soe must be non-negative")
    try:
        r = partial_correlation(c, i, j, s)
    except SingularityError:
        return CiDecision(False, float("nan"), 0.0, False, True)
    independent, p = fisher_z_test(r, c.n_samples, len(set(s)), alpha)
    if r * r < soe:
        return CiDecision(True, r, p, True)
    return CiDecision(independent, r, p)


class FisherZTest:
    """Callable CI test ``test(i, j, s) -> CiDecision`` bound to a correlation matrix."""

    def __init__(self, corr: CorrelationMatrix, alpha: float = 0.05, soe: float = 0.0):
        if not 0.0 < alpha < 1.0:
            raise ValidationError(f"alpha must lie in (0, 1), got {alpha}")
        if soe < 0:
            raise ValidationError("soe must be non-negative")
        self.corr = corr
        self.alpha = alpha
        self.soe = soe

    @property
    def n_nodes(self) -> int:
        return self.corr.dim

    def __call__(self, i: int, j: int, s=()) -> CiDecision:
        return cond_independent(self.corr, i, j, s, self.alpha, self.soe)
