import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import norm

from causeway.citest import (
    CorrelationMatrix,
    FisherZTest,
    cond_independent,
    correlation_matrix,
    fisher_z_statistic,
    fisher_z_test,
    partial_correlation,
)
from causeway.exceptions import (
    DegenerateColumnError,
    InsufficientSampleError,
    ValidationError,
)

from oracles import fisher_p_value, residual_partial_correlation, two_pass_correlation


def _corr(x):
    return correlation_matrix(np.asarray(x, dtype=float))


# -- correlation matrix -----------------------------------------------------------

def test_duplicate_and_negated_columns(rng):
    x = rng.normal(size=200)
    c = _corr(np.column_stack([x, x, -x]))
    assert c.values[0, 1] == pytest.approx(1.0, abs=1e-15)
    assert c.values[0, 2] == pytest.approx(-1.0, abs=1e-15)


def test_correlation_matches_two_pass_oracle(rng):
    x = rng.normal(size=(150, 3)) @ np.array([[1.0, 0.4, 0.0], [0.0, 1.0, -0.7], [0.0, 0.0, 1.0]])
    assert np.max(np.abs(_corr(x).values - two_pass_correlation(x))) < 1e-12


def test_standardized_correlation_is_gram(rng):
    x = rng.normal(size=(300, 4)) @ rng.normal(size=(4, 4))
    z = (x - x.mean(0)) / x.std(0, ddof=1)
    assert np.max(np.abs(_corr(z).values - z.T @ z / (len(z) - 1))) < 1e-10


def test_zero_variance_column_named():
    x = np.column_stack([np.arange(10.0), np.full(10, 3.0)])
    with pytest.raises(DegenerateColumnError) as info:
        _corr(x)
    assert info.value.column == 1


def test_correlation_matrix_validation():
    with pytest.raises(ValidationError):
        CorrelationMatrix(np.array([[1.0, 0.2], [0.3, 1.0]]), 10)
    with pytest.raises(ValidationError):
        CorrelationMatrix(np.eye(2), 1)
    c = CorrelationMatrix(np.eye(2), 5)
    with pytest.raises(ValueError):
        c.values[0, 1] = 0.5


# -- partial correlation ------------------------------------------------------------

def test_empty_set_returns_entry_exactly():
    c = CorrelationMatrix(np.array([[1, 0.3, 0.1], [0.3, 1, 0.2], [0.1, 0.2, 1]]), 100)
    assert partial_correlation(c, 0, 1) == 0.3
    assert partial_correlation(c, 2, 1, ()) == 0.2


def test_identity_gives_zero():
    c = CorrelationMatrix(np.eye(5), 100)
    assert partial_correlation(c, 0, 4, {1, 2, 3}) == 0.0


def test_chain_partial_matches_residual_oracle(rng):
    n = 5000
    x = rng.normal(size=n)
    y = 1.5 * x + rng.normal(size=n)
    z = -2.0 * y + rng.normal(size=n)
    data = np.column_stack([x, y, z])
    got = partial_correlation(_corr(data), 0, 2, {1})
    assert abs(got - residual_partial_correlation(data, 0, 2, [1])) < 1e-10
    assert abs(got) < 0.05


def test_random_instances_match_residual_oracle(rng):
    for _ in range(200):
        d = int(rng.integers(3, 8))
        data = rng.normal(size=(int(rng.integers(40, 400)), d)) @ rng.normal(size=(d, d))
        i, j = rng.choice(d, 2, replace=False)
        rest = [v for v in range(d) if v not in (i, j)]
        s = list(rng.choice(rest, int(rng.integers(0, min(4, len(rest)) + 1)), replace=False))
        got = partial_correlation(_corr(data), int(i), int(j), s)
        assert abs(got - residual_partial_correlation(data, int(i), int(j), s)) < 1e-10


def test_singular_submatrix_is_flagged_dependent(rng):
    x = rng.normal(size=100)
    y = rng.normal(size=100)
    c = _corr(np.column_stack([x, y, x + 1e-9 * rng.normal(size=100)]))
    dec = cond_independent(c, 0, 1, {2})
    assert dec.flagged and not dec.independent


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_partial_symmetric_and_order_invariant(seed):
    r = np.random.default_rng(seed)
    data = r.normal(size=(60, 6)) @ r.normal(size=(6, 6))
    c = _corr(data)
    s = [5, 2, 3]
    a = partial_correlation(c, 0, 1, s)
    assert a == partial_correlation(c, 1, 0, s)
    assert a == partial_correlation(c, 0, 1, sorted(s, reverse=True))


# -- Fisher z ------------------------------------------------------------------------------

def test_zero_correlation():
    res = fisher_z_test(0.0, 50, 0, 0.999)
    assert fisher_z_statistic(0.0, 50, 0) == 0.0
    assert res.p_value == 1.0 and res.independent


def test_worked_case():
    t = fisher_z_statistic(0.2, 103, 0)
    assert t == pytest.approx(5 * math.log(1.5), abs=1e-12)
    assert t == pytest.approx(2.027, abs=5e-4)
    assert t > norm.ppf(0.975)
    assert not fisher_z_test(0.2, 103, 0, 0.05).independent


def test_p_values_match_mpmath_grid():
    for r in (-0.95, -0.3, -0.01, 0.0, 0.004, 0.05, 0.2, 0.5, 0.9, 0.999):
        for n in (10, 30, 103, 1000, 50000):
            for k in (0, 1, 4):
                p = fisher_z_test(r, n, k, 0.05).p_value
                assert abs(p - fisher_p_value(r, n, k)) < 1e-10


def test_insufficient_sample():
    with pytest.raises(InsufficientSampleError):
        fisher_z_statistic(0.1, 5, 2)


def test_clamped_unit_correlation_is_finite():
    assert math.isfinite(fisher_z_statistic(1.0, 100, 0))
    assert fisher_z_test(-1.0, 100, 0, 0.05).p_value == 0.0


@settings(max_examples=200, deadline=None)
@given(st.floats(-0.999, 0.999), st.floats(-0.999, 0.999), st.integers(10, 10**6), st.integers(0, 5))
def test_p_value_monotone_in_abs_r(r1, r2, n, k):
    lo, hi = sorted((abs(r1), abs(r2)))
    assert fisher_z_test(hi, n, k, 0.05).p_value <= fisher_z_test(lo, n, k, 0.05).p_value


# -- soe cutoff -------------------------------------------------------------------------------

def test_soe_filter_at_any_n():
    for n in (20, 10**4, 10**8):
        c = CorrelationMatrix(np.array([[1.0, 0.09], [0.09, 1.0]]), n)
        dec = cond_independent(c, 0, 1, (), 0.05, soe=0.01)
        assert dec.independent and dec.filtered_by_soe


def test_soe_zero_equals_plain_test(rng):
    data = rng.normal(size=(80, 5)) @ rng.normal(size=(5, 5))
    c = _corr(data)
    for s in ((), (2,), (2, 3), (2, 3, 4)):
        dec = cond_independent(c, 0, 1, s, 0.05, 0.0)
        r = partial_correlation(c, 0, 1, s)
        assert (dec.independent, dec.p_value) == tuple(fisher_z_test(r, 80, len(s), 0.05))
        assert not dec.filtered_by_soe


def test_raising_soe_never_restores_dependence(rng):
    data = rng.normal(size=(400, 6)) @ rng.normal(size=(6, 6)) * 0.3 + rng.normal(size=(400, 6))
    c = _corr(data)
    grid = [0.0, 0.001, 0.01, 0.05, 0.1, 0.3]
    for i in range(6):
        for j in range(i + 1, 6):
            for s in ((), tuple(v for v in range(6) if v not in (i, j))[:2]):
                seen_indep = False
                for soe in grid:
                    dec = cond_independent(c, i, j, s, 0.01, soe)
                    if dec.filtered_by_soe:
                        assert dec.independent
                    assert dec.independent or not seen_indep
                    seen_indep = seen_indep or dec.independent


def test_fisher_z_test_callable(rng):
    c = _corr(rng.normal(size=(100, 3)))
    t = FisherZTest(c, alpha=0.01)
    assert t.n_nodes == 3
    assert t(0, 1, (2,)) == cond_independent(c, 0, 1, (2,), 0.01)
    with pytest.raises(ValidationError):
        FisherZTest(c, alpha=1.5)
