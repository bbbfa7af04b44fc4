import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from causeway.exceptions import DegenerateColumnError, FittingError, ValidationError
from causeway.graph import PartialDAG
from causeway.synth import (
    GaussianBN,
    fit_gaussian_bn,
    implied_covariance,
    moment_stats,
    random_dag,
    random_gaussian_bn,
    sample,
    standard_normals,
)

from oracles import covariance_by_recursion, normal_equations


def two_node_bn(b, noise=(1.0, 1.0)):
    dag = PartialDAG.from_edges(2, directed=[(0, 1)], labels=["X", "Y"])
    return GaussianBN(dag, [[], [b]], [0.0, 0.0], list(noise))


def test_first_draws_match_mpmath_inverse_cdf():
    mpmath.mp.dps = 30
    ints = np.random.Generator(np.random.Philox(0)).integers(0, 2**53, size=4, dtype=np.uint64)
    expected = [float(mpmath.sqrt(2) * mpmath.erfinv(2 * (mpmath.mpf(int(k)) + 0.5) / 2**53 - 1))
                for k in ints]
    got = standard_normals(np.random.Generator(np.random.Philox(0)), 4)
    np.testing.assert_allclose(got, expected, rtol=0, atol=1e-12)
    # frozen so that a change of generator is noticed
    np.testing.assert_allclose(got, [-2.195411801287844, -0.6502442049268208,
                                     -0.07133547517201665, -1.3320634417492654], atol=1e-12)


# -- sampling ------------------------------------------------------------------------

def test_zero_noise_rows_equal_intercepts():
    bn = GaussianBN(PartialDAG(3), [[], [], []], [1.0, -2.0, 0.5], [0, 0, 0])
    ds = sample(bn, 10, seed=1)
    assert np.all(ds.values == [1.0, -2.0, 0.5])


def test_deterministic_link():
    ds = sample(two_node_bn(2.0, (1.0, 0.0)), 1000, seed=3)
    assert np.array_equal(ds.values[:, 1], 2.0 * ds.values[:, 0])


def test_reproducible_bytes():
    bn = random_gaussian_bn(random_dag(6, 2.0, seed=1), seed=1)
    assert sample(bn, 2000, seed=5).values.tobytes() == sample(bn, 2000, seed=5).values.tobytes()
    assert sample(bn, 2000, seed=5).values.tobytes() != sample(bn, 2000, seed=6).values.tobytes()


def test_empirical_covariance_close(rng):
    bn = random_gaussian_bn(random_dag(6, 2.0, seed=2), seed=2, coef_range=(0.2, 0.6))
    x = sample(bn, 100_000, seed=9).values
    assert np.max(np.abs(np.cov(x, rowvar=False) - implied_covariance(bn))) < 0.02


# -- implied covariance ----------------------------------------------------------------

def test_independent_unit_noise_is_identity():
    bn = GaussianBN(PartialDAG(4), [[]] * 4, np.zeros(4), np.ones(4))
    assert np.array_equal(implied_covariance(bn), np.eye(4))


def test_two_node_closed_form():
    cov = implied_covariance(two_node_bn(1.7))
    assert cov[1, 1] == pytest.approx(1 + 1.7**2)
    assert cov[0, 1] == pytest.approx(1.7)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.integers(2, 9))
def test_implied_covariance_matches_recursion(seed, n):
    bn = random_gaussian_bn(random_dag(n, 2.0, seed=seed), seed=seed)
    np.testing.assert_allclose(implied_covariance(bn), covariance_by_recursion(bn), rtol=1e-10, atol=1e-10)


def test_implied_covariance_monte_carlo():
    bn = random_gaussian_bn(random_dag(6, 2.0, seed=4), seed=4, coef_range=(0.2, 0.6))
    # plain ancestral sampling with numpy's default generator, separate from sample()
    r = np.random.default_rng(77)
    x = np.zeros((1_000_000, 6))
    for v in bn.dag.topological_order():
        x[:, v] = r.standard_normal(len(x)) * bn.noise_std[v]
        for p, b in zip(bn.parents[v], bn.coefficients[v]):
            x[:, v] += b * x[:, p]
    assert np.max(np.abs(np.cov(x, rowvar=False) - implied_covariance(bn))) < 0.01


# -- fitting ------------------------------------------------------------------------------

def test_parentless_fit_is_mean_and_std(rng):
    x = rng.normal(3.0, 2.0, size=(500, 1))
    bn = fit_gaussian_bn(PartialDAG(1), x)
    assert bn.intercepts[0] == pytest.approx(x.mean(), abs=1e-12)
    assert bn.noise_std[0] == pytest.approx(x.std(ddof=1), abs=1e-12)


def test_slope_recovery(rng):
    n = 50000
    xs = rng.normal(size=n)
    ys = 2 * xs + 0.1 * rng.normal(size=n)
    bn = fit_gaussian_bn(PartialDAG.from_edges(2, directed=[(0, 1)]), np.column_stack([xs, ys]))
    assert abs(bn.coefficients[1][0] - 2.0) < 0.01


def test_fit_matches_normal_equations(rng):
    dag = random_dag(7, 2.5, seed=8)
    x = sample(random_gaussian_bn(dag, seed=8), 3000, seed=8).values
    bn = fit_gaussian_bn(dag, x)
    for v in range(7):
        ps = list(bn.parents[v])
        beta = normal_equations(x[:, ps], x[:, v])
        np.testing.assert_allclose(np.r_[bn.intercepts[v], bn.coefficients[v]], beta, atol=1e-8)


def test_fit_roundtrip_and_orthogonal_residuals():
    dag = random_dag(8, 2.0, seed=12)
    true = random_gaussian_bn(dag, seed=12, coef_range=(0.5, 3.0))
    x = sample(true, 50000, seed=1).values
    bn = fit_gaussian_bn(dag, x)
    for v in range(8):
        assert np.all(np.abs(bn.coefficients[v] - true.coefficients[v]) < 0.05)
        ps = list(bn.parents[v])
        resid = x[:, v] - bn.intercepts[v] - x[:, ps] @ bn.coefficients[v]
        for p in ps:
            assert abs(np.corrcoef(resid, x[:, p])[0, 1]) < 0.01


def test_rank_deficient_parents():
    r = np.random.default_rng(0)
    a = r.normal(size=100)
    x = np.column_stack([a, a, a + r.normal(size=100)])
    dag = PartialDAG.from_edges(3, directed=[(0, 2), (1, 2)], labels=["a", "b", "c"])
    with pytest.raises(FittingError) as info:
        fit_gaussian_bn(dag, x)
    assert info.value.node == "c"


def test_text_roundtrip():
    bn = random_gaussian_bn(random_dag(6, 2.0, seed=3), seed=3)
    bn.intercepts[:] = np.linspace(-1, 1, 6)
    again = GaussianBN.from_text(bn.to_text())
    assert again.to_text() == bn.to_text()
    assert again.dag == bn.dag
    np.testing.assert_array_equal(again.coefficient_matrix(), bn.coefficient_matrix())


def test_bn_validation():
    dag = PartialDAG.from_edges(2, directed=[(0, 1)])
    with pytest.raises(ValidationError):
        GaussianBN(dag, [[], []], [0, 0], [1, 1])
    with pytest.raises(ValidationError):
        GaussianBN(dag, [[], [1.0]], [0, 0], [1, -1])
    with pytest.raises(ValidationError):
        GaussianBN(PartialDAG.from_edges(2, undirected=[(0, 1)]), [[], []], [0, 0], [1, 1])


# -- moments ------------------------------------------------------------------------------

def test_two_point_column_has_zero_skew():
    x = np.tile([-1.0, 1.0], 50)[:, None]
    rep = moment_stats(x)
    assert rep.skewness[0] == 0.0
    assert rep.kurtosis[0] == pytest.approx(-2.0)


def test_moments_match_scipy(rng):
    x = np.column_stack([rng.normal(size=100_000), rng.exponential(size=100_000)])
    rep = moment_stats(x)
    np.testing.assert_allclose(rep.skewness, stats.skew(x, bias=True), rtol=1e-10)
    np.testing.assert_allclose(rep.kurtosis, stats.kurtosis(x, fisher=True, bias=True), rtol=1e-10)
    raw = moment_stats(x, excess=False)
    np.testing.assert_allclose(raw.kurtosis, stats.kurtosis(x, fisher=False, bias=True), rtol=1e-10)
    assert abs(rep.skewness[0]) < 0.05 and abs(rep.kurtosis[0]) < 0.05
    assert list(rep.within_range) == [True, False]
    assert rep.fraction_within_range == 0.5


def test_constant_column_rejected():
    with pytest.raises(DegenerateColumnError):
        moment_stats(np.column_stack([np.arange(10.0), np.ones(10)]))


def test_random_dag_respects_tiers_and_degree():
    tiers = {v: 2 - v // 10 for v in range(30)}
    g = random_dag(30, 2.0, seed=0, tiers=tiers)
    assert all(tiers[a] <= tiers[b] for a, b in g.directed_edges())
    degs = [2 * random_dag(30, 2.0, seed=s).n_edges / 30 for s in range(200)]
    assert abs(np.mean(degs) - 2.0) < 0.1
