import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from netport.errors import TooFewAssets
from netport.networks import DependencyMatrix, kendall_matrix, pearson_matrix
from netport.systemic import (
    ClusteringProfile,
    build_risk_model,
    clustering_coefficients,
    interconnectedness_matrix,
    sample_covariance,
)

from .conftest import make_returns


def dep_from(weights, kind="pearson"):
    w = np.asarray(weights, dtype=float)
    return DependencyMatrix(kind, tuple(f"A{i}" for i in range(len(w))), w)


def clustering_brute(w):
    """Triple loop over the clipped, max-normalized weights."""
    n = len(w)
    clipped = [[max(w[i][j], 0.0) if i != j else 0.0 for j in range(n)] for i in range(n)]
    top = max(max(row) for row in clipped)
    if top == 0:
        return [0.0] * n
    norm = [[v / top for v in row] for row in clipped]
    out = []
    for i in range(n):
        total = 0.0
        for j in range(n):
            for k in range(n):
                if len({i, j, k}) == 3:
                    total += (norm[i][j] * norm[j][k] * norm[k][i]) ** (1 / 3)
        out.append(total / ((n - 1) * (n - 2)))
    return out


def sym(n, gen, lo=-1.0, hi=1.0):
    a = gen.uniform(lo, hi, size=(n, n))
    a = np.triu(a, 1)
    return a + a.T


class TestClustering:
    def test_uniform_positive(self):
        w = np.full((6, 6), 0.37)
        np.fill_diagonal(w, 0)
        c = clustering_coefficients(dep_from(w)).coefficients
        np.testing.assert_allclose(c, 1.0, atol=1e-12)

    def test_nonpositive(self):
        w = -np.abs(sym(5, np.random.default_rng(1)))
        np.testing.assert_array_equal(clustering_coefficients(dep_from(w)).coefficients, 0.0)

    def test_three_node_example(self):
        w = np.array([[0, 0.8, 0.4], [0.8, 0, 0.2], [0.4, 0.2, 0]])
        c = clustering_coefficients(dep_from(w)).coefficients
        np.testing.assert_allclose(c, [0.5, 0.5, 0.5], atol=1e-12)
        np.testing.assert_allclose(c, clustering_brute(w.tolist()), atol=1e-12)

    def test_matches_brute_force(self):
        gen = np.random.default_rng(5)
        for n in (3, 4, 7, 10):
            w = sym(n, gen)
            c = clustering_coefficients(dep_from(w)).coefficients
            np.testing.assert_allclose(c, clustering_brute(w.tolist()), atol=1e-12)
            assert c.min() >= 0 and c.max() <= 1

    def test_needs_three_nodes(self):
        with pytest.raises(TooFewAssets):
            clustering_coefficients(dep_from([[0, 0.5], [0.5, 0]]))

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 100_000), st.integers(4, 8), st.floats(0.0, 1.0))
    def test_monotone_in_edge_weight(self, seed, n, bump):
        gen = np.random.default_rng(seed)
        w = sym(n, gen, 0.0, 0.9)
        # keep one edge as the fixed maximum so the normalization does not move
        w[0, 1] = w[1, 0] = 1.0
        i, j = 2, 3
        higher = w.copy()
        higher[i, j] = higher[j, i] = w[i, j] + bump * (1.0 - w[i, j])
        before = clustering_coefficients(dep_from(w)).coefficients
        after = clustering_coefficients(dep_from(higher)).coefficients
        assert np.all(after >= before - 1e-15)


class TestInterconnectedness:
    def test_extremes(self):
        tick = ("a", "b", "c")
        np.testing.assert_array_equal(interconnectedness_matrix(ClusteringProfile(tick, np.ones(3))), np.ones((3, 3)))
        np.testing.assert_array_equal(interconnectedness_matrix(ClusteringProfile(tick, np.zeros(3))), np.eye(3))

    def test_half(self):
        c = interconnectedness_matrix(ClusteringProfile(("a", "b", "c"), np.full(3, 0.5)))
        expected = np.full((3, 3), 0.25)
        np.fill_diagonal(expected, 1.0)
        np.testing.assert_array_equal(c, expected)

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.floats(0.0, 1.0), min_size=3, max_size=12))
    def test_always_psd(self, coeffs):
        c = interconnectedness_matrix(ClusteringProfile(tuple(map(str, range(len(coeffs)))), np.array(coeffs)))
        np.testing.assert_array_equal(c, c.T)
        assert np.linalg.eigvalsh(c)[0] >= -1e-10


class TestRiskModel:
    def test_h_entries(self, rng):
        sigma = np.array([0.01, 0.02, 0.03])
        z = rng.normal(size=(200, 3))
        z = (z - z.mean(0)) / z.std(0, ddof=1)
        r = make_returns(z * sigma)
        w = np.array([[0, 0.8, 0.4], [0.8, 0, 0.2], [0.4, 0.2, 0]])
        risk = build_risk_model(r, DependencyMatrix("pearson", r.tickers, w))
        np.testing.assert_allclose(risk.sigma, sigma, rtol=1e-12)
        assert risk.H[0, 1] == pytest.approx(0.01 * 0.02 * 0.25, rel=1e-10)
        assert risk.H[0, 0] == pytest.approx(1e-4, rel=1e-10)
        np.testing.assert_allclose(risk.H, risk.sigma[:, None] * risk.C * risk.sigma[None, :], rtol=0, atol=0)

    def test_c_extremes(self, rng):
        r = make_returns(rng.normal(0, 0.01, size=(80, 4)))
        ones = np.ones((4, 4)) * 0.5
        np.fill_diagonal(ones, 0)
        risk = build_risk_model(r, DependencyMatrix("kendall", r.tickers, ones))
        np.testing.assert_allclose(risk.H, np.outer(risk.sigma, risk.sigma), rtol=1e-12)
        risk = build_risk_model(r, DependencyMatrix("kendall", r.tickers, -ones))
        np.testing.assert_allclose(risk.H, np.diag(risk.sigma**2), rtol=1e-12)

    def test_covariance_psd_and_ridge(self, rng):
        # fewer days than assets forces a singular sample covariance
        values = rng.normal(size=(5, 8))
        cov, ridge = sample_covariance(values)
        assert np.linalg.eigvalsh(cov)[0] >= -1e-10
        assert ridge >= 0
        cov_full, ridge_full = sample_covariance(rng.normal(size=(100, 4)))
        assert ridge_full == 0.0

    def test_scaling_one_asset(self, rng):
        values = rng.normal(0, 0.01, size=(120, 5))
        scaled = values.copy()
        scaled[:, 2] *= 4.0
        a, b = make_returns(values), make_returns(scaled)
        ha = build_risk_model(a, kendall_matrix(a)).H
        hb = build_risk_model(b, kendall_matrix(b)).H
        k = np.ones(5)
        k[2] = 4.0
        np.testing.assert_allclose(hb, ha * np.outer(k, k), rtol=1e-12)

    def test_h_psd_on_real_networks(self, rng):
        values = rng.normal(0, 0.01, size=(60, 7)) + rng.normal(0, 0.01, size=(60, 1))
        r = make_returns(values)
        for dep in (pearson_matrix(r), kendall_matrix(r)):
            h = build_risk_model(r, dep).H
            assert np.linalg.eigvalsh(h)[0] >= -1e-10
