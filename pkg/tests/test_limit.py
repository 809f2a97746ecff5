import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from empcop.copulas import FrechetUpperCopula, GaussianCopula, IndependenceCopula, clayton
from empcop.grid import Grid, GridShapeError
from empcop.limit import (
    MAX_NODES,
    CovarianceFactor,
    bridge_covariance,
    grid_bridge_covariance,
    limit_fields,
    limit_process_field,
    sample_bridge,
    sample_bridges,
)

IND = IndependenceCopula()
point = st.tuples(st.floats(0, 1), st.floats(0, 1))


def limit_variance_direct(model, u):
    """Var[alpha(u) - sum_j C_j(u) alpha_j(u_j)] expanded through the bridge covariance."""
    u = np.asarray(u, dtype=float)
    d = len(u)
    edges = []
    for j in range(d):
        e = np.ones(d)
        e[j] = u[j]
        edges.append(e)
    coef = [1.0] + [-model.partial_derivative(j, u) for j in range(d)]
    pts = [u] + edges
    return sum(coef[a] * coef[b] * bridge_covariance(model, pts[a], pts[b]) for a in range(d + 1) for b in range(d + 1))


class TestBridgeCovariance:
    def test_examples(self):
        assert bridge_covariance(IND, [1, 1], [1, 1]) == 0
        assert bridge_covariance(IND, [0.5, 0.5], [0.5, 0.5]) == pytest.approx(0.1875)
        assert bridge_covariance(IND, [0, 0.3], [0.6, 0.9]) == 0

    @given(u=point, v=point)
    @settings(max_examples=100, deadline=None)
    def test_symmetric(self, u, v):
        m = clayton(2.0)
        assert bridge_covariance(m, u, v) == bridge_covariance(m, v, u)

    def test_grid_matrix_is_symmetric_psd(self):
        cov = grid_bridge_covariance(GaussianCopula(rho=0.5), Grid.uniform(9))
        assert np.array_equal(cov, cov.T)
        assert np.linalg.eigvalsh(cov).min() > -1e-12

    def test_grid_matrix_matches_pointwise(self):
        g = Grid.uniform(4)
        cov = grid_bridge_covariance(clayton(1.0), g)
        nodes = g.nodes()
        for a in (0, 5, 9, 15):
            for b in (3, 6, 10):
                assert cov[a, b] == pytest.approx(bridge_covariance(clayton(1.0), nodes[a], nodes[b]), abs=1e-15)


class TestCovarianceFactor:
    @pytest.mark.parametrize("model", [IND, GaussianCopula(rho=0.5), clayton(2.0), FrechetUpperCopula()], ids=repr)
    def test_factor_reproduces_covariance(self, model):
        g = Grid.uniform(11)
        fac = CovarianceFactor.build(model, g)
        cov = grid_bridge_covariance(model, g)[np.ix_(fac.active, fac.active)]
        recon = fac.lower @ fac.lower.T - fac.jitter * np.eye(len(fac.active))
        assert np.max(np.abs(recon - cov)) <= 1e-8
        assert fac.jitter in (0.0, 1e-12, 1e-11, 1e-10, 1e-9, 1e-8)

    def test_node_cap(self):
        assert MAX_NODES == 10_000
        with pytest.raises(ValueError):
            CovarianceFactor.build(IND, Grid.uniform(101))

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            CovarianceFactor.build(IND, Grid.uniform(5, 3))


class TestSampleBridge:
    def test_variance_at_centre(self):
        g = Grid([[0, 0.5, 1], [0, 0.5, 1]])
        draws = sample_bridges(IND, g, 10_000, 42)[:, 1, 1]
        se = 0.1875 * np.sqrt(2 / (draws.size - 1))
        assert abs(draws.var(ddof=1) - 0.1875) <= 3 * se

    def test_covariance_across_nodes(self):
        model = GaussianCopula(rho=0.5)
        g = Grid.uniform(5)
        draws = sample_bridges(model, g, 20_000, 43).reshape(20_000, -1)
        emp = np.cov(draws, rowvar=False)
        assert np.max(np.abs(emp - grid_bridge_covariance(model, g))) < 0.01

    def test_zero_variance_nodes(self):
        g = Grid.uniform(11)
        draws = sample_bridges(clayton(1.0), g, 50, 1)
        assert np.all(draws[:, 0, :] == 0) and np.all(draws[:, :, 0] == 0)
        assert np.all(draws[:, -1, -1] == 0)

    def test_deterministic(self):
        g = Grid.uniform(11)
        a = sample_bridge(IND, g, 9)
        b = sample_bridge(IND, g, 9)
        assert np.array_equal(a.values, b.values)
        assert a.label == "bridge_alpha" and a.meta["jitter"] == b.meta["jitter"]


class TestLimitProcess:
    def test_boundary_values(self):
        g = Grid.uniform(11)
        for model in (IND, GaussianCopula(rho=-0.6)):
            f = limit_process_field(model, sample_bridge(model, g, 3))
            assert f.label == "limit_CC"
            assert np.all(f.values[0, :] == 0) and np.all(f.values[:, 0] == 0)
            assert f.values[-1, -1] == 0

    def test_independence_edges_vanish(self):
        g = Grid.uniform(11)
        f = limit_process_field(IND, sample_bridge(IND, g, 4))
        np.testing.assert_allclose(f.values[-1, :], 0, atol=1e-15)
        np.testing.assert_allclose(f.values[:, -1], 0, atol=1e-15)

    def test_variance_matches_direct_formula(self):
        g = Grid([[0, 0.5, 1], [0, 0.5, 1]])
        fields = limit_fields(IND, g, sample_bridges(IND, g, 10_000, 5))
        target = limit_variance_direct(IND, [0.5, 0.5])
        # expands to 0.1875 - 2 * 0.5 * 0.125 * 2 + 2 * 0.25 * 0.25 + 0.125 * ...
        assert target == pytest.approx(0.0625, abs=1e-15)
        se = target * np.sqrt(2 / (10_000 - 1))
        assert abs(fields[:, 1, 1].var(ddof=1) - target) <= 3 * se

    def test_gaussian_variance_by_direct_formula(self):
        model = GaussianCopula(rho=0.5)
        g = Grid.uniform(5)
        fields = limit_fields(model, g, sample_bridges(model, g, 20_000, 6))
        for idx in [(1, 1), (2, 2), (1, 3)]:
            target = limit_variance_direct(model, g.nodes().reshape(5, 5, 2)[idx])
            se = target * np.sqrt(2 / (20_000 - 1))
            assert abs(fields[(slice(None),) + idx].var(ddof=1) - target) <= 3 * se

    def test_missing_edge_nodes(self):
        g = Grid.uniform(5)
        bridge = sample_bridge(IND, g, 1)
        cut = Grid.__new__(Grid)
        cut.axes = (g.axes[0][:-1], g.axes[1])
        with pytest.raises(GridShapeError):
            limit_fields(IND, cut, bridge.values[None, :-1, :])


class TestContinuityProxy:
    @staticmethod
    def mean_adjacent_jump(model, m, draws=100):
        g = Grid.uniform(m)
        f = limit_fields(model, g, sample_bridges(model, g, draws, np.random.default_rng([12, m])))
        j0 = np.abs(np.diff(f, axis=1)).max(axis=(1, 2))
        j1 = np.abs(np.diff(f, axis=2)).max(axis=(1, 2))
        return float(np.maximum(j0, j1).mean())

    def test_smooth_model_jumps_shrink(self):
        model = GaussianCopula(rho=0.5)
        # a field with continuous trajectories loses roughly a factor sqrt(2)
        assert self.mean_adjacent_jump(model, 81) < 0.85 * self.mean_adjacent_jump(model, 41)

    def test_comonotone_jumps_persist(self):
        coarse = self.mean_adjacent_jump(FrechetUpperCopula(), 41)
        fine = self.mean_adjacent_jump(FrechetUpperCopula(), 81)
        # the diagonal jump has the size of a marginal bridge value and persists;
        # only the off-diagonal part shrinks
        assert fine >= 0.9 * coarse
