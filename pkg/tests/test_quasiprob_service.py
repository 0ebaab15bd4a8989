import math

import numpy as np
import pytest
from scipy import linalg

from config import settings
from models import (
    GramSystem,
    Ket,
    ProductVector,
    QuasiProbDistribution,
    QuasiProbEntry,
    SeparabilityEigenpair,
    WernerParams,
)
from utils.errors import (
    InconsistentSystemError,
    InvalidDistributionError,
    InvalidRangeError,
    MissingSolutionsError,
    SolverDisagreementError,
    UnsupportedCoefficientError,
    UnsupportedDimensionError,
)


def trivial_pair(i, j, d, g):
    vector = ProductVector(family="trivial", indices=(i, j), a=Ket.basis(i, d), b=Ket.basis(j, d))
    return SeparabilityEigenpair(vector=vector, g=g)


class TestGramSystem:

    def test_qubit_support(self, quasiprob_service, qubit_point):
        pairs = quasiprob_service.support_pairs(*qubit_point)
        assert len(pairs) == 10
        system = quasiprob_service.build_gram_system(pairs)
        assert system.G.shape == (10, 10)
        np.testing.assert_allclose(np.diag(system.G), 1.0)
        np.testing.assert_allclose(system.G, system.G.T)
        # |0,1⟩ 与 |s⁰₀₁, s⁰₀₁⟩
        assert system.G[0, 2] == pytest.approx(0.25)

    def test_qutrit_support_excludes_trivial(self, quasiprob_service, bound_point):
        pairs = quasiprob_service.support_pairs(*bound_point)
        assert len(pairs) == 48
        assert all(pair.vector.family != "trivial" for pair in pairs)

    def test_orthogonal_set_has_no_kernel(self, quasiprob_service):
        pairs = [trivial_pair(i, j, 2, 0.25) for i in range(2) for j in range(2)]
        system = quasiprob_service.build_gram_system(pairs)
        np.testing.assert_allclose(system.G, np.eye(4))
        assert system.kernel_dim == 0
        dist = quasiprob_service.solve_quasiprob(system)
        np.testing.assert_allclose(dist.weights, [0.25] * 4)

    def test_duplicate_pair_spans_kernel(self, quasiprob_service):
        pairs = [trivial_pair(0, 1, 2, 0.5), trivial_pair(0, 1, 2, 0.5), trivial_pair(1, 0, 2, 0.5)]
        system = quasiprob_service.build_gram_system(pairs)
        assert system.kernel_dim == 1
        direction = system.kernel_basis[0] * np.sign(system.kernel_basis[0][0])
        np.testing.assert_allclose(direction, [1 / math.sqrt(2), -1 / math.sqrt(2), 0], atol=1e-12)
        # 最小范数解平分重复的权重
        np.testing.assert_allclose(quasiprob_service.solve_quasiprob(system).weights, [0.25, 0.25, 0.5])

    def test_kernel_vectors_are_null(self, quasiprob_service, bound_point):
        system = quasiprob_service.build_gram_system(quasiprob_service.support_pairs(*bound_point))
        assert system.kernel_dim > 0
        for vector in system.kernel_basis:
            assert np.linalg.norm(system.G @ vector) < 1e-10
        np.testing.assert_allclose(system.kernel_basis @ system.kernel_basis.T, np.eye(system.kernel_dim), atol=1e-12)

    def test_empty_pairs(self, quasiprob_service):
        with pytest.raises(MissingSolutionsError):
            quasiprob_service.build_gram_system([])

    def test_inconsistent_system(self, quasiprob_service):
        pairs = [trivial_pair(0, 1, 2, 0.5), trivial_pair(0, 1, 2, 0.3)]
        with pytest.raises(InconsistentSystemError) as excinfo:
            quasiprob_service.solve_quasiprob(quasiprob_service.build_gram_system(pairs))
        assert excinfo.value.residual > 1e-9


@pytest.mark.parametrize("d", [2, 3])
def test_projection_matches_pseudo_inverse(state_service, quasiprob_service, d):
    rng = np.random.default_rng(d)
    for alpha, delta in zip(rng.uniform(-1, 1, 10), rng.uniform(0, 3, 10)):
        params = WernerParams(d=d, alpha=float(alpha))
        system = quasiprob_service.build_gram_system(
            quasiprob_service.support_pairs(params, state_service.gaussian_spec(float(delta), d))
        )
        particular, *_ = linalg.lstsq(system.G, system.g)
        projected = quasiprob_service.project_out_kernel(particular, system.kernel_basis)
        minimal = linalg.pinvh(system.G, rtol=settings.kernel_rel_threshold) @ system.g
        assert np.max(np.abs(projected - minimal)) < 1e-12


def test_wrong_kernel_is_rejected(quasiprob_service):
    pairs = [trivial_pair(i, j, 2, 0.25) for i in range(2) for j in range(2)]
    system = GramSystem(
        vectors=[pair.vector for pair in pairs],
        G=np.eye(4),
        g=[0.25] * 4,
        kernel_basis=[[1.0, 0.0, 0.0, 0.0]],
    )
    with pytest.raises(SolverDisagreementError) as excinfo:
        quasiprob_service.solve_quasiprob(system)
    assert excinfo.value.disagreement == pytest.approx(0.25)


def test_projection_is_idempotent(quasiprob_service, bound_point):
    system = quasiprob_service.build_gram_system(quasiprob_service.support_pairs(*bound_point))
    rng = np.random.default_rng(5)
    once = quasiprob_service.project_out_kernel(rng.standard_normal(system.size), system.kernel_basis)
    twice = quasiprob_service.project_out_kernel(once, system.kernel_basis)
    np.testing.assert_allclose(twice, once, atol=1e-14)
    np.testing.assert_allclose(system.kernel_basis @ once, 0, atol=1e-12)


class TestAnalyticDistributions:

    def test_qubit_entries(self, quasiprob_service, qubit_point):
        dist = quasiprob_service.qubit_distribution_analytic(*qubit_point)
        weights = dict(zip(dist.labels, dist.weights))
        assert weights["trivial(0,1)"] == pytest.approx(1 / 3)
        assert weights["parallel(0,1,0)"] == pytest.approx(-0.125)
        assert weights["perp(0,1,2)"] == pytest.approx(0.208333, abs=1e-6)
        assert dist.total == pytest.approx(1.0, abs=1e-12)

    def test_qubit_below_threshold_nonnegative(self, state_service, quasiprob_service):
        dist = quasiprob_service.qubit_distribution_analytic(WernerParams(d=2, alpha=0.4), state_service.gaussian_spec(0.0, 2))
        assert dist.min_weight > 0

    def test_qutrit_bound_entangled_weight(self, quasiprob_service, bound_point):
        dist = quasiprob_service.qutrit_distribution_analytic(*bound_point)
        assert len(dist.entries) == 48
        assert dist.entries[0].weight == pytest.approx(-0.00355, abs=1e-5)
        assert dist.min_weight < -1e-4
        assert dist.total == pytest.approx(1.0, abs=1e-12)

    def test_qutrit_maximally_mixed(self, state_service, quasiprob_service):
        dist = quasiprob_service.qutrit_distribution_analytic(WernerParams(d=3, alpha=0.0), state_service.gaussian_spec(1.0, 3))
        np.testing.assert_allclose(dist.weights[:24], 1 / 36)
        np.testing.assert_allclose(dist.weights[24:], 1 / 72)

    def test_qutrit_zero_at_threshold(self, state_service, quasiprob_service):
        dist = quasiprob_service.qutrit_distribution_analytic(WernerParams(d=3, alpha=1 / 3), state_service.gaussian_spec(0.0, 3))
        assert abs(dist.min_weight) < 1e-12

    def test_dimension_checks(self, state_service, quasiprob_service, bound_point, qubit_point):
        with pytest.raises(UnsupportedDimensionError):
            quasiprob_service.qubit_distribution_analytic(*bound_point)
        with pytest.raises(UnsupportedDimensionError):
            quasiprob_service.qutrit_distribution_analytic(*qubit_point)

    def test_complex_lambda(self, state_service, quasiprob_service):
        with pytest.raises(UnsupportedCoefficientError):
            quasiprob_service.qubit_distribution_analytic(WernerParams(d=2, alpha=0.5), state_service.explicit_spec([0.2j]))


class TestReconstruction:

    @pytest.mark.parametrize("d, alpha, delta", [(2, 0.8, 0.0), (2, 0.35, 2.2), (3, 0.5, 1.0), (3, 0.95, 0.2)])
    def test_analytic_reconstructs_state(self, state_service, quasiprob_service, d, alpha, delta):
        params = WernerParams(d=d, alpha=alpha)
        spec = state_service.gaussian_spec(delta, d)
        rebuilt = quasiprob_service.reconstruct_state(quasiprob_service.analytic_distribution(params, spec))
        rho = state_service.apply_dephasing(params, spec)
        assert np.linalg.norm(rebuilt.entries - rho.entries) < 1e-10

    @pytest.mark.parametrize("d, alpha, delta", [(2, 0.8, 0.0), (2, 0.6, 1.3), (3, 0.5, 1.0), (3, 0.2, 2.7)])
    def test_gram_matches_analytic(self, state_service, quasiprob_service, d, alpha, delta):
        params = WernerParams(d=d, alpha=alpha)
        spec = state_service.gaussian_spec(delta, d)
        numeric = quasiprob_service.gram_distribution(params, spec)
        analytic = quasiprob_service.analytic_distribution(params, spec)
        assert numeric.labels == analytic.labels
        np.testing.assert_allclose(numeric.weights, analytic.weights, atol=1e-9)

    def test_single_entry_is_projector(self, quasiprob_service):
        dist = QuasiProbDistribution(entries=[QuasiProbEntry(vector=trivial_pair(0, 0, 2, 1.0).vector, weight=1.0)])
        rho = quasiprob_service.reconstruct_state(dist).entries
        expected = np.zeros((4, 4))
        expected[0, 0] = 1.0
        np.testing.assert_allclose(rho, expected)

    def test_rejects_bad_distributions(self, quasiprob_service):
        with pytest.raises(InvalidDistributionError):
            quasiprob_service.reconstruct_state(QuasiProbDistribution(entries=[]))
        mixed = QuasiProbDistribution(entries=[
            QuasiProbEntry(vector=trivial_pair(0, 0, 2, 1.0).vector, weight=0.5),
            QuasiProbEntry(vector=trivial_pair(0, 0, 3, 1.0).vector, weight=0.5),
        ])
        with pytest.raises(InvalidDistributionError):
            quasiprob_service.reconstruct_state(mixed)


class TestThresholds:

    def test_qubit_equals_pt(self, state_service, npt_service, quasiprob_service):
        for delta in (0.0, 0.4, 1.0, 2.0):
            spec = state_service.gaussian_spec(delta, 2)
            assert quasiprob_service.alpha_qp_threshold(2, spec) == npt_service.alpha_pt_threshold(2, spec)

    def test_qutrit_values(self, quasiprob_service):
        assert quasiprob_service.gaussian_alpha_qp(3, 0.0) == pytest.approx(1 / 3)
        assert quasiprob_service.gaussian_alpha_qp(3, 1.362) == pytest.approx(0.5583, abs=1e-4)

    def test_larger_second_coefficient(self, state_service, quasiprob_service):
        spec = state_service.explicit_spec([0.1, 0.6])
        assert quasiprob_service.alpha_qp_threshold(3, spec) == pytest.approx(1 / 2.2)

    def test_interval(self, quasiprob_service):
        assert quasiprob_service.bound_entanglement_interval(0.0) == pytest.approx((1 / 3, 1 / 3))
        lower, upper = quasiprob_service.bound_entanglement_interval(1.0)
        assert lower == pytest.approx(0.4519, abs=1e-4)
        assert upper == pytest.approx(0.5186, abs=1e-4)
        assert quasiprob_service.interval_width(1.362) == pytest.approx(0.0779, abs=1e-4)

    def test_summary(self, quasiprob_service, bound_point):
        params, spec = bound_point
        summary = quasiprob_service.distribution_summary(
            quasiprob_service.qutrit_distribution_analytic(params, spec), params.d, spec
        )
        assert summary["is_entangled"]
        assert summary["alpha_qp"] < params.alpha <= summary["alpha_pt"]


class TestGoldenSection:

    def test_reproduces_widest_interval(self, quasiprob_service):
        delta_star = quasiprob_service.find_max_interval_delta(0.5, 3.0, 1e-6)
        assert delta_star == pytest.approx(1.362, abs=1e-3)
        width = quasiprob_service.interval_width(delta_star)
        assert width > quasiprob_service.interval_width(delta_star - 0.2)
        assert width > quasiprob_service.interval_width(delta_star + 0.2)

    def test_boundary_results(self, quasiprob_service):
        assert quasiprob_service.find_max_interval_delta(0.0, 0.01, 1e-6) == 0.01
        assert quasiprob_service.find_max_interval_delta(2.5, 3.0, 1e-6) == 2.5

    @pytest.mark.parametrize("lo, hi, tol", [(1.0, 1.0, 1e-6), (-0.1, 1.0, 1e-6), (0.5, 3.0, 0.0)])
    def test_invalid_range(self, quasiprob_service, lo, hi, tol):
        with pytest.raises(InvalidRangeError):
            quasiprob_service.find_max_interval_delta(lo, hi, tol)
