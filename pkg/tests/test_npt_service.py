import math

import numpy as np
import pytest

from models import BipartiteOperator, WernerParams
from utils.errors import InvalidOperatorError, UnsupportedDimensionError


def test_partial_transpose_index_map(npt_service):
    entries = np.arange(16).reshape(4, 4)
    pt = npt_service.partial_transpose(BipartiteOperator(dim=2, entries=entries)).entries
    expected = np.array([
        [0, 4, 2, 6],
        [1, 5, 3, 7],
        [8, 12, 10, 14],
        [9, 13, 11, 15],
    ])
    np.testing.assert_array_equal(pt.real, expected)


def test_partial_transpose_of_swap(state_service, npt_service):
    # Ŝ 的部分转置是 d 倍的最大纠缠态投影
    swap = state_service.make_swap(3)
    pt = npt_service.partial_transpose(swap).entries
    eigenvalues = np.linalg.eigvalsh(pt)
    np.testing.assert_allclose(eigenvalues, [0] * 8 + [3], atol=1e-12)


class TestAnalyticSpectrum:

    def test_qubit_undephased(self, state_service, npt_service):
        params = WernerParams(d=2, alpha=1.0)
        values = npt_service.pt_eigenvalues_analytic(params, state_service.gaussian_spec(0.0, 2))
        assert values == pytest.approx([-0.5, 0.5, 0.5, 0.5])

    @pytest.mark.parametrize("d, alpha, delta", [(2, 1.0, 0.0), (2, 0.3, 1.7), (3, 0.9, 0.5), (3, -0.4, 2.0)])
    def test_matches_numeric(self, state_service, npt_service, d, alpha, delta):
        params = WernerParams(d=d, alpha=alpha)
        spec = state_service.gaussian_spec(delta, d)
        analytic = npt_service.pt_eigenvalues_analytic(params, spec)
        numeric = npt_service.pt_spectrum_numeric(state_service.apply_dephasing(params, spec))
        np.testing.assert_allclose(analytic, numeric, atol=1e-10)

    def test_alpha_zero(self, state_service, npt_service):
        values = npt_service.pt_eigenvalues_analytic(WernerParams(d=3, alpha=0.0), state_service.gaussian_spec(1.0, 3))
        assert values == pytest.approx([1 / 9] * 9)

    def test_unsupported_dimension(self, state_service, npt_service):
        with pytest.raises(UnsupportedDimensionError):
            npt_service.pt_eigenvalues_analytic(WernerParams(d=4, alpha=0.5), state_service.gaussian_spec(1.0, 4))


class TestThresholds:

    def test_qubit(self, state_service, npt_service):
        assert npt_service.alpha_pt_threshold(2, state_service.gaussian_spec(0.0, 2)) == pytest.approx(0.5)
        assert npt_service.gaussian_alpha_pt(2, 2.0) == pytest.approx(1 / (1 + math.exp(-2)))

    def test_qutrit(self, npt_service):
        assert npt_service.gaussian_alpha_pt(3, 0.0) == pytest.approx(1 / 3, abs=1e-12)
        assert npt_service.gaussian_alpha_pt(3, 1.0) == pytest.approx(0.5186, abs=1e-4)
        assert npt_service.gaussian_alpha_pt(3, 1.362) == pytest.approx(0.6362, abs=1e-4)

    def test_sign_change_at_threshold(self, state_service, npt_service):
        spec = state_service.gaussian_spec(1.0, 3)
        threshold = npt_service.alpha_pt_threshold(3, spec)
        below = npt_service.pt_eigenvalues_analytic(WernerParams(d=3, alpha=threshold - 1e-6), spec)[0]
        at = npt_service.pt_eigenvalues_analytic(WernerParams(d=3, alpha=threshold), spec)[0]
        above = npt_service.pt_eigenvalues_analytic(WernerParams(d=3, alpha=threshold + 1e-6), spec)[0]
        assert below > 0
        assert abs(at) < 1e-12
        assert above < 0


def test_bound_entangled_point_is_ppt(npt_service, bound_point):
    report = npt_service.pt_report(*bound_point)
    assert not report.is_npt
    assert report.min_eigenvalue == pytest.approx(0.00479, abs=1e-5)
    assert len(report.eigenvalues) == 9


def test_numeric_rejects_non_hermitian(npt_service):
    entries = np.eye(4, dtype=complex) / 4
    entries[0, 3] = 1j
    with pytest.raises(InvalidOperatorError):
        npt_service.pt_spectrum_numeric(BipartiteOperator(dim=2, entries=entries))
