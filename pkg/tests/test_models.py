import numpy as np
import pytest
from pydantic import ValidationError

from models import (
    BipartiteOperator,
    DephasingSpec,
    Ket,
    OracleReport,
    ProductVector,
    PtReport,
    RunConfig,
    ScanGrid,
    SeparabilityEigenpair,
    WernerParams,
)
from utils.errors import IncompleteSpecError


class TestWernerParams:

    def test_norm(self):
        params = WernerParams(d=2, alpha=0.8)
        assert params.norm == pytest.approx(1 / 2.4)

    @pytest.mark.parametrize("d, alpha", [(1, 0.5), (3, 1.5), (3, -1.01)])
    def test_rejects_out_of_range(self, d, alpha):
        with pytest.raises(ValidationError):
            WernerParams(d=d, alpha=alpha)

    def test_entangled_without_dephasing(self):
        assert WernerParams(d=3, alpha=0.34).entangled_without_dephasing
        assert not WernerParams(d=2, alpha=0.5).entangled_without_dephasing

    def test_frozen(self):
        params = WernerParams(d=2, alpha=0.1)
        with pytest.raises(ValidationError):
            params.alpha = 0.2


class TestDephasingSpec:

    def test_negative_differences_are_conjugates(self):
        spec = DephasingSpec(coefficients={0: 1, 1: 0.5j})
        assert spec.lam(-1) == pytest.approx(-0.5j)
        assert spec.lam_mn(0, 1) == pytest.approx(-0.5j)

    def test_lambda_zero_must_be_one(self):
        with pytest.raises(ValidationError):
            DephasingSpec(coefficients={0: 0.9, 1: 0.5})

    def test_modulus_bounded(self):
        with pytest.raises(ValidationError):
            DephasingSpec(coefficients={0: 1, 1: 1.2})

    def test_gaussian_needs_delta(self):
        with pytest.raises(ValidationError):
            DephasingSpec(coefficients={0: 1, 1: 0.5}, source="gaussian")

    def test_missing_difference(self):
        spec = DephasingSpec(coefficients={0: 1, 1: 0.5})
        assert spec.covers(2)
        assert not spec.covers(3)
        with pytest.raises(IncompleteSpecError):
            spec.lam(2)


class TestBipartiteOperator:

    def test_entries_are_read_only(self):
        op = BipartiteOperator(dim=2, entries=np.eye(4) / 4)
        with pytest.raises(ValueError):
            op.entries[0, 0] = 1.0

    def test_shape_checked(self):
        with pytest.raises(ValidationError):
            BipartiteOperator(dim=2, entries=np.eye(3))

    def test_dict_round_trip(self):
        rng = np.random.default_rng(0)
        entries = rng.standard_normal((9, 9)) + 1j * rng.standard_normal((9, 9))
        op = BipartiteOperator(dim=3, entries=entries)
        restored = BipartiteOperator.from_dict(op.to_dict())
        np.testing.assert_array_equal(restored.entries, op.entries)


class TestKet:

    def test_unit_norm_required(self):
        with pytest.raises(ValidationError):
            Ket(dim=2, amplitudes=[1.0, 1.0])

    def test_product_label_and_amplitudes(self):
        vector = ProductVector(family="trivial", indices=(0, 1), a=Ket.basis(0, 2), b=Ket.basis(1, 2))
        assert vector.label == "trivial(0,1)"
        np.testing.assert_array_equal(vector.amplitudes, [0, 1, 0, 0])

    def test_eigenpair_dict(self):
        vector = ProductVector(family="numeric", indices=(3,), a=Ket.basis(1, 2), b=Ket.basis(0, 2))
        assert SeparabilityEigenpair(vector=vector, g=0.25).to_dict() == {
            "label": "numeric(3)",
            "a": [[0.0, 0.0], [1.0, 0.0]],
            "b": [[1.0, 0.0], [0.0, 0.0]],
            "g": 0.25,
        }
        assert SeparabilityEigenpair(vector=vector, g=0.25, converged=False).to_dict()["converged"] is False


def test_pt_report_consistency():
    report = PtReport.from_eigenvalues([0.8, -0.1, 0.3], alpha_pt=0.5)
    assert report.eigenvalues == [-0.1, 0.3, 0.8]
    assert report.is_npt
    with pytest.raises(ValidationError):
        PtReport(eigenvalues=[1.0], min_eigenvalue=1.0, is_npt=True, alpha_pt=0.5)


def test_pt_report_requires_unit_sum():
    with pytest.raises(ValidationError):
        PtReport.from_eigenvalues([0.3, -0.1, 0.2], alpha_pt=0.5)
    assert PtReport.from_eigenvalues([0.25] * 4, alpha_pt=0.5).min_eigenvalue == 0.25


class TestOracleReport:

    def test_passed_follows_tolerance(self):
        assert OracleReport(check_name="x", samples=1, max_violation=1e-13, tolerance=1e-12).passed
        assert not OracleReport(check_name="x", samples=1, max_violation=1e-12, tolerance=1e-12).passed

    def test_merge_keeps_worst(self):
        reports = [
            OracleReport(check_name="a", samples=2, max_violation=1e-14, tolerance=1e-10, details={"d": 2}),
            OracleReport(check_name="b", samples=3, max_violation=1e-11, tolerance=1e-10, details={"d": 3}),
        ]
        merged = OracleReport.merge("combined", reports)
        assert merged.samples == 5
        assert merged.max_violation == 1e-11
        assert merged.details == {"worst": "b", "d": 3}


class TestRunConfig:

    @pytest.mark.parametrize("command", ["state", "ppt", "quasiprob"])
    def test_requires_dephasing_source(self, command):
        with pytest.raises(ValidationError):
            RunConfig(command=command)

    def test_scan_needs_no_dephasing_source(self):
        config = RunConfig(command="bound-region")
        assert config.delta is None
        assert config.lambdas is None

    def test_rejects_both_sources(self):
        with pytest.raises(ValidationError):
            RunConfig(command="state", delta=1.0, lambdas=["0.5"])

    def test_parses_complex_lambdas(self):
        config = RunConfig(command="ppt", lambdas=["0.5", "0.1+0.2j"])
        assert config.lambdas == [0.5, complex(0.1, 0.2)]

    def test_grid_validation(self):
        with pytest.raises(ValidationError):
            ScanGrid(lo=1.0, hi=0.5)
        with pytest.raises(ValidationError):
            ScanGrid(steps=1)
        assert len(ScanGrid(lo=0, hi=3, steps=301).points()) == 301
