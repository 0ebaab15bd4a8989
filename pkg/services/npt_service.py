import math
from typing import List

import numpy as np

from models import BipartiteOperator, DephasingSpec, PtReport, WernerParams
from services.state_service import StateService
from utils.errors import InvalidOperatorError, UnsupportedDimensionError
from utils.linalg import hermitian_eigvalsh, partial_transpose_matrix
from utils.logger import setup_logger
from config import settings, SUPPORTED_DIMENSIONS


class NptService:
    """部分转置判据服务类"""

    def __init__(self, state_service: StateService = None):
        self.logger = setup_logger("npt_service")
        self.state_service = state_service or StateService()

    @staticmethod
    def _check_dimension(d: int):
        if d not in SUPPORTED_DIMENSIONS:
            raise UnsupportedDimensionError(f"解析公式只支持 d ∈ {SUPPORTED_DIMENSIONS}，当前为 {d}")

    def partial_transpose(self, op: BipartiteOperator) -> BipartiteOperator:
        """对模式B做部分转置"""
        return BipartiteOperator(dim=op.dim, entries=partial_transpose_matrix(op.entries, op.dim))

    def _warn_if_phase_sensitive(self, spec: DephasingSpec):
        # d=3 的闭式谱只依赖模长，要求 λ(2)·conj(λ(1))² 为非负实数
        invariant = spec.lam(2) * spec.lam(1).conjugate() ** 2
        if abs(invariant.imag) > settings.imag_tol or invariant.real < -settings.imag_tol:
            self.logger.warning(
                f"λ(2)·conj(λ(1))² = {invariant:.6g} 不是非负实数，闭式谱不精确，请以数值谱为准"
            )

    def pt_eigenvalues_analytic(self, params: WernerParams, spec: DephasingSpec) -> List[float]:
        """部分转置后的解析本征值（升序）"""
        self._check_dimension(params.d)
        norm, alpha = params.norm, params.alpha
        l01 = spec.modulus(1)

        if params.d == 2:
            values = [
                norm,
                norm,
                norm * (1 - alpha + alpha * l01),
                norm * (1 - alpha - alpha * l01),
            ]
        else:
            self._warn_if_phase_sensitive(spec)
            l02 = spec.modulus(2)
            root = math.sqrt(8 * l01 ** 2 + l02 ** 2)
            values = [norm] * 6 + [
                norm * (1 - alpha + alpha * l02),
                norm / 2 * (2 - 2 * alpha - alpha * l02 - alpha * root),
                norm / 2 * (2 - 2 * alpha - alpha * l02 + alpha * root),
            ]
        return sorted(values)

    def pt_spectrum_numeric(self, op: BipartiteOperator) -> np.ndarray:
        """部分转置后的数值本征值（升序）"""
        asymmetry = op.asymmetry()
        if asymmetry > settings.hermitian_tol:
            raise InvalidOperatorError(f"输入算符不是厄米的，偏差 {asymmetry:.3e}")
        return hermitian_eigvalsh(partial_transpose_matrix(op.entries, op.dim))

    def pt_min_eigenvalue_numeric(self, op: BipartiteOperator) -> float:
        """部分转置后的最小本征值（稠密厄米对角化）"""
        return float(self.pt_spectrum_numeric(op)[0])

    def alpha_pt_threshold(self, d: int, spec: DephasingSpec) -> float:
        """部分转置为负的 α 下界"""
        self._check_dimension(d)
        l01 = spec.modulus(1)
        if d == 2:
            return 1.0 / (1.0 + l01)
        l02 = spec.modulus(2)
        return 2.0 / (2.0 + l02 + math.sqrt(8 * l01 ** 2 + l02 ** 2))

    def gaussian_alpha_pt(self, d: int, delta: float) -> float:
        """高斯退相干下的部分转置阈值"""
        return self.alpha_pt_threshold(d, self.state_service.gaussian_spec(delta, d))

    def pt_report(self, params: WernerParams, spec: DephasingSpec) -> PtReport:
        """数值谱 + 解析阈值"""
        rho = self.state_service.apply_dephasing(params, spec)
        report = PtReport.from_eigenvalues(
            self.pt_spectrum_numeric(rho),
            alpha_pt=self.alpha_pt_threshold(params.d, spec),
        )
        self.logger.info(
            f"PT判据 d={params.d}, α={params.alpha}: 最小本征值 {report.min_eigenvalue:.6g}, "
            f"NPT={report.is_npt}, α_PT={report.alpha_pt:.6g}"
        )
        return report
