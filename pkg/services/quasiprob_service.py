import math
import time
from typing import Any, Dict, List, Tuple

import numpy as np
from scipy import linalg

from models import (
    BipartiteOperator,
    DephasingSpec,
    GramSystem,
    QuasiProbDistribution,
    QuasiProbEntry,
    SeparabilityEigenpair,
    WernerParams,
)
from services.npt_service import NptService
from services.sep_service import SepService
from services.state_service import StateService
from utils.errors import (
    InconsistentSystemError,
    InvalidDistributionError,
    InvalidRangeError,
    MissingSolutionsError,
    SolverDisagreementError,
    UnsupportedCoefficientError,
    UnsupportedDimensionError,
)
from utils.logger import setup_logger, log_performance
from config import settings, SUPPORTED_DIMENSIONS

INV_PHI = (math.sqrt(5) - 1) / 2  # 1 / phi
INV_PHI_SQUARE = (3 - math.sqrt(5)) / 2  # 1 / phi^2


class QuasiProbService:
    """纠缠准概率服务类"""

    def __init__(
        self,
        state_service: StateService = None,
        npt_service: NptService = None,
        sep_service: SepService = None
    ):
        self.logger = setup_logger("quasiprob_service")
        self.state_service = state_service or StateService()
        self.npt_service = npt_service or NptService(self.state_service)
        self.sep_service = sep_service or SepService()

    def support_pairs(self, params: WernerParams, spec: DephasingSpec) -> List[SeparabilityEigenpair]:
        """优化分布的支撑：d=2 为 |0,1⟩、|1,0⟩ 加非平凡解，d=3 只用非平凡解"""
        nontrivial = self.sep_service.nontrivial_sep_pairs(params, spec)
        if params.d == 2:
            trivial = [
                pair for pair in self.sep_service.trivial_sep_pairs(params)
                if pair.vector.indices[0] != pair.vector.indices[1]
            ]
            return trivial + nontrivial
        return nontrivial

    def build_gram_system(self, pairs: List[SeparabilityEigenpair]) -> GramSystem:
        """G_ij = |⟨a_i|a_j⟩|²·|⟨b_i|b_j⟩|²"""
        if not pairs:
            raise MissingSolutionsError("可分离本征解列表为空")
        dims = {pair.vector.dim for pair in pairs}
        if len(dims) != 1:
            raise InvalidDistributionError(f"本征解维度不一致: {sorted(dims)}")

        a = np.array([pair.vector.a.amplitudes for pair in pairs])
        b = np.array([pair.vector.b.amplitudes for pair in pairs])
        gram = np.abs(a.conj() @ a.T) ** 2 * np.abs(b.conj() @ b.T) ** 2
        gram = (gram + gram.T) / 2
        np.fill_diagonal(gram, 1.0)
        g = np.array([pair.g for pair in pairs], dtype=float)

        values, vectors = linalg.eigh(gram)
        threshold = settings.kernel_rel_threshold * values[-1]
        kernel_basis = vectors[:, values < threshold].T

        self.logger.debug(f"Gram矩阵 {len(pairs)}×{len(pairs)}，核维数 {kernel_basis.shape[0]}")
        return GramSystem(
            vectors=[pair.vector for pair in pairs],
            G=gram,
            g=g,
            kernel_basis=kernel_basis,
        )

    @staticmethod
    def project_out_kernel(p: np.ndarray, kernel_basis: np.ndarray) -> np.ndarray:
        """P = p − Σ_k (p0kᵀp)/(p0kᵀp0k)·p0k"""
        projected = np.array(p, dtype=float, copy=True)
        for p0 in kernel_basis:
            projected = projected - (p0 @ projected) / (p0 @ p0) * p0
        return projected

    def solve_quasiprob(self, system: GramSystem) -> QuasiProbDistribution:
        """求 G·p = g 的最小范数解"""
        start_time = time.perf_counter()

        particular, _, _, _ = linalg.lstsq(system.G, system.g)
        residual = float(np.linalg.norm(system.G @ particular - system.g))
        if residual > settings.range_residual_tol:
            raise InconsistentSystemError(residual)

        projected = self.project_out_kernel(particular, system.kernel_basis)

        # 伪逆求解作为独立对照
        pseudo_inverse = linalg.pinvh(system.G, rtol=settings.kernel_rel_threshold)
        minimal = pseudo_inverse @ system.g
        disagreement = float(np.max(np.abs(projected - minimal)))
        if disagreement > settings.solver_agreement_tol:
            raise SolverDisagreementError(disagreement)

        log_performance("solve_quasiprob", time.perf_counter() - start_time, {
            "size": system.size,
            "kernel_dim": system.kernel_dim,
            "residual": residual,
        })
        return QuasiProbDistribution(entries=[
            QuasiProbEntry(vector=vector, weight=float(weight))
            for vector, weight in zip(system.vectors, projected)
        ])

    def gram_distribution(self, params: WernerParams, spec: DephasingSpec) -> QuasiProbDistribution:
        """在解析支撑上数值求解的准概率分布"""
        return self.solve_quasiprob(self.build_gram_system(self.support_pairs(params, spec)))

    @staticmethod
    def _real_lambda(spec: DephasingSpec, k: int) -> float:
        value = spec.lam(k)
        if abs(value.imag) > settings.imag_tol:
            raise UnsupportedCoefficientError(f"解析准概率要求 λ 为实数，λ({k}) = {value}")
        return float(value.real)

    def qubit_distribution_analytic(self, params: WernerParams, spec: DephasingSpec) -> QuasiProbDistribution:
        """两比特的10项准概率分布"""
        if params.d != 2:
            raise UnsupportedDimensionError(f"两比特分布要求 d=2，当前为 {params.d}")
        norm, alpha = params.norm, params.alpha
        lam = self._real_lambda(spec, 1)
        weights = {
            "trivial": norm * alpha,
            "parallel": norm / 2 * (1 - alpha * (1 + lam)),
            "perp": norm / 2 * (1 - alpha * (1 - lam)),
        }
        return QuasiProbDistribution(entries=[
            QuasiProbEntry(vector=pair.vector, weight=weights[pair.vector.family])
            for pair in self.support_pairs(params, spec)
        ])

    def qutrit_distribution_analytic(self, params: WernerParams, spec: DephasingSpec) -> QuasiProbDistribution:
        """两个三能级系统的48项准概率分布"""
        if params.d != 3:
            raise UnsupportedDimensionError(f"三能级分布要求 d=3，当前为 {params.d}")
        norm, alpha = params.norm, params.alpha
        lambdas = {k: self._real_lambda(spec, k) for k in (1, 2)}
        cross_weight = norm * (1 + alpha) / 8

        entries = []
        for pair in self.support_pairs(params, spec):
            family = pair.vector.family
            if family in ("parallel", "perp"):
                j, k, _ = pair.vector.indices
                lam = lambdas[k - j]
                sign = 1 if family == "parallel" else -1
                weight = norm / 4 * (1 - alpha * (1 + sign * 2 * lam))
            else:
                weight = cross_weight
            entries.append(QuasiProbEntry(vector=pair.vector, weight=weight))
        return QuasiProbDistribution(entries=entries)

    def analytic_distribution(self, params: WernerParams, spec: DephasingSpec) -> QuasiProbDistribution:
        if params.d == 2:
            return self.qubit_distribution_analytic(params, spec)
        if params.d == 3:
            return self.qutrit_distribution_analytic(params, spec)
        raise UnsupportedDimensionError(f"解析准概率只支持 d ∈ {SUPPORTED_DIMENSIONS}，当前为 {params.d}")

    def alpha_qp_threshold(self, d: int, spec: DephasingSpec) -> float:
        """准概率出现负值的 α 下界"""
        if d == 2:
            return 1.0 / (1.0 + spec.modulus(1))
        if d == 3:
            # |λ02| > |λ01| 时由对称性取较大者
            return 1.0 / (1.0 + 2.0 * max(spec.modulus(1), spec.modulus(2)))
        raise UnsupportedDimensionError(f"准概率阈值只支持 d ∈ {SUPPORTED_DIMENSIONS}，当前为 {d}")

    def gaussian_alpha_qp(self, d: int, delta: float) -> float:
        return self.alpha_qp_threshold(d, self.state_service.gaussian_spec(delta, d))

    def bound_entanglement_interval(self, delta: float) -> Tuple[float, float]:
        """α_QP < α ≤ α_PT 的束缚纠缠区间（d=3，高斯退相干）"""
        spec = self.state_service.gaussian_spec(delta, 3)
        return self.alpha_qp_threshold(3, spec), self.npt_service.alpha_pt_threshold(3, spec)

    def interval_width(self, delta: float) -> float:
        lower, upper = self.bound_entanglement_interval(delta)
        return upper - lower

    def find_max_interval_delta(self, search_lo: float, search_hi: float, tol: float = None) -> float:
        """黄金分割搜索束缚纠缠区间最宽的 δ"""
        tol = settings.golden_tol if tol is None else tol
        if not (0 <= search_lo < search_hi) or tol <= 0:
            raise InvalidRangeError(f"搜索区间不合法: [{search_lo}, {search_hi}], tol={tol}")

        a, b = search_lo, search_hi
        h = b - a
        c = a + INV_PHI_SQUARE * h
        d = a + INV_PHI * h
        yc = self.interval_width(c)
        yd = self.interval_width(d)

        while h > tol:
            if yc > yd:
                b = d
                d = c
                yd = yc
                h = INV_PHI * h
                c = a + INV_PHI_SQUARE * h
                yc = self.interval_width(c)
            else:
                a = c
                c = d
                yc = yd
                h = INV_PHI * h
                d = a + INV_PHI * h
                yd = self.interval_width(d)

        estimate = (a + b) / 2
        best = self.interval_width(estimate)
        # 区间内无极大值时返回端点
        for endpoint in (search_lo, search_hi):
            if self.interval_width(endpoint) > best:
                estimate, best = endpoint, self.interval_width(endpoint)

        self.logger.info(f"束缚纠缠区间最宽处 δ* = {estimate:.6f}，宽度 {best:.6f}")
        return estimate

    def reconstruct_state(self, dist: QuasiProbDistribution) -> BipartiteOperator:
        """ρ = Σ p_i |a_i⟩⟨a_i| ⊗ |b_i⟩⟨b_i|"""
        if not dist.entries:
            raise InvalidDistributionError("准概率分布为空")
        dims = {entry.vector.dim for entry in dist.entries}
        if len(dims) != 1:
            raise InvalidDistributionError(f"分布中乘积态维度不一致: {sorted(dims)}")

        d = dims.pop()
        vectors = np.array([entry.vector.amplitudes for entry in dist.entries])
        weights = dist.weights
        rho = (vectors.T * weights) @ vectors.conj()
        return BipartiteOperator(dim=d, entries=rho)

    def distribution_summary(self, dist: QuasiProbDistribution, d: int, spec: DephasingSpec) -> Dict[str, Any]:
        min_weight = dist.min_weight
        return {
            "min_weight": min_weight,
            "is_entangled": bool(min_weight < -settings.imag_tol),
            "alpha_qp": self.alpha_qp_threshold(d, spec),
            "alpha_pt": self.npt_service.alpha_pt_threshold(d, spec),
        }
