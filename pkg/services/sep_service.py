import time
from itertools import combinations
from typing import List, Optional

import numpy as np

from models import (
    BipartiteOperator,
    DephasingSpec,
    Ket,
    ProductVector,
    SeparabilityEigenpair,
    SepResidual,
    WernerParams,
)
from utils.errors import (
    InvalidIndexError,
    InvalidOperatorError,
    InvalidParameterError,
    MissingSolutionsError,
    UnsupportedCoefficientError,
    UnsupportedDimensionError,
)
from utils.linalg import (
    contract_with_a,
    contract_with_b,
    expectation_value,
    principal_eigenvector,
    product_amplitudes,
    random_ket,
)
from utils.logger import setup_logger, log_performance
from config import settings, SUPPORTED_DIMENSIONS


class SepService:
    """可分离本征值问题服务类"""

    def __init__(self):
        self.logger = setup_logger("sep_service")

    @staticmethod
    def _check_dimension(d: int):
        # d>3 可能需要额外的可分离本征向量
        if d not in SUPPORTED_DIMENSIONS:
            raise UnsupportedDimensionError(f"解析本征向量族只支持 d ∈ {SUPPORTED_DIMENSIONS}，当前为 {d}")

    def superposition_ket(self, j: int, k: int, l: int, d: int) -> Ket:
        """|s^l_jk⟩ = (|j⟩ + i^l|k⟩)/√2"""
        if not (0 <= j < k < d):
            raise InvalidIndexError(f"要求 0 ≤ j < k < d，当前 j={j}, k={k}, d={d}")
        if l not in (0, 1, 2, 3):
            raise InvalidIndexError(f"l 必须在 0..3 之间，当前为 {l}")
        amplitudes = np.zeros(d, dtype=complex)
        amplitudes[j] = 1.0
        amplitudes[k] = 1j ** l
        return Ket(dim=d, amplitudes=amplitudes / np.sqrt(2.0))

    def trivial_sep_pairs(self, params: WernerParams) -> List[SeparabilityEigenpair]:
        """平凡解 |i,j⟩，g_ij = N(1 − δ_ij α)"""
        self._check_dimension(params.d)
        d = params.d
        pairs = []
        for i in range(d):
            for j in range(d):
                g = params.norm * (1 - (params.alpha if i == j else 0.0))
                vector = ProductVector(family="trivial", indices=(i, j), a=Ket.basis(i, d), b=Ket.basis(j, d))
                pairs.append(SeparabilityEigenpair(vector=vector, g=g))
        return pairs

    def _real_lambda(self, spec: DephasingSpec, k: int) -> float:
        value = spec.lam(k)
        if abs(value.imag) > settings.imag_tol:
            raise UnsupportedCoefficientError(f"解析本征向量族要求 λ 为实数，λ({k}) = {value}")
        return float(value.real)

    def nontrivial_sep_pairs(
        self,
        params: WernerParams,
        spec: DephasingSpec
    ) -> List[SeparabilityEigenpair]:
        """非平凡解：平行、垂直及交叉乘积态"""
        self._check_dimension(params.d)
        d, norm, alpha = params.d, params.norm, params.alpha
        index_pairs = list(combinations(range(d), 2))
        lambdas = {(j, k): self._real_lambda(spec, j - k) for j, k in index_pairs}

        parallel, perpendicular, cross_left, cross_right = [], [], [], []
        for j, k in index_pairs:
            lam = lambdas[(j, k)]
            g_parallel = norm * (1 - alpha / 2 * (1 + lam))
            g_perp = norm * (1 - alpha / 2 * (1 - lam))
            for l in range(4):
                s = self.superposition_ket(j, k, l, d)
                s_flip = self.superposition_ket(j, k, (l + 2) % 4, d)
                parallel.append(SeparabilityEigenpair(
                    vector=ProductVector(family="parallel", indices=(j, k, l), a=s, b=s),
                    g=g_parallel,
                ))
                perpendicular.append(SeparabilityEigenpair(
                    vector=ProductVector(family="perp", indices=(j, k, l), a=s, b=s_flip),
                    g=g_perp,
                ))
                for m in range(d):
                    if m in (j, k):
                        continue
                    basis_m = Ket.basis(m, d)
                    cross_left.append(SeparabilityEigenpair(
                        vector=ProductVector(family="cross_left", indices=(j, k, l, m), a=s, b=basis_m),
                        g=norm,
                    ))
                    cross_right.append(SeparabilityEigenpair(
                        vector=ProductVector(family="cross_right", indices=(m, j, k, l), a=basis_m, b=s),
                        g=norm,
                    ))

        return parallel + perpendicular + cross_left + cross_right

    def analytic_sep_pairs(self, params: WernerParams, spec: DephasingSpec) -> List[SeparabilityEigenpair]:
        """平凡解在前，非平凡解在后"""
        return self.trivial_sep_pairs(params) + self.nontrivial_sep_pairs(params, spec)

    @staticmethod
    def expectation(op: BipartiteOperator, vector: ProductVector) -> float:
        """⟨a,b|L|a,b⟩"""
        return expectation_value(op.entries, vector.amplitudes)

    def verify_sep_pair(self, op: BipartiteOperator, pair: SeparabilityEigenpair) -> SepResidual:
        """L|a,b⟩ = g|a,b⟩ + |χ⟩，检查 χ 与 |a⟩、|b⟩ 双正交"""
        d = op.dim
        if pair.vector.dim != d:
            raise InvalidOperatorError(f"算符维度 {d} 与乘积态维度 {pair.vector.dim} 不一致")

        psi = pair.vector.amplitudes
        image = op.entries @ psi
        g_estimate = float(np.real(np.vdot(psi, image)))
        chi = image - g_estimate * psi

        chi_matrix = chi.reshape(d, d)
        left = pair.vector.a.amplitudes.conj() @ chi_matrix
        right = chi_matrix @ pair.vector.b.amplitudes.conj()
        return SepResidual(
            g_estimate=g_estimate,
            chi=chi,
            left_overlap_norm=float(np.linalg.norm(left)),
            right_overlap_norm=float(np.linalg.norm(right)),
        )

    @staticmethod
    def g_max(pairs: List[SeparabilityEigenpair]) -> float:
        if not pairs:
            raise MissingSolutionsError("可分离本征解列表为空")
        return max(pair.g for pair in pairs)

    def witness_from_gmax(self, op: BipartiteOperator, pairs: List[SeparabilityEigenpair]) -> BipartiteOperator:
        """最优纠缠见证 W = g_max·1 − L"""
        g_max = self.g_max(pairs)
        size = op.dim ** 2
        return BipartiteOperator(dim=op.dim, entries=g_max * np.eye(size) - op.entries)

    @staticmethod
    def witness_expectation(witness: BipartiteOperator, state: BipartiteOperator) -> float:
        """Tr(W·ρ)，为负即证明纠缠"""
        return float(np.real(np.trace(witness.entries @ state.entries)))

    def _seesaw_run(self, op: BipartiteOperator, a: np.ndarray, b: np.ndarray, iters: int):
        d = op.dim
        g_prev = expectation_value(op.entries, product_amplitudes(a, b))
        for iteration in range(1, iters + 1):
            _, a, _ = principal_eigenvector(contract_with_b(op.entries, d, b), a, settings.degeneracy_gap)
            _, b, _ = principal_eigenvector(contract_with_a(op.entries, d, a), b, settings.degeneracy_gap)
            g = expectation_value(op.entries, product_amplitudes(a, b))
            if abs(g - g_prev) < settings.seesaw_tol:
                return a, b, g, True, iteration
            g_prev = g
        return a, b, g, False, iters

    @staticmethod
    def _is_duplicate(found: List[SeparabilityEigenpair], a: np.ndarray, b: np.ndarray) -> bool:
        bound = 1 - settings.duplicate_overlap_tol
        for pair in found:
            if (abs(np.vdot(pair.vector.a.amplitudes, a)) > bound
                    and abs(np.vdot(pair.vector.b.amplitudes, b)) > bound):
                return True
        return False

    def seesaw_sep_solver(
        self,
        op: BipartiteOperator,
        starts: int = None,
        iters: int = None,
        seed: Optional[int] = None
    ) -> List[SeparabilityEigenpair]:
        """交替求主本征向量的数值解法，按 g 降序返回互不相同的解"""
        starts = settings.seesaw_starts if starts is None else starts
        iters = settings.seesaw_iters if iters is None else iters
        if starts < 1 or iters < 1:
            raise InvalidParameterError("starts 与 iters 必须不小于1")
        asymmetry = op.asymmetry()
        if asymmetry > settings.hermitian_tol:
            raise InvalidOperatorError(f"输入算符不是厄米的，偏差 {asymmetry:.3e}")

        start_time = time.perf_counter()
        rng = np.random.default_rng(settings.random_seed if seed is None else seed)
        d = op.dim
        found: List[SeparabilityEigenpair] = []
        failures = 0

        for index in range(starts):
            a, b, g, converged, used = self._seesaw_run(op, random_ket(rng, d), random_ket(rng, d), iters)
            if not converged:
                failures += 1
                self.logger.warning(f"第 {index} 个初值在 {used} 次迭代后未收敛，g = {g:.12g}")
            if self._is_duplicate(found, a, b):
                continue
            vector = ProductVector(
                family="numeric",
                indices=(index,),
                a=Ket(dim=d, amplitudes=a / np.linalg.norm(a)),
                b=Ket(dim=d, amplitudes=b / np.linalg.norm(b)),
            )
            found.append(SeparabilityEigenpair(vector=vector, g=g, converged=converged))

        found.sort(key=lambda pair: -pair.g)
        log_performance("seesaw_sep_solver", time.perf_counter() - start_time, {
            "dim": d,
            "starts": starts,
            "distinct": len(found),
            "not_converged": failures,
        })
        return found
