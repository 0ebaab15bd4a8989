import math
from typing import Callable, Mapping, Optional, Sequence, Union

import numpy as np

from models import BipartiteOperator, DephasingSource, DephasingSpec, WernerParams
from utils.errors import (
    IncompleteSpecError,
    InvalidDimensionError,
    InvalidOperatorError,
    InvalidParameterError,
    NormalizationError,
)
from utils.logger import setup_logger
from config import settings

PhaseDistribution = Union[Callable[[np.ndarray, np.ndarray], np.ndarray], np.ndarray]


class StateService:
    """Werner态与退相干信道服务类"""

    def __init__(self):
        self.logger = setup_logger("state_service")

    def make_swap(self, d: int) -> BipartiteOperator:
        """交换算符 Ŝ = Σ|i,j⟩⟨j,i|"""
        if d < 2:
            raise InvalidDimensionError(f"维度必须不小于2，当前为 {d}")

        swap = np.zeros((d * d, d * d), dtype=int)
        for i in range(d):
            for j in range(d):
                swap[i * d + j, j * d + i] = 1
        return BipartiteOperator(dim=d, entries=swap)

    def make_werner(self, params: WernerParams) -> BipartiteOperator:
        """ρ_W = N(α)(1 − αŜ)"""
        d = params.d
        swap = self.make_swap(d).entries
        rho = params.norm * (np.eye(d * d) - params.alpha * swap)
        return BipartiteOperator(dim=d, entries=rho)

    @staticmethod
    def undephased_entanglement_bound(d: int) -> float:
        """无退相干时 α > 1/d 即纠缠"""
        if d < 2:
            raise InvalidDimensionError(f"维度必须不小于2，当前为 {d}")
        return 1.0 / d

    @staticmethod
    def gaussian_lambda(delta: float, m: int, n: int) -> float:
        """λ_mn = exp(−δ²(m−n)²/2)"""
        if delta < 0:
            raise InvalidParameterError(f"高斯宽度不能为负: {delta}")
        return math.exp(-(delta ** 2) * (m - n) ** 2 / 2.0)

    def gaussian_spec(self, delta: float, d: int) -> DephasingSpec:
        """第二个模式上的高斯退相干"""
        coefficients = {k: self.gaussian_lambda(delta, k, 0) for k in range(d)}
        coefficients[0] = 1.0
        return DephasingSpec(coefficients=coefficients, source=DephasingSource.GAUSSIAN, delta=delta)

    @staticmethod
    def fully_dephased_spec(d: int) -> DephasingSpec:
        """δ→∞ 极限：非对角系数全部为0"""
        coefficients = {k: (1.0 if k == 0 else 0.0) for k in range(d)}
        return DephasingSpec(coefficients=coefficients, source=DephasingSource.EXPLICIT)

    @staticmethod
    def explicit_spec(values: Union[Sequence[complex], Mapping[int, complex]]) -> DephasingSpec:
        """显式给出 λ(1), λ(2), ...；映射形式按差值给出"""
        if isinstance(values, Mapping):
            coefficients = {int(k): complex(v) for k, v in values.items()}
        else:
            coefficients = {k + 1: complex(v) for k, v in enumerate(values)}
        coefficients[0] = 1.0
        return DephasingSpec(coefficients=coefficients, source=DephasingSource.EXPLICIT)

    @staticmethod
    def phase_grid(resolution: int) -> np.ndarray:
        """[0, 2π) 上的均匀网格（不含端点）"""
        return np.arange(resolution) * (2.0 * np.pi / resolution)

    @staticmethod
    def wrapped_gaussian_density(phi: np.ndarray, delta: float) -> np.ndarray:
        """包裹高斯相位分布 p_B(φ)"""
        if delta <= 0:
            raise InvalidParameterError("包裹高斯分布要求 delta > 0，delta = 0 请使用集中网格")
        # 6σ 以外的尾部低于 1e-12
        k_max = math.ceil(6.0 * delta / (2.0 * math.pi)) + 2
        phi = np.asarray(phi, dtype=float)
        density = np.zeros_like(phi)
        for k in range(-k_max, k_max + 1):
            density += np.exp(-((phi + 2.0 * math.pi * k) ** 2) / (2.0 * delta ** 2))
        return density / math.sqrt(2.0 * math.pi * delta ** 2)

    @staticmethod
    def _resolution(resolution: Optional[int]) -> int:
        resolution = settings.quadrature_resolution if resolution is None else resolution
        if resolution < 64:
            raise InvalidParameterError(f"积分分辨率至少为64，当前为 {resolution}")
        return resolution

    def mode_b_gaussian_grid(self, delta: float, resolution: int = None) -> np.ndarray:
        """δ(φa)·p_B(φb) 在积分网格上的取值，δ(φa) 集中在 φa = 0"""
        resolution = self._resolution(resolution)
        step = 2.0 * math.pi / resolution
        phi = self.phase_grid(resolution)
        grid = np.zeros((resolution, resolution))
        if delta == 0:
            grid[0, 0] = 1.0 / step ** 2
        else:
            grid[0, :] = self.wrapped_gaussian_density(phi, delta) / step
        return grid

    def _sample_distribution(self, p: PhaseDistribution, resolution: int) -> np.ndarray:
        if callable(p):
            phi = self.phase_grid(resolution)
            phi_a, phi_b = np.meshgrid(phi, phi, indexing="ij")
            values = np.asarray(p(phi_a, phi_b), dtype=float)
        else:
            values = np.asarray(p, dtype=float)
        if values.shape != (resolution, resolution):
            raise InvalidParameterError(f"相位分布网格形状 {values.shape} 与分辨率 {resolution} 不符")
        if np.any(values < 0):
            raise InvalidParameterError("相位分布出现负值")
        return values

    def lambda_from_phase_distribution(
        self,
        p: PhaseDistribution,
        m: int,
        n: int,
        resolution: int = None
    ) -> complex:
        """对相位分布做二重梯形积分得到 λ_mn"""
        resolution = self._resolution(resolution)

        values = self._sample_distribution(p, resolution)
        step = 2.0 * math.pi / resolution
        weight = step ** 2

        integral = float(values.sum() * weight)
        if abs(integral - 1.0) > settings.normalization_tol:
            raise NormalizationError(integral)

        phi = self.phase_grid(resolution)
        phase_a = np.exp(1j * phi * (m - n))
        phase_b = np.exp(-1j * phi * (m - n))
        return complex(phase_a @ values @ phase_b * weight)

    def spec_from_phase_distribution(
        self,
        p: PhaseDistribution,
        d: int,
        resolution: int = None
    ) -> DephasingSpec:
        """由相位分布数值积分得到退相干系数"""
        resolution = self._resolution(resolution)
        values = self._sample_distribution(p, resolution)
        coefficients = {
            k: self.lambda_from_phase_distribution(values, k, 0, resolution) for k in range(1, d)
        }
        coefficients[0] = 1.0
        self.logger.debug(f"数值积分退相干系数: {coefficients}")
        return DephasingSpec(
            coefficients=coefficients,
            source=DephasingSource.QUADRATURE,
            resolution=resolution,
        )

    def apply_dephasing(self, params: WernerParams, spec: DephasingSpec) -> BipartiteOperator:
        """ρ_W,deph = N(α)(1 − α Σ λ_mn |m,n⟩⟨n,m|)"""
        d = params.d
        if not spec.covers(d):
            raise IncompleteSpecError(
                f"退相干系数只覆盖到差值 {spec.max_difference}，维度 {d} 需要到 {d - 1}"
            )

        dephased_swap = np.zeros((d * d, d * d), dtype=complex)
        for m in range(d):
            for n in range(d):
                dephased_swap[m * d + n, n * d + m] = spec.lam_mn(m, n)

        rho = params.norm * (np.eye(d * d) - params.alpha * dephased_swap)
        return BipartiteOperator(dim=d, entries=rho)

    @staticmethod
    def validate_density_operator(op: BipartiteOperator, tol: float = 1e-12) -> None:
        """检查迹为1、厄米且半正定"""
        if not op.is_hermitian(tol):
            raise InvalidOperatorError(f"算符不是厄米的，偏差 {op.asymmetry():.3e}")
        trace = op.trace()
        if abs(trace - 1.0) > tol:
            raise InvalidOperatorError(f"迹不为1: {trace:.15g}")
        smallest = float(op.eigenvalues()[0])
        if smallest < -1e-10:
            raise InvalidOperatorError(f"存在负本征值: {smallest:.3e}")
