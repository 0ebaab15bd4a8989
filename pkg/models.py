from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, computed_field, field_validator, model_validator

from config import settings
from utils.errors import IncompleteSpecError
from utils.linalg import basis_vector, hermitian_asymmetry, hermitian_eigvalsh, product_amplitudes


def _readonly(value: Any, dtype=complex) -> np.ndarray:
    """复制为只读数组"""
    array = np.array(value, dtype=dtype, copy=True)
    array.setflags(write=False)
    return array


def complex_pairs(values: np.ndarray) -> List[List[float]]:
    """按行优先展开为 [[re, im], ...]"""
    flat = np.asarray(values, dtype=complex).ravel()
    return [[float(z.real), float(z.imag)] for z in flat]


class WernerParams(BaseModel):
    """Werner态参数"""
    model_config = ConfigDict(frozen=True)

    d: int = Field(ge=2)
    alpha: float = Field(ge=-1.0, le=1.0)

    @computed_field
    @property
    def norm(self) -> float:
        """归一化因子 N(α) = 1/(d² − α·d)"""
        return 1.0 / (self.d ** 2 - self.alpha * self.d)

    @property
    def entangled_without_dephasing(self) -> bool:
        return self.alpha > 1.0 / self.d


class DephasingSource(str, Enum):
    GAUSSIAN = "gaussian"
    EXPLICIT = "explicit"
    QUADRATURE = "quadrature"


class DephasingSpec(BaseModel):
    """退相干系数 λ(k)，k = m − n"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    coefficients: Dict[int, complex]
    source: DephasingSource = DephasingSource.EXPLICIT
    delta: Optional[float] = Field(default=None, ge=0)
    resolution: Optional[int] = Field(default=None, ge=64)

    @field_validator("coefficients", mode="before")
    @classmethod
    def _fill_negative_differences(cls, value):
        coefficients = {int(k): complex(v) for k, v in dict(value).items()}
        # λ(−k) = conj(λ(k))
        for k, v in list(coefficients.items()):
            coefficients.setdefault(-k, v.conjugate())
        return coefficients

    @model_validator(mode="after")
    def _check_invariants(self):
        if self.coefficients.get(0) != 1:
            raise ValueError("λ(0) 必须严格等于 1")
        for k, value in self.coefficients.items():
            if abs(value - self.coefficients[-k].conjugate()) > settings.imag_tol:
                raise ValueError(f"λ({-k}) 与 λ({k}) 不满足厄米共轭关系")
            if abs(value) > 1.0 + 1e-9:
                raise ValueError(f"|λ({k})| = {abs(value):.6g} 超过 1")
        if self.source == DephasingSource.GAUSSIAN and self.delta is None:
            raise ValueError("高斯退相干需要给出宽度 delta")
        if self.source == DephasingSource.QUADRATURE and self.resolution is None:
            raise ValueError("数值积分退相干需要给出分辨率 resolution")
        return self

    @property
    def max_difference(self) -> int:
        return max(self.coefficients)

    def covers(self, d: int) -> bool:
        return all(k in self.coefficients for k in range(d))

    def lam(self, k: int) -> complex:
        """λ(k)"""
        if k not in self.coefficients:
            raise IncompleteSpecError(f"缺少差值 {k} 的退相干系数")
        return self.coefficients[k]

    def lam_mn(self, m: int, n: int) -> complex:
        return self.lam(m - n)

    def modulus(self, k: int) -> float:
        return abs(self.lam(k))


class BipartiteOperator(BaseModel):
    """d²×d² 两体算符，|i,k⟩ 对应行 i·d + k"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    dim: int = Field(ge=1)
    entries: np.ndarray

    @field_validator("entries", mode="before")
    @classmethod
    def _as_matrix(cls, value):
        return _readonly(value)

    @model_validator(mode="after")
    def _check_shape(self):
        size = self.dim ** 2
        if self.entries.shape != (size, size):
            raise ValueError(f"矩阵形状 {self.entries.shape} 与维度 {self.dim} 不符")
        return self

    def trace(self) -> float:
        return float(np.real(np.trace(self.entries)))

    def asymmetry(self) -> float:
        return hermitian_asymmetry(self.entries)

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        return self.asymmetry() <= tol

    def eigenvalues(self) -> np.ndarray:
        """升序本征值（按厄米矩阵处理）"""
        return hermitian_eigvalsh(self.entries)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "dim": self.dim,
            "trace": self.trace(),
            "entries": complex_pairs(self.entries),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "BipartiteOperator":
        dim = int(data["dim"])
        flat = np.array([complex(re, im) for re, im in data["entries"]])
        return cls(dim=dim, entries=flat.reshape(dim * dim, dim * dim))


class Ket(BaseModel):
    """单体纯态"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    dim: int = Field(ge=1)
    amplitudes: np.ndarray

    @field_validator("amplitudes", mode="before")
    @classmethod
    def _as_vector(cls, value):
        return _readonly(value)

    @model_validator(mode="after")
    def _check_unit_norm(self):
        if self.amplitudes.shape != (self.dim,):
            raise ValueError(f"振幅长度 {self.amplitudes.shape} 与维度 {self.dim} 不符")
        norm = float(np.linalg.norm(self.amplitudes))
        if abs(norm - 1.0) > settings.unit_norm_tol:
            raise ValueError(f"态矢量未归一化: |ψ| = {norm:.15g}")
        return self

    @classmethod
    def basis(cls, index: int, d: int) -> "Ket":
        return cls(dim=d, amplitudes=basis_vector(index, d))


PairFamily = Literal["trivial", "parallel", "perp", "cross_left", "cross_right", "numeric"]


class ProductVector(BaseModel):
    """带标签的乘积态 |a,b⟩"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    family: PairFamily
    indices: Tuple[int, ...]
    a: Ket
    b: Ket

    @model_validator(mode="after")
    def _check_dims(self):
        if self.a.dim != self.b.dim:
            raise ValueError("两个子系统维度不一致")
        return self

    @property
    def dim(self) -> int:
        return self.a.dim

    @property
    def label(self) -> str:
        return f"{self.family}({','.join(str(i) for i in self.indices)})"

    @property
    def amplitudes(self) -> np.ndarray:
        return _readonly(product_amplitudes(self.a.amplitudes, self.b.amplitudes))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "label": self.label,
            "a": complex_pairs(self.a.amplitudes),
            "b": complex_pairs(self.b.amplitudes),
        }


class SeparabilityEigenpair(BaseModel):
    """可分离本征对"""
    model_config = ConfigDict(frozen=True)

    vector: ProductVector
    g: float
    converged: bool = True

    def to_dict(self) -> Dict[str, Any]:
        data = self.vector.to_dict()
        data["g"] = self.g
        if not self.converged:
            data["converged"] = False
        return data


class SepResidual(BaseModel):
    """可分离本征方程残差"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    g_estimate: float
    chi: np.ndarray
    left_overlap_norm: float
    right_overlap_norm: float

    @field_validator("chi", mode="before")
    @classmethod
    def _as_vector(cls, value):
        return _readonly(value)

    def is_eigenvector(self, tol: float = 1e-10) -> bool:
        return max(self.left_overlap_norm, self.right_overlap_norm) < tol


class PtReport(BaseModel):
    """部分转置判据结果"""
    model_config = ConfigDict(frozen=True)

    eigenvalues: List[float]
    min_eigenvalue: float
    is_npt: bool
    alpha_pt: float

    @model_validator(mode="after")
    def _check_consistency(self):
        if self.is_npt != (self.min_eigenvalue < -settings.negativity_tol):
            raise ValueError("is_npt 与最小本征值不一致")
        total = sum(self.eigenvalues)
        if abs(total - 1.0) > settings.trace_tol:
            raise ValueError(f"部分转置本征值之和应为1，实际为 {total:.15g}")
        return self

    @classmethod
    def from_eigenvalues(cls, eigenvalues, alpha_pt: float) -> "PtReport":
        values = sorted(float(v) for v in eigenvalues)
        return cls(
            eigenvalues=values,
            min_eigenvalue=values[0],
            is_npt=values[0] < -settings.negativity_tol,
            alpha_pt=alpha_pt,
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "eigenvalues": self.eigenvalues,
            "min_eigenvalue": self.min_eigenvalue,
            "is_npt": self.is_npt,
            "alpha_pt": self.alpha_pt,
        }


class GramSystem(BaseModel):
    """Gram方程组 G·p = g"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    vectors: List[ProductVector]
    G: np.ndarray
    g: np.ndarray
    kernel_basis: np.ndarray  # 每行一个核向量

    @field_validator("G", "g", "kernel_basis", mode="before")
    @classmethod
    def _as_real(cls, value):
        return _readonly(value, dtype=float)

    @property
    def size(self) -> int:
        return len(self.vectors)

    @property
    def kernel_dim(self) -> int:
        return int(self.kernel_basis.shape[0])


class QuasiProbEntry(BaseModel):
    model_config = ConfigDict(frozen=True)

    vector: ProductVector
    weight: float


class QuasiProbDistribution(BaseModel):
    """纠缠准概率分布 P_Ent"""
    model_config = ConfigDict(frozen=True)

    entries: List[QuasiProbEntry]

    @property
    def weights(self) -> np.ndarray:
        return np.array([entry.weight for entry in self.entries], dtype=float)

    @property
    def labels(self) -> List[str]:
        return [entry.vector.label for entry in self.entries]

    @property
    def total(self) -> float:
        return float(self.weights.sum())

    @property
    def min_weight(self) -> float:
        return float(self.weights.min())

    def to_dict(self) -> List[Dict[str, Any]]:
        return [{"label": entry.vector.label, "weight": entry.weight} for entry in self.entries]


class OracleReport(BaseModel):
    """校验结果"""
    model_config = ConfigDict(frozen=True)

    check_name: str
    samples: int
    max_violation: float
    tolerance: float
    details: Dict[str, Any] = Field(default_factory=dict)

    @computed_field
    @property
    def passed(self) -> bool:
        return bool(self.max_violation < self.tolerance)

    @classmethod
    def merge(cls, check_name: str, reports: List["OracleReport"]) -> "OracleReport":
        """按最大偏差合并同一校验项的多个结果"""
        worst = max(reports, key=lambda report: report.max_violation)
        return cls(
            check_name=check_name,
            samples=sum(report.samples for report in reports),
            max_violation=worst.max_violation,
            tolerance=min(report.tolerance for report in reports),
            details={"worst": worst.check_name, **worst.details},
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "check_name": self.check_name,
            "samples": self.samples,
            "max_violation": self.max_violation,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "details": self.details,
        }


class Command(str, Enum):
    STATE = "state"
    PPT = "ppt"
    QUASIPROB = "quasiprob"
    SCAN = "scan"
    BOUND_REGION = "bound-region"
    VERIFY = "verify"


DEPHASED_COMMANDS = frozenset({Command.STATE, Command.PPT, Command.QUASIPROB})


class OutputFormat(str, Enum):
    CSV = "csv"
    JSON = "json"


class ScanGrid(BaseModel):
    model_config = ConfigDict(frozen=True)

    lo: float = Field(default=0.0, ge=0)
    hi: float = 3.0
    steps: int = Field(default=301, ge=2)

    @model_validator(mode="after")
    def _check_order(self):
        if not self.hi > self.lo:
            raise ValueError(f"扫描区间不合法: [{self.lo}, {self.hi}]")
        return self

    def points(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.steps)


class RunConfig(BaseModel):
    """命令行运行配置"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    command: Command
    d: int = Field(default=3, ge=2)
    alpha: float = Field(default=0.5, ge=-1.0, le=1.0)
    delta: Optional[float] = Field(default=None, ge=0)
    lambdas: Optional[List[complex]] = None
    grid: ScanGrid = Field(default_factory=ScanGrid)
    output_format: OutputFormat = OutputFormat.JSON
    tol: float = Field(default=settings.golden_tol, gt=0)
    seed: int = settings.random_seed
    output: Optional[Path] = None

    @field_validator("lambdas", mode="before")
    @classmethod
    def _parse_lambdas(cls, value):
        if value is None:
            return None
        return [complex(str(v).replace(" ", "")) if isinstance(v, str) else complex(v) for v in value]

    @model_validator(mode="before")
    @classmethod
    def _one_dephasing_source(cls, data):
        if isinstance(data, dict):
            has_delta = data.get("delta") is not None
            has_lambdas = bool(data.get("lambdas"))
            if has_delta and has_lambdas:
                raise ValueError("--delta 与 --lam 只能给出一个")
            if not has_delta and not has_lambdas and data.get("command") in DEPHASED_COMMANDS:
                raise ValueError("必须给出 --delta 或 --lam 之一")
        return data
