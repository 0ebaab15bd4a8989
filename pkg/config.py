from pydantic_settings import BaseSettings
from pydantic import Field


class Settings(BaseSettings):
    """应用配置类"""

    # 基础配置
    app_name: str = "退相干Werner态纠缠验证工具"
    app_version: str = "1.0.0"
    debug: bool = Field(default=False)

    # 日志配置
    log_level: str = Field(default="INFO")
    log_file: str = Field(default="./logs/werner.log")
    log_to_file: bool = Field(default=True)

    # 数值容差
    negativity_tol: float = Field(default=1e-10)  # 低于 -tol 才算负本征值
    trace_tol: float = Field(default=1e-10)
    hermitian_tol: float = Field(default=1e-8)
    unit_norm_tol: float = Field(default=1e-12)
    imag_tol: float = Field(default=1e-12)
    kernel_rel_threshold: float = Field(default=1e-10)
    range_residual_tol: float = Field(default=1e-9)
    solver_agreement_tol: float = Field(default=1e-12)

    # 相位分布积分配置
    quadrature_resolution: int = Field(default=512, ge=64)
    normalization_tol: float = Field(default=1e-6)

    # 可分离本征值交替迭代配置
    seesaw_starts: int = Field(default=20, ge=1)
    seesaw_iters: int = Field(default=2000, ge=1)
    seesaw_tol: float = Field(default=1e-12)
    degeneracy_gap: float = Field(default=1e-12)
    duplicate_overlap_tol: float = Field(default=1e-8)

    # 校验配置
    oracle_samples: int = Field(default=10_000, ge=100)
    random_seed: int = Field(default=7)

    # 黄金分割搜索配置
    golden_tol: float = Field(default=1e-6, gt=0)
    search_lo: float = Field(default=0.5, ge=0)
    search_hi: float = Field(default=3.0)

    # 输出配置
    csv_significant_digits: int = Field(default=12)
    scan_workers: int = Field(default=4, ge=1)

    model_config = {
        "env_prefix": "WERNER_",
        "env_file": ".env",
        "env_file_encoding": "utf-8",
        "case_sensitive": False,
        "extra": "ignore"
    }


# 创建全局配置实例
settings = Settings()


# 支持解析公式的维度
SUPPORTED_DIMENSIONS = (2, 3)

# 扫描CSV列顺序（对外约定）
SCAN_COLUMNS = ["delta", "alpha_pt", "alpha_qp", "gap"]

# 各校验项容差
ORACLE_TOLERANCES = {
    "cross_check_pt": 1e-10,
    "product_state_positivity": 1e-9,
    "local_unitary_invariance": 1e-12,
    "reconstruction": 1e-10,
    "normalization": 1e-12,
    "sep_residual": 1e-10,
    "gram_equivalence": 1e-9,
    "seesaw_gmax": 1e-9,
    "bound_entanglement_point": 1e-10,
    "threshold_curves": 1e-12,
    "qubit_threshold_equality": 1e-14,
    "delta_star": 1e-3,
}

# 命令行退出码
EXIT_CODES = {
    "success": 0,
    "verification_failed": 1,
    "usage_error": 2,
}
