from typing import List, Optional, Tuple

import numpy as np
from scipy.stats import unitary_group

from models import (
    BipartiteOperator,
    DephasingSpec,
    Ket,
    OracleReport,
    WernerParams,
)
from services.npt_service import NptService
from services.quasiprob_service import QuasiProbService
from services.sep_service import SepService
from services.state_service import StateService
from utils.errors import InvalidDimensionError, InvalidParameterError
from utils.linalg import frobenius_distance, random_ket, random_kets
from utils.logger import setup_logger
from config import settings, ORACLE_TOLERANCES

# 符号判定阈值
SIGN_TOL = 1e-12

# 已知的束缚纠缠区间最宽处
REFERENCE_DELTA_STAR = 1.362


class OracleService:
    """独立数值校验服务类"""

    def __init__(
        self,
        state_service: StateService = None,
        npt_service: NptService = None,
        sep_service: SepService = None,
        quasiprob_service: QuasiProbService = None
    ):
        self.logger = setup_logger("oracle_service")
        self.state_service = state_service or StateService()
        self.npt_service = npt_service or NptService(self.state_service)
        self.sep_service = sep_service or SepService()
        self.quasiprob_service = quasiprob_service or QuasiProbService(
            self.state_service, self.npt_service, self.sep_service
        )

    @staticmethod
    def perturbed_spec(spec: DephasingSpec, perturb_lambda: float) -> DephasingSpec:
        """把非对角系数整体缩小 perturb_lambda 倍，用于反例测试"""
        if perturb_lambda == 0:
            return spec
        if not 0 < perturb_lambda <= 1:
            raise InvalidParameterError(f"扰动比例必须在 (0, 1] 之间，当前为 {perturb_lambda}")
        coefficients = {
            k: (value if k == 0 else value * (1 - perturb_lambda))
            for k, value in spec.coefficients.items() if k >= 0
        }
        return DephasingSpec(coefficients=coefficients)

    def haar_random_ket(self, d: int, seed: Optional[int] = None) -> Ket:
        """复高斯分量归一化得到的随机纯态"""
        if d < 2:
            raise InvalidDimensionError(f"维度必须不小于2，当前为 {d}")
        rng = np.random.default_rng(settings.random_seed if seed is None else seed)
        return Ket(dim=d, amplitudes=random_ket(rng, d))

    def cross_check_pt(
        self,
        params: WernerParams,
        spec: DephasingSpec,
        perturb_lambda: float = 0.0
    ) -> OracleReport:
        """解析部分转置谱与数值对角化比较"""
        analytic = np.array(self.npt_service.pt_eigenvalues_analytic(
            params, self.perturbed_spec(spec, perturb_lambda)
        ))
        rho = self.state_service.apply_dephasing(params, spec)
        numeric = self.npt_service.pt_spectrum_numeric(rho)
        return OracleReport(
            check_name="cross_check_pt",
            samples=1,
            max_violation=float(np.max(np.abs(analytic - numeric))),
            tolerance=ORACLE_TOLERANCES["cross_check_pt"],
            details={"d": params.d, "alpha": params.alpha},
        )

    def product_state_positivity(
        self,
        op: BipartiteOperator,
        samples: int = None,
        seed: Optional[int] = None,
        g_bounds: Optional[Tuple[float, float]] = None
    ) -> OracleReport:
        """随机乘积态期望值必须落在 [g_min, g_max] 内；不给界时检查非负"""
        samples = settings.oracle_samples if samples is None else samples
        if samples < 100:
            raise InvalidParameterError(f"采样数至少为100，当前为 {samples}")

        d = op.dim
        rng = np.random.default_rng(settings.random_seed if seed is None else seed)
        a = random_kets(rng, samples, d)
        b = random_kets(rng, samples, d)
        products = (a[:, :, None] * b[:, None, :]).reshape(samples, d * d)
        values = np.real(np.einsum("ni,ij,nj->n", products.conj(), op.entries, products))

        empirical_min = float(values.min())
        empirical_max = float(values.max())
        if g_bounds is None:
            violation = max(0.0, -empirical_min)
        else:
            g_min, g_max = g_bounds
            violation = max(0.0, g_min - empirical_min, empirical_max - g_max)

        return OracleReport(
            check_name="product_state_positivity",
            samples=samples,
            max_violation=violation,
            tolerance=ORACLE_TOLERANCES["product_state_positivity"],
            details={"empirical_min": empirical_min, "empirical_max": empirical_max},
        )

    def analytic_g_bounds(self, params: WernerParams, spec: DephasingSpec) -> Tuple[float, float]:
        values = [pair.g for pair in self.sep_service.analytic_sep_pairs(params, spec)]
        return min(values), max(values)

    def separability_consistency_qubit(
        self,
        alpha: float,
        spec: DephasingSpec,
        grid_points: int = 200
    ) -> OracleReport:
        """两比特下准概率负值、部分转置负值与阈值判据三者一致"""
        threshold = self.quasiprob_service.alpha_qp_threshold(2, spec)
        alphas = np.append(np.linspace(0.0, 1.0, grid_points), alpha)

        violation = 0.0
        disagreements = 0
        for value in alphas:
            params = WernerParams(d=2, alpha=float(value))
            qp_negative = self.quasiprob_service.qubit_distribution_analytic(params, spec).min_weight < -SIGN_TOL
            rho = self.state_service.apply_dephasing(params, spec)
            pt_negative = self.npt_service.pt_min_eigenvalue_numeric(rho) < -SIGN_TOL
            above = value > threshold
            if not (qp_negative == pt_negative == above):
                disagreements += 1
                violation = max(violation, abs(value - threshold))

        return OracleReport(
            check_name="separability_consistency_qubit",
            samples=len(alphas),
            max_violation=violation,
            tolerance=1.0 / (grid_points - 1),
            details={"threshold": threshold, "disagreements": disagreements},
        )

    def qubit_threshold_equality(self, samples: int = 100, seed: Optional[int] = None) -> OracleReport:
        """两比特下 α_QP 与 α_PT 完全一致"""
        rng = np.random.default_rng(settings.random_seed if seed is None else seed)
        violation = 0.0
        for radius, phase in zip(rng.uniform(0, 1, samples), rng.uniform(0, 2 * np.pi, samples)):
            spec = self.state_service.explicit_spec([radius * np.exp(1j * phase)])
            difference = abs(
                self.quasiprob_service.alpha_qp_threshold(2, spec)
                - self.npt_service.alpha_pt_threshold(2, spec)
            )
            violation = max(violation, difference)
        return OracleReport(
            check_name="qubit_threshold_equality",
            samples=samples,
            max_violation=violation,
            tolerance=ORACLE_TOLERANCES["qubit_threshold_equality"],
        )

    def local_unitary_invariance(
        self,
        params: WernerParams,
        samples: int = 200,
        seed: Optional[int] = None
    ) -> OracleReport:
        """未退相干的Werner态在 U⊗U 下不变"""
        rng = np.random.default_rng(settings.random_seed if seed is None else seed)
        rho = self.state_service.make_werner(params).entries
        violation = 0.0
        for _ in range(samples):
            u = unitary_group.rvs(params.d, random_state=rng)
            uu = np.kron(u, u)
            violation = max(violation, frobenius_distance(uu @ rho @ uu.conj().T, rho))
        return OracleReport(
            check_name="local_unitary_invariance",
            samples=samples,
            max_violation=violation,
            tolerance=ORACLE_TOLERANCES["local_unitary_invariance"],
            details={"d": params.d, "alpha": params.alpha},
        )

    @staticmethod
    def parameter_grid(points: int) -> List[Tuple[float, float]]:
        """(α, δ) ∈ [0,1]×[0,3] 上的均匀网格"""
        return [
            (float(alpha), float(delta))
            for alpha in np.linspace(0.0, 1.0, points)
            for delta in np.linspace(0.0, 3.0, points)
        ]

    def reconstruction_check(self, d: int, points: int = 20, perturb_lambda: float = 0.0) -> OracleReport:
        """解析分布重构出的态与退相干Werner态的Frobenius距离"""
        violation = 0.0
        for alpha, delta in self.parameter_grid(points):
            params = WernerParams(d=d, alpha=alpha)
            spec = self.state_service.gaussian_spec(delta, d)
            dist = self.quasiprob_service.analytic_distribution(params, self.perturbed_spec(spec, perturb_lambda))
            rebuilt = self.quasiprob_service.reconstruct_state(dist)
            rho = self.state_service.apply_dephasing(params, spec)
            violation = max(violation, frobenius_distance(rebuilt.entries, rho.entries))
        return OracleReport(
            check_name="reconstruction",
            samples=points ** 2,
            max_violation=violation,
            tolerance=ORACLE_TOLERANCES["reconstruction"],
            details={"d": d},
        )

    def normalization_check(self, d: int, points: int = 20) -> OracleReport:
        """解析分布权重之和为1"""
        violation = 0.0
        for alpha, delta in self.parameter_grid(points):
            params = WernerParams(d=d, alpha=alpha)
            dist = self.quasiprob_service.analytic_distribution(params, self.state_service.gaussian_spec(delta, d))
            violation = max(violation, abs(dist.total - 1.0))
        return OracleReport(
            check_name="normalization",
            samples=points ** 2,
            max_violation=violation,
            tolerance=ORACLE_TOLERANCES["normalization"],
            details={"d": d},
        )

    def sep_residual_check(self, d: int, points: int = 20) -> OracleReport:
        """每个解析本征对的双正交残差"""
        violation = 0.0
        count = 0
        for alpha, delta in self.parameter_grid(points):
            params = WernerParams(d=d, alpha=alpha)
            spec = self.state_service.gaussian_spec(delta, d)
            rho = self.state_service.apply_dephasing(params, spec)
            for pair in self.sep_service.analytic_sep_pairs(params, spec):
                residual = self.sep_service.verify_sep_pair(rho, pair)
                violation = max(
                    violation,
                    residual.left_overlap_norm,
                    residual.right_overlap_norm,
                    abs(residual.g_estimate - pair.g),
                )
                count += 1
        return OracleReport(
            check_name="sep_residual",
            samples=count,
            max_violation=violation,
            tolerance=ORACLE_TOLERANCES["sep_residual"],
            details={"d": d},
        )

    def gram_equivalence_check(self, d: int, samples: int = 10, seed: Optional[int] = None) -> OracleReport:
        """Gram方程组的最小范数解与解析分布逐项一致"""
        rng = np.random.default_rng(settings.random_seed if seed is None else seed)
        violation = 0.0
        for alpha, delta in zip(rng.uniform(0, 1, samples), rng.uniform(0, 3, samples)):
            params = WernerParams(d=d, alpha=float(alpha))
            spec = self.state_service.gaussian_spec(float(delta), d)
            numeric = self.quasiprob_service.gram_distribution(params, spec).weights
            analytic = self.quasiprob_service.analytic_distribution(params, spec).weights
            violation = max(violation, float(np.max(np.abs(numeric - analytic))))
        return OracleReport(
            check_name="gram_equivalence",
            samples=samples,
            max_violation=violation,
            tolerance=ORACLE_TOLERANCES["gram_equivalence"],
            details={"d": d},
        )

    def seesaw_check(
        self,
        d: int,
        alpha: float = 0.5,
        deltas: Tuple[float, ...] = (0.0, 0.5, 1.0, 2.0),
        seed: Optional[int] = None
    ) -> OracleReport:
        """交替迭代得到的 g_max 与解析 g_max 一致"""
        violation = 0.0
        for delta in deltas:
            params = WernerParams(d=d, alpha=alpha)
            spec = self.state_service.gaussian_spec(delta, d)
            rho = self.state_service.apply_dephasing(params, spec)
            analytic = self.sep_service.g_max(self.sep_service.analytic_sep_pairs(params, spec))
            numeric = self.sep_service.g_max(self.sep_service.seesaw_sep_solver(rho, seed=seed))
            violation = max(violation, abs(numeric - analytic))
        return OracleReport(
            check_name="seesaw_gmax",
            samples=len(deltas),
            max_violation=violation,
            tolerance=ORACLE_TOLERANCES["seesaw_gmax"],
            details={"d": d, "alpha": alpha},
        )

    def bound_entanglement_point_check(self, alpha: float = 0.5, delta: float = 1.0) -> OracleReport:
        """在同一点上部分转置为正而准概率为负"""
        params = WernerParams(d=3, alpha=alpha)
        spec = self.state_service.gaussian_spec(delta, 3)
        rho = self.state_service.apply_dephasing(params, spec)

        pt_numeric = self.npt_service.pt_min_eigenvalue_numeric(rho)
        pt_analytic = self.npt_service.pt_eigenvalues_analytic(params, spec)[0]
        qp_numeric = self.quasiprob_service.gram_distribution(params, spec).min_weight
        qp_analytic = self.quasiprob_service.qutrit_distribution_analytic(params, spec).min_weight

        violation = max(abs(pt_numeric - pt_analytic), abs(qp_numeric - qp_analytic))
        bound_entangled = pt_numeric > 1e-4 and qp_numeric < -1e-4
        if not bound_entangled:
            violation = max(violation, 1.0)
        return OracleReport(
            check_name="bound_entanglement_point",
            samples=1,
            max_violation=violation,
            tolerance=ORACLE_TOLERANCES["bound_entanglement_point"],
            details={
                "alpha": alpha,
                "delta": delta,
                "min_pt_eigenvalue": pt_numeric,
                "min_weight": qp_numeric,
                "bound_entangled": bound_entangled,
            },
        )

    def threshold_curve_check(self, lo: float = 0.0, hi: float = 3.0, steps: int = 301) -> OracleReport:
        """d=3 阈值曲线：起点1/3、单调不减且 α_QP ≤ α_PT"""
        deltas = np.linspace(lo, hi, steps)
        alpha_qp = np.array([self.quasiprob_service.gaussian_alpha_qp(3, float(x)) for x in deltas])
        alpha_pt = np.array([self.npt_service.gaussian_alpha_pt(3, float(x)) for x in deltas])
        gap = alpha_pt - alpha_qp

        deficits = [
            float(np.max(np.maximum(0.0, alpha_qp - alpha_pt))),
            float(np.max(np.maximum(0.0, alpha_qp[:-1] - alpha_qp[1:]))),
            float(np.max(np.maximum(0.0, alpha_pt[:-1] - alpha_pt[1:]))),
        ]
        if lo == 0:
            deficits += [
                abs(alpha_qp[0] - 1 / 3),
                abs(alpha_pt[0] - 1 / 3),
                max(0.0, abs(gap[0]) - 1e-9),
            ]
        interior = deltas >= 0.05
        if np.any(interior):
            deficits.append(float(np.max(np.maximum(0.0, 1e-6 - gap[interior]))))

        return OracleReport(
            check_name="threshold_curves",
            samples=steps,
            max_violation=max(deficits),
            tolerance=ORACLE_TOLERANCES["threshold_curves"],
            details={"max_gap": float(gap.max()), "delta_at_max_gap": float(deltas[np.argmax(gap)])},
        )

    def delta_star_check(self) -> OracleReport:
        """黄金分割搜索复现区间最宽处"""
        delta_star = self.quasiprob_service.find_max_interval_delta(settings.search_lo, settings.search_hi)
        return OracleReport(
            check_name="delta_star",
            samples=1,
            max_violation=abs(delta_star - REFERENCE_DELTA_STAR),
            tolerance=ORACLE_TOLERANCES["delta_star"],
            details={"delta_star": delta_star, "width": self.quasiprob_service.interval_width(delta_star)},
        )

    def pt_spectrum_check(
        self,
        d: int,
        samples: int = 100,
        seed: Optional[int] = None,
        perturb_lambda: float = 0.0
    ) -> OracleReport:
        """随机参数下的解析/数值部分转置谱比较"""
        rng = np.random.default_rng(settings.random_seed if seed is None else seed)
        reports = [
            self.cross_check_pt(
                WernerParams(d=d, alpha=float(alpha)),
                self.state_service.gaussian_spec(float(delta), d),
                perturb_lambda,
            )
            for alpha, delta in zip(rng.uniform(0, 1, samples), rng.uniform(0, 3, samples))
        ]
        return OracleReport.merge("cross_check_pt", reports)

    def run_suite(self, seed: Optional[int] = None, perturb_lambda: float = 0.0) -> List[OracleReport]:
        """完整校验套件，结果只依赖种子"""
        seed = settings.random_seed if seed is None else seed
        seeds = iter(np.random.default_rng(seed).integers(0, 2 ** 31, size=16).tolist())
        self.logger.info(f"开始校验套件，种子 {seed}，扰动 {perturb_lambda}")

        qubit, qutrit = WernerParams(d=2, alpha=0.8), WernerParams(d=3, alpha=0.5)
        qubit_spec = self.state_service.gaussian_spec(0.0, 2)
        qutrit_spec = self.state_service.gaussian_spec(1.0, 3)

        reports = [
            OracleReport.merge("cross_check_pt", [
                self.pt_spectrum_check(2, seed=next(seeds), perturb_lambda=perturb_lambda),
                self.pt_spectrum_check(3, seed=next(seeds), perturb_lambda=perturb_lambda),
            ]),
            OracleReport.merge("product_state_positivity", [
                self.product_state_positivity(
                    self.state_service.apply_dephasing(params, spec),
                    seed=next(seeds),
                    g_bounds=self.analytic_g_bounds(params, spec),
                )
                for params, spec in ((qubit, qubit_spec), (qutrit, qutrit_spec))
            ]),
            OracleReport.merge("separability_consistency_qubit", [
                self.separability_consistency_qubit(0.8, self.state_service.gaussian_spec(delta, 2))
                for delta in (0.0, 2.0)
            ]),
            self.qubit_threshold_equality(seed=next(seeds)),
            OracleReport.merge("local_unitary_invariance", [
                self.local_unitary_invariance(params, seed=next(seeds)) for params in (qubit, qutrit)
            ]),
            OracleReport.merge("reconstruction", [
                self.reconstruction_check(d, perturb_lambda=perturb_lambda) for d in (2, 3)
            ]),
            OracleReport.merge("normalization", [self.normalization_check(d) for d in (2, 3)]),
            OracleReport.merge("sep_residual", [self.sep_residual_check(d) for d in (2, 3)]),
            OracleReport.merge("gram_equivalence", [
                self.gram_equivalence_check(d, seed=next(seeds)) for d in (2, 3)
            ]),
            OracleReport.merge("seesaw_gmax", [self.seesaw_check(d, seed=next(seeds)) for d in (2, 3)]),
            self.bound_entanglement_point_check(),
            self.threshold_curve_check(),
            self.delta_star_check(),
        ]

        failed = [report.check_name for report in reports if not report.passed]
        if failed:
            self.logger.warning(f"校验未通过: {', '.join(failed)}")
        else:
            self.logger.info(f"全部 {len(reports)} 项校验通过")
        return reports
