import functools
import json
from pathlib import Path
from typing import Any, List, Optional

import typer
from tabulate import tabulate

from config import settings, EXIT_CODES, SCAN_COLUMNS, SUPPORTED_DIMENSIONS
from models import Command, DephasingSpec, OutputFormat, RunConfig, ScanGrid, WernerParams
from services.npt_service import NptService
from services.oracle_service import OracleService
from services.quasiprob_service import QuasiProbService
from services.sep_service import SepService
from services.state_service import StateService
from tasks.scan_tasks import run_threshold_scan
from utils.errors import UnsupportedDimensionError
from utils.logger import setup_logger, log_system_event

# 设置日志
logger = setup_logger()

app = typer.Typer(
    name="werner",
    help=f"{settings.app_name} v{settings.app_version}",
    add_completion=False,
    no_args_is_help=True,
)

# 初始化服务
state_service = StateService()
npt_service = NptService(state_service)
sep_service = SepService()
quasiprob_service = QuasiProbService(state_service, npt_service, sep_service)
oracle_service = OracleService(state_service, npt_service, sep_service, quasiprob_service)


def handle_errors(func):
    """参数错误统一映射为退出码2"""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except ValueError as e:
            logger.debug(f"参数错误: {e}")
            typer.echo(f"错误: {e}", err=True)
            raise typer.Exit(EXIT_CODES["usage_error"])

    return wrapper


def emit(text: str, output: Optional[Path]):
    """写到文件或标准输出"""
    if output is None:
        typer.echo(text)
        return
    output.parent.mkdir(parents=True, exist_ok=True)
    output.write_text(text if text.endswith("\n") else text + "\n", encoding="utf-8")
    logger.info(f"结果已写入 {output}")


def emit_json(data: Any, output: Optional[Path]):
    emit(json.dumps(data, indent=2, ensure_ascii=False), output)


def dephasing_spec(config: RunConfig) -> DephasingSpec:
    if config.lambdas:
        return state_service.explicit_spec(config.lambdas)
    return state_service.gaussian_spec(config.delta, config.d)


def check_dimension(d: int):
    if d not in SUPPORTED_DIMENSIONS:
        raise UnsupportedDimensionError(f"解析流程只支持 d ∈ {SUPPORTED_DIMENSIONS}，当前为 {d}")


@app.command("state")
@handle_errors
def cmd_state(
    d: int = typer.Option(3, "--d", help="单体维度"),
    alpha: float = typer.Option(0.5, "--alpha", help="Werner参数 α"),
    delta: Optional[float] = typer.Option(None, "--delta", help="高斯退相干宽度 δ"),
    lam: Optional[List[str]] = typer.Option(None, "--lam", help="显式退相干系数 λ(1), λ(2), ..."),
    output: Optional[Path] = typer.Option(None, "--output", "-o", help="输出文件"),
):
    """输出退相干Werner态的密度矩阵"""
    config = RunConfig(command=Command.STATE, d=d, alpha=alpha, delta=delta, lambdas=lam, output=output)
    check_dimension(config.d)
    rho = state_service.apply_dephasing(WernerParams(d=config.d, alpha=config.alpha), dephasing_spec(config))
    emit_json(rho.to_dict(), config.output)


@app.command("ppt")
@handle_errors
def cmd_ppt(
    d: int = typer.Option(3, "--d", help="单体维度"),
    alpha: float = typer.Option(0.5, "--alpha", help="Werner参数 α"),
    delta: Optional[float] = typer.Option(None, "--delta", help="高斯退相干宽度 δ"),
    lam: Optional[List[str]] = typer.Option(None, "--lam", help="显式退相干系数 λ(1), λ(2), ..."),
    output: Optional[Path] = typer.Option(None, "--output", "-o", help="输出文件"),
):
    """部分转置判据"""
    config = RunConfig(command=Command.PPT, d=d, alpha=alpha, delta=delta, lambdas=lam, output=output)
    check_dimension(config.d)
    params = WernerParams(d=config.d, alpha=config.alpha)
    report = npt_service.pt_report(params, dephasing_spec(config))
    emit_json({"d": params.d, "alpha": params.alpha, **report.to_dict()}, config.output)


@app.command("quasiprob")
@handle_errors
def cmd_quasiprob(
    d: int = typer.Option(3, "--d", help="单体维度"),
    alpha: float = typer.Option(0.5, "--alpha", help="Werner参数 α"),
    delta: Optional[float] = typer.Option(None, "--delta", help="高斯退相干宽度 δ"),
    lam: Optional[List[str]] = typer.Option(None, "--lam", help="显式退相干系数 λ(1), λ(2), ..."),
    method: str = typer.Option("analytic", "--method", help="analytic 或 gram"),
    include_pairs: bool = typer.Option(False, "--include-pairs", help="同时输出支撑集上的可分离本征对"),
    output: Optional[Path] = typer.Option(None, "--output", "-o", help="输出文件"),
):
    """纠缠准概率分布"""
    config = RunConfig(command=Command.QUASIPROB, d=d, alpha=alpha, delta=delta, lambdas=lam, output=output)
    check_dimension(config.d)
    params = WernerParams(d=config.d, alpha=config.alpha)
    spec = dephasing_spec(config)

    if method == "analytic":
        dist = quasiprob_service.analytic_distribution(params, spec)
    elif method == "gram":
        dist = quasiprob_service.gram_distribution(params, spec)
    else:
        raise ValueError(f"未知的求解方法: {method}")

    result = {
        "d": params.d,
        "alpha": params.alpha,
        "method": method,
        "distribution": dist.to_dict(),
        "summary": quasiprob_service.distribution_summary(dist, params.d, spec),
    }
    if include_pairs:
        result["pairs"] = [pair.to_dict() for pair in quasiprob_service.support_pairs(params, spec)]
    emit_json(result, config.output)


@app.command("scan")
@handle_errors
def cmd_scan(
    d: int = typer.Option(3, "--d", help="单体维度"),
    lo: float = typer.Option(0.0, "--lo", help="δ 下限"),
    hi: float = typer.Option(3.0, "--hi", help="δ 上限"),
    steps: int = typer.Option(301, "--steps", help="网格点数"),
    output_format: OutputFormat = typer.Option(OutputFormat.CSV, "--format", help="csv 或 json"),
    workers: int = typer.Option(settings.scan_workers, "--workers", help="并行线程数"),
    progress: bool = typer.Option(False, "--progress", help="显示进度条"),
    output: Optional[Path] = typer.Option(None, "--output", "-o", help="输出文件"),
):
    """阈值曲线 α_PT(δ)、α_QP(δ) 扫描"""
    config = RunConfig(
        command=Command.SCAN,
        d=d,
        grid=ScanGrid(lo=lo, hi=hi, steps=steps),
        output_format=output_format,
        output=output,
    )
    check_dimension(config.d)
    frame = run_threshold_scan(
        config.d, config.grid.lo, config.grid.hi, config.grid.steps, workers=workers, progress=progress
    )

    if config.output_format == OutputFormat.CSV:
        float_format = f"%.{settings.csv_significant_digits}g"
        emit(frame.to_csv(index=False, columns=SCAN_COLUMNS, float_format=float_format), config.output)
    else:
        emit_json(frame.to_dict(orient="records"), config.output)


@app.command("bound-region")
@handle_errors
def cmd_bound_region(
    lo: float = typer.Option(settings.search_lo, "--lo", help="搜索下限"),
    hi: float = typer.Option(settings.search_hi, "--hi", help="搜索上限"),
    tol: float = typer.Option(settings.golden_tol, "--tol", help="黄金分割收敛容差"),
    output: Optional[Path] = typer.Option(None, "--output", "-o", help="输出文件"),
):
    """束缚纠缠区间最宽处 δ*"""
    config = RunConfig(command=Command.BOUND_REGION, tol=tol, output=output)
    delta_star = quasiprob_service.find_max_interval_delta(lo, hi, config.tol)
    lower, upper = quasiprob_service.bound_entanglement_interval(delta_star)
    at_boundary = min(abs(delta_star - lo), abs(delta_star - hi)) <= config.tol

    result = {
        "delta_star": delta_star,
        "interval": [lower, upper],
        "width": upper - lower,
        "at_boundary": at_boundary,
    }
    if at_boundary:
        result["warning"] = "搜索区间内没有内部极大值，结果位于边界"
        logger.warning(f"δ* = {delta_star} 位于搜索区间 [{lo}, {hi}] 的边界")
    emit_json(result, config.output)


@app.command("verify")
@handle_errors
def cmd_verify(
    seed: int = typer.Option(settings.random_seed, "--seed", help="随机种子"),
    perturb_lambda: float = typer.Option(0.0, "--perturb-lambda", hidden=True),
    output: Optional[Path] = typer.Option(None, "--output", "-o", help="输出文件"),
):
    """运行完整校验套件"""
    config = RunConfig(command=Command.VERIFY, seed=seed, output=output)
    reports = oracle_service.run_suite(seed=config.seed, perturb_lambda=perturb_lambda)
    passed = all(report.passed for report in reports)
    emit_json({
        "seed": config.seed,
        "passed": passed,
        "reports": [report.to_dict() for report in reports],
    }, config.output)

    log_system_event("verify", "校验套件完成", "INFO" if passed else "WARNING", {"passed": passed})
    if not passed:
        failures = [
            [report.check_name, report.max_violation, report.tolerance]
            for report in reports if not report.passed
        ]
        typer.echo(tabulate(failures, headers=["check", "max_violation", "tolerance"], floatfmt=".3e"), err=True)
        raise typer.Exit(EXIT_CODES["verification_failed"])


if __name__ == "__main__":
    app()
