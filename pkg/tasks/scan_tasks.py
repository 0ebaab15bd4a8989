import time
from concurrent.futures import ThreadPoolExecutor
from typing import Dict

import pandas as pd
from tqdm import tqdm

from models import ScanGrid
from services.npt_service import NptService
from services.quasiprob_service import QuasiProbService
from services.state_service import StateService
from utils.errors import InvalidParameterError, UnsupportedDimensionError
from utils.logger import setup_logger, log_performance
from config import settings, SCAN_COLUMNS, SUPPORTED_DIMENSIONS

logger = setup_logger("scan_tasks")
state_service = StateService()
npt_service = NptService(state_service)
quasiprob_service = QuasiProbService(state_service, npt_service)


def threshold_row(d: int, delta: float) -> Dict[str, float]:
    """单个 δ 上的两条阈值"""
    spec = state_service.gaussian_spec(delta, d)
    alpha_pt = npt_service.alpha_pt_threshold(d, spec)
    alpha_qp = quasiprob_service.alpha_qp_threshold(d, spec)
    return {"delta": delta, "alpha_pt": alpha_pt, "alpha_qp": alpha_qp, "gap": alpha_pt - alpha_qp}


def run_threshold_scan(
    d: int = 3,
    lo: float = 0.0,
    hi: float = 3.0,
    steps: int = 301,
    workers: int = None,
    progress: bool = False
) -> pd.DataFrame:
    """δ 扫描：并行计算，行按 δ 排序"""
    if d not in SUPPORTED_DIMENSIONS:
        raise UnsupportedDimensionError(f"阈值扫描只支持 d ∈ {SUPPORTED_DIMENSIONS}，当前为 {d}")
    grid = ScanGrid(lo=lo, hi=hi, steps=steps)
    deltas = [float(x) for x in grid.points()]
    workers = settings.scan_workers if workers is None else workers
    if workers < 1:
        raise InvalidParameterError(f"线程数至少为1，当前为 {workers}")

    start_time = time.perf_counter()
    logger.info(f"开始阈值扫描 d={d}, δ∈[{lo}, {hi}], {steps} 个点")

    # map 保持输入顺序
    with ThreadPoolExecutor(max_workers=workers) as executor:
        rows = list(tqdm(
            executor.map(lambda delta: threshold_row(d, delta), deltas),
            total=len(deltas),
            desc="threshold scan",
            disable=not progress,
        ))

    frame = pd.DataFrame(rows, columns=SCAN_COLUMNS)
    log_performance("run_threshold_scan", time.perf_counter() - start_time, {
        "d": d,
        "steps": steps,
        "workers": workers,
    })
    return frame
