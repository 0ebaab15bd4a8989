import os

# 测试时不写日志文件
os.environ.setdefault("WERNER_LOG_TO_FILE", "false")
os.environ.setdefault("WERNER_LOG_LEVEL", "WARNING")

import pytest

from models import WernerParams
from utils.logger import setup_logger, setup_performance_logger
from services.npt_service import NptService
from services.oracle_service import OracleService
from services.quasiprob_service import QuasiProbService
from services.sep_service import SepService
from services.state_service import StateService

# 在 CliRunner 替换标准错误之前创建惰性日志记录器
setup_logger("system")
setup_performance_logger()


@pytest.fixture(scope="session")
def state_service():
    return StateService()


@pytest.fixture(scope="session")
def npt_service(state_service):
    return NptService(state_service)


@pytest.fixture(scope="session")
def sep_service():
    return SepService()


@pytest.fixture(scope="session")
def quasiprob_service(state_service, npt_service, sep_service):
    return QuasiProbService(state_service, npt_service, sep_service)


@pytest.fixture(scope="session")
def oracle_service(state_service, npt_service, sep_service, quasiprob_service):
    return OracleService(state_service, npt_service, sep_service, quasiprob_service)


@pytest.fixture
def bound_point(state_service):
    """d=3, α=0.5, δ=1"""
    return WernerParams(d=3, alpha=0.5), state_service.gaussian_spec(1.0, 3)


@pytest.fixture
def qubit_point(state_service):
    """d=2, α=0.8, δ=0"""
    return WernerParams(d=2, alpha=0.8), state_service.gaussian_spec(0.0, 2)
