# test/conftest.py
import os
import sys

import pytest

# 从仓库根目录导入 regulator_factor_core
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from regulator_factor_core.cf_engine import expand_sqrt  # noqa: E402
from regulator_factor_core.config import Settings  # noqa: E402
from regulator_factor_core.qform import QForm  # noqa: E402


@pytest.fixture
def settings():
    return Settings()


@pytest.fixture
def expansion_21():
    return expand_sqrt(21)


@pytest.fixture
def cycle_21():
    """√21 的主循环 Υ₀ … Υ₅。"""
    return [QForm(1, 8, -5), QForm(-5, 2, 4), QForm(4, 6, -3),
            QForm(-3, 6, 4), QForm(4, 2, -5), QForm(-5, 8, 1)]