"""
测试公共夹具 - 固定种子的随机数发生器与常用标准态
"""

import math

import numpy as np
import pytest

from src import states
from src.data_models import ScenarioConfig


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def bell():
    return states.build(states.family("PureTheta", theta=math.pi / 4))


@pytest.fixture
def ghz3():
    return states.build(states.family("GHZ", k=3))


@pytest.fixture
def w3():
    return states.build(states.family("W", k=3))


@pytest.fixture
def product2():
    return states.product_state([0, 0])


@pytest.fixture
def make_config():
    """ScenarioConfig 工厂，默认小样本"""
    def _make(scenario, **overrides):
        overrides.setdefault("samples", 20)
        overrides.setdefault("seed", 7)
        return ScenarioConfig(scenario=scenario, **overrides)
    return _make
