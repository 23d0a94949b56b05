"""
pytest 公共配置
--run-slow 打开细网格特征值复现与斜率检查等耗时测试
"""

import sys
from pathlib import Path

import pytest

# 添加项目根目录到路径
sys.path.insert(0, str(Path(__file__).parent.parent))


def pytest_addoption(parser):
    parser.addoption('--run-slow', action='store_true', default=False, help='运行耗时测试')


def pytest_configure(config):
    config.addinivalue_line('markers', 'slow: 耗时测试，需要 --run-slow')


def pytest_collection_modifyitems(config, items):
    if config.getoption('--run-slow'):
        return
    skip_slow = pytest.mark.skip(reason='需要 --run-slow')
    for item in items:
        if 'slow' in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def config():
    """加载默认配置"""
    from config import load_config
    config_path = Path(__file__).parent.parent / "config" / "config.yaml"
    cfg = load_config(str(config_path))
    cfg['output']['progress'] = False
    return cfg
