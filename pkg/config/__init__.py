"""配置模块"""

import copy
import os
import yaml
from typing import Dict, Any, Iterable


def load_config(config_path: str = None) -> Dict[str, Any]:
    """
    加载配置文件

    Args:
        config_path: 配置文件路径，默认为 config/config.yaml

    Returns:
        配置字典
    """
    if config_path is None:
        # 获取项目根目录
        current_dir = os.path.dirname(os.path.abspath(__file__))
        config_path = os.path.join(current_dir, "config.yaml")

    if not os.path.exists(config_path):
        raise FileNotFoundError(f"配置文件不存在: {config_path}")

    with open(config_path, 'r', encoding='utf-8') as f:
        config = yaml.safe_load(f)

    return config or {}


def get_config_value(config: Dict[str, Any], key_path: str, default=None) -> Any:
    """
    通过点分隔的路径获取配置值

    Args:
        config: 配置字典
        key_path: 配置路径，如 'solver.tol'
        default: 默认值

    Returns:
        配置值
    """
    keys = key_path.split('.')
    value = config

    for key in keys:
        if isinstance(value, dict) and key in value:
            value = value[key]
        else:
            return default

    return value


def set_config_value(config: Dict[str, Any], key_path: str, value: Any) -> Dict[str, Any]:
    """按点分隔路径写入配置值，缺失的中间层自动创建"""
    keys = key_path.split('.')
    node = config
    for key in keys[:-1]:
        if not isinstance(node.get(key), dict):
            node[key] = {}
        node = node[key]
    node[keys[-1]] = value
    return config


def merge_config(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    """逐段合并，override 优先；返回新字典"""
    merged = copy.deepcopy(base)
    for key, value in (override or {}).items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = merge_config(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def parse_overrides(lines: Iterable[str]) -> Dict[str, Any]:
    """
    解析 key=value 覆盖行

    空行与 # 开头的行被忽略，值按 YAML 标量解析（1.0e-10、true、[4, 8] 均可）
    """
    overrides: Dict[str, Any] = {}
    for number, raw in enumerate(lines, 1):
        line = raw.strip()
        if not line or line.startswith('#'):
            continue
        key, sep, value = line.partition('=')
        if not sep or not key.strip():
            raise ValueError(f"第 {number} 行不是 key=value 格式: {raw.rstrip()}")
        set_config_value(overrides, key.strip(), yaml.safe_load(value.strip()))
    return overrides


def load_overrides(path: str) -> Dict[str, Any]:
    """读取覆盖文件：.yaml/.yml 按 YAML 解析，其他按 key=value 行解析"""
    if not os.path.exists(path):
        raise FileNotFoundError(f"配置文件不存在: {path}")
    if path.endswith(('.yaml', '.yml')):
        return load_config(path)
    with open(path, 'r', encoding='utf-8') as f:
        return parse_overrides(f)
