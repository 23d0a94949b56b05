"""
结果文件输出
CSV / JSON 两种格式，文件头嵌入配置、版本与误差代理声明
"""

import csv
import json
import logging
import subprocess
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

from src import __version__
from src.pipeline.experiment import ERROR_PROXY


logger = logging.getLogger(__name__)

SCHEMA_VERSION = "1"

# 固定列顺序（见 docs/OUTPUT_SCHEMAS.md）
SCHEMAS: Dict[str, List[str]] = {
    'rates': ['h', 'lambda_1', 'err', 'order'],
    'estimate': ['h', 'n', 'ndof', 'lambda', 'eta1', 'eta3', 'estimator', 'bound', 'error_proxy'],
    'entities': ['entity', 'id', 'x', 'y', 'eta1', 'eta2', 'eta3', 'eta0', 'eta1_1', 'eta1_2', 'indicator'],
    'adapt': ['iteration', 'ndof', 'n_triangles', 'lambda', 'estimator', 'marked', 'new_vertices_near_corner'],
    'check-element': ['suite', 'passed', 'detail'],
}


def eigs_columns(nev: int) -> List[str]:
    return ['h', 'n', 'ndof'] + [f'lambda_{i + 1}' for i in range(nev)] + ['max_residual']


def version_string() -> str:
    """git describe 风格的版本号；不在仓库中时退回包版本"""
    try:
        result = subprocess.run(
            ['git', 'describe', '--tags', '--always', '--dirty'],
            cwd=Path(__file__).resolve().parent,
            capture_output=True, text=True, timeout=5,
        )
        if result.returncode == 0 and result.stdout.strip():
            return result.stdout.strip()
    except (OSError, subprocess.SubprocessError):
        pass
    return f"v{__version__}"


def build_metadata(command: str, run_config: Dict[str, Any], deterministic: bool) -> Dict[str, Any]:
    metadata = {
        'command': command,
        'schema_version': SCHEMA_VERSION,
        'version': version_string(),
        'error_proxy': ERROR_PROXY,
        'config': run_config,
    }
    if not deterministic:
        metadata['created'] = datetime.now().isoformat(timespec='seconds')
    return metadata


def _cell(value: Any) -> str:
    if value is None:
        return ''
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, float):
        return repr(float(value))
    return str(value)


def write_csv(rows: Sequence[Dict[str, Any]], columns: Sequence[str], path: Union[str, Path],
              metadata: Optional[Dict[str, Any]] = None) -> Path:
    """
    写 CSV：以 '# key: value' 注释行开头，随后是表头与数据

    缺失值写为空字符串，浮点数用 repr 保证可复现
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8', newline='') as f:
        for key, value in (metadata or {}).items():
            text = json.dumps(value, sort_keys=True, ensure_ascii=False) if isinstance(value, dict) else value
            f.write(f"# {key}: {text}\n")
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_cell(row.get(column)) for column in columns])
    logger.info(f"已写出 {len(rows)} 行: {path}")
    return path


def write_json(rows: Sequence[Dict[str, Any]], columns: Sequence[str], path: Union[str, Path],
               metadata: Optional[Dict[str, Any]] = None, extra: Optional[Dict[str, Any]] = None) -> Path:
    """写 JSON：{'metadata', 'columns', 'rows', ...}，rows 字段与 CSV 列一致"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {
        'metadata': metadata or {},
        'columns': list(columns),
        'rows': [{column: row.get(column) for column in columns} for row in rows],
    }
    if extra:
        payload.update(extra)
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(payload, f, indent=2, sort_keys=True, ensure_ascii=False)
        f.write('\n')
    logger.info(f"已写出 {len(rows)} 行: {path}")
    return path


def write_table(rows: Sequence[Dict[str, Any]], columns: Sequence[str], path: Union[str, Path],
                fmt: str, metadata: Optional[Dict[str, Any]] = None,
                extra: Optional[Dict[str, Any]] = None) -> Path:
    if fmt == 'json':
        return write_json(rows, columns, path, metadata, extra)
    if fmt == 'csv':
        return write_csv(rows, columns, path, metadata)
    raise ValueError(f"不支持的输出格式: {fmt}")


def read_csv(path: Union[str, Path]) -> Dict[str, Any]:
    """读回 write_csv 的输出（测试与后处理用），返回 {'metadata', 'rows'}，数值列保持字符串"""
    metadata, lines = {}, []
    with open(path, 'r', encoding='utf-8') as f:
        for line in f:
            if line.startswith('# '):
                key, _, value = line[2:].rstrip('\n').partition(': ')
                metadata[key] = value
            else:
                lines.append(line)
    rows = list(csv.DictReader(lines))
    return {'metadata': metadata, 'rows': rows}


def format_table(rows: Sequence[Dict[str, Any]], columns: Sequence[str], digits: int = 9) -> str:
    """终端打印用的对齐表格"""
    def fmt(value):
        if value is None:
            return '-'
        if isinstance(value, float):
            return f"{value:.{digits}g}"
        return str(value)

    cells = [[fmt(row.get(column)) for column in columns] for row in rows]
    widths = [max([len(column)] + [len(c[i]) for c in cells]) for i, column in enumerate(columns)]
    lines = ["  ".join(column.rjust(w) for column, w in zip(columns, widths))]
    lines.append("  ".join('-' * w for w in widths))
    lines += ["  ".join(c.rjust(w) for c, w in zip(cell, widths)) for cell in cells]
    return "\n".join(lines)
