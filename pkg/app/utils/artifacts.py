"""
产物文件写出
CSV、键值文本和 8 位灰度 PGM，首行均为 # config_sha256=<hex>（PGM 为魔数后一行）
"""
import csv
import logging
from pathlib import Path
from typing import Iterable, Mapping, Sequence, Tuple, Union

import numpy as np

from app.utils.helpers import format_value

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def hash_header(config_hash: str) -> str:
    return f"# config_sha256={config_hash}"


def write_csv(path: PathLike, header: Sequence[str], rows: Iterable[Sequence[object]], config_hash: str) -> Path:
    """
    写出带配置哈希注释行的 CSV
    
    Args:
        path: 输出路径（父目录自动创建）
        header: 列名
        rows: 数据行
        config_hash: 配置哈希
    
    Returns:
        输出路径
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as handle:
        handle.write(hash_header(config_hash) + "\n")
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_value(value) for value in row])
    logger.debug("写出 %s", path)
    return path


def write_key_values(path: PathLike, items: Union[Mapping[str, object], Sequence[Tuple[str, object]]], config_hash: str) -> Path:
    """写出 key=value 文本报告，顺序与输入一致"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    pairs = list(items.items()) if isinstance(items, Mapping) else list(items)
    lines = [hash_header(config_hash)] + [f"{key}={format_value(value)}" for key, value in pairs]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    logger.debug("写出 %s", path)
    return path


def to_gray8(power: np.ndarray, dynamic_range_db: float = 60.0) -> np.ndarray:
    """
    线性功率映射为 0–255 灰度：峰值为 255，低于峰值 dynamic_range_db 的记为 0
    """
    power = np.asarray(power, dtype=float)
    peak = float(np.max(power)) if power.size else 0.0
    if peak <= 0.0:
        return np.zeros(power.shape, dtype=np.uint8)
    with np.errstate(divide="ignore"):
        rel_db = 10.0 * np.log10(power / peak)
    scaled = np.clip((rel_db + dynamic_range_db) / dynamic_range_db, 0.0, 1.0)
    return np.round(scaled * 255.0).astype(np.uint8)


def write_pgm(path: PathLike, power: np.ndarray, config_hash: str, dynamic_range_db: float = 60.0) -> Path:
    """
    写出二进制 PGM（P5），行对应距离单元、列对应方位单元
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    gray = to_gray8(power, dynamic_range_db)
    rows, cols = gray.shape
    header = f"P5\n{hash_header(config_hash)}\n{cols} {rows}\n255\n".encode("ascii")
    path.write_bytes(header + gray.tobytes())
    logger.debug("写出 %s", path)
    return path
