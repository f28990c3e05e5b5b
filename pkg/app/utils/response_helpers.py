"""
响应辅助函数
将引擎结果（pydantic 模型、numpy 数组、复数）转换为可 JSON 序列化的结构
"""
import math
from datetime import datetime
from typing import Any

import numpy as np


def serialize_value(value: Any) -> Any:
    """
    递归序列化
    
    numpy 数组转列表，复数转 {"re", "im"}，非有限浮点数转 None
    """
    if hasattr(value, "model_dump"):
        return {k: serialize_value(getattr(value, k)) for k in type(value).model_fields}
    if isinstance(value, np.ndarray):
        return serialize_value(value.tolist())
    if isinstance(value, (np.generic,)):
        return serialize_value(value.item())
    if isinstance(value, complex):
        return {"re": serialize_value(value.real), "im": serialize_value(value.imag)}
    if isinstance(value, float):
        return value if math.isfinite(value) else None
    if isinstance(value, datetime):
        return value.isoformat()
    if isinstance(value, (list, tuple)):
        return [serialize_value(item) for item in value]
    if isinstance(value, dict):
        return {str(k): serialize_value(v) for k, v in value.items()}
    return value
