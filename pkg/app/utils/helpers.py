"""
工具函数
"""
import hashlib
import json
import math
from datetime import datetime, timezone, timedelta
from typing import Any, Optional

# 中国时区（UTC+8），仅用于运行记录的时间戳
CHINA_TIMEZONE = timezone(timedelta(hours=8))

# 产物文件中浮点数的统一格式
FLOAT_FORMAT = ".12g"


def get_china_now() -> datetime:
    """
    获取当前中国时间（UTC+8，带时区信息）
    
    Returns:
        datetime: 当前中国时间
    """
    return datetime.now(CHINA_TIMEZONE)


def format_datetime_china(dt: Optional[datetime]) -> Optional[str]:
    """
    将datetime格式化为中国时间（UTC+8）ISO格式字符串
    
    Args:
        dt: datetime对象（可以是naive或aware）
    
    Returns:
        str: ISO格式字符串，dt为None时返回None
    """
    if dt is None:
        return None
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=CHINA_TIMEZONE)
    else:
        dt = dt.astimezone(CHINA_TIMEZONE)
    return dt.isoformat()


def format_value(value: Any) -> str:
    """
    产物文件中单个值的文本形式
    
    浮点数使用固定的有效位数，保证同一输入两次运行的输出逐字节一致
    """
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return format(value, FLOAT_FORMAT)
    if hasattr(value, "item") and callable(value.item):
        return format_value(value.item())
    return str(value)


def canonical_json(data: Any) -> str:
    """键排序、无多余空白的 JSON 文本"""
    return json.dumps(data, sort_keys=True, separators=(",", ":"), ensure_ascii=False, default=str)


def config_sha256(data: Any) -> str:
    """
    计算配置哈希
    
    Args:
        data: 已解析的配置（字典）
    
    Returns:
        规范 JSON 的 SHA-256 十六进制摘要
    """
    return hashlib.sha256(canonical_json(data).encode("utf-8")).hexdigest()
