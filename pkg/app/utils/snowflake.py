"""
雪花算法ID生成器
为实验运行记录生成唯一的长整型ID
"""
import threading
import time

from app.core.exceptions import NumericalException


class SnowflakeGenerator:
    """
    64位ID：1位符号位 + 41位毫秒时间戳 + 10位节点ID + 12位序列号
    """
    
    # 时间戳起始点：2025-01-01 00:00:00 UTC
    EPOCH = 1735689600000
    
    NODE_ID_BITS = 10
    SEQUENCE_BITS = 12
    MAX_NODE_ID = (1 << NODE_ID_BITS) - 1
    MAX_SEQUENCE = (1 << SEQUENCE_BITS) - 1
    NODE_ID_SHIFT = SEQUENCE_BITS
    TIMESTAMP_SHIFT = SEQUENCE_BITS + NODE_ID_BITS
    
    def __init__(self, node_id: int = 1):
        """
        Args:
            node_id: 节点ID (0-1023)
        """
        if not 0 <= node_id <= self.MAX_NODE_ID:
            raise ValueError(f"node_id必须在0-{self.MAX_NODE_ID}之间")
        self.node_id = node_id
        self.sequence = 0
        self.last_timestamp = -1
        self.lock = threading.Lock()
    
    @staticmethod
    def _current_timestamp() -> int:
        return int(time.time() * 1000)
    
    def generate_id(self) -> int:
        with self.lock:
            timestamp = self._current_timestamp()
            if timestamp < self.last_timestamp:
                raise NumericalException(
                    f"时钟回拨，拒绝生成ID。当前时间戳：{timestamp}，上次时间戳：{self.last_timestamp}"
                )
            if timestamp == self.last_timestamp:
                self.sequence = (self.sequence + 1) & self.MAX_SEQUENCE
                # 序列号溢出，等待下一毫秒
                while self.sequence == 0 and timestamp <= self.last_timestamp:
                    timestamp = self._current_timestamp()
            else:
                self.sequence = 0
            self.last_timestamp = timestamp
            return ((timestamp - self.EPOCH) << self.TIMESTAMP_SHIFT) | (self.node_id << self.NODE_ID_SHIFT) | self.sequence


_generator = SnowflakeGenerator()


def generate_id() -> int:
    """生成运行ID（全局生成器）"""
    return _generator.generate_id()
