"""
实验运行记录模型
"""
import enum

from sqlalchemy import BigInteger, Column, DateTime, Integer, String, Text

from app.database import Base
from app.utils.helpers import get_china_now
from app.utils.snowflake import generate_id


class RunStatus(str, enum.Enum):
    """运行状态枚举"""
    SUCCEEDED = "succeeded"
    FAILED = "failed"


class ExperimentRun(Base):
    """实验运行表"""
    __tablename__ = "experiment_runs"
    
    id = Column(BigInteger, primary_key=True, default=generate_id, index=True, comment="运行ID")
    command = Column(String(32), nullable=False, index=True, comment="子命令（synthesize、focus-scan等）")
    config_hash = Column(String(64), nullable=False, index=True, comment="配置SHA-256")
    seed = Column(Integer, nullable=False, default=0, comment="随机种子")
    status = Column(String(16), nullable=False, default=RunStatus.SUCCEEDED.value, comment="运行状态")
    summary = Column(Text, nullable=True, comment="结果摘要，JSON格式存储")
    output_dir = Column(String(500), nullable=True, comment="产物目录")
    created_at = Column(DateTime(timezone=True), default=get_china_now, nullable=False, comment="创建时间（中国时间UTC+8）")
    
    def __repr__(self):
        return f"<ExperimentRun(id={self.id}, command={self.command}, status={self.status})>"
