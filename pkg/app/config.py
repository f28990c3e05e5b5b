"""
项目配置文件
使用Pydantic Settings进行配置管理，提供类型验证和更好的配置管理
所有物理量默认值均带单位后缀（mm / GHz / dB），内部统一使用毫米和吉赫兹
"""
from typing import List
from pydantic_settings import BaseSettings
from pydantic import Field


class Settings(BaseSettings):
    """应用配置"""
    
    # 项目信息
    PROJECT_NAME: str = "超表面透镜雷达标记设计验证工具"
    VERSION: str = "1.0.0"
    API_V1_PREFIX: str = "/api/v1"
    
    # 运行记录数据库（默认SQLite文件，可改为其他SQLAlchemy URL）
    DATABASE_URL: str = "sqlite:///./metalens_marker_runs.db"
    DB_POOL_RECYCLE: int = Field(default=3600, ge=0, description="连接回收时间（秒）")
    
    # 日志
    LOG_LEVEL: str = Field(default="INFO", description="日志级别")
    
    # 输出与运行
    DEFAULT_OUTPUT_DIR: str = Field(default="out", description="默认输出目录")
    DEFAULT_SEED: int = Field(default=0, ge=0, description="默认随机种子")
    DEFAULT_THREADS: int = Field(default=1, ge=1, le=256, description="默认线程数")
    
    # 透镜设计默认值
    DESIGN_FREQUENCY_GHZ: float = Field(default=78.5, gt=0, description="设计频率（GHz）")
    FOCAL_LENGTH_MM: float = Field(default=20.0, gt=0, description="焦距（mm）")
    CELL_PITCH_MM: float = Field(default=1.728, gt=0, description="单元周期（mm）")
    CELLS_PER_SIDE: int = Field(default=21, ge=3, description="每边单元数（奇数）")
    SAMPLES_PER_CELL: int = Field(default=4, ge=2, description="每个单元的采样点数")
    PADDING_FACTOR: int = Field(default=2, ge=1, le=8, description="角谱传播补零倍数")
    
    # 贴片层与标签装配默认值
    PATCH_LENGTH_MM: float = Field(default=0.84, gt=0, description="贴片长度（E面，mm）")
    PATCH_WIDTH_MM: float = Field(default=1.28, gt=0, description="贴片宽度（mm）")
    PATCH_PERIOD_MM: float = Field(default=2.48, gt=0, description="贴片中心间距（mm）")
    TAG_SEPARATION_MM: float = Field(default=20.0, gt=0, description="透镜与贴片层间距（mm）")
    BOARD_EXTENT_MM: float = Field(default=53.0, gt=0, description="板尺寸（mm）")
    
    # RCS输出下限（dBsm），避免CSV中出现-inf
    RCS_FLOOR_DBSM: float = -200.0
    
    # 链路预算默认值
    DETECTION_THRESHOLD_DB: float = 10.0
    PATCH_ANTENNA_GAIN_DBI: float = 5.0
    EXTRAPOLATION_LIMIT: float = Field(default=2.0, gt=1.0, description="超过锚点距离该倍数时标记为外推")
    
    # CORS配置
    CORS_ORIGINS: List[str] = ["*"]
    
    # 应用配置
    DEBUG: bool = Field(default=False, description="调试模式")
    
    class Config:
        case_sensitive = True
        env_prefix = "MARKER_"
        env_file = None


settings = Settings()
