"""
实验运行登记
"""
import json
import logging
from typing import Any, List, Optional

from sqlalchemy import select
from sqlalchemy.orm import Session

from app.core.exceptions import NotFoundException
from app.models.experiment_run import ExperimentRun, RunStatus
from app.utils.response_helpers import serialize_value

logger = logging.getLogger(__name__)


def record_run(
    db: Session,
    command: str,
    config_hash: str,
    seed: int,
    summary: Any = None,
    output_dir: Optional[str] = None,
    status: RunStatus = RunStatus.SUCCEEDED,
) -> ExperimentRun:
    """
    写入一条运行记录
    
    Args:
        db: 数据库会话（由调用方提交）
        command: 子命令
        config_hash: 配置哈希
        seed: 随机种子
        summary: 结果摘要，序列化为 JSON
        output_dir: 产物目录
        status: 运行状态
    
    Returns:
        新记录
    """
    run = ExperimentRun(
        command=command,
        config_hash=config_hash,
        seed=seed,
        status=status.value,
        summary=json.dumps(serialize_value(summary), ensure_ascii=False, sort_keys=True),
        output_dir=output_dir,
    )
    db.add(run)
    db.flush()
    logger.info("登记运行 %s: %s (%s)", run.id, command, status.value)
    return run


def list_runs(db: Session, command: Optional[str] = None, limit: int = 50) -> List[ExperimentRun]:
    stmt = select(ExperimentRun).order_by(ExperimentRun.id.desc()).limit(limit)
    if command:
        stmt = stmt.where(ExperimentRun.command == command)
    return list(db.scalars(stmt))


def get_run(db: Session, run_id: int) -> ExperimentRun:
    run = db.get(ExperimentRun, run_id)
    if run is None:
        raise NotFoundException(f"运行记录不存在: {run_id}")
    return run
