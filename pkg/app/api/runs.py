"""
运行记录接口
"""
import json
from typing import Optional

from fastapi import APIRouter, Depends, Path, Query
from sqlalchemy.orm import Session

from app.core.response import success_response
from app.database import get_db
from app.utils.helpers import format_datetime_china
from app.utils.run_registry import get_run, list_runs

router = APIRouter()


def _run_to_dict(run) -> dict:
    return {
        "id": str(run.id),
        "command": run.command,
        "config_hash": run.config_hash,
        "seed": run.seed,
        "status": run.status,
        "summary": json.loads(run.summary) if run.summary else None,
        "output_dir": run.output_dir,
        "created_at": format_datetime_china(run.created_at),
    }


@router.get("", summary="运行记录列表")
async def get_runs(
    command: Optional[str] = Query(None, description="按子命令筛选"),
    limit: int = Query(50, ge=1, le=500, description="返回数量"),
    db: Session = Depends(get_db),
):
    runs = list_runs(db, command, limit)
    return success_response(data={"total": len(runs), "items": [_run_to_dict(run) for run in runs]})


@router.get("/{run_id}", summary="运行记录详情")
async def get_run_detail(run_id: int = Path(..., description="运行ID"), db: Session = Depends(get_db)):
    return success_response(data=_run_to_dict(get_run(db, run_id)))
