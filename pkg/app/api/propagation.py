"""
传播仿真接口
"""
from fastapi import APIRouter, Depends
from sqlalchemy.orm import Session

from app.api.deps import build_mask, record_api_run, resolve_library
from app.core.response import success_response
from app.database import get_db
from app.engine import propagation
from app.schemas.experiment import FocalScanRequest

router = APIRouter()


@router.post("/focal-scan", summary="焦点扫描")
def focal_scan(request: FocalScanRequest, db: Session = Depends(get_db)):
    """平面波经透镜掩模后的轴上强度扫描"""
    mask = build_mask(request.lens, resolve_library())
    scan = request.scan
    result = propagation.focal_scan(mask, scan.z_start_mm, scan.z_stop_mm, scan.steps, request.padding_factor)
    run_id = record_api_run(db, "focus-scan", request, {"peak_z_mm": result.peak_z_mm})
    return success_response(data={**result.model_dump(), "run_id": run_id})
