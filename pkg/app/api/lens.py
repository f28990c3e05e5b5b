"""
透镜综合接口
"""
from fastapi import APIRouter, Depends
from sqlalchemy.orm import Session

from app.api.deps import lens_spec_from_block, record_api_run, resolve_library
from app.core.response import success_response
from app.database import get_db
from app.engine import synthesis
from app.schemas.experiment import LensRequest

router = APIRouter()


@router.post("/lens", summary="透镜相位综合与量化")
def synthesize_lens(request: LensRequest, db: Session = Depends(get_db)):
    """
    计算各单元理想相位并在单元库中就近量化
    
    - **library**: 单元库条目（可选，默认内置库）
    
    返回 (0, j) 列分配表与量化误差统计
    """
    library = resolve_library(request.library)
    lens = synthesis.build_quantized_lens(lens_spec_from_block(request), library)
    summary = {
        "ring_table": synthesis.ring_table(lens),
        "max_library_gap_deg": synthesis.max_library_gap(library),
        **synthesis.quantization_error_stats(lens),
    }
    summary["run_id"] = record_api_run(db, "synthesize", request, {k: v for k, v in summary.items() if k != "ring_table"})
    return success_response(data=summary)
