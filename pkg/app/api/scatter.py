"""
散射仿真接口
"""
from fastapi import APIRouter, Depends
from sqlalchemy.orm import Session

from app.api.deps import build_mask, record_api_run, resolve_library
from app.core.response import success_response
from app.core.units import wavelength_of
from app.database import get_db
from app.engine import scatter
from app.schemas.experiment import BraggRequest, SweepRequest

router = APIRouter()


@router.post("/sweep", summary="RCS–方位扫描")
def rcs_sweep(request: SweepRequest, db: Session = Depends(get_db)):
    """
    标签与/或单独贴片层的单站 RCS 扫描
    
    - **tag.mode**: tag、patch 或 both
    - **sweep**: 角度区间、步长与统计覆盖角
    """
    block = request.tag
    tag = scatter.TagAssembly(
        lens_mask=build_mask(request.lens, resolve_library()),
        patch_plane=scatter.PatchPlaneSpec(
            patch_length_mm=block.patch_length_mm,
            patch_width_mm=block.patch_width_mm,
            period_mm=block.patch_period_mm,
            extent_mm=(block.board_extent_mm, block.board_extent_mm),
            patch_reflection=block.patch_reflection,
            ground_reflection=block.ground_reflection,
        ),
        separation_mm=block.separation_mm,
        board_extent_mm=block.board_extent_mm,
        padding_factor=request.padding_factor,
    )
    s = request.sweep
    data = {}
    if block.mode in ("tag", "both"):
        sweep = scatter.sweep_rcs(tag, s.start_deg, s.stop_deg, s.step_deg, label="tag")
        data["tag"] = {"sweep": sweep, "stats": scatter.sweep_stats(sweep, s.coverage_deg)}
    if block.mode in ("patch", "both"):
        sweep = scatter.sweep_rcs(tag.patch_plane, s.start_deg, s.stop_deg, s.step_deg, like=scatter.board_grid(tag), label="patch")
        data["patch"] = {"sweep": sweep, "stats": scatter.sweep_stats(sweep, s.coverage_deg)}
    data["run_id"] = record_api_run(
        db, "rcs-sweep", request, {name: item["stats"] for name, item in data.items() if isinstance(item, dict)}
    )
    return success_response(data=data)


@router.post("/bragg", summary="布拉格方向")
async def bragg(request: BraggRequest):
    """周期贴片层的单站布拉格方向 2d·sinθ = mλ"""
    result = scatter.bragg_angles(request.period_mm, wavelength_of(request.frequency_ghz), request.orders)
    return success_response(data=result)
