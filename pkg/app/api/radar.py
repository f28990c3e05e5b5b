"""
FMCW雷达接口
"""
from fastapi import APIRouter, Depends
from sqlalchemy.orm import Session

from app.api.deps import record_api_run
from app.core.response import success_response
from app.database import get_db
from app.engine import fmcw
from app.schemas.experiment import ChirpBlock, ExperimentConfig, FmcwScenarioRequest

router = APIRouter()


@router.post("/derived", summary="调频派生参数")
async def derived(chirp: ChirpBlock):
    """带宽、距离分辨率、最大距离与距离单元"""
    config = ExperimentConfig(chirp=chirp).chirp_config()
    return success_response(data=fmcw.derived_params(config))


@router.post("/scenario", summary="场景合成与处理")
def scenario(request: FmcwScenarioRequest, db: Session = Depends(get_db)):
    """
    合成点目标帧并处理为距离–方位谱，返回峰值与 SNR
    
    谱本身较大，接口只返回峰值报告；完整谱使用命令行 fmcw 子命令导出
    """
    config = ExperimentConfig(
        chirp=request.chirp, array=request.array, targets=request.targets, noise=request.noise, seed=request.seed
    )
    chirp = config.chirp_config()
    array = config.virtual_array()
    ra_map = fmcw.process_frame(fmcw.synthesize_frame(chirp, array, config.point_targets(), config.noise_spec()))
    noise_map = None
    if config.noise.level_db is not None and config.noise.sky_frame:
        sky = fmcw.synthesize_frame(chirp, array, [], config.noise_spec(seed_offset=1))
        noise_map = fmcw.process_frame(sky)
    peak = fmcw.peak_and_snr(ra_map, noise_map=noise_map)
    run_id = record_api_run(db, "fmcw", request, peak, seed=request.seed)
    return success_response(data={"derived": fmcw.derived_params(chirp), "peak": peak, "run_id": run_id})
