"""
链路预算接口
"""
from fastapi import APIRouter, Depends
from sqlalchemy.orm import Session

from app.api.deps import record_api_run
from app.core.response import success_response
from app.core.units import wavelength_of
from app.database import get_db
from app.engine import link
from app.schemas.experiment import CalibrationRequest, LinkRequest

router = APIRouter()


@router.post("/report", summary="链路预算报告")
def link_report(request: LinkRequest, db: Session = Depends(get_db)):
    """探测距离、RCS对应增益、距离扩展倍数，以及 SNR–距离曲线"""
    anchor = link.SnrSample(range_m=request.anchor_range_m, snr_db=request.anchor_snr_db)
    rows = link.link_report(
        anchor,
        threshold_db=request.threshold_db,
        wavelength_m=wavelength_of(request.frequency_ghz) * 1e-3,
        tag_rcs_dbsm=request.tag_rcs_dbsm,
        reference_rcs_dbsm=request.reference_rcs_dbsm,
        marker_delta_db=request.marker_delta_db,
    )
    curve = link.snr_curve(anchor, request.curve_ranges_m)
    run_id = record_api_run(db, "link", request, link.report_dict(rows))
    return success_response(data={"rows": rows, "snr_curve": curve, "run_id": run_id})


@router.post("/calibrate", summary="球体定标")
def calibrate(request: CalibrationRequest, db: Session = Depends(get_db)):
    """由定标球回波求定标因子，并换算待测目标 RCS"""
    sphere = link.sphere_rcs(request.sphere_diameter, request.sphere_unit)
    factor = link.calibrate(request.sphere_power_db, sphere, request.range_m)
    data = {"sphere_rcs_dbsm": sphere, "factor": factor}
    if request.target_power_db is not None:
        data["target_rcs_dbsm"] = link.apply_calibration(
            factor, request.target_power_db, request.target_range_m, correct_range=request.target_range_m is not None
        )
    data["run_id"] = record_api_run(db, "calibrate", request, {k: v for k, v in data.items() if k != "factor"})
    return success_response(data=data)
