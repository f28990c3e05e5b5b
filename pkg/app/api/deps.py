"""
API依赖与公共构建
"""
from typing import Any, Dict, List, Optional, Sequence

from sqlalchemy.orm import Session

from app.core.exceptions import DataFormatException
from app.engine import synthesis
from app.schemas.experiment import DEFAULT_LIBRARY_PATH, LensBlock
from app.utils.helpers import config_sha256
from app.utils.response_helpers import serialize_value
from app.utils.run_registry import record_run


def resolve_library(entries: Optional[Sequence[Dict[str, Any]]] = None) -> List[synthesis.UnitCellEntry]:
    """请求中给出的单元库，未给出时读取内置库"""
    if not entries:
        return synthesis.load_library(DEFAULT_LIBRARY_PATH)
    try:
        return [synthesis.UnitCellEntry(**entry) for entry in entries]
    except (TypeError, ValueError) as e:
        raise DataFormatException(f"单元库条目不合法: {e}")


def lens_spec_from_block(block: LensBlock) -> synthesis.LensSpec:
    return synthesis.LensSpec(
        cells_per_side=block.cells_per_side,
        pitch_mm=block.cell_pitch_mm,
        focal_length_mm=block.focal_length_mm,
        design_frequency_ghz=block.frequency_ghz,
    )


def build_mask(block: LensBlock, library: Sequence[synthesis.UnitCellEntry]):
    lens = synthesis.build_quantized_lens(lens_spec_from_block(block), library)
    return synthesis.lens_to_mask(lens, block.samples_per_cell, block.mask_mode)


def record_api_run(db: Session, command: str, payload: Any, summary: Any, seed: int = 0) -> str:
    """
    登记一次API运行并提交
    
    Returns:
        运行ID（字符串形式）
    """
    config_hash = config_sha256(serialize_value(payload))
    run = record_run(db, command, config_hash, seed, summary)
    db.commit()
    return str(run.id)
