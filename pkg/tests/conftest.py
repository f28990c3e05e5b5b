"""
测试公共夹具
"""
from pathlib import Path

import pytest
from sqlalchemy.orm import sessionmaker

from app.database import build_engine, init_tables
from app.engine import fmcw, synthesis
from app.schemas.experiment import DEFAULT_LIBRARY_PATH

ROOT = Path(__file__).resolve().parents[1]
CONFIG_DIR = ROOT / "configs"

# (0, j), j = 0..10 的库相位与幅度
EXPECTED_COLUMN = [
    (11.28, 0.65), (11.28, 0.65), (30.26, 0.81), (61.94, 0.85), (107.79, 0.92), (166.71, 0.96),
    (238.93, 0.89), (313.86, 0.73), (45.18, 0.89), (142.41, 0.96), (243.44, 0.89),
]


@pytest.fixture(scope="session")
def library():
    return synthesis.load_library(DEFAULT_LIBRARY_PATH)


@pytest.fixture(scope="session")
def lens_spec():
    return synthesis.LensSpec(cells_per_side=21, pitch_mm=1.728, focal_length_mm=20.0, design_frequency_ghz=78.5)


@pytest.fixture(scope="session")
def quantized_lens(lens_spec, library):
    return synthesis.build_quantized_lens(lens_spec, library)


@pytest.fixture(scope="session")
def ideal_mask(quantized_lens):
    return synthesis.lens_to_mask(quantized_lens, samples_per_cell=4, mode="ideal")


@pytest.fixture
def small_chirp():
    """完整快时间采样、少量重复的调频配置"""
    return fmcw.ChirpConfig(chirps_per_tx=2)


@pytest.fixture
def ula():
    return fmcw.VirtualArray.uniform(4, 4)


@pytest.fixture
def db_session():
    engine = build_engine("sqlite://")
    init_tables(engine)
    session = sessionmaker(autocommit=False, autoflush=False, bind=engine)()
    try:
        yield session
    finally:
        session.close()
        engine.dispose()
