from app.schemas.experiment import (
    ArrayBlock,
    BraggRequest,
    CalibrationBlock,
    CalibrationRequest,
    ChirpBlock,
    ExperimentConfig,
    FmcwScenarioRequest,
    FocalScanRequest,
    LensBlock,
    LensRequest,
    LinkBlock,
    LinkRequest,
    NoiseBlock,
    PropagationBlock,
    ScanBlock,
    SceneBlock,
    SweepBlock,
    SweepRequest,
    TagBlock,
    TargetBlock,
    load_experiment_config,
    validate_inputs,
)
