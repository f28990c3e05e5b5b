"""
ORM 模型
"""
from app.models.experiment_run import ExperimentRun, RunStatus

__all__ = ["ExperimentRun", "RunStatus"]
