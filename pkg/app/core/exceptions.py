"""
统一异常处理
所有异常都携带HTTP状态码和命令行退出码，API层转换为统一响应格式，CLI层转换为退出码
"""
from typing import Any, Optional


class BaseToolkitException(Exception):
    """基础异常类"""
    
    status_code: int = 500
    exit_code: int = 2
    default_detail: str = "处理失败"
    
    def __init__(self, detail: Any = None):
        # 确保detail是字符串
        if detail is None:
            detail = self.default_detail
        elif not isinstance(detail, str):
            detail = str(detail)
        self.detail = detail
        super().__init__(detail)


class DomainException(BaseToolkitException, ValueError):
    """物理输入越界（非正频率、空库、角度≥90°等）"""
    
    status_code = 400
    exit_code = 1
    default_detail = "输入参数超出定义域"


class ConfigValidationException(BaseToolkitException):
    """实验配置校验失败"""
    
    status_code = 422
    exit_code = 1
    default_detail = "配置校验失败"


class DataFormatException(BaseToolkitException):
    """数据文件格式错误，附带文件和行号"""
    
    status_code = 400
    exit_code = 1
    default_detail = "数据文件格式错误"
    
    def __init__(self, detail: Any = None, path: Optional[str] = None, line: Optional[int] = None):
        if path is not None:
            location = f"{path}:{line}" if line is not None else path
            detail = f"{location}: {detail if detail is not None else self.default_detail}"
        self.path = path
        self.line = line
        super().__init__(detail)


class NotFoundException(BaseToolkitException):
    """文件或记录不存在"""
    
    status_code = 404
    exit_code = 1
    default_detail = "资源不存在"


class NumericalException(BaseToolkitException):
    """数值计算失败（网格不匹配、结果非有限等）"""
    
    status_code = 500
    exit_code = 2
    default_detail = "数值计算失败"
