"""
FastAPI应用主入口
"""
import logging

from fastapi import FastAPI, Request, status
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import ValidationError
from starlette.exceptions import HTTPException as StarletteHTTPException

from app.api import api_router
from app.config import settings
from app.core.exceptions import BaseToolkitException
from app.core.middleware import ProcessTimeMiddleware, setup_cors_middleware
from app.core.response import error_body, success_response
from app.database import init_tables

logger = logging.getLogger(__name__)


def create_application() -> FastAPI:
    """
    创建FastAPI应用实例
    使用工厂模式，便于测试和配置管理
    """
    logging.basicConfig(level=getattr(logging, settings.LOG_LEVEL.upper(), logging.INFO))
    app = FastAPI(
        title=settings.PROJECT_NAME,
        version=settings.VERSION,
        description="超表面透镜逆向反射雷达标记仿真API",
        docs_url="/docs",
        redoc_url="/redoc",
        openapi_url="/openapi.json",
    )
    
    setup_cors_middleware(app)
    app.add_middleware(ProcessTimeMiddleware)
    register_exception_handlers(app)
    app.include_router(api_router)
    
    @app.on_event("startup")
    def _create_tables():
        init_tables()
    
    @app.get("/", summary="根路径")
    async def root():
        return success_response(
            data={"message": settings.PROJECT_NAME, "version": settings.VERSION, "docs": "/docs"}
        )
    
    @app.get("/health", summary="健康检查")
    async def health_check():
        return success_response(data={"status": "ok"}, msg="服务正常")
    
    return app


def register_exception_handlers(app: FastAPI):
    """注册异常处理器，统一响应格式"""
    
    @app.exception_handler(BaseToolkitException)
    async def toolkit_exception_handler(request: Request, exc: BaseToolkitException):
        """处理工具包异常（输入不合法、文件格式、数值错误等）"""
        return JSONResponse(status_code=exc.status_code, content=error_body(exc.status_code, str(exc.detail)))
    
    @app.exception_handler(StarletteHTTPException)
    async def http_exception_handler(request: Request, exc: StarletteHTTPException):
        """处理HTTP异常"""
        msg = exc.detail if isinstance(exc.detail, str) else str(exc.detail)
        return JSONResponse(status_code=exc.status_code, content=error_body(exc.status_code, msg))
    
    @app.exception_handler(RequestValidationError)
    async def validation_exception_handler(request: Request, exc: RequestValidationError):
        """处理请求验证异常"""
        errors = exc.errors()
        error_msg = errors[0].get("msg", "请求参数验证失败") if errors else "请求参数验证失败"
        return JSONResponse(
            status_code=status.HTTP_422_UNPROCESSABLE_ENTITY,
            content=error_body(status.HTTP_422_UNPROCESSABLE_ENTITY, error_msg),
        )
    
    @app.exception_handler(ValidationError)
    async def model_validation_handler(request: Request, exc: ValidationError):
        """处理引擎对象构造时的校验失败"""
        errors = exc.errors()
        error_msg = errors[0].get("msg", "参数校验失败") if errors else "参数校验失败"
        return JSONResponse(
            status_code=status.HTTP_422_UNPROCESSABLE_ENTITY,
            content=error_body(status.HTTP_422_UNPROCESSABLE_ENTITY, error_msg),
        )
    
    @app.exception_handler(Exception)
    async def general_exception_handler(request: Request, exc: Exception):
        """处理其他未捕获的异常"""
        logger.exception("未处理的异常")
        return JSONResponse(
            status_code=status.HTTP_500_INTERNAL_SERVER_ERROR,
            content=error_body(
                status.HTTP_500_INTERNAL_SERVER_ERROR, "服务器内部错误" if not settings.DEBUG else str(exc)
            ),
        )


app = create_application()
