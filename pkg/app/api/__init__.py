"""
API路由统一注册
"""
from fastapi import APIRouter

from app.api import lens, link, propagation, radar, runs, scatter
from app.config import settings

api_router = APIRouter(prefix=settings.API_V1_PREFIX)

api_router.include_router(lens.router, prefix="/synthesis", tags=["透镜综合"])
api_router.include_router(propagation.router, prefix="/propagation", tags=["传播仿真"])
api_router.include_router(scatter.router, prefix="/scatter", tags=["散射仿真"])
api_router.include_router(link.router, prefix="/link", tags=["链路预算"])
api_router.include_router(radar.router, prefix="/fmcw", tags=["FMCW雷达"])
api_router.include_router(runs.router, prefix="/runs", tags=["运行记录"])

__all__ = ["api_router"]
