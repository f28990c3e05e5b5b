"""
数据库连接和会话管理
使用SQLAlchemy 2.0，默认SQLite文件保存实验运行记录
"""
from contextlib import contextmanager

from sqlalchemy import create_engine
from sqlalchemy.orm import DeclarativeBase, Session, sessionmaker
from sqlalchemy.pool import StaticPool

from app.config import settings


class Base(DeclarativeBase):
    """SQLAlchemy 2.0 基础模型类"""
    pass


def build_engine(url: str = settings.DATABASE_URL):
    """
    创建数据库引擎
    
    SQLite 允许跨线程使用连接；内存库使用单连接池，保证所有会话看到同一个库
    """
    if url.startswith("sqlite"):
        kwargs = {"connect_args": {"check_same_thread": False}}
        if ":memory:" in url or url == "sqlite://":
            kwargs["poolclass"] = StaticPool
        return create_engine(url, echo=settings.DEBUG, future=True, **kwargs)
    return create_engine(
        url,
        pool_recycle=settings.DB_POOL_RECYCLE,
        pool_pre_ping=True,
        echo=settings.DEBUG,
        future=True,
    )


engine = build_engine()

SessionLocal = sessionmaker(autocommit=False, autoflush=False, bind=engine, future=True)


def init_tables(bind=None) -> None:
    """创建所有表（已存在的表不变）"""
    import app.models  # noqa: F401  注册模型
    Base.metadata.create_all(bind=bind or engine)


def get_db() -> Session:
    """
    获取数据库会话（依赖注入）
    """
    db = SessionLocal()
    try:
        yield db
    finally:
        db.close()


@contextmanager
def get_db_context():
    """
    获取数据库会话上下文管理器
    """
    db = SessionLocal()
    try:
        yield db
        db.commit()
    except Exception:
        db.rollback()
        raise
    finally:
        db.close()
