"""
数据库初始化脚本
创建实验运行记录表
"""
from app.config import settings
from app.database import engine, init_tables


def init_database():
    """初始化数据库"""
    print(f"开始创建数据库表（{settings.DATABASE_URL}）...")
    init_tables(engine)
    print("数据库表创建完成！")


if __name__ == "__main__":
    init_database()
