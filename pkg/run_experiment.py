#!/usr/bin/env python3
"""
实验运行脚本

使用方法：
    python run_experiment.py --config configs/focus_scan.toml focus-scan
    python run_experiment.py --out out/link link
"""
import sys

from app.cli import main

if __name__ == "__main__":
    sys.exit(main())
