"""
数值引擎：透镜综合、角谱传播、单站散射、链路预算、FMCW信号链
"""
