"""
テスト用の小さな問題定義
"""

from .problems import constant_problem, linear_history_problem, sine_problem

__all__ = ["constant_problem", "linear_history_problem", "sine_problem"]
