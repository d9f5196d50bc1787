"""
E2Eテストモジュール
"""

# E2Eテストのベース設定や共通ユーティリティはここに追加
__all__ = []
