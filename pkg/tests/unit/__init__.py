"""
単体テストモジュール
"""

# 単体テストのベース設定や共通ユーティリティはここに追加
__all__ = []
