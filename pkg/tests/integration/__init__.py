"""
統合テストモジュール
"""

# 統合テストのベース設定や共通ユーティリティはここに追加
__all__ = []
