"""
RabiDarkLab - 2量子ビット非対称ラビ模型のダーク状態と隠れた対称性の数値ツールキット
"""

__version__ = "0.1.0"
__author__ = "RabiDarkLab Team"
__description__ = "2量子ビット非対称ラビ模型のダーク状態と隠れた対称性の数値ツールキット"
