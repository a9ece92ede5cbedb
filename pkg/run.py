#!/usr/bin/env python3
"""
RabiDarkLab 起動スクリプト
"""

import importlib.util
import sys


def check_dependencies():
    """数値計算ライブラリの有無をチェック"""
    missing = [name for name in ("numpy", "scipy") if importlib.util.find_spec(name) is None]
    for name in ("numpy", "scipy"):
        print(f"{'❌' if name in missing else '✅'} {name}")
    return not missing


def main():
    """メイン関数"""
    print("🚀 RabiDarkLab を起動しています...")

    if not check_dependencies():
        print("⚠️  依存パッケージが不足しています。")
        print("以下のコマンドでインストールしてください:")
        print("  pip install -r requirements.txt")
        sys.exit(1)

    if len(sys.argv) == 1:
        print("使い方: python run.py run configs/example_aqrm2.json")
        print("        python run.py figure 1a")

    from src.main import main as cli_main

    try:
        sys.exit(cli_main())
    except KeyboardInterrupt:
        print("\n👋 RabiDarkLab を中断しました")
        sys.exit(130)


if __name__ == "__main__":
    main()
