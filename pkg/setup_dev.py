#!/usr/bin/env python3
"""
RabiDarkLab - 開発環境セットアップスクリプト
"""

import os
import subprocess
import sys
from pathlib import Path


def run_command(command: str, description: str = None) -> bool:
    """コマンドを実行し、結果を表示"""
    if description:
        print(f"\n🔧 {description}")
    print(f"実行中: {command}")

    result = subprocess.run(command, shell=True, capture_output=True, text=True)
    if result.returncode != 0:
        print("❌ エラー")
        if result.stderr:
            print(result.stderr)
        return False
    print("✅ 成功")
    return True


def venv_paths():
    """仮想環境の pip と python のパス"""
    if os.name == 'nt':  # Windows
        return ".venv\\Scripts\\pip", ".venv\\Scripts\\python"
    return ".venv/bin/pip", ".venv/bin/python"


def setup_development_environment():
    """開発環境をセットアップ"""
    print("🚀 RabiDarkLab 開発環境セットアップを開始します...")

    version = sys.version_info
    if version < (3, 10):
        print("❌ Python 3.10以上が必要です")
        return False
    print(f"✅ Python {version.major}.{version.minor}.{version.micro} が使用されます")

    if not os.path.exists(".venv"):
        if not run_command(f"{sys.executable} -m venv .venv", "仮想環境を作成中..."):
            return False
    else:
        print("✅ 仮想環境は既に存在します")

    # 出力とログは実行時にも作られるが、Git で追跡するため .gitkeep を置く
    for directory in ("output", "logs"):
        Path(directory).mkdir(exist_ok=True)
        (Path(directory) / ".gitkeep").touch()
    print("✅ output/ と logs/ を作成しました")

    pip_path, python_path = venv_paths()
    if not run_command(f"{python_path} -m pip install --upgrade pip", "pipをアップグレード中..."):
        print("⚠️  pipのアップグレードに失敗しましたが、続行します")

    if not os.path.exists("requirements.txt"):
        print("⚠️  requirements.txtが見つかりません")
        return False
    if not run_command(f"{pip_path} install -r requirements.txt", "依存関係をインストール中..."):
        print("❌ 依存関係のインストールに失敗しました")
        return False
    if not run_command(f"{pip_path} install -e .", "パッケージを開発モードでインストール中..."):
        print("⚠️  開発モードのインストールに失敗しました（python run.py は利用できます）")

    print("\n📦 次のステップ:")
    if os.name == 'nt':
        print("1. 仮想環境をアクティベート: .venv\\Scripts\\activate")
    else:
        print("1. 仮想環境をアクティベート: source .venv/bin/activate")
    print("2. テストを実行: pytest")
    print("3. 例を実行: rabidarklab run configs/example_aqrm2.json")
    print("4. 図パネルを再現: rabidarklab figure 1a")

    print("\n🎉 開発環境の準備が完了しました！")
    return True


if __name__ == "__main__":
    setup_development_environment()
