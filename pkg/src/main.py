#!/usr/bin/env python3
"""
RabiDarkLab - メインアプリケーション
2量子ビット非対称ラビ模型のスペクトル・ダーク状態・対称性を計算するコマンドラインツール
"""

import argparse
import asyncio
import logging
import os
import sys
from pathlib import Path
from typing import List, Optional

# パスの設定を追加
current_dir = Path(__file__).parent
project_root = current_dir.parent
sys.path.insert(0, str(project_root))

from src import __version__
from src.config.figures import FIGURE_PANELS
from src.config.settings import (
    DEFAULT_THREADS,
    LOG_FILE_NAME,
    LOG_FORMAT,
    LOG_LEVEL,
    LOGS_DIR,
    OUTPUT_DIR,
    THREADS_ENV_VAR,
)
from src.core.errors import ConfigError, NumericalTaskError, PreconditionError
from src.core.run_config import RunConfig, load_preset, load_run_config
from src.core.task_runner import (
    EXIT_CONFIG,
    EXIT_NUMERICAL,
    EXIT_PRECONDITION,
    RunReport,
    TaskRunner,
)


class RabiDarkLabApp:
    """RabiDarkLab のメインクラス"""

    def __init__(self, log_dir: Path = LOGS_DIR):
        """初期化"""
        self.log_dir = log_dir
        self.setup_logging()
        self.logger = logging.getLogger(__name__)

    def setup_logging(self):
        """ロギング設定"""
        self.log_dir.mkdir(parents=True, exist_ok=True)
        logging.basicConfig(
            level=getattr(logging, LOG_LEVEL),
            format=LOG_FORMAT,
            handlers=[
                logging.FileHandler(self.log_dir / LOG_FILE_NAME),
                logging.StreamHandler()
            ]
        )

    def execute(self, config: RunConfig, out_dir: Optional[str], threads: int) -> int:
        """
        実行設定を検証・実行して終了コードを返す

        Args:
            config: 実行設定
            out_dir: 出力ディレクトリの上書き（省略可）
            threads: スレッド数

        Returns:
            終了コード（0: 成功, 2: 設定エラー, 3: 前提条件違反, 4: 数値タスクの失敗）
        """
        if out_dir is not None:
            config = config.with_output_dir(Path(out_dir))
        try:
            report = asyncio.run(TaskRunner(config, threads).run())
        except ConfigError as e:
            self.logger.error(f"設定エラー: {e}")
            print(f"❌ 設定エラー: {e}")
            return EXIT_CONFIG
        except PreconditionError as e:
            self.logger.error(f"前提条件違反: {e}")
            print(f"❌ 前提条件違反: {e}")
            return EXIT_PRECONDITION
        except NumericalTaskError as e:
            self.logger.error(f"数値タスクの失敗: {e}")
            print(f"❌ 数値タスクの失敗: {e}")
            return EXIT_NUMERICAL
        self.print_summary(report)
        return report.exit_code

    def print_summary(self, report: RunReport):
        """タスクごとの判定を表示"""
        marks = {"pass": "✅", "fail": "❌", "info": "ℹ️ "}
        for outcome in report.outcomes:
            print(f"{marks[outcome.verdict]} {outcome.task}: {outcome.verdict} ({', '.join(outcome.files)})")
        print(f"📄 マニフェスト: {report.manifest_path}")


def resolve_threads(value: Optional[int]) -> int:
    """--threads > 環境変数 > 既定値 の順で決める"""
    if value is not None:
        return value
    raw = os.environ.get(THREADS_ENV_VAR)
    if raw:
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(f"環境変数 {THREADS_ENV_VAR} は整数が必要です: {raw!r}")
    return DEFAULT_THREADS


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rabidarklab",
        description="2量子ビット非対称ラビ模型のダーク状態とスペクトルの数値ツールキット",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True)

    run_parser = subparsers.add_parser("run", help="JSON 実行設定のタスクを実行")
    run_parser.add_argument("config", help="実行設定ファイル (JSON)")
    run_parser.add_argument("--out", help="出力ディレクトリ")
    run_parser.add_argument("--threads", type=int, help=f"スレッド数（環境変数 {THREADS_ENV_VAR} より優先）")

    figure_parser = subparsers.add_parser("figure", help="図パネルのプリセットを実行")
    figure_parser.add_argument("panel", choices=FIGURE_PANELS, help="図パネル名")
    figure_parser.add_argument("--out", help="出力ディレクトリ")
    figure_parser.add_argument("--threads", type=int, help=f"スレッド数（環境変数 {THREADS_ENV_VAR} より優先）")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """コマンドラインのエントリポイント"""
    args = build_parser().parse_args(argv)
    app = RabiDarkLabApp()
    try:
        threads = resolve_threads(args.threads)
        if args.command == "run":
            config = load_run_config(Path(args.config))
        else:
            config = load_preset(args.panel)
            if args.out is None:
                args.out = str(OUTPUT_DIR / f"figure_{args.panel}")
    except ConfigError as e:
        app.logger.error(f"設定エラー: {e}")
        print(f"❌ 設定エラー: {e}")
        return EXIT_CONFIG
    except PreconditionError as e:
        app.logger.error(f"前提条件違反: {e}")
        print(f"❌ 前提条件違反: {e}")
        return EXIT_PRECONDITION
    return app.execute(config, args.out, threads)


if __name__ == "__main__":
    sys.exit(main())
