"""
タスク実行モジュール
実行設定の事前検証、タスクの並行実行、マニフェストの書き出しを行う
"""

import asyncio
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import List

from src import __version__
from src.config.settings import DEFAULT_THREADS, MANIFEST_NAME
from src.core.darkstates import dark_state_for_model
from src.core.errors import ConfigError, NumericalTaskError, PreconditionError, RabiDarkLabError
from src.core.plotdata import dumps_json, write_atomic
from src.core.run_config import RunConfig, default_tolerances, figure_panel, load_preset
from src.core.symmetry import label_provider
from src.core.tasks import FAIL, TaskOutcome, execute_task

# 終了コード
EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PRECONDITION = 3
EXIT_NUMERICAL = 4


@dataclass
class RunReport:
    """実行全体の結果"""
    outcomes: List[TaskOutcome]
    manifest_path: Path

    @property
    def exit_code(self) -> int:
        return EXIT_NUMERICAL if any(o.verdict == FAIL for o in self.outcomes) else EXIT_OK


class TaskRunner:
    """実行設定のタスクを検証・実行するクラス"""

    def __init__(self, config: RunConfig, threads: int = DEFAULT_THREADS):
        """
        タスクランナーの初期化

        Args:
            config: 実行設定
            threads: 並行実行に使うスレッド数
        """
        if threads < 1:
            raise ConfigError(f"スレッド数は1以上が必要です: {threads}")
        self.config = config
        self.threads = threads
        self.logger = logging.getLogger(__name__)

    def validate(self):
        """
        全タスクの前提条件を実行前に確認

        Raises:
            ConfigError: タスクに必要な設定ブロックがない場合
            PreconditionError: パラメータがタスクの前提条件を満たさない場合
        """
        for task in self.config.tasks:
            panel = figure_panel(task)
            if panel is not None:
                self._validate_config(load_preset(panel), task)
                continue
            required = {"dark_state": "dark", "symmetry_check": "symmetry", "convergence": "convergence"}.get(task)
            if required and getattr(self.config, required) is None:
                raise ConfigError(f"タスク {task} には '{required}' ブロックが必要です")
            self._validate_config(self.config, task)
        self.logger.info(f"事前検証完了: タスク {len(self.config.tasks)} 個")

    def _validate_config(self, config: RunConfig, task: str):
        g_edge = float(config.sweep.grid[-1])
        try:
            config.model.hamiltonian(g_edge)
            dimension = config.model.basis.dimension
            if config.sweep.sector is not None:
                dimension = len(config.sweep.sector.indices(config.model))
            if config.sweep.keep > dimension:
                raise PreconditionError(f"keep={config.sweep.keep} が次元 {dimension} を超えています")
            for name in config.sweep.labels:
                label_provider(config.model, name)(g_edge)
            if config.dark is not None:
                for g in (g_edge, *config.dark.g_values):
                    dark_state_for_model(config.model, g, config.dark.branch, config.dark.kind, config.dark.N_exc)
        except PreconditionError as e:
            self.logger.error(f"タスク {task} の前提条件エラー: {e}")
            raise

    def _run_task(self, task: str, workers: int) -> TaskOutcome:
        self.logger.info(f"タスク開始: {task}")
        try:
            outcome = execute_task(task, self.config, self.config.output_dir, workers)
        except (PreconditionError, ConfigError):
            raise
        except (RabiDarkLabError, ArithmeticError, ValueError, OSError) as e:
            self.logger.error(f"タスク {task} の実行エラー: {e}")
            raise NumericalTaskError(f"タスク {task} が失敗しました: {e}") from e
        self.logger.info(f"タスク完了: {task} → {outcome.verdict}")
        return outcome

    async def run(self) -> RunReport:
        """
        全タスクを実行してマニフェストを書き出す

        Returns:
            RunReport
        """
        self.validate()
        self.config.output_dir.mkdir(parents=True, exist_ok=True)
        tasks = self.config.tasks
        workers = max(1, self.threads // max(1, len(tasks)))

        loop = asyncio.get_running_loop()
        with ThreadPoolExecutor(max_workers=self.threads) as executor:
            futures = [loop.run_in_executor(executor, self._run_task, task, workers) for task in tasks]
            outcomes = list(await asyncio.gather(*futures))

        manifest_path = self.write_manifest(outcomes)
        return RunReport(outcomes, manifest_path)

    def write_manifest(self, outcomes: List[TaskOutcome]) -> Path:
        """設定ハッシュ・カットオフ・許容誤差・タスクごとの判定を記録"""
        manifest = {
            "version": __version__,
            "config_sha256": self.config.sha256,
            "model": self.config.model.family,
            "truncation": {
                "cutoffs": list(self.config.model.cutoffs),
                "counter_rotating": self.config.model.counter_rotating,
            },
            "tolerances": default_tolerances(),
            "tasks": [o.to_dict() for o in outcomes],
        }
        path = write_atomic(self.config.output_dir / MANIFEST_NAME, dumps_json(manifest))
        self.logger.info(f"マニフェスト出力: {path}")
        return path
