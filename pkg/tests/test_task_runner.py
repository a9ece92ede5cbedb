"""
タスク実行とコマンドラインのテスト
"""

import importlib
import json

import pytest

from src.config import settings
from src.core.errors import ConfigError, PreconditionError
from src.core.run_config import RunConfig
from src.core.task_runner import EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK, EXIT_PRECONDITION, TaskRunner
from src.core.tasks import FAIL, INFO, PASS
from src.main import main, resolve_threads


def tiny_config(out_dir, **overrides) -> dict:
    data = {
        "model": "aqrm2",
        "params": {
            "delta1": 0.6, "delta2": 0.3, "g1": 1.0, "g2": 1.0,
            "eps1": "epsilon_condition", "eps2": "epsilon_condition",
        },
        "truncation": {"cutoffs": [8]},
        "sweep": {"g_min": 0.0, "g_max": 0.5, "points": 6, "keep": 6},
        "dark": {"g_values": [0.25, 0.5]},
        "symmetry": {"operators": ["S", "C"], "g_values": [0.3], "expect": {"C": "violates"}},
        "convergence": {"g": 0.1, "cutoffs": [8, 12], "k": 4},
        "tasks": ["spectrum", "dark_state", "crossings", "symmetry_check", "convergence"],
        "output": {"dir": str(out_dir)},
    }
    data.update(overrides)
    return data


def write_config(path, data) -> str:
    path.write_text(json.dumps(data), encoding="utf-8")
    return str(path)


class TestTaskRunner:
    """TaskRunnerのテストクラス"""

    @pytest.mark.asyncio
    async def test_empty_task_list(self, tmp_path):
        """タスクなしでもマニフェストのみ書き出す"""
        config = RunConfig.from_dict(tiny_config(tmp_path / "out", tasks=[]))
        report = await TaskRunner(config, threads=1).run()
        assert report.outcomes == []
        assert report.exit_code == EXIT_OK
        assert [p.name for p in (tmp_path / "out").iterdir()] == ["manifest.json"]

    @pytest.mark.asyncio
    async def test_all_basic_tasks(self, tmp_path):
        """基本タスクが全て成功しマニフェストに記録される"""
        config = RunConfig.from_dict(tiny_config(tmp_path / "out"))
        report = await TaskRunner(config, threads=2).run()
        verdicts = {o.task: o.verdict for o in report.outcomes}
        assert verdicts == {
            "spectrum": PASS,
            "dark_state": PASS,
            "crossings": INFO,
            "symmetry_check": PASS,
            "convergence": PASS,
        }
        manifest = json.loads(report.manifest_path.read_text(encoding="utf-8"))
        assert manifest["config_sha256"] == config.sha256
        assert manifest["truncation"]["cutoffs"] == [8]
        assert [t["task"] for t in manifest["tasks"]] == list(config.tasks)
        for name in ("spectrum.csv", "spectrum.json", "dark_state.json", "crossings.json",
                     "symmetry.json", "convergence.json"):
            assert (tmp_path / "out" / name).exists()

    @pytest.mark.asyncio
    async def test_deterministic_output(self, tmp_path):
        """同じ設定からは同じ CSV（スレッド数に依存しない）"""
        texts = []
        for threads in (1, 2):
            out = tmp_path / f"out{threads}"
            config = RunConfig.from_dict(tiny_config(out, tasks=["spectrum"]))
            await TaskRunner(config, threads=threads).run()
            texts.append((out / "spectrum.csv").read_text(encoding="utf-8"))
        assert texts[0] == texts[1]

    @pytest.mark.asyncio
    async def test_failed_check_sets_exit_code(self, tmp_path):
        """収束しない場合は fail と終了コード 4"""
        data = tiny_config(tmp_path / "out", tasks=["convergence"], convergence={"g": 2.0, "cutoffs": [3, 4], "k": 4})
        report = await TaskRunner(RunConfig.from_dict(data), threads=1).run()
        assert report.outcomes[0].verdict == FAIL
        assert report.exit_code == EXIT_NUMERICAL

    def test_missing_block(self, tmp_path):
        """タスクに必要なブロックがない"""
        data = tiny_config(tmp_path / "out", tasks=["convergence"])
        del data["convergence"]
        with pytest.raises(ConfigError):
            TaskRunner(RunConfig.from_dict(data), threads=1).validate()

    def test_precondition_checked_before_running(self, tmp_path):
        """ε 条件を満たさない設定は実行前に検出"""
        params = {"delta1": 0.6, "delta2": 0.3, "g1": 1.0, "g2": 1.0, "eps1": 0.1, "eps2": 0.1}
        data = tiny_config(tmp_path / "out", params=params, tasks=["dark_state"])
        with pytest.raises(PreconditionError):
            TaskRunner(RunConfig.from_dict(data), threads=1).validate()
        assert not (tmp_path / "out").exists()

    def test_invalid_threads(self, tmp_path):
        """スレッド数 0"""
        with pytest.raises(ConfigError):
            TaskRunner(RunConfig.from_dict(tiny_config(tmp_path / "out")), threads=0)


class TestCommandLine:
    """コマンドラインのテストクラス"""

    def test_run_success(self, tmp_path):
        """run サブコマンドの成功"""
        path = write_config(tmp_path / "run.json", tiny_config(tmp_path / "out", tasks=["dark_state"]))
        assert main(["run", path, "--threads", "1"]) == EXIT_OK
        assert (tmp_path / "out" / "manifest.json").exists()

    def test_out_overrides_config(self, tmp_path):
        """--out は設定の出力先より優先"""
        path = write_config(tmp_path / "run.json", tiny_config(tmp_path / "out", tasks=["dark_state"]))
        assert main(["run", path, "--out", str(tmp_path / "other")]) == EXIT_OK
        assert (tmp_path / "other" / "manifest.json").exists()
        assert not (tmp_path / "out").exists()

    def test_missing_config(self, tmp_path):
        """存在しない設定ファイルは終了コード 2"""
        assert main(["run", str(tmp_path / "missing.json")]) == EXIT_CONFIG

    def test_precondition_exit_code(self, tmp_path):
        """前提条件違反は終了コード 3"""
        params = {"delta1": 0.6, "delta2": 0.3, "g1": 1.0, "g2": 1.0, "eps1": 0.1, "eps2": 0.1}
        path = write_config(tmp_path / "run.json", tiny_config(tmp_path / "out", params=params, tasks=["dark_state"]))
        assert main(["run", path]) == EXIT_PRECONDITION

    def test_failed_verdict_exit_code(self, tmp_path):
        """判定 fail は終了コード 4"""
        data = tiny_config(tmp_path / "out", tasks=["convergence"], convergence={"g": 2.0, "cutoffs": [3, 4], "k": 4})
        assert main(["run", write_config(tmp_path / "run.json", data)]) == EXIT_NUMERICAL

    def test_zero_threads(self, tmp_path):
        """--threads 0 は設定エラー"""
        path = write_config(tmp_path / "run.json", tiny_config(tmp_path / "out", tasks=[]))
        assert main(["run", path, "--threads", "0"]) == EXIT_CONFIG

    def test_unknown_panel(self):
        """未知の図パネルは引数エラー"""
        with pytest.raises(SystemExit):
            main(["figure", "9z"])

    def test_resolve_threads(self, monkeypatch):
        """--threads > 環境変数"""
        monkeypatch.setenv("RABIDARKLAB_THREADS", "3")
        assert resolve_threads(None) == 3
        assert resolve_threads(5) == 5
        monkeypatch.setenv("RABIDARKLAB_THREADS", "many")
        with pytest.raises(ConfigError):
            resolve_threads(None)

    def test_invalid_threads_env(self, tmp_path, monkeypatch):
        """整数でない環境変数は終了コード 2"""
        monkeypatch.setenv("RABIDARKLAB_THREADS", "abc")
        path = write_config(tmp_path / "run.json", tiny_config(tmp_path / "out", tasks=[]))
        assert main(["run", path]) == EXIT_CONFIG
        assert not (tmp_path / "out").exists()

    def test_settings_ignore_threads_env(self, monkeypatch):
        """設定モジュールの読み込みは環境変数を解釈しない"""
        monkeypatch.setenv("RABIDARKLAB_THREADS", "abc")
        reloaded = importlib.reload(settings)
        assert reloaded.DEFAULT_THREADS == 1
