"""
実行設定モジュールのテスト
"""

import hashlib
import json
import math

import numpy as np
import pytest

from src.config.figures import FIGURE_PANELS
from src.config.settings import CONFIGS_DIR
from src.core.errors import ConfigError
from src.core.models import Aqrm2Params, MultimodeParams
from src.core.run_config import (
    RunConfig,
    default_tolerances,
    figure_panel,
    load_preset,
    load_run_config,
)


def minimal_config(**overrides) -> dict:
    data = {
        "model": "aqrm2",
        "params": {"delta1": 0.6, "delta2": 0.3, "g1": 1.0, "g2": 1.0, "eps1": 0.1, "eps2": 0.1},
        "truncation": {"cutoffs": [10]},
        "sweep": {"g_min": 0.0, "g_max": 1.0, "points": 5, "keep": 4},
        "tasks": ["spectrum"],
    }
    data.update(overrides)
    return data


class TestParsing:
    """設定解析のテストクラス"""

    def test_minimal(self):
        """モデル・スイープ・タスクを読み込む"""
        config = RunConfig.from_dict(minimal_config())
        assert config.model.family == "aqrm2"
        assert config.model.cutoffs == (10,)
        assert isinstance(config.model.params, Aqrm2Params)
        assert config.sweep.grid.tolist() == [0.0, 0.25, 0.5, 0.75, 1.0]
        assert config.tasks == ("spectrum",)
        assert config.formats == ("csv", "json")

    def test_epsilon_keyword(self):
        """'epsilon_condition' は ε 条件の値に置き換える"""
        params = {"delta1": 0.6, "delta2": 0.3, "g1": 1.0, "g2": -1.0,
                  "eps1": "epsilon_condition", "eps2": "-epsilon_condition"}
        config = RunConfig.from_dict(minimal_config(params=params))
        assert config.model.params.eps1 == pytest.approx(math.sqrt(1729) / 200)
        assert config.model.params.eps2 == pytest.approx(-math.sqrt(1729) / 200)

    def test_multimode(self):
        """多モード模型のパラメータ"""
        data = minimal_config(
            model="multimode",
            params={"omegas": [1, 1], "g_col1": [1, 1], "g_col2": [1, 1], "delta1": 0.3, "delta2": 0.3},
            truncation={"cutoffs": [6, 6]},
        )
        config = RunConfig.from_dict(data)
        assert isinstance(config.model.params, MultimodeParams)
        assert config.model.cutoffs == (6, 6)

    def test_sha256_is_canonical(self):
        """キー順に依存しないハッシュ"""
        a = RunConfig.from_dict(minimal_config())
        b = RunConfig.from_dict(dict(reversed(list(minimal_config().items()))))
        assert a.sha256 == b.sha256
        assert len(a.sha256) == 64

    def test_optional_blocks(self):
        """ダーク・収束・対称性ブロック"""
        data = minimal_config(
            dark={"branch": -1, "g_values": [0.5]},
            convergence={"g": 0.5, "cutoffs": [10, 20], "k": 4},
            symmetry={"operators": ["C"], "expect": {"C": "violates"}},
        )
        config = RunConfig.from_dict(data)
        assert config.dark.branch == -1
        assert config.dark.g_values == (0.5,)
        assert config.convergence.cutoffs == ((10,), (20,))
        assert config.symmetry.expected("C") == "violates"
        assert config.symmetry.expected("R") == "commutes"

    def test_sector(self):
        """セクター指定"""
        config = RunConfig.from_dict(minimal_config(sweep={"keep": 4, "sector": {"operator": "C", "value": 2}}))
        assert config.sweep.sector.operator == "C"
        assert config.sweep.sector.value == 2.0

    def test_figure_task(self):
        """図タスクの名前"""
        config = RunConfig.from_dict(minimal_config(tasks=["figure:1b"]))
        assert figure_panel(config.tasks[0]) == "1b"
        assert figure_panel("spectrum") is None


class TestErrors:
    """設定エラーのテストクラス"""

    @pytest.mark.parametrize(
        "overrides",
        [
            {"unknown": 1},
            {"model": "dicke"},
            {"tasks": ["plot"]},
            {"tasks": ["spectrum", "spectrum"]},
            {"tasks": ["figure:9z"]},
            {"sweep": {"points": "many"}},
            {"sweep": {"g_min": 1.0, "g_max": 0.5}},
            {"sweep": {"labels": ["Q"]}},
            {"sweep": {"sector": {"operator": "J", "value": 1}}},
            {"truncation": {"cutoffs": [10.5]}},
            {"truncation": {"cutoff": [10]}},
            {"params": {"delta1": 0.6, "eps1": "large"}},
            {"params": {"delta1": 0.6, "g_col1": [1]}},
            {"dark": {"branch": 2}},
            {"convergence": {"cutoffs": [10]}},
            {"symmetry": {"operators": []}},
            {"symmetry": {"operators": ["C"], "expect": {"C": "maybe"}}},
            {"compare": {"reference": "9z"}},
            {"output": {"formats": ["xlsx"]}},
        ],
    )
    def test_invalid(self, overrides):
        """不正な設定は ConfigError"""
        with pytest.raises(ConfigError):
            RunConfig.from_dict(minimal_config(**overrides))

    def test_not_an_object(self):
        """最上位がオブジェクトでない"""
        with pytest.raises(ConfigError):
            RunConfig.from_dict([1, 2])

    def test_bool_rejected_as_number(self):
        """真偽値は数値として受け付けない"""
        with pytest.raises(ConfigError):
            RunConfig.from_dict(minimal_config(sweep={"keep": True}))


class TestFiles:
    """設定ファイルとプリセットのテストクラス"""

    def test_load_file_hash(self, tmp_path):
        """ファイルのバイト列のハッシュを記録"""
        path = tmp_path / "run.json"
        raw = json.dumps(minimal_config()).encode("utf-8")
        path.write_bytes(raw)
        config = load_run_config(path)
        assert config.sha256 == hashlib.sha256(raw).hexdigest()
        assert config.source == str(path)

    def test_missing_file(self, tmp_path):
        """存在しないファイル"""
        with pytest.raises(ConfigError):
            load_run_config(tmp_path / "missing.json")

    def test_malformed_json(self, tmp_path):
        """JSON として読めない"""
        path = tmp_path / "bad.json"
        path.write_text("{not json", encoding="utf-8")
        with pytest.raises(ConfigError):
            load_run_config(path)

    @pytest.mark.parametrize("panel", FIGURE_PANELS)
    def test_presets_load(self, panel):
        """全ての図パネルのプリセットが解析できる"""
        config = load_preset(panel)
        assert config.source == f"figure:{panel}"

    @pytest.mark.parametrize("panel", FIGURE_PANELS)
    def test_shipped_figure_configs(self, panel):
        """同梱の図設定ファイルが解析でき、カットオフと格子がプリセットと一致"""
        config = load_run_config(CONFIGS_DIR / f"figure_{panel}.json")
        preset = load_preset(panel)
        assert config.model.family == preset.model.family
        assert config.model.cutoffs == preset.model.cutoffs
        assert np.array_equal(config.sweep.grid, preset.sweep.grid)

    def test_unknown_preset(self):
        """未知の図パネル"""
        with pytest.raises(ConfigError):
            load_preset("4a")

    def test_example_configs(self):
        """同梱の例の設定ファイル"""
        for name in ("example_aqrm2.json", "example_multimode.json"):
            config = load_run_config(CONFIGS_DIR / name)
            assert config.tasks

    def test_default_tolerances(self):
        """マニフェスト用の許容誤差"""
        tolerances = default_tolerances()
        assert tolerances["crossing_tol"] == 1e-8
        assert tolerances["avoided_gap"] == 1e-6
