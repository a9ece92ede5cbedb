"""
図パネルのタスクのテスト
"""

import json
from itertools import combinations

from src.config.settings import AVOIDED_GAP, CLASSIFY_OFFSET
from src.core.spectra import CrossingKind
from src.core.tasks import PASS, task_figure

FORMATS = ("csv", "json")


def sidecar(out_dir, panel: str) -> dict:
    return json.loads((out_dir / f"figure_{panel}.json").read_text(encoding="utf-8"))


class TestFigureDarkLevel:
    """ダーク準位のある図パネル（1a, 2b）のテストクラス"""

    def setup_method(self):
        """各テストメソッドの前に実行される準備処理"""
        self.panel = "1a"

    def test_pinning(self, tmp_path):
        """ダーク準位は全格子点で E = ω に固定"""
        outcome = task_figure(self.panel, tmp_path, FORMATS)
        assert outcome.verdict == PASS
        assert outcome.details["pinning"]
        assert outcome.details["dark_state"]
        assert outcome.details["crossings"]["dark"] >= 1

    def test_deterministic(self, tmp_path):
        """2回の実行で CSV と JSON がバイト単位で一致（スレッド数にも依存しない）"""
        task_figure(self.panel, tmp_path / "first", FORMATS, workers=1)
        task_figure(self.panel, tmp_path / "second", FORMATS, workers=2)
        for name in (f"figure_{self.panel}.csv", f"figure_{self.panel}.json"):
            assert (tmp_path / "first" / name).read_bytes() == (tmp_path / "second" / name).read_bytes()

    def test_crossings_listed_once(self, tmp_path):
        """ダーク交差は準位交差と重複せず1回だけ記録"""
        outcome = task_figure(self.panel, tmp_path, FORMATS)
        crossings = sidecar(tmp_path, self.panel)["crossings"]
        dark = [c for c in crossings if c["kind"] == CrossingKind.DARK_CROSSING.value]
        assert len(dark) == outcome.details["crossings"]["dark"]
        for a, b in combinations(crossings, 2):
            same = abs(a["g_star"] - b["g_star"]) <= CLASSIFY_OFFSET and abs(a["energy"] - b["energy"]) <= AVOIDED_GAP
            assert not same
        for c in dark:
            assert abs(c["energy"] - 1.0) < 1e-10

    def test_jc_degenerate_dark_levels_never_crossed(self, tmp_path):
        """JC 模型 g₂ = g₁ の C=2 部分空間では E = 1 の2準位と他の準位は交差しない"""
        outcome = task_figure("2b", tmp_path, FORMATS)
        assert outcome.details["pinning"]
        assert outcome.details["crossings"] == {"level": 0, "dark": 0}
        assert sidecar(tmp_path, "2b")["crossings"] == []


class TestFigureHiddenSymmetry:
    """隠れた対称性の図パネル（1b）のテストクラス"""

    def setup_method(self):
        """各テストメソッドの前に実行される準備処理"""
        self.panel = "1b"

    def test_sector_crossings_have_distinct_labels(self, tmp_path):
        """真の交差の2準位は異なる J の値を持つ"""
        outcome = task_figure(self.panel, tmp_path, FORMATS)
        assert outcome.details["symmetry"]
        crossings = sidecar(tmp_path, self.panel)["crossings"]
        sector = [c for c in crossings if c["kind"] == CrossingKind.SYMMETRY_SECTOR_CROSSING.value]
        assert sector
        for c in sector:
            before, after = c["labels"]["J"]
            assert abs(before - after) > 1e-6


class TestFigureComparison:
    """単一モード模型と2モード模型の n_b=0 準位の比較（3b, 3d）のテストクラス"""

    def setup_method(self):
        """各テストメソッドの前に実行される準備処理"""
        self.tol = 1e-6

    def check(self, panel: str, reference: str, out_dir) -> dict:
        outcome = task_figure(panel, out_dir, FORMATS)
        assert outcome.details["compare"]
        assert f"figure_{panel}_vs_{reference}.json" in outcome.files
        comparison = json.loads((out_dir / f"figure_{panel}_vs_{reference}.json").read_text(encoding="utf-8"))
        assert comparison["passed"] is True
        assert len(comparison["per_point"]) == 11
        assert comparison["max_difference"] < self.tol
        return comparison

    def test_two_mode_vacuum_block(self, tmp_path):
        """3b の最低8準位は 3a の n_b=0 準位と一致"""
        self.check("3b", "3a", tmp_path)

    def test_bogoliubov_vacuum_block(self, tmp_path):
        """3d の最低8準位は 3c の n_b=0 準位と一致（同じ行列なので丸め誤差の範囲）"""
        comparison = self.check("3d", "3c", tmp_path)
        assert comparison["max_difference"] < 1e-10
