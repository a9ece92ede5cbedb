"""
スペクトル解析モジュールのテスト
"""

import math

import numpy as np
import pytest

from src.core.darkstates import dark_provider
from src.core.errors import DarkStateNotRegisteredError, PreconditionError
from src.core.models import Aqrm2Params, Jc2Params, ModelSpec, MultimodeParams
from src.core.spectra import (
    CrossingEvent,
    CrossingKind,
    Sector,
    baseline_curves,
    baseline_energy,
    classify_crossing,
    convergence_check,
    detect_dark_crossings,
    detect_level_crossings,
    labelled_levels,
    merge_crossings,
    sweep,
)
from src.core.symmetry import excitation_number_op, label_provider

EPS_1A = math.sqrt(1729) / 200
# JC 模型 (Δ₁=Δ₂=ω/2, g₁=g₂) で C=1 の √2g と C=2 の 1−√6g が交差する結合
G_STAR_JC = 1 / (math.sqrt(2) + math.sqrt(6))


def figure_1a_model(cutoff: int = 20) -> ModelSpec:
    p = Aqrm2Params(delta1=0.6, delta2=0.3, g1=1.0, g2=1.0, eps1=EPS_1A, eps2=EPS_1A)
    return ModelSpec("aqrm2", p, (cutoff,))


def resonant_jc_model(cutoff: int = 6) -> ModelSpec:
    return ModelSpec("jc2", Jc2Params(delta1=0.5, delta2=0.5, g1=1.0, g2=1.0), (cutoff,))


class TestSweep:
    """スイープのテストクラス"""

    def test_displaced_oscillator(self):
        """Δ=0, g₂=0 では最低4準位が −g² ± ε の2重縮退"""
        model = ModelSpec("aqrm2", Aqrm2Params(g1=1.0, eps1=0.2), (40,))
        grid = [0.1, 0.2, 0.3]
        result = sweep(model, grid, keep=4)
        assert result.levels.shape == (3, 4)
        for g, levels in zip(grid, result.levels):
            expected = [-g ** 2 - 0.2] * 2 + [-g ** 2 + 0.2] * 2
            assert np.allclose(levels, expected, atol=1e-10)

    def test_grid_must_increase(self):
        """単調増加でない格子"""
        with pytest.raises(PreconditionError):
            sweep(figure_1a_model(4), [0.0, 0.2, 0.1], keep=4)

    def test_keep_bounded_by_dimension(self):
        """keep が次元を超える"""
        with pytest.raises(PreconditionError):
            sweep(figure_1a_model(2), [0.0, 0.1], keep=13)

    def test_cutoff_override(self):
        """N を指定するとカットオフを置き換える"""
        result = sweep(figure_1a_model(4), [0.0, 0.5], N=8, keep=4)
        assert result.cutoffs == (8,)

    def test_workers_do_not_change_result(self):
        """スレッド数に依存せず格子順に組み立てる"""
        grid = np.linspace(0.0, 1.0, 9)
        serial = sweep(figure_1a_model(10), grid, keep=6)
        parallel = sweep(figure_1a_model(10), grid, keep=6, workers=2)
        assert np.allclose(serial.levels, parallel.levels, atol=1e-12)

    def test_sector_restriction(self):
        """C=2 の部分空間では 1 − √6g, 1, 1, 1 + √6g"""
        result = sweep(resonant_jc_model(), [0.1, 0.2], keep=4, sector=Sector("C", 2))
        for g, levels in zip((0.1, 0.2), result.levels):
            r = math.sqrt(6) * g
            assert np.allclose(levels, [1 - r, 1, 1, 1 + r], atol=1e-12)

    def test_sector_requires_diagonal_operator(self):
        """J ではセクターを指定できない"""
        with pytest.raises(PreconditionError):
            Sector("J", 1.0)

    def test_labels_recorded(self):
        """ラベル演算子の期待値を準位ごとに記録"""
        result = sweep(resonant_jc_model(), [0.1], keep=3, label_operators={"C": excitation_number_op(6)})
        assert np.allclose(result.labels["C"][0], [0, 1, 1])


class TestDarkTracking:
    """ダーク準位の追跡とダーク交差のテストクラス"""

    def setup_method(self):
        """各テストメソッドの前に実行される準備処理"""
        self.model = figure_1a_model()
        self.result = sweep(
            self.model,
            np.linspace(0.0, 1.0, 11),
            keep=12,
            dark_state=dark_provider(self.model),
        )

    def test_dark_level_pinned(self):
        """ダーク準位は全ての g で E = ω"""
        assert self.result.dark_energy == 1.0
        assert np.allclose(self.result.dark_levels, 1.0, atol=1e-8)
        assert np.all(self.result.dark_cluster_overlaps() > 1 - 1e-8)

    def test_dark_indices_are_full_spectrum(self):
        """ダーク準位の番号は結合とともに増える"""
        indices = self.result.dark_level_indices()
        assert indices[-1] > indices[0]

    def test_dark_crossings(self):
        """交差は E = ω 上にあり g* の昇順"""
        events = detect_dark_crossings(self.result)
        assert len(events) >= 1
        for event in events:
            assert event.kind is CrossingKind.DARK_CROSSING
            assert abs(event.energy - 1.0) < 1e-10
            assert 0.0 <= event.g_star <= 1.0
        assert [e.g_star for e in events] == sorted(e.g_star for e in events)

    def test_crossing_level_on_dark_energy(self):
        """g* で対角化し直すと E = ω の準位が2本（ダーク準位と交差準位）"""
        events = detect_dark_crossings(self.result)
        for event in events:
            values = np.linalg.eigvalsh(self.model.hamiltonian(event.g_star).matrix)
            assert np.sum(np.abs(values - 1.0) < 1e-10) >= 2

    def test_dark_crossings_repeatable(self):
        """同じスイープから同じ g*"""
        first = detect_dark_crossings(self.result)
        second = detect_dark_crossings(self.result)
        assert [e.g_star for e in first] == pytest.approx([e.g_star for e in second], abs=1e-12)

    def test_requires_dark_state(self):
        """ダーク状態なしのスイープ"""
        result = sweep(self.model.with_cutoffs((6,)), [0.0, 0.5], keep=4)
        with pytest.raises(DarkStateNotRegisteredError):
            detect_dark_crossings(result)
        with pytest.raises(DarkStateNotRegisteredError):
            result.dark_level_indices()


class TestCrossingClassification:
    """準位交差の分類のテストクラス"""

    def setup_method(self):
        """各テストメソッドの前に実行される準備処理"""
        self.model = resonant_jc_model()
        self.C = excitation_number_op(6)

    def test_sector_crossing(self):
        """C=1 と C=2 の準位は真に交差する"""
        event = classify_crossing(self.model, G_STAR_JC, (3, 4), label_operator=self.C, label_name="C")
        assert event.kind is CrossingKind.SYMMETRY_SECTOR_CROSSING
        assert event.labels["C"] == pytest.approx((1.0, 2.0))
        assert event.energy == pytest.approx(math.sqrt(2) * G_STAR_JC)

    def test_avoided(self):
        """大きなギャップは回避交差"""
        event = classify_crossing(self.model, 0.1, (0, 1), label_operator=self.C)
        assert event.kind is CrossingKind.AVOIDED

    def test_unlabelled_true_crossing(self):
        """ラベルもダーク状態もない真の交差は未分類"""
        event = classify_crossing(self.model, G_STAR_JC, (3, 4))
        assert event.kind is CrossingKind.UNCLASSIFIED

    def test_detect_level_crossings(self):
        """ギャップ走査で g* を精密化して分類"""
        result = sweep(self.model, np.linspace(0.0, 0.5, 26), keep=6, label_operators={"C": self.C})
        events = detect_level_crossings(result)
        matches = [e for e in events if e.level_indices == (3, 4) and abs(e.g_star - G_STAR_JC) < 1e-6]
        assert len(matches) == 1
        assert matches[0].kind is CrossingKind.SYMMETRY_SECTOR_CROSSING
        assert matches[0].labels["C"] == pytest.approx((1.0, 2.0))

    def test_event_to_dict(self):
        """出力用の辞書"""
        event = classify_crossing(self.model, G_STAR_JC, (3, 4), label_operator=self.C, label_name="C")
        data = event.to_dict()
        assert data["kind"] == "symmetry_sector_crossing"
        assert data["level_indices"] == [3, 4]


class TestMergeCrossings:
    """ダーク交差と準位交差の統合のテストクラス"""

    def setup_method(self):
        """各テストメソッドの前に実行される準備処理"""
        self.dark = [CrossingEvent(0.3, 1.0, (3, 4), CrossingKind.DARK_CROSSING)]
        self.same = CrossingEvent(
            0.3 + 1e-7, 1.0 + 1e-8, (3, 4), CrossingKind.SYMMETRY_SECTOR_CROSSING, {"J": (0.5, -0.5)}
        )
        self.other = CrossingEvent(0.6, 1.4, (5, 6), CrossingKind.UNCLASSIFIED)

    def test_same_crossing_listed_once(self):
        """同じ交差はダーク交差として1回だけ"""
        merged = merge_crossings(self.dark, [self.other, self.same])
        assert [e.kind for e in merged] == [CrossingKind.DARK_CROSSING, CrossingKind.UNCLASSIFIED]
        assert merged[0].g_star == 0.3
        assert merged[0].labels == {"J": (0.5, -0.5)}

    def test_distinct_crossings_kept(self):
        """エネルギーが離れていれば別の交差"""
        shifted = CrossingEvent(0.3, 1.1, (2, 3), CrossingKind.AVOIDED)
        merged = merge_crossings(self.dark, [shifted])
        assert len(merged) == 2

    def test_without_dark(self):
        """ダーク交差がなければ準位交差をそのまま g* 順に"""
        merged = merge_crossings([], [self.other, self.same])
        assert [e.g_star for e in merged] == [self.same.g_star, 0.6]


class TestLabelledLevels:
    """ラベル値による部分空間の準位選択のテストクラス"""

    def setup_method(self):
        """各テストメソッドの前に実行される準備処理"""
        params = MultimodeParams((1.0, 1.0), (1.0, 1.0), (1.0, 1.0), 0.5, 0.2, 0.3, 0.3)
        self.model = ModelSpec("multimode_transformed", params, (12, 3))
        single = Aqrm2Params(delta1=0.5, delta2=0.2, g1=math.sqrt(2), g2=math.sqrt(2), eps1=0.3, eps2=0.3)
        self.single = ModelSpec("aqrm2", single, (12,))
        self.n_b = label_provider(self.model, "n_b")(0.0)

    @pytest.mark.parametrize("g", [0.2, 0.7])
    def test_vacuum_block_matches_single_mode(self, g):
        """n_b=0 の準位は g=√2g′ の単一モード模型と一致"""
        levels = labelled_levels(self.model, g, self.n_b, 0.0, 8)
        expected = np.linalg.eigvalsh(self.single.hamiltonian(g).matrix)[:8]
        assert np.allclose(levels, expected, atol=1e-10)

    def test_excited_block(self):
        """n_b=1 の最低準位は n_b=0 の最低準位 + ω"""
        ground = labelled_levels(self.model, 0.4, self.n_b, 0.0, 1)
        excited = labelled_levels(self.model, 0.4, self.n_b, 1.0, 1)
        assert excited[0] == pytest.approx(ground[0] + 1.0, abs=1e-10)

    def test_short_when_too_few(self):
        """該当する準位が足りなければ短い配列"""
        levels = labelled_levels(self.model, 0.4, self.n_b, 7.0, 4)
        assert len(levels) == 0


class TestConvergenceAndBaselines:
    """カットオフ収束とベースラインのテストクラス"""

    def test_converged(self):
        """g=0.5 で N=20,30,40 の最低6準位は収束"""
        report = convergence_check(figure_1a_model(), 0.5, [20, 30, 40], k=6)
        assert report.converged
        assert len(report.changes) == 2
        assert report.to_dict()["cutoffs"] == [[20], [30], [40]]

    def test_truncated_not_converged(self):
        """小さいカットオフでは変化が大きい"""
        report = convergence_check(figure_1a_model(), 2.0, [3, 4], k=4)
        assert not report.converged

    def test_requires_two_cutoffs(self):
        """カットオフ1つでは比較できない"""
        with pytest.raises(PreconditionError):
            convergence_check(figure_1a_model(), 0.5, [20], k=4)

    def test_baseline_energy(self):
        """nω − g²/ω ± ε"""
        assert baseline_energy(2, 0.5, 0.1) == pytest.approx((1.85, 1.65))
        assert baseline_energy(1, 1.0, 0.0, omega=2.0) == pytest.approx((1.5, 1.5))

    def test_baseline_curves(self):
        """n = 0…n_max の曲線"""
        curves = baseline_curves([0.0, 1.0], 0.2, 2)
        assert [c.n for c in curves] == [0, 1, 2]
        assert curves[1].plus == pytest.approx([1.2, 0.2])
        assert curves[1].minus == pytest.approx([0.8, -0.2])
