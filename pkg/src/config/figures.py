"""
図パネルの実行設定プリセット
configs/figure_*.json と同じ内容を保持する
"""

import copy
from typing import Dict

SQRT2 = 1.4142135623730951

FIGURE_PANELS = ("1a", "1b", "2a", "2b", "3a", "3b", "3c", "3d")

# 2モード図の共通格子 g′ ∈ [0, 0.7]（比較する2パネルで一致させる）
_MULTIMODE_SWEEP = {"g_min": 0.0, "g_max": 0.7, "points": 11}

FIGURE_PRESETS: Dict[str, dict] = {
    # 2量子ビット非対称ラビ模型: E=1 のダーク準位
    "1a": {
        "model": "aqrm2",
        "params": {
            "delta1": 0.6,
            "delta2": 0.3,
            "g1": 1.0,
            "g2": 1.0,
            "eps1": "epsilon_condition",
            "eps2": "epsilon_condition",
        },
        "truncation": {"cutoffs": [40]},
        "sweep": {"g_min": 0.0, "g_max": 1.0, "points": 101, "keep": 12},
        "dark": {"branch": 1},
        "tasks": ["figure:1a"],
        "output": {"dir": "output/figure_1a"},
    },
    # 隠れた対称性 J による準位交差
    "1b": {
        "model": "aqrm2",
        "params": {"delta1": 0.8, "delta2": 0.8, "g1": 1.0, "g2": 1.0, "eps1": 0.5, "eps2": 0.0},
        "truncation": {"cutoffs": [30]},
        "sweep": {
            "g_min": 0.0,
            "g_max": 1.0,
            "points": 101,
            "keep": 12,
            "labels": ["J"],
            "baselines": {"epsilon": 0.5, "n_max": 3},
        },
        "symmetry": {"operators": ["J"], "g_values": [0.1, 0.5, 1.0], "margin": 2},
        "tasks": ["figure:1b"],
        "output": {"dir": "output/figure_1b"},
    },
    # JC 模型 C=2 部分空間, g₂ = 0.1g₁
    "2a": {
        "model": "jc2",
        "params": {"delta1": 0.55, "delta2": 0.45, "g1": 1.0, "g2": 0.1},
        "truncation": {"cutoffs": [4]},
        "sweep": {
            "g_min": 0.0,
            "g_max": 1.0,
            "points": 101,
            "keep": 4,
            "labels": ["C"],
            "sector": {"operator": "C", "value": 2},
        },
        "dark": {"kind": "jc", "N_exc": 0},
        "tasks": ["figure:2a"],
        "output": {"dir": "output/figure_2a"},
    },
    # JC 模型 C=2 部分空間, g₂ = g₁: 2つの E=1 準位が縮退
    "2b": {
        "model": "jc2",
        "params": {"delta1": 0.55, "delta2": 0.45, "g1": 1.0, "g2": 1.0},
        "truncation": {"cutoffs": [4]},
        "sweep": {
            "g_min": 0.0,
            "g_max": 1.0,
            "points": 101,
            "keep": 4,
            "labels": ["C"],
            "sector": {"operator": "C", "value": 2},
        },
        "dark": {"kind": "jc", "N_exc": 0, "multiplicity": 2},
        "tasks": ["figure:2b"],
        "output": {"dir": "output/figure_2b"},
    },
    # 2モード模型: n_b でラベル付け
    "3a": {
        "model": "multimode",
        "params": {
            "omegas": [1.0, 1.0],
            "g_col1": [1.0, 1.0],
            "g_col2": [1.0, 1.0],
            "delta1": 0.5,
            "delta2": 0.2,
            "eps1": "epsilon_condition",
            "eps2": "epsilon_condition",
        },
        # g′=0.7 の最低8準位（n_b=0）が 1e-6 より十分小さい誤差に収まるカットオフ
        "truncation": {"cutoffs": [24, 24]},
        "sweep": dict(_MULTIMODE_SWEEP, keep=24, labels=["n_b"]),
        "dark": {"branch": 1},
        "tasks": ["figure:3a"],
        "output": {"dir": "output/figure_3a"},
    },
    # 単一モード模型 g = √2 g′: 3a の n_b=0 準位と一致
    "3b": {
        "model": "aqrm2",
        "params": {
            "delta1": 0.5,
            "delta2": 0.2,
            "g1": SQRT2,
            "g2": SQRT2,
            "eps1": "epsilon_condition",
            "eps2": "epsilon_condition",
        },
        "truncation": {"cutoffs": [40]},
        "sweep": dict(_MULTIMODE_SWEEP, keep=8),
        "dark": {"branch": 1},
        "compare": {"reference": "3a", "levels": 8, "tol": 1e-6, "label": "n_b"},
        "tasks": ["figure:3b"],
        "output": {"dir": "output/figure_3b"},
    },
    # 2モード模型 Δ₁=Δ₂, ε₁=1/2, ε₂=0: ボゴリューボフ基底の隠れた対称性
    "3c": {
        "model": "multimode_transformed",
        "params": {
            "omegas": [1.0, 1.0],
            "g_col1": [1.0, 1.0],
            "g_col2": [1.0, 1.0],
            "delta1": 0.3,
            "delta2": 0.3,
            "eps1": 0.5,
            "eps2": 0.0,
        },
        # b₁ のカットオフを 3d と揃えると n_b=0 ブロックは 3d の行列そのもの
        "truncation": {"cutoffs": [24, 6]},
        "sweep": dict(_MULTIMODE_SWEEP, keep=24, labels=["n_b", "J"]),
        "symmetry": {"operators": ["J", "n_b"], "g_values": [0.1, 0.5], "margin": 2},
        "tasks": ["figure:3c"],
        "output": {"dir": "output/figure_3c"},
    },
    # 3c に対応する単一モード模型
    "3d": {
        "model": "aqrm2",
        "params": {"delta1": 0.3, "delta2": 0.3, "g1": SQRT2, "g2": SQRT2, "eps1": 0.5, "eps2": 0.0},
        "truncation": {"cutoffs": [24]},
        "sweep": dict(_MULTIMODE_SWEEP, keep=8, labels=["J"]),
        "compare": {"reference": "3c", "levels": 8, "tol": 1e-6, "label": "n_b"},
        "tasks": ["figure:3d"],
        "output": {"dir": "output/figure_3d"},
    },
}


def preset_config(panel: str) -> dict:
    """図パネルの設定辞書のコピー"""
    if panel not in FIGURE_PRESETS:
        raise KeyError(panel)
    return copy.deepcopy(FIGURE_PRESETS[panel])
