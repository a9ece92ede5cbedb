"""
実行設定モジュール
JSON の実行設定を読み込み、モデル仕様とタスク設定に変換する
"""

import hashlib
import json
import logging
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

import numpy as np

from src.config import settings
from src.config.figures import FIGURE_PANELS, preset_config
from src.config.settings import (
    COMMUTES_TOL,
    CONVERGENCE_TOL,
    DEFAULT_CUTOFF,
    DEFAULT_G_MAX,
    DEFAULT_G_MIN,
    DEFAULT_GRID_POINTS,
    DEFAULT_INTERIOR_MARGIN,
    DEFAULT_KEEP,
    DEFAULT_MULTIMODE_CUTOFFS,
    OUTPUT_DIR,
    SUPPORTED_OUTPUT_FORMATS,
)
from src.core.darkstates import DARK_KINDS, epsilon_condition
from src.core.errors import ConfigError
from src.core.models import (
    MODEL_FAMILIES,
    Aqrm2Params,
    Jc2Params,
    ModelSpec,
    MultimodeParams,
)
from src.core.spectra import Sector
from src.core.symmetry import LABEL_NAMES

logger = logging.getLogger(__name__)

TOP_LEVEL_KEYS = {
    "model", "params", "truncation", "sweep", "tasks", "output",
    "dark", "convergence", "symmetry", "compare",
}
BASIC_TASKS = ("spectrum", "dark_state", "crossings", "symmetry_check", "convergence")
EPSILON_KEYWORD = "epsilon_condition"

_PARAM_KEYS = {
    "aqrm2": {"omega", "delta1", "delta2", "g1", "g2", "eps1", "eps2"},
    "jc2": {"omega", "delta1", "delta2", "g1", "g2"},
    "multimode": {"omegas", "g_col1", "g_col2", "delta1", "delta2", "eps1", "eps2"},
    "multimode_transformed": {"omegas", "g_col1", "g_col2", "delta1", "delta2", "eps1", "eps2"},
}
_BLOCK_KEYS = {
    "truncation": {"cutoffs", "counter_rotating"},
    "sweep": {"g_min", "g_max", "points", "keep", "labels", "sector", "baselines"},
    "dark": {"branch", "kind", "N_exc", "multiplicity", "g_values"},
    "convergence": {"g", "cutoffs", "k", "tol"},
    "symmetry": {"operators", "g_values", "margin", "threshold", "expect"},
    "compare": {"reference", "levels", "tol", "label"},
    "output": {"dir", "formats"},
}


@dataclass(frozen=True)
class SweepSpec:
    g_min: float = DEFAULT_G_MIN
    g_max: float = DEFAULT_G_MAX
    points: int = DEFAULT_GRID_POINTS
    keep: int = DEFAULT_KEEP
    labels: Tuple[str, ...] = ()
    sector: Optional[Sector] = None
    baseline_epsilon: Optional[float] = None
    baseline_n_max: int = 0

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(self.g_min, self.g_max, self.points)


@dataclass(frozen=True)
class DarkSpec:
    branch: int = 1
    kind: str = "auto"
    N_exc: int = 0
    multiplicity: int = 1
    g_values: Tuple[float, ...] = (0.0, 0.25, 0.5, 1.0, 2.0)


@dataclass(frozen=True)
class ConvergenceSpec:
    g: float
    cutoffs: Tuple[Tuple[int, ...], ...]
    k: int
    tol: float = CONVERGENCE_TOL


@dataclass(frozen=True)
class SymmetrySpec:
    operators: Tuple[str, ...]
    g_values: Tuple[float, ...] = (0.5,)
    margin: int = DEFAULT_INTERIOR_MARGIN
    threshold: float = COMMUTES_TOL
    expect: Tuple[Tuple[str, str], ...] = ()

    def expected(self, name: str) -> str:
        return dict(self.expect).get(name, "commutes")


@dataclass(frozen=True)
class CompareSpec:
    reference: str
    levels: int = 8
    tol: float = 1e-6
    label: str = "n_b"


@dataclass(frozen=True)
class RunConfig:
    """解析・検証済みの実行設定"""
    model: ModelSpec
    sweep: SweepSpec
    tasks: Tuple[str, ...]
    output_dir: Path
    formats: Tuple[str, ...]
    sha256: str
    source: str
    dark: Optional[DarkSpec] = None
    convergence: Optional[ConvergenceSpec] = None
    symmetry: Optional[SymmetrySpec] = None
    compare: Optional[CompareSpec] = None

    @classmethod
    def from_dict(cls, data: Any, source: str = "<dict>", sha256: Optional[str] = None) -> "RunConfig":
        """
        設定辞書から RunConfig を作成

        Args:
            data: JSON から読み込んだ辞書
            source: エラーメッセージ用の由来
            sha256: 設定のハッシュ（省略時は正規化した JSON から計算）

        Raises:
            ConfigError: 構造・型・未知のキーの誤り
        """
        if not isinstance(data, dict):
            raise ConfigError(f"{source}: 設定の最上位は JSON オブジェクトである必要があります")
        unknown = set(data) - TOP_LEVEL_KEYS
        if unknown:
            raise ConfigError(f"{source}: 未知のキーがあります: {sorted(unknown)}")
        for block, allowed in _BLOCK_KEYS.items():
            _check_block(data, block, allowed, source)
        if sha256 is None:
            canonical = json.dumps(data, sort_keys=True, separators=(",", ":")).encode("utf-8")
            sha256 = hashlib.sha256(canonical).hexdigest()

        model = _parse_model(data, source)
        output = data.get("output", {})
        formats = tuple(_get(output, "formats", list, SUPPORTED_OUTPUT_FORMATS, source))
        if set(formats) - set(SUPPORTED_OUTPUT_FORMATS):
            raise ConfigError(f"{source}: 未対応の出力形式です: {formats}")
        default_dir = OUTPUT_DIR / (Path(source).stem if source.endswith(".json") else "run")
        return cls(
            model=model,
            sweep=_parse_sweep(data.get("sweep", {}), source),
            tasks=_parse_tasks(data.get("tasks", []), source),
            output_dir=Path(_get(output, "dir", str, str(default_dir), source)),
            formats=formats,
            sha256=sha256,
            source=source,
            dark=_parse_dark(data["dark"], source) if "dark" in data else None,
            convergence=_parse_convergence(data["convergence"], model, source) if "convergence" in data else None,
            symmetry=_parse_symmetry(data["symmetry"], source) if "symmetry" in data else None,
            compare=_parse_compare(data["compare"], source) if "compare" in data else None,
        )

    def with_output_dir(self, output_dir: Path) -> "RunConfig":
        return replace(self, output_dir=Path(output_dir))


def _check_block(data: dict, block: str, allowed: set, source: str) -> None:
    if block not in data:
        return
    if not isinstance(data[block], dict):
        raise ConfigError(f"{source}: '{block}' は JSON オブジェクトである必要があります")
    unknown = set(data[block]) - allowed
    if unknown:
        raise ConfigError(f"{source}: '{block}' に未知のキーがあります: {sorted(unknown)}")


def _get(block: dict, key: str, kind, default, source: str):
    if key not in block:
        return default
    value = block[key]
    kinds = (int, float) if kind is float else kind
    if isinstance(value, bool) or not isinstance(value, kinds):
        raise ConfigError(f"{source}: '{key}' の型が不正です: {value!r}")
    return value


def _number_list(value: Any, key: str, source: str) -> Tuple[float, ...]:
    if not isinstance(value, list) or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
        raise ConfigError(f"{source}: '{key}' は数値のリストである必要があります: {value!r}")
    return tuple(float(v) for v in value)


def _resolve_bias(value: Any, key: str, delta1: float, delta2: float, omega: float, source: str) -> float:
    if isinstance(value, str):
        sign = -1.0 if value.startswith("-") else 1.0
        if value.lstrip("-") != EPSILON_KEYWORD:
            raise ConfigError(f"{source}: '{key}' は数値または '{EPSILON_KEYWORD}' が必要です: {value!r}")
        return sign * epsilon_condition(delta1, delta2, omega)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{source}: '{key}' の型が不正です: {value!r}")
    return float(value)


def _parse_params(family: str, params: Any, source: str):
    if not isinstance(params, dict):
        raise ConfigError(f"{source}: 'params' は JSON オブジェクトである必要があります")
    unknown = set(params) - _PARAM_KEYS[family]
    if unknown:
        raise ConfigError(f"{source}: モデル族 {family} に未知のパラメータがあります: {sorted(unknown)}")
    values: Dict[str, Any] = {}
    for key, value in params.items():
        if key in ("omegas", "g_col1", "g_col2"):
            values[key] = _number_list(value, key, source)
        elif key not in ("eps1", "eps2"):
            values[key] = float(_get(params, key, float, 0.0, source))
    delta1, delta2 = values.get("delta1", 0.0), values.get("delta2", 0.0)
    omega = values.get("omega", values.get("omegas", (1.0,))[0])
    for key in ("eps1", "eps2"):
        if key in params:
            values[key] = _resolve_bias(params[key], key, delta1, delta2, omega, source)

    if family == "aqrm2":
        return Aqrm2Params(**values)
    if family == "jc2":
        return Jc2Params(**values)
    for key in ("omegas", "g_col1", "g_col2"):
        if key not in values:
            raise ConfigError(f"{source}: 多モード模型には '{key}' が必要です")
    return MultimodeParams(**values)


def _parse_model(data: dict, source: str) -> ModelSpec:
    family = data.get("model", "aqrm2")
    if family not in MODEL_FAMILIES:
        raise ConfigError(f"{source}: 未知のモデル族です: {family!r} (使用可能: {', '.join(MODEL_FAMILIES)})")
    params = _parse_params(family, data.get("params", {}), source)
    truncation = data.get("truncation", {})
    if family in ("aqrm2", "jc2"):
        default = [DEFAULT_CUTOFF]
    else:
        modes = params.mode_count
        default = list(DEFAULT_MULTIMODE_CUTOFFS) if modes == len(DEFAULT_MULTIMODE_CUTOFFS) else [DEFAULT_MULTIMODE_CUTOFFS[0]] * modes
    cutoffs = _get(truncation, "cutoffs", list, default, source)
    if not all(isinstance(n, int) and not isinstance(n, bool) for n in cutoffs):
        raise ConfigError(f"{source}: 'cutoffs' は整数のリストである必要があります: {cutoffs!r}")
    counter_rotating = float(_get(truncation, "counter_rotating", float, 0.0, source))
    return ModelSpec(family, params, tuple(cutoffs), counter_rotating)


def _parse_sweep(block: dict, source: str) -> SweepSpec:
    labels = tuple(_get(block, "labels", list, [], source))
    for name in labels:
        if name not in LABEL_NAMES:
            raise ConfigError(f"{source}: 未知のラベル演算子です: {name!r} (使用可能: {', '.join(LABEL_NAMES)})")
    sector = None
    if "sector" in block:
        raw = block["sector"]
        if not isinstance(raw, dict) or set(raw) != {"operator", "value"}:
            raise ConfigError(f"{source}: 'sector' には 'operator' と 'value' が必要です")
        if raw["operator"] not in ("C", "R", "n_b"):
            raise ConfigError(f"{source}: セクターには対角な保存量 C / R / n_b が必要です: {raw['operator']!r}")
        sector = Sector(str(raw["operator"]), float(raw["value"]))
    baselines = _get(block, "baselines", dict, None, source)
    if baselines is not None and set(baselines) - {"epsilon", "n_max"}:
        raise ConfigError(f"{source}: 'baselines' に未知のキーがあります: {sorted(set(baselines))}")
    spec = SweepSpec(
        g_min=float(_get(block, "g_min", float, DEFAULT_G_MIN, source)),
        g_max=float(_get(block, "g_max", float, DEFAULT_G_MAX, source)),
        points=_get(block, "points", int, DEFAULT_GRID_POINTS, source),
        keep=_get(block, "keep", int, DEFAULT_KEEP, source),
        labels=labels,
        sector=sector,
        baseline_epsilon=None if baselines is None else float(_get(baselines, "epsilon", float, 0.0, source)),
        baseline_n_max=0 if baselines is None else _get(baselines, "n_max", int, 3, source),
    )
    if spec.points < 1 or (spec.points > 1 and spec.g_max <= spec.g_min):
        raise ConfigError(f"{source}: スイープ範囲が不正です: [{spec.g_min}, {spec.g_max}], {spec.points} 点")
    return spec


def _parse_tasks(tasks: Any, source: str) -> Tuple[str, ...]:
    if not isinstance(tasks, list) or not all(isinstance(t, str) for t in tasks):
        raise ConfigError(f"{source}: 'tasks' は文字列のリストである必要があります")
    for task in tasks:
        if task in BASIC_TASKS:
            continue
        if task.startswith("figure:") and task.split(":", 1)[1] in FIGURE_PANELS:
            continue
        raise ConfigError(
            f"{source}: 未知のタスクです: {task!r} (使用可能: {', '.join(BASIC_TASKS)}, "
            f"figure:<{'|'.join(FIGURE_PANELS)}>)"
        )
    if len(set(tasks)) != len(tasks):
        raise ConfigError(f"{source}: タスクが重複しています: {tasks}")
    return tuple(tasks)


def _parse_dark(block: dict, source: str) -> DarkSpec:
    kind = _get(block, "kind", str, "auto", source)
    if kind not in DARK_KINDS:
        raise ConfigError(f"{source}: 未知のダーク状態の種類です: {kind!r}")
    branch = _get(block, "branch", int, 1, source)
    if branch not in (1, -1):
        raise ConfigError(f"{source}: 'branch' は 1 または -1 が必要です: {branch}")
    return DarkSpec(
        branch=branch,
        kind=kind,
        N_exc=_get(block, "N_exc", int, 0, source),
        multiplicity=_get(block, "multiplicity", int, 1, source),
        g_values=_number_list(block["g_values"], "g_values", source) if "g_values" in block else DarkSpec.g_values,
    )


def _parse_convergence(block: dict, model: ModelSpec, source: str) -> ConvergenceSpec:
    raw = _get(block, "cutoffs", list, None, source)
    if raw is None or len(raw) < 2:
        raise ConfigError(f"{source}: 'convergence.cutoffs' には2つ以上のカットオフが必要です")
    cutoffs = []
    for entry in raw:
        entry = [entry] * len(model.cutoffs) if isinstance(entry, int) else entry
        if not isinstance(entry, list) or not all(isinstance(n, int) for n in entry):
            raise ConfigError(f"{source}: 'convergence.cutoffs' の要素が不正です: {entry!r}")
        cutoffs.append(tuple(entry))
    return ConvergenceSpec(
        g=float(_get(block, "g", float, 1.0, source)),
        cutoffs=tuple(cutoffs),
        k=_get(block, "k", int, 10, source),
        tol=float(_get(block, "tol", float, CONVERGENCE_TOL, source)),
    )


def _parse_symmetry(block: dict, source: str) -> SymmetrySpec:
    operators = tuple(_get(block, "operators", list, [], source))
    if not operators or any(name not in LABEL_NAMES for name in operators):
        raise ConfigError(f"{source}: 'symmetry.operators' は {', '.join(LABEL_NAMES)} から選ぶ必要があります")
    expect = _get(block, "expect", dict, {}, source)
    if any(v not in ("commutes", "violates") for v in expect.values()):
        raise ConfigError(f"{source}: 'symmetry.expect' の値は commutes / violates が必要です")
    return SymmetrySpec(
        operators=operators,
        g_values=_number_list(block["g_values"], "g_values", source) if "g_values" in block else SymmetrySpec.g_values,
        margin=_get(block, "margin", int, DEFAULT_INTERIOR_MARGIN, source),
        threshold=float(_get(block, "threshold", float, COMMUTES_TOL, source)),
        expect=tuple(sorted(expect.items())),
    )


def _parse_compare(block: dict, source: str) -> CompareSpec:
    reference = _get(block, "reference", str, None, source)
    if reference not in FIGURE_PANELS:
        raise ConfigError(f"{source}: 'compare.reference' は図パネル名が必要です: {reference!r}")
    return CompareSpec(
        reference=reference,
        levels=_get(block, "levels", int, 8, source),
        tol=float(_get(block, "tol", float, 1e-6, source)),
        label=_get(block, "label", str, "n_b", source),
    )


def load_run_config(path: Path) -> RunConfig:
    """
    JSON 実行設定ファイルを読み込む

    Args:
        path: 設定ファイルのパス

    Returns:
        RunConfig（ハッシュはファイルのバイト列から計算）

    Raises:
        ConfigError: 読み込み・解析・検証の失敗
    """
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as e:
        raise ConfigError(f"設定ファイルを読み込めません: {path}: {e}")
    try:
        data = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise ConfigError(f"設定ファイルの JSON 解析エラー: {path}: {e}")
    config = RunConfig.from_dict(data, source=str(path), sha256=hashlib.sha256(raw).hexdigest())
    logger.info(f"設定読み込み: {path} (sha256={config.sha256[:12]}…, タスク {len(config.tasks)} 個)")
    return config


def load_preset(panel: str) -> RunConfig:
    """図パネルのプリセット設定"""
    if panel not in FIGURE_PANELS:
        raise ConfigError(f"未知の図パネルです: {panel!r} (使用可能: {', '.join(FIGURE_PANELS)})")
    return RunConfig.from_dict(preset_config(panel), source=f"figure:{panel}")


def figure_panel(task: str) -> Optional[str]:
    """'figure:1a' → '1a'（図タスクでなければ None）"""
    return task.split(":", 1)[1] if task.startswith("figure:") else None


def default_tolerances() -> Dict[str, float]:
    """マニフェストに記録する許容誤差"""
    names = (
        "HERMITIAN_TOL", "RESIDUAL_TOL", "PARAM_TOL", "NULLSPACE_TOL", "RATIO_TOL",
        "COMMUTES_TOL", "CONVERGENCE_TOL", "CROSSING_TOL", "BISECTION_TOL", "AVOIDED_GAP",
    )
    return {name.lower(): getattr(settings, name) for name in names}
