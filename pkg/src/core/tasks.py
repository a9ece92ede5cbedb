"""
タスク実装モジュール
スペクトル・ダーク状態・交差・対称性・収束・図パネルの各タスクを実行し結果ファイルを書き出す
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from src.config.settings import CROSSING_TOL, RESIDUAL_TOL
from src.core.darkstates import (
    DarkStateProvider,
    dark_provider,
    dark_state_for_model,
    one_photon_ansatz_solve,
    residual,
)
from src.core.errors import ConfigError, PreconditionError
from src.core.plotdata import dumps_json, emit_plotdata, write_atomic
from src.core.run_config import RunConfig, figure_panel, load_preset
from src.core.spectra import (
    BaselineCurve,
    CrossingEvent,
    SweepResult,
    baseline_curves,
    convergence_check,
    detect_dark_crossings,
    detect_level_crossings,
    labelled_levels,
    merge_crossings,
    sweep,
)
from src.core.symmetry import LabelProvider, check_commutation, label_provider

logger = logging.getLogger(__name__)

PASS, FAIL, INFO = "pass", "fail", "info"

# 交差点の近傍ではダーク準位の判定にクラスター射影を使う
PINNING_EXCLUSION = 1e-3
PINNING_OVERLAP = 1 - 1e-6

# n について対角な演算子は境界層の除外が不要
_DIAGONAL_LABELS = ("R", "C")


@dataclass
class TaskOutcome:
    """1タスクの判定と出力ファイル"""
    task: str
    verdict: str
    files: List[str] = field(default_factory=list)
    details: Dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"task": self.task, "verdict": self.verdict, "files": self.files, "details": self.details}


def _verdict(checks: Dict[str, dict]) -> str:
    if not checks:
        return INFO
    return PASS if all(c.get("passed", False) for c in checks.values()) else FAIL


def dark_provider_for(config: RunConfig) -> Optional[DarkStateProvider]:
    if config.dark is None:
        return None
    return dark_provider(config.model, config.dark.branch, config.dark.kind, config.dark.N_exc)


def label_providers_for(config: RunConfig) -> Dict[str, LabelProvider]:
    branch = config.dark.branch if config.dark else 1
    kind = config.dark.kind if config.dark else "auto"
    return {name: label_provider(config.model, name, branch, kind) for name in config.sweep.labels}


def run_sweep(config: RunConfig, workers: int = 1) -> SweepResult:
    return sweep(
        config.model,
        config.sweep.grid,
        keep=config.sweep.keep,
        dark_state=dark_provider_for(config),
        label_operators=label_providers_for(config),
        sector=config.sweep.sector,
        workers=workers,
    )


def baselines_for(config: RunConfig) -> List[BaselineCurve]:
    if config.sweep.baseline_epsilon is None:
        return []
    return baseline_curves(
        config.sweep.grid, config.sweep.baseline_epsilon, config.sweep.baseline_n_max, config.model.omega
    )


def pinning_check(result: SweepResult, crossings: Sequence[CrossingEvent], multiplicity: int = 1) -> dict:
    """
    ダーク準位が全格子点で E_dark に固定されていることを確認

    Returns:
        最大のずれ・交差から離れた点での最小の重なり・判定
    """
    energy = result.dark_energy
    pinned = np.abs(result.dark_levels - energy)
    if multiplicity > 1:
        # 縮退する E_dark 準位の個数は保持準位の中で数える
        deviations = np.sort(np.abs(result.levels - energy), axis=1)[:, multiplicity - 1]
        pinned = np.maximum(pinned, deviations)
    overlaps = result.dark_cluster_overlaps()
    away = np.array([all(abs(g - c.g_star) > PINNING_EXCLUSION for c in crossings) for g in result.g_grid])
    min_overlap = float(np.min(overlaps[away])) if np.any(away) else None
    passed = bool(np.all(pinned < CROSSING_TOL)) and (min_overlap is None or min_overlap > PINNING_OVERLAP)
    return {
        "dark_energy": energy,
        "multiplicity": multiplicity,
        "max_deviation": float(np.max(pinned)),
        "min_overlap_away_from_crossings": min_overlap,
        "passed": passed,
    }


def dark_state_check(config: RunConfig) -> dict:
    """登録したダーク状態の残差を g の各値で評価（aqrm2 では1光子仮定の解とも比較）"""
    dark = config.dark
    rows = []
    for g in dark.g_values:
        result = dark_state_for_model(config.model, g, dark.branch, dark.kind, dark.N_exc)
        H = config.model.hamiltonian(g)
        row = {"g": g, "energy": result.energy, "residual": residual(H, result.state, result.energy)}
        if config.model.family == "aqrm2":
            oracle = one_photon_ansatz_solve(config.model.at(g), result.energy, config.model.cutoffs[0])
            row["ansatz_solutions"] = len(oracle)
            row["ansatz_overlap"] = max((abs(s.state.overlap(result.state)) for s in oracle), default=0.0)
        rows.append(row)
    worst = max(r["residual"] for r in rows)
    if worst >= RESIDUAL_TOL:
        logger.warning(f"ダーク状態の残差が許容値を超えています: {worst:.3e}")
    return {"rows": rows, "max_residual": worst, "tol": RESIDUAL_TOL, "passed": worst < RESIDUAL_TOL}


def symmetry_check(config: RunConfig) -> dict:
    """設定された演算子とハミルトニアンの交換子を g の各値で評価"""
    spec = config.symmetry
    branch = config.dark.branch if config.dark else 1
    kind = config.dark.kind if config.dark else "auto"
    reports = []
    for name in spec.operators:
        provider = label_provider(config.model, name, branch, kind)
        margin = 0 if name in _DIAGONAL_LABELS else spec.margin
        for g in spec.g_values:
            op = provider(g)
            if op is None:
                logger.info(f"{name} は g={g} で定義されないためスキップ")
                continue
            report = check_commutation(name, op, config.model.hamiltonian(g), margin, spec.threshold)
            entry = report.to_dict()
            entry.update(g=g, expected=spec.expected(name), matches=report.verdict.value == spec.expected(name))
            reports.append(entry)
    return {"reports": reports, "passed": bool(reports) and all(r["matches"] for r in reports)}


def compare_check(config: RunConfig, result: SweepResult, workers: int = 1) -> dict:
    """
    参照パネルの n_b=0 準位と最低準位を格子点ごとに比較

    参照側の準位は保持数に関係なく全スペクトルから選ぶ
    """
    spec = config.compare
    reference_config = load_preset(spec.reference)
    if not np.array_equal(reference_config.sweep.grid, config.sweep.grid):
        raise ConfigError(f"比較元 {spec.reference} と格子が一致しません")
    model = reference_config.model
    label = label_provider(model, spec.label)

    def reference_levels(g: float) -> np.ndarray:
        op = label(g)
        if op is None:
            raise PreconditionError(f"ラベル {spec.label} は g={g} で定義されません")
        return labelled_levels(model, g, op, 0.0, spec.levels)

    with ThreadPoolExecutor(max_workers=max(1, workers)) as executor:
        expected = list(executor.map(reference_levels, config.sweep.grid))
    differences = []
    for own, ref in zip(result.levels, expected):
        if len(ref) < spec.levels:
            differences.append(float("inf"))
            continue
        differences.append(float(np.max(np.abs(own[: spec.levels] - ref))))
    worst = max(differences)
    return {
        "reference": spec.reference,
        "label": spec.label,
        "levels": spec.levels,
        "g_grid": result.g_grid,
        "max_difference": worst if np.isfinite(worst) else None,
        "per_point": [d if np.isfinite(d) else None for d in differences],
        "tol": spec.tol,
        "passed": bool(np.isfinite(worst) and worst < spec.tol),
    }


def _crossings(result: SweepResult) -> Dict[str, List[CrossingEvent]]:
    found = {"level": detect_level_crossings(result)}
    if result.dark_overlaps is not None:
        found["dark"] = detect_dark_crossings(result)
    return found


def _write_json(out_dir: Path, name: str, payload) -> str:
    write_atomic(out_dir / name, dumps_json(payload))
    return name


def task_spectrum(config: RunConfig, out_dir: Path, workers: int = 1) -> TaskOutcome:
    result = run_sweep(config, workers)
    checks = {}
    dark_events: List[CrossingEvent] = []
    if result.dark_overlaps is not None:
        dark_events = detect_dark_crossings(result)
        checks["pinning"] = pinning_check(result, dark_events, config.dark.multiplicity)
    paths = emit_plotdata(
        result, dark_events, baselines_for(config), out_dir, "spectrum", config.formats, {"checks": checks}
    )
    return TaskOutcome("spectrum", _verdict(checks), [p.name for p in paths], checks)


def task_crossings(config: RunConfig, out_dir: Path, workers: int = 1) -> TaskOutcome:
    result = run_sweep(config, workers)
    found = _crossings(result)
    counts = {kind: len(events) for kind, events in found.items()}
    name = _write_json(out_dir, "crossings.json", {"counts": counts, **found})
    return TaskOutcome("crossings", INFO, [name], {"counts": counts})


def task_dark_state(config: RunConfig, out_dir: Path, workers: int = 1) -> TaskOutcome:
    check = dark_state_check(config)
    name = _write_json(out_dir, "dark_state.json", check)
    return TaskOutcome("dark_state", PASS if check["passed"] else FAIL, [name], {"max_residual": check["max_residual"]})


def task_symmetry(config: RunConfig, out_dir: Path, workers: int = 1) -> TaskOutcome:
    check = symmetry_check(config)
    name = _write_json(out_dir, "symmetry.json", check)
    norms = {f"{r['operator_name']}@{r['g']}": r["interior_commutator_norm"] for r in check["reports"]}
    return TaskOutcome("symmetry_check", PASS if check["passed"] else FAIL, [name], {"norms": norms})


def task_convergence(config: RunConfig, out_dir: Path, workers: int = 1) -> TaskOutcome:
    spec = config.convergence
    report = convergence_check(config.model, spec.g, list(spec.cutoffs), spec.k, spec.tol)
    name = _write_json(out_dir, "convergence.json", report)
    details = {"final_change": report.final_change, "tol": report.tol}
    return TaskOutcome("convergence", PASS if report.converged else FAIL, [name], details)


def task_figure(panel: str, out_dir: Path, formats: Sequence[str], workers: int = 1) -> TaskOutcome:
    """
    図パネルのプリセットでスイープ・交差検出・検証を行いデータを書き出す

    Args:
        panel: '1a' などのパネル名
        out_dir: 出力ディレクトリ
        formats: 出力形式
        workers: スイープのスレッド数

    Returns:
        全検証の判定を集約した TaskOutcome
    """
    config = load_preset(panel)
    result = run_sweep(config, workers)
    found = _crossings(result)
    checks: Dict[str, dict] = {}
    if config.dark is not None:
        checks["pinning"] = pinning_check(result, found["dark"], config.dark.multiplicity)
        checks["dark_state"] = dark_state_check(config)
    if config.symmetry is not None:
        checks["symmetry"] = symmetry_check(config)
    files = []
    if config.compare is not None:
        comparison = compare_check(config, result, workers)
        files.append(_write_json(out_dir, f"figure_{panel}_vs_{config.compare.reference}.json", comparison))
        checks["compare"] = {k: v for k, v in comparison.items() if k not in ("g_grid", "per_point")}

    events = merge_crossings(found.get("dark", []), found["level"])
    paths = emit_plotdata(
        result, events, baselines_for(config), out_dir, f"figure_{panel}", formats, {"checks": checks}
    )
    files = [p.name for p in paths] + files
    verdict = _verdict(checks)
    summary = {name: check["passed"] for name, check in checks.items()}
    summary["crossings"] = {kind: len(e) for kind, e in found.items()}
    return TaskOutcome(f"figure:{panel}", verdict, files, summary)


TASKS = {
    "spectrum": task_spectrum,
    "crossings": task_crossings,
    "dark_state": task_dark_state,
    "symmetry_check": task_symmetry,
    "convergence": task_convergence,
}


def execute_task(task: str, config: RunConfig, out_dir: Path, workers: int = 1) -> TaskOutcome:
    """タスク名に応じた処理を実行"""
    panel = figure_panel(task)
    if panel is not None:
        return task_figure(panel, out_dir, config.formats, workers)
    return TASKS[task](config, out_dir, workers)
