"""
スペクトル解析モジュール
結合定数スイープ、カットオフ収束の確認、準位交差の検出と分類、ベースライン曲線
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.linalg
from scipy.optimize import brentq, minimize_scalar

from src.config.settings import (
    AVOIDED_GAP,
    BISECTION_TOL,
    CLASSIFY_OFFSET,
    CONVERGENCE_TOL,
    CROSSING_TOL,
    DEFAULT_KEEP,
    GAP_SCAN_THRESHOLD,
    LABEL_TOL,
    ROOT_XTOL,
)
from src.core.darkstates import DarkStateProvider
from src.core.errors import (
    DarkStateNotRegisteredError,
    PreconditionError,
)
from src.core.fockalg import Operator, eig_hermitian, embed_state, lowest_eigenvalues
from src.core.models import ModelSpec
from src.core.symmetry import LabelProvider, label_provider, restrict_to_sector

logger = logging.getLogger(__name__)

Cutoff = Union[int, Sequence[int]]


class CrossingKind(Enum):
    DARK_CROSSING = "dark_crossing"
    SYMMETRY_SECTOR_CROSSING = "symmetry_sector_crossing"
    AVOIDED = "avoided"
    UNCLASSIFIED = "unclassified"


@dataclass(frozen=True)
class Sector:
    """対角な保存量（'C' や 'R'）の固有値で指定する部分空間"""
    operator: str
    value: float

    def __post_init__(self):
        if self.operator not in ("C", "R", "n_b"):
            raise PreconditionError(f"セクターには対角な保存量 C / R / n_b が必要です: {self.operator}")

    def indices(self, model: ModelSpec) -> np.ndarray:
        return restrict_to_sector(label_provider(model, self.operator)(0.0), self.value)


@dataclass(frozen=True)
class CrossingEvent:
    """検出・分類された準位交差"""
    g_star: float
    energy: float
    level_indices: Tuple[int, int]
    kind: CrossingKind
    labels: Optional[Dict[str, Tuple[float, float]]] = None

    def to_dict(self) -> dict:
        return {
            "g_star": self.g_star,
            "energy": self.energy,
            "level_indices": list(self.level_indices),
            "kind": self.kind.value,
            "labels": None if self.labels is None else {k: list(v) for k, v in self.labels.items()},
        }


@dataclass(frozen=True)
class _PointResult:
    levels: np.ndarray
    vectors: np.ndarray
    overlaps: Optional[np.ndarray]
    labels: Dict[str, np.ndarray]
    # 全スペクトル上のダーク準位: (エネルギー, 準位番号, 縮退クラスターへの重なり)
    dark: Optional[Tuple[float, int, float]] = None


def _as_label_providers(labels: Union[None, Operator, LabelProvider, Mapping]) -> Dict[str, LabelProvider]:
    if labels is None:
        return {}
    if isinstance(labels, Mapping):
        return {name: _as_provider(p) for name, p in labels.items()}
    return {"label": _as_provider(labels)}


def _as_provider(label) -> LabelProvider:
    if isinstance(label, Operator):
        return lambda g: label
    return label


def _rotate_degenerate_clusters(values: np.ndarray, vectors: np.ndarray, label: Operator) -> np.ndarray:
    """縮退クラスター内でラベル演算子を対角化するように固有ベクトルを回転"""
    vectors = vectors.copy()
    start = 0
    while start < len(values):
        stop = start + 1
        while stop < len(values) and values[stop] - values[stop - 1] <= CROSSING_TOL:
            stop += 1
        if stop - start > 1:
            block = vectors[:, start:stop]
            sub = block.conj().T @ label.matrix @ block
            _, rotation = scipy.linalg.eigh((sub + sub.conj().T) / 2)
            vectors[:, start:stop] = block @ rotation
        start = stop
    return vectors


@dataclass(frozen=True)
class _SweepContext:
    """スイープと交差の精密化で共有する対角化の設定"""
    model: ModelSpec
    keep: int
    dark_state: Optional[DarkStateProvider]
    labels: Dict[str, LabelProvider]
    sector_indices: Optional[np.ndarray]

    def spectrum(self, g: float) -> Tuple[np.ndarray, np.ndarray]:
        """セクター制限つきの全固有値と固有ベクトル（大域基底）"""
        H = self.model.hamiltonian(g)
        if self.sector_indices is None:
            return eig_hermitian(H)
        idx = self.sector_indices
        values, sub_vectors = scipy.linalg.eigh(H.matrix[np.ix_(idx, idx)])
        vectors = np.zeros((H.dimension, len(values)), dtype=complex)
        vectors[idx] = sub_vectors
        return values, vectors

    def _truncate(self, values: np.ndarray, vectors: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        # 保持する最後の準位と縮退する準位もクラスター回転のため含める
        stop = self.keep
        while stop < len(values) and values[stop] - values[stop - 1] <= CROSSING_TOL:
            stop += 1
        return values[:stop], vectors[:, :stop]

    def diagonalize(self, g: float) -> Tuple[np.ndarray, np.ndarray]:
        return self._truncate(*self.spectrum(g))

    def count_below(self, g: float, energy: float) -> int:
        """energy − CROSSING_TOL より下の準位数（keep に依存しない）"""
        values, _ = self.spectrum(g)
        return int(np.sum(values < energy - CROSSING_TOL))

    def evaluate(self, g: float) -> _PointResult:
        all_values, all_vectors = self.spectrum(g)
        values, vectors = self._truncate(all_values, all_vectors)
        label_ops = {name: provider(g) for name, provider in self.labels.items()}
        first = next(iter(label_ops.values()), None)
        if first is not None:
            vectors = _rotate_degenerate_clusters(values, vectors, first)
        values, vectors = values[: self.keep], vectors[:, : self.keep]
        overlaps = None
        dark = None
        if self.dark_state is not None:
            psi = embed_state(self.dark_state(g).state, self.model.basis).amplitudes
            overlaps = np.abs(psi.conj() @ vectors) ** 2
            full = np.abs(psi.conj() @ all_vectors) ** 2
            k = int(np.argmax(full))
            cluster = np.abs(all_values - all_values[k]) <= CROSSING_TOL
            dark = (float(all_values[k]), k, float(full[cluster].sum()))
        labels = {}
        for name, op in label_ops.items():
            if op is None:
                labels[name] = np.full(len(values), np.nan)
            else:
                labels[name] = np.real(np.einsum("ik,ij,jk->k", vectors.conj(), op.matrix, vectors))
        logger.debug(f"g={g:.6g}: 最低準位 {values[0]:.12g}")
        return _PointResult(values, vectors, overlaps, labels, dark)


@dataclass
class SweepResult:
    """結合定数スイープの結果"""
    model: ModelSpec
    g_grid: np.ndarray
    levels: np.ndarray
    dark_overlaps: Optional[np.ndarray]
    labels: Dict[str, np.ndarray]
    cutoffs: Tuple[int, ...]
    sector: Optional[Sector] = None
    dark_energy: Optional[float] = None
    workers: int = 1
    context: Optional[_SweepContext] = field(default=None, repr=False)
    # 全スペクトルから追跡したダーク準位（保持準位の外にあっても記録する）
    dark_levels: Optional[np.ndarray] = None
    dark_indices: Optional[np.ndarray] = None
    dark_weights: Optional[np.ndarray] = None

    @property
    def keep(self) -> int:
        return self.levels.shape[1]

    def _require_dark(self):
        if self.dark_levels is None:
            raise DarkStateNotRegisteredError("スイープにダーク状態が登録されていません")

    def dark_level_indices(self) -> np.ndarray:
        """各格子点でダーク状態との重なりが最大の準位番号（全スペクトル中の0始まり）"""
        self._require_dark()
        return self.dark_indices

    def dark_cluster_overlaps(self) -> np.ndarray:
        """ダーク準位と縮退するクラスター全体への射影の重なり"""
        self._require_dark()
        return self.dark_weights


def _resolve_cutoffs(model: ModelSpec, N: Optional[Cutoff]) -> ModelSpec:
    if N is None:
        return model
    cutoffs = (N,) * len(model.cutoffs) if isinstance(N, (int, np.integer)) else tuple(N)
    return model.with_cutoffs(cutoffs)


def _build_context(
    model: ModelSpec,
    keep: int,
    dark_state: Optional[DarkStateProvider],
    label_operators,
    sector: Optional[Sector],
) -> _SweepContext:
    sector_indices = sector.indices(model) if sector is not None else None
    dimension = model.basis.dimension if sector_indices is None else len(sector_indices)
    if keep < 1 or keep > dimension:
        raise PreconditionError(f"keep={keep} は 1 以上 {dimension} 以下が必要です")
    return _SweepContext(model, keep, dark_state, _as_label_providers(label_operators), sector_indices)


def sweep(
    model: ModelSpec,
    g_grid: Sequence[float],
    N: Optional[Cutoff] = None,
    keep: int = DEFAULT_KEEP,
    dark_state: Optional[DarkStateProvider] = None,
    label_operators=None,
    sector: Optional[Sector] = None,
    workers: int = 1,
) -> SweepResult:
    """
    結合定数の格子上で最低 keep 個の固有値を計算

    Args:
        model: モデル仕様（テンプレート結合 × g）
        g_grid: 単調増加の結合定数の格子
        N: カットオフ（省略時はモデルのカットオフ）
        keep: 保持する準位数
        dark_state: g → ダーク状態の関数（重なりを計算する場合）
        label_operators: ラベル演算子、g → 演算子の関数、または名前をキーとする辞書
        sector: 対角な保存量の部分空間への制限
        workers: 格子点を並列評価するスレッド数

    Returns:
        SweepResult（格子の順に組み立て）
    """
    model = _resolve_cutoffs(model, N)
    grid = np.asarray(g_grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise PreconditionError("結合定数の格子が空です")
    if np.any(np.diff(grid) <= 0):
        raise PreconditionError("結合定数の格子は単調増加である必要があります")
    context = _build_context(model, keep, dark_state, label_operators, sector)

    logger.info(f"スイープ開始: {model.family}, 格子点 {grid.size}, カットオフ {model.cutoffs}, keep={keep}")
    with ThreadPoolExecutor(max_workers=max(1, workers)) as executor:
        points = list(executor.map(context.evaluate, grid))

    labels = {name: np.array([p.labels[name] for p in points]) for name in context.labels}
    dark = {}
    if dark_state is not None:
        track = [p.dark for p in points]
        dark = {
            "dark_overlaps": np.array([p.overlaps for p in points]),
            "dark_energy": dark_state(float(grid[0])).energy,
            "dark_levels": np.array([t[0] for t in track]),
            "dark_indices": np.array([t[1] for t in track], dtype=int),
            "dark_weights": np.array([t[2] for t in track]),
        }
    logger.info(f"スイープ完了: {model.family}")
    return SweepResult(
        model=model,
        g_grid=grid,
        levels=np.array([p.levels for p in points]),
        dark_overlaps=dark.pop("dark_overlaps", None),
        labels=labels,
        cutoffs=model.cutoffs,
        sector=sector,
        workers=workers,
        context=context,
        **dark,
    )


@dataclass(frozen=True)
class ConvergenceReport:
    """カットオフを変えたときの低エネルギー固有値の変化"""
    g: float
    cutoffs: Tuple[Tuple[int, ...], ...]
    k: int
    changes: Tuple[float, ...]
    tol: float

    @property
    def final_change(self) -> float:
        return self.changes[-1]

    @property
    def converged(self) -> bool:
        return self.final_change < self.tol

    def to_dict(self) -> dict:
        return {
            "g": self.g,
            "cutoffs": [list(c) for c in self.cutoffs],
            "k": self.k,
            "changes": list(self.changes),
            "tol": self.tol,
            "final_change": self.final_change,
            "converged": self.converged,
        }


def convergence_check(
    model: ModelSpec,
    g: float,
    cutoffs: Sequence[Cutoff],
    k: int,
    tol: float = CONVERGENCE_TOL,
) -> ConvergenceReport:
    """
    連続するカットオフ間で最低 k 個の固有値の最大変化を評価

    Raises:
        PreconditionError: カットオフが2つ未満の場合
    """
    if len(cutoffs) < 2:
        raise PreconditionError("収束チェックには2つ以上のカットオフが必要です")
    resolved = [_resolve_cutoffs(model, N) for N in cutoffs]
    spectra = [lowest_eigenvalues(m.hamiltonian(g), k) for m in resolved]
    if any(len(s) < k for s in spectra):
        raise PreconditionError(f"k={k} が最小カットオフの次元を超えています")
    changes = tuple(float(np.max(np.abs(b - a))) for a, b in zip(spectra, spectra[1:]))
    report = ConvergenceReport(g, tuple(m.cutoffs for m in resolved), k, changes, tol)
    if not report.converged:
        logger.warning(f"カットオフ収束せず: g={g}, 変化 {report.final_change:.3e} ≥ {tol:.1e}")
    return report


def _require_context(result: SweepResult) -> _SweepContext:
    if result.context is None:
        raise PreconditionError("スイープの再対角化設定がありません")
    return result.context


def detect_dark_crossings(result: SweepResult, E_dark: Optional[float] = None) -> List[CrossingEvent]:
    """
    ダーク準位（水平線）と他の準位の交差を検出

    E_dark より下にある準位の個数 m(g)（保持数に関係なく全スペクトルで数える）が
    変わる格子区間を、再対角化しながら二分法で幅 BISECTION_TOL まで絞り込み、
    最後に交差準位が E_dark に一致する g* を brentq で求める

    Args:
        result: ダーク状態を登録したスイープ
        E_dark: ダーク準位のエネルギー（省略時は登録されたダーク状態のエネルギー）

    Returns:
        g* の昇順の CrossingEvent のリスト

    Raises:
        DarkStateNotRegisteredError: ダーク状態が登録されていない場合
    """
    if result.dark_overlaps is None:
        raise DarkStateNotRegisteredError("ダーク交差の検出にはダーク状態の登録が必要です")
    context = _require_context(result)
    E_dark = result.dark_energy if E_dark is None else E_dark
    grid = result.g_grid

    def count_at(g: float) -> int:
        return context.count_below(g, E_dark)

    with ThreadPoolExecutor(max_workers=max(1, result.workers)) as executor:
        counts = list(executor.map(count_at, grid))

    def bisect(a: float, ma: int, b: float, mb: int) -> List[Tuple[float, int, float, int]]:
        if b - a <= BISECTION_TOL:
            return [(a, ma, b, mb)]
        mid = (a + b) / 2
        mm = count_at(mid)
        found = []
        if mm != ma:
            found += bisect(a, ma, mid, mm)
        if mm != mb:
            found += bisect(mid, mm, b, mb)
        return found

    def refine(i: int) -> List[CrossingEvent]:
        outer = (float(grid[i]), float(grid[i + 1]))
        brackets = bisect(grid[i], counts[i], grid[i + 1], counts[i + 1])
        return [_dark_root(context, E_dark, bracket, outer) for bracket in brackets]

    intervals = [i for i in range(len(grid) - 1) if counts[i] != counts[i + 1]]
    with ThreadPoolExecutor(max_workers=max(1, result.workers)) as executor:
        refined = list(executor.map(refine, intervals))

    events = sorted((e for batch in refined for e in batch), key=lambda e: e.g_star)
    logger.info(f"ダーク交差: {len(events)} 個 (変化区間 {len(intervals)})")
    return events


def _dark_root(
    context: _SweepContext,
    E_dark: float,
    bracket: Tuple[float, int, float, int],
    outer: Tuple[float, float],
) -> CrossingEvent:
    """
    個数の変化を挟む区間から λ(g) = E_dark の根を brentq で求める

    交差する c 本の準位と E_dark に固定された d 本の準位を合わせた窓の和
    Σ(λ_i − E_dark) は連続で、交差準位が E_dark を横切るところで符号を変える
    """
    a, ma, b, mb = bracket
    lo, hi = min(ma, mb), max(ma, mb)
    below_side = b if mb > ma else a
    values, _ = context.spectrum(below_side)
    # 個数が多い側では交差準位は E_dark − CROSSING_TOL より下にあり窓から外れない
    pinned = int(np.sum(np.abs(values - E_dark) <= CROSSING_TOL))
    window = slice(lo, hi + pinned)

    def excess(g: float) -> float:
        return float(np.sum(context.spectrum(g)[0][window] - E_dark))

    # 個数が少ない側では交差準位が [E_dark − CROSSING_TOL, E_dark) にあり得るので外へ広げる
    left, right = a, b
    f_left, f_right = excess(left), excess(right)
    step = b - a
    while f_left * f_right > 0:
        if mb > ma:
            if left <= outer[0]:
                break
            left = max(outer[0], left - step)
            f_left = excess(left)
        else:
            if right >= outer[1]:
                break
            right = min(outer[1], right + step)
            f_right = excess(right)
        step *= 2

    if f_left * f_right < 0:
        g_star = brentq(excess, left, right, xtol=ROOT_XTOL)
    else:
        # 根が端点にある（g = 0 で縮退している準位が離れていく場合など）
        g_star = left if abs(f_left) <= abs(f_right) else right
        if min(abs(f_left), abs(f_right)) > CROSSING_TOL:
            logger.warning(f"ダーク交差の根を挟めませんでした: [{a}, {b}]")

    levels = context.spectrum(g_star)[0][window]
    energy = float(levels[np.argmax(np.abs(levels - E_dark))])
    pair = (lo, max(hi + pinned - 1, lo + 1))
    return CrossingEvent(float(g_star), energy, pair, CrossingKind.DARK_CROSSING)


def _side_labels(context: _SweepContext, g: float, pair: Tuple[int, int], label: LabelProvider) -> Optional[np.ndarray]:
    op = label(g)
    if op is None:
        return None
    _, vectors = context.diagonalize(g)
    chosen = vectors[:, list(pair)]
    return np.real(np.einsum("ik,ij,jk->k", chosen.conj(), op.matrix, chosen))


def classify_crossing(
    model: ModelSpec,
    g_star: float,
    pair: Tuple[int, int],
    label_operator=None,
    dark_state: Optional[DarkStateProvider] = None,
    sector: Optional[Sector] = None,
    label_name: str = "label",
) -> CrossingEvent:
    """
    g* 付近の2準位の交差を分類

    Args:
        model: モデル仕様
        g_star: 精密化された結合定数
        pair: 準位インデックスの組 (i, j)、i < j
        label_operator: 保存量の演算子または g → 演算子の関数（J, C, b_j†b_j, Ŝ など）
        dark_state: g → ダーク状態の関数
        sector: 部分空間への制限
        label_name: 記録するラベル名

    Returns:
        種類とラベル値を持つ CrossingEvent
    """
    i, j = sorted(pair)
    context = _build_context(model, j + 1, None, None, sector)
    values, _ = context.diagonalize(g_star)
    gap = float(values[j] - values[i])
    energy = float((values[i] + values[j]) / 2)

    def event(kind: CrossingKind, labels=None) -> CrossingEvent:
        return CrossingEvent(float(g_star), energy, (i, j), kind, labels)

    if gap > AVOIDED_GAP:
        return event(CrossingKind.AVOIDED)
    if gap > CROSSING_TOL:
        return event(CrossingKind.UNCLASSIFIED)

    left, right = g_star - CLASSIFY_OFFSET, g_star + CLASSIFY_OFFSET
    if label_operator is not None:
        provider = _as_provider(label_operator)
        before = _side_labels(context, left, (i, j), provider)
        after = _side_labels(context, right, (i, j), provider)
        if before is not None and after is not None:
            # 真の交差では左の準位 i が右の準位 j に接続する
            noise = max(abs(before[0] - after[1]), abs(before[1] - after[0]), 1e-12)
            if abs(before[0] - before[1]) > 10 * noise:
                labels = {label_name: (float(before[0]), float(before[1]))}
                return event(CrossingKind.SYMMETRY_SECTOR_CROSSING, labels)

    if dark_state is not None:
        for g in (left, right):
            _, vectors = context.diagonalize(g)
            psi = embed_state(dark_state(g).state, model.basis).amplitudes
            if np.max(np.abs(psi.conj() @ vectors[:, [i, j]]) ** 2) > 0.5:
                return event(CrossingKind.DARK_CROSSING)
    return event(CrossingKind.UNCLASSIFIED)


def _polish_vertex(gap: Callable[[float], float], x: float, a: float, b: float) -> float:
    """
    V字型のギャップ（真の交差）では両側の値から頂点を外挿する

    有界最小化の精度は相対 √eps 程度なので、交差判定の許容誤差まで詰めるために使う。
    滑らかな極小（回避交差）では元の x の方がギャップが小さいのでそのまま返す
    """
    h = CLASSIFY_OFFSET / 10
    left, right = max(a, x - h), min(b, x + h)
    d_left, d_right = gap(left), gap(right)
    slope = (d_left + d_right) / (right - left)
    if slope <= 0:
        return x
    vertex = min(max(left + d_left / slope, left), right)
    return vertex if gap(vertex) < gap(x) else x


def detect_level_crossings(
    result: SweepResult,
    threshold: float = GAP_SCAN_THRESHOLD,
    label_name: Optional[str] = None,
) -> List[CrossingEvent]:
    """
    隣接準位間ギャップの局所最小を探し、有界最小化で精密化してから分類

    Args:
        result: スイープ結果
        threshold: 候補とするギャップの上限
        label_name: 分類に使うラベル（省略時はスイープの最初のラベル）

    Returns:
        g* の昇順の CrossingEvent のリスト
    """
    context = _require_context(result)
    grid = result.g_grid
    gaps = np.diff(result.levels, axis=1)
    if label_name is None:
        label_name = next(iter(context.labels), None)
    label = context.labels.get(label_name) if label_name is not None else None

    candidates = []
    for k in range(gaps.shape[1]):
        column = gaps[:, k]
        for i in range(1, len(grid) - 1):
            if column[i] >= threshold or column[i] > column[i - 1] or column[i] > column[i + 1]:
                continue
            if column[i - 1] <= CROSSING_TOL and column[i + 1] <= CROSSING_TOL:
                continue  # 全域で縮退
            candidates.append((k, grid[i - 1], grid[i + 1]))

    def refine(candidate) -> CrossingEvent:
        k, a, b = candidate

        def gap(g: float) -> float:
            return float(np.diff(context.diagonalize(g)[0][k: k + 2])[0])

        found = minimize_scalar(gap, bounds=(a, b), method="bounded", options={"xatol": BISECTION_TOL})
        return classify_crossing(
            context.model,
            _polish_vertex(gap, float(found.x), a, b),
            (k, k + 1),
            label_operator=label,
            dark_state=context.dark_state,
            sector=result.sector,
            label_name=label_name or "label",
        )

    with ThreadPoolExecutor(max_workers=max(1, result.workers)) as executor:
        refined = list(executor.map(refine, candidates))

    events: List[CrossingEvent] = []
    for event in sorted(refined, key=lambda e: (e.g_star, e.level_indices)):
        duplicate = any(
            e.level_indices == event.level_indices and abs(e.g_star - event.g_star) < CROSSING_TOL
            for e in events
        )
        if not duplicate:
            events.append(event)
    logger.info(f"準位交差の候補 {len(candidates)} 個 → {len(events)} 個")
    return events


def labelled_levels(
    model: ModelSpec,
    g: float,
    label: Operator,
    value: float,
    count: int,
    tol: float = LABEL_TOL,
) -> np.ndarray:
    """
    全スペクトルから ⟨label⟩ が value に一致する準位を下から count 個選ぶ

    保持数に制限されないので、高い準位の中にしかない部分空間の準位も拾える。
    縮退クラスターはラベル演算子を対角化するように回転してから期待値を評価する

    Args:
        model: モデル仕様
        g: 結合定数
        label: ラベル演算子（n_b など）
        value: 選ぶラベル値
        count: 返す準位数の上限
        tol: ラベル値の許容誤差

    Returns:
        昇順の固有値（該当する準位が count 個未満なら短い配列）
    """
    values, vectors = eig_hermitian(model.hamiltonian(g))
    vectors = _rotate_degenerate_clusters(values, vectors, label)
    expectations = np.real(np.sum(vectors.conj() * (label.matrix @ vectors), axis=0))
    return values[np.abs(expectations - value) < tol][:count]


def _same_crossing(a: CrossingEvent, b: CrossingEvent) -> bool:
    return abs(a.g_star - b.g_star) <= CLASSIFY_OFFSET and abs(a.energy - b.energy) <= AVOIDED_GAP


def merge_crossings(dark: Sequence[CrossingEvent], level: Sequence[CrossingEvent]) -> List[CrossingEvent]:
    """
    ダーク交差と準位交差の検出結果を1つのリストにまとめる

    同じ交差を両方の検出器が見つけた場合はダーク交差の記録だけを残し、
    準位交差側で求めたラベルを引き継ぐ

    Returns:
        g* の昇順の CrossingEvent のリスト
    """
    merged = list(dark)
    for event in level:
        match = next((i for i in range(len(dark)) if _same_crossing(merged[i], event)), None)
        if match is None:
            merged.append(event)
        elif event.labels and merged[match].labels is None:
            merged[match] = replace(merged[match], labels=event.labels)
    return sorted(merged, key=lambda e: (e.g_star, e.level_indices))


def baseline_energy(n: int, g: float, epsilon: float, omega: float = 1.0) -> Tuple[float, float]:
    """ベースライン E = nω − g²/ω ± ε を (+, −) の組で返す"""
    if omega <= 0:
        raise PreconditionError(f"omega は正の値が必要です: {omega}")
    center = n * omega - g ** 2 / omega
    return center + epsilon, center - epsilon


@dataclass(frozen=True)
class BaselineCurve:
    n: int
    plus: np.ndarray
    minus: np.ndarray

    def to_dict(self) -> dict:
        return {"n": self.n, "plus": self.plus.tolist(), "minus": self.minus.tolist()}


def baseline_curves(g_grid: Sequence[float], epsilon: float, n_max: int, omega: float = 1.0) -> List[BaselineCurve]:
    """n = 0…n_max のベースライン曲線"""
    grid = np.asarray(g_grid, dtype=float)
    curves = []
    for n in range(n_max + 1):
        pairs = np.array([baseline_energy(n, g, epsilon, omega) for g in grid])
        curves.append(BaselineCurve(n, pairs[:, 0], pairs[:, 1]))
    return curves
