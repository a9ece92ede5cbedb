"""
ダーク状態モジュール
結合定数に依存しない固有エネルギーを持つ有限光子数の固有状態を構築・検証する
"""

import logging
import math
import threading
from dataclasses import dataclass
from enum import Enum
from functools import partial
from typing import Callable, List, Optional, Sequence

import numpy as np

from src.config.settings import MIN_CUTOFF, PARAM_TOL, RESIDUAL_TOL
from src.core.errors import (
    BasisMismatchError,
    NoDarkBiasError,
    PreconditionError,
    SingularDenominatorError,
)
from src.core.fockalg import (
    BasisDescriptor,
    Operator,
    StateVector,
    nullspace,
)
from src.core.models import (
    Aqrm2Params,
    Jc2Params,
    ModelSpec,
    MultimodeParams,
    build_aqrm2,
    collective_couplings,
    common_frequency,
    scaled_to_unit_omega,
)

logger = logging.getLogger(__name__)

# 量子ビットブロック内インデックス
GG, GE, EG, EE = 0, 1, 2, 3


class Construction(Enum):
    CLOSED_FORM = "closed_form"
    NULLSPACE = "nullspace"


@dataclass(frozen=True)
class DarkStateResult:
    """ダーク状態とそのエネルギー・分岐・構築方法"""
    state: StateVector
    energy: float
    branch: Optional[int]
    construction: Construction


DarkStateProvider = Callable[[float], DarkStateResult]


def _require_branch(branch: int) -> int:
    if branch not in (1, -1):
        raise PreconditionError(f"branch は +1 または −1 が必要です: {branch}")
    return branch


def _require_close(actual: float, expected: float, message: str) -> None:
    if abs(actual - expected) > PARAM_TOL:
        raise PreconditionError(f"{message} (実際 {actual!r}, 期待 {expected!r})")


def epsilon_condition(delta1: float, delta2: float, omega: float = 1.0) -> float:
    """
    ダーク状態を許すバイアス ε の大きさ

    Args:
        delta1, delta2: 量子ビットの半分裂 Δ₁, Δ₂
        omega: 共振器周波数

    Returns:
        ε = ω·√B / 2、B = Δ₁⁴ + (Δ₂² − 1)² − 2Δ₁²(1 + Δ₂²)（ω 単位）

    Raises:
        NoDarkBiasError: B < 0 で実数の ε が存在しない場合
    """
    d1 = delta1 / omega
    d2 = delta2 / omega
    bracket = d1 ** 4 + (d2 ** 2 - 1) ** 2 - 2 * d1 ** 2 * (1 + d2 ** 2)
    if bracket < 0:
        raise NoDarkBiasError(
            f"epsilon does not satisfy the dark-state condition: Δ₁={delta1}, Δ₂={delta2} では "
            f"ε² = {bracket / 4:.6g} < 0 となり実数のバイアスが存在しません"
        )
    return omega * math.sqrt(bracket) / 2


def _closed_form_amplitudes(p: Aqrm2Params, branch: int) -> np.ndarray:
    """
    ω=1 単位のパラメータから光子数 n ≤ 1 の振幅 (2×4) を返す

    g, ε は第2量子ビットの値（g₂ = branch·g₁, ε₂ = branch·ε₁）
    """
    s = branch
    g, eps = p.g2, p.eps2
    delta = p.delta1 - p.delta2
    total = p.delta1 + p.delta2
    amps = np.zeros((2, 4))
    if abs(delta) <= PARAM_TOL:
        # Δ₁=Δ₂ の極限: 一重項 |1⟩(|eg⟩ − s|ge⟩)/√2
        amps[1, EG] = 1.0
        amps[1, GE] = -s
        return amps

    denominator = p.delta1 + p.delta1 ** 2 + p.delta2 - p.delta2 ** 2
    for name, value in (("1 − Δ₁ + Δ₂", delta - 1), ("1 + Δ₁ − Δ₂", delta + 1), ("Δ₁ + Δ₁² + Δ₂ − Δ₂²", denominator)):
        if abs(value) <= PARAM_TOL:
            raise SingularDenominatorError(f"閉形式の分母 {name} がゼロです: Δ₁={p.delta1}, Δ₂={p.delta2}")
    k = 2 * eps * delta / ((delta - 1) * denominator)

    amps[0, GG] = s * delta * (total - 1) / 2
    amps[0, EE] = -delta * (total + 1) / 2
    amps[0, EG] = eps * delta / (delta - 1)
    amps[0, GE] = -s * eps * delta / (delta + 1)
    amps[1, EG] = g
    amps[1, GE] = -s * g
    amps[1, GG] = s * k * g
    amps[1, EE] = -k * g
    return amps


def _one_photon_state(amps: np.ndarray, basis: BasisDescriptor, weights: Sequence[float], label: str) -> StateVector:
    """
    n ≤ 1 の振幅を基底へ配置する

    1光子成分は weights で重み付けした単一励起 Σ wᵢ|0…1ᵢ…0⟩ として埋め込む
    """
    vector = np.zeros(basis.dimension, dtype=complex)
    vacuum = [0] * basis.mode_count
    for q in range(4):
        vector[basis.index(vacuum, q)] += amps[0, q]
        for i, w in enumerate(weights):
            if w == 0:
                continue
            occupation = list(vacuum)
            occupation[i] = 1
            vector[basis.index(occupation, q)] += w * amps[1, q]
    return StateVector(vector, basis, label).normalized()


def _check_biased_conditions(p: Aqrm2Params, branch: int) -> None:
    _require_close(p.g2, branch * p.g1, "結合条件 g₂ = branch·g₁ が満たされていません")
    _require_close(p.eps2, branch * p.eps1, "バイアス条件 ε₂ = branch·ε₁ が満たされていません")
    if abs(p.delta1 - p.delta2) <= PARAM_TOL:
        return
    eps = epsilon_condition(p.delta1, p.delta2)
    if abs(abs(p.eps1) - eps) > PARAM_TOL:
        raise PreconditionError(
            f"epsilon does not satisfy the dark-state condition: |ε₁| = {abs(p.eps1)!r}, "
            f"必要な値 {eps!r} (Δ₁={p.delta1}, Δ₂={p.delta2})"
        )


def dark_state_aqrm2(p: Aqrm2Params, branch: int, N: int) -> DarkStateResult:
    """
    バイアス付き2量子ビット非対称ラビ模型のダーク状態（エネルギー ω）

    Args:
        p: ε₁ が ε 条件を満たし g₂ = branch·g₁, ε₂ = branch·ε₁ のパラメータ
        branch: 符号 ±1
        N: 埋め込み先のカットオフ

    Returns:
        閉形式で構築した DarkStateResult

    Raises:
        PreconditionError: パラメータ条件が満たされない場合
        NoDarkBiasError: 実数の ε が存在しない場合
        SingularDenominatorError: 閉形式の分母がゼロの場合
    """
    _require_branch(branch)
    unit = scaled_to_unit_omega(p)
    _check_biased_conditions(unit, branch)
    amps = _closed_form_amplitudes(unit, branch)
    state = _one_photon_state(amps, BasisDescriptor((N,)), (1.0,), f"aqrm2_dark[{branch:+d}]")
    return DarkStateResult(state, p.omega, branch, Construction.CLOSED_FORM)


def _singlet_amplitudes(branch: int) -> np.ndarray:
    amps = np.zeros((2, 4))
    amps[1, GE] = 1.0
    amps[1, EG] = -branch
    return amps


def dark_state_aqrm2_unbiased(p: Aqrm2Params, branch: int, N: int) -> DarkStateResult:
    """
    バイアスなし (ε=0, Δ₁+Δ₂=ω) のダーク状態 (Δ₁−Δ₂)|0,ee⟩ + g₁|1⟩(|ge⟩ − branch|eg⟩)
    """
    _require_branch(branch)
    unit = scaled_to_unit_omega(p)
    _require_close(unit.eps1, 0.0, "バイアス ε₁ = 0 が必要です")
    _require_close(unit.eps2, 0.0, "バイアス ε₂ = 0 が必要です")
    _require_close(unit.delta1 + unit.delta2, 1.0, "共鳴条件 Δ₁ + Δ₂ = ω が満たされていません")
    _require_close(unit.g2, branch * unit.g1, "結合条件 g₂ = branch·g₁ が満たされていません")
    amps = np.zeros((2, 4))
    amps[0, EE] = unit.delta1 - unit.delta2
    amps[1, GE] = unit.g1
    amps[1, EG] = -branch * unit.g1
    if not np.any(amps):
        amps = _singlet_amplitudes(branch)
    state = _one_photon_state(amps, BasisDescriptor((N,)), (1.0,), f"aqrm2_unbiased_dark[{branch:+d}]")
    return DarkStateResult(state, p.omega, branch, Construction.CLOSED_FORM)


_WARNED = set()
_WARNED_LOCK = threading.Lock()


def _warn_once(key) -> bool:
    # スイープのワーカースレッドからも呼ばれる
    with _WARNED_LOCK:
        if key in _WARNED:
            return False
        _WARNED.add(key)
        return True


def _jc_cutoff(N_exc: int, cutoff: Optional[int]) -> int:
    if N_exc < 0 or int(N_exc) != N_exc:
        raise PreconditionError(f"励起数 N は0以上の整数が必要です: {N_exc}")
    needed = max(MIN_CUTOFF, N_exc + 2)
    if cutoff is None:
        return needed
    if cutoff < needed:
        raise PreconditionError(f"カットオフ {cutoff} では光子数 {N_exc + 2} を表現できません")
    return cutoff


def jc_dark_state(N_exc: int, p: Jc2Params, cutoff: Optional[int] = None) -> DarkStateResult:
    """
    JC 模型の2成分ダーク状態 √(N+2)|N,ee⟩ − √(N+1)|N+2,gg⟩（エネルギー (N+1)ω）

    Args:
        N_exc: 光子数 N
        p: Δ₁ + Δ₂ = ω を満たすパラメータ
        cutoff: 埋め込み先のカットオフ（省略時は N+2 以上の最小値）

    Note:
        厳密な固有状態になるのは g₁ = g₂ のときのみ。それ以外では残差
        √2·√((N+1)(N+2))·|g₁−g₂|/√(2N+3) が残る
    """
    unit = scaled_to_unit_omega(p)
    _require_close(unit.delta1 + unit.delta2, 1.0, "共鳴条件 Δ₁ + Δ₂ = ω が満たされていません")
    N = _jc_cutoff(N_exc, cutoff)
    if abs(unit.g1 - unit.g2) > PARAM_TOL and _warn_once(("jc_dark", round(unit.g2 / unit.g1, 12) if unit.g1 else None)):
        logger.warning(
            f"g₁ ≠ g₂ (g₁={p.g1}, g₂={p.g2}) では |N,ee⟩−|N+2,gg⟩ 型の状態は厳密な固有状態ではありません"
        )
    basis = BasisDescriptor((N,))
    vector = np.zeros(basis.dimension, dtype=complex)
    vector[basis.index([N_exc], EE)] = math.sqrt(N_exc + 2)
    vector[basis.index([N_exc + 2], GG)] = -math.sqrt(N_exc + 1)
    state = StateVector(vector, basis, f"jc_dark[N={N_exc}]").normalized()
    return DarkStateResult(state, (N_exc + 1) * p.omega, None, Construction.CLOSED_FORM)


def jc_dark_state_mixed(N_exc: int, p: Jc2Params, branch: int, cutoff: Optional[int] = None) -> DarkStateResult:
    """
    JC 模型のダーク状態 (Δ₁−Δ₂)|N,ee⟩ + √(N+1)g₁|N+1⟩(|ge⟩ − branch|eg⟩)
    """
    _require_branch(branch)
    unit = scaled_to_unit_omega(p)
    _require_close(unit.delta1 + unit.delta2, 1.0, "共鳴条件 Δ₁ + Δ₂ = ω が満たされていません")
    _require_close(unit.g2, branch * unit.g1, "結合条件 g₂ = branch·g₁ が満たされていません")
    N = _jc_cutoff(N_exc, cutoff)
    basis = BasisDescriptor((N,))
    vector = np.zeros(basis.dimension, dtype=complex)
    vector[basis.index([N_exc], EE)] = unit.delta1 - unit.delta2
    vector[basis.index([N_exc + 1], GE)] = math.sqrt(N_exc + 1) * unit.g1
    vector[basis.index([N_exc + 1], EG)] = -branch * math.sqrt(N_exc + 1) * unit.g1
    if not np.any(vector):
        vector[basis.index([N_exc + 1], GE)] = 1.0
        vector[basis.index([N_exc + 1], EG)] = -branch
    state = StateVector(vector, basis, f"jc_dark_mixed[N={N_exc},{branch:+d}]").normalized()
    return DarkStateResult(state, (N_exc + 1) * p.omega, branch, Construction.CLOSED_FORM)


def _collective_dark_amplitudes(p: MultimodeParams, branch: int) -> tuple:
    """多モードパラメータから (ω, 集団結合 g_b, 単一モード振幅) を返す"""
    omega = common_frequency(p)
    for i, (a, b) in enumerate(zip(p.g_col1, p.g_col2)):
        _require_close(b, branch * a, f"モード {i} の結合条件 g_{{i2}} = branch·g_{{i1}} が満たされていません")
    g_b, _ = collective_couplings(p)
    single = Aqrm2Params(
        delta1=p.delta1,
        delta2=p.delta2,
        g1=g_b,
        g2=branch * g_b,
        eps1=p.eps1,
        eps2=p.eps2,
        omega=omega,
    )
    unit = scaled_to_unit_omega(single)
    _check_biased_conditions(unit, branch)
    return omega, g_b, _closed_form_amplitudes(unit, branch)


def dark_state_multimode(p: MultimodeParams, branch: int, Ns: Sequence[int]) -> DarkStateResult:
    """
    多モード模型のダーク状態（1光子成分を W 状態 g_b⁻¹Σg′ᵢ|0…1ᵢ…0⟩ に置換）

    Args:
        p: 全周波数一致・g_{i2} = branch·g_{i1} のパラメータ
        branch: 符号 ±1
        Ns: 元の a モード基底のカットオフ

    Returns:
        build_multimode の基底上の DarkStateResult
    """
    _require_branch(branch)
    if len(Ns) != p.mode_count:
        raise PreconditionError(f"カットオフの個数 {len(Ns)} がモード数 {p.mode_count} と一致しません")
    omega, g_b, amps = _collective_dark_amplitudes(p, branch)
    weights = [g / g_b for g in p.g_col1] if g_b else [1.0] + [0.0] * (p.mode_count - 1)
    state = _one_photon_state(amps, BasisDescriptor(tuple(Ns)), weights, f"multimode_dark[{branch:+d}]")
    return DarkStateResult(state, omega, branch, Construction.CLOSED_FORM)


def dark_state_transformed(p: MultimodeParams, branch: int, cutoffs: Sequence[int]) -> DarkStateResult:
    """ボゴリューボフ基底でのダーク状態（b₁ の単一モード状態 ⊗ b₂…b_M の真空）"""
    _require_branch(branch)
    omega, _, amps = _collective_dark_amplitudes(p, branch)
    weights = [1.0] + [0.0] * (p.mode_count - 1)
    state = _one_photon_state(amps, BasisDescriptor(tuple(cutoffs)), weights, f"transformed_dark[{branch:+d}]")
    return DarkStateResult(state, omega, branch, Construction.CLOSED_FORM)


def _phase_normalized(vector: np.ndarray) -> np.ndarray:
    pivot = vector[np.argmax(np.abs(vector))]
    return vector * (abs(pivot) / pivot)


def one_photon_ansatz_solve(p: Aqrm2Params, E: float, cutoff: int = MIN_CUTOFF) -> List[DarkStateResult]:
    """
    1光子仮定の長方形方程式 (H − E) ψ = 0 を零空間として解く

    列は n ≤ 1（8次元）、行は n ≤ 2（12次元）。パラメータに関する仮定を置かない独立な検算手段

    Args:
        p: 任意のパラメータ
        E: 探索するエネルギー
        cutoff: 返す状態の埋め込み先カットオフ

    Returns:
        残差条件を満たす候補状態のリスト（解がなければ空）
    """
    h = build_aqrm2(p, MIN_CUTOFF)
    rectangular = (h.matrix - E * np.eye(h.dimension))[:, :8]
    candidates = nullspace(rectangular)
    basis = BasisDescriptor((cutoff,))
    results = []
    for k, v in enumerate(candidates):
        vector = np.zeros(basis.dimension, dtype=complex)
        vector[:8] = _phase_normalized(v)
        error = float(np.linalg.norm(rectangular @ vector[:8]))
        if error >= RESIDUAL_TOL:
            logger.debug(f"零空間候補 {k} を棄却: 残差 {error:.3e}")
            continue
        state = StateVector(vector, basis, f"one_photon_ansatz[{k}]").normalized()
        results.append(DarkStateResult(state, E, None, Construction.NULLSPACE))
    logger.debug(f"1光子仮定の解: {len(results)} 個 (E={E})")
    return results


def residual(H: Operator, psi: StateVector, E: float) -> float:
    """
    ‖Hψ − Eψ‖₂

    Raises:
        BasisMismatchError: 基底が一致しない場合
        PreconditionError: ψ が規格化されていない場合
    """
    if psi.basis != H.basis:
        raise BasisMismatchError(f"状態と演算子の基底が一致しません: {psi.basis} と {H.basis}")
    if abs(psi.norm - 1.0) > PARAM_TOL:
        raise PreconditionError(f"状態が規格化されていません: ‖ψ‖ = {psi.norm}")
    return float(np.linalg.norm(H.apply(psi) - E * psi.amplitudes))


DARK_KINDS = ("auto", "closed_form", "unbiased", "jc", "jc_mixed")


def dark_state_for_model(model: ModelSpec, g: float, branch: int = 1, kind: str = "auto", N_exc: int = 0) -> DarkStateResult:
    """
    モデル仕様と結合 g に対応するダーク状態をモデルの基底上で構築

    Args:
        model: モデル仕様
        g: 結合定数（テンプレートに掛ける倍率）
        branch: 符号 ±1
        kind: 'auto' / 'closed_form' / 'unbiased' / 'jc' / 'jc_mixed'
        N_exc: JC 模型での光子数 N

    Returns:
        DarkStateResult
    """
    if kind not in DARK_KINDS:
        raise PreconditionError(f"未知のダーク状態の種類です: {kind} (使用可能: {', '.join(DARK_KINDS)})")
    params = model.at(g)
    N = model.cutoffs[0]
    if model.family == "aqrm2":
        unbiased = kind == "unbiased" or (kind == "auto" and params.eps1 == 0 and params.eps2 == 0)
        if unbiased:
            return dark_state_aqrm2_unbiased(params, branch, N)
        return dark_state_aqrm2(params, branch, N)
    if model.family == "jc2":
        if kind == "jc_mixed":
            return jc_dark_state_mixed(N_exc, params, branch, N)
        return jc_dark_state(N_exc, params, N)
    if model.family == "multimode":
        return dark_state_multimode(params, branch, model.cutoffs)
    return dark_state_transformed(params, branch, model.cutoffs)


def dark_provider(model: ModelSpec, branch: int = 1, kind: str = "auto", N_exc: int = 0) -> DarkStateProvider:
    """結合 g からダーク状態を返す関数"""
    return partial(dark_state_for_model, model, branch=branch, kind=kind, N_exc=N_exc)
