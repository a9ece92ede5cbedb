"""
対称性モジュール
パリティ・励起数・隠れた対称性・ダーク射影・モード数演算子を構築し、
ハミルトニアンとの交換子ノルムで保存量であることを数値的に確認する
"""

import logging
from dataclasses import asdict, dataclass
from enum import Enum
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np

from src.config.settings import (
    COMMUTES_TOL,
    DEFAULT_INTERIOR_MARGIN,
    ORTHOGONALITY_TOL,
    PARAM_TOL,
)
from src.core.darkstates import dark_state_for_model
from src.core.errors import ContractViolationError, PreconditionError
from src.core.fockalg import (
    BasisDescriptor,
    Operator,
    StateVector,
    annihilation_op,
    commutator_interior_norm,
    embed,
    mode_ladder,
)
from src.core.models import (
    Aqrm2Params,
    ModelSpec,
    MultimodeParams,
    collective_couplings,
    common_frequency,
    scaled_to_unit_omega,
)

logger = logging.getLogger(__name__)

Cutoffs = Union[int, Sequence[int]]
LabelProvider = Callable[[float], Optional[Operator]]

LABEL_NAMES = ("R", "C", "J", "n_b", "S")

# 量子ビットブロック {gg, ge, eg, ee} ごとの σ₁z·σ₂z と (σ₁z+σ₂z+2)/2
_QUBIT_PARITY = np.array([1.0, -1.0, -1.0, 1.0])
_QUBIT_EXCITATION = np.array([0.0, 1.0, 1.0, 2.0])

# 表示順 {ee, eg, ge, gg} → 大域順のインデックス
_DISPLAY_ORDER = (3, 2, 1, 0)


class Verdict(Enum):
    COMMUTES = "commutes"
    VIOLATES = "violates"


@dataclass(frozen=True)
class SymmetryReport:
    """交換子チェックの結果"""
    operator_name: str
    interior_commutator_norm: float
    margin: int
    verdict: Verdict
    threshold: float

    def to_dict(self) -> dict:
        data = asdict(self)
        data["verdict"] = self.verdict.value
        return data


def check_commutation(
    name: str,
    A: Operator,
    B: Operator,
    margin: int = DEFAULT_INTERIOR_MARGIN,
    threshold: float = COMMUTES_TOL,
) -> SymmetryReport:
    """
    内部ブロックの交換子ノルムを評価して判定

    Args:
        name: 記録する演算子名
        A, B: 同じ基底上の演算子
        margin: 光子数境界層の厚さ（n について対角な演算子は 0 でよい）
        threshold: commutes と判定する上限

    Returns:
        SymmetryReport
    """
    norm = commutator_interior_norm(A, B, margin)
    verdict = Verdict.COMMUTES if norm < threshold else Verdict.VIOLATES
    logger.debug(f"交換子チェック {name}: ‖[A,B]‖ = {norm:.3e} → {verdict.value}")
    return SymmetryReport(name, norm, margin, verdict, threshold)


def _basis_for(N: Cutoffs) -> BasisDescriptor:
    cutoffs = (N,) if isinstance(N, (int, np.integer)) else tuple(N)
    return BasisDescriptor(cutoffs)


def parity_op(N: Cutoffs) -> Operator:
    """パリティ R = exp(iπΣa†a)·σ₁z·σ₂z（対角、R² = I）"""
    basis = _basis_for(N)
    photons = basis.occupations().sum(axis=1)
    qubits = _QUBIT_PARITY[basis.qubit_indices()]
    return Operator(np.diag((-1.0) ** photons * qubits), basis, hermitian=True)


def excitation_number_op(N: Cutoffs) -> Operator:
    """励起数 C = Σa†a + (σ₁z + σ₂z + 2)/2（対角、非負整数スペクトル）"""
    basis = _basis_for(N)
    photons = basis.occupations().sum(axis=1).astype(float)
    return Operator(np.diag(photons + _QUBIT_EXCITATION[basis.qubit_indices()]), basis, hermitian=True)


def _hidden_symmetry_blocks(N: int, delta: float, g: float) -> List[Tuple[np.ndarray, int, int]]:
    """
    ω=1 単位での隠れた対称性の 4×4 ブロック（光子部分は e^{iπa†a} を左から掛けた形）

    Returns:
        (光子演算子, 行, 列) のリスト。行・列は表示順 {ee, eg, ge, gg}
    """
    a = annihilation_op(N).matrix.real
    identity = np.eye(N + 1)
    parity = np.diag((-1.0) ** np.arange(N + 1))
    x = a.T + a
    y = a.T - a
    d = delta / g
    blocks = [
        (y + (4 * g + d) * identity, 0, 0),
        (x, 0, 2),
        (-y - d * identity, 1, 1),
        (-4 * g * identity, 1, 2),
        (-x, 1, 3),
        (-x, 2, 0),
        (-4 * g * identity, 2, 1),
        (-y + d * identity, 2, 2),
        (x, 3, 1),
        (y + (4 * g - d) * identity, 3, 3),
    ]
    return [(parity @ m, i, j) for m, i, j in blocks]


def _assemble_hidden_symmetry(basis: BasisDescriptor, delta: float, g: float) -> Operator:
    matrix = np.zeros((basis.dimension, basis.dimension))
    for photon, i, j in _hidden_symmetry_blocks(basis.mode_truncations[0], delta, g):
        unit = np.zeros((4, 4))
        unit[_DISPLAY_ORDER[i], _DISPLAY_ORDER[j]] = 1.0
        matrix += embed(basis, {0: photon}, unit)
    return Operator(matrix, basis, hermitian=True)


def _require_hidden_conditions(delta1: float, delta2: float, eps1: float, eps2: float, g1: float, g2: float) -> None:
    checks = (
        (abs(delta1 - delta2), "Δ₁ = Δ₂"),
        (abs(eps1 - 0.5), "ε₁ = ω/2"),
        (abs(eps2), "ε₂ = 0"),
        (abs(g1 - g2), "g₁ = g₂"),
    )
    for deviation, condition in checks:
        if deviation > PARAM_TOL:
            raise PreconditionError(f"隠れた対称性の条件 {condition} が満たされていません (差 {deviation:.3e})")
    if abs(g1) <= PARAM_TOL:
        raise PreconditionError("隠れた対称性演算子は g = 0 で定義されません（Δ/g の除算）")


def hidden_symmetry_J(p: Aqrm2Params, N: int) -> Operator:
    """
    Δ₁=Δ₂, ε₁=ω/2, ε₂=0, g₁=g₂≠0 における隠れた対称性演算子 J

    Args:
        p: モデルパラメータ（一般の ω は Δ/ω, g/ω に換算）
        N: 光子数カットオフ

    Returns:
        実対称な演算子

    Raises:
        PreconditionError: パラメータ条件を満たさない、または g = 0 の場合
    """
    unit = scaled_to_unit_omega(p)
    _require_hidden_conditions(unit.delta1, unit.delta2, unit.eps1, unit.eps2, unit.g1, unit.g2)
    return _assemble_hidden_symmetry(BasisDescriptor((N,)), unit.delta1, unit.g1)


def hidden_symmetry_J_multimode(p: MultimodeParams, cutoffs: Sequence[int]) -> Operator:
    """
    ボゴリューボフ基底での隠れた対称性（b₁ に作用し b₂…b_M には恒等）
    """
    omega = common_frequency(p)
    g_b1, g_b2 = collective_couplings(p)
    if len(cutoffs) != p.mode_count:
        raise PreconditionError(f"カットオフの個数 {len(cutoffs)} がモード数 {p.mode_count} と一致しません")
    _require_hidden_conditions(
        p.delta1 / omega, p.delta2 / omega, p.eps1 / omega, p.eps2 / omega, g_b1 / omega, g_b2 / omega
    )
    return _assemble_hidden_symmetry(BasisDescriptor(tuple(cutoffs)), p.delta1 / omega, g_b1 / omega)


def dark_projector(psi: StateVector) -> Operator:
    """
    ダーク状態への射影 Ŝ = |ψ⟩⟨ψ|（他の固有状態の係数 f = 0）
    """
    if abs(psi.norm - 1.0) > PARAM_TOL:
        raise PreconditionError(f"射影には規格化された状態が必要です: ‖ψ‖ = {psi.norm}")
    v = psi.amplitudes
    return Operator(np.outer(v, v.conj()), psi.basis, hermitian=True)


def bogoliubov_coeffs(g_col: Sequence[float]) -> np.ndarray:
    """
    集団モード b_j = Σᵢ T[j,i] aᵢ の係数行列（直交行列）

    第0行は g/‖g‖、第 j 行は先頭 j+1 個の結合で作る直交補ベクトル

    Args:
        g_col: 各モードの結合定数

    Returns:
        M×M 実直交行列

    Raises:
        PreconditionError: 先頭の結合がゼロで部分和が消える場合
    """
    g = np.asarray(g_col, dtype=float)
    if g.ndim != 1 or g.size == 0:
        raise PreconditionError(f"結合定数のリストが不正です: {g_col}")
    if g[0] == 0:
        raise PreconditionError(f"先頭の結合定数がゼロのため変換係数の分母が消えます: {tuple(g)}")
    M = g.size
    T = np.zeros((M, M))
    T[0] = g / np.linalg.norm(g)
    partial_sum = g[0] ** 2
    for j in range(1, M):
        current = partial_sum + g[j] ** 2
        denominator = np.sqrt(current * partial_sum)
        T[j, :j] = g[:j] * g[j] / denominator
        T[j, j] = -partial_sum / denominator
        partial_sum = current
    return T


def mode_number_ops(coeffs: np.ndarray, Ns: Sequence[int], include_collective: bool = False) -> List[Operator]:
    """
    元の a モード基底上の b_j†b_j（既定では j = 2…M）

    Args:
        coeffs: bogoliubov_coeffs の直交行列
        Ns: 各 a モードのカットオフ
        include_collective: True なら b₁†b₁ も先頭に含める

    Raises:
        ContractViolationError: 係数行列が直交でない場合
    """
    T = np.asarray(coeffs, dtype=float)
    deviation = np.max(np.abs(T @ T.T - np.eye(T.shape[0])))
    if deviation > ORTHOGONALITY_TOL:
        raise ContractViolationError(f"係数行列が直交ではありません: ‖TTᵀ − I‖ = {deviation:.3e}")
    if len(Ns) != T.shape[0]:
        raise PreconditionError(f"カットオフの個数 {len(Ns)} がモード数 {T.shape[0]} と一致しません")
    basis = BasisDescriptor(tuple(Ns))
    ladders = [mode_ladder(basis, i) for i in range(basis.mode_count)]
    operators = []
    for j in range(0 if include_collective else 1, T.shape[0]):
        b = sum(T[j, i] * ladders[i] for i in range(len(ladders)))
        number = b.T @ b
        operators.append(Operator((number + number.T) / 2, basis, hermitian=True))
    return operators


def restrict_to_sector(op: Operator, value: float, tol: float = PARAM_TOL) -> np.ndarray:
    """
    対角な保存量の固有値 value に属する基底インデックス

    Raises:
        PreconditionError: 演算子が対角でない場合
    """
    matrix = op.matrix
    if np.any(np.abs(matrix - np.diag(np.diag(matrix))) > 0):
        raise PreconditionError("セクター制限には対角な保存量が必要です")
    return np.flatnonzero(np.abs(np.real(np.diag(matrix)) - value) <= tol)


def _collective_number(model: ModelSpec) -> Operator:
    if model.family == "multimode":
        ops = mode_number_ops(bogoliubov_coeffs(_leading_direction(model.params)), model.cutoffs)
        total = ops[0]
        for op in ops[1:]:
            total = total + op
        return total
    basis = model.basis
    occupations = basis.occupations()[:, 1:].sum(axis=1).astype(float)
    return Operator(np.diag(occupations), basis, hermitian=True)


def _leading_direction(p: MultimodeParams) -> Tuple[float, ...]:
    return p.g_col1 if any(p.g_col1) else p.g_col2


def label_provider(model: ModelSpec, name: str, branch: int = 1, dark_kind: str = "auto") -> LabelProvider:
    """
    ラベル演算子名から g → Operator の関数を作る

    Args:
        model: モデル仕様
        name: 'R' / 'C' / 'J' / 'n_b' / 'S'
        branch: 'S' で使うダーク状態の分岐
        dark_kind: 'S' で使うダーク状態の種類

    Returns:
        結合 g を受け取り演算子を返す関数（J は g = 0 で None）
    """
    if name == "R":
        op = parity_op(model.cutoffs)
        return lambda g: op
    if name == "C":
        op = excitation_number_op(model.cutoffs)
        return lambda g: op
    if name == "J":
        if model.family == "aqrm2":
            return lambda g: None if abs(g) <= PARAM_TOL else hidden_symmetry_J(model.at(g), model.cutoffs[0])
        if model.family == "multimode_transformed":
            return lambda g: None if abs(g) <= PARAM_TOL else hidden_symmetry_J_multimode(model.at(g), model.cutoffs)
        raise PreconditionError(f"ラベル J はモデル族 {model.family} では使用できません (aqrm2, multimode_transformed のみ)")
    if name == "n_b":
        if model.family not in ("multimode", "multimode_transformed") or len(model.cutoffs) < 2:
            raise PreconditionError(f"ラベル n_b には2モード以上の多モード模型が必要です: {model.family}")
        op = _collective_number(model)
        return lambda g: op
    if name == "S":
        return lambda g: dark_projector(dark_state_for_model(model, g, branch, dark_kind).state)
    raise PreconditionError(f"未知のラベル演算子です: {name} (使用可能: {', '.join(LABEL_NAMES)})")
