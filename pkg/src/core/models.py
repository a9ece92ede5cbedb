"""
モデル定義モジュール
2量子ビット非対称ラビ模型・JC模型・多モード模型のパラメータとハミルトニアン構築
"""

import logging
import math
from dataclasses import dataclass, fields, replace
from typing import Sequence, Tuple, Union

import numpy as np

from src.config.settings import (
    DEFAULT_OMEGA,
    DIMENSION_LIMIT,
    DIMENSION_WARNING,
    MIN_CUTOFF,
    PARAM_TOL,
    RATIO_TOL,
)
from src.core.errors import (
    DimensionMismatchError,
    DimensionOverflowError,
    InvalidTruncationError,
    PreconditionError,
)
from src.core.fockalg import (
    IDENTITY_2,
    SIGMA_MINUS,
    SIGMA_X,
    SIGMA_Z,
    BasisDescriptor,
    Operator,
    embed,
    mode_ladder,
)

logger = logging.getLogger(__name__)

MODEL_FAMILIES = ("aqrm2", "jc2", "multimode", "multimode_transformed")


def _require_finite(params) -> None:
    for f in fields(params):
        value = getattr(params, f.name)
        values = value if isinstance(value, tuple) else (value,)
        for v in values:
            if not math.isfinite(float(v)):
                raise PreconditionError(f"{f.name} は有限の実数が必要です: {value}")


@dataclass(frozen=True)
class Aqrm2Params:
    """2量子ビット非対称ラビ模型のパラメータ"""
    delta1: float = 0.0
    delta2: float = 0.0
    g1: float = 0.0
    g2: float = 0.0
    eps1: float = 0.0
    eps2: float = 0.0
    omega: float = DEFAULT_OMEGA

    def __post_init__(self):
        _require_finite(self)
        if self.omega <= 0:
            raise PreconditionError(f"omega は正の値が必要です: {self.omega}")


@dataclass(frozen=True)
class Jc2Params:
    """2量子ビット Jaynes-Cummings 模型のパラメータ"""
    delta1: float = 0.0
    delta2: float = 0.0
    g1: float = 0.0
    g2: float = 0.0
    omega: float = DEFAULT_OMEGA

    def __post_init__(self):
        _require_finite(self)
        if self.omega <= 0:
            raise PreconditionError(f"omega は正の値が必要です: {self.omega}")

    @property
    def detuning1(self) -> float:
        return 2 * self.delta1 - self.omega

    @property
    def detuning2(self) -> float:
        return 2 * self.delta2 - self.omega


@dataclass(frozen=True)
class MultimodeParams:
    """多モード2量子ビット非対称ラビ模型のパラメータ"""
    omegas: Tuple[float, ...]
    g_col1: Tuple[float, ...]
    g_col2: Tuple[float, ...]
    delta1: float = 0.0
    delta2: float = 0.0
    eps1: float = 0.0
    eps2: float = 0.0

    def __post_init__(self):
        for name in ("omegas", "g_col1", "g_col2"):
            object.__setattr__(self, name, tuple(float(v) for v in getattr(self, name)))
        _require_finite(self)
        if self.mode_count < 1:
            raise PreconditionError("モード数は1以上が必要です")
        if not len(self.g_col1) == len(self.g_col2) == self.mode_count:
            raise DimensionMismatchError(
                f"結合定数の長さが不一致です: omegas={self.mode_count}, "
                f"g_col1={len(self.g_col1)}, g_col2={len(self.g_col2)}"
            )
        if any(w <= 0 for w in self.omegas):
            raise PreconditionError(f"モード周波数は正の値が必要です: {self.omegas}")

    @property
    def mode_count(self) -> int:
        return len(self.omegas)


ModelParams = Union[Aqrm2Params, Jc2Params, MultimodeParams]


def qubit_block(delta1: float, delta2: float, eps1: float, eps2: float) -> np.ndarray:
    """Δ₁σ₁z + Δ₂σ₂z + ε₁σ₁x + ε₂σ₂x の 4×4 行列"""
    return (
        delta1 * np.kron(SIGMA_Z, IDENTITY_2)
        + delta2 * np.kron(IDENTITY_2, SIGMA_Z)
        + eps1 * np.kron(SIGMA_X, IDENTITY_2)
        + eps2 * np.kron(IDENTITY_2, SIGMA_X)
    )


def _coupling_block(g1: float, g2: float) -> np.ndarray:
    return g1 * np.kron(SIGMA_X, IDENTITY_2) + g2 * np.kron(IDENTITY_2, SIGMA_X)


def _require_cutoffs(cutoffs: Sequence[int]) -> None:
    for n in cutoffs:
        if int(n) != n or n < MIN_CUTOFF:
            raise InvalidTruncationError(f"カットオフは {MIN_CUTOFF} 以上の整数が必要です: {tuple(cutoffs)}")


def _make_basis(cutoffs: Sequence[int]) -> BasisDescriptor:
    _require_cutoffs(cutoffs)
    basis = BasisDescriptor(tuple(int(n) for n in cutoffs))
    if basis.dimension > DIMENSION_LIMIT:
        raise DimensionOverflowError(f"次元 {basis.dimension} が上限 {DIMENSION_LIMIT} を超えています")
    if basis.dimension > DIMENSION_WARNING:
        logger.warning(f"密行列の次元が大きいです: {basis.dimension} (カットオフ {basis.mode_truncations})")
    return basis


def _free_modes(basis: BasisDescriptor, omegas: Sequence[float]) -> np.ndarray:
    matrix = np.zeros((basis.dimension, basis.dimension))
    for i, omega in enumerate(omegas):
        n = np.arange(basis.mode_dims[i], dtype=float)
        matrix += omega * embed(basis, {i: np.diag(n)})
    return matrix


def build_aqrm2(p: Aqrm2Params, N: int) -> Operator:
    """
    2量子ビット非対称ラビ模型のハミルトニアンを構築

    Args:
        p: モデルパラメータ
        N: 光子数カットオフ

    Returns:
        次元 4(N+1) のエルミート演算子

    Raises:
        InvalidTruncationError: N < 2 の場合
    """
    basis = _make_basis((N,))
    a = mode_ladder(basis, 0)
    x = a + a.T
    matrix = (
        _free_modes(basis, (p.omega,))
        + x @ embed(basis, qubit_block=_coupling_block(p.g1, p.g2))
        + embed(basis, qubit_block=qubit_block(p.delta1, p.delta2, p.eps1, p.eps2))
    )
    return Operator(matrix, basis, hermitian=True)


def build_jc2(p: Jc2Params, N: int, counter_rotating: float = 0.0) -> Operator:
    """
    2量子ビット JC 模型のハミルトニアンを構築

    Args:
        p: モデルパラメータ
        N: 光子数カットオフ
        counter_rotating: 反回転項 gᵢ(a†σᵢ† + aσᵢ) に掛ける係数 λ

    Returns:
        エルミート演算子（λ=1 で ε=0 の非対称ラビ模型に一致）
    """
    basis = _make_basis((N,))
    a = mode_ladder(basis, 0)
    sigma = [
        embed(basis, qubit_block=np.kron(SIGMA_MINUS, IDENTITY_2)),
        embed(basis, qubit_block=np.kron(IDENTITY_2, SIGMA_MINUS)),
    ]
    matrix = _free_modes(basis, (p.omega,)) + embed(
        basis, qubit_block=qubit_block(p.delta1, p.delta2, 0.0, 0.0)
    )
    for g, s in zip((p.g1, p.g2), sigma):
        matrix += g * (a @ s.T + a.T @ s)
        if counter_rotating:
            matrix += counter_rotating * g * (a.T @ s.T + a @ s)
    return Operator(matrix, basis, hermitian=True)


def build_multimode(p: MultimodeParams, Ns: Sequence[int]) -> Operator:
    """
    多モード非対称ラビ模型のハミルトニアンを構築

    Raises:
        DimensionMismatchError: カットオフの個数がモード数と異なる場合
        DimensionOverflowError: 次元が上限を超える場合
    """
    if len(Ns) != p.mode_count:
        raise DimensionMismatchError(f"カットオフの個数 {len(Ns)} がモード数 {p.mode_count} と一致しません")
    basis = _make_basis(Ns)
    matrix = _free_modes(basis, p.omegas) + embed(
        basis, qubit_block=qubit_block(p.delta1, p.delta2, p.eps1, p.eps2)
    )
    for i in range(p.mode_count):
        a = mode_ladder(basis, i)
        matrix += (a + a.T) @ embed(basis, qubit_block=_coupling_block(p.g_col1[i], p.g_col2[i]))
    return Operator(matrix, basis, hermitian=True)


def common_frequency(p: MultimodeParams) -> float:
    """全モード共通の周波数（不一致なら PreconditionError）"""
    omega = p.omegas[0]
    if any(abs(w - omega) > PARAM_TOL for w in p.omegas):
        raise PreconditionError(f"ボゴリューボフ変換には全モード周波数の一致が必要です: {p.omegas}")
    return omega


def collective_couplings(p: MultimodeParams) -> Tuple[float, float]:
    """
    集団モード b₁ への結合 (g_b1, g_b2) を計算

    g_{i2}/g_{i1} が全モードで共通の比 r を持つことを要求し、
    g_b1 = (Σg_{i1}²)^½、g_b2 = sign(r)·(Σg_{i2}²)^½ を返す

    Raises:
        PreconditionError: 比の条件が破れている場合
    """
    col1 = np.array(p.g_col1)
    col2 = np.array(p.g_col2)
    for i in range(p.mode_count):
        for j in range(i + 1, p.mode_count):
            cross = col1[i] * col2[j] - col2[i] * col1[j]
            scale = max(abs(col1[i] * col2[j]), abs(col2[i] * col1[j]))
            if abs(cross) > RATIO_TOL * scale:
                raise PreconditionError(
                    f"結合比の条件 g_{{i1}}/g_{{i'1}} = g_{{i2}}/g_{{i'2}} が破れています "
                    f"(モード {i}, {j}: 差 {cross:.3e})"
                )
    direction = col1 if np.linalg.norm(col1) > 0 else col2
    norm = np.linalg.norm(direction)
    if norm == 0:
        return 0.0, 0.0
    unit = direction / norm
    return float(col1 @ unit), float(col2 @ unit)


def build_transformed_multimode(p: MultimodeParams, N1: int, Ns_rest: Sequence[int]) -> Operator:
    """
    ボゴリューボフ変換後の b モード基底で多モード模型を構築

    Args:
        p: 多モードパラメータ（全周波数一致・結合比条件を要求）
        N1: 結合モード b₁ のカットオフ
        Ns_rest: 自由モード b₂…b_M のカットオフ

    Returns:
        単一モード非対称ラビ模型 ⊗ 自由モードのハミルトニアン
    """
    if len(Ns_rest) != p.mode_count - 1:
        raise DimensionMismatchError(
            f"自由モードのカットオフ数 {len(Ns_rest)} が M−1 = {p.mode_count - 1} と一致しません"
        )
    omega = common_frequency(p)
    g_b1, g_b2 = collective_couplings(p)
    logger.debug(f"集団結合: g_b1={g_b1}, g_b2={g_b2}")
    basis = _make_basis((N1, *Ns_rest))
    a = mode_ladder(basis, 0)
    matrix = (
        _free_modes(basis, (omega,) * p.mode_count)
        + (a + a.T) @ embed(basis, qubit_block=_coupling_block(g_b1, g_b2))
        + embed(basis, qubit_block=qubit_block(p.delta1, p.delta2, p.eps1, p.eps2))
    )
    return Operator(matrix, basis, hermitian=True)


def qubit_block_spectrum(p: Aqrm2Params) -> np.ndarray:
    """結合 g=0 における量子ビット部分の4固有値（昇順）"""
    return np.linalg.eigvalsh(qubit_block(p.delta1, p.delta2, p.eps1, p.eps2))


def with_coupling(params: ModelParams, g: float) -> ModelParams:
    """テンプレートの結合定数を g 倍したパラメータ（テンプレートは方向比を表す）"""
    if isinstance(params, MultimodeParams):
        return replace(
            params,
            g_col1=tuple(g * v for v in params.g_col1),
            g_col2=tuple(g * v for v in params.g_col2),
        )
    return replace(params, g1=g * params.g1, g2=g * params.g2)


def scaled_to_unit_omega(params: ModelParams) -> ModelParams:
    """全エネルギーを ω で割り ω=1 単位に変換"""
    if isinstance(params, MultimodeParams):
        omega = common_frequency(params)
        return MultimodeParams(
            omegas=(1.0,) * params.mode_count,
            g_col1=tuple(v / omega for v in params.g_col1),
            g_col2=tuple(v / omega for v in params.g_col2),
            delta1=params.delta1 / omega,
            delta2=params.delta2 / omega,
            eps1=params.eps1 / omega,
            eps2=params.eps2 / omega,
        )
    omega = params.omega
    scaled = {f.name: getattr(params, f.name) / omega for f in fields(params) if f.name != "omega"}
    return type(params)(omega=1.0, **scaled)


@dataclass(frozen=True)
class ModelSpec:
    """
    モデル族・テンプレートパラメータ・カットオフの組

    テンプレートの結合定数はスイープ変数 g に対する比として扱う
    """
    family: str
    params: ModelParams
    cutoffs: Tuple[int, ...]
    counter_rotating: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "cutoffs", tuple(int(n) for n in self.cutoffs))
        expected = {
            "aqrm2": Aqrm2Params,
            "jc2": Jc2Params,
            "multimode": MultimodeParams,
            "multimode_transformed": MultimodeParams,
        }
        if self.family not in expected:
            raise PreconditionError(f"未知のモデル族です: {self.family} (使用可能: {', '.join(MODEL_FAMILIES)})")
        if not isinstance(self.params, expected[self.family]):
            raise PreconditionError(
                f"モデル族 {self.family} には {expected[self.family].__name__} が必要です"
            )
        modes = self.params.mode_count if isinstance(self.params, MultimodeParams) else 1
        if len(self.cutoffs) != modes:
            raise DimensionMismatchError(f"カットオフの個数 {len(self.cutoffs)} がモード数 {modes} と一致しません")
        _require_cutoffs(self.cutoffs)

    @property
    def basis(self) -> BasisDescriptor:
        return BasisDescriptor(self.cutoffs)

    @property
    def omega(self) -> float:
        if isinstance(self.params, MultimodeParams):
            return self.params.omegas[0]
        return self.params.omega

    def at(self, g: float) -> ModelParams:
        return with_coupling(self.params, g)

    def with_cutoffs(self, cutoffs: Sequence[int]) -> "ModelSpec":
        return replace(self, cutoffs=tuple(cutoffs))

    def build(self, params: ModelParams) -> Operator:
        if self.family == "aqrm2":
            return build_aqrm2(params, self.cutoffs[0])
        if self.family == "jc2":
            return build_jc2(params, self.cutoffs[0], self.counter_rotating)
        if self.family == "multimode":
            return build_multimode(params, self.cutoffs)
        return build_transformed_multimode(params, self.cutoffs[0], self.cutoffs[1:])

    def hamiltonian(self, g: float) -> Operator:
        """結合 g におけるハミルトニアン"""
        return self.build(self.at(g))
