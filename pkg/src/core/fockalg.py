"""
打ち切りフォック空間 ⊗ 2量子ビット空間上の密行列演算子代数
基底の並び: モード占有数 (n_1, …, n_M) が外側、量子ビット {gg, ge, eg, ee} が内側
"""

import logging
from dataclasses import dataclass
from functools import reduce
from typing import List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.linalg

from src.config.settings import (
    DEFAULT_INTERIOR_MARGIN,
    HERMITIAN_TOL,
    NULLSPACE_TOL,
)
from src.core.errors import (
    BasisMismatchError,
    ContractViolationError,
    DimensionMismatchError,
    InvalidTruncationError,
    PreconditionError,
)

logger = logging.getLogger(__name__)

# 単一量子ビットの基底は (g, e) の順。σ_z|e⟩ = +|e⟩, σ_z|g⟩ = −|g⟩
SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]])
SIGMA_Z = np.array([[-1.0, 0.0], [0.0, 1.0]])
SIGMA_MINUS = np.array([[0.0, 1.0], [0.0, 0.0]])  # |g⟩⟨e|
SIGMA_PLUS = SIGMA_MINUS.T.copy()
IDENTITY_2 = np.eye(2)

QUBIT_LABELS = ("gg", "ge", "eg", "ee")


@dataclass(frozen=True)
class BasisDescriptor:
    """モード打ち切りと量子ビット数で決まるテンソル積基底"""
    mode_truncations: Tuple[int, ...]
    qubit_count: int = 2

    def __post_init__(self):
        truncations = tuple(int(n) for n in self.mode_truncations)
        object.__setattr__(self, "mode_truncations", truncations)
        if any(n < 1 for n in truncations):
            raise InvalidTruncationError(f"カットオフは1以上が必要です: {truncations}")
        if self.qubit_count < 0:
            raise PreconditionError(f"量子ビット数が不正です: {self.qubit_count}")

    @property
    def mode_count(self) -> int:
        return len(self.mode_truncations)

    @property
    def mode_dims(self) -> Tuple[int, ...]:
        return tuple(n + 1 for n in self.mode_truncations)

    @property
    def qubit_dim(self) -> int:
        return 2 ** self.qubit_count

    @property
    def slot_dims(self) -> Tuple[int, ...]:
        """テンソル積の各因子の次元（モード → 量子ビットの順）"""
        return self.mode_dims + (2,) * self.qubit_count

    @property
    def dimension(self) -> int:
        return int(np.prod(self.mode_dims, dtype=np.int64)) * self.qubit_dim

    def index(self, occupations: Sequence[int], qubits: Union[str, int] = 0) -> int:
        """
        占有数と量子ビットラベルから大域インデックスを計算

        Args:
            occupations: 各モードの光子数
            qubits: 'gg' などのラベル、または量子ビットブロック内インデックス

        Returns:
            大域インデックス
        """
        if len(occupations) != self.mode_count:
            raise DimensionMismatchError(
                f"占有数の個数 {len(occupations)} がモード数 {self.mode_count} と一致しません"
            )
        q = QUBIT_LABELS.index(qubits) if isinstance(qubits, str) else int(qubits)
        if not 0 <= q < self.qubit_dim:
            raise DimensionMismatchError(f"量子ビットインデックスが範囲外です: {qubits}")
        flat = 0
        for n, dim in zip(occupations, self.mode_dims):
            if not 0 <= n < dim:
                raise InvalidTruncationError(f"占有数 {n} がカットオフ {dim - 1} を超えています")
            flat = flat * dim + int(n)
        return flat * self.qubit_dim + q

    def occupations(self) -> np.ndarray:
        """大域インデックスごとのモード占有数 (dimension × M)"""
        if self.mode_count == 0:
            return np.zeros((self.dimension, 0), dtype=int)
        grids = np.indices(self.mode_dims).reshape(self.mode_count, -1).T
        return np.repeat(grids, self.qubit_dim, axis=0)

    def qubit_indices(self) -> np.ndarray:
        """大域インデックスごとの量子ビットブロック内インデックス"""
        return np.tile(np.arange(self.qubit_dim), self.dimension // self.qubit_dim)


@dataclass(frozen=True, eq=False)
class Operator:
    """基底記述子つきの密な複素正方行列"""
    matrix: np.ndarray
    basis: BasisDescriptor
    hermitian: bool = False

    def __post_init__(self):
        matrix = np.array(self.matrix, dtype=complex)
        dim = self.basis.dimension
        if matrix.shape != (dim, dim):
            raise DimensionMismatchError(f"行列の形状 {matrix.shape} が基底次元 {dim} と一致しません")
        if self.hermitian:
            deviation = np.max(np.abs(matrix - matrix.conj().T)) if dim else 0.0
            if deviation >= HERMITIAN_TOL:
                raise ContractViolationError(f"エルミート性が破れています: ‖M − M†‖ = {deviation:.3e}")
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)

    @property
    def dimension(self) -> int:
        return self.basis.dimension

    def _require_same_basis(self, other: "Operator"):
        if other.basis != self.basis:
            raise BasisMismatchError(f"基底が一致しません: {self.basis} と {other.basis}")

    def __matmul__(self, other: "Operator") -> "Operator":
        self._require_same_basis(other)
        return Operator(self.matrix @ other.matrix, self.basis)

    def __add__(self, other: "Operator") -> "Operator":
        self._require_same_basis(other)
        return Operator(self.matrix + other.matrix, self.basis, self.hermitian and other.hermitian)

    def __sub__(self, other: "Operator") -> "Operator":
        self._require_same_basis(other)
        return Operator(self.matrix - other.matrix, self.basis, self.hermitian and other.hermitian)

    def scaled(self, factor: complex) -> "Operator":
        real = np.isreal(factor)
        return Operator(self.matrix * factor, self.basis, self.hermitian and bool(real))

    def dagger(self) -> "Operator":
        return Operator(self.matrix.conj().T, self.basis, self.hermitian)

    def apply(self, state: "StateVector") -> np.ndarray:
        if state.basis != self.basis:
            raise BasisMismatchError(f"状態と演算子の基底が一致しません: {state.basis} と {self.basis}")
        return self.matrix @ state.amplitudes


@dataclass(frozen=True, eq=False)
class StateVector:
    """基底記述子と由来ラベルを持つ複素振幅ベクトル"""
    amplitudes: np.ndarray
    basis: BasisDescriptor
    label: str = ""

    def __post_init__(self):
        amplitudes = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if amplitudes.shape[0] != self.basis.dimension:
            raise DimensionMismatchError(
                f"振幅の長さ {amplitudes.shape[0]} が基底次元 {self.basis.dimension} と一致しません"
            )
        amplitudes.setflags(write=False)
        object.__setattr__(self, "amplitudes", amplitudes)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "StateVector":
        norm = self.norm
        if norm == 0.0:
            raise ContractViolationError(f"ゼロベクトルは規格化できません: {self.label}")
        return StateVector(self.amplitudes / norm, self.basis, self.label)

    def overlap(self, other: "StateVector") -> complex:
        """⟨self|other⟩"""
        if other.basis != self.basis:
            raise BasisMismatchError(f"基底が一致しません: {self.basis} と {other.basis}")
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def amplitude(self, occupations: Sequence[int], qubits: Union[str, int]) -> complex:
        return complex(self.amplitudes[self.basis.index(occupations, qubits)])


def _require_cutoff(N: int, minimum: int = 1):
    if int(N) != N or N < minimum:
        raise InvalidTruncationError(f"カットオフ N={N} は {minimum} 以上の整数が必要です")


def annihilation_op(N: int) -> Operator:
    """
    消滅演算子 a を (N+1)×(N+1) 行列として構築

    Args:
        N: 光子数カットオフ（Fock準位 0..N）

    Returns:
        ⟨n−1|a|n⟩ = √n を持つ演算子（エルミートではない）

    Raises:
        InvalidTruncationError: N < 1 の場合
    """
    _require_cutoff(N)
    matrix = np.diag(np.sqrt(np.arange(1, N + 1, dtype=float)), k=1)
    return Operator(matrix, BasisDescriptor((N,), qubit_count=0))


def number_op(N: int) -> Operator:
    """光子数演算子 a†a"""
    _require_cutoff(N)
    return Operator(np.diag(np.arange(N + 1, dtype=float)), BasisDescriptor((N,), qubit_count=0), True)


Factor = Union[None, np.ndarray, Operator]


def _factor_matrix(factor: Factor, dim: int) -> np.ndarray:
    if factor is None:
        return np.eye(dim)
    matrix = factor.matrix if isinstance(factor, Operator) else np.asarray(factor)
    if matrix.shape != (dim, dim):
        raise DimensionMismatchError(f"因子の形状 {matrix.shape} がスロット次元 {dim} と一致しません")
    return matrix


def kron_slots(basis: BasisDescriptor, factors: Sequence[Factor]) -> np.ndarray:
    """スロットごとの因子（None は恒等）のクロネッカー積を行列で返す"""
    dims = basis.slot_dims
    if len(factors) != len(dims):
        raise DimensionMismatchError(f"因子の個数 {len(factors)} がスロット数 {len(dims)} と一致しません")
    matrices = [_factor_matrix(f, d) for f, d in zip(factors, dims)]
    if not matrices:
        return np.eye(1)
    return reduce(np.kron, matrices)


def tensor(factors: Sequence[Factor], basis: BasisDescriptor) -> Operator:
    """
    因子のクロネッカー積を固定の基底順序で構築

    Args:
        factors: モード因子の後に量子ビット因子を並べたリスト（None は恒等演算子）
        basis: 対象の基底記述子

    Returns:
        テンソル積演算子

    Raises:
        DimensionMismatchError: 因子の次元が基底と一致しない場合
    """
    matrix = kron_slots(basis, factors)
    hermitian = all(
        f is None or np.allclose(_factor_matrix(f, d), _factor_matrix(f, d).conj().T, rtol=0.0, atol=0.0)
        for f, d in zip(factors, basis.slot_dims)
    )
    return Operator(matrix, basis, hermitian)


def embed(
    basis: BasisDescriptor,
    modes: Optional[Mapping[int, np.ndarray]] = None,
    qubit_block: Optional[np.ndarray] = None,
) -> np.ndarray:
    """
    モード演算子と量子ビットブロック全体（2^q × 2^q）を大域基底に埋め込む

    Args:
        basis: 対象の基底記述子
        modes: モード番号 → そのモードに作用する行列
        qubit_block: 量子ビット空間全体に作用する行列（None は恒等）

    Returns:
        大域基底上の行列
    """
    modes = modes or {}
    matrices = [_factor_matrix(modes.get(i), d) for i, d in enumerate(basis.mode_dims)]
    matrices.append(_factor_matrix(qubit_block, basis.qubit_dim))
    return reduce(np.kron, matrices)


def mode_ladder(basis: BasisDescriptor, mode: int) -> np.ndarray:
    """指定モードの消滅演算子を大域基底上の行列として返す"""
    a = annihilation_op(basis.mode_truncations[mode]).matrix.real
    return embed(basis, {mode: a})


def qubit_op(basis: BasisDescriptor, qubit: int, single: np.ndarray) -> np.ndarray:
    """第 qubit 番目（0始まり）の量子ビットに作用する 2×2 行列を大域基底へ埋め込む"""
    factors: List[Factor] = [None] * len(basis.slot_dims)
    factors[basis.mode_count + qubit] = single
    return kron_slots(basis, factors)


def basis_state(basis: BasisDescriptor, occupations: Sequence[int], qubits: Union[str, int], label: str = "") -> StateVector:
    """単一の基底ベクトル |n_1…n_M, q⟩"""
    amplitudes = np.zeros(basis.dimension, dtype=complex)
    amplitudes[basis.index(occupations, qubits)] = 1.0
    return StateVector(amplitudes, basis, label or f"|{tuple(occupations)},{qubits}⟩")


def embed_state(psi: StateVector, basis: BasisDescriptor) -> StateVector:
    """
    状態を（より大きい）カットオフの基底へ埋め込む

    Raises:
        BasisMismatchError: モード数・量子ビット数が異なる場合
        InvalidTruncationError: 振幅が新しいカットオフの外にある場合
    """
    source = psi.basis
    if source == basis:
        return psi
    if source.mode_count != basis.mode_count or source.qubit_count != basis.qubit_count:
        raise BasisMismatchError(f"埋め込めない基底です: {source} → {basis}")
    amplitudes = np.zeros(basis.dimension, dtype=complex)
    occupations = source.occupations()
    qubits = source.qubit_indices()
    limits = np.array(basis.mode_truncations)
    for k in np.flatnonzero(psi.amplitudes):
        occ = occupations[k]
        if np.any(occ > limits):
            raise InvalidTruncationError(f"振幅が新しいカットオフの外にあります: 占有数 {tuple(occ)}")
        amplitudes[basis.index(occ, int(qubits[k]))] = psi.amplitudes[k]
    return StateVector(amplitudes, basis, psi.label)


def eig_hermitian(H: Operator) -> Tuple[np.ndarray, np.ndarray]:
    """
    エルミート演算子の固有値分解

    Args:
        H: エルミートフラグ付きの演算子

    Returns:
        (昇順の固有値, 列が正規直交固有ベクトルの行列)

    Raises:
        ContractViolationError: エルミートフラグがない場合
    """
    if not H.hermitian:
        raise ContractViolationError("eig_hermitian にはエルミート演算子が必要です")
    matrix = H.matrix.real if not np.any(H.matrix.imag) else H.matrix
    values, vectors = scipy.linalg.eigh(matrix)
    return values, vectors.astype(complex)


def lowest_eigenvalues(H: Operator, k: int) -> np.ndarray:
    """最低 k 個の固有値のみを計算"""
    if not H.hermitian:
        raise ContractViolationError("lowest_eigenvalues にはエルミート演算子が必要です")
    k = min(int(k), H.dimension)
    matrix = H.matrix.real if not np.any(H.matrix.imag) else H.matrix
    return scipy.linalg.eigh(matrix, eigvals_only=True, subset_by_index=[0, k - 1])


def interior_mask(basis: BasisDescriptor, margin: int) -> np.ndarray:
    """全モードの占有数が N_i − margin 以下の基底状態を True とするマスク"""
    if margin < 0:
        raise PreconditionError(f"マージンは0以上が必要です: {margin}")
    if basis.mode_count and margin >= min(basis.mode_truncations):
        raise PreconditionError(
            f"マージン {margin} が最小カットオフ {min(basis.mode_truncations)} 以上です"
        )
    limits = np.array(basis.mode_truncations) - margin
    return np.all(basis.occupations() <= limits, axis=1)


def commutator_interior_norm(A: Operator, B: Operator, margin: int = DEFAULT_INTERIOR_MARGIN) -> float:
    """
    交換子 [A, B] の内部ブロックにおける最大ノルム

    Args:
        A, B: 同じ基底上の演算子
        margin: 除外する光子数境界層の厚さ

    Returns:
        全モード占有数が N_i − margin 以下の行・列に制限した max|[A,B]|
    """
    if A.basis != B.basis:
        raise BasisMismatchError(f"基底が一致しません: {A.basis} と {B.basis}")
    mask = interior_mask(A.basis, margin)
    commutator = A.matrix @ B.matrix - B.matrix @ A.matrix
    block = commutator[np.ix_(mask, mask)]
    return float(np.max(np.abs(block))) if block.size else 0.0


def nullspace(M: np.ndarray, tol: float = NULLSPACE_TOL) -> List[np.ndarray]:
    """
    特異値分解による零空間の正規直交基底

    Args:
        M: 長方形の複素行列
        tol: 最大特異値に対する相対しきい値

    Returns:
        ‖Mv‖ < tol·‖M‖ を満たす正規直交ベクトルのリスト（なければ空）
    """
    if tol <= 0:
        raise PreconditionError(f"tol は正の値が必要です: {tol}")
    basis = scipy.linalg.null_space(np.asarray(M), rcond=tol)
    logger.debug(f"零空間の次元: {basis.shape[1]} (行列 {np.shape(M)})")
    return [basis[:, k] for k in range(basis.shape[1])]


def expectation(op: Operator, vector: np.ndarray) -> float:
    """⟨v|O|v⟩ の実部"""
    return float(np.real(np.vdot(vector, op.matrix @ vector)))
