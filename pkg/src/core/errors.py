"""
例外クラス定義
入力不正（ValueError系）と数値的な契約違反を区別する
"""


class RabiDarkLabError(Exception):
    """本パッケージの基底例外"""


class PreconditionError(RabiDarkLabError, ValueError):
    """パラメータが演算の前提条件を満たさない"""


class InvalidTruncationError(PreconditionError):
    """光子数カットオフが不正"""


class DimensionOverflowError(InvalidTruncationError):
    """密行列の次元が上限を超える"""


class DimensionMismatchError(PreconditionError):
    """テンソル積の因子次元が基底と一致しない"""


class BasisMismatchError(PreconditionError):
    """異なる基底上の演算子・状態を組み合わせた"""


class NoDarkBiasError(PreconditionError):
    """ダーク状態を許す実数のバイアス ε が存在しない"""


class SingularDenominatorError(PreconditionError):
    """閉形式振幅の分母がゼロになる"""


class ContractViolationError(RabiDarkLabError):
    """演算の事後条件・不変条件が破れている"""


class DarkStateNotRegisteredError(RabiDarkLabError):
    """スイープにダーク状態が登録されていない"""


class ConfigError(RabiDarkLabError):
    """実行設定ファイルの解析・検証エラー"""


class NumericalTaskError(RabiDarkLabError):
    """数値タスクの実行に失敗した"""
