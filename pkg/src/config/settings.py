"""
アプリケーション設定
数値許容誤差・既定値・出力先ディレクトリを一元管理する
"""

from pathlib import Path

# プロジェクトルートの設定
PROJECT_ROOT = Path(__file__).parent.parent.parent
OUTPUT_DIR = PROJECT_ROOT / "output"
LOGS_DIR = PROJECT_ROOT / "logs"
CONFIGS_DIR = PROJECT_ROOT / "configs"

# 物理パラメータの既定値（エネルギー単位は ω）
DEFAULT_OMEGA = 1.0
DEFAULT_CUTOFF = 40
DEFAULT_MULTIMODE_CUTOFFS = (12, 12)
MIN_CUTOFF = 2

# 数値許容誤差
HERMITIAN_TOL = 1e-14
RESIDUAL_TOL = 1e-10
PARAM_TOL = 1e-10
NULLSPACE_TOL = 1e-10
RATIO_TOL = 1e-12
ORTHOGONALITY_TOL = 1e-12
COMMUTES_TOL = 1e-10
CONVERGENCE_TOL = 1e-8

# 準位交差の判定
CROSSING_TOL = 1e-8
BISECTION_TOL = 1e-10
ROOT_XTOL = 1e-14
AVOIDED_GAP = 1e-6
CLASSIFY_OFFSET = 1e-5
GAP_SCAN_THRESHOLD = 0.05
# ラベル期待値で部分空間の準位を選ぶときの許容誤差
LABEL_TOL = 1e-6

# 交換子チェックの内部領域マージン（光子数の境界層を除外）
DEFAULT_INTERIOR_MARGIN = 2

# スイープの既定値
DEFAULT_G_MIN = 0.0
DEFAULT_G_MAX = 1.0
DEFAULT_GRID_POINTS = 101
DEFAULT_KEEP = 12

# 密行列の次元上限
DIMENSION_WARNING = 4000
DIMENSION_LIMIT = 20000

# 並列実行
THREADS_ENV_VAR = "RABIDARKLAB_THREADS"
# 環境変数の解釈はコマンドライン側 (resolve_threads) で行う
DEFAULT_THREADS = 1

# 出力形式
CSV_FLOAT_FORMAT = "{:.17g}"
SUPPORTED_OUTPUT_FORMATS = ['csv', 'json']
MANIFEST_NAME = "manifest.json"

# ログ設定
LOG_LEVEL = "INFO"
LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
LOG_FILE_NAME = "rabidarklab.log"
