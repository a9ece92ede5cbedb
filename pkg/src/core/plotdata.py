"""
プロットデータ出力モジュール
スイープを CSV に、交差・ラベル・ベースラインを JSON サイドカーに書き出す
"""

import csv
import io
import json
import logging
import math
import os
import tempfile
from pathlib import Path
from typing import Any, Iterable, List, Optional, Sequence

import numpy as np

from src.config.settings import CSV_FLOAT_FORMAT, SUPPORTED_OUTPUT_FORMATS
from src.core.errors import PreconditionError
from src.core.spectra import BaselineCurve, CrossingEvent, SweepResult

logger = logging.getLogger(__name__)


def write_atomic(path: Path, text: str) -> Path:
    """
    一時ファイルへ書いてから置き換える

    Args:
        path: 出力先
        text: 書き込む内容

    Returns:
        書き込んだパス
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, temp_name = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        os.replace(temp_name, path)
    except OSError as e:
        logger.error(f"ファイル書き込みエラー: {path}: {e}")
        if os.path.exists(temp_name):
            os.remove(temp_name)
        raise
    return path


def to_jsonable(value: Any) -> Any:
    """numpy の値を JSON 化可能な Python の値へ変換（NaN は null）"""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return None if math.isnan(value) else value
    if hasattr(value, "to_dict"):
        return to_jsonable(value.to_dict())
    return value


def dumps_json(payload: Any) -> str:
    """キー順を固定した JSON 文字列（末尾改行つき）"""
    return json.dumps(to_jsonable(payload), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def _format(value: float) -> str:
    return CSV_FLOAT_FORMAT.format(float(value))


def sweep_columns(result: SweepResult) -> List[str]:
    columns = ["g"] + [f"level_{k + 1}" for k in range(result.keep)]
    if result.dark_overlaps is not None:
        columns += ["dark_level", "dark_index", "dark_overlap"]
    for name in result.labels:
        columns += [f"label_{name}_{k + 1}" for k in range(result.keep)]
    return columns


def sweep_csv(result: SweepResult) -> str:
    """格子点ごとに1行の CSV テキスト（先頭に列の説明コメント）"""
    buffer = io.StringIO()
    buffer.write(f"# model: {result.model.family}, cutoffs: {list(result.cutoffs)}\n")
    if result.sector is not None:
        buffer.write(f"# sector: {result.sector.operator} = {result.sector.value}\n")
    buffer.write("# g: 結合定数 / level_k: 昇順 k 番目の固有値\n")
    if result.dark_overlaps is not None:
        buffer.write("# dark_level: ダーク準位のエネルギー / dark_index: その準位番号 (1始まり) / "
                     "dark_overlap: 縮退クラスターへの射影の重なり\n")
    for name in result.labels:
        buffer.write(f"# label_{name}_k: 準位 k における ⟨{name}⟩\n")

    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(sweep_columns(result))
    dark_indices = result.dark_level_indices() if result.dark_overlaps is not None else None
    cluster = result.dark_cluster_overlaps() if result.dark_overlaps is not None else None
    for i, g in enumerate(result.g_grid):
        row = [_format(g)] + [_format(v) for v in result.levels[i]]
        if dark_indices is not None:
            k = int(dark_indices[i])
            row += [_format(result.dark_levels[i]), str(k + 1), _format(cluster[i])]
        for values in result.labels.values():
            row += [_format(v) for v in values[i]]
        writer.writerow(row)
    return buffer.getvalue()


def sidecar_payload(
    result: SweepResult,
    crossings: Sequence[CrossingEvent] = (),
    baselines: Sequence[BaselineCurve] = (),
    extra: Optional[dict] = None,
) -> dict:
    return {
        "model": result.model.family,
        "cutoffs": list(result.cutoffs),
        "sector": None if result.sector is None else {"operator": result.sector.operator, "value": result.sector.value},
        "grid_points": len(result.g_grid),
        "keep": result.keep,
        "columns": sweep_columns(result),
        "dark_energy": result.dark_energy,
        "labels": list(result.labels),
        "crossings": [c.to_dict() for c in crossings],
        "baselines": [b.to_dict() for b in baselines],
        "extra": extra or {},
    }


def emit_plotdata(
    result: SweepResult,
    crossings: Iterable[CrossingEvent] = (),
    baselines: Iterable[BaselineCurve] = (),
    out_dir: Path = Path("."),
    stem: str = "spectrum",
    formats: Sequence[str] = ("csv", "json"),
    extra: Optional[dict] = None,
) -> List[Path]:
    """
    スイープ結果を CSV と JSON サイドカーへ書き出す

    Args:
        result: スイープ結果
        crossings: 交差イベント
        baselines: ベースライン曲線
        out_dir: 出力ディレクトリ
        stem: ファイル名の共通部分
        formats: 'csv' / 'json' の部分集合
        extra: サイドカーに追加する情報

    Returns:
        書き込んだファイルのパス
    """
    unknown = set(formats) - set(SUPPORTED_OUTPUT_FORMATS)
    if unknown:
        raise PreconditionError(f"未対応の出力形式です: {sorted(unknown)}")
    out_dir = Path(out_dir)
    written = []
    if "csv" in formats:
        written.append(write_atomic(out_dir / f"{stem}.csv", sweep_csv(result)))
    if "json" in formats:
        payload = sidecar_payload(result, list(crossings), list(baselines), extra)
        written.append(write_atomic(out_dir / f"{stem}.json", dumps_json(payload)))
    for path in written:
        logger.info(f"出力: {path}")
    return written
