import logging
from pathlib import Path
from typing import Dict, Union

import pandas as pd

from mtc.harness.report import ExperimentReport
from mtc.io.reports import report_frames

logger = logging.getLogger(__name__)

# Excel 시트 이름 길이 제한
SHEET_NAME_MAX = 31


class ExcelExportError(Exception):
    """Excel 내보내기 에러"""
    pass


def _sheet_names(frames: Dict[str, pd.DataFrame]) -> Dict[str, str]:
    names: Dict[str, str] = {}
    used = set()
    for key in frames:
        base = "".join(c if c not in "[]:*?/\\" else "_" for c in key)[:SHEET_NAME_MAX] or "sheet"
        name, k = base, 1
        while name.lower() in used:
            suffix = f"~{k}"
            name = base[: SHEET_NAME_MAX - len(suffix)] + suffix
            k += 1
        used.add(name.lower())
        names[key] = name
    return names


def export_report_xlsx(report: ExperimentReport, path: Union[str, Path]) -> Path:
    """
    보고서 표를 Excel 통합 문서로 내보냅니다 (표 하나당 시트 하나).

    Args:
        report: 실험 보고서
        path: 저장할 .xlsx 경로

    Returns:
        저장된 경로

    Raises:
        ExcelExportError: 저장 실패 시
    """
    path = Path(path)
    frames = report_frames(report)
    try:
        with pd.ExcelWriter(path, engine="openpyxl") as writer:
            for key, sheet in _sheet_names(frames).items():
                frames[key].to_excel(writer, sheet_name=sheet, index=False)
    except Exception as e:
        raise ExcelExportError(f"Excel 파일 저장 중 오류가 발생했습니다: {str(e)}") from e
    logger.info(f"Excel 저장: {path} ({len(frames)} 시트)")
    return path


def load_report_sheets(path: Union[str, Path]) -> Dict[str, pd.DataFrame]:
    """
    내보낸 통합 문서를 시트별 DataFrame 으로 다시 읽습니다.

    Raises:
        ExcelExportError: 파일 읽기 실패 시
    """
    try:
        sheets = pd.read_excel(path, sheet_name=None, engine="openpyxl")
    except Exception as e:
        raise ExcelExportError(f"Excel 파일 로딩 중 오류가 발생했습니다: {str(e)}") from e
    if not sheets:
        raise ExcelExportError("Excel 파일에 시트가 없습니다.")
    return sheets
