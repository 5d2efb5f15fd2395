import math
from typing import Tuple

import numpy as np
from scipy import stats

REL_TOL = 1e-9
ABS_FLOOR = 1e-12


def slack(*terms: float, rel: float = REL_TOL, floor: float = ABS_FLOOR) -> float:
    """양변의 크기에 비례하는 허용 오차를 계산합니다."""
    scale = max((abs(float(t)) for t in terms), default=0.0)
    return rel * scale + floor


def leq(lhs: float, rhs: float, rel: float = REL_TOL, floor: float = ABS_FLOOR) -> bool:
    """lhs ≤ rhs 를 허용 오차와 함께 판정합니다."""
    return float(lhs) <= float(rhs) + slack(lhs, rhs, rel=rel, floor=floor)


def close(a: float, b: float, rel: float = REL_TOL, floor: float = ABS_FLOOR) -> bool:
    return abs(float(a) - float(b)) <= slack(a, b, rel=rel, floor=floor)


def field_leq(lhs: np.ndarray, rhs: np.ndarray, rel: float = REL_TOL, floor: float = ABS_FLOOR) -> np.ndarray:
    """점별 lhs ≤ rhs 마스크 (각 점의 양변 크기 기준 허용 오차)."""
    tol = rel * np.maximum(np.abs(lhs), np.abs(rhs)) + floor
    return lhs <= rhs + tol


def safe_ratio(num: float, den: float) -> float:
    """
    비율을 계산합니다. 0/0 은 nan (건너뜀), x/0 은 +inf 입니다.
    """
    num = float(num)
    den = float(den)
    if den == 0.0:
        return math.nan if num == 0.0 else math.inf
    return num / den


def wilson_interval(successes: int, trials: int, confidence: float = 0.95) -> Tuple[float, float]:
    """이항 비율의 Wilson 신뢰구간을 반환합니다."""
    if trials <= 0:
        return (math.nan, math.nan)
    ci = stats.binomtest(int(successes), int(trials)).proportion_ci(
        confidence_level=confidence, method="wilson"
    )
    return (float(ci.low), float(ci.high))


def nanmax(values, default: float = 0.0) -> float:
    """nan 을 무시한 최댓값 (값이 없으면 default)."""
    arr = np.asarray(list(values), dtype=float)
    arr = arr[~np.isnan(arr)]
    return float(arr.max()) if arr.size else default


def nanmin(values, default: float = math.nan) -> float:
    arr = np.asarray(list(values), dtype=float)
    arr = arr[~np.isnan(arr)]
    return float(arr.min()) if arr.size else default
