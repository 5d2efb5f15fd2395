"""
인스턴스/필드/정점 집합의 JSON 직렬화.

모든 JSON 은 결정적 인코더(정렬된 키, 17 유효숫자 실수, ASCII)로 쓰므로
serialize → parse → serialize 가 바이트 단위로 같습니다.
"""
from __future__ import annotations

import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, List, Union

import numpy as np

from mtc.config import DEFAULT_CONFIG, Config
from mtc.domain.hardy import FieldError, TensorWeight
from mtc.domain.poset import NTreeInstance, PosetError, Tree
from mtc.transform.generate import Instance

logger = logging.getLogger(__name__)

INSTANCE_FORMAT = "mtc-instance"
FIELD_FORMAT = "mtc-field"
SET_FORMAT = "mtc-set"
FORMAT_VERSION = 1

PathLike = Union[str, Path]


class InstanceFormatError(Exception):
    """인스턴스 파일 형식 에러"""
    pass


def _format_float(x: float) -> str:
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    text = "%.17g" % x
    # 정수 모양 실수는 int 로 다시 읽히지 않도록 표시
    if all(c in "-0123456789" for c in text):
        text += ".0"
    return text


def _encode(obj: Any, out: List[str]) -> None:
    if obj is None or isinstance(obj, (bool, np.bool_)):
        out.append(json.dumps(None if obj is None else bool(obj)))
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(_format_float(float(obj)))
    elif isinstance(obj, str):
        out.append(json.dumps(obj, ensure_ascii=True))
    elif isinstance(obj, dict):
        out.append("{")
        for i, key in enumerate(sorted(obj, key=str)):
            if i:
                out.append(",")
            out.append(json.dumps(str(key), ensure_ascii=True))
            out.append(":")
            _encode(obj[key], out)
        out.append("}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        items = obj.tolist() if isinstance(obj, np.ndarray) else obj
        out.append("[")
        for i, item in enumerate(items):
            if i:
                out.append(",")
            _encode(item, out)
        out.append("]")
    else:
        raise InstanceFormatError(f"JSON 으로 쓸 수 없는 값입니다: {type(obj).__name__}")


def canonical_dumps(obj: Any) -> str:
    """
    결정적 JSON 문자열.

    NaN/Infinity 는 표준 json 모듈과 같은 토큰으로 씁니다.
    """
    out: List[str] = []
    _encode(obj, out)
    return "".join(out) + "\n"


def canonical_loads(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise InstanceFormatError(f"JSON 파싱 실패: {e}") from e


def _check_header(doc: Any, expected: str) -> Dict[str, Any]:
    if not isinstance(doc, dict):
        raise InstanceFormatError("최상위 JSON 값은 객체여야 합니다.")
    if doc.get("format") != expected:
        raise InstanceFormatError(f"format 이 {expected!r} 가 아닙니다: {doc.get('format')!r}")
    if doc.get("version") != FORMAT_VERSION:
        raise InstanceFormatError(f"지원하지 않는 버전입니다: {doc.get('version')!r}")
    return doc


# --- 인스턴스 --------------------------------------------------------------------


def instance_to_dict(inst: Instance) -> Dict[str, Any]:
    return {
        "format": INSTANCE_FORMAT,
        "version": FORMAT_VERSION,
        "trees": [tr.parents_list() for tr in inst.t.trees],
        "weight": [fac for fac in inst.weight.factors],
        "mu": np.asarray(inst.mu, dtype=np.float64).ravel(),
        "meta": dict(inst.meta),
    }


def serialize_instance(inst: Instance) -> str:
    return canonical_dumps(instance_to_dict(inst))


def parse_instance(text: str, config: Config = DEFAULT_CONFIG) -> Instance:
    """
    인스턴스 JSON 을 파싱합니다.

    Raises:
        InstanceFormatError: 형식/모양 오류
        BudgetExceededError: 곱 트리 크기 초과
    """
    doc = _check_header(canonical_loads(text), INSTANCE_FORMAT)
    try:
        trees = [Tree.from_parents(parents) for parents in doc["trees"]]
        t = NTreeInstance.of(trees, config)
        weight = TensorWeight(tuple(np.asarray(fac, dtype=np.float64) for fac in doc["weight"]))
        weight.check(t)
        mu = np.asarray(doc["mu"], dtype=np.float64)
    except KeyError as e:
        raise InstanceFormatError(f"필수 키가 없습니다: {e}") from e
    except (PosetError, FieldError, TypeError, ValueError) as e:
        raise InstanceFormatError(f"인스턴스 구성 실패: {e}") from e
    if mu.size != t.size:
        raise InstanceFormatError(f"mu 길이 {mu.size} 가 곱 트리 크기 {t.size} 와 다릅니다.")
    if np.any(mu < 0):
        raise InstanceFormatError("mu 에 음수 질량이 있습니다.")
    return Instance(t=t, weight=weight, mu=mu.reshape(t.shape), meta=dict(doc.get("meta", {})))


def save_instance(inst: Instance, path: PathLike) -> Path:
    path = Path(path)
    path.write_text(serialize_instance(inst), encoding="ascii")
    logger.info(f"인스턴스 저장: {path} (shape={inst.t.shape})")
    return path


def load_instance(path: PathLike, config: Config = DEFAULT_CONFIG) -> Instance:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise InstanceFormatError(f"인스턴스 파일을 읽을 수 없습니다: {path}: {e}") from e
    return parse_instance(text, config)


# --- 필드와 정점 집합 ----------------------------------------------------------------


def serialize_field(values: np.ndarray) -> str:
    arr = np.asarray(values, dtype=np.float64)
    return canonical_dumps({
        "format": FIELD_FORMAT,
        "version": FORMAT_VERSION,
        "shape": list(arr.shape),
        "values": arr.ravel(),
    })


def parse_field(text: str, t: NTreeInstance | None = None) -> np.ndarray:
    doc = _check_header(canonical_loads(text), FIELD_FORMAT)
    try:
        shape = tuple(int(m) for m in doc["shape"])
        arr = np.asarray(doc["values"], dtype=np.float64).reshape(shape)
    except KeyError as e:
        raise InstanceFormatError(f"필수 키가 없습니다: {e}") from e
    except (TypeError, ValueError) as e:
        raise InstanceFormatError(f"필드 모양 오류: {e}") from e
    if t is not None and arr.shape[-t.n:] != t.shape:
        raise InstanceFormatError(f"필드 모양 {arr.shape} 이 곱 트리 {t.shape} 과 맞지 않습니다.")
    return arr


def save_field(values: np.ndarray, path: PathLike) -> Path:
    path = Path(path)
    path.write_text(serialize_field(values), encoding="ascii")
    return path


def load_field(path: PathLike, t: NTreeInstance | None = None) -> np.ndarray:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise InstanceFormatError(f"필드 파일을 읽을 수 없습니다: {path}: {e}") from e
    return parse_field(text, t)


def serialize_vertex_set(t: NTreeInstance, mask: np.ndarray) -> str:
    coords = [list(t.coords(int(i))) for i in np.flatnonzero(np.asarray(mask, dtype=bool).ravel())]
    return canonical_dumps({"format": SET_FORMAT, "version": FORMAT_VERSION, "vertices": coords})


def parse_vertex_set(text: str, t: NTreeInstance) -> np.ndarray:
    """정점 좌표 목록을 t.shape 모양의 bool 마스크로 읽습니다."""
    doc = _check_header(canonical_loads(text), SET_FORMAT)
    mask = np.zeros(t.shape, dtype=bool)
    for v in doc.get("vertices", []):
        coords = tuple(int(c) for c in v)
        if len(coords) != t.n or any(not 0 <= c < m for c, m in zip(coords, t.shape)):
            raise InstanceFormatError(f"정점 좌표가 범위를 벗어났습니다: {v}")
        mask[coords] = True
    return mask


def load_vertex_set(path: PathLike, t: NTreeInstance) -> np.ndarray:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise InstanceFormatError(f"집합 파일을 읽을 수 없습니다: {path}: {e}") from e
    return parse_vertex_set(text, t)

