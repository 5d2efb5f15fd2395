import math

import numpy as np
import pytest

from mtc.config import BudgetExceededError, Config
from mtc.io.instances import (
    InstanceFormatError,
    canonical_dumps,
    canonical_loads,
    load_field,
    load_instance,
    load_vertex_set,
    parse_field,
    parse_instance,
    parse_vertex_set,
    save_field,
    save_instance,
    serialize_field,
    serialize_instance,
    serialize_vertex_set,
)
from mtc.transform.generate import canonical_instance, generate_instance


def test_canonical_dumps_is_deterministic():
    assert canonical_dumps({"b": 1, "a": [0.1, 2.0, None, True]}) == '{"a":[0.10000000000000001,2.0,null,true],"b":1}\n'
    assert canonical_loads(canonical_dumps({"x": 1.0}))["x"] == 1.0
    assert isinstance(canonical_loads(canonical_dumps(3.0)), float)


def test_canonical_dumps_nonfinite():
    text = canonical_dumps([float("nan"), float("inf"), -float("inf")])
    assert text == "[NaN,Infinity,-Infinity]\n"
    values = canonical_loads(text)
    assert math.isnan(values[0]) and values[1] == math.inf and values[2] == -math.inf


def test_canonical_dumps_rejects_objects():
    with pytest.raises(InstanceFormatError):
        canonical_dumps({"x": object()})


@pytest.mark.parametrize(
    "n, depth, weight_spec, measure_spec",
    [
        (1, 3, "tensor-random", "leaf-random(3)"),
        (2, 2, "from-s(1,0.5)", "leaf-sparse(2)"),
        (3, 1, "uniform", "uniform-leaf"),
    ],
)
def test_instance_roundtrip_is_byte_identical(n, depth, weight_spec, measure_spec):
    inst = generate_instance(n, depth, weight_spec=weight_spec, measure_spec=measure_spec, seed=7)
    text = serialize_instance(inst)
    parsed = parse_instance(text)
    assert serialize_instance(parsed) == text
    np.testing.assert_array_equal(parsed.mu, inst.mu)
    assert parsed.meta == inst.meta


def test_instance_file_roundtrip(tmp_path):
    inst = canonical_instance()
    path = save_instance(inst, tmp_path / "canonical.json")
    loaded = load_instance(path)
    assert loaded.t.shape == (3, 3)
    assert loaded.mu[1, 1] == 1.0
    assert path.read_text(encoding="ascii") == serialize_instance(loaded)


def test_parse_instance_errors():
    good = canonical_dumps({
        "format": "mtc-instance",
        "version": 1,
        "trees": [[None, 0, 0]],
        "weight": [[1.0, 1.0, 1.0]],
        "mu": [0.0, 1.0, 0.0],
    })
    assert parse_instance(good).t.shape == (3,)

    with pytest.raises(InstanceFormatError):
        parse_instance("{not json")
    with pytest.raises(InstanceFormatError):
        parse_instance(good.replace("mtc-instance", "mtc-field"))
    with pytest.raises(InstanceFormatError):
        parse_instance(good.replace('"version":1', '"version":9'))
    # mu 길이 불일치
    with pytest.raises(InstanceFormatError):
        parse_instance(good.replace("[0.0,1.0,0.0]", "[0.0,1.0]"))
    # 음수 질량
    with pytest.raises(InstanceFormatError):
        parse_instance(good.replace("[0.0,1.0,0.0]", "[0.0,-1.0,0.0]"))
    # 가중치 모양 불일치
    with pytest.raises(InstanceFormatError):
        parse_instance(good.replace("[1.0,1.0,1.0]", "[1.0,1.0]"))
    # 루트가 없는 부모 배열
    with pytest.raises(InstanceFormatError):
        parse_instance(good.replace("[null,0,0]", "[1,0,0]"))
    with pytest.raises(InstanceFormatError):
        parse_instance(good.replace('"mu"', '"nu"'))


def test_parse_instance_respects_budget():
    text = serialize_instance(generate_instance(2, 2))
    with pytest.raises(BudgetExceededError):
        parse_instance(text, Config(budget_vertices=10))


def test_load_instance_missing_file(tmp_path):
    with pytest.raises(InstanceFormatError):
        load_instance(tmp_path / "missing.json")


def test_field_roundtrip(tmp_path, b2b2):
    values = np.arange(9, dtype=float).reshape(3, 3) / 7.0
    text = serialize_field(values)
    assert serialize_field(parse_field(text, b2b2)) == text
    path = save_field(values, tmp_path / "f.json")
    np.testing.assert_array_equal(load_field(path, b2b2), values)


def test_field_batch_axes_and_shape_check(b2, b2b2):
    batch = np.ones((4, 3, 3))
    assert parse_field(serialize_field(batch), b2b2).shape == (4, 3, 3)
    with pytest.raises(InstanceFormatError):
        parse_field(serialize_field(np.ones(4)), b2)
    with pytest.raises(InstanceFormatError):
        parse_field(canonical_dumps({"format": "mtc-field", "version": 1, "shape": [2, 2], "values": [1.0]}))


def test_vertex_set_roundtrip(tmp_path, b2b2):
    mask = np.zeros(b2b2.shape, dtype=bool)
    mask[0, 0] = mask[1, 2] = True
    text = serialize_vertex_set(b2b2, mask)
    assert canonical_loads(text)["vertices"] == [[0, 0], [1, 2]]
    np.testing.assert_array_equal(parse_vertex_set(text, b2b2), mask)
    path = tmp_path / "set.json"
    path.write_text(text, encoding="ascii")
    np.testing.assert_array_equal(load_vertex_set(path, b2b2), mask)


def test_vertex_set_out_of_range(b2b2):
    text = canonical_dumps({"format": "mtc-set", "version": 1, "vertices": [[0, 3]]})
    with pytest.raises(InstanceFormatError):
        parse_vertex_set(text, b2b2)
    text = canonical_dumps({"format": "mtc-set", "version": 1, "vertices": [[0]]})
    with pytest.raises(InstanceFormatError):
        parse_vertex_set(text, b2b2)
