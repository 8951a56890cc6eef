import json

import numpy as np
import pytest

from anamorph.errors import SchemaViolation
from anamorph.qops import PermSpec, QotpKey
from anamorph.scheme import AnamorphicKey
from anamorph.serialize import (
    dumps,
    format_float,
    key_to_json,
    matrix_to_json,
    read_json,
    roundtrip_state,
    validate,
    write_json,
)
from anamorph.states import random_density


def test_float_format():
    assert format_float(1.0) == "1.0"
    assert float(format_float(0.1)) == 0.1
    with pytest.raises(ValueError):
        format_float(float("nan"))


def test_matrix_byte_round_trip(tmp_path):
    m = random_density(4, np.random.default_rng(0))
    p = tmp_path / "m.json"
    first = write_json(p, matrix_to_json(m))
    back = read_json(p, "matrix")
    assert np.array_equal(back, m)
    assert write_json(tmp_path / "m2.json", matrix_to_json(back)) == first
    assert roundtrip_state(p, "matrix")


def test_key_round_trip(tmp_path):
    key = AnamorphicKey(1, 1, QotpKey.from_bitstring("10"), QotpKey.from_bitstring("01"), PermSpec.from_lehmer(5, 4), 8)
    p = tmp_path / "k.json"
    write_json(p, key_to_json(key))
    assert read_json(p, "key") == key


def test_truncated_and_missing(tmp_path):
    p = tmp_path / "m.json"
    text = dumps(matrix_to_json(np.eye(2) / 2))
    p.write_text(text[: len(text) // 2])
    with pytest.raises(SchemaViolation):
        read_json(p, "matrix")
    with pytest.raises(SchemaViolation):
        read_json(tmp_path / "absent.json", "matrix")


def test_pointer_reported():
    doc = key_to_json(AnamorphicKey(1, 1, QotpKey.zero(1), QotpKey.zero(1), PermSpec.identity(4), 4))
    doc["eta"] = "four"
    with pytest.raises(SchemaViolation) as err:
        validate(doc, "key")
    assert "eta" in str(err.value.pointer)
    assert json.loads(dumps(doc))["eta"] == "four"
