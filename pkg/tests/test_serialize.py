import json

import numpy as np
import pytest

from matrange import serialize
from matrange.choi import MembershipVerdict, choi_identity, membership
from matrange.core import HermTuple, NormTestTuple, random_hermitian, random_isometry
from matrange.errors import SchemaError
from matrange.essential import BlockRepetitionModel
from matrange.simplex import Simplex


def test_matrix_roundtrip_square_and_rect():
    rng = np.random.default_rng(0)
    a = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    obj = serialize.matrix_to_json(a)
    assert obj["dim"] == 3
    back = serialize.matrix_from_json(json.loads(json.dumps(obj)))
    assert np.array_equal(back, a)
    x = random_isometry(4, 2, rng)
    obj = serialize.matrix_to_json(x)
    assert obj["rows"] == 4 and obj["cols"] == 2
    assert np.array_equal(serialize.matrix_from_json(obj), x)


def test_matrix_schema_errors():
    with pytest.raises(SchemaError):
        serialize.matrix_from_json({"re": [[1.0]]})
    with pytest.raises(SchemaError):
        serialize.matrix_from_json({"re": [[1.0]], "im": [[0.0, 1.0]]})
    with pytest.raises(SchemaError):
        serialize.matrix_from_json({"dim": 2, "re": [[1.0]], "im": [[0.0]]})
    with pytest.raises(SchemaError):
        serialize.matrix_from_json({"re": [["x"]], "im": [[0.0]]})


def test_tuple_roundtrip():
    rng = np.random.default_rng(1)
    t = HermTuple([random_hermitian(3, rng) for _ in range(2)])
    back = serialize.herm_tuple_from_json(json.loads(json.dumps(serialize.tuple_to_json(t))))
    assert np.array_equal(back.mats, t.mats)
    r = NormTestTuple(rng.normal(size=(3, 2, 2)) + 1j * rng.normal(size=(3, 2, 2)))
    back = serialize.norm_tuple_from_json(json.loads(json.dumps(serialize.tuple_to_json(r))))
    assert np.array_equal(back.mats, r.mats)


def test_model_roundtrip():
    rng = np.random.default_rng(2)
    model = BlockRepetitionModel(
        HermTuple([random_hermitian(2, rng)] * 2),
        HermTuple([random_hermitian(3, rng) for _ in range(2)]),
        4,
    )
    back = serialize.model_from_json(json.loads(json.dumps(serialize.model_to_json(model))))
    assert back.level == 4
    assert np.array_equal(back.body.mats, model.body.mats)
    with pytest.raises(SchemaError):
        serialize.model_from_json({"head": [], "body": []})


def test_simplex_roundtrip():
    s = Simplex([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    back = serialize.simplex_from_json(json.loads(json.dumps(serialize.simplex_to_json(s))))
    assert np.array_equal(back.vertices, s.vertices)
    with pytest.raises(SchemaError):
        serialize.simplex_from_json({"vertices": [[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]})


def test_verdict_roundtrip_member_and_witness():
    a = HermTuple([np.diag([1.0, -1.0])])
    v = membership(HermTuple([np.diag([0.5, -0.5])]), a, seed=1)
    obj = json.loads(json.dumps(serialize.verdict_to_json(v)))
    back = serialize.verdict_from_json(obj)
    assert back.status == "member"
    assert np.allclose(back.certificate.j, v.certificate.j)
    v2 = membership(HermTuple([1.5]), a, seed=1)
    back2 = serialize.verdict_from_json(json.loads(json.dumps(serialize.verdict_to_json(v2))))
    assert back2.status == "not_member"
    assert np.array_equal(back2.witness.mats, v2.witness.mats)


def test_dumps_deterministic():
    v = MembershipVerdict("member", 1e-9, certificate=choi_identity(2))
    s1 = serialize.dumps(serialize.verdict_to_json(v))
    s2 = serialize.dumps(serialize.verdict_to_json(v))
    assert s1 == s2
    assert s1.endswith("\n")
