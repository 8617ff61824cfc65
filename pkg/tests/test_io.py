import json

import numpy as np
import numpy.testing as npt
import pytest

from slq.core import ProblemSpec, SigmaFunction
from slq.io import (
    dataset_from_dict,
    dataset_to_dict,
    decode_matrix,
    dumps,
    encode_matrix,
    problem_from_dict,
    problem_to_dict,
    read_json,
    sigma_from_dict,
    sigma_to_dict,
    write_json,
)


def test_matrix_codec_lossless():
    rng = np.random.default_rng(3)
    a = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    a[0, 0] = 0.1 + 0.2j  # not exactly representable, needs all 17 digits
    npt.assert_array_equal(decode_matrix(json.loads(dumps(encode_matrix(a)))), a)


def test_dumps_is_deterministic_and_sorted():
    obj = {"b": [1.0, 2.5e-17], "a": {"y": True, "x": None}, "c": "text"}
    text = dumps(obj)
    assert text == dumps(obj)
    assert text.index('"a"') < text.index('"b"') < text.index('"c"')
    assert json.loads(text) == {"b": [1.0, 2.5e-17],
                                "a": {"y": True, "x": None}, "c": "text"}


def test_dumps_rejects_non_finite():
    with pytest.raises(ValueError):
        dumps({"bad": float("nan")})
    with pytest.raises(ValueError):
        dumps([float("inf")])


def test_write_read_roundtrip(tmp_path):
    path = tmp_path / "out.json"
    payload = {"values": [0.1, 1.0 / 3.0, -2.0 ** -52]}
    write_json(str(path), payload)
    assert read_json(str(path)) == payload
    first = path.read_bytes()
    write_json(str(path), payload)
    assert path.read_bytes() == first


@pytest.mark.parametrize("sigma", [
    SigmaFunction.zero(2),
    SigmaFunction.constant(np.array([[0.3, 0.1j], [-0.1j, 0.2]])),
    SigmaFunction.trig([np.array([[0.2, 0.1], [0.1, -0.1]]),
                        np.array([[0.0, 0.1j], [0.05, 0.0]])]),
    SigmaFunction.grid(np.linspace(0, np.pi, 9),
                       np.array([t * np.eye(2) for t in np.linspace(0, 1, 9)])),
])
def test_sigma_roundtrip(sigma):
    back = sigma_from_dict(json.loads(dumps(sigma_to_dict(sigma))))
    assert back.kind == sigma.kind
    for t in (0.0, 0.7, 2.2, np.pi):
        npt.assert_allclose(back(t), sigma(t), atol=1e-15)


def test_problem_roundtrip():
    spec = ProblemSpec(m=2, T1=np.diag([1.0, 0.0]), T2=np.eye(2),
                       H2=np.diag([0.3, 0.0]),
                       sigma=SigmaFunction.constant(0.2 * np.eye(2)))
    back = problem_from_dict(json.loads(dumps(problem_to_dict(spec))))
    assert back.m == 2
    npt.assert_array_equal(back.T1, spec.T1)
    npt.assert_array_equal(back.H2, spec.H2)
    npt.assert_allclose(back.sigma(1.3), spec.sigma(1.3), atol=0)


def test_dataset_roundtrip(dirichlet2_data):
    back = dataset_from_dict(json.loads(dumps(dataset_to_dict(dirichlet2_data))))
    assert back.m == dirichlet2_data.m
    assert back.shift == dirichlet2_data.shift
    assert len(back.entries) == len(dirichlet2_data.entries)
    for a, b in zip(back.entries, dirichlet2_data.entries):
        assert (a.n, a.k, a.multiplicity) == (b.n, b.k, b.multiplicity)
        assert a.lam == b.lam
        npt.assert_array_equal(a.alpha, b.alpha)
        npt.assert_array_equal(a.alpha_prime, b.alpha_prime)
