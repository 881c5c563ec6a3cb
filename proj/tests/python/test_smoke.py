import json

import numpy as np
import pytest

import outlook_map as om

SPEC = {
    "d": 3,
    "components": [
        {"weight": 0.5, "mean": [0.3, 0.0, 0.1], "cov": [[1.0, 0, 0], [0, 0.3, 0], [0, 0, 0.05]]},
        {"weight": 0.5, "mean": [-0.3, 0.2, 0.0], "cov": [[0.8, 0, 0], [0, 0.25, 0], [0, 0, 0.04]]},
    ],
}


def test_rotation_recovers_planar_turn():
    theta = 0.7
    r = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
    d2 = np.array([[1.0, 0.2], [0.3, -0.5]])
    rot, objective = om.match_by_rotation(r @ d2, d2)
    assert objective < 1e-10
    np.testing.assert_allclose(rot, r, atol=1e-10)


def test_utilization_matrix_is_orthonormal():
    cov = np.diag([3.0, 2.0, 1.0])
    dirs, eig = om.utilization_matrix(cov, 2)
    np.testing.assert_allclose(dirs.T @ dirs, np.eye(2), atol=1e-12)
    np.testing.assert_allclose(eig, [3.0, 2.0])


def test_two_outlook_fit_on_identical_data():
    x, y = om.sample_mixture(json.dumps(SPEC), [200, 200], 5)
    mapping = om.fit_two_outlooks(x, y, x, y, 2)
    assert max(mapping.objectives) < 1e-8
    mapped = mapping.apply(x, y)
    assert mapped.shape == x.shape
    restored = om.load_mapping(mapping.to_json())
    np.testing.assert_allclose(restored.apply(x, y), mapped, atol=1e-12)


def test_multi_outlook_objective_is_zero():
    x, y = om.sample_mixture(json.dumps(SPEC), [150, 150], 9)
    rng = np.random.default_rng(0)
    q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    model = om.fit_multi_outlook(["a", "b", "c"], [x, x @ q.T, x[:, :2]], [y, y, y], "a", 2)
    assert model.alignment_objective < 1e-8
    assert model.mapping("b").target_id == "a"


def test_knn_and_balanced_error_rate():
    train = np.array([[0.0], [0.1], [1.0], [1.1]])
    pred = om.knn_classify(train, [1, 1, 2, 2], np.array([[0.05], [1.05]]), 1)
    assert pred == [1, 2]
    ber, per_class, confusion = om.balanced_error_rate([1] * 9 + [2] + [2] * 18 + [1] * 2, [1] * 10 + [2] * 20, 2)
    assert ber == pytest.approx(0.1)
    assert confusion.sum(axis=1).tolist() == [10, 20]


def test_bad_input_raises_value_error():
    with pytest.raises(ValueError):
        om.fit_two_outlooks(np.zeros((4, 2)), [1, 1, 2, 2], np.zeros((4, 2)), [1, 1, 1, 1], 1)
