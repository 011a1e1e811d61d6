import math

import numpy as np
import pytest

from arnids.errors import ShapeError
from arnids.numeric import (
    init_uniform,
    make_rng,
    matmul,
    sigmoid,
    softmax,
    stack_rows,
    tanh_act,
)


def test_matmul_identity():
    eye = np.eye(2)
    v = np.array([[3.0], [4.0]])
    assert np.array_equal(matmul(eye, v), v)


def test_matmul_zero():
    a = np.array([[1.0, 2.0], [3.0, 4.0]])
    z = np.zeros((2, 1))
    assert np.array_equal(matmul(a, z), z)


def test_matmul_hand_computed():
    # [[1,2],[3,4]] @ [[5],[6]] worked out by hand: rows dot the column.
    a = np.array([[1.0, 2.0], [3.0, 4.0]])
    b = np.array([[5.0], [6.0]])
    assert np.array_equal(matmul(a, b), np.array([[17.0], [39.0]]))


def test_matmul_shape_error_names_both_shapes():
    with pytest.raises(ShapeError, match=r"\(2, 3\).*\(2, 2\)"):
        matmul(np.zeros((2, 3)), np.zeros((2, 2)))


def test_matmul_associativity_random_triples():
    rng = make_rng(7)
    for _ in range(20):
        a, b, c = (rng.standard_normal((4, 4)) for _ in range(3))
        left = matmul(matmul(a, b), c)
        right = matmul(a, matmul(b, c))
        assert np.allclose(left, right, rtol=1e-9)


def test_sigmoid_symmetry_point():
    assert sigmoid(np.array([0.0]))[0] == 0.5


def test_sigmoid_saturation():
    assert sigmoid(np.array([1000.0]))[0] == pytest.approx(1.0, abs=1e-12)
    assert sigmoid(np.array([-1000.0]))[0] == pytest.approx(0.0, abs=1e-12)


def test_sigmoid_at_one():
    # 1 / (1 + e^-1) evaluated independently.
    expected = 1.0 / (1.0 + math.exp(-1.0))
    assert sigmoid(np.array([1.0]))[0] == pytest.approx(0.7310585786, abs=1e-10)
    assert sigmoid(np.array([1.0]))[0] == pytest.approx(expected, rel=1e-15)


def test_sigmoid_open_range():
    # Strictly inside (0, 1) wherever float64 can represent it (|x| < ~36).
    rng = make_rng(3)
    x = rng.uniform(-30, 30, size=1000)
    y = sigmoid(x)
    assert np.all(y > 0.0) and np.all(y < 1.0)


def test_tanh_zero_and_one():
    assert tanh_act(np.array([0.0]))[0] == 0.0
    assert tanh_act(np.array([1.0]))[0] == pytest.approx(0.7615941560, abs=1e-10)


def test_tanh_odd_symmetry():
    rng = make_rng(5)
    x = rng.uniform(-5, 5, size=200)
    assert np.array_equal(tanh_act(-x), -tanh_act(x))


def test_tanh_open_range():
    # Strictly inside (-1, 1) wherever float64 can represent it (|x| < ~19).
    rng = make_rng(4)
    x = rng.uniform(-15, 15, size=1000)
    y = tanh_act(x)
    assert np.all(y > -1.0) and np.all(y < 1.0)


def test_softmax_equal_scores():
    assert np.allclose(softmax(np.array([0.0, 0.0])), [0.5, 0.5], atol=1e-15)


def test_softmax_log_ratio():
    # softmax([ln 2, 0]) = [2, 1] / 3 analytically.
    out = softmax(np.array([math.log(2.0), 0.0]))
    assert np.allclose(out, [2.0 / 3.0, 1.0 / 3.0], atol=1e-15)


def test_softmax_uniform():
    assert np.allclose(softmax(np.array([5.0] * 4)), [0.25] * 4, atol=1e-15)


def test_softmax_sums_to_one_large_inputs():
    # Entries far below the max underflow to exactly 0 in float64, so only
    # nonnegativity is guaranteed at this range; the sum still lands on 1.
    rng = make_rng(11)
    for _ in range(50):
        scores = rng.uniform(-700, 700, size=int(rng.integers(1, 10_000)))
        out = softmax(scores)
        assert np.all(out >= 0.0)
        assert abs(out.sum() - 1.0) <= 1e-12


def test_softmax_strictly_positive_moderate_inputs():
    rng = make_rng(12)
    for _ in range(50):
        scores = rng.uniform(-30, 30, size=int(rng.integers(1, 100)))
        out = softmax(scores)
        assert np.all(out > 0.0)
        assert abs(out.sum() - 1.0) <= 1e-12


def test_stack_rows():
    out = stack_rows(np.array([1.0, 2.0]), np.array([3.0, 4.0]))
    assert np.array_equal(out, np.array([[1.0, 2.0], [3.0, 4.0]]))


def test_stack_rows_zeros():
    out = stack_rows(np.zeros(2), np.zeros(2))
    assert out.shape == (2, 2) and not out.any()


def test_stack_rows_round_trip():
    a = np.array([1.5, -2.5, 3.0])
    b = np.array([0.0, 9.0, -1.0])
    stacked = stack_rows(a, b)
    assert np.array_equal(stacked[0], a) and np.array_equal(stacked[1], b)


def test_stack_rows_length_mismatch():
    with pytest.raises(ShapeError):
        stack_rows(np.zeros(2), np.zeros(3))


def test_init_uniform_zero_scale():
    out = init_uniform(make_rng(0), (3, 3), 0.0)
    assert not out.any()


def test_init_uniform_determinism():
    a = init_uniform(make_rng(123), (4, 5), 0.5)
    b = init_uniform(make_rng(123), (4, 5), 0.5)
    assert np.array_equal(a, b)
    assert np.all(np.abs(a) <= 0.5)


def test_init_uniform_golden_seed_42():
    # Frozen once from make_rng(42); guards the generator choice (PCG64) and
    # the draw order across platforms and versions.
    out = init_uniform(make_rng(42), (2, 2), 1.0)
    golden = np.array(
        [
            [0.5479120971119267, -0.12224312049589536],
            [0.7171958398227649, 0.3947360581187278],
        ]
    )
    assert np.allclose(out, golden, atol=1e-15)


def test_operations_stay_finite():
    rng = make_rng(9)
    x = rng.uniform(-1e3, 1e3, size=(50,))
    for out in (sigmoid(x), tanh_act(x), softmax(x)):
        assert np.all(np.isfinite(out))
