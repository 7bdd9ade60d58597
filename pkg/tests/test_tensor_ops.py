import math

import numpy as np
import pytest
from helpers import numeric_grad, rel_err

from amanda import nn
from amanda.nn import Tensor, backward


def t(data, grad=True):
    return Tensor(np.array(data, dtype=np.float64), requires_grad=grad)


class TestForwardValues:
    def test_softmax_uniform_on_equal_inputs(self):
        out = nn.softmax(t([[0.0, 0.0, 0.0]]))
        np.testing.assert_allclose(out.data, [[1 / 3, 1 / 3, 1 / 3]], atol=1e-12)

    def test_softmax_matches_direct_scalar_computation(self):
        out = nn.softmax(t([[1.0, 2.0, 3.0]]))
        z = math.exp(1) + math.exp(2) + math.exp(3)
        expected = [math.exp(1) / z, math.exp(2) / z, math.exp(3) / z]
        np.testing.assert_allclose(out.data[0], expected, rtol=1e-12)
        assert out.data[0, 2] == pytest.approx(math.exp(3) / z)

    def test_matmul_identity(self):
        rng = np.random.default_rng(1)
        a = rng.normal(size=(4, 4))
        out = nn.matmul(Tensor(a), Tensor(np.eye(4)))
        np.testing.assert_allclose(out.data, a)

    def test_matmul_shape_error_names_op(self):
        with pytest.raises(nn.ShapeError, match="matmul"):
            nn.matmul(t(np.ones((2, 3))), t(np.ones((4, 2))))

    def test_concat_and_slice_round_trip(self):
        a, b = t(np.arange(6.0).reshape(2, 3)), t(np.arange(9.0).reshape(3, 3))
        cat = nn.concat([a, b], axis=0)
        assert cat.shape == (5, 3)
        back_a = nn.slice_axis(cat, 0, 0, 2)
        np.testing.assert_allclose(back_a.data, a.data)

    def test_relu_clamps_negatives(self):
        out = nn.relu(t([[-2.0, 0.0, 3.0]]))
        np.testing.assert_allclose(out.data, [[0.0, 0.0, 3.0]])

    def test_mse_scalar_value(self):
        # mean of squared differences: ((1-0)^2 + (3-1)^2) / 2 = 2.5
        val = nn.mse(t([1.0, 3.0]), t([0.0, 1.0])).item()
        assert val == pytest.approx(2.5)

    def test_softmax_rows_sum_to_one_for_random_inputs(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            x = rng.normal(scale=5.0, size=(3, 6))
            out = nn.softmax(Tensor(x), axis=1).data
            assert np.all(out > 0)
            np.testing.assert_allclose(out.sum(axis=1), 1.0, atol=1e-6)


class TestBackwardValues:
    def test_sum_gradient_is_ones(self):
        w = t(np.random.default_rng(2).normal(size=(3, 4)))
        backward(nn.sum_(w))
        np.testing.assert_allclose(w.grad, np.ones((3, 4)))

    def test_mse_hand_gradient(self):
        # d/dw mean((w - 0)^2) at w=[3] is 2*3 = 6
        w = t([3.0])
        backward(nn.mse(w, Tensor([0.0])))
        np.testing.assert_allclose(w.grad, [6.0])

    def test_repeated_backward_accumulates(self):
        w = t([1.0, 2.0])
        loss = nn.sum_(w)
        backward(loss)
        backward(loss)
        np.testing.assert_allclose(w.grad, [2.0, 2.0])

    def test_backward_rejects_nonscalar(self):
        w = t([[1.0, 2.0]])
        with pytest.raises(nn.ShapeError):
            backward(nn.tanh(w))

    def test_composite_tanh_matmul_graph_matches_finite_differences(self):
        rng = np.random.default_rng(3)
        w1 = rng.normal(size=(4, 5))
        w2 = rng.normal(size=(5, 2))
        x = rng.normal(size=(3, 4))

        def f(w1_, w2_, x_):
            return float(np.mean(np.tanh(np.tanh(x_ @ w1_) @ w2_) ** 2))

        tw1, tw2, tx = t(w1), t(w2), t(x)
        loss = nn.mse(nn.tanh(nn.matmul(nn.tanh(nn.matmul(tx, tw1)), tw2)), Tensor(np.zeros((3, 2))))
        backward(loss)
        for i, tt in enumerate([tw1, tw2, tx]):
            num = numeric_grad(f, [w1, w2, x], i, h=1e-4)
            assert rel_err(tt.grad, num) < 1e-4


OPS = {
    "add": (2, lambda a, b: nn.add(a, b)),
    "sub": (2, lambda a, b: nn.sub(a, b)),
    "mul": (2, lambda a, b: nn.mul(a, b)),
    "matmul": (2, lambda a, b: nn.matmul(a, b)),
    "tanh": (1, lambda a: nn.tanh(a)),
    "sigmoid": (1, lambda a: nn.sigmoid(a)),
    "relu": (1, lambda a: nn.relu(a)),
    "softmax": (1, lambda a: nn.softmax(a, axis=-1)),
    "mean": (1, lambda a: nn.mean_(a)),
    "sum": (1, lambda a: nn.sum_(a, axis=0)),
    "concat": (2, lambda a, b: nn.concat([a, b], axis=1)),
    "slice": (1, lambda a: nn.slice_axis(a, 1, 1, 3)),
    "reshape": (1, lambda a: nn.reshape(a, (a.size,))),
    "neg": (1, lambda a: nn.neg(a)),
    "scale": (1, lambda a: nn.scale(a, 1.7)),
}


@pytest.mark.parametrize("name", sorted(OPS))
def test_op_gradient_matches_finite_differences(name):
    """Property: analytic gradients agree with central differences on
    random small tensors (relu inputs kept away from the kink)."""
    nargs, op = OPS[name]
    rng = np.random.default_rng(hash(name) % 2**32)
    for trial in range(5):
        shape = (2, 4) if name != "matmul" else (3, 4)
        arrays = []
        for k in range(nargs):
            a = rng.uniform(-2.0, 2.0, size=(4, 2) if (name == "matmul" and k == 1) else shape)
            if name == "relu":
                a = np.where(np.abs(a) < 0.05, 0.3, a)
            arrays.append(a)

        def f(*args):
            out = op(*[Tensor(x) for x in args])
            return float(np.sum(out.data * weights))

        tensors = [t(a) for a in arrays]
        out = op(*tensors)
        weights = np.arange(1.0, out.size + 1).reshape(out.shape)  # generic cotangent
        backward(nn.sum_(nn.mul(out, Tensor(weights))))
        for i, tt in enumerate(tensors):
            num = numeric_grad(f, arrays, i)
            assert rel_err(tt.grad, num) < 1e-4, f"{name} arg{i} trial{trial}"


def test_softmax_cross_entropy_gradient_and_value():
    rng = np.random.default_rng(11)
    x = rng.normal(size=(5, 4))
    labels = rng.integers(0, 4, size=5)

    def f(x_):
        shifted = x_ - x_.max(axis=1, keepdims=True)
        lse = np.log(np.exp(shifted).sum(axis=1)) + x_.max(axis=1)
        return float(np.mean(lse - x_[np.arange(5), labels]))

    tx = t(x)
    loss = nn.softmax_cross_entropy(tx, labels)
    assert loss.item() == pytest.approx(f(x))
    backward(loss)
    assert rel_err(tx.grad, numeric_grad(lambda a: f(a), [x], 0)) < 1e-4


def test_bce_with_logits_gradient_and_value():
    rng = np.random.default_rng(12)
    x = rng.normal(scale=3.0, size=(6,))
    targets = rng.integers(0, 2, size=6).astype(float)

    def f(x_):
        p = 1 / (1 + np.exp(-x_))
        return float(np.mean(-(targets * np.log(p) + (1 - targets) * np.log(1 - p))))

    tx = t(x)
    loss = nn.bce_with_logits(tx, Tensor(targets))
    assert loss.item() == pytest.approx(f(x), rel=1e-10)
    backward(loss)
    assert rel_err(tx.grad, numeric_grad(f, [x], 0)) < 1e-4


def test_gather_rows_gradient_accumulates_duplicates():
    table = t(np.arange(12.0).reshape(4, 3))
    out = nn.gather_rows(table, [1, 1, 3])
    backward(nn.sum_(out))
    expected = np.zeros((4, 3))
    expected[1] = 2.0
    expected[3] = 1.0
    np.testing.assert_allclose(table.grad, expected)


def test_gru_gates_gradient_matches_finite_differences():
    rng = np.random.default_rng(13)
    d, B = 3, 2
    gx = rng.normal(size=(B, 3 * d))
    gh = rng.normal(size=(B, 3 * d))
    b = rng.normal(size=3 * d)
    hp = rng.normal(size=(B, d))
    weights = np.arange(1.0, B * d + 1).reshape(B, d)

    def f(gx_, gh_, b_, hp_):
        z = 1 / (1 + np.exp(-(gx_[:, :d] + gh_[:, :d] + b_[:d])))
        r = 1 / (1 + np.exp(-(gx_[:, d : 2 * d] + gh_[:, d : 2 * d] + b_[d : 2 * d])))
        n = np.tanh(gx_[:, 2 * d :] + r * gh_[:, 2 * d :] + b_[2 * d :])
        h = (1 - z) * n + z * hp_
        return float(np.sum(h * weights))

    arrays = [gx, gh, b, hp]
    tensors = [t(a) for a in arrays]
    h = nn.gru_gates(*tensors)
    assert f(gx, gh, b, hp) == pytest.approx(float(np.sum(h.data * weights)))
    backward(nn.sum_(nn.mul(h, Tensor(weights))))
    for i, tt in enumerate(tensors):
        assert rel_err(tt.grad, numeric_grad(f, arrays, i)) < 1e-4, f"gru arg{i}"


def test_broadcast_add_bias_gradient():
    rng = np.random.default_rng(14)
    x = rng.normal(size=(5, 3))
    b = rng.normal(size=(3,))

    def f(x_, b_):
        return float(np.sum((x_ + b_) ** 2))

    tx, tb = t(x), t(b)
    out = nn.add(tx, tb)
    backward(nn.sum_(nn.mul(out, out)))
    assert rel_err(tb.grad, numeric_grad(f, [x, b], 1)) < 1e-4


def test_constant_inputs_record_no_graph():
    a = Tensor(np.ones((2, 2)))
    out = nn.tanh(nn.matmul(a, a))
    assert not out.requires_grad
    assert out._parents == ()
