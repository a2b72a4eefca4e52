import numpy as np
import pytest

from marketpower.nn import Adam, Mlp, Sgd, backward, forward, make_optimizer
from oracles import central_differences, mlp_forward, relative_error


def test_zero_network_outputs_zero():
    net = Mlp.create((6, 16, 16, 1), zero=True)
    assert np.array_equal(forward(net, np.arange(6.0)), np.zeros(1))


def test_identity_layer():
    net = Mlp((3, 3), [np.eye(3)], [np.zeros(3)], "relu", "identity")
    x = np.array([1.5, -2.0, 0.25])
    assert np.array_equal(forward(net, x), x)


@pytest.mark.parametrize("hidden,output", [("relu", "identity"), ("tanh", "tanh")])
def test_forward_matches_explicit_sums(hidden, output):
    rng = np.random.default_rng(1)
    net = Mlp.create((6, 16, 16, 1), rng, hidden, output)
    x = rng.normal(size=6)
    expected = mlp_forward([w.tolist() for w in net.weights], [b.tolist() for b in net.biases],
                           x.tolist(), hidden, output)
    assert np.allclose(forward(net, x), expected, rtol=1e-12, atol=1e-14)


def test_batched_forward_equals_rowwise():
    rng = np.random.default_rng(2)
    net = Mlp.create((4, 8, 2), rng)
    xs = rng.normal(size=(5, 4))
    assert np.allclose(forward(net, xs), np.stack([forward(net, x) for x in xs]))


@pytest.mark.parametrize("hidden,output", [("relu", "identity"), ("tanh", "tanh"), ("relu", "tanh")])
def test_backward_matches_finite_differences(hidden, output):
    rng = np.random.default_rng(3)
    for _ in range(5):
        net = Mlp.create((5, 7, 6, 3), rng, hidden, output)
        x = rng.normal(size=(4, 5))
        up = rng.normal(size=(4, 3))
        grads, gx = backward(net, x, up)
        fd = central_differences(lambda: float(np.sum(up * net.forward(x))), net.params)
        assert relative_error(grads, fd) < 1e-6
        fdx = central_differences(lambda: float(np.sum(up * net.forward(x))), [x])
        assert relative_error([gx], fdx) < 1e-6


def test_zero_upstream_gives_zero_gradients():
    rng = np.random.default_rng(4)
    net = Mlp.create((3, 5, 2), rng)
    grads, gx = backward(net, rng.normal(size=3), np.zeros(2))
    assert all(not g.any() for g in grads) and not gx.any()


def test_linear_layer_weight_gradient_is_the_input():
    rng = np.random.default_rng(5)
    net = Mlp.create((4, 3), rng)
    x = rng.normal(size=4)
    for j in range(3):
        up = np.zeros(3)
        up[j] = 1.0
        grads, _ = backward(net, x, up)
        expected = np.zeros((4, 3))
        expected[:, j] = x
        assert np.array_equal(grads[0], expected)


def test_shape_checks():
    with pytest.raises(ValueError):
        Mlp((3, 2), [np.zeros((2, 3))], [np.zeros(2)])
    net = Mlp.create((3, 2), zero=True)
    with pytest.raises(ValueError):
        net.forward(np.zeros(4))
    with pytest.raises(ValueError):
        Mlp.create((3, 2), zero=True, hidden_activation="sigmoid")


def test_sgd_step():
    p = [np.array([1.0, 2.0])]
    Sgd(0.1).step(p, [np.array([10.0, -10.0])])
    assert np.allclose(p[0], [0.0, 3.0])


def test_adam_first_step_moves_by_lr():
    p = [np.array([1.0, -1.0])]
    Adam(0.01).step(p, [np.array([3.0, -0.5])])
    assert np.allclose(p[0], [0.99, -0.99], atol=1e-8)


def test_adam_minimises_a_quadratic():
    p = [np.array([5.0])]
    opt = make_optimizer("adam", 0.1)
    for _ in range(500):
        opt.step(p, [2 * (p[0] - 1.5)])
    assert p[0][0] == pytest.approx(1.5, abs=1e-3)


def test_unknown_optimizer():
    with pytest.raises(ValueError):
        make_optimizer("rmsprop", 0.1)
