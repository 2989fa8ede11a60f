import math

import numpy as np
import pytest

import archtext.autodiff as ad
from archtext.autodiff import (
    AdamState,
    NonFiniteError,
    Tensor,
    adam_step,
    finite_diff,
    zero_grads,
)


def rel_err(analytic: np.ndarray, numeric: np.ndarray) -> float:
    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), 1e-4)
    return float((np.abs(analytic - numeric) / denom).max())


def check_grad(build, params: list[Tensor], tol: float = 1e-4) -> None:
    """Analytic gradients of build() vs the central-difference oracle."""
    zero_grads({str(i): p for i, p in enumerate(params)})
    loss = build()
    loss.backward()
    numeric = finite_diff(lambda: build().item(), params)
    for p, num in zip(params, numeric):
        analytic = p.grad if p.grad is not None else np.zeros_like(p.data)
        assert rel_err(analytic, num) <= tol


def _param(rng, *shape) -> Tensor:
    return Tensor(rng.standard_normal(shape), requires_grad=True)


class TestClosedForms:
    def test_square(self):
        x = Tensor(3.0, requires_grad=True)
        y = x * x
        y.backward()
        assert x.grad == pytest.approx(6.0)

    def test_product(self):
        x = Tensor(2.0, requires_grad=True)
        y = Tensor(5.0, requires_grad=True)
        (x * y).backward()
        assert x.grad == pytest.approx(5.0)
        assert y.grad == pytest.approx(2.0)

    def test_log_softmax_nll_grad_is_p_minus_onehot(self):
        rng = np.random.default_rng(0)
        logits = Tensor(rng.standard_normal((1, 5)), requires_grad=True)
        onehot = np.zeros((1, 5))
        onehot[0, 2] = 1.0
        loss = -ad.sum_(ad.log_softmax(logits) * Tensor(onehot))
        loss.backward()
        probs = np.exp(ad.log_softmax(Tensor(logits.data)).data)
        np.testing.assert_allclose(logits.grad, probs - onehot, atol=1e-12)


class TestOpGradients:
    """Randomized gradient checks, ten shapes per op."""

    def _shapes(self):
        rng = np.random.default_rng(7)
        for i in range(10):
            n = int(rng.integers(1, 5))
            m = int(rng.integers(1, 5))
            yield np.random.default_rng(i), n, m

    def test_add_sub_mul_div_broadcast(self):
        for rng, n, m in self._shapes():
            a = _param(rng, n, m)
            b = _param(rng, 1, m)
            c = Tensor(rng.standard_normal((n, m)) + 3.0, requires_grad=True)
            check_grad(lambda: ad.sum_((a + b) * a - b / c), [a, b, c])

    def test_matmul_transpose(self):
        for rng, n, m in self._shapes():
            a = _param(rng, n, m)
            b = _param(rng, m, n)
            check_grad(lambda: ad.sum_(a @ b @ ad.transpose(a @ b)), [a, b])

    def test_reductions(self):
        for rng, n, m in self._shapes():
            a = _param(rng, n, m)
            check_grad(lambda: ad.sum_(ad.mean(a, axis=0, keepdims=True) * a)
                       + ad.mean(a), [a])

    def test_leaky_relu_sigmoid_sqrt(self):
        for rng, n, m in self._shapes():
            a = _param(rng, n, m)
            pos = Tensor(np.abs(rng.standard_normal((n, m))) + 0.5, requires_grad=True)
            check_grad(lambda: ad.sum_(ad.leaky_relu(a, 0.2) * ad.sigmoid(a))
                       + ad.sum_(ad.sqrt(pos)), [a, pos])

    def test_clamp_min(self):
        rng = np.random.default_rng(3)
        a = Tensor(rng.standard_normal(6) + 2.0, requires_grad=True)  # away from the kink
        check_grad(lambda: ad.sum_(ad.clamp_min(a, 0.5)), [a])
        below = Tensor(np.full(3, -1.0), requires_grad=True)
        loss = ad.sum_(ad.clamp_min(below, 0.5))
        loss.backward()
        np.testing.assert_array_equal(below.grad, np.zeros(3))

    def test_masked_softmax(self):
        for rng, n, m in self._shapes():
            cols = m + 1  # at least two columns so a mask can vary
            a = _param(rng, n, cols)
            mask = rng.random((n, cols)) > 0.3
            mask[:, 0] = True
            w = Tensor(rng.standard_normal((n, cols)))
            check_grad(lambda: ad.sum_(ad.softmax_masked(a, mask) * w), [a])

    def test_log_softmax(self):
        for rng, n, m in self._shapes():
            a = _param(rng, n, m)
            w = Tensor(np.abs(rng.standard_normal((n, m))))
            check_grad(lambda: ad.sum_(ad.log_softmax(a) * w), [a])

    def test_gather_rows(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            table = _param(rng, 6, 4)
            ids = rng.integers(0, 6, size=5)
            w = Tensor(rng.standard_normal((5, 4)))
            check_grad(lambda: ad.sum_(ad.gather_rows(table, ids) * w), [table])

    def test_slice_concat(self):
        for rng, n, m in self._shapes():
            a = _param(rng, n, 2 * m)
            check_grad(lambda: ad.sum_(ad.concat(
                [ad.slice_cols(a, 0, m), ad.slice_cols(a, m, 2 * m)], axis=1) * a), [a])

    def test_layer_norm(self):
        for rng, n, m in self._shapes():
            cols = m + 1
            x = _param(rng, n, cols)
            scale = Tensor(rng.standard_normal((1, cols)), requires_grad=True)
            bias = Tensor(rng.standard_normal((1, cols)), requires_grad=True)
            w = Tensor(rng.standard_normal((n, cols)))
            check_grad(lambda: ad.sum_(ad.layer_norm(x, scale, bias) * w),
                       [x, scale, bias])

    def test_bce_with_logits(self):
        rng = np.random.default_rng(9)
        logits = _param(rng, 2, 5)
        targets = rng.random((2, 5))
        check_grad(lambda: ad.sum_(ad.bce_with_logits(logits, targets)), [logits])


class TestMaskedSoftmaxSemantics:
    def test_symmetric_pair(self):
        p = ad.softmax_masked(Tensor([[1.7, 1.7]]), np.array([[True, True]]))
        np.testing.assert_allclose(p.data, [[0.5, 0.5]])

    def test_single_unmasked_entry(self):
        p = ad.softmax_masked(Tensor([[5.0, -2.0, 0.1]]),
                              np.array([[False, True, False]]))
        np.testing.assert_allclose(p.data, [[0.0, 1.0, 0.0]])

    def test_masked_positions_exactly_zero(self):
        rng = np.random.default_rng(0)
        logits = Tensor(rng.standard_normal((4, 6)) * 30)
        mask = rng.random((4, 6)) > 0.4
        mask[:, 2] = True
        p = ad.softmax_masked(logits, mask)
        assert (p.data[~mask] == 0.0).all()
        np.testing.assert_allclose(p.data.sum(axis=-1), 1.0)

    def test_all_masked_row_rejected(self):
        with pytest.raises(ValueError, match="masked"):
            ad.softmax_masked(Tensor([[1.0, 2.0]]), np.array([[False, False]]))


class TestLayerNormSemantics:
    def test_constant_vector_maps_to_zero(self):
        x = Tensor(np.full((2, 5), 3.7))
        scale = Tensor(np.ones((1, 5)))
        bias = Tensor(np.zeros((1, 5)))
        out = ad.layer_norm(x, scale, bias)
        np.testing.assert_allclose(out.data, 0.0, atol=1e-12)


class TestFiniteness:
    def test_nan_construction_rejected(self):
        with pytest.raises(NonFiniteError):
            Tensor([1.0, float("nan")])

    def test_overflow_detected(self):
        big = Tensor(np.full(3, 1e308))
        with np.errstate(over="ignore"), pytest.raises(NonFiniteError):
            big * big


class TestBackwardShape:
    def test_nonscalar_backward_rejected(self):
        a = Tensor(np.ones((2, 2)), requires_grad=True)
        with pytest.raises(ValueError, match="scalar"):
            (a * a).backward()

    def test_grad_accumulates_for_repeated_use(self):
        x = Tensor(3.0, requires_grad=True)
        (x * x + x * x).backward()
        assert x.grad == pytest.approx(12.0)


class TestAdam:
    def test_first_step_is_lr_times_sign(self):
        p = {"w": Tensor(np.array([1.0, -2.0]), requires_grad=True)}
        state = AdamState(lr=0.1)
        adam_step(p, {"w": np.array([0.3, -0.7])}, state)
        np.testing.assert_allclose(p["w"].data, [1.0 - 0.1, -2.0 + 0.1], atol=1e-6)
        assert state.t == 1

    def test_zero_grads_leave_params_unchanged(self):
        p = {"w": Tensor(np.array([1.0, 2.0]), requires_grad=True)}
        state = AdamState(lr=0.1)
        adam_step(p, {"w": np.zeros(2)}, state)
        np.testing.assert_array_equal(p["w"].data, [1.0, 2.0])
        assert state.t == 1

    def test_two_step_replay_is_deterministic(self):
        def run():
            p = {"w": Tensor(np.array([0.5, -0.5]), requires_grad=True)}
            state = AdamState(lr=0.05)
            adam_step(p, {"w": np.array([1.0, 2.0])}, state)
            adam_step(p, {"w": np.array([-0.5, 0.25])}, state)
            return p["w"].data.copy(), state.t
        (w1, t1), (w2, t2) = run(), run()
        np.testing.assert_array_equal(w1, w2)
        assert t1 == t2 == 2

    def test_nonfinite_grad_rejected(self):
        p = {"w": Tensor(np.array([1.0]), requires_grad=True)}
        with pytest.raises(NonFiniteError):
            adam_step(p, {"w": np.array([float("inf")])}, AdamState())


class TestFiniteDiffOracle:
    def test_quadratic(self):
        x = Tensor(np.array([3.0]), requires_grad=True)
        grads = finite_diff(lambda: float((x.data ** 2).sum()), [x])
        assert grads[0][0] == pytest.approx(6.0, rel=1e-6)

    def test_restores_parameters(self):
        x = Tensor(np.array([1.0, 2.0]), requires_grad=True)
        before = x.data.copy()
        finite_diff(lambda: float(x.data.sum() ** 2), [x])
        np.testing.assert_array_equal(x.data, before)


def test_sigmoid_extreme_values_stable():
    out = ad.sigmoid(Tensor([-800.0, 0.0, 800.0]))
    np.testing.assert_allclose(out.data, [0.0, 0.5, 1.0], atol=1e-12)


def test_repeated_softmax_rows_match_math():
    logits = Tensor([[math.log(1.0), math.log(3.0)]])
    p = ad.softmax_masked(logits, np.array([[True, True]]))
    np.testing.assert_allclose(p.data, [[0.25, 0.75]])
