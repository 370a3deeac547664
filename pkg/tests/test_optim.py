"""Tests for Adam and the tensor archive."""

import numpy as np
import pytest

from simast_review.errors import ConfigError, MissingGradientError, ReviewDataError
from simast_review.nn.checkpoint import MAGIC, load_archive, save_archive
from simast_review.nn.optim import AdamState, adam_step
from simast_review.nn.tensor import Tensor


def param(value):
    return Tensor(value, requires_grad=True)


class TestAdam:
    """Single and repeated Adam updates."""

    def test_first_step_moves_by_learning_rate(self):
        """Bias correction makes the first step about ``lr`` against the gradient sign."""
        weight = param(0.0)
        params = {"w": weight}
        state = AdamState.for_params(params, learning_rate=1e-3)
        weight.grad = np.array(1.0)
        adam_step(params, state)
        assert weight.data == pytest.approx(-1e-3, rel=1e-4)
        assert state.step == 1

    def test_zero_gradient_is_a_fixed_point(self):
        weight = param([1.0, -2.0])
        params = {"w": weight}
        state = AdamState.for_params(params)
        for _ in range(3):
            weight.grad = np.zeros(2)
            adam_step(params, state)
        np.testing.assert_array_equal(weight.data, [1.0, -2.0])

    def test_gradients_are_reset(self):
        weight = param([1.0])
        params = {"w": weight}
        state = AdamState.for_params(params)
        weight.grad = np.array([0.5])
        adam_step(params, state)
        np.testing.assert_array_equal(weight.grad, [0.0])

    def test_missing_gradient(self):
        params = {"w": param([1.0]), "v": param([2.0])}
        params["w"].grad = np.array([1.0])
        with pytest.raises(MissingGradientError, match="v"):
            adam_step(params, AdamState.for_params(params))

    def test_identical_runs(self):
        def run() -> np.ndarray:
            rng = np.random.default_rng(9)
            weight = param(rng.normal(size=(3, 2)))
            params = {"w": weight}
            state = AdamState.for_params(params, learning_rate=0.01)
            for _ in range(5):
                weight.grad = 2 * weight.data
                adam_step(params, state)
            return weight.data

        np.testing.assert_array_equal(run(), run())

    def test_minimizes_a_quadratic(self):
        weight = param([3.0, -4.0])
        params = {"w": weight}
        state = AdamState.for_params(params, learning_rate=0.1)
        for _ in range(300):
            weight.grad = 2 * weight.data
            adam_step(params, state)
        assert np.abs(weight.data).max() < 0.05

    @pytest.mark.parametrize(
        "settings",
        [{"learning_rate": 0.0}, {"beta1": 1.0}, {"beta2": -0.1}, {"epsilon": 0.0}],
    )
    def test_invalid_hyperparameters(self, settings):
        with pytest.raises(ConfigError):
            AdamState(**settings)


class TestArchive:
    """Named-tensor checkpoint files."""

    def test_save_and_load(self, tmp_path):
        path = tmp_path / "model.ckpt"
        tensors = {"gru_fwd_w": np.arange(6.0).reshape(2, 3), "cls_b": np.array([0.5, -0.5])}
        save_archive(path, tensors, {"config": {"variant": "full"}})
        loaded, metadata = load_archive(path)
        assert metadata == {"config": {"variant": "full"}}
        assert list(loaded) == ["gru_fwd_w", "cls_b"]
        np.testing.assert_array_equal(loaded["gru_fwd_w"], tensors["gru_fwd_w"])
        assert path.read_bytes().startswith(MAGIC)

    def test_truncated_file(self, tmp_path):
        path = tmp_path / "model.ckpt"
        save_archive(path, {"w": np.ones((4, 4))})
        path.write_bytes(path.read_bytes()[:-10])
        with pytest.raises(ReviewDataError):
            load_archive(path)

    def test_wrong_magic(self, tmp_path):
        path = tmp_path / "model.ckpt"
        path.write_bytes(b"NOTACKPT" + b"\x00" * 16)
        with pytest.raises(ReviewDataError):
            load_archive(path)
