import numpy as np
import pytest

from celltide import lstm
from celltide.linalg import ShapeError
from celltide.modelio import ModelFormatError
from oracles import lstm_forward_scalar, max_relative_error, numeric_gradients


def zero_params(hidden=1):
    hd = hidden + 1
    return lstm.LstmParams(
        *(np.zeros((hidden, hd)) for _ in range(4)),
        b_f=np.zeros(hidden), b_i=np.zeros(hidden),
        b_c=np.zeros(hidden), b_o=np.zeros(hidden),
        W_y=np.zeros((1, hidden)), b_y=np.zeros(1))


class TestInit:
    def test_deterministic(self):
        a = lstm.init_params(6, seed=42)
        b = lstm.init_params(6, seed=42)
        for k in lstm.WEIGHT_KEYS:
            assert np.array_equal(getattr(a, k), getattr(b, k))

    def test_glorot_range(self):
        p = lstm.init_params(8, seed=1)
        limit = np.sqrt(6.0 / ((8 + 1) + 8))
        for k in ("W_f", "W_i", "W_c", "W_o"):
            assert np.max(np.abs(getattr(p, k))) <= limit
        assert np.max(np.abs(p.W_y)) <= np.sqrt(6.0 / (8 + 1))

    def test_bias_initialization(self):
        p = lstm.init_params(5, seed=0)
        assert np.array_equal(p.b_f, np.ones(5))
        for k in ("b_i", "b_c", "b_o", "b_y"):
            assert not np.any(getattr(p, k))


class TestCellForward:
    def test_zero_everything(self):
        p = zero_params(3)
        state, _ = lstm.cell_forward(np.array([0.7]), lstm.LstmState(np.zeros(3), np.zeros(3)), p)
        assert np.array_equal(state.a, np.zeros(3))
        assert np.array_equal(state.c, np.zeros(3))

    def test_zero_params_nonzero_cell_state(self):
        # gates sit at 0.5, so c = 0.5*1 and a = 0.5*tanh(0.5)
        p = zero_params(1)
        state, _ = lstm.cell_forward(np.array([0.3]),
                                     lstm.LstmState(np.zeros(1), np.ones(1)), p)
        assert state.c[0] == pytest.approx(0.5, abs=1e-15)
        assert state.a[0] == pytest.approx(0.23105857863000487, abs=1e-15)

    def test_matches_scalar_oracle_single_step(self):
        rng = np.random.default_rng(7)
        for _ in range(10):
            h = int(rng.integers(1, 5))
            p = lstm.init_params(h, seed=int(rng.integers(1 << 30)))
            x = rng.uniform(-1, 1, 1)
            state, _ = lstm.cell_forward(x, lstm.LstmState(np.zeros(h), np.zeros(h)), p)
            y_vec, _ = lstm.forward(x, p)
            assert y_vec == pytest.approx(lstm_forward_scalar(x, p), abs=1e-12)

    def test_shape_mismatch(self):
        p = zero_params(2)
        with pytest.raises(ShapeError):
            lstm.cell_forward(np.array([0.1]), lstm.LstmState(np.zeros(3), np.zeros(3)), p)

    def test_gate_and_state_ranges(self):
        rng = np.random.default_rng(8)
        p = lstm.init_params(4, seed=3)
        window = rng.uniform(0, 1, 10)
        _, caches = lstm.forward(window, p)
        for step in caches["steps"]:
            for gate in ("g_f", "g_i", "g_o"):
                assert np.all((step[gate] > 0) & (step[gate] < 1))
            assert np.all((step["c_u"] > -1) & (step["c_u"] < 1))
        assert np.all(np.abs(caches["a_final"]) < 1)


class TestForward:
    def test_zero_params_yield_half(self):
        y, _ = lstm.forward(np.array([0.1, 0.9, 0.4]), zero_params(3))
        assert y == 0.5

    def test_output_in_unit_interval(self):
        rng = np.random.default_rng(4)
        for seed in range(10):
            p = lstm.init_params(3, seed=seed)
            y, _ = lstm.forward(rng.uniform(-5, 5, 6), p)
            assert 0.0 < y < 1.0

    def test_matches_scalar_oracle(self):
        rng = np.random.default_rng(11)
        for _ in range(10):
            p = lstm.init_params(2, seed=int(rng.integers(1 << 30)))
            window = rng.uniform(0, 1, 3)
            y, _ = lstm.forward(window, p)
            assert y == pytest.approx(lstm_forward_scalar(window, p), abs=1e-12)

    def test_empty_window_rejected(self):
        with pytest.raises(ShapeError):
            lstm.forward(np.array([]), zero_params(2))

    def test_determinism(self):
        p = lstm.init_params(5, seed=2)
        w = np.linspace(0, 1, 8)
        assert lstm.forward(w, p)[0] == lstm.forward(w, p)[0]

    def test_time_reversal_sensitivity(self):
        rng = np.random.default_rng(13)
        differs = 0
        for seed in range(10):
            p = lstm.init_params(4, seed=seed)
            w = rng.uniform(0, 1, 8)
            differs += lstm.forward(w, p)[0] != lstm.forward(w[::-1], p)[0]
        assert differs >= 9


class TestBackward:
    def test_zero_upstream_gradient(self):
        p = lstm.init_params(3, seed=5)
        _, caches = lstm.forward(np.array([0.2, 0.4]), p)
        grads = lstm.backward(caches, 0.0, p)
        for g in grads.values():
            assert not np.any(g)

    def test_output_bias_closed_form(self):
        p = lstm.init_params(4, seed=9)
        y, caches = lstm.forward(np.array([0.3, 0.1, 0.8]), p)
        grads = lstm.backward(caches, 1.7, p)
        assert grads["b_y"][0] == pytest.approx(1.7 * y * (1 - y), rel=1e-12)

    def test_finite_differences_spot_check(self):
        rng = np.random.default_rng(21)
        for _ in range(5):
            h = int(rng.integers(1, 6))
            t_len = int(rng.integers(1, 6))
            p = lstm.init_params(h, seed=int(rng.integers(1 << 30)))
            window = rng.uniform(0, 1, t_len)
            _, caches = lstm.forward(window, p)
            analytic = lstm.backward(caches, 1.0, p)
            numeric = numeric_gradients(lambda w, q: lstm.forward(w, q)[0],
                                        window, p, lstm.WEIGHT_KEYS)
            assert max_relative_error(analytic, numeric) < 1e-4

    def test_cache_mismatch(self):
        p = lstm.init_params(3, seed=1)
        _, caches = lstm.forward(np.array([0.1, 0.2]), p)
        other = lstm.init_params(4, seed=1)
        with pytest.raises(ShapeError):
            lstm.backward(caches, 1.0, other)


class TestSerialization:
    def test_roundtrip(self):
        p = lstm.init_params(7, seed=31)
        text = lstm.serialize(p, window_len=12)
        q, window_len, scaler = lstm.deserialize(text)
        assert window_len == 12 and scaler is None
        for k in lstm.WEIGHT_KEYS:
            assert np.array_equal(getattr(p, k), getattr(q, k))

    def test_missing_field_named(self):
        p = lstm.init_params(2, seed=0)
        text = lstm.serialize(p, 4).replace('"W_f"', '"W_x"')
        with pytest.raises(ModelFormatError, match="W_f"):
            lstm.deserialize(text)

    def test_h50_scalar_count(self):
        import json
        p = lstm.init_params(50, seed=0)
        obj = json.loads(lstm.serialize(p, 12))
        count = 0
        for arr in obj["weights"].values():
            count += np.asarray(arr).size
        assert count == 10_451

    def test_scaler_roundtrip(self):
        from celltide.dataset import ScalerParams
        p = lstm.init_params(2, seed=1)
        _, _, scaler = lstm.deserialize(lstm.serialize(p, 3, ScalerParams(1.5, 9.25)))
        assert scaler == ScalerParams(1.5, 9.25)
