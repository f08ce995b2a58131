import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from irs import (
    DataError,
    EpochData,
    Hyperparams,
    ModelState,
    NoiseSpec,
    StateTransition,
    predict_response,
    standardize,
    validate_epoch,
)


class TestValidateEpoch:
    def test_well_formed(self):
        data = EpochData([[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]], [1.0, 2.0, 3.0])
        assert validate_epoch(data, expected_p=2).ok

    def test_row_response_mismatch(self):
        data = EpochData(np.ones((3, 2)), np.ones(4))
        report = validate_epoch(data)
        assert any("row/response mismatch" in msg for msg in report.issues)

    def test_nan_entry_located(self):
        X = np.ones((3, 2))
        X[1, 0] = np.nan
        report = validate_epoch(EpochData(X, np.ones(3)))
        assert any("non-finite entry at (1,0)" in msg for msg in report.issues)

    def test_column_count_checked(self):
        data = EpochData(np.ones((3, 2)), np.ones(3))
        report = validate_epoch(data, expected_p=5)
        assert not report.ok
        assert any("expected 5" in msg for msg in report.issues)


class TestStandardize:
    def test_single_column(self):
        data = EpochData([[1.0], [2.0], [3.0]], [0.0, 0.0, 0.0])
        out, _ = standardize(data)
        assert_allclose(out.X[:, 0], [-1.0, 0.0, 1.0], atol=1e-12)

    def test_constant_column_zeroed_and_flagged(self):
        data = EpochData([[5.0, 1.0], [5.0, 2.0], [5.0, 3.0]], [1.0, 2.0, 3.0])
        out, scaler = standardize(data)
        assert_allclose(out.X[:, 0], 0.0)
        assert scaler.constant_mask[0] and not scaler.constant_mask[1]

    def test_response_centered(self):
        data = EpochData(np.eye(3), [2.0, 4.0, 6.0])
        out, scaler = standardize(data)
        assert_allclose(out.y, [-2.0, 0.0, 2.0], atol=1e-12)
        assert scaler.y_mean == 4.0

    def test_insufficient_rows(self):
        with pytest.raises(DataError, match="insufficient rows"):
            standardize(EpochData([[1.0, 2.0]], [1.0]))

    def test_moments(self, rng):
        data = EpochData(rng.standard_normal((50, 6)) * 3 + 1, rng.standard_normal(50))
        out, _ = standardize(data)
        assert_allclose(out.X.mean(axis=0), 0.0, atol=1e-12)
        assert_allclose(out.X.var(axis=0, ddof=1), 1.0, atol=1e-10)
        assert abs(out.y.mean()) < 1e-12

    def test_idempotent(self, rng):
        data = EpochData(rng.standard_normal((40, 5)), rng.standard_normal(40))
        once, _ = standardize(data)
        twice, _ = standardize(once)
        assert np.max(np.abs(twice.X - once.X)) < 1e-10
        assert np.max(np.abs(twice.y - once.y)) < 1e-10

    def test_valid_after_standardize(self, rng):
        data = EpochData(rng.standard_normal((10, 3)), rng.standard_normal(10))
        assert validate_epoch(data).ok
        out, _ = standardize(data)
        assert validate_epoch(out).ok

    def test_scaler_transform_matches_training_rows(self, rng):
        data = EpochData(rng.standard_normal((20, 4)) * 2 + 5, rng.standard_normal(20))
        out, scaler = standardize(data)
        assert_allclose(scaler.transform(data.X), out.X, atol=1e-12)


class TestPredictResponse:
    def test_identity(self):
        assert_allclose(predict_response([1.0, 1.0], np.eye(2)), [1.0, 1.0])

    def test_zero(self):
        assert_allclose(predict_response(np.zeros(3), np.ones((4, 3))), np.zeros(4))

    def test_arithmetic(self):
        out = predict_response([2.0, -1.0], [[1.0, 1.0], [0.0, 3.0]])
        assert_allclose(out, [1.0, -3.0])

    def test_dimension_mismatch(self):
        with pytest.raises(DataError):
            predict_response([1.0, 2.0, 3.0], np.eye(2))

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2 ** 31 - 1), st.floats(-3, 3), st.floats(-3, 3))
    def test_linearity(self, seed, a, b):
        r = np.random.default_rng(seed)
        X = r.standard_normal((6, 4))
        t1, t2 = r.standard_normal(4), r.standard_normal(4)
        lhs = predict_response(a * t1 + b * t2, X)
        rhs = a * predict_response(t1, X) + b * predict_response(t2, X)
        assert np.max(np.abs(lhs - rhs)) < 1e-12


class TestTypeInvariants:
    def test_transition_requires_symmetric_q(self):
        with pytest.raises(DataError, match="symmetric"):
            StateTransition(np.eye(2), [[1.0, 0.5], [0.0, 1.0]])

    def test_transition_requires_psd_q(self):
        with pytest.raises(DataError, match="semi-definite"):
            StateTransition(np.eye(2), [[1.0, 0.0], [0.0, -1.0]])

    def test_transition_dimension_match(self):
        with pytest.raises(DataError):
            StateTransition(np.eye(3), np.eye(2))

    def test_model_state_checks_lengths(self):
        with pytest.raises(DataError):
            ModelState(np.zeros(3), np.eye(2), 1.0)

    def test_model_state_symmetrizes_small_drift(self):
        sigma = np.eye(2)
        sigma[0, 1] = 1e-12
        state = ModelState(np.zeros(2), sigma, 1.0)
        assert state.sigma[0, 1] == state.sigma[1, 0]

    def test_noise_spec_modes(self):
        assert NoiseSpec.iid(2.0).is_iid
        assert not NoiseSpec.full(np.eye(3)).is_iid
        with pytest.raises(DataError):
            NoiseSpec.iid(-1.0)
        with pytest.raises(DataError):
            NoiseSpec(w2=1.0, W=np.eye(2))

    def test_hyperparams_reject_negative(self):
        with pytest.raises(Exception):
            Hyperparams(lam=-0.1, tau=0.0)

    def test_arrays_are_read_only(self):
        data = EpochData(np.ones((2, 2)), np.ones(2))
        with pytest.raises(ValueError):
            data.X[0, 0] = 7.0
