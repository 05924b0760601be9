"""DCT transform, zigzag traversal, feature extraction, CSV round trip."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from facedct.errors import DataError
from facedct.features import (
    FeatureVector,
    dct2,
    extract_features,
    feature_from_row,
    feature_to_row,
    features_from_csv,
    features_to_csv,
    idct2,
    zigzag_order,
)


def dct2_direct(plane):
    """O(N^4) evaluation of the orthonormal DCT-II definition (test oracle)."""
    h, w = plane.shape
    out = np.zeros((h, w))
    for u in range(h):
        for v in range(w):
            su = math.sqrt(1.0 / h) if u == 0 else math.sqrt(2.0 / h)
            sv = math.sqrt(1.0 / w) if v == 0 else math.sqrt(2.0 / w)
            acc = 0.0
            for y in range(h):
                for x in range(w):
                    acc += (
                        plane[y, x]
                        * math.cos(math.pi * (2 * y + 1) * u / (2 * h))
                        * math.cos(math.pi * (2 * x + 1) * v / (2 * w))
                    )
            out[u, v] = su * sv * acc
    return out


class TestDct2:
    def test_2x2_impulse(self):
        spectrum = dct2(np.array([[1.0, 0.0], [0.0, 0.0]]))
        assert np.allclose(spectrum, 0.5 * np.ones((2, 2)), atol=1e-15)

    def test_constant_plane_is_dc_only(self):
        c = 0.73
        spectrum = dct2(np.full((6, 6), c))
        assert spectrum[0, 0] == pytest.approx(c * 6, abs=1e-12)
        rest = spectrum.copy()
        rest[0, 0] = 0.0
        assert np.abs(rest).max() < 1e-12

    @pytest.mark.parametrize("shape", [(1, 1), (3, 5), (4, 4), (8, 8)])
    def test_matches_direct_definition(self, shape):
        plane = np.random.default_rng(hash(shape) % 2**32).random(shape)
        assert np.abs(dct2(plane) - dct2_direct(plane)).max() < 1e-12

    def test_round_trip_random_8x8(self):
        plane = np.random.default_rng(8).random((8, 8))
        assert np.abs(idct2(dct2(plane)) - plane).max() < 1e-9

    def test_idct2_of_zero_is_zero(self):
        assert np.abs(idct2(np.zeros((5, 5)))).max() == 0.0

    def test_idct2_of_dc_is_constant(self):
        spectrum = np.zeros((4, 4))
        spectrum[0, 0] = 2.0
        plane = idct2(spectrum)
        assert np.allclose(plane, 2.0 / 4.0, atol=1e-15)

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=50, deadline=None)
    def test_parseval(self, seed):
        plane = np.random.default_rng(seed).random((7, 5)) - 0.5
        energy_in = float((plane**2).sum())
        energy_out = float((dct2(plane) ** 2).sum())
        assert energy_out == pytest.approx(energy_in, rel=1e-9)

    @given(st.integers(0, 2**32 - 1), st.floats(-3, 3), st.floats(-3, 3))
    @settings(max_examples=40, deadline=None)
    def test_linearity(self, seed, a, b):
        rng = np.random.default_rng(seed)
        p, q = rng.random((6, 6)), rng.random((6, 6))
        lhs = dct2(a * p + b * q)
        rhs = a * dct2(p) + b * dct2(q)
        assert np.abs(lhs - rhs).max() < 1e-9


class TestZigzag:
    def test_size_one(self):
        assert zigzag_order(1) == ((0, 0),)

    def test_size_two(self):
        assert zigzag_order(2) == ((0, 0), (0, 1), (1, 0), (1, 1))

    def test_size_three(self):
        assert zigzag_order(3) == (
            (0, 0), (0, 1), (1, 0), (2, 0), (1, 1), (0, 2), (1, 2), (2, 1), (2, 2),
        )

    @given(st.integers(1, 64))
    @settings(max_examples=64, deadline=None)
    def test_bijection(self, n):
        order = zigzag_order(n)
        assert len(order) == n * n
        assert len(set(order)) == n * n
        assert all(0 <= r < n and 0 <= c < n for r, c in order)

    def test_rejects_zero(self):
        with pytest.raises(ValueError):
            zigzag_order(0)


class TestExtractFeatures:
    def test_constant_plane_dc_only(self):
        vec = extract_features(np.full((16, 16), 0.4), dim=100)
        assert vec.dim == 100
        assert vec.coeffs[0] != 0.0
        assert np.abs(vec.coeffs[1:]).max() < 1e-12

    def test_full_dim_is_energy_preserving_permutation(self):
        plane = np.random.default_rng(3).random((6, 6))
        vec = extract_features(plane, dim=36)
        assert float((vec.coeffs**2).sum()) == pytest.approx(float((plane**2).sum()), rel=1e-9)
        spectrum = np.sort(dct2(plane).reshape(-1))
        assert np.allclose(np.sort(vec.coeffs), spectrum, atol=0)

    def test_pure_cosine_mode_lands_at_its_zigzag_slot(self):
        n = 8
        cols = np.arange(n)
        mode = np.cos(np.pi * (2 * cols + 1) * 3 / (2 * n))
        plane = np.tile(mode, (n, 1))
        vec = extract_features(plane, dim=n * n)
        slot = zigzag_order(n).index((0, 3))
        dominant = int(np.argmax(np.abs(vec.coeffs)))
        assert dominant == slot
        others = np.delete(np.abs(vec.coeffs), slot)
        assert others.max() < 1e-9 * abs(vec.coeffs[slot])

    def test_deterministic_bit_for_bit(self):
        plane = np.random.default_rng(9).random((32, 32))
        a = extract_features(plane.copy(), dim=100)
        b = extract_features(plane.copy(), dim=100)
        assert np.array_equal(a.coeffs, b.coeffs)

    @pytest.mark.parametrize("dim", [0, -1, 65])
    def test_dim_out_of_range(self, dim):
        with pytest.raises(ValueError):
            extract_features(np.ones((8, 8)), dim=dim)

    def test_non_square_rejected(self):
        with pytest.raises(ValueError):
            extract_features(np.ones((4, 8)), dim=4)


class TestFeatureCsv:
    @given(
        st.lists(
            st.floats(allow_nan=False, allow_infinity=False, width=64),
            min_size=1,
            max_size=20,
        )
    )
    @settings(max_examples=100)
    def test_row_round_trip_is_bit_exact(self, coeffs):
        vec = FeatureVector(np.array(coeffs), "g", "subj,with,commas")
        back = feature_from_row(feature_to_row(vec))
        assert back == vec

    def test_csv_multi_vector_round_trip(self):
        rng = np.random.default_rng(5)
        vecs = [
            FeatureVector(rng.standard_normal(7), "y", f"s{i}") for i in range(4)
        ]
        assert features_from_csv(features_to_csv(vecs)) == vecs

    def test_dim_mismatch_detected(self):
        with pytest.raises(DataError):
            feature_from_row(["s", "gray", "3", "1.0", "2.0"])

    def test_bad_channel_detected(self):
        with pytest.raises(DataError):
            feature_from_row(["s", "purple", "1", "1.0"])

    def test_non_numeric_detected(self):
        with pytest.raises(DataError):
            feature_from_row(["s", "gray", "1", "abc"])


class TestFeatureVector:
    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            FeatureVector(np.array([1.0, np.nan]), "gray")

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            FeatureVector(np.array([]), "gray")

    def test_coeffs_read_only(self):
        vec = FeatureVector(np.array([1.0]), "gray")
        with pytest.raises(ValueError):
            vec.coeffs[0] = 2.0
