import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from sketchtest import linalg
from sketchtest.errors import DegenerateInput, InvalidArgument


def test_gaussian_matrix_is_deterministic():
    a = linalg.gaussian_matrix(2, 2, 1.0, 7)
    b = linalg.gaussian_matrix(2, 2, 1.0, 7)
    np.testing.assert_array_equal(a, b)


def test_gaussian_matrix_moments():
    M = linalg.gaussian_matrix(1000, 1000, 1.0, 3)
    assert abs(M.mean()) <= 0.01
    H = linalg.gaussian_matrix(1000, 1000, 0.5, 4)
    assert abs(H.var() - 0.25) <= 0.02


def test_seed_validation():
    with pytest.raises(InvalidArgument):
        linalg.check_seed(-1)
    with pytest.raises(InvalidArgument):
        linalg.check_seed(1.5)
    with pytest.raises(InvalidArgument):
        linalg.gaussian_matrix(0, 3, 1.0, 0)


def test_string_keys_give_distinct_streams():
    a = linalg.rng(0, "width").standard_normal(4)
    b = linalg.rng(0, "norm").standard_normal(4)
    c = linalg.rng(0, "width").standard_normal(4)
    assert not np.allclose(a, b)
    np.testing.assert_array_equal(a, c)
    # long keys sharing a prefix must not collide
    assert linalg.derive_seed(0, "instance-aaaaaaaa-1") != linalg.derive_seed(0, "instance-aaaaaaaa-2")


def test_rotation_dimension_one():
    for s in range(10):
        R = linalg.random_rotation(1, s)
        assert R.shape == (1, 1) and abs(abs(R[0, 0]) - 1) == 0


def test_rotation_is_orthogonal():
    R = linalg.random_rotation(8, 0)
    assert np.abs(R.T @ R - np.eye(8)).max() <= 1e-10


def test_rotation_first_column_uniform_on_sphere():
    # each coordinate of a uniform point on S^2 is uniform on [-1, 1]
    n = 100_000
    cols = np.array([linalg.random_rotation(3, linalg.rng(5, i))[:, 0] for i in range(n)])
    for j in range(3):
        x = np.sort(cols[:, j])
        cdf = (x + 1) / 2
        ks = max(np.max(np.arange(1, n + 1) / n - cdf), np.max(cdf - np.arange(n) / n))
        assert ks <= 1.63 / math.sqrt(n)  # 1% level


def test_normalize_columns_examples():
    np.testing.assert_allclose(linalg.normalize_columns(np.array([[3.0], [4.0]]))[:, 0], [0.6, 0.8])
    np.testing.assert_array_equal(linalg.normalize_columns(np.eye(3)), np.eye(3))
    M = linalg.normalize_columns(np.random.default_rng(0).standard_normal((10, 10)))
    assert np.all(np.abs(np.linalg.norm(M, axis=0) - 1) <= 1e-12)


def test_normalize_columns_rejects_zero_column():
    with pytest.raises(DegenerateInput, match="column 1"):
        linalg.normalize_columns(np.array([[1.0, 0.0], [0.0, 0.0]]))


def test_unit_sphere_columns():
    U = linalg.unit_sphere(5, 7, 0)
    assert U.shape == (5, 7)
    np.testing.assert_allclose(np.linalg.norm(U, axis=0), 1.0, atol=1e-12)


finite = arrays(np.float64, st.tuples(st.integers(1, 6), st.integers(1, 6)),
                elements=st.floats(-1e300, 1e300, allow_nan=False))


@given(M=finite)
def test_csv_round_trip_is_exact(M, tmp_path_factory):
    path = tmp_path_factory.mktemp("csv") / "M.csv"
    linalg.save_csv(path, M)
    np.testing.assert_array_equal(linalg.load_matrix(path), M)


@given(M=finite)
def test_sptx_round_trip_is_exact(M, tmp_path_factory):
    path = tmp_path_factory.mktemp("sptx") / "M.sptx"
    linalg.save_sptx(path, M)
    np.testing.assert_array_equal(linalg.load_matrix(path), M)


def test_sptx_rejects_bad_magic(tmp_path):
    path = tmp_path / "bad.sptx"
    path.write_bytes(b"NOPE" + bytes(40))
    with pytest.raises(InvalidArgument):
        linalg.load_sptx(path)
