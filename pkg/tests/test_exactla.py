"""
F_p 上の線形代数のテストコード
"""

import numpy as np
import pytest

from src.errors import DimensionMismatchError
from src.exactla import (
    FieldSpec, coordinates, complement_basis, extending_columns, inverse, kernel_basis,
    quotient_dim, rank, rref, solve,
)


class TestFieldSpec:
    """FieldSpecクラスのテスト"""

    def test_default_prime(self):
        assert FieldSpec().p == 101

    @pytest.mark.parametrize("p", [0, 1, 4, 100, 2 ** 31])
    def test_invalid_modulus(self, p):
        with pytest.raises(ValueError):
            FieldSpec(p)

    def test_matrix_reduces_entries(self):
        f = FieldSpec(5)
        m = f.matrix([[7, -1], [5, 3]])
        assert m.tolist() == [[2, 4], [0, 3]]

    def test_mul_large_prime(self):
        """int64 で溢れる大きさの p でも正しく積を取る"""
        f = FieldSpec(2147483647)
        a = np.array([[f.p - 1, f.p - 1]], dtype=np.int64)
        b = np.array([[f.p - 1], [f.p - 1]], dtype=np.int64)
        assert f.mul(a, b).tolist() == [[2]]

    def test_mul_dimension_mismatch(self):
        f = FieldSpec(7)
        with pytest.raises(DimensionMismatchError):
            f.mul(np.zeros((2, 3), dtype=np.int64), np.zeros((2, 3), dtype=np.int64))

    def test_inverse_scalar(self):
        f = FieldSpec(7)
        assert (3 * f.inverse_scalar(3)) % 7 == 1


class TestRank:
    """rankのテスト"""

    def setup_method(self):
        self.f = FieldSpec(5)

    def test_identity(self):
        assert rank(np.eye(3, dtype=np.int64), self.f) == 3

    def test_zero(self):
        assert rank(np.zeros((2, 3), dtype=np.int64), self.f) == 0

    def test_proportional_rows(self):
        assert rank(np.array([[1, 2], [2, 4]]), self.f) == 1

    def test_empty(self):
        assert rank(np.zeros((0, 4), dtype=np.int64), self.f) == 0

    def test_characteristic_matters(self):
        m = np.array([[1, 1], [1, -1]])
        assert rank(m, FieldSpec(2)) == 1
        assert rank(m, FieldSpec(3)) == 2

    def test_rank_of_transpose(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            m = rng.integers(0, 5, size=(rng.integers(1, 7), rng.integers(1, 7)))
            assert rank(m, self.f) == rank(m.T, self.f)


class TestKernelBasis:
    """kernel_basisのテスト"""

    def test_identity_has_empty_kernel(self):
        f = FieldSpec(7)
        assert kernel_basis(np.eye(3, dtype=np.int64), f).shape == (3, 0)

    def test_zero_matrix(self):
        f = FieldSpec(7)
        k = kernel_basis(np.zeros((2, 3), dtype=np.int64), f)
        assert k.shape == (3, 3)
        assert rank(k, f) == 3

    def test_forced_direction(self):
        f = FieldSpec(2)
        k = kernel_basis(np.array([[1, 1]]), f)
        assert k[:, 0].tolist() == [1, 1]

    def test_no_rows(self):
        f = FieldSpec(3)
        assert kernel_basis(np.zeros((0, 2), dtype=np.int64), f).tolist() == [[1, 0], [0, 1]]

    def test_rank_nullity(self):
        f = FieldSpec(11)
        rng = np.random.default_rng(3)
        for _ in range(20):
            m = rng.integers(0, 11, size=(rng.integers(1, 6), rng.integers(1, 8)))
            k = kernel_basis(m, f)
            assert m.shape[1] == rank(m, f) + k.shape[1]
            assert not np.any(f.mul(m % 11, k))
            assert rank(k, f) == k.shape[1]

    def test_deterministic(self):
        f = FieldSpec(13)
        m = np.array([[1, 2, 3, 4], [2, 4, 6, 9]])
        assert kernel_basis(m, f).tolist() == kernel_basis(m.copy(), f).tolist()


class TestSolve:
    """solveのテスト"""

    def test_identity(self):
        f = FieldSpec(7)
        b = np.array([[1, 2], [3, 4]])
        assert solve(np.eye(2, dtype=np.int64), b, f).tolist() == b.tolist()

    def test_zero_system(self):
        f = FieldSpec(7)
        x = solve(np.zeros((2, 2), dtype=np.int64), np.zeros((2, 1), dtype=np.int64), f)
        assert x.tolist() == [[0], [0]]

    def test_inconsistent(self):
        f = FieldSpec(7)
        assert solve(np.array([[1], [0]]), np.array([[0], [1]]), f) is None

    def test_dimension_mismatch(self):
        f = FieldSpec(7)
        with pytest.raises(DimensionMismatchError):
            solve(np.eye(2, dtype=np.int64), np.zeros((3, 1), dtype=np.int64), f)

    def test_recovers_image(self):
        f = FieldSpec(101)
        rng = np.random.default_rng(11)
        for _ in range(20):
            a = rng.integers(0, 101, size=(rng.integers(1, 6), rng.integers(1, 6)))
            x = rng.integers(0, 101, size=(a.shape[1], 2))
            b = f.mul(a, x)
            found = solve(a, b, f)
            assert found is not None
            assert f.mul(a, found).tolist() == b.tolist()


class TestQuotientAndBases:
    """商空間の次元と基底操作のテスト"""

    def setup_method(self):
        self.f = FieldSpec(3)

    def test_full_subspace(self):
        assert quotient_dim(np.eye(3, dtype=np.int64), 3, self.f) == 0

    def test_empty_subspace(self):
        assert quotient_dim(np.zeros((3, 0), dtype=np.int64), 3, self.f) == 3

    def test_rank_one_subspace(self):
        sub = np.array([[1], [2], [0]])
        assert quotient_dim(sub, 3, self.f) == 2

    def test_ambient_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            quotient_dim(np.zeros((2, 1), dtype=np.int64), 3, self.f)

    def test_complement(self):
        sub = np.array([[1], [1], [0]])
        comp = complement_basis(sub, self.f)
        assert comp.shape == (3, 2)
        assert rank(np.hstack([sub, comp]), self.f) == 3

    def test_extending_columns(self):
        sub = np.array([[1], [0]])
        candidates = np.array([[2, 1], [0, 1]])
        assert extending_columns(sub, candidates, self.f) == [1]

    def test_inverse(self):
        m = np.array([[1, 1], [0, 1]])
        assert self.f.mul(m, inverse(m, self.f)).tolist() == [[1, 0], [0, 1]]

    def test_inverse_singular(self):
        with pytest.raises(DimensionMismatchError):
            inverse(np.array([[1, 1], [1, 1]]), self.f)

    def test_rref(self):
        reduced, pivots = rref(np.array([[0, 2, 4], [1, 1, 1]]), self.f)
        assert pivots == [0, 1]
        assert reduced.tolist() == [[1, 0, 2], [0, 1, 2]]

    def test_coordinates(self):
        basis = [np.array([[1, 0]]), np.array([[0, 1]])]
        coeffs = coordinates(basis, [np.array([[2, 1]])], self.f)
        assert coeffs[:, 0].tolist() == [2, 1]

    def test_coordinates_outside_span(self):
        with pytest.raises(DimensionMismatchError):
            coordinates([np.array([[1, 0]])], [np.array([[0, 1]])], self.f)
