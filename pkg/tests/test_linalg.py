import numpy as np
import pytest
from scipy import stats

from fermion_statesum import linalg

from conftest import random_complex
from test_grassmann import cofactor_det


def test_det_identity():
    assert linalg.det(np.eye(3)) == pytest.approx(1)


def test_det_diagonal_phases():
    t1, t2 = 0.3, 1.9
    assert linalg.det(np.diag(np.exp(-1j * np.array([t1, t2])))) == pytest.approx(np.exp(-1j * (t1 + t2)))


@pytest.mark.parametrize("trial", range(5))
def test_det_cofactor(trial, rng):
    M = random_complex(rng, 3, 3)
    ref = cofactor_det(M.tolist())
    assert abs(linalg.det(M) - ref) <= 1e-12 * max(1, abs(ref))


def test_det_multiplicative(rng):
    for _ in range(10):
        A, B = random_complex(rng, 4, 4), random_complex(rng, 4, 4)
        ref = linalg.det(A) * linalg.det(B)
        assert abs(linalg.det(A @ B) - ref) <= 1e-11 * abs(ref)


def test_det_non_square():
    with pytest.raises(ValueError):
        linalg.det(np.ones((2, 3)))


def test_unitary_check():
    assert linalg.check_unitary(np.eye(2)).is_unitary
    bad = linalg.check_unitary(np.array([[1.0, 1e-6], [0.0, 1.0]]))
    assert not bad.is_unitary and bad.deviation > 1e-10


class TestEigUnitary:
    def test_scalar(self):
        assert linalg.eig_unitary(np.array([[np.exp(-1j * np.pi / 2)]])) == pytest.approx([np.pi / 2])

    def test_rotation(self):
        phi = 0.8
        R = np.array([[np.cos(phi), -np.sin(phi)], [np.sin(phi), np.cos(phi)]])
        assert sorted(linalg.eig_unitary(R)) == pytest.approx([phi, 2 * np.pi - phi])

    def test_haar_product(self):
        U = linalg.haar_unitary(3, 5)
        theta = linalg.eig_unitary(U)
        assert np.all((theta >= 0) & (theta < 2 * np.pi))
        assert abs(np.prod(np.exp(-1j * theta)) - np.linalg.det(U)) <= 1e-10

    def test_reconstruction(self):
        U = linalg.haar_unitary(4, 9)
        theta, V = linalg.eig_unitary(U, return_vectors=True)
        assert np.abs(V @ np.diag(np.exp(-1j * theta)) @ V.conj().T - U).max() <= 1e-10

    def test_rejects_non_unitary(self):
        with pytest.raises(linalg.NotUnitaryError):
            linalg.eig_unitary(np.array([[2.0]]))


class TestHaar:
    N = 100_000

    def test_phase_mean(self):
        U = linalg.haar_unitary_batch(1, self.N, 1)[:, 0, 0]
        assert abs(U.mean()) <= 3 * np.sqrt(1 / self.N)

    @pytest.mark.parametrize("n", [2, 3])
    def test_entry_moment(self, n):
        x = np.abs(linalg.haar_unitary_batch(n, self.N, 2)[:, 0, 0]) ** 2
        assert abs(x.mean() - 1 / n) <= 3 * x.std() / np.sqrt(self.N)

    def test_all_unitary(self):
        batch = linalg.haar_unitary_batch(3, 500, 3)
        assert max(linalg.check_unitary(U).deviation for U in batch) <= 1e-10

    def test_left_invariance_ks(self):
        # the distribution of Re tr U is unchanged by a fixed left factor
        V = linalg.haar_unitary(2, 99)
        a = np.trace(linalg.haar_unitary_batch(2, 10_000, 4), axis1=1, axis2=2).real
        b = np.trace(V @ linalg.haar_unitary_batch(2, 10_000, 5), axis1=1, axis2=2).real
        assert stats.ks_2samp(a, b).pvalue > 0.01

    def test_seed_reproducible(self):
        assert np.array_equal(linalg.haar_unitary(3, 42), linalg.haar_unitary(3, 42))


class TestSpecialOrthogonal:
    def test_trivial(self):
        assert np.array_equal(linalg.random_special_orthogonal(1, 0), [[1.0]])

    def test_so3_has_axis(self):
        R = linalg.random_special_orthogonal(3, 7)
        assert np.linalg.det(R) == pytest.approx(1, abs=1e-12)
        assert np.min(np.abs(np.linalg.eigvals(R) - 1)) <= 1e-10

    def test_so2_pair(self):
        ev = np.linalg.eigvals(linalg.random_special_orthogonal(2, 3))
        assert np.allclose(np.abs(ev), 1) and abs(ev[0] - ev[1].conj()) <= 1e-12
