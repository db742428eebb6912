"""Dense complex matrix helpers: determinants, unitary spectra, random group elements.

Phase convention shared by the whole package: a unitary eigenvalue is written
``exp(-i theta)`` with ``theta`` in ``[0, 2 pi)``, matching ``Q = exp(-i theta)``
for U(1) holonomies.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

UNITARY_TOL = 1e-10


class NotUnitaryError(ValueError):
    pass


def rng_from_seed(seed) -> np.random.Generator:
    """Counter-based generator (Philox) from an int seed; Generators pass through."""
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, np.random.SeedSequence):
        return np.random.Generator(np.random.Philox(seed))
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def as_matrix(M) -> np.ndarray:
    M = np.atleast_2d(np.asarray(M, dtype=complex))
    if M.ndim != 2:
        raise ValueError(f"expected a matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    return M


def det(M) -> complex:
    M = as_matrix(M)
    if M.shape[0] != M.shape[1]:
        raise ValueError(f"determinant of non-square {M.shape} matrix")
    return complex(np.linalg.det(M))


@dataclass(frozen=True)
class UnitaryCheck:
    matrix: np.ndarray
    deviation: float

    @property
    def is_unitary(self) -> bool:
        return self.deviation <= UNITARY_TOL


def check_unitary(U) -> UnitaryCheck:
    U = as_matrix(U)
    if U.shape[0] != U.shape[1]:
        return UnitaryCheck(U, float("inf"))
    dev = np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0])))
    return UnitaryCheck(U, float(dev))


def eig_unitary(U, return_vectors: bool = False):
    """Eigenphases ``theta_j`` in ``[0, 2 pi)`` with ``U = V diag(exp(-i theta)) V^dagger``.

    Uses the complex Schur form, which is diagonal for normal matrices and
    gives an orthonormal ``V`` even for degenerate spectra.
    """
    chk = check_unitary(U)
    if not chk.is_unitary:
        raise NotUnitaryError(f"matrix deviates from unitarity by {chk.deviation:.3g}")
    T, V = scipy.linalg.schur(chk.matrix, output="complex")
    theta = np.mod(-np.angle(np.diag(T)), 2 * np.pi)
    # mod can return 2 pi itself for tiny negative angles
    theta[theta >= 2 * np.pi] = 0.0
    if return_vectors:
        return theta, V
    return theta


def haar_unitary(n: int, seed) -> np.ndarray:
    return haar_unitary_batch(n, 1, seed)[0]


def haar_unitary_batch(n: int, size: int, seed) -> np.ndarray:
    """``size`` Haar-distributed n x n unitaries from QR of Ginibre matrices."""
    if n < 1:
        raise ValueError("n must be positive")
    rng = rng_from_seed(seed)
    z = (rng.standard_normal((size, n, n)) + 1j * rng.standard_normal((size, n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r, axis1=-2, axis2=-1)
    return q * (d / np.abs(d))[:, None, :]


def random_special_orthogonal(n: int, seed) -> np.ndarray:
    if n < 1:
        raise ValueError("n must be positive")
    rng = rng_from_seed(seed)
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q
