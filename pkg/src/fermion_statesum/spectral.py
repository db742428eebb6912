"""Discrete Dirac matrix of the circle state sum and its spectrum.

The matrix ``iM`` has identity blocks on the diagonal, ``-Q_{j+1}`` on the
block superdiagonal and ``-Q_1`` in the bottom-left corner, so that
``psibar iM psi = sum_j psibar_j (psi_j - Q_{j+1} psi_{j+1})``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .linalg import as_matrix, det
from .statesum import TriangulatedCircle


class ZeroModeError(ValueError):
    pass


@dataclass(frozen=True)
class DiscreteDirac:
    N: int
    n: int
    blocks: tuple
    matrix: np.ndarray

    def det(self) -> complex:
        return det(self.matrix)

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvals(self.matrix)


def build_discrete_dirac(tri: TriangulatedCircle) -> DiscreteDirac:
    N, n = tri.N, tri.n
    iM = np.eye(N * n, dtype=complex)
    for j in range(N):
        # row block j couples psi_j to psi_{j+1}; the last row wraps to block 0 with Q_1
        col = (j + 1) % N
        Q = tri.edges[col]
        iM[j * n:(j + 1) * n, col * n:(col + 1) * n] -= Q
    return DiscreteDirac(N, n, tri.edges, iM)


def k_range(N: int) -> np.ndarray:
    """``k = floor((1-N)/2) .. floor((N-1)/2)``, exactly N values."""
    return np.arange((1 - N) // 2, (N - 1) // 2 + 1)


def discrete_spectrum_u1(theta: float, N: int) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(k, mu_k)`` with ``mu_k = 1 - exp(-i (theta + 2 pi k) / N)``."""
    if N < 1:
        raise ValueError("N must be positive")
    k = k_range(N)
    return k, 1 - np.exp(-1j * (theta + 2 * np.pi * k) / N)


def eigenvector_u1(theta: float, N: int, k: int, edges=None) -> np.ndarray:
    """Eigenvector of ``iM`` for eigenvalue ``mu_k``.

    Components are ``alpha_k^{j-1} Q_j^{-1} ... Q_1^{-1}`` with the principal
    root ``alpha_k = exp(-i theta / N) exp(-2 pi i k / N)``. ``edges`` default
    to equal phases ``exp(-i theta / N)``; if given their product must be
    ``exp(-i theta)``.
    """
    if edges is None:
        edges = [np.exp(-1j * theta / N)] * N
    q = np.array([complex(as_matrix(Q)[0, 0]) for Q in edges])
    if len(q) != N:
        raise ValueError("need N edges")
    if abs(np.prod(q) - np.exp(-1j * theta)) > 1e-10:
        raise ValueError("edge phases do not multiply to exp(-i theta)")
    alpha = np.exp(-1j * (theta + 2 * np.pi * k) / N)
    return alpha ** np.arange(N) / np.cumprod(q)


@dataclass(frozen=True)
class ContinuumSpectrum:
    k: np.ndarray
    lam: np.ndarray
    zero_mode: bool

    @property
    def mu(self) -> np.ndarray:
        """Eigenvalues of ``i D``."""
        return 1j * self.lam


def continuum_spectrum_u1(a: float, l: float, k, allow_zero_mode: bool = False) -> ContinuumSpectrum:
    """``lambda_k = 2 pi (k + a) / l`` for the Dirac operator with constant U(1) connection."""
    zero = abs(a) < 1e-14
    if zero and not allow_zero_mode:
        raise ZeroModeError("a = 0 gives a zero eigenvalue")
    k = np.asarray(k)
    return ContinuumSpectrum(k, 2 * np.pi * (k + a) / l, zero)


@dataclass
class SpectrumReport:
    theta: float
    N: int
    l: float
    k: np.ndarray
    discrete: np.ndarray
    continuum: np.ndarray
    deviation: np.ndarray
    product: complex
    fitted_order: float

    def rows(self):
        for k, d, c, e in zip(self.k, self.discrete, self.continuum, self.deviation):
            yield int(k), d.real, d.imag, c.real, c.imag, float(e)


def compare_spectra(theta: float, N: int, k_max: int, l: float | None = None) -> SpectrumReport:
    """Pair discrete and continuum eigenvalues for ``|k| <= k_max``.

    ``fitted_order`` is the log-log slope of the deviation against
    ``|theta + 2 pi k| / N`` over the reported modes (2 when the two agree to
    second order); NaN when fewer than two distinct scales are available.
    """
    if k_max >= N:
        raise ValueError("k_max must be smaller than N")
    if l is None:
        l = float(N)
    k_all, mu_all = discrete_spectrum_u1(theta, N)
    keep = np.abs(k_all) <= k_max
    k, mu = k_all[keep], mu_all[keep]
    cont = 1j * (theta + 2 * np.pi * k) / l
    dev = np.abs(mu - cont)
    x = np.abs(theta + 2 * np.pi * k) / N
    ok = (x > 0) & (dev > 0)
    if np.unique(x[ok]).size >= 2:
        order = float(np.polyfit(np.log(x[ok]), np.log(dev[ok]), 1)[0])
    else:
        order = float("nan")
    return SpectrumReport(theta, N, l, k, mu, cont, dev, complex(np.prod(mu_all)), order)


class CutoffScheme(enum.Enum):
    SHARP = "sharp"


@dataclass
class CutoffReport:
    a: float
    l: float
    c: np.ndarray
    logdet: np.ndarray
    kappa: float
    coefficients: np.ndarray
    fitted_leading: np.ndarray
    residual: np.ndarray
    counterterm: np.ndarray

    def rows(self):
        for row in zip(self.c, self.logdet, self.fitted_leading, self.residual):
            yield tuple(float(v) for v in row)


def cutoff_log_det(a: float, l: float, c: float, scheme: CutoffScheme = CutoffScheme.SHARP) -> float:
    """``sum log|lambda_k|`` over eigenvalues with ``|lambda_k| <= c`` (boundary included)."""
    if scheme is not CutoffScheme.SHARP:
        raise NotImplementedError(scheme)
    if not c > 2 * np.pi / l:
        raise ValueError("cutoff must exceed 2 pi / l")
    unit = 2 * np.pi / l
    kmin = math.ceil(-c / unit - a) - 1
    kmax = math.floor(c / unit - a) + 1
    lam = unit * (np.arange(kmin, kmax + 1) + a)
    lam = lam[(np.abs(lam) <= c) & (lam != 0)]
    return float(np.sum(np.log(np.abs(lam))))


def cutoff_report(a: float, l: float, cutoffs) -> CutoffReport:
    """Fit ``logdet(c) ~ kappa c log c + beta c + gamma log c + delta`` over the grid.

    ``fitted_leading`` is ``kappa c log c``; ``residual`` what remains after
    subtracting it. ``counterterm`` is ``Lambda(c)`` such that adding
    ``Lambda(c) l`` removes the fitted terms growing like ``c``.
    """
    c = np.asarray(cutoffs, dtype=float)
    y = np.array([cutoff_log_det(a, l, ci) for ci in c])
    basis = np.column_stack([c * np.log(c), c, np.log(c), np.ones_like(c)])
    coef, *_ = np.linalg.lstsq(basis, y, rcond=None)
    leading = coef[0] * c * np.log(c)
    counterterm = -(coef[0] * c * np.log(c) + coef[1] * c) / l
    return CutoffReport(a, l, c, y, float(coef[0]), coef, leading, y - leading, counterterm)


def half_integer_log_det(K: int) -> float:
    """Closed form for ``a = 1/2, l = 2 pi``: the eigenvalues with ``|lambda| <= K`` are
    ``+-(j + 1/2)``, j < K, so ``logdet = 2 log((2K)! / (4^K K!))``.
    """
    return 2 * (math.lgamma(2 * K + 1) - K * math.log(4) - math.lgamma(K + 1))


def stirling_log_factorial(n: int, terms: int = 3) -> float:
    """``log n!`` from Stirling's series."""
    if n == 0:
        return 0.0
    coeffs = [1 / 12, -1 / 360, 1 / 1260, -1 / 1680]
    s = n * math.log(n) - n + 0.5 * math.log(2 * math.pi * n)
    for i, cf in enumerate(coeffs[:terms]):
        s += cf / n ** (2 * i + 1)
    return s
