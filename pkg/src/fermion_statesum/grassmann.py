"""Finite-dimensional Grassmann algebra with Berezin integration.

Monomials are stored as integer bitmasks over generator indices; bit ``i``
set means generator ``a_i`` is present. The canonical order of a monomial is
ascending generator index, so ``a_1 a_3`` is stored as ``0b1010`` with
coefficient +1 and ``a_3 a_1`` as the same mask with coefficient -1.
"""
from __future__ import annotations

import contextlib
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

MAX_GENERATORS = 24
TOL = 1e-12


class GrassmannError(Exception):
    pass


class ContextError(GrassmannError):
    """Operands belong to different algebras."""


class CapacityError(GrassmannError):
    """Requested algebra exceeds ``MAX_GENERATORS``."""


class SingularMatrixError(GrassmannError):
    pass


# Test hook for the mutation check: "left" is the real convention.
_strip_side = "left"


@contextlib.contextmanager
def mutated_integration_convention():
    """Temporarily strip integrated generators from the right instead of the left.

    Only used to confirm that the verification suites catch a wrong sign
    convention; never enabled in normal operation.
    """
    global _strip_side
    old = _strip_side
    _strip_side = "right"
    try:
        yield
    finally:
        _strip_side = old


def _bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def _reorder_sign(left: int, right: int) -> int:
    """Sign of sorting the concatenation ``left right`` into ascending order."""
    inversions = 0
    for j in _bits(right):
        inversions += (left >> (j + 1)).bit_count()
    return -1 if inversions & 1 else 1


class GrassmannAlgebra:
    """Algebra context over ``size`` anticommuting generators ``a_0 .. a_{size-1}``."""

    def __init__(self, size: int, labels: Sequence[str] | None = None):
        if size < 0:
            raise ValueError("size must be non-negative")
        if size > MAX_GENERATORS:
            raise CapacityError(
                f"{size} generators requested, limit is {MAX_GENERATORS}"
            )
        if labels is not None and len(labels) != size:
            raise ValueError("need one label per generator")
        self.size = size
        self.labels = tuple(labels) if labels is not None else None

    def __repr__(self) -> str:
        return f"GrassmannAlgebra(size={self.size})"

    def label(self, i: int) -> str:
        return self.labels[i] if self.labels else f"a{i}"

    def gen(self, i: int) -> GrassmannElement:
        if not 0 <= i < self.size:
            raise IndexError(f"generator {i} outside algebra of size {self.size}")
        return GrassmannElement(self, {1 << i: 1.0 + 0j})

    def scalar(self, c: complex) -> GrassmannElement:
        return GrassmannElement(self, {0: complex(c)} if c != 0 else {})

    @property
    def one(self) -> GrassmannElement:
        return self.scalar(1.0)

    @property
    def zero(self) -> GrassmannElement:
        return GrassmannElement(self, {})

    def monomial(self, gens: Sequence[int], coeff: complex = 1.0) -> GrassmannElement:
        """Product ``coeff * a_{g0} a_{g1} ...`` in the given (not necessarily sorted) order."""
        out = self.scalar(coeff)
        for g in gens:
            out = out * self.gen(g)
        return out


@dataclass(frozen=True)
class GeneratorVector:
    """An n-component fermion field, either psi (unbarred) or psibar (barred).

    ``partner`` holds the ids of the conjugate vector; the measure
    ``dpsi dpsibar`` interleaves the two as ``da_1 db_1 ... da_n db_n``.
    """

    ids: tuple[int, ...]
    barred: bool
    partner: tuple[int, ...]

    def __post_init__(self):
        if len(set(self.ids)) != len(self.ids):
            raise ValueError("generator ids must be distinct")
        if set(self.ids) & set(self.partner):
            raise ValueError("vector and partner share generators")
        if len(self.partner) != len(self.ids):
            raise ValueError("partner must have the same length")

    def __len__(self) -> int:
        return len(self.ids)

    def elements(self, algebra: GrassmannAlgebra) -> list[GrassmannElement]:
        return [algebra.gen(i) for i in self.ids]

    @property
    def mask(self) -> int:
        m = 0
        for i in self.ids:
            m |= 1 << i
        return m


def field_pair(psi_ids: Sequence[int], psibar_ids: Sequence[int]) -> tuple[GeneratorVector, GeneratorVector]:
    psi_ids, psibar_ids = tuple(psi_ids), tuple(psibar_ids)
    return (
        GeneratorVector(psi_ids, False, psibar_ids),
        GeneratorVector(psibar_ids, True, psi_ids),
    )


def measure(psi: GeneratorVector, psibar: GeneratorVector) -> list[int]:
    """Integration order for ``dpsi dpsibar``: a_1, b_1, a_2, b_2, ..."""
    if psi.barred or not psibar.barred:
        raise ValueError("expected (psi, psibar) in that order")
    order = []
    for a, b in zip(psi.ids, psibar.ids):
        order += [a, b]
    return order


class GrassmannElement:
    """Sparse polynomial in the generators with complex coefficients."""

    __slots__ = ("algebra", "terms")

    def __init__(self, algebra: GrassmannAlgebra, terms: dict[int, complex]):
        self.algebra = algebra
        self.terms = {m: complex(c) for m, c in terms.items() if c != 0}

    # -- inspection ---------------------------------------------------------
    def monomials(self) -> list[tuple[tuple[int, ...], complex]]:
        return [
            (tuple(_bits(m)), c)
            for m, c in sorted(self.terms.items(), key=lambda t: (t[0].bit_count(), t[0]))
        ]

    def coefficient(self, gens: Sequence[int]) -> complex:
        """Coefficient of the monomial written in the given order (sign included)."""
        mask = 0
        sign = 1
        for g in gens:
            if mask >> g & 1:
                return 0j
            sign *= _reorder_sign(mask, 1 << g)
            mask |= 1 << g
        return sign * self.terms.get(mask, 0j)

    @property
    def scalar_part(self) -> complex:
        return self.terms.get(0, 0j)

    def support(self) -> int:
        """Mask of every generator appearing in some term."""
        m = 0
        for k in self.terms:
            m |= k
        return m

    def depends_on(self, ids: Iterable[int]) -> bool:
        sup = self.support()
        return any(sup >> i & 1 for i in ids)

    def is_even(self) -> bool:
        return all(m.bit_count() % 2 == 0 for m in self.terms)

    def is_odd(self) -> bool:
        return all(m.bit_count() % 2 == 1 for m in self.terms)

    def max_abs_diff(self, other: GrassmannElement) -> float:
        _check_context(self, other)
        keys = set(self.terms) | set(other.terms)
        return max((abs(self.terms.get(k, 0j) - other.terms.get(k, 0j)) for k in keys), default=0.0)

    def allclose(self, other: GrassmannElement, tol: float = TOL) -> bool:
        return self.max_abs_diff(other) <= tol

    def chop(self, tol: float = 1e-14) -> GrassmannElement:
        return GrassmannElement(self.algebra, {m: c for m, c in self.terms.items() if abs(c) > tol})

    def render(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for gens, c in self.monomials():
            name = "".join(self.algebra.label(g) for g in gens) or "1"
            parts.append(f"+({c.real:.6g},{c.imag:.6g})·{name}")
        return " ".join(parts)

    def __repr__(self) -> str:
        return f"<GrassmannElement {self.render()}>"

    # -- arithmetic ---------------------------------------------------------
    def __add__(self, other):
        if isinstance(other, GrassmannElement):
            _check_context(self, other)
            out = dict(self.terms)
            for m, c in other.terms.items():
                out[m] = out.get(m, 0j) + c
            return GrassmannElement(self.algebra, out)
        return self + self.algebra.scalar(other)

    __radd__ = __add__

    def __neg__(self):
        return GrassmannElement(self.algebra, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, GrassmannElement):
            return mul(self, other)
        c = complex(other)
        return GrassmannElement(self.algebra, {m: c * v for m, v in self.terms.items()})

    def __rmul__(self, other):
        # scalars commute with everything
        return self.__mul__(other)

    def __truediv__(self, other):
        return self * (1.0 / complex(other))


def _check_context(f: GrassmannElement, g: GrassmannElement) -> None:
    if f.algebra is not g.algebra:
        raise ContextError("elements belong to different algebra contexts")


def mul(f: GrassmannElement, g: GrassmannElement) -> GrassmannElement:
    _check_context(f, g)
    out: dict[int, complex] = {}
    for m1, c1 in f.terms.items():
        for m2, c2 in g.terms.items():
            if m1 & m2:
                continue
            m = m1 | m2
            out[m] = out.get(m, 0j) + _reorder_sign(m1, m2) * c1 * c2
    return GrassmannElement(f.algebra, out)


def _integrate_one(f: GrassmannElement, x: int) -> GrassmannElement:
    bit = 1 << x
    below = bit - 1
    out: dict[int, complex] = {}
    for m, c in f.terms.items():
        if not m & bit:
            continue
        if _strip_side == "left":
            passed = (m & below).bit_count()
        else:
            passed = (m & ~below & ~bit).bit_count()
        out[m ^ bit] = -c if passed & 1 else c
    return GrassmannElement(f.algebra, out)


def berezin(f: GrassmannElement, order: Sequence[int]) -> GrassmannElement:
    """Integrate ``∫dx_1 dx_2 ... dx_k f`` with ``order = [x_1, ..., x_k]``.

    The last listed differential acts first. A single integration moves its
    generator to the leftmost slot of each monomial and strips it.
    """
    if len(set(order)) != len(order):
        raise ValueError("repeated generator in integration order")
    for x in order:
        if not 0 <= x < f.algebra.size:
            raise IndexError(f"generator {x} not in algebra")
    for x in reversed(order):
        f = _integrate_one(f, x)
    return f


def substitute(f: GrassmannElement, x: int, replacement: GrassmannElement) -> GrassmannElement:
    """Replace generator ``x`` by an odd ``replacement`` everywhere in ``f``.

    ``replacement`` may contain ``x`` only as the bare linear term, which
    covers translations ``x -> x + c``.
    """
    _check_context(f, replacement)
    if not replacement.is_odd():
        raise ValueError("replacement must be odd")
    bit = 1 << x
    if any(m & bit and m != bit for m in replacement.terms):
        raise ValueError(f"replacement contains generator {x} beyond the linear term")
    return linear_change(f, {x: replacement})


def linear_change(f: GrassmannElement, mapping: dict[int, GrassmannElement]) -> GrassmannElement:
    """Simultaneous substitution of generators by odd elements (algebra homomorphism)."""
    alg = f.algebra
    for r in mapping.values():
        _check_context(f, r)
        if not r.is_odd():
            raise ValueError("substituted elements must be odd")
    moved = 0
    for x in mapping:
        moved |= 1 << x
    out = alg.zero
    for m, c in f.terms.items():
        if not m & moved:
            out = out + GrassmannElement(alg, {m: c})
            continue
        term = alg.scalar(c)
        for g in _bits(m):
            term = term * (mapping[g] if g in mapping else alg.gen(g))
        out = out + term
    return out


def exp_even(f: GrassmannElement) -> GrassmannElement:
    """Exponential of an even nilpotent element; the series terminates exactly."""
    if f.scalar_part != 0:
        raise ValueError("exp_even needs zero scalar part")
    if not f.is_even():
        raise ValueError("exp_even needs an even element")
    out = f.algebra.one
    term = f.algebra.one
    k = 1
    while True:
        term = term * f / k
        if not term.terms:
            return out
        out = out + term
        k += 1


def bilinear(left: Sequence[GrassmannElement], M, right: Sequence[GrassmannElement]) -> GrassmannElement:
    """``sum_ij left_i M_ij right_j``."""
    M = np.asarray(M, dtype=complex)
    if M.shape != (len(left), len(right)) or not len(left):
        raise ValueError(f"matrix shape {M.shape} does not match vectors ({len(left)}, {len(right)})")
    out = left[0].algebra.zero
    for i, li in enumerate(left):
        for j, rj in enumerate(right):
            if M[i, j] != 0:
                out = out + complex(M[i, j]) * (li * rj)
    return out


def gaussian_berezin(
    M,
    psi: GeneratorVector,
    psibar: GeneratorVector,
    algebra: GrassmannAlgebra,
    cbar: Sequence[GrassmannElement] | None = None,
    d: Sequence[GrassmannElement] | None = None,
) -> GrassmannElement:
    """Expand and integrate ``∫dpsi dpsibar exp(psibar M psi + cbar psi + psibar d)``."""
    M = np.asarray(M, dtype=complex)
    n = len(psi)
    if M.shape != (n, n):
        raise ValueError("M must be n x n with n = len(psi)")
    field_ids = set(psi.ids) | set(psibar.ids)
    for src in (cbar, d):
        if src is None:
            continue
        if len(src) != n:
            raise ValueError("source vectors must have n components")
        for s in src:
            if not s.is_odd():
                raise ValueError("source components must be odd")
            if s.depends_on(field_ids):
                raise ValueError("sources must not involve psi or psibar")
    if (cbar is not None or d is not None) and np.linalg.matrix_rank(M) < n:
        raise SingularMatrixError("M must be invertible when sources are present")
    a = psi.elements(algebra)
    b = psibar.elements(algebra)
    exponent = bilinear(b, M, a)
    if cbar is not None:
        exponent = exponent + sum((cbar[i] * a[i] for i in range(n)), algebra.zero)
    if d is not None:
        exponent = exponent + sum((b[i] * d[i] for i in range(n)), algebra.zero)
    return berezin(exp_even(exponent), measure(psi, psibar))


def gaussian_closed_form(
    M,
    algebra: GrassmannAlgebra,
    cbar: Sequence[GrassmannElement] | None = None,
    d: Sequence[GrassmannElement] | None = None,
) -> GrassmannElement:
    """``det M * exp(-cbar M^{-1} d)``, the completed-square value of the Gaussian."""
    M = np.asarray(M, dtype=complex)
    det = complex(np.linalg.det(M))
    if cbar is None or d is None:
        # a single source contributes nothing: every term leaves a field unpaired
        return algebra.scalar(det)
    if np.linalg.matrix_rank(M) < M.shape[0]:
        raise SingularMatrixError("M must be invertible when sources are present")
    return det * exp_even(-bilinear(cbar, np.linalg.inv(M), d))


def bilinear_pair(
    f: GrassmannElement,
    g: GrassmannElement,
    psi: GeneratorVector,
    psibar: GeneratorVector,
) -> GrassmannElement:
    """Gluing pairing ``∫dpsi dpsibar f e^{psibar psi} g``.

    ``f`` may involve ``psi`` but not ``psibar``; ``g`` the other way round.
    """
    _check_context(f, g)
    if f.depends_on(psibar.ids):
        raise ValueError("left factor must not depend on psibar")
    if g.depends_on(psi.ids):
        raise ValueError("right factor must not depend on psi")
    alg = f.algebra
    kernel = exp_even(bilinear(psibar.elements(alg), np.eye(len(psi)), psi.elements(alg)))
    return berezin(f * kernel * g, measure(psi, psibar))

